//! Group law of ℍⁿ, the motion group `U(n) ⋉ ℍⁿ`, the Schrödinger representation
//! and its matrix coefficients in the scaled Hermite basis.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_hermite, Grid1, Rule};
use crate::specfun::{hermite_functions, laguerre_seq, MultiIndex, HERMITE_DEGREE_CAP};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct HeisPoint {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
}

impl HeisPoint {
    pub fn new(x: Vec<f64>, u: Vec<f64>, t: f64) -> Self {
        assert_eq!(x.len(), u.len(), "x and u must have equal length");
        Self { x, u, t }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![0.0; n], vec![0.0; n], 0.0)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.x.iter().map(|v| -v).collect(), self.u.iter().map(|v| -v).collect(), -self.t)
    }
}

fn dot<T: Copy + std::ops::Mul<Output = T> + std::iter::Sum>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&p, &q)| p * q).sum()
}

/// `(x,u,t)(x',u',t') = (x+x', u+u', t+t'+½(u·x' − x·u'))`.
pub fn hgroup_mul(p: &HeisPoint, q: &HeisPoint) -> Result<HeisPoint> {
    if p.dim() != q.dim() {
        return Err(Error::Dimension { expected: p.dim(), got: q.dim() });
    }
    let x = p.x.iter().zip(&q.x).map(|(a, b)| a + b).collect();
    let u = p.u.iter().zip(&q.u).map(|(a, b)| a + b).collect();
    let t = p.t + q.t + 0.5 * (dot(&p.u, &q.x) - dot(&p.x, &q.u));
    Ok(HeisPoint::new(x, u, t))
}

/// A point `(z, w, ζ) ∈ ℂ^{2n+1}` of the complexified group.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoint {
    pub z: Vec<C64>,
    pub w: Vec<C64>,
    pub zeta: C64,
}

impl ComplexPoint {
    pub fn new(z: Vec<C64>, w: Vec<C64>, zeta: C64) -> Self {
        assert_eq!(z.len(), w.len(), "z and w must have equal length");
        Self { z, w, zeta }
    }

    pub fn real(p: &HeisPoint) -> Self {
        Self::new(
            p.x.iter().map(|&v| C64::new(v, 0.0)).collect(),
            p.u.iter().map(|&v| C64::new(v, 0.0)).collect(),
            C64::new(p.t, 0.0),
        )
    }

    /// `(iy, iv, iη)`.
    pub fn purely_imaginary(y: &[f64], v: &[f64], eta: f64) -> Self {
        Self::new(
            y.iter().map(|&a| C64::new(0.0, a)).collect(),
            v.iter().map(|&a| C64::new(0.0, a)).collect(),
            C64::new(0.0, eta),
        )
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn is_purely_imaginary(&self) -> bool {
        self.z.iter().chain(&self.w).all(|c| c.re == 0.0) && self.zeta.re == 0.0
    }

    /// `|y|² + |v|²` from the imaginary parts.
    pub fn imag_radius2(&self) -> f64 {
        self.z.iter().chain(&self.w).map(|c| c.im * c.im).sum()
    }

    pub fn eta(&self) -> f64 {
        self.zeta.im
    }
}

/// Left translation of a complex point by a real group element.
pub fn translate(h: &HeisPoint, p: &ComplexPoint) -> ComplexPoint {
    let z: Vec<C64> = h.x.iter().zip(&p.z).map(|(&a, &b)| b + a).collect();
    let w: Vec<C64> = h.u.iter().zip(&p.w).map(|(&a, &b)| b + a).collect();
    let uz: C64 = h.u.iter().zip(&p.z).map(|(&a, &b)| b * a).sum();
    let xw: C64 = h.x.iter().zip(&p.w).map(|(&a, &b)| b * a).sum();
    ComplexPoint::new(z, w, p.zeta + h.t + 0.5 * (uz - xw))
}

/// `(σ, h) ∈ U(n) ⋉ ℍⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionElement {
    pub sigma: DMatrix<C64>,
    pub translation: HeisPoint,
}

impl MotionElement {
    pub fn new(sigma: DMatrix<C64>, translation: HeisPoint) -> Result<Self> {
        let n = translation.dim();
        if sigma.nrows() != n || sigma.ncols() != n {
            return Err(Error::Dimension { expected: n, got: sigma.nrows() });
        }
        let defect = (sigma.adjoint() * &sigma - DMatrix::<C64>::identity(n, n)).norm();
        if defect > 1e-12 {
            return Err(Error::NonUnitary(defect));
        }
        Ok(Self { sigma, translation })
    }

    /// The `n = 1` element `(e^{iθ}, h)`.
    pub fn rotation(theta: f64, translation: HeisPoint) -> Result<Self> {
        if translation.dim() != 1 {
            return Err(Error::Dimension { expected: 1, got: translation.dim() });
        }
        Self::new(DMatrix::from_element(1, 1, C64::from_polar(1.0, theta)), translation)
    }

    pub fn identity(n: usize) -> Self {
        Self { sigma: DMatrix::identity(n, n), translation: HeisPoint::identity(n) }
    }

    /// Product `self · other` in the motion group.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let rotated = rotate_real(&self.sigma, &other.translation);
        let translation = hgroup_mul(&self.translation, &rotated)?;
        Ok(Self { sigma: &self.sigma * &other.sigma, translation })
    }
}

fn rotate_real(sigma: &DMatrix<C64>, h: &HeisPoint) -> HeisPoint {
    let n = h.dim();
    let mut x = vec![0.0; n];
    let mut u = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let s = sigma[(i, j)];
            x[i] += s.re * h.x[j] - s.im * h.u[j];
            u[i] += s.im * h.x[j] + s.re * h.u[j];
        }
    }
    HeisPoint::new(x, u, h.t)
}

fn rotate_complex(sigma: &DMatrix<C64>, p: &ComplexPoint) -> ComplexPoint {
    let n = p.dim();
    let mut z = vec![C64::new(0.0, 0.0); n];
    let mut w = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            let s = sigma[(i, j)];
            z[i] += s.re * p.z[j] - s.im * p.w[j];
            w[i] += s.im * p.z[j] + s.re * p.w[j];
        }
    }
    ComplexPoint::new(z, w, p.zeta)
}

/// `g · (z, w, ζ)`: rotate `(z, w)` by `σ`, then translate by the complexified group law.
pub fn motion_action(g: &MotionElement, p: &ComplexPoint) -> Result<ComplexPoint> {
    if g.translation.dim() != p.dim() {
        return Err(Error::Dimension { expected: g.translation.dim(), got: p.dim() });
    }
    Ok(translate(&g.translation, &rotate_complex(&g.sigma, p)))
}

/// Samples of a function on a tensor grid in ℝⁿ, first axis slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    pub n: usize,
    pub grid: Grid1,
    pub values: Vec<C64>,
}

impl SampledFn {
    pub fn from_fn(n: usize, grid: Grid1, f: impl Fn(&[f64]) -> C64) -> Self {
        let total = grid.count.pow(n as u32);
        let mut values = Vec::with_capacity(total);
        let mut xs = vec![0.0; n];
        for idx in 0..total {
            unravel(idx, grid.count, &mut xs, &grid);
            values.push(f(&xs));
        }
        Self { n, grid, values }
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.step.powi(self.n as i32)
    }
}

fn unravel(mut idx: usize, count: usize, xs: &mut [f64], grid: &Grid1) {
    for d in (0..xs.len()).rev() {
        xs[d] = grid.point(idx % count);
        idx /= count;
    }
}

fn edge_is_negligible(phi: &SampledFn) -> bool {
    let n = phi.n;
    let c = phi.grid.count;
    let max = phi.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return true;
    }
    let mut worst: f64 = 0.0;
    for (idx, v) in phi.values.iter().enumerate() {
        let mut rest = idx;
        let mut on_edge = false;
        for _ in 0..n {
            let i = rest % c;
            rest /= c;
            on_edge |= i < 2 || i + 2 >= c;
        }
        if on_edge {
            worst = worst.max(v.norm());
        }
    }
    worst <= 1e-12 * max
}

fn cubic_weights(frac: f64) -> [f64; 4] {
    let t = frac;
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

fn interpolate(phi: &SampledFn, at: &[f64]) -> Option<C64> {
    let n = phi.n;
    let c = phi.grid.count as isize;
    let mut base = vec![0isize; n];
    let mut weights = vec![[0.0; 4]; n];
    for d in 0..n {
        let pos = at[d] / phi.grid.step + 0.5 * (c as f64 - 1.0);
        let i0 = pos.floor() as isize;
        if i0 - 1 < 0 || i0 + 2 >= c {
            return None;
        }
        base[d] = i0 - 1;
        weights[d] = cubic_weights(pos - i0 as f64);
    }
    let mut acc = C64::new(0.0, 0.0);
    for corner in 0..4usize.pow(n as u32) {
        let mut rest = corner;
        let mut w = 1.0;
        let mut idx = 0usize;
        for d in (0..n).rev() {
            let o = rest % 4;
            rest /= 4;
            w *= weights[d][o];
            idx += (base[d] as usize + o) * (c as usize).pow((n - 1 - d) as u32);
        }
        acc += phi.values[idx] * w;
    }
    Some(acc)
}

/// `π_λ(x,u,t)φ(ξ) = e^{iλt} e^{iλ(x·ξ + ½x·u)} φ(ξ+u)` with cubic interpolation for the shift.
pub fn schrodinger_apply(lambda: f64, p: &HeisPoint, phi: &SampledFn) -> Result<SampledFn> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    if p.dim() != phi.n {
        return Err(Error::Dimension { expected: phi.n, got: p.dim() });
    }
    let negligible_edge = edge_is_negligible(phi);
    let n = phi.n;
    let total = phi.values.len();
    let xu = dot(&p.x, &p.u);
    let mut values = Vec::with_capacity(total);
    let mut xi = vec![0.0; n];
    for idx in 0..total {
        unravel(idx, phi.grid.count, &mut xi, &phi.grid);
        let shifted: Vec<f64> = xi.iter().zip(&p.u).map(|(a, b)| a + b).collect();
        let v = match interpolate(phi, &shifted) {
            Some(v) => v,
            None if negligible_edge => C64::new(0.0, 0.0),
            None => return Err(Error::OutOfGrid),
        };
        let phase = lambda * (p.t + dot(&p.x, &xi) + 0.5 * xu);
        values.push(C64::from_polar(1.0, phase) * v);
    }
    Ok(SampledFn { n, grid: phi.grid, values })
}

/// Table of one-pair coefficients `E^λ_{ab}(x, u, 0)` for `a ≤ amax`, `b ≤ bmax`,
/// stored at `a·(bmax+1) + b`. Arguments may be complex.
pub fn pair_table(lambda: f64, x: C64, u: C64, amax: usize, bmax: usize) -> Vec<C64> {
    let s = lambda.abs().sqrt();
    let (xs, us) = (x * s, u * s);
    let rho = xs * xs + us * us;
    let (w, wt, ph) = if lambda > 0.0 { (xs - I * us, xs + I * us, I) } else { (xs + I * us, xs - I * us, -I) };
    let gauss = (-0.25 * rho).exp();
    let half = 0.5 * rho;
    let stride = bmax + 1;
    let mut out = vec![C64::new(0.0, 0.0); (amax + 1) * stride];
    let step = ph * w / std::f64::consts::SQRT_2;
    let step_t = ph * wt / std::f64::consts::SQRT_2;
    let mut pow = C64::new(1.0, 0.0);
    for m in 0..=amax {
        if m > 0 {
            pow *= step / (m as f64).sqrt();
        }
        if m > amax {
            break;
        }
        let bcount = bmax.min(amax - m);
        let lag = laguerre_seq(bcount, m, half);
        let mut pref = pow;
        for b in 0..=bcount {
            if b > 0 {
                pref *= (b as f64 / (b + m) as f64).sqrt();
            }
            out[(b + m) * stride + b] = pref * lag[b] * gauss;
        }
    }
    let mut pow = C64::new(1.0, 0.0);
    for m in 1..=bmax {
        pow *= step_t / (m as f64).sqrt();
        let acount = amax.min(bmax - m);
        let lag = laguerre_seq(acount, m, half);
        let mut pref = pow;
        for a in 0..=acount {
            if a > 0 {
                pref *= (a as f64 / (a + m) as f64).sqrt();
            }
            out[a * stride + a + m] = pref * lag[a] * gauss;
        }
    }
    out
}

/// `E^λ_{αβ}(x, u, 0)` from the Laguerre closed form; entire in `(x, u)`.
pub fn special_hermite(lambda: f64, alpha: &MultiIndex, beta: &MultiIndex, x: &[C64], u: &[C64]) -> Result<C64> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let n = alpha.len();
    if beta.len() != n || x.len() != n || u.len() != n {
        return Err(Error::Dimension { expected: n, got: beta.len().min(x.len()).min(u.len()) });
    }
    let mut out = C64::new(1.0, 0.0);
    for j in 0..n {
        let (a, b) = (alpha[j], beta[j]);
        let table = pair_table(lambda, x[j], u[j], a, b);
        out *= table[a * (b + 1) + b];
    }
    Ok(out)
}

/// Orthonormal special Hermite function `Φ^λ_{αβ} = (|λ|/2π)^{n/2} E^λ_{αβ}(·, 0)`.
pub fn special_hermite_normalized(lambda: f64, alpha: &MultiIndex, beta: &MultiIndex, x: &[C64], u: &[C64]) -> Result<C64> {
    let scale = (lambda.abs() / (2.0 * std::f64::consts::PI)).powf(alpha.len() as f64 / 2.0);
    Ok(special_hermite(lambda, alpha, beta, x, u)? * scale)
}

fn hermite_rule(nodes: usize) -> &'static Rule {
    static SMALL: OnceLock<Rule> = OnceLock::new();
    static MEDIUM: OnceLock<Rule> = OnceLock::new();
    static LARGE: OnceLock<Rule> = OnceLock::new();
    if nodes <= 80 {
        SMALL.get_or_init(|| gauss_hermite(80))
    } else if nodes <= 160 {
        MEDIUM.get_or_init(|| gauss_hermite(160))
    } else {
        LARGE.get_or_init(|| gauss_hermite(240))
    }
}

/// `E^λ_{αβ}(x,u,t) = (π_λ(x,u,t)Φ^λ_α, Φ^λ_β)` by Gauss–Hermite quadrature.
pub fn matrix_element(lambda: f64, alpha: &MultiIndex, beta: &MultiIndex, x: &[f64], u: &[f64], t: f64) -> Result<C64> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let n = alpha.len();
    if beta.len() != n || x.len() != n || u.len() != n {
        return Err(Error::Dimension { expected: n, got: beta.len().min(x.len()).min(u.len()) });
    }
    for &d in alpha.iter().chain(beta) {
        if d > HERMITE_DEGREE_CAP {
            return Err(Error::DegreeCap { degree: d, cap: HERMITE_DEGREE_CAP });
        }
    }
    let sl = lambda.abs().sqrt();
    let sign = lambda.signum();
    let mut out = C64::from_polar(1.0, lambda * t);
    for j in 0..n {
        let (a, b) = (alpha[j], beta[j]);
        let c = 0.5 * sl * u[j];
        let k = sl * x[j];
        let need = 30.0 + 0.5 * (a + b) as f64 + 2.0 * (k * k + c * c);
        let rule = hermite_rule(need.ceil() as usize);
        let mut acc = C64::new(0.0, 0.0);
        for (&s, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let ha = hermite_functions(a, s + c)[a];
            let hb = hermite_functions(b, s - c)[b];
            acc += C64::from_polar(wt * (s * s).exp() * ha * hb, sign * k * s);
        }
        out *= acc;
    }
    Ok(out)
}
