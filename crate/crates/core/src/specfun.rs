//! Hermite, Laguerre and normalized Bessel functions.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const HERMITE_DEGREE_CAP: usize = 120;
pub const LAGUERRE_DEGREE_CAP: usize = 512;

/// Multi-index `α ∈ ℕⁿ`.
pub type MultiIndex = [usize];

pub fn degree(alpha: &MultiIndex) -> usize {
    alpha.iter().sum()
}

fn check_hermite_cap(m: usize) -> Result<()> {
    if m > HERMITE_DEGREE_CAP {
        return Err(Error::DegreeCap { degree: m, cap: HERMITE_DEGREE_CAP });
    }
    Ok(())
}

fn check_laguerre_cap(k: usize) -> Result<()> {
    if k > LAGUERRE_DEGREE_CAP {
        return Err(Error::DegreeCap { degree: k, cap: LAGUERRE_DEGREE_CAP });
    }
    Ok(())
}

/// All normalized Hermite functions `h_0(x), …, h_m(x)`.
///
/// Runs the three-term recurrence on the weighted functions, so the Gaussian
/// factor never has to be divided back out.
pub fn hermite_functions(m: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(m + 1);
    h.push(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp());
    if m >= 1 {
        h.push(std::f64::consts::SQRT_2 * x * h[0]);
    }
    for j in 1..m {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * x * h[j] - (jf / (jf + 1.0)).sqrt() * h[j - 1];
        h.push(next);
    }
    h
}

/// `Φ_α(x) = Π_j h_{α_j}(x_j)`.
pub fn hermite_phi(alpha: &MultiIndex, x: &[f64]) -> Result<f64> {
    if alpha.len() != x.len() {
        return Err(Error::Dimension { expected: alpha.len(), got: x.len() });
    }
    let mut out = 1.0;
    for (&a, &xj) in alpha.iter().zip(x) {
        check_hermite_cap(a)?;
        out *= hermite_functions(a, xj)[a];
    }
    Ok(out)
}

/// `Φ_α^λ(x) = |λ|^{n/4} Φ_α(|λ|^{1/2} x)`.
pub fn hermite_phi_scaled(alpha: &MultiIndex, lambda: f64, x: &[f64]) -> Result<f64> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let s = lambda.abs().sqrt();
    let xs: Vec<f64> = x.iter().map(|v| v * s).collect();
    Ok(lambda.abs().powf(alpha.len() as f64 / 4.0) * hermite_phi(alpha, &xs)?)
}

/// Laguerre values `L_0^a(s), …, L_k^a(s)` for complex `s`.
pub fn laguerre_seq(k: usize, order: usize, s: C64) -> Vec<C64> {
    let a = order as f64;
    let mut l = Vec::with_capacity(k + 1);
    l.push(C64::new(1.0, 0.0));
    if k >= 1 {
        l.push(1.0 + a - s);
    }
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - s) * l[j] - (jf + a) * l[j - 1]) / (jf + 1.0);
        l.push(next);
    }
    l
}

/// `L_k^{order}(s)` by upward recurrence.
pub fn laguerre(k: usize, order: usize, s: f64) -> Result<f64> {
    check_laguerre_cap(k)?;
    let a = order as f64;
    let (mut prev, mut cur) = (0.0, 1.0);
    for j in 0..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - s) * cur - (jf + a) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `L_k^{order}(s)` at a complex argument.
pub fn laguerre_complex(k: usize, order: usize, s: C64) -> Result<C64> {
    check_laguerre_cap(k)?;
    Ok(laguerre_seq(k, order, s)[k])
}

/// `C(n, k)` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    statrs::function::factorial::binomial(n as u64, k as u64)
}

/// Dimension of the `k`-th Laguerre eigenspace weight, `C(k+n−1, k)`.
pub fn laguerre_binom(k: usize, n: usize) -> f64 {
    binomial(k + n - 1, k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaguerreArg {
    pub k: usize,
    /// `n − 1` for ambient dimension `n`.
    pub order: usize,
    /// Generalized squared radius: `|x|²+|u|²` at real points, `−4(|y|²+|v|²)` at `(2iy, 2iv)`.
    pub rho: C64,
}

impl LaguerreArg {
    pub fn new(k: usize, n: usize, rho: C64) -> Self {
        Self { k, order: n - 1, rho }
    }

    /// Argument for `φ_k^λ(2iy, 2iv)` with `r² = |y|² + |v|²`.
    pub fn doubled_imaginary(k: usize, n: usize, r2: f64) -> Self {
        Self::new(k, n, C64::new(-4.0 * r2, 0.0))
    }
}

/// `φ_k^λ = L_k^{n−1}(½|λ|ρ) e^{−¼|λ|ρ}`.
pub fn laguerre_phi(arg: LaguerreArg, lambda: f64) -> Result<C64> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let l = lambda.abs();
    let lk = laguerre_complex(arg.k, arg.order, 0.5 * l * arg.rho)?;
    Ok(lk * (-0.25 * l * arg.rho).exp())
}

/// Value of `j_ν` at the origin, `1 / (2^ν Γ(ν+1))`.
pub fn bessel_j_norm_origin(nu: f64) -> f64 {
    1.0 / (2f64.powf(nu) * gamma_half_integer(nu + 1.0))
}

fn gamma_half_integer(x: f64) -> f64 {
    let (mut acc, mut z) = if x.fract() == 0.0 { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    while z < x {
        acc *= z;
        z += 1.0;
    }
    acc
}

fn check_order(nu: f64) {
    assert!(nu >= 0.0 && (2.0 * nu).fract() == 0.0, "Bessel order must be a non-negative half-integer");
}

/// `j_ν(s) = s^{−ν} J_ν(s)`, an entire function of `s²`.
pub fn bessel_j_norm(order: usize, s: C64) -> C64 {
    bessel_j_norm_nu(order as f64, s)
}

/// Same as [`bessel_j_norm`] for half-integer orders.
pub fn bessel_j_norm_nu(nu: f64, s: C64) -> C64 {
    check_order(nu);
    let abs = s.norm();
    if s.re == 0.0 || s.re.abs() <= 1e-15 * abs {
        return C64::new(bessel_j_norm_imag(nu, s.im), 0.0);
    }
    if abs <= 17.0 || abs - s.im.abs() <= 17.0 {
        return j_series(nu, s);
    }
    let s = if s.re < 0.0 { -s } else { s };
    hankel_j(nu, s) * s.powf(-nu)
}

/// `j_ν(it) = t^{−ν} I_ν(t)`, real and positive.
pub fn bessel_j_norm_imag(nu: f64, t: f64) -> f64 {
    let t = t.abs();
    if t <= 40.0 {
        check_order(nu);
        imag_series(nu, t)
    } else {
        log_bessel_j_norm_imag(nu, t).exp()
    }
}

/// `ln j_ν(it)`, finite for any `t`.
pub fn log_bessel_j_norm_imag(nu: f64, t: f64) -> f64 {
    check_order(nu);
    let t = t.abs();
    if t <= 40.0 {
        return imag_series(nu, t).ln();
    }
    // I_ν(t) ~ e^t / √(2πt) Σ (−1)^k a_k(ν) / t^k
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= -(mu - odd * odd) / (8.0 * kf * t);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    t - 0.5 * (2.0 * std::f64::consts::PI * t).ln() - nu * t.ln() + sum.ln()
}

fn imag_series(nu: f64, t: f64) -> f64 {
    let q = 0.25 * t * t;
    let mut term = bessel_j_norm_origin(nu);
    let mut sum = term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + nu));
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum
}

fn j_series(nu: f64, s: C64) -> C64 {
    let q = -0.25 * s * s;
    let mut term = C64::new(bessel_j_norm_origin(nu), 0.0);
    let mut sum = term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + nu));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() && m > 2.0 {
            break;
        }
        if m > 500.0 {
            break;
        }
    }
    sum
}

fn hankel_j(nu: f64, s: C64) -> C64 {
    let mu = 4.0 * nu * nu;
    let mut p = C64::new(1.0, 0.0);
    let mut q = C64::new(0.0, 0.0);
    let mut term = C64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..80 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (8.0 * kf * s);
        let mag = term.norm();
        if mag > last {
            break;
        }
        last = mag;
        let signed = if (k / 2) % 2 == 0 { term } else { -term };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
        if mag < 1e-17 {
            break;
        }
    }
    let chi = s - (0.5 * nu + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * s)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Relative deviation of `φ_k^λ(2iy, 2iv)` from its Bessel approximation at radius `r`.
pub fn hilb_compare(k: usize, lambda: f64, r: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Dimension { expected: 1, got: 0 });
    }
    let phi = laguerre_phi(LaguerreArg::doubled_imaginary(k, n, r * r), lambda)?.re;
    let nu = (n - 1) as f64;
    let s = ((2 * k + n) as f64 * lambda.abs()).sqrt();
    let jhat = bessel_j_norm_imag(nu, 2.0 * s * r) / bessel_j_norm_origin(nu);
    let approx = laguerre_binom(k, n) * jhat;
    Ok((phi - approx).abs() / phi.abs())
}

/// Outcome of one sweep in [`invariant_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantCheck {
    pub name: &'static str,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub tol: f64,
    pub pass: bool,
    /// Diagnostic sweeps are reported but never fail the suite.
    pub diagnostic: bool,
}

/// Laguerre recurrence residual, Hermite orthonormality, growth of `j_ν` on the imaginary axis
/// and the Hilb diagnostic.
pub fn invariant_suite() -> Vec<InvariantCheck> {
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for a in 0..=4usize {
        for i in 0..=200 {
            let s = 0.25 * i as f64;
            let l: Vec<f64> = laguerre_seq(60, a, C64::new(s, 0.0)).iter().map(|v| v.re).collect();
            let af = a as f64;
            for k in 1..60 {
                let kf = k as f64;
                let terms = [(kf + 1.0) * l[k + 1], (2.0 * kf + af + 1.0 - s) * l[k], (kf + af) * l[k - 1]];
                let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
                if scale > 0.0 {
                    worst = worst.max((terms[0] - terms[1] + terms[2]).abs() / scale);
                }
            }
        }
    }
    out.push(InvariantCheck { name: "laguerre recurrence", worst, tol: 1e-10, pass: worst <= 1e-10, diagnostic: false });

    let maxdeg = HERMITE_DEGREE_CAP;
    let rule = crate::quadrature::gauss_hermite(2 * maxdeg + 2);
    let mut gram = vec![0.0f64; (maxdeg + 1) * (maxdeg + 1)];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let h = hermite_functions(maxdeg, x);
        let wx = w * (x * x).exp();
        for a in 0..=maxdeg {
            for b in 0..=a {
                gram[a * (maxdeg + 1) + b] += wx * h[a] * h[b];
            }
        }
    }
    let mut worst = 0.0f64;
    for a in 0..=maxdeg {
        for b in 0..=a {
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((gram[a * (maxdeg + 1) + b] - want).abs());
        }
    }
    out.push(InvariantCheck { name: "hermite orthonormality", worst, tol: 1e-8, pass: worst <= 1e-8, diagnostic: false });

    // j_ν(is) e^{−s} ≤ j_ν(0), positive and increasing on [0, 40]
    let mut worst = 0.0f64;
    let mut shape = true;
    for &nu in &[0.0, 0.5, 1.0, 2.0, 3.0] {
        let origin = bessel_j_norm_origin(nu);
        let mut last = 0.0;
        for i in 0..=400 {
            let t = 0.1 * i as f64;
            let v = bessel_j_norm_imag(nu, t);
            shape &= v > 0.0 && v >= last;
            last = v;
            worst = worst.max(v * (-t).exp() / origin);
        }
    }
    out.push(InvariantCheck { name: "bessel growth bound", worst, tol: 1.0, pass: shape && worst <= 1.0 + 1e-12, diagnostic: false });

    // k ∈ {0,2,8,32} at fixed (2k+1)|λ| = 4.1, r = 0.5
    let devs: Vec<f64> = [0usize, 2, 8, 32]
        .iter()
        .map(|&k| hilb_compare(k, 4.1 / (2 * k + 1) as f64, 0.5, 1).unwrap_or(f64::NAN))
        .collect();
    let worst = devs.windows(2).map(|w| w[1] / w[0]).fold(0.0f64, f64::max);
    out.push(InvariantCheck { name: "hilb monotone in k", worst, tol: 1.1, pass: worst <= 1.1, diagnostic: true });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn hermite_ground_state_and_first() {
        assert_relative_eq!(hermite_phi(&[0], &[0.0]).unwrap(), PI.powf(-0.25), max_relative = 1e-15);
        let want = 2f64.sqrt() * PI.powf(-0.25) * (-0.5f64).exp();
        assert_relative_eq!(hermite_phi(&[1], &[1.0]).unwrap(), want, max_relative = 1e-15);
    }

    #[test]
    fn hermite_cap_is_an_error() {
        assert!(matches!(hermite_phi(&[121], &[0.0]), Err(Error::DegreeCap { .. })));
        assert!(hermite_phi(&[120], &[3.0]).unwrap().is_finite());
    }

    #[test]
    fn scaled_hermite() {
        assert_relative_eq!(
            hermite_phi_scaled(&[0], 4.0, &[0.0]).unwrap(),
            4f64.powf(0.25) * PI.powf(-0.25),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            hermite_phi_scaled(&[3], 1.0, &[0.7]).unwrap(),
            hermite_phi(&[3], &[0.7]).unwrap()
        );
        assert!(matches!(hermite_phi_scaled(&[0], 0.0, &[0.0]), Err(Error::ZeroLambda)));
    }

    #[test]
    fn laguerre_values() {
        assert_relative_eq!(laguerre(2, 0, 0.5).unwrap(), 0.125, max_relative = 1e-15);
        assert_relative_eq!(laguerre(1, 0, 0.3).unwrap(), 0.7, max_relative = 1e-15);
        for k in 0..20 {
            for a in 0..4 {
                assert_relative_eq!(laguerre(k, a, 0.0).unwrap(), binomial(k + a, k), max_relative = 1e-12);
            }
        }
        assert!(laguerre(513, 0, 1.0).is_err());
    }

    #[test]
    fn laguerre_phi_values() {
        let v = laguerre_phi(LaguerreArg::new(1, 1, C64::new(-4.0, 0.0)), 1.0).unwrap();
        assert_relative_eq!(v.re, 3.0 * 1f64.exp(), max_relative = 1e-14);
        let v = laguerre_phi(LaguerreArg::new(0, 1, C64::new(2.25, 0.0)), 1.0).unwrap();
        assert_relative_eq!(v.re, (-2.25f64 / 4.0).exp(), max_relative = 1e-15);
        let v = laguerre_phi(LaguerreArg::new(5, 3, C64::new(0.0, 0.0)), 0.3).unwrap();
        assert_relative_eq!(v.re, binomial(7, 5), max_relative = 1e-14);
    }

    #[test]
    fn bessel_values() {
        assert_relative_eq!(bessel_j_norm(0, C64::new(0.0, 0.0)).re, 1.0);
        assert_relative_eq!(bessel_j_norm(1, C64::new(1e-9, 0.0)).re, 0.5, max_relative = 1e-12);
        assert_relative_eq!(bessel_j_norm(0, C64::new(0.0, 3.0)).re, 4.880792585865024, max_relative = 1e-14);
        // J_0(1), J_1(30) / 30
        assert_relative_eq!(bessel_j_norm(0, C64::new(1.0, 0.0)).re, 0.7651976865579666, max_relative = 1e-14);
        assert_relative_eq!(bessel_j_norm(1, C64::new(30.0, 0.0)).re, -0.11875106261662305 / 30.0, max_relative = 1e-12);
        // j_{1/2}(s) = √(2/π) sin(s)/s
        let s: f64 = 2.5;
        let want = (2.0 / PI).sqrt() * s.sin() / s;
        assert_relative_eq!(bessel_j_norm_nu(0.5, C64::new(s, 0.0)).re, want, max_relative = 1e-13);
    }

    #[test]
    fn bessel_imag_branches_agree() {
        for &nu in &[0.0, 1.0, 0.5, 2.0] {
            let below = bessel_j_norm_imag(nu, 40.0);
            let series = {
                let mut term = bessel_j_norm_origin(nu);
                let mut sum = term;
                for m in 1..200 {
                    let m = m as f64;
                    term *= 400.0 / (m * (m + nu));
                    sum += term;
                }
                sum
            };
            assert_relative_eq!(below, series, max_relative = 1e-13);
            let above = bessel_j_norm_imag(nu, 40.0 + 1e-9);
            assert_relative_eq!(below, above, max_relative = 1e-8);
        }
    }

    #[test]
    fn series_and_hankel_agree_at_switch() {
        for &nu in &[0.0, 1.0, 1.5] {
            for &arg in &[C64::new(17.5, 0.3), C64::new(18.0, -2.0), C64::new(-20.0, 1.0)] {
                let a = j_series(nu, arg);
                let s = if arg.re < 0.0 { -arg } else { arg };
                let b = hankel_j(nu, s) * s.powf(-nu);
                assert!((a - b).norm() <= 1e-7 * a.norm().max(1e-3), "nu={nu} arg={arg} {a} {b}");
            }
        }
    }

    #[test]
    fn invariants_hold() {
        for c in invariant_suite() {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn hilb_examples() {
        assert!(hilb_compare(3, 0.7, 0.0, 1).unwrap() < 1e-15);
        assert!(hilb_compare(2, 0.7, 0.0, 2).unwrap() < 1e-15);
        let e = 1f64.exp();
        let i0_2 = 2.2795853023360673;
        assert_relative_eq!(hilb_compare(0, 1.0, 1.0, 1).unwrap(), (e - i0_2).abs() / e, max_relative = 1e-12);
        let high = hilb_compare(20, 0.1, 0.5, 1).unwrap();
        let low = hilb_compare(2, 4.1 / 5.0, 0.5, 1).unwrap();
        assert!(high < low, "{high} {low}");
    }
}
