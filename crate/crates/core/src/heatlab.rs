//! Heat kernels, the heat-kernel transform and its image, the Gaussian–Bessel
//! integral, the twisted Bergman kernel and spectral growth tests in `t`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::complexification::{tail_test, TailCell};
use crate::constants::{bergman_scale, phi_norm, twisted_heat_prefactor, LEMMA63};
use crate::error::{Error, Result};
use crate::quadrature::{composite_legendre, gauss_hermite, gauss_laguerre};
use crate::specfun::{bessel_j_norm_imag, bessel_j_norm_origin, laguerre, laguerre_binom, laguerre_phi, LaguerreArg};
use crate::spectral::{inverse_binom, IdentityReport, SpectralData};

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("heat time must be positive, got {t}")));
    }
    Ok(())
}

/// `(4πt)^{−d/2} e^{−|w|²/(4t)}`.
pub fn gauss_heat(d: usize, t: f64, w: &[f64]) -> Result<f64> {
    check_t(t)?;
    if w.len() != d {
        return Err(Error::Dimension { expected: d, got: w.len() });
    }
    let r2: f64 = w.iter().map(|x| x * x).sum();
    Ok((4.0 * PI * t).powf(-(d as f64) / 2.0) * (-r2 / (4.0 * t)).exp())
}

const GH_NODES: usize = 80;

/// `∫_ℝ e^{cη} q_{t/2}(η) dη` by Gauss–Hermite.
fn eta_integral(c: f64, t: f64) -> f64 {
    let s = (2.0 * t).sqrt();
    gauss_hermite(GH_NODES).integrate(|x| (c * s * x).exp()) / PI.sqrt()
}

/// `∫_{ℝ^{2n}} q_{t/2}(w) j_{n−1}(2i√s |w|) dw` by composite Gauss–Legendre in `|w|`.
fn radial_integral(n: usize, s: f64, t: f64) -> Result<f64> {
    let a = 2.0 * s.sqrt();
    let nu = n as f64 - 1.0;
    let sphere = 2.0 * PI.powi(n as i32) / gamma_int(n);
    let density = |r: f64| -> f64 {
        if r == 0.0 && n > 1 {
            return 0.0;
        }
        sphere * r.powi(2 * n as i32 - 1) * (2.0 * PI * t).powi(-(n as i32)) * (-r * r / (2.0 * t)).exp() * bessel_j_norm_imag(nu, a * r)
    };
    let centre = a * t;
    let width = (2.0 * t).sqrt();
    let upper = centre + 14.0 * width + 2.0 * n as f64 * width;
    let rule = composite_legendre(48, 20, 0.0, upper);
    let value = rule.integrate(density);
    let edge = density(upper) * width;
    if !(edge <= 1e-14 * value.abs()) {
        return Err(Error::Truncation(format!("radial integrand still {:.2e} of the total at r = {upper}", edge / value)));
    }
    Ok(value)
}

fn gamma_int(n: usize) -> f64 {
    (1..n).map(|k| k as f64).product()
}

/// `∫ p_{t/2}(y,v,η) e^{2λη} j_{n−1}(2i√((2k+n)|λ|) |(y,v)|) dy dv dη` against `j_{n−1}(0) e^{2tλ²} e^{2(2k+n)|λ|t}`.
pub fn gauss_bessel_check(k: usize, lambda: f64, t: f64, n: usize) -> Result<IdentityReport> {
    check_t(t)?;
    if n == 0 {
        return Err(Error::Dimension { expected: 1, got: 0 });
    }
    let s = (2 * k + n) as f64 * lambda.abs();
    let lhs = eta_integral(2.0 * lambda, t) * radial_integral(n, s, t)?;
    let rhs = bessel_j_norm_origin(n as f64 - 1.0) * (2.0 * t * lambda * lambda + 2.0 * s * t).exp();
    Ok(IdentityReport::new(lhs, rhs))
}

/// Multiply every `(k, λ)` component by `e^{−tλ²} e^{−(2k+n)|λ|t}`.
pub fn heat_apply(sd: &SpectralData, t: f64) -> Result<SpectralData> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("heat time must be nonnegative, got {t}")));
    }
    let n = sd.n;
    let mut out = sd.clone();
    for b in &mut out.blocks {
        let l = b.lambda.abs();
        let mult = |k: usize| (-t * l * l - (2 * k + n) as f64 * l * t).exp();
        let old_kept: f64 = b.modes.iter().map(|m| m.coeff.norm_sqr()).sum();
        for m in &mut b.modes {
            m.coeff *= mult(m.k());
        }
        for (k, v) in b.norms2.iter_mut().enumerate() {
            *v *= mult(k).powi(2);
        }
        let kept: f64 = b.modes.iter().map(|m| m.coeff.norm_sqr()).sum();
        let lost = (b.grid_norm2 - old_kept).max(0.0) * mult(0).powi(2);
        b.grid_norm2 = kept + lost;
        b.captured = if b.grid_norm2 == 0.0 { 1.0 } else { kept / b.grid_norm2 };
    }
    Ok(out)
}

/// `∫ 𝒟O_{|F|²}(iy,iv,iη) p_{t/2}(y,v,η) dy dv dη` by tensor quadrature of the spectral `𝒟O`.
///
/// The integrand is a finite sum of separable terms, so the tensor rule is applied termwise.
pub fn heat_image_norm(sd_heated: &SpectralData, t: f64) -> Result<f64> {
    check_t(t)?;
    let mut acc = 0.0;
    for c in sd_heated.cells() {
        acc += c.energy * eta_integral(2.0 * c.lambda, t) * radial_integral(sd_heated.n, c.fan, t)?;
    }
    Ok(acc)
}

/// `λ/sinh(λt)` and `λ coth(λt)`, with series near `λ = 0`.
fn sinh_coth(lambda: f64, t: f64) -> (f64, f64) {
    let x = lambda * t;
    if x.abs() < 1e-4 {
        let x2 = x * x;
        ((1.0 - x2 / 6.0 + 7.0 * x2 * x2 / 360.0) / t, (1.0 + x2 / 3.0 - x2 * x2 / 45.0) / t)
    } else {
        (lambda / x.sinh(), lambda / x.tanh())
    }
}

/// `p_t^λ = (4π)^{−n} (λ/sinh λt)ⁿ e^{−(λ/4) coth(λt) ρ}` at squared radius `ρ`.
pub fn twisted_heat_kernel(n: usize, lambda: f64, t: f64, rho: C64) -> Result<C64> {
    check_t(t)?;
    let (s, c) = sinh_coth(lambda, t);
    Ok((-0.25 * c * rho).exp() * twisted_heat_prefactor(n) * s.powi(n as i32))
}

/// `∫_{ℝ^{2n}} φ_k^λ(iy, iv) p_t^λ(y, v) dy dv` against `C(k+n−1,k) e^{(2k+n)|λ|t}`.
pub fn lemma63_check(k: usize, lambda: f64, t: f64, n: usize) -> Result<IdentityReport> {
    let lhs = lemma63_integral(k, lambda, t, n)?;
    let rhs = LEMMA63 * laguerre_binom(k, n) * ((2 * k + n) as f64 * lambda.abs() * t).exp();
    Ok(IdentityReport::new(lhs, rhs))
}

/// The left side, by Gauss–Laguerre in `ρ = |y|²+|v|²`.
pub fn lemma63_integral(k: usize, lambda: f64, t: f64, n: usize) -> Result<f64> {
    check_t(t)?;
    let l = lambda.abs();
    let (s, c) = sinh_coth(l, t);
    // φ_k^λ(iy,iv) = L_k^{n−1}(−|λ|ρ/2) e^{|λ|ρ/4}; kernel decays like e^{−(λ coth λt)ρ/4}
    let rate = 0.25 * (c - l);
    if !(rate > 0.0) {
        return Err(Error::Truncation("kernel does not dominate the Laguerre growth".into()));
    }
    let rule = gauss_laguerre(24 + k, n as f64 - 1.0);
    let mut sum = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        sum += w * laguerre(k, n - 1, -0.5 * l * x / rate)?;
    }
    let pref = PI.powi(n as i32) / gamma_int(n) * rate.powi(-(n as i32));
    Ok(pref * sum * twisted_heat_prefactor(n) * s.powi(n as i32))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproducingBound {
    /// `|φ_k^λ(2iy, 2iv)|²`.
    pub value2: f64,
    /// `K_t^λ(p, p)` at `p = (2iy, 2iv)`.
    pub kernel: f64,
    /// `‖φ_k^λ‖²` in the twisted Bergman space.
    pub norm2: f64,
    /// `1 − value2 / (kernel · norm2)`.
    pub margin: f64,
    pub pass: bool,
}

/// Diagonal of the twisted Bergman kernel, `4ⁿ p_{2t}^λ(−16r²)`, at radius `r` of `(2iy, 2iv)`.
pub fn bergman_kernel_diag(n: usize, lambda: f64, t: f64, r: f64) -> Result<f64> {
    Ok(bergman_scale(n) * twisted_heat_kernel(n, lambda, 2.0 * t, C64::new(-16.0 * r * r, 0.0))?.re)
}

/// `‖φ_k^λ‖²_{B_t} = (π/(2|λ|))ⁿ C(k+n−1,k) e^{2(2k+n)|λ|t}`.
pub fn bergman_phi_norm2(k: usize, lambda: f64, t: f64, n: usize) -> f64 {
    phi_norm(n, lambda) * laguerre_binom(k, n) * (2.0 * (2 * k + n) as f64 * lambda.abs() * t).exp()
}

/// Evaluation bound `|φ(p)|² ≤ K(p,p) ‖φ‖²` for `φ = φ_k^λ` at `p = (2iy, 2iv)`, `|(y,v)| = r`.
pub fn reproducing_bound_check(k: usize, lambda: f64, t: f64, r: f64, n: usize) -> Result<ReproducingBound> {
    check_t(t)?;
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    let value2 = laguerre_phi(LaguerreArg::doubled_imaginary(k, n, r * r), lambda)?.norm_sqr();
    let kernel = bergman_kernel_diag(n, lambda, t, r)?;
    let norm2 = bergman_phi_norm2(k, lambda, t, n);
    let margin = 1.0 - value2 / (kernel * norm2);
    Ok(ReproducingBound { value2, kernel, norm2, margin, pass: margin >= -1e-12 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm35Row {
    pub t: f64,
    pub r: f64,
    pub value: f64,
    /// `t^{2n} e^{−2tB} value`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thm35Report {
    pub b: f64,
    pub rows: Vec<Thm35Row>,
    /// Largest least-squares slope of `log value` in `t` over the sampled radii.
    pub slope: f64,
    /// Scaled values stop growing past their maximum on every radius.
    pub bounded: bool,
    pub pass: bool,
}

/// `∫₀^α e^{2tλ²} Σ ‖f^λ∗φ_k^λ‖² C(k+n−1,k)⁻¹ φ_k^λ(2iy,2iv) p_{2t}^λ(4y,4v) dμ` on a `(t, r)` grid,
/// tested against `t^{−2n} e^{2tB}` with `B = α²+β`.
pub fn thm35_forward(sd: &SpectralData, alpha: f64, beta: f64, ts: &[f64], radii: &[f64]) -> Result<Thm35Report> {
    if sd.has_negative_lambda_mass() {
        return Err(Error::Domain("spectrum has mass at negative lambda".into()));
    }
    if !tail_test(sd, alpha * (1.0 + 1e-9), beta * (1.0 + 1e-9), 0.0).passed {
        return Err(Error::NotBandLimited(format!("spectrum exceeds alpha = {alpha}, beta = {beta}")));
    }
    if ts.len() < 2 {
        return Err(Error::Config("need at least two t values".into()));
    }
    let n = sd.n;
    let b = alpha * alpha + beta;
    let cells = sd.cells();
    let mut rows = Vec::new();
    let mut slope = f64::NEG_INFINITY;
    let mut bounded = true;
    for &r in radii {
        let mut series = Vec::new();
        for &t in ts {
            check_t(t)?;
            let mut value = 0.0;
            for c in &cells {
                let phi = laguerre_phi(LaguerreArg::doubled_imaginary(c.k, n, r * r), c.lambda)?.re;
                let kern = twisted_heat_kernel(n, c.lambda, 2.0 * t, C64::new(16.0 * r * r, 0.0))?.re;
                value += (2.0 * t * c.lambda * c.lambda).exp() * c.energy * inverse_binom(c.k, n) * phi * kern;
            }
            let scaled = t.powi(2 * n as i32) * (-2.0 * t * b).exp() * value;
            rows.push(Thm35Row { t, r, value, scaled });
            series.push((t, value.ln(), scaled));
        }
        let k = series.len() as f64;
        let mx = series.iter().map(|s| s.0).sum::<f64>() / k;
        let my = series.iter().map(|s| s.1).sum::<f64>() / k;
        let sxx: f64 = series.iter().map(|s| (s.0 - mx).powi(2)).sum();
        let sxy: f64 = series.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
        slope = slope.max(sxy / sxx);
        let top = series.iter().enumerate().fold(0, |best, (i, s)| if s.2 > series[best].2 { i } else { best });
        bounded &= series.iter().all(|s| s.2.is_finite()) && series[top..].windows(2).all(|w| w[1].2 <= w[0].2 * (1.0 + 1e-12));
    }
    let pass = bounded && slope <= 2.0 * b * (1.0 + 1e-12);
    Ok(Thm35Report { b, rows, slope, bounded, pass })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailVerdict {
    Supported,
    Violated,
}

impl TailVerdict {
    pub fn name(self) -> &'static str {
        match self {
            TailVerdict::Supported => "supported",
            TailVerdict::Violated => "violated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConverseTail {
    pub b: f64,
    pub c: f64,
    pub tail: f64,
    /// `(t, e^{2tC} tail / e^{2tB})`: grows without bound iff the tail is nonzero.
    pub growth: Vec<(f64, f64)>,
    pub offending: Vec<TailCell>,
    pub verdict: TailVerdict,
}

/// Tail mass beyond `C > B` and its growth against `e^{2tB}`.
pub fn thm35_converse_tail(sd: &SpectralData, b: f64, c: f64, ts: &[f64]) -> Result<ConverseTail> {
    if sd.has_negative_lambda_mass() {
        return Err(Error::Domain("spectrum has mass at negative lambda".into()));
    }
    if !(c > b) {
        return Err(Error::Config(format!("need C > B, got C = {c}, B = {b}")));
    }
    let total = sd.total_energy();
    let mut tail = 0.0;
    let mut offending = Vec::new();
    for cell in sd.cells() {
        if cell.fan > c {
            tail += cell.energy;
            offending.push(TailCell { lambda: cell.lambda, k: cell.k, energy: cell.energy });
        }
    }
    let growth = ts.iter().map(|&t| (t, (2.0 * t * (c - b)).exp() * tail)).collect();
    let violated = total > 0.0 && tail > 1e-8 * total;
    if !violated {
        offending.clear();
    }
    let verdict = if violated { TailVerdict::Violated } else { TailVerdict::Supported };
    Ok(ConverseTail { b, c, tail, growth, offending, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::special_hermite_normalized;
    use crate::quadrature::Grid1;
    use crate::spectral::{real_vec, twisted_conv, LambdaBlock, Mode, Slice};
    use proptest::prelude::*;

    #[test]
    fn euclidean_heat_kernel() {
        let rule = gauss_hermite(60);
        for &t in &[0.1f64, 0.7] {
            let s = (4.0 * t).sqrt();
            let mass = rule.integrate(|x| gauss_heat(1, t, &[s * x]).unwrap() * s * (x * x).exp());
            assert!((mass - 1.0).abs() < 1e-12);
            let a = 1.3;
            let mgf = rule.integrate(|x| (a * s * x).exp()) / PI.sqrt();
            assert!((mgf - (a * a * t).exp()).abs() < 1e-12 * mgf);
        }
        let (t, u) = (0.3, 0.5);
        let grid = composite_legendre(40, 16, -12.0, 12.0);
        let conv = grid.integrate(|y| gauss_heat(1, t, &[0.4 - y]).unwrap() * gauss_heat(1, u, &[y]).unwrap());
        assert!((conv - gauss_heat(1, t + u, &[0.4]).unwrap()).abs() < 1e-12);
        assert!(gauss_heat(1, 0.0, &[0.0]).is_err());
    }

    #[test]
    fn gauss_bessel_box() {
        for &k in &[0usize, 1, 4] {
            for &l in &[0.25, 1.0] {
                for &t in &[0.1, 0.5] {
                    for &n in &[1usize, 2] {
                        let r = gauss_bessel_check(k, l, t, n).unwrap();
                        assert!(r.relerr < 1e-6, "{k} {l} {t} {n} {r:?}");
                    }
                }
            }
        }
        let r = gauss_bessel_check(0, 1.0, 0.25, 1).unwrap();
        assert!((r.rhs - 1f64.exp()).abs() < 1e-14);
        let zero = gauss_bessel_check(0, 0.0, 0.3, 1).unwrap();
        assert!((zero.lhs - 1.0).abs() < 1e-10);
        let tiny = gauss_bessel_check(2, 0.5, 1e-4, 1).unwrap();
        assert!((tiny.lhs - 1.0).abs() < 1e-3);
    }

    fn one_block(lambda: f64, modes: Vec<(usize, usize, C64)>) -> SpectralData {
        let modes: Vec<Mode> = modes.into_iter().map(|(a, b, c)| Mode { alpha: vec![a], beta: vec![b], coeff: c }).collect();
        let block = LambdaBlock::new_exact(1, lambda, crate::spectral::dmu_weight(1, 0.1, lambda), 8, modes);
        SpectralData { n: 1, kmax: 8, lambda_step: 0.1, grid: Grid1::new(32, 0.4), blocks: vec![block] }
    }

    #[test]
    fn heat_multipliers() {
        let sd = one_block(0.7, vec![(2, 1, C64::new(1.0, 0.5)), (0, 3, C64::new(-0.3, 0.2))]);
        assert_eq!(heat_apply(&sd, 0.0).unwrap(), sd);
        let a = heat_apply(&heat_apply(&sd, 0.2).unwrap(), 0.3).unwrap();
        let b = heat_apply(&sd, 0.5).unwrap();
        for (x, y) in a.blocks[0].modes.iter().zip(&b.blocks[0].modes) {
            assert!((x.coeff - y.coeff).norm() < 1e-15);
        }
        let t: f64 = 0.4;
        let want = sd.blocks[0].norms2[1] * (-2.0 * t * 0.49 - 2.0 * 3.0 * 0.7 * t).exp();
        assert!((heat_apply(&sd, t).unwrap().blocks[0].norms2[1] - want).abs() < 1e-14 * want);
    }

    #[test]
    fn heat_image_ratio_is_t_independent() {
        let sd = one_block(0.7, vec![(2, 1, C64::new(1.0, 0.5)), (0, 3, C64::new(-0.3, 0.2))]);
        let norm = sd.total_energy();
        for &t in &[0.1, 0.2, 0.4] {
            let v = heat_image_norm(&heat_apply(&sd, t).unwrap(), t).unwrap();
            assert!((v / norm - 1.0).abs() < 1e-8);
        }
        let zero = one_block(0.7, vec![(2, 1, C64::new(0.0, 0.0))]);
        assert_eq!(heat_image_norm(&heat_apply(&zero, 0.2).unwrap(), 0.2).unwrap(), 0.0);
    }

    #[test]
    fn twisted_heat_kernel_limits_and_eigenrelation() {
        for &rho in &[0.0, 0.8, 3.0] {
            let small = twisted_heat_kernel(1, 1e-9, 0.7, C64::new(rho, 0.0)).unwrap().re;
            let want = (4.0 * PI).recip() / 0.7 * (-rho / (4.0 * 0.7f64)).exp();
            assert!((small - want).abs() < 1e-14 * want);
            let across = twisted_heat_kernel(1, 0.99e-4 / 0.7, 0.7, C64::new(rho, 0.0)).unwrap().re;
            let above = twisted_heat_kernel(1, 1.01e-4 / 0.7, 0.7, C64::new(rho, 0.0)).unwrap().re;
            assert!((across - above).abs() < 1e-9 * above);
        }
        let grid = Grid1::new(61, 0.3);
        let (l, t) = (1.0, 0.3);
        let kern = Slice::from_fn(1, grid, |x, u| twisted_heat_kernel(1, l, t, C64::new(x[0] * x[0] + u[0] * u[0], 0.0)).unwrap());
        for k in 0..3 {
            let phi = Slice::from_fn(1, grid, |x, u| laguerre_phi(LaguerreArg::new(k, 1, C64::new(x[0] * x[0] + u[0] * u[0], 0.0)), l).unwrap());
            let out = twisted_conv(&phi, &kern, l).unwrap();
            let decay = (-((2 * k + 1) as f64) * l * t).exp();
            for i in 0..out.values.len() {
                let c = crate::spectral::spatial_coords(1, &grid, i);
                if c.iter().any(|v| v.abs() > 2.0) {
                    continue;
                }
                assert!((out.values[i] - decay * phi.values[i]).norm() < 1e-6, "k={k}");
            }
        }
        let e = Slice::from_fn(1, grid, |x, u| special_hermite_normalized(l, &[2], &[1], &real_vec(x), &real_vec(u)).unwrap());
        let out = twisted_conv(&e, &kern, l).unwrap();
        let centre = (grid.count * grid.count) / 2 + 3;
        assert!((out.values[centre] - (-3.0 * l * t).exp() * e.values[centre]).norm() < 1e-6);
    }

    proptest! {
        #[test]
        fn twisted_heat_kernel_positive(l in -3.0f64..3.0, t in 0.01f64..4.0, rho in 0.0f64..30.0) {
            prop_assert!(twisted_heat_kernel(1, l, t, C64::new(rho, 0.0)).unwrap().re > 0.0);
            prop_assert!(twisted_heat_kernel(2, l, t, C64::new(rho, 0.0)).unwrap().re > 0.0);
        }
    }

    #[test]
    fn lemma63_box_and_ratio() {
        for &k in &[0usize, 1, 4] {
            for &l in &[0.25, 1.0] {
                for &t in &[0.1, 0.5] {
                    let r = lemma63_check(k, l, t, 1).unwrap();
                    assert!(r.relerr < 1e-10, "{k} {l} {t} {r:?}");
                }
            }
        }
        let a = lemma63_check(0, 1.0, 0.5, 1).unwrap();
        assert!((a.rhs - 0.5f64.exp()).abs() < 1e-15);
        let b = lemma63_check(1, 1.0, 0.5, 1).unwrap();
        assert!((b.lhs / a.lhs - 1f64.exp()).abs() < 1e-10);
        for &n in &[2usize, 3] {
            assert!(lemma63_check(2, 0.6, 0.3, n).unwrap().relerr < 1e-10);
        }
    }

    #[test]
    fn lemma63_near_zero_lambda_matches_direct_quadrature() {
        let (k, t) = (2usize, 0.4);
        let l = 1e-7;
        let rule = composite_legendre(60, 16, 0.0, 40.0);
        let direct = rule.integrate(|r| {
            let rho = r * r;
            2.0 * PI * r * laguerre(k, 0, -0.5 * l * rho).unwrap() * (0.25 * l * rho).exp() * twisted_heat_kernel(1, l, t, C64::new(rho, 0.0)).unwrap().re
        });
        assert!((lemma63_integral(k, l, t, 1).unwrap() - direct).abs() < 1e-10 * direct);
        assert!((direct - 1.0).abs() < 1e-5);
    }

    #[test]
    fn reproducing_bound_holds_and_matches_basis_sum() {
        for &k in &[0usize, 1, 3, 8] {
            for i in 0..=12 {
                let r = 0.25 * i as f64;
                let b = reproducing_bound_check(k, 0.7, 0.3, r, 1).unwrap();
                assert!(b.pass, "{k} {r} {b:?}");
            }
        }
        let origin = reproducing_bound_check(2, 0.7, 0.3, 0.0, 2).unwrap();
        assert!((origin.value2 - laguerre_binom(2, 2).powi(2)).abs() < 1e-12 && origin.pass);
        let (l, t) = (0.7, 0.3);
        for &(y, v) in &[(0.0, 0.0), (0.4, 0.1), (1.0, -0.5)] {
            let mut sum = 0.0;
            for a in 0..120usize {
                for b in 0..120usize {
                    let val = special_hermite_normalized(l, &[a], &[b], &[C64::new(0.0, 2.0 * y)], &[C64::new(0.0, 2.0 * v)]).unwrap();
                    sum += val.norm_sqr() * 4.0 * (-2.0 * (2 * b + 1) as f64 * l * t).exp();
                }
            }
            let r = (y * y + v * v).sqrt();
            let k = bergman_kernel_diag(1, l, t, r).unwrap();
            assert!((sum - k).abs() < 1e-9 * k, "{sum} {k}");
        }
    }

    #[test]
    fn thm35_single_mode_and_fixture() {
        let sd = one_block(0.5, vec![(1, 1, C64::new(1.0, 0.0))]);
        let ts = [0.25, 0.5, 1.0, 2.0, 4.0];
        let rep = thm35_forward(&sd, 0.5, 1.5, &ts, &[0.0, 0.5, 1.0]).unwrap();
        assert!(rep.pass, "{rep:?}");
        let row = rep.rows[2];
        let kern = twisted_heat_kernel(1, 0.5, 2.0, C64::new(0.0, 0.0)).unwrap().re;
        assert!((row.value - sd.total_energy() * (2.0 * 0.25f64).exp() * kern).abs() < 1e-14);
        let neg = one_block(-0.5, vec![(1, 1, C64::new(1.0, 0.0))]);
        assert!(thm35_forward(&neg, 0.5, 1.5, &ts, &[0.0]).is_err());
        assert!(thm35_forward(&sd, 0.5, 1.0, &ts, &[0.0]).is_err());
    }

    #[test]
    fn converse_tail_verdicts() {
        let ts = [0.5, 1.0, 2.0];
        let inside = one_block(0.5, vec![(1, 1, C64::new(1.0, 0.0))]);
        assert_eq!(thm35_converse_tail(&inside, 1.5, 2.0, &ts).unwrap().verdict, TailVerdict::Supported);
        let mut outside = inside.clone();
        outside.blocks[0].modes.push(Mode { alpha: vec![2], beta: vec![2], coeff: C64::new(0.1, 0.0) });
        outside.blocks[0] = LambdaBlock::new_exact(1, 0.5, outside.blocks[0].weight, 8, outside.blocks[0].modes.clone());
        let rep = thm35_converse_tail(&outside, 1.5, 2.0, &ts).unwrap();
        assert_eq!(rep.verdict, TailVerdict::Violated);
        assert_eq!(rep.offending.len(), 1);
        assert_eq!(rep.offending[0].k, 2);
        assert!(rep.growth.windows(2).all(|w| w[1].1 > w[0].1));
        let empty = one_block(0.5, vec![]);
        assert_eq!(thm35_converse_tail(&empty, 1.5, 2.0, &ts).unwrap().verdict, TailVerdict::Supported);
    }
}
