//! Normalization constants. Each value is frozen here and reproduced by the
//! matching `measure_*` routine on a reference fixture; the unit tests pin the two together.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::euclid::{flat_fourier_grid, FlatFunction};
use crate::heatlab::{heat_apply, heat_image_norm, lemma63_integral, twisted_heat_kernel};
use crate::heisenberg::special_hermite_normalized;
use crate::quadrature::{gauss_legendre, Grid1};
use crate::specfun::{bessel_j_norm_origin, laguerre_binom, laguerre_phi, LaguerreArg};
use crate::spectral::{twisted_conv, SpectralData, Slice};

/// Prefactor of `p_t^λ`, `(4π)^{−n}`; the `λ → 0` limit is then the Euclidean heat kernel on `ℝ^{2n}`.
pub fn twisted_heat_prefactor(n: usize) -> f64 {
    (4.0 * PI).powi(-(n as i32))
}

/// `φ_k^λ ∗_λ p_t^λ = HEAT_EIGEN · e^{−(2k+n)|λ|t} φ_k^λ`.
pub const HEAT_EIGEN: f64 = 1.0;

/// `∫ φ_k^λ(iy,iv) p_t^λ(y,v) = LEMMA63 · C(k+n−1,k) e^{(2k+n)|λ|t}`.
pub const LEMMA63: f64 = 1.0;

/// Ratio of the heat-image norm to `‖f‖²`, the normalized Bessel function `j_{n−1}` at the origin.
pub fn heat_image(n: usize) -> f64 {
    bessel_j_norm_origin(n as f64 - 1.0)
}

/// `K_t^λ(ζ, ζ) = BERGMAN_SCALE(n) · p_{2t}^λ` at the doubled argument.
pub fn bergman_scale(n: usize) -> f64 {
    4f64.powi(n as i32)
}

/// `‖φ_k^λ‖²_{B_t} = phi_norm(n, λ) · C(k+n−1,k) e^{2(2k+n)|λ|t}`.
pub fn phi_norm(n: usize, lambda: f64) -> f64 {
    (PI / (2.0 * lambda.abs())).powi(n as i32)
}

/// Flat Plancherel constant in the plane, `‖f‖² = FLAT_C2 ∫|f̂|²`.
pub const FLAT_C2: f64 = 1.0 / (4.0 * PI * PI);

/// Ratio of the Euclidean heat kernel at the origin to the unit-prefactor twisted kernel as `λ → 0`.
pub fn measure_twisted_heat_prefactor(n: usize, t: f64) -> Result<f64> {
    let unit = twisted_heat_kernel(n, 1e-9, t, C64::new(0.0, 0.0))?.re / twisted_heat_prefactor(n);
    Ok(crate::heatlab::gauss_heat(2 * n, t, &vec![0.0; 2 * n])? / unit)
}

/// `(φ_k ∗_λ p_t)/(e^{−(2k+1)|λ|t} φ_k)` at the origin of a `61²` grid, `n = 1`.
pub fn measure_heat_eigen(k: usize, lambda: f64, t: f64) -> Result<f64> {
    let grid = Grid1::new(61, 0.3);
    let rho = |x: &[f64], u: &[f64]| C64::new(x[0] * x[0] + u[0] * u[0], 0.0);
    let kern = Slice::from_fn(1, grid, |x, u| twisted_heat_kernel(1, lambda, t, rho(x, u)).unwrap());
    let phi = Slice::from_fn(1, grid, |x, u| laguerre_phi(LaguerreArg::new(k, 1, rho(x, u)), lambda).unwrap());
    let out = twisted_conv(&phi, &kern, lambda)?;
    let centre = out.values.len() / 2;
    let decay = (-((2 * k + 1) as f64) * lambda.abs() * t).exp();
    Ok(out.values[centre].re / (decay * phi.values[centre].re))
}

pub fn measure_lemma63(k: usize, lambda: f64, t: f64, n: usize) -> Result<f64> {
    Ok(lemma63_integral(k, lambda, t, n)? / (laguerre_binom(k, n) * ((2 * k + n) as f64 * lambda.abs() * t).exp()))
}

/// `heat_image_norm(e^{−tΔ}f)/‖f‖²` on a spectral fixture.
pub fn measure_heat_image(sd: &SpectralData, t: f64) -> Result<f64> {
    Ok(heat_image_norm(&heat_apply(sd, t)?, t)? / sd.total_energy())
}

/// `Σ_{a,b<terms} |Φ_ab(2iy,2iv)|²/‖Φ_ab‖²` over `p_{2t}^λ(−16r²)`, `n = 1`.
pub fn measure_bergman_scale(lambda: f64, t: f64, y: f64, v: f64, terms: usize) -> Result<f64> {
    let l = lambda.abs();
    let mut sum = 0.0;
    for a in 0..terms {
        for b in 0..terms {
            let val = special_hermite_normalized(l, &[a], &[b], &[C64::new(0.0, 2.0 * y)], &[C64::new(0.0, 2.0 * v)])?;
            // ‖Φ_ab‖² = (|λ|/2π)·phi_norm·e^{2(2b+1)|λ|t}
            let norm2 = l / (2.0 * PI) * phi_norm(1, l) * (2.0 * (2 * b + 1) as f64 * l * t).exp();
            sum += val.norm_sqr() / norm2;
        }
    }
    let r2 = y * y + v * v;
    Ok(sum / twisted_heat_kernel(1, l, 2.0 * t, C64::new(-16.0 * r2, 0.0))?.re)
}

/// `‖φ_k^λ‖²_{B_t}` by tensor Gauss–Legendre over `ℂ`, divided by `C(k,k) e^{2(2k+1)|λ|t}`, `n = 1`.
pub fn measure_phi_norm(k: usize, lambda: f64, t: f64, nodes: usize) -> Result<f64> {
    let l = lambda.abs();
    let rule = gauss_legendre(nodes, -9.0, 9.0);
    let mut acc = 0.0;
    for (&x, &wx) in rule.nodes.iter().zip(&rule.weights) {
        for (&u, &wu) in rule.nodes.iter().zip(&rule.weights) {
            let mut inner = 0.0;
            for (&y, &wy) in rule.nodes.iter().zip(&rule.weights) {
                for (&v, &wv) in rule.nodes.iter().zip(&rule.weights) {
                    let rho = C64::new(x * x + u * u - y * y - v * v, 2.0 * (x * y + u * v));
                    let phi = laguerre_phi(LaguerreArg::new(k, 1, rho), l)?;
                    let weight = (l * (u * y - v * x)).exp() * twisted_heat_kernel(1, l, 2.0 * t, C64::new(4.0 * (y * y + v * v), 0.0))?.re;
                    inner += wy * wv * phi.norm_sqr() * weight;
                }
            }
            acc += wx * wu * inner;
        }
    }
    Ok(acc / (laguerre_binom(k, 1) * (2.0 * (2 * k + 1) as f64 * l * t).exp()))
}

/// `‖f‖² / ∫|f̂|²` with `f̂` on the DFT grid.
pub fn measure_flat_c2(f: &FlatFunction) -> Result<f64> {
    let dxi = 2.0 * PI / f.grid.extent();
    let spectral: f64 = flat_fourier_grid(f)?.iter().map(|v| v.norm_sqr()).sum::<f64>() * dxi * dxi;
    Ok(f.norm2() / spectral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euclid::{FlatFixture, FlatSpec};
    use crate::spectral::{synth_bandlimited, SynthSpec};

    #[test]
    fn twisted_heat_prefactor_is_frozen() {
        for n in 1..=3 {
            for &t in &[0.1, 0.7] {
                let m = measure_twisted_heat_prefactor(n, t).unwrap();
                assert!((m - twisted_heat_prefactor(n)).abs() < 1e-12 * m);
            }
        }
    }

    #[test]
    fn heat_eigen_is_frozen() {
        for k in 0..3 {
            assert!((measure_heat_eigen(k, 1.0, 0.3).unwrap() - HEAT_EIGEN).abs() < 1e-4);
        }
    }

    #[test]
    fn lemma63_is_frozen() {
        for &(k, n) in &[(0, 1), (3, 1), (2, 2)] {
            assert!((measure_lemma63(k, 0.8, 0.25, n).unwrap() - LEMMA63).abs() < 1e-10);
        }
    }

    #[test]
    fn heat_image_is_frozen() {
        let mut spec = SynthSpec::new(0.5, 2.0, 1);
        spec.grid_points = 24;
        spec.t_points = 16;
        spec.kmax = 6;
        spec.lambda_count = 9;
        let (_, sd) = synth_bandlimited(&spec).unwrap();
        for &t in &[0.1, 0.4] {
            assert!((measure_heat_image(&sd, t).unwrap() - heat_image(1)).abs() < 1e-8);
        }
        assert_eq!(heat_image(1), 1.0);
    }

    #[test]
    fn bergman_scale_is_frozen() {
        for &(y, v) in &[(0.0, 0.0), (0.4, 0.1), (1.0, -0.5)] {
            let m = measure_bergman_scale(0.7, 0.3, y, v, 120).unwrap();
            assert!((m - bergman_scale(1)).abs() < 1e-9 * m, "{m}");
        }
    }

    #[test]
    fn phi_norm_is_frozen() {
        for k in 0..2 {
            let m = measure_phi_norm(k, 0.9, 0.2, 64).unwrap();
            assert!((m - phi_norm(1, 0.9)).abs() < 1e-6 * m, "{m}");
        }
    }

    #[test]
    fn flat_c2_is_frozen() {
        let f = FlatFixture::new(FlatSpec::bump(1.0, 2)).unwrap().sample().unwrap();
        assert!((measure_flat_c2(&f).unwrap() - FLAT_C2).abs() < 1e-10 * FLAT_C2);
    }
}
