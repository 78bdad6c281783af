//! Flat model on `ℝⁿ`: Fourier transform `f̂(ξ) = ∫ f(x) e^{−ix·ξ} dx`, spherical functions,
//! the motion-group orbital integral and its Paley–Wiener growth.
//!
//! Grid operations are implemented for `n = 2`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::complexification::{GrowthFit, Ray};
use crate::constants::FLAT_C2;
use crate::error::{Error, Result};
use crate::quadrature::{composite_legendre, gauss_legendre, Grid1, Rule};
use crate::specfun::{bessel_j_norm_imag, bessel_j_norm_origin, log_bessel_j_norm_imag};
use crate::spectral::IdentityReport;

/// Samples of `f` on a centred square grid, rows along `x₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatFunction {
    pub n: usize,
    pub grid: Grid1,
    pub samples: Vec<C64>,
    /// Radial support `[r_lo, r_hi]` of `f̂` when known.
    pub support: Option<(f64, f64)>,
}

fn require_plane(n: usize) -> Result<()> {
    if n != 2 {
        return Err(Error::Unsupported { n, what: "flat grid operations" });
    }
    Ok(())
}

impl FlatFunction {
    pub fn from_fn(grid: Grid1, f: impl Fn(f64, f64) -> C64) -> Self {
        let mut samples = Vec::with_capacity(grid.count * grid.count);
        for i in 0..grid.count {
            for j in 0..grid.count {
                samples.push(f(grid.point(i), grid.point(j)));
            }
        }
        Self { n: 2, grid, samples, support: None }
    }

    pub fn norm2(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.step.powi(2)
    }

    /// Samples on the grid boundary are negligible against the maximum.
    pub fn decays(&self) -> bool {
        let nn = self.grid.count;
        let max = self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut edge = 0.0f64;
        for i in 0..nn {
            for &(a, b) in &[(0, i), (nn - 1, i), (i, 0), (i, nn - 1)] {
                edge = edge.max(self.samples[a * nn + b].norm());
            }
        }
        edge <= 1e-8 * max
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.samples.iter_mut().for_each(|v| *v *= c);
        out
    }
}

/// `f̂` at polar nodes `(r_i cos θ_j, r_i sin θ_j)`, radius-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarSamples {
    pub radii: Vec<f64>,
    pub angles: Vec<f64>,
    pub values: Vec<C64>,
}

/// `h² Σ f(x) e^{−ix·ξ}` at each polar node.
pub fn flat_fourier(f: &FlatFunction, radii: &[f64], angles: &[f64]) -> Result<PolarSamples> {
    require_plane(f.n)?;
    if !f.decays() {
        return Err(Error::Domain("samples do not decay at the grid edge".into()));
    }
    let nyquist = PI / f.grid.step;
    if radii.iter().any(|r| r.abs() >= nyquist) {
        return Err(Error::Domain(format!("radius beyond the grid Nyquist limit {nyquist}")));
    }
    let nodes: Vec<(f64, f64)> = radii.iter().flat_map(|&r| angles.iter().map(move |&th| (r * th.cos(), r * th.sin()))).collect();
    let values = nodes.par_iter().map(|&(xi1, xi2)| fourier_at(f, xi1, xi2)).collect();
    Ok(PolarSamples { radii: radii.to_vec(), angles: angles.to_vec(), values })
}

fn fourier_at(f: &FlatFunction, xi1: f64, xi2: f64) -> C64 {
    let nn = f.grid.count;
    let e2: Vec<C64> = (0..nn).map(|j| C64::from_polar(1.0, -f.grid.point(j) * xi2)).collect();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..nn {
        let row = &f.samples[i * nn..(i + 1) * nn];
        let inner: C64 = row.iter().zip(&e2).map(|(a, b)| a * b).sum();
        acc += inner * C64::from_polar(1.0, -f.grid.point(i) * xi1);
    }
    acc * f.grid.step.powi(2)
}

/// Frequencies of the DFT grid, `2πm/(Nh)` in FFT order.
fn dft_freqs(grid: &Grid1) -> Vec<f64> {
    let nn = grid.count as i64;
    let dxi = 2.0 * PI / grid.extent();
    (0..nn).map(|m| if m < (nn + 1) / 2 { m } else { m - nn } as f64 * dxi).collect()
}

fn fft2(data: &mut [C64], nn: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(nn) } else { planner.plan_fft_forward(nn) };
    for row in data.chunks_mut(nn) {
        fft.process(row);
    }
    let mut col = vec![C64::new(0.0, 0.0); nn];
    for j in 0..nn {
        for i in 0..nn {
            col[i] = data[i * nn + j];
        }
        fft.process(&mut col);
        for i in 0..nn {
            data[i * nn + j] = col[i];
        }
    }
}

/// `f̂` on the DFT frequency grid (FFT order on both axes).
pub fn flat_fourier_grid(f: &FlatFunction) -> Result<Vec<C64>> {
    require_plane(f.n)?;
    let nn = f.grid.count;
    let mut data = f.samples.clone();
    fft2(&mut data, nn, false);
    let shift: Vec<C64> = dft_freqs(&f.grid).iter().map(|xi| C64::from_polar(1.0, -f.grid.point(0) * xi)).collect();
    let h2 = f.grid.step.powi(2);
    for i in 0..nn {
        for j in 0..nn {
            data[i * nn + j] *= shift[i] * shift[j] * h2;
        }
    }
    Ok(data)
}

/// Samples of `(2π)^{−2} ∫ f̂(ξ) e^{ix·ξ} dξ` from `f̂` on the DFT grid of `grid`.
pub fn flat_inverse_grid(grid: Grid1, fhat: impl Fn(f64, f64) -> C64) -> FlatFunction {
    let nn = grid.count;
    let freqs = dft_freqs(&grid);
    let x0 = grid.point(0);
    let mut data: Vec<C64> = Vec::with_capacity(nn * nn);
    for i in 0..nn {
        for j in 0..nn {
            let phase = C64::from_polar(1.0, x0 * (freqs[i] + freqs[j]));
            data.push(fhat(freqs[i], freqs[j]) * phase);
        }
    }
    fft2(&mut data, nn, true);
    let scale = 1.0 / (grid.extent() * grid.extent());
    data.iter_mut().for_each(|v| *v *= scale);
    FlatFunction { n: 2, grid, samples: data, support: None }
}

/// Spherical function `φ_λ(iy)`, the mean of `e^{λ ω·y}` over `S^{n−1}`, normalized to `1` at `0`.
pub fn flat_phi_lambda(n: usize, lambda: f64, y_norm: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Dimension { expected: 2, got: n });
    }
    if lambda < 0.0 {
        return Err(Error::Domain("spectral radius must be nonnegative".into()));
    }
    let nu = n as f64 / 2.0 - 1.0;
    Ok(bessel_j_norm_imag(nu, lambda * y_norm) / bessel_j_norm_origin(nu))
}

fn log_flat_phi(n: usize, lambda: f64, y_norm: f64) -> f64 {
    let nu = n as f64 / 2.0 - 1.0;
    log_bessel_j_norm_imag(nu, lambda * y_norm) - bessel_j_norm_origin(nu).ln()
}

/// Quadrature sizes of the flat Gutzmer sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatQuadrature {
    pub angles: usize,
    pub radii: usize,
}

impl Default for FlatQuadrature {
    fn default() -> Self {
        Self { angles: 64, radii: 64 }
    }
}

fn support_of(f: &FlatFunction) -> Result<(f64, f64)> {
    let (lo, hi) = f.support.ok_or_else(|| Error::NotBandLimited("flat function carries no spectral support".into()))?;
    if hi >= PI / f.grid.step {
        return Err(Error::Domain(format!("support radius {hi} reaches the grid Nyquist limit")));
    }
    Ok((lo, hi))
}

/// `∫_{M(2)} |F(g·(x+iy))|² dg`: the translation integral by Plancherel on the DFT grid, rotations by uniform angles.
pub fn flat_orbital(f: &FlatFunction, y: [f64; 2], q: &FlatQuadrature) -> Result<f64> {
    let (_, hi) = support_of(f)?;
    let fhat = flat_fourier_grid(f)?;
    let freqs = dft_freqs(&f.grid);
    let nn = f.grid.count;
    let dxi = 2.0 * PI / f.grid.extent();
    let dirs: Vec<(f64, f64)> = (0..q.angles)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / q.angles as f64;
            (th.cos() * y[0] - th.sin() * y[1], th.sin() * y[0] + th.cos() * y[1])
        })
        .collect();
    let mut acc = 0.0;
    for i in 0..nn {
        for j in 0..nn {
            let (a, b) = (freqs[i], freqs[j]);
            if a.hypot(b) > hi * (1.0 + 1e-12) {
                continue;
            }
            let w = fhat[i * nn + j].norm_sqr();
            if w == 0.0 {
                continue;
            }
            let avg: f64 = dirs.iter().map(|(y1, y2)| (-2.0 * (y1 * a + y2 * b)).exp()).sum::<f64>() / q.angles as f64;
            acc += w * avg;
        }
    }
    Ok(FLAT_C2 * acc * dxi * dxi)
}

fn polar_rule(lo: f64, hi: f64, count: usize) -> Rule {
    gauss_legendre(count, lo, hi)
}

/// `(2π)^{−2} ∫∫ |f̂(rω)|² φ_r(2iy) r dω dr` on a Gauss–Legendre × uniform polar grid.
pub fn flat_spectral(f: &FlatFunction, y_norm: f64, q: &FlatQuadrature) -> Result<f64> {
    let (lo, hi) = support_of(f)?;
    let rule = polar_rule(lo, hi, q.radii);
    let angles: Vec<f64> = (0..q.angles).map(|j| 2.0 * PI * j as f64 / q.angles as f64).collect();
    let polar = flat_fourier(f, &rule.nodes, &angles)?;
    let mut acc = 0.0;
    for (i, (&r, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let ring: f64 = polar.values[i * q.angles..(i + 1) * q.angles].iter().map(|v| v.norm_sqr()).sum::<f64>() * 2.0 * PI / q.angles as f64;
        acc += w * r * ring * flat_phi_lambda(2, r, 2.0 * y_norm)?;
    }
    Ok(FLAT_C2 * acc)
}

/// Orbital integral against its spectral expression at `y`.
pub fn flat_gutzmer(f: &FlatFunction, y: [f64; 2], q: &FlatQuadrature) -> Result<IdentityReport> {
    let lhs = flat_orbital(f, y, q)?;
    let rhs = flat_spectral(f, y[0].hypot(y[1]), q)?;
    Ok(IdentityReport::new(lhs, rhs))
}

/// Ring energies `∫|f̂(rω)|² dω` at composite Gauss–Legendre radii, for growth evaluation.
pub struct RingProfile {
    pub rule: Rule,
    pub rings: Vec<f64>,
}

impl RingProfile {
    pub fn new(f: &FlatFunction, angles: usize, panels: usize) -> Result<Self> {
        let (lo, hi) = support_of(f)?;
        let rule = composite_legendre(panels, 16, lo, hi);
        let th: Vec<f64> = (0..angles).map(|j| 2.0 * PI * j as f64 / angles as f64).collect();
        let polar = flat_fourier(f, &rule.nodes, &th)?;
        let rings = (0..rule.len())
            .map(|i| polar.values[i * angles..(i + 1) * angles].iter().map(|v| v.norm_sqr()).sum::<f64>() * 2.0 * PI / angles as f64)
            .collect();
        Ok(Self { rule, rings })
    }

    /// `ln` of the orbital integral at `|y|`, via log-sum-exp.
    pub fn log_orbital(&self, y_norm: f64) -> f64 {
        let logs: Vec<f64> = self
            .rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .zip(&self.rings)
            .filter(|(_, &ring)| ring > 0.0)
            .map(|((&r, &w), &ring)| (w * r * ring).ln() + log_flat_phi(2, r, 2.0 * y_norm))
            .collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return top;
        }
        top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln() + FLAT_C2.ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatPwReport {
    pub fit: Option<GrowthFit>,
    pub a_hat: f64,
    /// Largest `|y|` used.
    pub y_max: f64,
    pub converged: bool,
    pub conclusive: bool,
}

/// Growth of the orbital integral along `|y|`, fitted as `c + s|y| + q ln|y|`, doubling the range until `â` settles.
pub fn flat_pw_check(f: &FlatFunction, y_max: f64, samples: usize, doublings: usize) -> Result<FlatPwReport> {
    let profile = RingProfile::new(f, 64, 16)?;
    if profile.rings.iter().all(|&r| r == 0.0) {
        return Ok(FlatPwReport { fit: None, a_hat: 0.0, y_max, converged: false, conclusive: false });
    }
    let run = |ymax: f64| -> Result<(GrowthFit, bool)> {
        let pts: Vec<(f64, f64)> = (1..=samples).map(|i| {
            let y = ymax * i as f64 / samples as f64;
            (y, profile.log_orbital(y))
        }).collect();
        let monotone = pts.windows(2).all(|w| w[1].1 >= w[0].1);
        Ok((GrowthFit::fit_asymptotic(Ray::Radial, pts, 2)?, monotone))
    };
    let mut ymax = y_max;
    let (mut fit, mut monotone) = run(ymax)?;
    let mut converged = false;
    for _ in 0..doublings {
        ymax *= 2.0;
        let (next, mono) = run(ymax)?;
        let moved = (next.slope - fit.slope).abs() / next.slope.abs().max(f64::MIN_POSITIVE);
        fit = next;
        monotone = mono;
        if moved <= 0.01 {
            converged = true;
            break;
        }
    }
    let a_hat = fit.slope / 2.0;
    Ok(FlatPwReport { fit: Some(fit), a_hat, y_max: ymax, converged, conclusive: monotone })
}

/// Parameters of a seeded band-limited flat fixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatSpec {
    /// Scale setting the grid step `π/(2a)`.
    pub a: f64,
    pub r_lo: f64,
    pub r_hi: f64,
    /// Vanishing order of the radial bump at both ends.
    pub order: i32,
    /// Angular modes `|m| ≤ m_max`.
    pub m_max: usize,
    pub seed: u64,
    pub points: usize,
}

impl FlatSpec {
    pub fn bump(a: f64, seed: u64) -> Self {
        Self { a, r_lo: 0.5 * a, r_hi: a, order: 8, m_max: 3, seed, points: 256 }
    }
}

/// `f̂(rω) = (r − r_lo)^p (r_hi − r)^p Σ c_m e^{imθ}` on `r_lo ≤ r ≤ r_hi`, zero outside.
pub struct FlatFixture {
    pub spec: FlatSpec,
    pub coeffs: Vec<C64>,
}

impl FlatFixture {
    pub fn new(spec: FlatSpec) -> Result<Self> {
        if !(spec.r_lo >= 0.0 && spec.r_hi > spec.r_lo && spec.a > 0.0) {
            return Err(Error::Config("flat fixture needs 0 <= r_lo < r_hi and a > 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let coeffs = (0..2 * spec.m_max + 1).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        Ok(Self { spec, coeffs })
    }

    pub fn fhat(&self, xi1: f64, xi2: f64) -> C64 {
        let r = xi1.hypot(xi2);
        let s = &self.spec;
        if r <= s.r_lo || r >= s.r_hi {
            return C64::new(0.0, 0.0);
        }
        let th = xi2.atan2(xi1);
        let bump = ((r - s.r_lo) * (s.r_hi - r) / (0.25 * (s.r_hi - s.r_lo).powi(2))).powi(s.order);
        let m0 = s.m_max as i64;
        let ang: C64 = self.coeffs.iter().enumerate().map(|(i, c)| c * C64::from_polar(1.0, (i as i64 - m0) as f64 * th)).sum();
        ang * bump
    }

    pub fn grid(&self) -> Grid1 {
        Grid1::new(self.spec.points, PI / (2.0 * self.spec.a))
    }

    pub fn sample(&self) -> Result<FlatFunction> {
        let grid = self.grid();
        if self.spec.r_hi >= PI / grid.step {
            return Err(Error::Domain("fixture support reaches the grid Nyquist limit".into()));
        }
        let mut f = flat_inverse_grid(grid, |a, b| self.fhat(a, b));
        f.support = Some((self.spec.r_lo, self.spec.r_hi));
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_transform_convention() {
        let f = FlatFunction::from_fn(Grid1::new(64, 0.25), |x, y| C64::new((-(x * x + y * y) / 2.0).exp(), 0.0));
        let p = flat_fourier(&f, &[0.0, 1.0, 2.5], &[0.0, 1.0]).unwrap();
        for (i, &r) in p.radii.iter().enumerate() {
            for j in 0..2 {
                let v = p.values[i * 2 + j];
                assert!((v - 2.0 * PI * (-r * r / 2.0f64).exp()).norm() < 1e-12);
            }
        }
        let g = flat_fourier_grid(&f).unwrap();
        let freqs = dft_freqs(&f.grid);
        for &(i, j) in &[(0usize, 0usize), (3, 5), (60, 2)] {
            let want = 2.0 * PI * (-(freqs[i].powi(2) + freqs[j].powi(2)) / 2.0).exp();
            assert!((g[i * 64 + j] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn translation_is_modulation() {
        let (x0, y0) = (0.7, -0.4);
        let grid = Grid1::new(64, 0.25);
        let f = FlatFunction::from_fn(grid, |x, y| C64::new((-(x * x + y * y) / 2.0).exp(), 0.0));
        let g = FlatFunction::from_fn(grid, |x, y| C64::new((-((x - x0).powi(2) + (y - y0).powi(2)) / 2.0).exp(), 0.0));
        let th = [0.3, 2.0];
        let pf = flat_fourier(&f, &[1.2], &th).unwrap();
        let pg = flat_fourier(&g, &[1.2], &th).unwrap();
        for (j, th) in th.iter().enumerate() {
            let (a, b) = (1.2 * th.cos(), 1.2 * th.sin());
            assert!((pg.values[j] - pf.values[j] * C64::from_polar(1.0, -(x0 * a + y0 * b))).norm() < 1e-11);
        }
    }

    #[test]
    fn synthesis_round_trip_and_guards() {
        let fx = FlatFixture::new(FlatSpec::bump(1.0, 3)).unwrap();
        let f = fx.sample().unwrap();
        let radii = [0.6, 0.75, 0.9];
        let th = [0.0, 1.1, 4.0];
        let p = flat_fourier(&f, &radii, &th).unwrap();
        let scale = fx.coeffs.iter().map(|c| c.norm()).sum::<f64>();
        for (i, &r) in radii.iter().enumerate() {
            for (j, &t) in th.iter().enumerate() {
                let want = fx.fhat(r * t.cos(), r * t.sin());
                assert!((p.values[i * 3 + j] - want).norm() < 1e-6 * scale);
            }
        }
        assert!(flat_fourier(&f, &[2.1], &[0.0]).is_err());
        let mut f3 = f.clone();
        f3.n = 3;
        assert!(matches!(flat_fourier(&f3, &[0.5], &[0.0]), Err(Error::Unsupported { .. })));
        let wide = FlatFunction::from_fn(Grid1::new(16, 0.25), |_, _| C64::new(1.0, 0.0));
        assert!(flat_fourier(&wide, &[0.5], &[0.0]).is_err());
    }

    #[test]
    fn spherical_function_values() {
        assert_eq!(flat_phi_lambda(2, 1.0, 0.0).unwrap(), 1.0);
        assert!((flat_phi_lambda(2, 1.5, 2.0).unwrap() - 4.880792585865024).abs() < 1e-11);
        let three = flat_phi_lambda(3, 1.0, 2.0).unwrap();
        assert!((three - 2f64.sinh() / 2.0).abs() < 1e-13);
        let mut last = 0.0;
        for i in 0..40 {
            let v = flat_phi_lambda(2, 1.0, 0.25 * i as f64).unwrap();
            assert!(v > last);
            last = v;
        }
        assert!(flat_phi_lambda(1, 1.0, 1.0).is_err());
    }

    #[test]
    fn gutzmer_identity_and_plancherel() {
        let fx = FlatFixture::new(FlatSpec::bump(1.0, 11)).unwrap();
        let f = fx.sample().unwrap();
        let q = FlatQuadrature::default();
        let at0 = flat_gutzmer(&f, [0.0, 0.0], &q).unwrap();
        assert!((at0.lhs - f.norm2()).abs() < 1e-10 * f.norm2());
        assert!(at0.relerr < 1e-10);
        for &r in &[0.5, 1.0, 2.0] {
            let rep = flat_gutzmer(&f, [r * 0.6, r * 0.8], &q).unwrap();
            assert!(rep.relerr < 1e-8, "{r} {rep:?}");
        }
        let a = flat_orbital(&f, [1.0, 0.0], &q).unwrap();
        let b = flat_orbital(&f, [0.0, -1.0], &q).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn pw_growth_of_bumps() {
        for &a in &[0.5, 1.0, 1.5] {
            let f = FlatFixture::new(FlatSpec::bump(a, 5)).unwrap().sample().unwrap();
            let rep = flat_pw_check(&f, 10.0 / a, 40, 4).unwrap();
            assert!(rep.conclusive && rep.converged, "{rep:?}");
            assert!((rep.a_hat - a).abs() < 0.05 * a, "{a} {}", rep.a_hat);
        }
        let mut spec = FlatSpec::bump(1.0, 5);
        spec.r_lo = 0.25;
        spec.r_hi = 0.5;
        spec.points = 512;
        let f = FlatFixture::new(spec).unwrap().sample().unwrap();
        let rep = flat_pw_check(&f, 10.0, 40, 4).unwrap();
        assert!(rep.conclusive && (rep.a_hat - 0.5).abs() < 0.025, "{rep:?}");
        let zero = FlatFixture::new(FlatSpec::bump(1.0, 5)).unwrap().sample().unwrap().scaled(C64::new(0.0, 0.0));
        assert!(!flat_pw_check(&zero, 10.0, 40, 4).unwrap().conclusive);
    }
}
