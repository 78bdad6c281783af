//! Orbital integrals of `|F|²` over the Heisenberg motion group, their spectral
//! expansion, the radial operator `𝒟`, and Paley–Wiener growth fits.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heisenberg::{motion_action, translate, ComplexPoint, HeisPoint, MotionElement};
use crate::specfun::{bessel_j_norm_imag, laguerre_phi, log_bessel_j_norm_imag, LaguerreArg};
use crate::spectral::{inverse_binom, require_band_limited, SpectralData};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    Spectral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalSample {
    pub point: ComplexPoint,
    pub value: f64,
    pub method: Method,
}

fn check_imaginary(sd: &SpectralData, p: &ComplexPoint) -> Result<()> {
    if p.dim() != sd.n {
        return Err(Error::Dimension { expected: sd.n, got: p.dim() });
    }
    if !p.is_purely_imaginary() {
        return Err(Error::Domain("orbital integrals are evaluated at purely imaginary points".into()));
    }
    Ok(())
}

/// Spectral side `Σ e^{2λη} ‖f^λ∗_λφ_k^λ‖² C(k+n−1,k)⁻¹ φ_k^λ(2iy, 2iv) dμ(λ)`.
pub fn gutzmer_spectral(sd: &SpectralData, p: &ComplexPoint) -> Result<f64> {
    check_imaginary(sd, p)?;
    let r2 = p.imag_radius2();
    let eta = p.eta();
    let mut acc = 0.0;
    for c in sd.cells() {
        let phi = laguerre_phi(LaguerreArg::doubled_imaginary(c.k, sd.n, r2), c.lambda)?.re;
        acc += c.energy * (2.0 * c.lambda * eta).exp() * inverse_binom(c.k, sd.n) * phi;
    }
    Ok(acc)
}

/// Controls of the direct orbital quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitalQuadrature {
    /// `U(1)` nodes; `None` picks enough to integrate the angular content exactly.
    pub theta_nodes: Option<usize>,
    /// Translation node spacing relative to the fixture grid step.
    pub spacing: f64,
    /// Trapezoid nodes over one `t` period.
    pub t_nodes: usize,
    /// Stop growing the translation box once a shell adds less than this share.
    pub shell_tol: f64,
    /// Largest box half-width, in multiples of the fixture grid extent.
    pub max_extent: f64,
}

impl Default for OrbitalQuadrature {
    fn default() -> Self {
        Self { theta_nodes: None, spacing: 0.5, t_nodes: 64, shell_tol: 1e-6, max_extent: 3.0 }
    }
}

/// `∫_{U(1)} ∫_{ℍ¹} |F(g·p)|² dg` by tensor quadrature (`n = 1`).
pub fn orbital_direct(sd: &SpectralData, p: &ComplexPoint, q: &OrbitalQuadrature) -> Result<f64> {
    check_imaginary(sd, p)?;
    if sd.n != 1 {
        return Err(Error::Unsupported { n: sd.n, what: "direct orbital integral" });
    }
    require_band_limited(sd)?;
    let m_theta = q.theta_nodes.unwrap_or_else(|| (2 * sd.max_angular() + 2).max(16));
    let rotated: Vec<ComplexPoint> = (0..m_theta)
        .map(|i| {
            let g = MotionElement::rotation(2.0 * PI * i as f64 / m_theta as f64, HeisPoint::identity(1))?;
            motion_action(&g, p)
        })
        .collect::<Result<_>>()?;
    let active: Vec<usize> = (0..sd.blocks.len()).filter(|&j| !sd.blocks[j].modes.is_empty()).collect();
    let pref = sd.lambda_step / (2.0 * PI);
    let period = 2.0 * PI / sd.lambda_step;
    let dt = period / q.t_nodes as f64;
    let t_phase: Vec<Vec<C64>> = active
        .iter()
        .map(|&j| (0..q.t_nodes).map(|m| C64::from_polar(1.0, -sd.blocks[j].lambda * m as f64 * dt)).collect())
        .collect();
    let d = q.spacing * sd.grid.step;
    let node = |ix: i64, iu: i64| -> f64 {
        let h = HeisPoint::new(vec![ix as f64 * d], vec![iu as f64 * d], 0.0);
        let mut acc = 0.0;
        for rp in &rotated {
            let pt = translate(&h, rp);
            let vals: Vec<C64> = active
                .iter()
                .map(|&j| sd.eval_slice(j, &pt.z, &pt.w) * (C64::new(0.0, -sd.blocks[j].lambda) * pt.zeta).exp() * pref)
                .collect();
            for m in 0..q.t_nodes {
                let f: C64 = vals.iter().zip(&t_phase).map(|(v, ph)| v * ph[m]).sum();
                acc += f.norm_sqr();
            }
        }
        acc * dt * d * d / m_theta as f64
    };
    let shell = |lo: i64, hi: i64| -> f64 {
        // nodes with lo < max(|ix|, |iu|) <= hi, or the full square when lo < 0
        let idx: Vec<(i64, i64)> = (-hi..=hi)
            .flat_map(|a| (-hi..=hi).map(move |b| (a, b)))
            .filter(|&(a, b)| a.abs().max(b.abs()) > lo)
            .collect();
        let parts: Vec<f64> = idx.par_iter().map(|&(a, b)| node(a, b)).collect();
        parts.iter().sum()
    };
    let mut m = (sd.grid.half_width() / d).ceil() as i64;
    let cap = (q.max_extent * sd.grid.extent() / d).ceil() as i64;
    let mut total = shell(-1, m);
    let width = ((sd.grid.step / d).ceil() as i64).max(1) * 2;
    loop {
        let add = shell(m, m + width);
        total += add;
        m += width;
        if add <= q.shell_tol * total {
            return Ok(total);
        }
        if m > cap {
            return Err(Error::Truncation(format!("orbital integrand still carries {:.2e} of the mass at the box edge", add / total)));
        }
    }
}

/// `𝒟O(iy, iv, iη)` at `|y|²+|v|² = r²`: `Σ e^{2λη} ‖f^λ∗_λφ_k^λ‖² j_{n−1}(2i√((2k+n)|λ|) r) dμ`.
pub fn apply_d(sd: &SpectralData, r: f64, eta: f64) -> f64 {
    let nu = sd.n as f64 - 1.0;
    sd.cells()
        .iter()
        .map(|c| c.energy * (2.0 * c.lambda * eta).exp() * bessel_j_norm_imag(nu, 2.0 * c.fan.sqrt() * r))
        .sum()
}

/// `ln 𝒟O`, evaluated without overflow.
pub fn log_apply_d(sd: &SpectralData, r: f64, eta: f64) -> f64 {
    let nu = sd.n as f64 - 1.0;
    let logs: Vec<f64> = sd
        .cells()
        .iter()
        .map(|c| c.energy.ln() + 2.0 * c.lambda * eta + log_bessel_j_norm_imag(nu, 2.0 * c.fan.sqrt() * r))
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
}

pub fn apply_d_at(sd: &SpectralData, p: &ComplexPoint) -> Result<f64> {
    check_imaginary(sd, p)?;
    Ok(apply_d(sd, p.imag_radius2().sqrt(), p.eta()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ray {
    Eta,
    Radial,
}

impl Ray {
    pub fn name(self) -> &'static str {
        match self {
            Ray::Eta => "eta",
            Ray::Radial => "radial",
        }
    }
}

/// Least-squares line through the tail half of `(parameter, log value)` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    pub ray: Ray,
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of `log parameter`, zero for straight-line fits.
    pub log_power: f64,
    /// Max absolute deviation on the fitted half.
    pub residual: f64,
}

impl GrowthFit {
    pub fn fit(ray: Ray, samples: Vec<(f64, f64)>) -> Result<Self> {
        let tail: Vec<(f64, f64)> = samples[samples.len() / 2..].iter().copied().filter(|s| s.1.is_finite()).collect();
        if tail.len() < 2 {
            return Err(Error::Domain("growth fit needs at least two finite samples".into()));
        }
        let k = tail.len() as f64;
        let mx = tail.iter().map(|s| s.0).sum::<f64>() / k;
        let my = tail.iter().map(|s| s.1).sum::<f64>() / k;
        let sxx: f64 = tail.iter().map(|s| (s.0 - mx).powi(2)).sum();
        let sxy: f64 = tail.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
        if sxx == 0.0 {
            return Err(Error::Domain("growth fit needs distinct parameters".into()));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let residual = tail.iter().map(|s| (s.1 - intercept - slope * s.0).abs()).fold(0.0, f64::max);
        Ok(Self { ray, samples, slope, intercept, log_power: 0.0, residual })
    }

    /// Fit `intercept + slope·p + log_power·ln p` on the tail half (parameters must be positive).
    pub fn fit_with_log(ray: Ray, samples: Vec<(f64, f64)>) -> Result<Self> {
        Self::fit_asymptotic(ray, samples, 0)
    }

    /// As [`GrowthFit::fit_with_log`] with extra `p^{-1}, …, p^{-inverse_terms}` columns absorbing subleading terms.
    pub fn fit_asymptotic(ray: Ray, samples: Vec<(f64, f64)>, inverse_terms: usize) -> Result<Self> {
        let cols = 3 + inverse_terms;
        let tail: Vec<(f64, f64)> = samples[samples.len() / 2..].iter().copied().filter(|s| s.1.is_finite() && s.0 > 0.0).collect();
        if tail.len() < cols {
            return Err(Error::Domain(format!("log-corrected fit needs at least {cols} positive samples")));
        }
        let design = DMatrix::from_fn(tail.len(), cols, |i, j| match j {
            0 => 1.0,
            1 => tail[i].0,
            2 => tail[i].0.ln(),
            m => tail[i].0.powi(2 - m as i32),
        });
        let rhs = DVector::from_iterator(tail.len(), tail.iter().map(|s| s.1));
        let coef = design
            .clone()
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .map_err(|e| Error::Domain(format!("log-corrected fit failed: {e}")))?;
        let residual = (design * &coef - rhs).amax();
        Ok(Self { ray, samples, slope: coef[1], intercept: coef[0], log_power: coef[2], residual })
    }
}

/// Sample points along the two rays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayPlan {
    pub eta_max: f64,
    pub eta_step: f64,
    pub r_max: f64,
    pub r_step: f64,
}

impl Default for RayPlan {
    fn default() -> Self {
        Self { eta_max: 6.0, eta_step: 0.5, r_max: 3.0, r_step: 0.25 }
    }
}

impl RayPlan {
    pub fn scaled(&self, mult: f64) -> Self {
        Self { eta_max: self.eta_max * mult, eta_step: self.eta_step * mult, r_max: self.r_max * mult, r_step: self.r_step * mult }
    }

    fn grid(max: f64, step: f64) -> Vec<f64> {
        let count = (max / step).round() as usize;
        (0..=count).map(|i| i as f64 * step).collect()
    }

    pub fn etas(&self) -> Vec<f64> {
        Self::grid(self.eta_max, self.eta_step)
    }

    pub fn radii(&self) -> Vec<f64> {
        Self::grid(self.r_max, self.r_step)
    }
}

/// Growth fits of `𝒟O` along `η` (both signs, the faster one kept) and along `r` at `η = 0`.
///
/// The radial samples carry `(n − ½) log r` to cancel the Bessel prefactor.
pub fn growth_fits(sd: &SpectralData, plan: &RayPlan) -> Result<(GrowthFit, GrowthFit)> {
    let up: Vec<(f64, f64)> = plan.etas().iter().map(|&e| (e, log_apply_d(sd, 0.0, e))).collect();
    let down: Vec<(f64, f64)> = plan.etas().iter().map(|&e| (e, log_apply_d(sd, 0.0, -e))).collect();
    let up = GrowthFit::fit(Ray::Eta, up)?;
    let down = GrowthFit::fit(Ray::Eta, down)?;
    let eta = if down.slope > up.slope { down } else { up };
    let corr = sd.n as f64 - 0.5;
    let radial: Vec<(f64, f64)> = plan
        .radii()
        .iter()
        .filter(|&&r| r > 0.0)
        .map(|&r| (r, log_apply_d(sd, r, 0.0) + corr * r.ln()))
        .collect();
    Ok((eta, GrowthFit::fit(Ray::Radial, radial)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PwReport {
    /// Smallest constant with `𝒟O ≤ C e^{2A|η|} e^{2√B r}` on the plan.
    pub c_min: f64,
    pub eta_slope: f64,
    pub radial_slope: f64,
    pub fits: (GrowthFit, GrowthFit),
}

/// Forward Paley–Wiener check of `𝒟O` against the band `(A, B)`.
pub fn pw_forward_check(sd: &SpectralData, a: f64, b: f64, plan: &RayPlan) -> Result<PwReport> {
    let mut c_min = 0.0f64;
    for &eta in &plan.etas() {
        for &r in &plan.radii() {
            for s in [1.0, -1.0] {
                let v = log_apply_d(sd, r, s * eta) - 2.0 * a * eta - 2.0 * b.sqrt() * r;
                c_min = c_min.max(v.exp());
            }
        }
    }
    let fits = growth_fits(sd, plan)?;
    Ok(PwReport { c_min, eta_slope: fits.0.slope, radial_slope: fits.1.slope, fits })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    BandLimited,
    NotBandLimited,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::BandLimited => "band-limited",
            Verdict::NotBandLimited => "not-band-limited",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Cell beyond the reference band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCell {
    pub lambda: f64,
    pub k: usize,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailTest {
    pub reference_a: f64,
    pub reference_b: f64,
    /// Mass outside the reference band relative to the total.
    pub tail_fraction: f64,
    pub offending: Vec<TailCell>,
    pub passed: bool,
}

/// Mass of cells with `|λ| > A` or `(2k+n)|λ| > B`.
pub fn tail_test(sd: &SpectralData, a: f64, b: f64, tol: f64) -> TailTest {
    let total = sd.total_energy();
    let mut offending = Vec::new();
    let mut tail = 0.0;
    for c in sd.cells() {
        if c.lambda.abs() > a || c.fan > b {
            tail += c.energy;
            offending.push(TailCell { lambda: c.lambda, k: c.k, energy: c.energy });
        }
    }
    let tail_fraction = if total > 0.0 { tail / total } else { 0.0 };
    let offending = if tail_fraction > tol { offending } else { Vec::new() };
    TailTest { reference_a: a, reference_b: b, tail_fraction, offending, passed: tail_fraction <= tol }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectOptions {
    pub plan: RayPlan,
    /// Nominal band used for the tail test; otherwise the fitted one.
    pub nominal: Option<(f64, f64)>,
    pub tail_tol: f64,
    /// Accept a doubling once both estimates move by at most this share.
    pub converge_tol: f64,
    pub max_doublings: usize,
    pub residual_max: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self { plan: RayPlan::default(), nominal: None, tail_tol: 1e-8, converge_tol: 0.01, max_doublings: 6, residual_max: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectReport {
    pub a_hat: f64,
    pub b_hat: f64,
    pub fits: Vec<GrowthFit>,
    /// Plan multiplier at which the estimates settled.
    pub plan_scale: f64,
    pub converged: bool,
    pub tail_test: Option<TailTest>,
    pub verdict: Verdict,
}

/// Estimate `(A, B)` from the growth of `𝒟O` and test the spectrum against it.
pub fn detect_bandlimit(sd: &SpectralData, opts: &DetectOptions) -> Result<DetectReport> {
    if sd.total_energy() <= 0.0 {
        return Ok(DetectReport {
            a_hat: 0.0,
            b_hat: 0.0,
            fits: Vec::new(),
            plan_scale: 1.0,
            converged: false,
            tail_test: None,
            verdict: Verdict::Inconclusive,
        });
    }
    let estimate = |mult: f64| -> Result<(f64, f64, GrowthFit, GrowthFit)> {
        let (eta, radial) = growth_fits(sd, &opts.plan.scaled(mult))?;
        Ok((eta.slope / 2.0, (radial.slope / 2.0).max(0.0).powi(2), eta, radial))
    };
    let mut mult = 1.0;
    let mut cur = estimate(mult)?;
    let mut converged = false;
    for _ in 0..opts.max_doublings {
        let next = estimate(2.0 * mult)?;
        mult *= 2.0;
        let moved_a = (next.0 - cur.0).abs() / next.0.abs().max(f64::MIN_POSITIVE);
        let moved_b = (next.1 - cur.1).abs() / next.1.abs().max(f64::MIN_POSITIVE);
        cur = next;
        if moved_a <= opts.converge_tol && moved_b <= opts.converge_tol {
            converged = true;
            break;
        }
    }
    let (a_hat, b_hat, eta, radial) = cur;
    let fits_ok = eta.residual <= opts.residual_max && radial.residual <= opts.residual_max;
    let (ra, rb, tol) = match opts.nominal {
        Some((a, b)) => (a * (1.0 + 1e-9), b * (1.0 + 1e-9), opts.tail_tol),
        None => (a_hat * (1.0 + 2.0 * opts.converge_tol), b_hat * (1.0 + 2.0 * opts.converge_tol), opts.tail_tol),
    };
    let tail = tail_test(sd, ra, rb, tol);
    let verdict = if !tail.passed {
        Verdict::NotBandLimited
    } else if converged && fits_ok {
        Verdict::BandLimited
    } else {
        Verdict::Inconclusive
    };
    Ok(DetectReport { a_hat, b_hat, fits: vec![eta, radial], plan_scale: mult, converged, tail_test: Some(tail), verdict })
}
