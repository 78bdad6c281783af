//! Central Fourier slices, twisted convolution, Laguerre projections, Plancherel,
//! inversion and synthesis of band-limited test functions.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heisenberg::{pair_table, ComplexPoint};
use crate::quadrature::Grid1;
use crate::specfun::laguerre_binom;

/// Tail allowance (in Hermite degree units) of the grid resolvability rule.
pub const FOOTPRINT_TAIL: f64 = 12.0;
/// Nodes with `|λ|` below this carry no mass.
pub const PUNCTURE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TDomain {
    /// One period of a function whose `λ`-support lies on the grid `λ_j = jΔλ`.
    Periodic,
    /// Samples of a function that decays before the ends of the `t` grid.
    Decaying,
}

/// Samples of `f(x, u, t)` on a tensor grid, spatial axes `x_1..x_n, u_1..u_n` then `t` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub n: usize,
    pub space: Grid1,
    pub time: Grid1,
    pub t_domain: TDomain,
    pub samples: Vec<C64>,
}

impl GridFunction {
    pub fn zeros(n: usize, space: Grid1, time: Grid1, t_domain: TDomain) -> Self {
        let len = space.count.pow(2 * n as u32) * time.count;
        Self { n, space, time, t_domain, samples: vec![C64::new(0.0, 0.0); len] }
    }

    pub fn from_fn(n: usize, space: Grid1, time: Grid1, t_domain: TDomain, f: impl Fn(&[f64], &[f64], f64) -> C64 + Sync) -> Self {
        let spatial = space.count.pow(2 * n as u32);
        let samples: Vec<C64> = (0..spatial)
            .into_par_iter()
            .flat_map_iter(|s| {
                let coords = spatial_coords(n, &space, s);
                let (x, u) = coords.split_at(n);
                (0..time.count).map(|m| f(x, u, time.point(m))).collect::<Vec<_>>()
            })
            .collect();
        Self { n, space, time, t_domain, samples }
    }

    pub fn spatial_len(&self) -> usize {
        self.space.count.pow(2 * self.n as u32)
    }

    pub fn at(&self, s: usize, m: usize) -> C64 {
        self.samples[s * self.time.count + m]
    }

    /// `∫|f|²` by the grid rule (one period in `t` for periodic data).
    pub fn norm2(&self) -> f64 {
        let cell = self.space.step.powi(2 * self.n as i32) * self.time.step;
        self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.samples.iter_mut().for_each(|v| *v *= c);
        out
    }
}

/// Spatial coordinates `(x_1..x_n, u_1..u_n)` of flat spatial index `s`.
pub fn spatial_coords(n: usize, grid: &Grid1, mut s: usize) -> Vec<f64> {
    let mut out = vec![0.0; 2 * n];
    for d in (0..2 * n).rev() {
        out[d] = grid.point(s % grid.count);
        s /= grid.count;
    }
    out
}

/// Samples of a function of `(x, u) ∈ ℝ^{2n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub n: usize,
    pub grid: Grid1,
    pub values: Vec<C64>,
}

impl Slice {
    pub fn from_fn(n: usize, grid: Grid1, f: impl Fn(&[f64], &[f64]) -> C64 + Sync) -> Self {
        let len = grid.count.pow(2 * n as u32);
        let values = (0..len)
            .into_par_iter()
            .map(|s| {
                let c = spatial_coords(n, &grid, s);
                f(&c[..n], &c[n..])
            })
            .collect();
        Self { n, grid, values }
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.step.powi(2 * self.n as i32)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Uniform `λ` grid `λ_j = jΔλ` without the punctured nodes, with `dμ` weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    pub n: usize,
    pub step: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LambdaGrid {
    /// `count` (odd) equally spaced nodes on `[−lmax, lmax]`, before puncturing.
    pub fn uniform(n: usize, count: usize, lmax: f64) -> Result<Self> {
        if count < 3 || count.is_multiple_of(2) || !(lmax > 0.0) {
            return Err(Error::Config(format!("lambda grid needs an odd count >= 3 and lmax > 0 (got {count}, {lmax})")));
        }
        let half = (count - 1) / 2;
        let step = lmax / half as f64;
        let mut nodes = Vec::new();
        for j in -(half as i64)..=(half as i64) {
            let l = j as f64 * step;
            if l.abs() >= PUNCTURE && j != 0 {
                nodes.push(l);
            }
        }
        Ok(Self::from_nodes(n, step, nodes))
    }

    pub fn from_nodes(n: usize, step: f64, nodes: Vec<f64>) -> Self {
        let weights = nodes.iter().map(|l| dmu_weight(n, step, *l)).collect();
        Self { n, step, nodes, weights }
    }

    /// Period of the reduced group on which this grid is exact.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.step
    }

    pub fn lmax(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, l| m.max(l.abs()))
    }
}

/// `Δλ (2π)^{−n−1} |λ|ⁿ`.
pub fn dmu_weight(n: usize, step: f64, lambda: f64) -> f64 {
    step * (2.0 * PI).powi(-(n as i32) - 1) * lambda.abs().powi(n as i32)
}

/// `f^λ(x,u) = ∫ f(x,u,t) e^{iλt} dt` by the trapezoid rule.
pub fn partial_fourier_t(f: &GridFunction, lambda: f64) -> Result<Slice> {
    if lambda == 0.0 {
        return Err(Error::ZeroLambda);
    }
    match f.t_domain {
        TDomain::Periodic => {
            let cycles = lambda * f.time.extent() / (2.0 * PI);
            if (cycles - cycles.round()).abs() > 1e-9 {
                return Err(Error::TExtent(format!("lambda = {lambda} is not a harmonic of the t period {}", f.time.extent())));
            }
        }
        TDomain::Decaying => {
            let nt = f.time.count;
            let max = f.samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let edge = (0..f.spatial_len())
                .map(|s| f.at(s, 0).norm().max(f.at(s, nt - 1).norm()))
                .fold(0.0, f64::max);
            if edge > 1e-10 * max {
                return Err(Error::TExtent(format!("edge samples reach {:.2e} of the maximum", edge / max.max(f64::MIN_POSITIVE))));
            }
        }
    }
    let nt = f.time.count;
    let phase: Vec<C64> = (0..nt).map(|m| C64::from_polar(f.time.step, lambda * f.time.point(m))).collect();
    let values = (0..f.spatial_len())
        .into_par_iter()
        .map(|s| {
            let row = &f.samples[s * nt..(s + 1) * nt];
            row.iter().zip(&phase).map(|(a, b)| a * b).sum()
        })
        .collect();
    Ok(Slice { n: f.n, grid: f.space, values })
}

/// `(F ∗_λ G)(z) = ∫ F(z−w) G(w) e^{(iλ/2) Im(z·w̄)} dw` by direct quadrature.
///
/// Requires a common grid with a node at the origin so that `z − w` stays on it.
pub fn twisted_conv(f: &Slice, g: &Slice, lambda: f64) -> Result<Slice> {
    if f.n != g.n || f.grid != g.grid || f.values.len() != g.values.len() {
        return Err(Error::GridMismatch("operands must share one grid".into()));
    }
    if !f.grid.has_origin() {
        return Err(Error::GridMismatch("twisted convolution needs an odd point count".into()));
    }
    let n = f.n;
    let dims = 2 * n;
    let c = f.grid.count as i64;
    let centre = (c - 1) / 2;
    let cell = f.grid.step.powi(dims as i32);
    let h = f.grid.step;
    let len = f.values.len();
    let unflat = |mut s: usize| -> Vec<i64> {
        let mut v = vec![0i64; dims];
        for d in (0..dims).rev() {
            v[d] = (s % c as usize) as i64;
            s /= c as usize;
        }
        v
    };
    let values = (0..len)
        .into_par_iter()
        .map(|zi| {
            let zidx = unflat(zi);
            let mut acc = C64::new(0.0, 0.0);
            'w: for wi in 0..len {
                let gw = g.values[wi];
                if gw == C64::new(0.0, 0.0) {
                    continue;
                }
                let widx = unflat(wi);
                let mut flat = 0usize;
                let mut symp = 0.0;
                for d in 0..dims {
                    let diff = zidx[d] - widx[d] + centre;
                    if diff < 0 || diff >= c {
                        continue 'w;
                    }
                    flat = flat * c as usize + diff as usize;
                }
                for j in 0..n {
                    let (zx, zu) = ((zidx[j] - centre) as f64 * h, (zidx[n + j] - centre) as f64 * h);
                    let (wx, wu) = ((widx[j] - centre) as f64 * h, (widx[n + j] - centre) as f64 * h);
                    symp += zu * wx - zx * wu;
                }
                acc += f.values[flat] * gw * C64::from_polar(1.0, 0.5 * lambda * symp);
            }
            acc * cell
        })
        .collect();
    Ok(Slice { n, grid: f.grid, values })
}

/// Whether the `(a, b)` factor of a special Hermite function is resolved by `grid` at `λ`.
pub fn pair_resolvable(grid: &Grid1, lambda: f64, a: usize, b: usize) -> bool {
    let need = (a + b) as f64 + 1.0 + FOOTPRINT_TAIL;
    let l = lambda.abs();
    let nyquist = PI / grid.step;
    need * l <= nyquist * nyquist && 2.0 * (need / l).sqrt() <= 0.5 * grid.extent()
}

pub fn mode_resolvable(grid: &Grid1, lambda: f64, alpha: &[usize], beta: &[usize]) -> bool {
    alpha.iter().zip(beta).all(|(&a, &b)| pair_resolvable(grid, lambda, a, b))
}

/// All multi-indices of length `n` with total degree `≤ max_total`, graded order.
pub fn multi_indices(n: usize, max_total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=max_total {
        let mut cur = vec![0usize; n];
        fill(&mut out, &mut cur, 0, total);
    }
    out
}

fn fill(out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, pos: usize, left: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for v in (0..=left).rev() {
        cur[pos] = v;
        fill(out, cur, pos + 1, left - v);
    }
}

/// Analysis mode set at `λ`: `|β| ≤ K_max`, `|α| ≤ 4 K_max`, every pair resolvable.
pub fn mode_set(n: usize, grid: &Grid1, lambda: f64, kmax: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let betas = multi_indices(n, kmax);
    let alphas = multi_indices(n, 4 * kmax);
    let mut out = Vec::new();
    for beta in &betas {
        for alpha in &alphas {
            if mode_resolvable(grid, lambda, alpha, beta) {
                out.push((alpha.clone(), beta.clone()));
            }
        }
    }
    out
}

/// One coefficient of `f^λ` on the orthonormal basis `Φ^λ_{αβ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub coeff: C64,
}

impl Mode {
    pub fn k(&self) -> usize {
        self.beta.iter().sum()
    }
}

/// Spectral content at one `λ` node.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaBlock {
    pub lambda: f64,
    /// `dμ` quadrature weight.
    pub weight: f64,
    pub modes: Vec<Mode>,
    /// `‖f^λ ∗_λ φ_k^λ‖²` for `k = 0..=K_max`.
    pub norms2: Vec<f64>,
    /// Fraction of the grid norm of `f^λ` carried by `modes`.
    pub captured: f64,
    /// `‖f^λ‖²` by the grid rule.
    pub grid_norm2: f64,
}

impl LambdaBlock {
    /// Block whose slice is exactly the given expansion.
    pub fn new_exact(n: usize, lambda: f64, weight: f64, kmax: usize, modes: Vec<Mode>) -> Self {
        let kept = modes.iter().map(|m| m.coeff.norm_sqr()).sum();
        Self::from_modes(n, lambda, weight, kmax, modes, kept)
    }

    pub fn from_modes(n: usize, lambda: f64, weight: f64, kmax: usize, modes: Vec<Mode>, grid_norm2: f64) -> Self {
        let kept: f64 = modes.iter().map(|m| m.coeff.norm_sqr()).sum();
        let captured = if grid_norm2 == 0.0 { 1.0 } else { kept / grid_norm2 };
        let mut norms2 = vec![0.0; kmax + 1];
        let scale = (2.0 * PI / lambda.abs()).powi(2 * n as i32);
        for m in &modes {
            norms2[m.k()] += m.coeff.norm_sqr() * scale;
        }
        Self { lambda, weight, modes, norms2, captured, grid_norm2 }
    }
}

/// Discrete group Fourier data of a function: per-`λ` expansions and projection norms.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub n: usize,
    pub kmax: usize,
    pub lambda_step: f64,
    /// Spatial grid of the analyzed slices.
    pub grid: Grid1,
    pub blocks: Vec<LambdaBlock>,
}

/// One `(k, λ)` cell with its Plancherel mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub block: usize,
    pub lambda: f64,
    pub k: usize,
    /// `(2k+n)|λ|`.
    pub fan: f64,
    pub energy: f64,
}

impl SpectralData {
    /// Plancherel mass `w_j (|λ|/2π)ⁿ ‖f^λ ∗_λ φ_k^λ‖²` of cell `(k, λ_j)`.
    pub fn energy(&self, j: usize, k: usize) -> f64 {
        let b = &self.blocks[j];
        b.weight * (b.lambda.abs() / (2.0 * PI)).powi(self.n as i32) * b.norms2[k]
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for (j, b) in self.blocks.iter().enumerate() {
            for k in 0..=self.kmax {
                let e = self.energy(j, k);
                if e > 0.0 {
                    out.push(Cell { block: j, lambda: b.lambda, k, fan: (2 * k + self.n) as f64 * b.lambda.abs(), energy: e });
                }
            }
        }
        out
    }

    pub fn total_energy(&self) -> f64 {
        self.cells().iter().map(|c| c.energy).sum()
    }

    pub fn has_negative_lambda_mass(&self) -> bool {
        self.cells().iter().any(|c| c.lambda < 0.0)
    }

    /// Share of `Σ_j ‖f^{λ_j}‖²` not represented by the stored modes.
    pub fn uncaptured_fraction(&self) -> f64 {
        let (mut lost, mut total) = (0.0, 0.0);
        for b in &self.blocks {
            let kept: f64 = b.modes.iter().map(|m| m.coeff.norm_sqr()).sum();
            lost += (b.grid_norm2 - kept).max(0.0);
            total += b.grid_norm2.max(kept);
        }
        if total == 0.0 {
            0.0
        } else {
            lost / total
        }
    }

    /// Largest `|α_j − β_j|` among stored modes.
    pub fn max_angular(&self) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| b.modes.iter())
            .flat_map(|m| m.alpha.iter().zip(&m.beta).map(|(a, b)| a.abs_diff(*b)))
            .max()
            .unwrap_or(0)
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        for b in &mut out.blocks {
            for m in &mut b.modes {
                m.coeff *= c;
            }
            b.norms2.iter_mut().for_each(|v| *v *= c.norm_sqr());
        }
        out
    }

    /// `f^λ_j` at a possibly complex point `(z, w)`.
    pub fn eval_slice(&self, j: usize, z: &[C64], w: &[C64]) -> C64 {
        let b = &self.blocks[j];
        eval_modes(self.n, b.lambda, &b.modes, z, w)
    }

    /// `f^λ_j ∗_λ φ_k^λ` at a point, from the expansion.
    pub fn eval_projection(&self, j: usize, k: usize, z: &[C64], w: &[C64]) -> C64 {
        let b = &self.blocks[j];
        let modes: Vec<Mode> = b.modes.iter().filter(|m| m.k() == k).cloned().collect();
        eval_modes(self.n, b.lambda, &modes, z, w) * (2.0 * PI / b.lambda.abs()).powi(self.n as i32)
    }

    pub fn slice(&self, j: usize) -> Slice {
        let n = self.n;
        Slice::from_fn(n, self.grid, |x, u| self.eval_slice(j, &real_vec(x), &real_vec(u)))
    }

    pub fn projection(&self, j: usize, k: usize) -> Slice {
        let n = self.n;
        Slice::from_fn(n, self.grid, |x, u| self.eval_projection(j, k, &real_vec(x), &real_vec(u)))
    }
}

pub(crate) fn real_vec(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&a| C64::new(a, 0.0)).collect()
}

/// `Σ c Φ^λ_{αβ}(z, w)` over a mode list.
pub fn eval_modes(n: usize, lambda: f64, modes: &[Mode], z: &[C64], w: &[C64]) -> C64 {
    if modes.is_empty() {
        return C64::new(0.0, 0.0);
    }
    let tables = PairTables::new(lambda, modes, z, w);
    let scale = (lambda.abs() / (2.0 * PI)).powf(n as f64 / 2.0);
    modes.iter().map(|m| m.coeff * tables.value(&m.alpha, &m.beta)).sum::<C64>() * scale
}

/// Per-coordinate tables of `E^λ_{ab}` at one point, sized for a mode list.
pub struct PairTables {
    tables: Vec<Vec<C64>>,
    strides: Vec<usize>,
}

impl PairTables {
    pub fn new(lambda: f64, modes: &[Mode], z: &[C64], w: &[C64]) -> Self {
        let n = z.len();
        let mut amax = vec![0usize; n];
        let mut bmax = vec![0usize; n];
        for m in modes {
            for j in 0..n {
                amax[j] = amax[j].max(m.alpha[j]);
                bmax[j] = bmax[j].max(m.beta[j]);
            }
        }
        Self::with_bounds(lambda, &amax, &bmax, z, w)
    }

    pub fn with_bounds(lambda: f64, amax: &[usize], bmax: &[usize], z: &[C64], w: &[C64]) -> Self {
        let n = z.len();
        let tables = (0..n).map(|j| pair_table(lambda, z[j], w[j], amax[j], bmax[j])).collect();
        let strides = bmax.iter().map(|b| b + 1).collect();
        Self { tables, strides }
    }

    /// Unnormalized `E^λ_{αβ}(z, w, 0)`.
    pub fn value(&self, alpha: &[usize], beta: &[usize]) -> C64 {
        let mut v = C64::new(1.0, 0.0);
        for j in 0..alpha.len() {
            v *= self.tables[j][alpha[j] * self.strides[j] + beta[j]];
        }
        v
    }
}

/// Expand every slice of `f` on the resolvable special Hermite basis.
pub fn analyze(f: &GridFunction, lambda_grid: &LambdaGrid, kmax: usize) -> Result<SpectralData> {
    if lambda_grid.n != f.n {
        return Err(Error::Dimension { expected: f.n, got: lambda_grid.n });
    }
    if f.t_domain == TDomain::Periodic {
        let ratio = f.time.extent() / lambda_grid.period();
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(Error::TExtent("t period is not a multiple of 2π/Δλ".into()));
        }
    }
    let n = f.n;
    let blocks: Result<Vec<LambdaBlock>> = lambda_grid
        .nodes
        .par_iter()
        .zip(&lambda_grid.weights)
        .map(|(&lambda, &weight)| {
            let slice = partial_fourier_t(f, lambda)?;
            Ok(project_slice(&slice, lambda, weight, kmax))
        })
        .collect();
    Ok(SpectralData { n, kmax, lambda_step: lambda_grid.step, grid: f.space, blocks: blocks? })
}

/// Coefficients of one slice on the resolvable modes, with the tail monitor.
pub fn project_slice(slice: &Slice, lambda: f64, weight: f64, kmax: usize) -> LambdaBlock {
    let n = slice.n;
    let pairs = mode_set(n, &slice.grid, lambda, kmax);
    let grid_norm = slice.norm2();
    if pairs.is_empty() {
        return LambdaBlock::from_modes(n, lambda, weight, kmax, Vec::new(), grid_norm);
    }
    let mut amax = vec![0usize; n];
    let mut bmax = vec![0usize; n];
    for (a, b) in &pairs {
        for j in 0..n {
            amax[j] = amax[j].max(a[j]);
            bmax[j] = bmax[j].max(b[j]);
        }
    }
    let cell = slice.grid.step.powi(2 * n as i32);
    let scale = (lambda.abs() / (2.0 * PI)).powf(n as f64 / 2.0);
    let mut coeffs = vec![C64::new(0.0, 0.0); pairs.len()];
    for (s, v) in slice.values.iter().enumerate() {
        if *v == C64::new(0.0, 0.0) {
            continue;
        }
        let c = spatial_coords(n, &slice.grid, s);
        let tables = PairTables::with_bounds(lambda, &amax, &bmax, &real_vec(&c[..n]), &real_vec(&c[n..]));
        for (acc, (a, b)) in coeffs.iter_mut().zip(&pairs) {
            *acc += v * tables.value(a, b).conj();
        }
    }
    let modes: Vec<Mode> = pairs
        .into_iter()
        .zip(coeffs)
        .map(|((alpha, beta), c)| Mode { alpha, beta, coeff: c * cell * scale })
        .collect();
    LambdaBlock::from_modes(n, lambda, weight, kmax, modes, grid_norm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub relerr: f64,
}

impl IdentityReport {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let relerr = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
        Self { lhs, rhs, relerr }
    }
}

/// `∫|f|²` against the spectral sum of projection norms.
pub fn plancherel_check(f: &GridFunction, sd: &SpectralData) -> IdentityReport {
    IdentityReport::new(f.norm2(), sd.total_energy())
}

/// Fails unless the stored modes carry the slices up to `1e−6` of their mass.
pub fn require_band_limited(sd: &SpectralData) -> Result<()> {
    let lost = sd.uncaptured_fraction();
    if lost > 1e-6 {
        return Err(Error::NotBandLimited(format!("expansion misses {:.3e} of the slice mass", lost)));
    }
    Ok(())
}

/// Entire extension `F(z, w, ζ) = (1/2π) ∫ f^λ(z, w) e^{−iλζ} dλ`.
pub fn invert(sd: &SpectralData, p: &ComplexPoint) -> Result<C64> {
    if p.dim() != sd.n {
        return Err(Error::Dimension { expected: sd.n, got: p.dim() });
    }
    require_band_limited(sd)?;
    let pref = sd.lambda_step / (2.0 * PI);
    let mut acc = C64::new(0.0, 0.0);
    for (j, b) in sd.blocks.iter().enumerate() {
        if b.modes.is_empty() {
            continue;
        }
        let phase = (C64::new(0.0, -b.lambda) * p.zeta).exp();
        acc += phase * sd.eval_slice(j, &p.z, &p.w);
    }
    Ok(acc * pref)
}

/// Evaluate the inverse transform on a whole `(x, u, t)` grid.
pub fn synthesize(sd: &SpectralData, space: Grid1, time: Grid1, t_domain: TDomain) -> Result<GridFunction> {
    require_band_limited(sd)?;
    let n = sd.n;
    let pref = sd.lambda_step / (2.0 * PI);
    let spatial = space.count.pow(2 * n as u32);
    let active: Vec<usize> = (0..sd.blocks.len()).filter(|&j| !sd.blocks[j].modes.is_empty()).collect();
    let phases: Vec<Vec<C64>> = active
        .iter()
        .map(|&j| (0..time.count).map(|m| C64::from_polar(pref, -sd.blocks[j].lambda * time.point(m))).collect())
        .collect();
    let samples: Vec<C64> = (0..spatial)
        .into_par_iter()
        .flat_map_iter(|s| {
            let c = spatial_coords(n, &space, s);
            let (z, w) = (real_vec(&c[..n]), real_vec(&c[n..]));
            let vals: Vec<C64> = active.iter().map(|&j| sd.eval_slice(j, &z, &w)).collect();
            (0..time.count)
                .map(|m| vals.iter().zip(&phases).map(|(v, ph)| v * ph[m]).sum::<C64>())
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(GridFunction { n, space, time, t_domain, samples })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionReport {
    pub max_error: f64,
    pub max_value: f64,
    pub relerr: f64,
    pub points: usize,
}

/// Round trip `f → analyze → invert` on the interior half of the spatial grid.
pub fn inversion_check(f: &GridFunction, sd: &SpectralData) -> Result<InversionReport> {
    require_band_limited(sd)?;
    let n = f.n;
    let limit = 0.5 * f.space.half_width() + 1e-12;
    let pref = sd.lambda_step / (2.0 * PI);
    let interior: Vec<usize> = (0..f.spatial_len())
        .filter(|&s| spatial_coords(n, &f.space, s).iter().all(|c| c.abs() <= limit))
        .collect();
    let errs: Vec<(f64, f64)> = interior
        .par_iter()
        .map(|&s| {
            let c = spatial_coords(n, &f.space, s);
            let (z, w) = (real_vec(&c[..n]), real_vec(&c[n..]));
            let vals: Vec<(f64, C64)> = sd
                .blocks
                .iter()
                .enumerate()
                .filter(|(_, b)| !b.modes.is_empty())
                .map(|(j, b)| (b.lambda, sd.eval_slice(j, &z, &w)))
                .collect();
            let mut worst = (0.0f64, 0.0f64);
            for m in 0..f.time.count {
                let t = f.time.point(m);
                let rec: C64 = vals.iter().map(|(l, v)| v * C64::from_polar(pref, -l * t)).sum();
                let orig = f.at(s, m);
                worst.0 = worst.0.max((rec - orig).norm());
                worst.1 = worst.1.max(orig.norm());
            }
            worst
        })
        .collect();
    let max_error = errs.iter().map(|e| e.0).fold(0.0, f64::max);
    let max_value = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    let relerr = if max_value == 0.0 { max_error } else { max_error / max_value };
    Ok(InversionReport { max_error, max_value, relerr, points: interior.len() * f.time.count })
}

/// Extra cell added to a synthetic fixture outside its nominal band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedCell {
    pub lambda: f64,
    pub k: usize,
    /// Plancherel mass relative to the band-limited part.
    pub energy: f64,
}

/// Parameters of a seeded band-limited fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub seed: u64,
    pub grid_points: usize,
    pub t_points: usize,
    pub kmax: usize,
    pub lambda_count: usize,
    /// Upper end of the `λ` grid; defaults to one step beyond `A`.
    pub lambda_max: Option<f64>,
    pub positive_only: bool,
    /// Decay rate of the coefficient profile towards the band interior.
    pub kappa: f64,
    pub planted: Vec<PlantedCell>,
}

impl SynthSpec {
    pub fn new(a: f64, b: f64, seed: u64) -> Self {
        Self {
            n: 1,
            a,
            b,
            seed,
            grid_points: 48,
            t_points: 96,
            kmax: 16,
            lambda_count: 33,
            lambda_max: None,
            positive_only: false,
            kappa: 3.0,
            planted: Vec::new(),
        }
    }

    pub fn lambda_grid(&self) -> Result<LambdaGrid> {
        let half = (self.lambda_count.max(3) - 1) / 2;
        let lmax = match self.lambda_max {
            Some(l) => l,
            None if half >= 2 => self.a * half as f64 / (half - 1) as f64,
            None => self.a,
        };
        if self.a > lmax * (1.0 + 1e-12) {
            return Err(Error::Config(format!("A = {} exceeds the lambda grid extent {}", self.a, lmax)));
        }
        LambdaGrid::uniform(self.n, self.lambda_count, lmax)
    }

    /// Spatial grid sized so the band corner and planted cells are resolvable.
    pub fn space_grid(&self) -> Grid1 {
        let slack = 2.0 + FOOTPRINT_TAIL - self.n as f64;
        let mut need = self.b + slack * self.a;
        for p in &self.planted {
            need = need.max((2 * p.k + self.n) as f64 * p.lambda.abs() + slack * p.lambda.abs());
        }
        Grid1::new(self.grid_points, PI / (need * (1.0 + 1e-9)).sqrt())
    }
}

fn cell_modes(n: usize, k: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut beta = vec![0usize; n];
    beta[0] = k;
    let mut out = Vec::new();
    for a0 in k.saturating_sub(1)..=k + 1 {
        let mut alpha = beta.clone();
        alpha[0] = a0;
        out.push((alpha, beta.clone()));
    }
    out
}

fn random_cell(rng: &mut ChaCha8Rng, n: usize, k: usize, step: f64, energy: f64) -> Vec<Mode> {
    let pairs = cell_modes(n, k);
    let raw: Vec<C64> = pairs
        .iter()
        .map(|_| C64::from_polar(rng.gen_range(0.5..1.0), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let norm: f64 = raw.iter().map(|c| c.norm_sqr()).sum();
    // energy = Δλ/2π Σ|c|²
    let target = energy * 2.0 * PI / step;
    pairs
        .into_iter()
        .zip(raw)
        .map(|((alpha, beta), c)| Mode { alpha, beta, coeff: c * (target / norm).sqrt() })
        .collect()
}

/// Seeded function whose spectrum fills the band `|λ| ≤ A`, `(2k+n)|λ| ≤ B`.
pub fn synth_bandlimited(spec: &SynthSpec) -> Result<(GridFunction, SpectralData)> {
    if !(spec.a > 0.0 && spec.b > 0.0) {
        return Err(Error::Config("band limits must be positive".into()));
    }
    let n = spec.n;
    let lg = spec.lambda_grid()?;
    let space = spec.space_grid();
    let period = lg.period();
    let time = Grid1::new(spec.t_points, period / spec.t_points as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let tol = 1.0 + 1e-12;
    let mut chosen: Vec<(usize, usize, f64)> = Vec::new();
    for (j, &lambda) in lg.nodes.iter().enumerate() {
        let l = lambda.abs();
        if l > spec.a * tol || (spec.positive_only && lambda < 0.0) {
            continue;
        }
        for k in 0..=spec.kmax {
            let fan = (2 * k + n) as f64 * l;
            if fan > spec.b * tol {
                break;
            }
            if !cell_modes(n, k).iter().all(|(a, b)| mode_resolvable(&space, lambda, a, b)) {
                continue;
            }
            let profile = (-spec.kappa * (spec.a - l) / spec.a).exp()
                * (-spec.kappa * (spec.b.sqrt() - fan.sqrt()) / spec.b.sqrt()).exp();
            let jitter = 1.0 + 0.25 * rng.gen_range(-1.0..1.0);
            chosen.push((j, k, profile * jitter));
        }
    }
    if chosen.is_empty() {
        return Err(Error::EmptyBand);
    }
    let total: f64 = chosen.iter().map(|c| c.2).sum();
    let mut modes: Vec<Vec<Mode>> = vec![Vec::new(); lg.nodes.len()];
    for (j, k, e) in chosen {
        modes[j].extend(random_cell(&mut rng, n, k, lg.step, e / total));
    }
    for p in &spec.planted {
        let j = lg
            .nodes
            .iter()
            .position(|l| (l - p.lambda).abs() < 1e-9 * lg.step)
            .ok_or_else(|| Error::Config(format!("planted lambda {} is not a grid node", p.lambda)))?;
        if p.k > spec.kmax || !cell_modes(n, p.k).iter().all(|(a, b)| mode_resolvable(&space, p.lambda, a, b)) {
            return Err(Error::Config(format!("planted cell (k={}, lambda={}) is not resolvable", p.k, p.lambda)));
        }
        let cell = random_cell(&mut rng, n, p.k, lg.step, p.energy);
        modes[j].extend(cell);
    }
    let blocks = lg
        .nodes
        .iter()
        .zip(&lg.weights)
        .zip(modes)
        .map(|((&l, &w), m)| LambdaBlock::new_exact(n, l, w, spec.kmax, m))
        .collect();
    let sd = SpectralData { n, kmax: spec.kmax, lambda_step: lg.step, grid: space, blocks };
    let f = synthesize(&sd, space, time, TDomain::Periodic)?;
    Ok((f, sd))
}

/// `C(k+n−1, k)⁻¹`, the weight pairing projection norms with `φ_k^λ`.
pub fn inverse_binom(k: usize, n: usize) -> f64 {
    1.0 / laguerre_binom(k, n)
}
