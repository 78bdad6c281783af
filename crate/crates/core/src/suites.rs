//! Named verification suites. Each returns one [`CheckRow`] per check in a fixed order.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::complexification::{gutzmer_spectral, orbital_direct, OrbitalQuadrature};
use crate::constants::heat_image;
use crate::error::{Error, Result};
use crate::euclid::{flat_gutzmer, flat_pw_check, FlatFixture, FlatQuadrature, FlatSpec};
use crate::heatlab::{gauss_bessel_check, heat_apply, heat_image_norm, lemma63_check, thm35_converse_tail, thm35_forward, TailVerdict};
use crate::heisenberg::ComplexPoint;
use crate::spectral::{analyze, inversion_check, plancherel_check, synth_bandlimited, GridFunction, LambdaGrid, PlantedCell, SpectralData, SynthSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Plancherel,
    Inversion,
    Gutzmer,
    HeatImage,
    GaussBessel,
    Lemma63,
    Thm35,
    Euclid,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Plancherel,
        Suite::Inversion,
        Suite::Gutzmer,
        Suite::HeatImage,
        Suite::GaussBessel,
        Suite::Lemma63,
        Suite::Thm35,
        Suite::Euclid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Plancherel => "plancherel",
            Suite::Inversion => "inversion",
            Suite::Gutzmer => "gutzmer",
            Suite::HeatImage => "heat-image",
            Suite::GaussBessel => "gauss-bessel",
            Suite::Lemma63 => "lemma63",
            Suite::Thm35 => "thm35",
            Suite::Euclid => "euclid",
        }
    }

    /// Tolerance applied when the caller does not override it.
    pub fn default_tol(self) -> f64 {
        match self {
            Suite::Plancherel | Suite::Inversion | Suite::Euclid => 1e-4,
            Suite::Gutzmer | Suite::HeatImage => 1e-3,
            Suite::GaussBessel => 1e-6,
            Suite::Lemma63 => 1e-5,
            Suite::Thm35 => 1e-12,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

/// One check: `lhs` against `rhs` with relative error `relerr`, passing at `relerr ≤ tol`
/// unless the check is a verdict, in which case `pass` carries it.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relerr: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn identity(name: &str, params: String, lhs: f64, rhs: f64, tol: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let relerr = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
        Self { name: name.into(), params, lhs, rhs, relerr, tol, pass: relerr <= tol }
    }

    /// `lhs ≤ rhs·(1 + tol)`; `relerr` is the relative excess.
    pub fn bound(name: &str, params: String, lhs: f64, rhs: f64, tol: f64) -> Self {
        let relerr = ((lhs - rhs) / rhs.abs().max(f64::MIN_POSITIVE)).max(0.0);
        Self { name: name.into(), params, lhs, rhs, relerr, tol, pass: relerr <= tol }
    }

    pub fn verdict(name: &str, params: String, lhs: f64, rhs: f64, ok: bool) -> Self {
        Self { name: name.into(), params, lhs, rhs, relerr: if ok { 0.0 } else { 1.0 }, tol: 0.0, pass: ok }
    }

    pub const CSV_HEADER: &'static str = "name,params,lhs,rhs,relerr,tol,pass";

    pub fn csv(&self) -> String {
        format!("{},\"{}\",{:e},{:e},{:e},{:e},{}", self.name, self.params, self.lhs, self.rhs, self.relerr, self.tol, self.pass)
    }
}

/// Fixture selection and overrides shared by all suites.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub seed: u64,
    pub tol: Option<f64>,
    pub grid_points: Option<usize>,
    pub kmax: Option<usize>,
    pub lambda_count: Option<usize>,
    /// Seeded fixtures generated when no input is given.
    pub fixtures: usize,
    /// Loaded fixture replacing the seeded ones.
    pub input: Option<(GridFunction, SpectralData)>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { n: 1, a: 1.0, b: 9.0, seed: 42, tol: None, grid_points: None, kmax: None, lambda_count: None, fixtures: 5, input: None }
    }
}

impl SuiteConfig {
    pub fn synth_spec(&self, seed: u64) -> SynthSpec {
        let mut s = SynthSpec::new(self.a, self.b, seed);
        s.n = self.n;
        if let Some(g) = self.grid_points {
            s.grid_points = g;
        }
        if let Some(k) = self.kmax {
            s.kmax = k;
        }
        if let Some(l) = self.lambda_count {
            s.lambda_count = l;
        }
        s
    }

    /// The loaded fixture or `count` seeded ones, with the `λ` grid each was built on.
    fn fixtures(&self, count: usize) -> Result<Vec<(String, GridFunction, SpectralData, LambdaGrid)>> {
        if let Some((f, sd)) = &self.input {
            let lg = LambdaGrid::from_nodes(sd.n, sd.lambda_step, sd.blocks.iter().map(|b| b.lambda).collect());
            return Ok(vec![("input".into(), f.clone(), sd.clone(), lg)]);
        }
        (0..count as u64)
            .map(|i| {
                let spec = self.synth_spec(self.seed + i);
                let lg = spec.lambda_grid()?;
                let (f, sd) = synth_bandlimited(&spec)?;
                Ok((format!("A={} B={} seed={}", self.a, self.b, spec.seed), f, sd, lg))
            })
            .collect()
    }

    fn kmax_for(&self, sd: &SpectralData) -> usize {
        self.kmax.unwrap_or(sd.kmax)
    }
}

/// Purely imaginary test points `(y, v, η)` with `|(y, v)| ≤ 1.5`, `|η| ≤ 1`.
pub const GUTZMER_POINTS: [(f64, f64, f64); 6] =
    [(0.5, 0.0, 0.0), (0.0, 1.0, 0.0), (0.9, 0.6, 0.25), (1.5, 0.0, 0.5), (0.6, -0.8, -0.75), (1.2, 0.9, 1.0)];

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<CheckRow>> {
    let tol = cfg.tol.unwrap_or(suite.default_tol());
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    match suite {
        Suite::Plancherel => plancherel_rows(cfg, tol),
        Suite::Inversion => inversion_rows(cfg, tol),
        Suite::Gutzmer => gutzmer_rows(cfg, tol),
        Suite::HeatImage => heat_image_rows(cfg, tol),
        Suite::GaussBessel => gauss_bessel_rows(tol),
        Suite::Lemma63 => lemma63_rows(tol),
        Suite::Thm35 => thm35_rows(cfg, tol),
        Suite::Euclid => euclid_rows(cfg, tol),
    }
}

fn plancherel_rows(cfg: &SuiteConfig, tol: f64) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for (label, f, sd, lg) in cfg.fixtures(cfg.fixtures)? {
        let analyzed = analyze(&f, &lg, cfg.kmax_for(&sd))?;
        let rep = plancherel_check(&f, &analyzed);
        rows.push(CheckRow::identity("plancherel", label, rep.lhs, rep.rhs, tol));
    }
    Ok(rows)
}

fn inversion_rows(cfg: &SuiteConfig, tol: f64) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for (label, f, sd, lg) in cfg.fixtures(cfg.fixtures)? {
        let analyzed = analyze(&f, &lg, cfg.kmax_for(&sd))?;
        let rep = inversion_check(&f, &analyzed)?;
        let mut row = CheckRow::identity("inversion", format!("{label} points={}", rep.points), rep.max_error, 0.0, tol);
        row.rhs = rep.max_value;
        row.relerr = rep.relerr;
        row.pass = rep.relerr <= tol;
        rows.push(row);
    }
    Ok(rows)
}

fn gutzmer_rows(cfg: &SuiteConfig, tol: f64) -> Result<Vec<CheckRow>> {
    let (label, _, sd, _) = cfg.fixtures(1)?.remove(0);
    if sd.n != 1 {
        return Err(Error::Unsupported { what: "direct orbital integrals", n: sd.n });
    }
    let q = OrbitalQuadrature::default();
    GUTZMER_POINTS
        .par_iter()
        .map(|&(y, v, eta)| {
            let p = ComplexPoint::purely_imaginary(&[y], &[v], eta);
            let direct = orbital_direct(&sd, &p, &q)?;
            let spectral = gutzmer_spectral(&sd, &p)?;
            Ok(CheckRow::identity("gutzmer", format!("{label} y={y} v={v} eta={eta}"), direct, spectral, tol))
        })
        .collect()
}

fn heat_image_rows(cfg: &SuiteConfig, tol: f64) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for (label, f, sd, lg) in cfg.fixtures(cfg.fixtures.min(3))? {
        let analyzed = analyze(&f, &lg, cfg.kmax_for(&sd))?;
        let norm = f.norm2();
        for &t in &[0.1, 0.2, 0.4] {
            let value = heat_image_norm(&heat_apply(&analyzed, t)?, t)?;
            rows.push(CheckRow::identity("heat-image", format!("{label} t={t}"), value, heat_image(f.n) * norm, tol));
        }
    }
    Ok(rows)
}

/// `k ∈ {0,1,4}`, `λ ∈ {0.25,1}`, `t ∈ {0.1,0.5}`.
fn box_tuples() -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    for k in [0usize, 1, 4] {
        for lambda in [0.25, 1.0] {
            for t in [0.1, 0.5] {
                out.push((k, lambda, t));
            }
        }
    }
    out
}

fn gauss_bessel_rows(tol: f64) -> Result<Vec<CheckRow>> {
    let mut tuples = Vec::new();
    for n in [1usize, 2] {
        for (k, l, t) in box_tuples() {
            tuples.push((k, l, t, n));
        }
    }
    tuples
        .par_iter()
        .map(|&(k, l, t, n)| {
            let r = gauss_bessel_check(k, l, t, n)?;
            Ok(CheckRow::identity("gauss-bessel", format!("k={k} lambda={l} t={t} n={n}"), r.lhs, r.rhs, tol))
        })
        .collect()
}

fn lemma63_rows(tol: f64) -> Result<Vec<CheckRow>> {
    box_tuples()
        .iter()
        .map(|&(k, l, t)| {
            let r = lemma63_check(k, l, t, 1)?;
            Ok(CheckRow::identity("lemma63", format!("k={k} lambda={l} t={t} n=1"), r.lhs, r.rhs, tol))
        })
        .collect()
}

pub const THM35_TIMES: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
pub const THM35_RADII: [f64; 4] = [0.0, 0.5, 1.0, 1.5];

/// Positive-`λ` fixture, optionally with one cell planted beyond the band.
pub fn thm35_fixture(cfg: &SuiteConfig, seed: u64, planted: Option<PlantedCell>) -> Result<SpectralData> {
    let mut spec = cfg.synth_spec(seed);
    spec.positive_only = true;
    spec.t_points = spec.t_points.min(8);
    spec.planted.extend(planted);
    Ok(synth_bandlimited(&spec)?.1)
}

/// Grid node `λ` and degree `k` with `(2k+n)λ` closest above `B + 1`.
pub fn thm35_planted(cfg: &SuiteConfig) -> Result<PlantedCell> {
    let spec = cfg.synth_spec(cfg.seed);
    let lg = spec.lambda_grid()?;
    let target = cfg.b + 1.0;
    let mut best: Option<(f64, PlantedCell)> = None;
    for &l in lg.nodes.iter().filter(|&&l| l > 0.0) {
        let k = ((target / l - cfg.n as f64) / 2.0).ceil().max(0.0) as usize;
        let fan = (2 * k + cfg.n) as f64 * l;
        let cell = PlantedCell { lambda: l, k, energy: 1e-4 };
        let mut with = spec.clone();
        with.planted.push(cell);
        let mut alpha = vec![0; cfg.n];
        let mut beta = vec![0; cfg.n];
        alpha[0] = k + 1;
        beta[0] = k;
        if k > spec.kmax || !crate::spectral::mode_resolvable(&with.space_grid(), l, &alpha, &beta) {
            continue;
        }
        if best.as_ref().is_none_or(|(f, _)| fan < *f) {
            best = Some((fan, cell));
        }
    }
    best.map(|b| b.1).ok_or_else(|| Error::Config("no resolvable cell beyond the band".into()))
}

fn thm35_rows(cfg: &SuiteConfig, tol: f64) -> Result<Vec<CheckRow>> {
    let (alpha, beta) = (cfg.a, cfg.b);
    let mut rows = Vec::new();
    for i in 0..cfg.fixtures.min(3) as u64 {
        let sd = thm35_fixture(cfg, cfg.seed + i, None)?;
        let rep = thm35_forward(&sd, alpha, beta, &THM35_TIMES, &THM35_RADII)?;
        let params = format!("alpha={alpha} beta={beta} seed={}", cfg.seed + i);
        let mut row = CheckRow::bound("thm35-slope", params, rep.slope, 2.0 * rep.b, tol);
        row.pass &= rep.bounded;
        rows.push(row);
    }
    let clean = thm35_fixture(cfg, cfg.seed, None)?;
    let planted = thm35_planted(cfg)?;
    let dirty = thm35_fixture(cfg, cfg.seed, Some(planted))?;
    let cutoff = beta + 0.5;
    for (label, sd, want) in [("band-limited", &clean, TailVerdict::Supported), ("planted", &dirty, TailVerdict::Violated)] {
        let rep = thm35_converse_tail(sd, beta, cutoff, &THM35_TIMES)?;
        let found = want == TailVerdict::Supported
            || rep.offending.iter().any(|c| c.k == planted.k && (c.lambda - planted.lambda).abs() < 1e-12);
        let mut params = format!("{label} B={beta} C={cutoff}");
        if want == TailVerdict::Violated {
            params.push_str(&format!(" cell=(k={}, lambda={:.6})", planted.k, planted.lambda));
        }
        rows.push(CheckRow::verdict("thm35-tail", params, rep.tail, 0.0, rep.verdict == want && found));
    }
    Ok(rows)
}

/// Flat fixture radii and the `|y|` values of the Gutzmer rows.
pub const EUCLID_RADII: [f64; 3] = [0.5, 1.0, 1.5];
pub const EUCLID_Y: [f64; 3] = [0.5, 1.0, 2.0];

fn euclid_rows(cfg: &SuiteConfig, tol: f64) -> Result<Vec<CheckRow>> {
    let q = FlatQuadrature::default();
    let mut rows = Vec::new();
    let f = FlatFixture::new(FlatSpec::bump(1.0, cfg.seed))?.sample()?;
    for &y in &EUCLID_Y {
        let dir = [0.6 * y, 0.8 * y];
        let rep = flat_gutzmer(&f, dir, &q)?;
        rows.push(CheckRow::identity("euclid-gutzmer", format!("a=1 |y|={y}"), rep.lhs, rep.rhs, tol));
    }
    for &a in &EUCLID_RADII {
        let f = FlatFixture::new(FlatSpec::bump(a, cfg.seed))?.sample()?;
        let rep = flat_pw_check(&f, 10.0 / a, 40, 4)?;
        let slope = rep.fit.as_ref().map_or(0.0, |g| g.slope);
        let mut row = CheckRow::identity("euclid-pw", format!("a={a} y_max={}", rep.y_max), slope, 2.0 * a, 0.05);
        row.pass &= rep.conclusive;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig { a: 0.5, b: 2.0, seed: 3, grid_points: Some(24), kmax: Some(6), lambda_count: Some(9), fixtures: 2, ..Default::default() }
    }

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("plancherell".parse::<Suite>().is_err());
    }

    #[test]
    fn rows_and_csv() {
        let r = CheckRow::identity("x", "a=1".into(), 1.0, 1.0 + 1e-6, 1e-5);
        assert!(r.pass && r.relerr < 1.1e-6);
        assert!(r.csv().starts_with("x,\"a=1\",1e0,"));
        assert!(!CheckRow::bound("b", String::new(), 2.1, 2.0, 0.01).pass);
        assert!(CheckRow::bound("b", String::new(), 1.9, 2.0, 0.0).pass);
    }

    #[test]
    fn small_fixture_suites_pass() {
        let cfg = small();
        for s in [Suite::Plancherel, Suite::Inversion, Suite::HeatImage] {
            let rows = run_suite(s, &cfg).unwrap();
            assert!(!rows.is_empty());
            assert!(rows.iter().all(|r| r.pass), "{s}: {rows:?}");
        }
        assert!(run_suite(Suite::Plancherel, &SuiteConfig { tol: Some(0.0), ..cfg }).is_err());
    }

    #[test]
    fn thm35_rows_on_small_band() {
        let cfg = SuiteConfig { a: 1.0, b: 4.0, ..small() };
        let rows = run_suite(Suite::Thm35, &cfg).unwrap();
        assert!(rows.iter().all(|r| r.pass), "{rows:?}");
        let p = thm35_planted(&cfg).unwrap();
        assert!((2 * p.k + 1) as f64 * p.lambda >= cfg.b + 1.0 - 1e-12);
    }
}
