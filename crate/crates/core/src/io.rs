//! Binary containers: `GFN1` for grid samples and `SPD1` for spectral data.
//!
//! Both are little-endian. `GFN1` layout:
//!
//! | field | type |
//! |---|---|
//! | magic | `b"GFN1"` |
//! | n | u64 |
//! | spatial points per axis | u64 |
//! | t points | u64 |
//! | spatial extent `N·h` | f64 |
//! | t extent | f64 |
//! | t domain (0 periodic, 1 decaying) | u8 |
//! | samples | `(re, im)` f64 pairs, axes `x_1..x_n, u_1..u_n, t`, `t` fastest |
//!
//! `SPD1` layout: magic, n u64, K_max u64, Δλ f64, spatial points u64, spatial step f64,
//! block count u64, then per block `λ, weight, captured, grid_norm2` (f64), `K_max+1`
//! norms (f64), mode count u64 and per mode `α` and `β` (u32 each) and the coefficient pair.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quadrature::Grid1;
use crate::spectral::{GridFunction, LambdaBlock, Mode, SpectralData, TDomain};

const GFN_MAGIC: &[u8; 4] = b"GFN1";
const SPD_MAGIC: &[u8; 4] = b"SPD1";

struct Out<W: Write>(W);

impl<W: Write> Out<W> {
    fn u64(&mut self, v: usize) -> Result<()> {
        Ok(self.0.write_all(&(v as u64).to_le_bytes())?)
    }
    fn u32(&mut self, v: usize) -> Result<()> {
        let v = u32::try_from(v).map_err(|_| Error::Format(format!("index {v} does not fit in u32")))?;
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn f64(&mut self, v: f64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn c64(&mut self, v: C64) -> Result<()> {
        self.f64(v.re)?;
        self.f64(v.im)
    }
}

struct In<R: Read>(R);

impl<R: Read> In<R> {
    fn bytes<const K: usize>(&mut self) -> Result<[u8; K]> {
        let mut b = [0u8; K];
        self.0.read_exact(&mut b).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::Format("truncated container".into()),
            _ => Error::Io(e),
        })?;
        Ok(b)
    }
    fn u64(&mut self) -> Result<usize> {
        usize::try_from(u64::from_le_bytes(self.bytes()?)).map_err(|_| Error::Format("size overflow".into()))
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.bytes()?) as usize)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn c64(&mut self) -> Result<C64> {
        Ok(C64::new(self.f64()?, self.f64()?))
    }
    fn magic(&mut self, want: &[u8; 4]) -> Result<()> {
        let got: [u8; 4] = self.bytes()?;
        if &got != want {
            return Err(Error::Format(format!("expected magic {:?}", String::from_utf8_lossy(want))));
        }
        Ok(())
    }
    fn eof(&mut self) -> Result<()> {
        let mut extra = [0u8; 1];
        match self.0.read(&mut extra)? {
            0 => Ok(()),
            _ => Err(Error::Format("trailing bytes after container".into())),
        }
    }
}

fn sane_len(len: usize, what: &str) -> Result<usize> {
    if len > 1 << 34 {
        return Err(Error::Format(format!("implausible {what} length {len}")));
    }
    Ok(len)
}

pub fn write_grid_function(f: &GridFunction, w: impl Write) -> Result<()> {
    let mut o = Out(w);
    o.0.write_all(GFN_MAGIC)?;
    o.u64(f.n)?;
    o.u64(f.space.count)?;
    o.u64(f.time.count)?;
    o.f64(f.space.extent())?;
    o.f64(f.time.extent())?;
    o.0.write_all(&[match f.t_domain {
        TDomain::Periodic => 0u8,
        TDomain::Decaying => 1u8,
    }])?;
    for v in &f.samples {
        o.c64(*v)?;
    }
    Ok(o.0.flush()?)
}

pub fn read_grid_function(r: impl Read) -> Result<GridFunction> {
    let mut i = In(r);
    i.magic(GFN_MAGIC)?;
    let n = i.u64()?;
    let ns = i.u64()?;
    let nt = i.u64()?;
    let ls = i.f64()?;
    let lt = i.f64()?;
    if n == 0 || ns == 0 || nt == 0 || !(ls > 0.0) || !(lt > 0.0) {
        return Err(Error::Format("degenerate grid header".into()));
    }
    let t_domain = match i.bytes::<1>()?[0] {
        0 => TDomain::Periodic,
        1 => TDomain::Decaying,
        other => return Err(Error::Format(format!("unknown t domain tag {other}"))),
    };
    let len = sane_len(ns.checked_pow(2 * n as u32).and_then(|s| s.checked_mul(nt)).unwrap_or(usize::MAX), "sample")?;
    let samples = (0..len).map(|_| i.c64()).collect::<Result<Vec<_>>>()?;
    i.eof()?;
    Ok(GridFunction {
        n,
        space: Grid1::new(ns, ls / ns as f64),
        time: Grid1::new(nt, lt / nt as f64),
        t_domain,
        samples,
    })
}

pub fn write_spectral_data(sd: &SpectralData, w: impl Write) -> Result<()> {
    let mut o = Out(w);
    o.0.write_all(SPD_MAGIC)?;
    o.u64(sd.n)?;
    o.u64(sd.kmax)?;
    o.f64(sd.lambda_step)?;
    o.u64(sd.grid.count)?;
    o.f64(sd.grid.step)?;
    o.u64(sd.blocks.len())?;
    for b in &sd.blocks {
        o.f64(b.lambda)?;
        o.f64(b.weight)?;
        o.f64(b.captured)?;
        o.f64(b.grid_norm2)?;
        for v in &b.norms2 {
            o.f64(*v)?;
        }
        o.u64(b.modes.len())?;
        for m in &b.modes {
            for a in &m.alpha {
                o.u32(*a)?;
            }
            for a in &m.beta {
                o.u32(*a)?;
            }
            o.c64(m.coeff)?;
        }
    }
    Ok(o.0.flush()?)
}

pub fn read_spectral_data(r: impl Read) -> Result<SpectralData> {
    let mut i = In(r);
    i.magic(SPD_MAGIC)?;
    let n = i.u64()?;
    let kmax = sane_len(i.u64()?, "K_max")?;
    let lambda_step = i.f64()?;
    let count = i.u64()?;
    let step = i.f64()?;
    if n == 0 || count == 0 || !(step > 0.0) || !(lambda_step > 0.0) {
        return Err(Error::Format("degenerate spectral header".into()));
    }
    let nblocks = sane_len(i.u64()?, "block")?;
    let mut blocks = Vec::with_capacity(nblocks.min(4096));
    for _ in 0..nblocks {
        let lambda = i.f64()?;
        let weight = i.f64()?;
        let captured = i.f64()?;
        let grid_norm2 = i.f64()?;
        let norms2 = (0..=kmax).map(|_| i.f64()).collect::<Result<Vec<_>>>()?;
        let nm = sane_len(i.u64()?, "mode")?;
        let mut modes = Vec::with_capacity(nm.min(1 << 20));
        for _ in 0..nm {
            let alpha = (0..n).map(|_| i.u32()).collect::<Result<Vec<_>>>()?;
            let beta = (0..n).map(|_| i.u32()).collect::<Result<Vec<_>>>()?;
            modes.push(Mode { alpha, beta, coeff: i.c64()? });
        }
        blocks.push(LambdaBlock { lambda, weight, modes, norms2, captured, grid_norm2 });
    }
    i.eof()?;
    Ok(SpectralData { n, kmax, lambda_step, grid: Grid1::new(count, step), blocks })
}

pub fn save_grid_function(f: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    write_grid_function(f, BufWriter::new(File::create(path)?))
}

pub fn load_grid_function(path: impl AsRef<Path>) -> Result<GridFunction> {
    read_grid_function(BufReader::new(File::open(path)?))
}

pub fn save_spectral_data(sd: &SpectralData, path: impl AsRef<Path>) -> Result<()> {
    write_spectral_data(sd, BufWriter::new(File::create(path)?))
}

pub fn load_spectral_data(path: impl AsRef<Path>) -> Result<SpectralData> {
    read_spectral_data(BufReader::new(File::open(path)?))
}

/// Sibling path holding the spectral data of a grid file (`x.gfn` → `x.spd`).
pub fn sibling_spd(path: impl AsRef<Path>) -> std::path::PathBuf {
    path.as_ref().with_extension("spd")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{synth_bandlimited, SynthSpec};

    fn fixture() -> (GridFunction, SpectralData) {
        let mut spec = SynthSpec::new(0.5, 2.0, 4);
        spec.grid_points = 24;
        spec.t_points = 8;
        spec.kmax = 4;
        spec.lambda_count = 9;
        synth_bandlimited(&spec).unwrap()
    }

    #[test]
    fn round_trips() {
        let (f, sd) = fixture();
        let mut buf = Vec::new();
        write_grid_function(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 5 * 8 + 1 + f.samples.len() * 16);
        let g = read_grid_function(buf.as_slice()).unwrap();
        assert_eq!(g.samples, f.samples);
        assert_eq!(g.space.count, f.space.count);
        assert!((g.space.step - f.space.step).abs() < 1e-15 && (g.time.step - f.time.step).abs() < 1e-15);
        let mut buf = Vec::new();
        write_spectral_data(&sd, &mut buf).unwrap();
        assert_eq!(read_spectral_data(buf.as_slice()).unwrap(), sd);
    }

    #[test]
    fn rejects_bad_input() {
        let (f, sd) = fixture();
        let mut buf = Vec::new();
        write_grid_function(&f, &mut buf).unwrap();
        assert!(matches!(read_grid_function(&buf[..buf.len() - 3]), Err(Error::Format(_))));
        let mut extra = buf.clone();
        extra.push(0);
        assert!(matches!(read_grid_function(extra.as_slice()), Err(Error::Format(_))));
        let mut spd = Vec::new();
        write_spectral_data(&sd, &mut spd).unwrap();
        assert!(matches!(read_grid_function(spd.as_slice()), Err(Error::Format(_))));
        assert!(matches!(read_spectral_data(buf.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn files_and_sibling_path() {
        let (f, sd) = fixture();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fx.gfn");
        save_grid_function(&f, &path).unwrap();
        save_spectral_data(&sd, sibling_spd(&path)).unwrap();
        assert_eq!(load_grid_function(&path).unwrap().samples, f.samples);
        assert_eq!(load_spectral_data(dir.path().join("fx.spd")).unwrap(), sd);
        assert!(matches!(load_grid_function(dir.path().join("missing.gfn")), Err(Error::Io(_))));
    }
}
