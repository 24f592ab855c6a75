//! Binary checkpoints of the spectral state.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "TCMS"                      magic
//! u32                         format version (1)
//! u32                         n
//! f64 box_length, f64 time
//! f64 nu, eta, mu, sigma1, sigma2, alpha, beta
//! u8 advection, u8 coupling
//! 7 n^3 x (f64 re, f64 im)    u1, u2, u3, v1, v2, v3, theta; within a field
//!                             modes in lexicographic order of the axis
//!                             indices (i1, i2, i3), i3 fastest
//! optional "TCMR" trailer     accumulators needed to resume a run
//! ```

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::diagnostics::{BlowupMonitor, BmoMode, EnergyLedger, MonitorSample};
use crate::error::{Error, Result};
use crate::model::{EnergyRates, ModelParams, RunProgress, SimState, Terms};
use crate::spectral::{Grid, ScalarField, VectorField};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"TCMS";
pub const CHECKPOINT_VERSION: u32 = 1;
const PROGRESS_MAGIC: [u8; 4] = *b"TCMR";
const HEADER_LEN: usize = 4 + 4 + 4 + 8 * 9 + 2;

/// Decoded checkpoint contents.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub state: SimState,
    pub params: ModelParams,
    pub progress: Option<RunProgress>,
}

struct Out(Vec<u8>);

impl Out {
    fn f64(&mut self, x: f64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }

    fn u8(&mut self, x: u8) {
        self.0.push(x);
    }

    fn opt<T>(&mut self, x: Option<T>, f: impl FnOnce(&mut Self, T)) {
        match x {
            None => self.u8(0),
            Some(v) => {
                self.u8(1);
                f(self, v);
            }
        }
    }
}

struct In<'a> {
    bytes: &'a [u8],
    pos: usize,
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

impl In<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| corrupt(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(s.try_into().expect("slice has length N"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }

    fn flag(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(corrupt(format!(
                "invalid flag byte {b} at {}",
                self.pos - 1
            ))),
        }
    }

    fn opt<T>(&mut self, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<Option<T>> {
        if self.flag()? {
            f(self).map(Some)
        } else {
            Ok(None)
        }
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

fn fields(state: &SimState) -> [&ScalarField; 7] {
    let [u1, u2, u3] = state.u.comps();
    let [v1, v2, v3] = state.v.comps();
    [u1, u2, u3, v1, v2, v3, &state.theta]
}

fn encode_progress(o: &mut Out, p: &RunProgress) {
    o.0.extend_from_slice(&PROGRESS_MAGIC);
    let m = &p.monitor;
    o.f64(m.c_pi);
    o.u8(match m.bmo_mode {
        BmoMode::Proxy => 0,
        BmoMode::Dyadic => 1,
    });
    o.opt(m.start_time, Out::f64);
    o.opt(m.last, |o, s| {
        o.f64(s.time);
        o.f64(s.pi_integrand);
        o.f64(s.tilde_integrand);
    });
    o.f64(m.pi_integral);
    o.f64(m.tilde_integral);
    o.opt(p.ledger.as_ref(), |o, l| {
        o.f64(l.start_time);
        o.f64(l.start_energy);
        o.f64(l.dissipated);
        o.opt(l.last, |o, (t, r)| {
            o.f64(t);
            o.f64(r.energy);
            o.f64(r.dissipation);
            o.f64(r.dissipation_rate);
        });
    });
}

fn decode_progress(r: &mut In) -> Result<RunProgress> {
    if r.take::<4>()? != PROGRESS_MAGIC {
        return Err(corrupt("unexpected bytes after the payload"));
    }
    let c_pi = r.f64()?;
    let bmo_mode = match r.u8()? {
        0 => BmoMode::Proxy,
        1 => BmoMode::Dyadic,
        b => return Err(corrupt(format!("unknown BMO mode tag {b}"))),
    };
    let start_time = r.opt(In::f64)?;
    let last = r.opt(|r| {
        Ok(MonitorSample {
            time: r.f64()?,
            pi_integrand: r.f64()?,
            tilde_integrand: r.f64()?,
        })
    })?;
    let monitor = BlowupMonitor {
        c_pi,
        bmo_mode,
        start_time,
        last,
        pi_integral: r.f64()?,
        tilde_integral: r.f64()?,
    };
    let ledger = r.opt(|r| {
        Ok(EnergyLedger {
            start_time: r.f64()?,
            start_energy: r.f64()?,
            dissipated: r.f64()?,
            last: r.opt(|r| {
                Ok((
                    r.f64()?,
                    EnergyRates {
                        energy: r.f64()?,
                        dissipation: r.f64()?,
                        dissipation_rate: r.f64()?,
                    },
                ))
            })?,
        })
    })?;
    Ok(RunProgress { monitor, ledger })
}

/// Serializes a state, its parameters and optionally the run accumulators.
pub fn encode_checkpoint(
    state: &SimState,
    params: &ModelParams,
    progress: Option<&RunProgress>,
) -> Vec<u8> {
    let grid = state.grid();
    let n = grid.n();
    let mut o = Out(Vec::with_capacity(HEADER_LEN + 7 * 16 * grid.len() + 256));
    o.0.extend_from_slice(&CHECKPOINT_MAGIC);
    o.0.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    o.0.extend_from_slice(&(n as u32).to_le_bytes());
    o.f64(grid.box_length());
    o.f64(state.time);
    for x in [
        params.nu,
        params.eta,
        params.mu,
        params.sigma1,
        params.sigma2,
        params.alpha,
        params.beta,
    ] {
        o.f64(x);
    }
    o.u8(params.terms.advection as u8);
    o.u8(params.terms.coupling as u8);
    for f in fields(state) {
        let c = f.coeffs();
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let z = c[grid.mode_storage(i, j, l)];
                    o.f64(z.re);
                    o.f64(z.im);
                }
            }
        }
    }
    if let Some(p) = progress {
        encode_progress(&mut o, p);
    }
    o.0
}

/// Inverse of [`encode_checkpoint`].
pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = In { bytes, pos: 0 };
    if r.take::<4>()? != CHECKPOINT_MAGIC {
        return Err(corrupt("bad magic, not a checkpoint file"));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(corrupt(format!(
            "format version {version}, expected {CHECKPOINT_VERSION}"
        )));
    }
    let n = r.u32()? as usize;
    let box_length = r.f64()?;
    let time = r.f64()?;
    let mut p = [0.0; 7];
    for x in p.iter_mut() {
        *x = r.f64()?;
    }
    let terms = Terms {
        advection: r.flag()?,
        coupling: r.flag()?,
    };
    let params = ModelParams {
        nu: p[0],
        eta: p[1],
        mu: p[2],
        sigma1: p[3],
        sigma2: p[4],
        alpha: p[5],
        beta: p[6],
        terms,
    };
    if !(n >= 8 && n.is_power_of_two()) || n > 1 << 12 {
        return Err(corrupt(format!("unsupported grid size {n}")));
    }
    let payload = 7 * 16 * n * n * n;
    if r.remaining() < payload {
        return Err(corrupt(format!(
            "payload has {} bytes, header implies {payload}",
            r.remaining()
        )));
    }
    let grid: Arc<Grid> = Grid::new(n, box_length).map_err(|e| corrupt(e.to_string()))?;
    let mut comps = Vec::with_capacity(7);
    for _ in 0..7 {
        let mut c = vec![Complex64::new(0.0, 0.0); grid.len()];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    c[grid.mode_storage(i, j, l)] = Complex64::new(r.f64()?, r.f64()?);
                }
            }
        }
        comps.push(ScalarField::from_coeffs(&grid, c)?);
    }
    let progress = if r.remaining() > 0 {
        Some(decode_progress(&mut r)?)
    } else {
        None
    };
    if r.remaining() > 0 {
        return Err(corrupt(format!("{} trailing bytes", r.remaining())));
    }
    let mut it = comps.into_iter();
    let mut next3 = || -> Result<VectorField> {
        VectorField::new([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
    };
    let u = next3()?;
    let v = next3()?;
    let theta = it.next().unwrap();
    Ok(Checkpoint {
        state: SimState::new(u, v, theta, time)?,
        params,
        progress,
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn write_checkpoint(state: &SimState, params: &ModelParams, path: &Path) -> Result<()> {
    write_bytes(path, &encode_checkpoint(state, params, None))
}

/// Checkpoint that also carries the run accumulators, so a resumed run
/// continues the blow-up integrals and the energy ledger.
pub fn write_checkpoint_with_progress(
    state: &SimState,
    params: &ModelParams,
    progress: &RunProgress,
    path: &Path,
) -> Result<()> {
    write_bytes(path, &encode_checkpoint(state, params, Some(progress)))
}

pub fn read_checkpoint(path: &Path) -> Result<(SimState, ModelParams)> {
    let c = read_checkpoint_full(path)?;
    Ok((c.state, c.params))
}

pub fn read_checkpoint_full(path: &Path) -> Result<Checkpoint> {
    decode_checkpoint(&std::fs::read(path)?)
}
