//! Binary checkpoints, little-endian throughout:
//!
//! ```text
//! "G2CF" | version u32 | dims 7 x u32 | lengths 7 x f64 | t f64 | coupling f64
//! | route u8 | scheme u8 | integrator u8 | step u64 | dt f64 | n_steps u64
//! | psi: fields x nodes x 35 f64 | CRC-64/ECMA-182 of everything before
//! ```
//!
//! Two psi fields are stored when both routes run side by side, direct
//! first.

use std::path::Path;

use crc::{Crc, CRC_64_ECMA_182};
use thiserror::Error;

use super::config::RouteChoice;
use crate::algebra::{tables::form_dim, DIM};
use crate::coflow::Integrator;
use crate::fields::{FormField, Grid, Scheme};

pub const MAGIC: &[u8; 4] = b"G2CF";
pub const VERSION: u32 = 1;

const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_ECMA_182);

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint checksum mismatch (stored {stored:#018x}, computed {computed:#018x})")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error("checkpoint format version {found}; this build reads version {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("not a checkpoint file")]
    BadMagic,
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub grid: Grid,
    pub t: f64,
    pub coupling: f64,
    pub route: RouteChoice,
    pub scheme: Scheme,
    pub integrator: Integrator,
    pub step: usize,
    pub dt: f64,
    pub n_steps: usize,
    pub psi: Vec<FormField>,
}

fn route_code(r: RouteChoice) -> u8 {
    match r {
        RouteChoice::Direct => 0,
        RouteChoice::Velocity => 1,
        RouteChoice::Both => 2,
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], CheckpointError> {
        let end = self.pos + N;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| CheckpointError::Malformed("header cut short".into()))?;
        self.pos = end;
        Ok(chunk.try_into().expect("length checked"))
    }
    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let ncomp = form_dim(4);
        let mut out = Vec::with_capacity(128 + self.psi.len() * self.grid.node_count() * ncomp * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        for d in self.grid.dims() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for l in self.grid.lengths() {
            out.extend_from_slice(&l.to_le_bytes());
        }
        out.extend_from_slice(&self.t.to_le_bytes());
        out.extend_from_slice(&self.coupling.to_le_bytes());
        out.push(route_code(self.route));
        out.push(match self.scheme {
            Scheme::Spectral => 0,
            Scheme::Fd4 => 1,
        });
        out.push(match self.integrator {
            Integrator::Euler => 0,
            Integrator::Rk4 => 1,
        });
        out.extend_from_slice(&(self.step as u64).to_le_bytes());
        out.extend_from_slice(&self.dt.to_le_bytes());
        out.extend_from_slice(&(self.n_steps as u64).to_le_bytes());
        for f in &self.psi {
            assert_eq!(f.degree(), 4);
            for v in f.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let sum = CRC64.checksum(&out);
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        if bytes.len() < 8 {
            return Err(CheckpointError::ChecksumMismatch {
                stored: 0,
                computed: CRC64.checksum(bytes),
            });
        }
        let (body, tail) = bytes.split_at(bytes.len() - 8);
        let stored = u64::from_le_bytes(tail.try_into().expect("eight bytes"));
        let computed = CRC64.checksum(body);
        if stored != computed {
            return Err(CheckpointError::ChecksumMismatch { stored, computed });
        }
        let mut r = Reader {
            bytes: body,
            pos: 0,
        };
        if &r.take::<4>()? != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(CheckpointError::VersionMismatch {
                found: version,
                expected: VERSION,
            });
        }
        let mut dims = [0usize; DIM];
        for d in dims.iter_mut() {
            *d = r.u32()? as usize;
        }
        let mut lengths = [0.0; DIM];
        for l in lengths.iter_mut() {
            *l = r.f64()?;
        }
        let grid =
            Grid::new(dims, lengths).map_err(|e| CheckpointError::Malformed(e.to_string()))?;
        let t = r.f64()?;
        let coupling = r.f64()?;
        let route = match r.u8()? {
            0 => RouteChoice::Direct,
            1 => RouteChoice::Velocity,
            2 => RouteChoice::Both,
            c => return Err(CheckpointError::Malformed(format!("route code {c}"))),
        };
        let scheme = match r.u8()? {
            0 => Scheme::Spectral,
            1 => Scheme::Fd4,
            c => return Err(CheckpointError::Malformed(format!("scheme code {c}"))),
        };
        let integrator = match r.u8()? {
            0 => Integrator::Euler,
            1 => Integrator::Rk4,
            c => return Err(CheckpointError::Malformed(format!("integrator code {c}"))),
        };
        let step = r.u64()? as usize;
        let dt = r.f64()?;
        let n_steps = r.u64()? as usize;
        let fields = if route == RouteChoice::Both { 2 } else { 1 };
        let per_field = grid.node_count() * form_dim(4);
        let payload = &body[r.pos..];
        if payload.len() != fields * per_field * 8 {
            return Err(CheckpointError::Malformed(format!(
                "payload has {} bytes, expected {}",
                payload.len(),
                fields * per_field * 8
            )));
        }
        let values: Vec<f64> = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes")))
            .collect();
        let psi = values
            .chunks_exact(per_field)
            .map(|c| FormField::from_data(grid, 4, c.to_vec()))
            .collect();
        Ok(Self {
            grid,
            t,
            coupling,
            route,
            scheme,
            integrator,
            step,
            dt,
            n_steps,
            psi,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        std::fs::write(path, self.to_bytes()).map_err(|source| CheckpointError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let bytes = std::fs::read(path).map_err(|source| CheckpointError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let grid = Grid::with_active(&[2], 8).unwrap();
        let psi = FormField::from_fn(grid, 4, |x, c| {
            for (i, v) in c.iter_mut().enumerate() {
                *v = (x[2] * (i + 1) as f64).sin() / 3.0;
            }
        });
        Checkpoint {
            grid,
            t: 0.1 / 3.0,
            coupling: 1.5,
            route: RouteChoice::Velocity,
            scheme: Scheme::Fd4,
            integrator: Integrator::Rk4,
            step: 5,
            dt: 0.1 / 15.0,
            n_steps: 12,
            psi: vec![psi],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let c = sample();
        let bytes = c.to_bytes();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn damage_is_detected() {
        let bytes = sample().to_bytes();
        let cut = &bytes[..bytes.len() - 100];
        assert!(matches!(
            Checkpoint::from_bytes(cut),
            Err(CheckpointError::ChecksumMismatch { .. })
        ));
        let mut flipped = bytes.clone();
        flipped[200] ^= 1;
        assert!(matches!(
            Checkpoint::from_bytes(&flipped),
            Err(CheckpointError::ChecksumMismatch { .. })
        ));
        let mut v2 = bytes[..bytes.len() - 8].to_vec();
        v2[4..8].copy_from_slice(&2u32.to_le_bytes());
        let sum = CRC64.checksum(&v2);
        v2.extend_from_slice(&sum.to_le_bytes());
        assert!(matches!(
            Checkpoint::from_bytes(&v2),
            Err(CheckpointError::VersionMismatch { found: 2, .. })
        ));
    }
}
