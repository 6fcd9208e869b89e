//! Binary snapshot container.
//!
//! Layout, all little-endian: the magic `WEYLHERM1`, `N` and `Nx` as `u64`,
//! `x_min`, `x_max`, `t`, `ħ` as `f64`, a `u8` model tag, then `N+1` lines
//! of `Nx` complex values stored as `(re, im)` pairs of `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{HermiteState, Model};

pub const MAGIC: &[u8; 9] = b"WEYLHERM1";

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub x_min: f64,
    pub x_max: f64,
    pub hbar: f64,
    pub model: Model,
    pub state: HermiteState,
}

impl Snapshot {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.state.n_modes() as u64).to_le_bytes())?;
        w.write_all(&(self.state.n_points() as u64).to_le_bytes())?;
        for v in [self.x_min, self.x_max, self.state.time, self.hbar] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&[self.model.tag()])?;
        for line in &self.state.modes {
            for z in line {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 9];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic, not a snapshot".into()));
        }
        let n = read_u64(&mut r)? as usize;
        let nx = read_u64(&mut r)? as usize;
        if nx == 0 || n > 1 << 20 || nx > 1 << 28 {
            return Err(Error::Format(format!("implausible sizes N = {n}, Nx = {nx}")));
        }
        let x_min = read_f64(&mut r)?;
        let x_max = read_f64(&mut r)?;
        let time = read_f64(&mut r)?;
        let hbar = read_f64(&mut r)?;
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        let model = Model::from_tag(tag[0])
            .ok_or_else(|| Error::Format(format!("unknown model tag {}", tag[0])))?;
        let mut modes = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            let mut line = Vec::with_capacity(nx);
            for _ in 0..nx {
                let re = read_f64(&mut r)?;
                let im = read_f64(&mut r)?;
                line.push(Complex64::new(re, im));
            }
            modes.push(line);
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after snapshot payload".into()));
        }
        Ok(Self {
            x_min,
            x_max,
            hbar,
            model,
            state: HermiteState { time, modes },
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("truncated snapshot".into())
    } else {
        Error::Io(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        let modes = (0..3)
            .map(|k| (0..4).map(|j| Complex64::new(k as f64 + 0.25, -(j as f64) / 3.0)).collect())
            .collect();
        Snapshot {
            x_min: -4.0,
            x_max: 4.0,
            hbar: 0.1,
            model: Model::Semiclassical,
            state: HermiteState { time: 1.5, modes },
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let s = sample();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 9 + 16 + 32 + 1 + 3 * 4 * 16);
        assert_eq!(&buf[..9], b"WEYLHERM1");
        assert_eq!(u64::from_le_bytes(buf[9..17].try_into().unwrap()), 2);
        assert_eq!(buf[57], 1);
        assert_eq!(Snapshot::read_from(&buf[..]).unwrap(), s);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let mut buf = Vec::new();
        sample().write_to(&mut buf).unwrap();
        assert!(matches!(Snapshot::read_from(&buf[..buf.len() - 1]), Err(Error::Format(_))));
        let mut extra = buf.clone();
        extra.push(0);
        assert!(Snapshot::read_from(&extra[..]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(Snapshot::read_from(&bad[..]).is_err());
        let mut tag = buf;
        tag[57] = 7;
        assert!(Snapshot::read_from(&tag[..]).is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        sample().save(&p).unwrap();
        assert_eq!(Snapshot::load(&p).unwrap(), sample());
    }
}
