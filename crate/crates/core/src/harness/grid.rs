//! The `FHGRID1` binary grid format.
//!
//! Layout, all little endian:
//!
//! ```text
//! b"FHGRID1"                    7 bytes
//! dims: u32
//! dims x (start: f64, end: f64, count: u64)
//! prod(count) x f64             row major, last axis fastest
//! crc: u64                      CRC-64/ECMA-182 of everything above
//! ```

use crc::{Crc, CRC_64_ECMA_182};
use ndarray::Array2;
use std::path::Path;

use crate::parabolic::{Axis, GriddedField};
use crate::{Error, Result};

pub const MAGIC: &[u8; 7] = b"FHGRID1";
const CRC: Crc<u64> = Crc::<u64>::new(&CRC_64_ECMA_182);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridAxis {
    pub start: f64,
    pub end: f64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridFile {
    pub axes: Vec<GridAxis>,
    pub values: Vec<f64>,
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::Format("file ends early".into()));
    }
    let (head, tail) = bytes.split_at(n);
    *bytes = tail;
    Ok(head)
}

fn take_u64(bytes: &mut &[u8]) -> Result<u64> {
    Ok(u64::from_le_bytes(take(bytes, 8)?.try_into().expect("8 bytes")))
}

fn take_f64(bytes: &mut &[u8]) -> Result<f64> {
    Ok(f64::from_bits(take_u64(bytes)?))
}

impl GridFile {
    pub fn from_field(f: &GriddedField) -> Self {
        let axis = |a: Axis| GridAxis { start: a.start, end: a.end(), count: a.len as u64 };
        Self { axes: vec![axis(f.t), axis(f.x)], values: f.values.iter().copied().collect() }
    }

    /// Rebuilds a two-axis field. The step is `(end - start) / (count - 1)`.
    pub fn to_field(&self) -> Result<GriddedField> {
        if self.axes.len() != 2 {
            return Err(Error::Format(format!("expected 2 axes, found {}", self.axes.len())));
        }
        let axis = |g: &GridAxis| {
            let step = if g.count > 1 { (g.end - g.start) / (g.count - 1) as f64 } else { 1.0 };
            Axis::new(g.start, step, g.count as usize)
        };
        let (t, x) = (axis(&self.axes[0])?, axis(&self.axes[1])?);
        let values = Array2::from_shape_vec((t.len, x.len), self.values.clone())
            .map_err(|e| Error::Format(e.to_string()))?;
        GriddedField::new(t, x, values)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(7 + 4 + 24 * self.axes.len() + 8 * self.values.len() + 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.axes.len() as u32).to_le_bytes());
        for a in &self.axes {
            out.extend_from_slice(&a.start.to_le_bytes());
            out.extend_from_slice(&a.end.to_le_bytes());
            out.extend_from_slice(&a.count.to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let crc = CRC.checksum(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() + 4 + 8 || &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::Format("not an FHGRID1 file".into()));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 8);
        let stored = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
        if CRC.checksum(body) != stored {
            return Err(Error::Format("checksum mismatch".into()));
        }
        let mut rest = &body[MAGIC.len()..];
        let dims = u32::from_le_bytes(take(&mut rest, 4)?.try_into().expect("4 bytes")) as usize;
        let mut axes = Vec::with_capacity(dims);
        for _ in 0..dims {
            axes.push(GridAxis { start: take_f64(&mut rest)?, end: take_f64(&mut rest)?, count: take_u64(&mut rest)? });
        }
        let total = axes.iter().try_fold(1u64, |acc, a| acc.checked_mul(a.count));
        let total = total.ok_or_else(|| Error::Format("node count overflows".into()))?;
        if rest.len() as u64 != total * 8 {
            return Err(Error::Format(format!("expected {total} values, found {} bytes", rest.len())));
        }
        let values = rest.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        Ok(Self { axes, values })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Encodes and decodes `f` in memory.
pub fn grid_roundtrip(f: &GriddedField) -> Result<GriddedField> {
    GridFile::from_bytes(&GridFile::from_field(f).to_bytes())?.to_field()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(nt: usize, nx: usize) -> GriddedField {
        let t = Axis::spanning(0.0, 0.5, nt).unwrap();
        let x = Axis::spanning(-1.0, 1.0, nx).unwrap();
        GriddedField::from_fn(t, x, |t, x| (3.0 * t).sin() * (x * 7.0).cos() + 1e-300 * x)
    }

    #[test]
    fn roundtrip_is_exact() {
        for (nt, nx) in [(2, 2), (5, 9)] {
            let f = field(nt, nx);
            let g = grid_roundtrip(&f).unwrap();
            assert_eq!(f, g);
        }
    }

    #[test]
    fn corruption_is_detected() {
        let bytes = GridFile::from_field(&field(4, 4)).to_bytes();
        assert!(GridFile::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        let mut flipped = bytes.clone();
        flipped[40] ^= 1;
        assert!(matches!(GridFile::from_bytes(&flipped), Err(Error::Format(_))));
        assert!(GridFile::from_bytes(b"FHGRID").is_err());
    }
}
