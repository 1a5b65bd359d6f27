//! DTF: `"DTF1"`, order as `u32`, each dimension as `u64`, then the entries
//! as `f64` in column-major order. Everything little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;
use crate::Scalar;

pub const DTF_MAGIC: &[u8; 4] = b"DTF1";

pub fn write_dtf<T: Scalar>(a: &DenseTensor<T>, mut w: impl Write) -> Result<()> {
    w.write_all(DTF_MAGIC)?;
    let order = u32::try_from(a.order()).map_err(|_| Error::Format("order exceeds u32".into()))?;
    w.write_all(&order.to_le_bytes())?;
    for &n in a.dims() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for v in a.data() {
        w.write_all(&v.as_f64().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_dtf<T: Scalar>(a: &DenseTensor<T>, path: impl AsRef<Path>) -> Result<()> {
    write_dtf(a, BufWriter::new(File::create(path)?))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(Error::Format(format!("truncated while reading {what}")));
        };
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
}

pub fn read_dtf(mut r: impl Read) -> Result<DenseTensor<f64>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != DTF_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}, expected \"DTF1\"")));
    }
    let order = u32::from_le_bytes(cur.take(4, "order")?.try_into().expect("4 bytes"));
    if order == 0 {
        return Err(Error::Format("order must be at least 1".into()));
    }
    let mut dims = Vec::with_capacity(order.min(64) as usize);
    for _ in 0..order {
        let n = u64::from_le_bytes(cur.take(8, "dimensions")?.try_into().expect("8 bytes"));
        let n = usize::try_from(n).map_err(|_| Error::Format(format!("dimension {n} too large")))?;
        if n == 0 {
            return Err(Error::Format("zero dimension".into()));
        }
        dims.push(n);
    }
    let len = dims
        .iter()
        .try_fold(1usize, |a, &n| a.checked_mul(n))
        .and_then(|l| l.checked_mul(8).map(|_| l))
        .ok_or_else(|| Error::Format(format!("element count of {dims:?} overflows")))?;
    let body = cur.take(len * 8, "data")?;
    if cur.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - cur.pos)));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    DenseTensor::new(dims, data)
}

pub fn load_dtf(path: impl AsRef<Path>) -> Result<DenseTensor<f64>> {
    read_dtf(BufReader::new(File::open(path)?))
}
