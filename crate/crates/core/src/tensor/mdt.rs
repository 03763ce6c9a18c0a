//! `MDT1` binary tensor container.
//!
//! Layout: the bytes `MDT1`, a little-endian `u32` mode count `N`, `N`
//! little-endian `u64` extents, then `f32` little-endian values in storage
//! order (first index fastest).

use std::io::{Read, Write};

use super::Tensor;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MDT1";

pub fn write<W: Write>(t: &Tensor, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(t.order() as u32).to_le_bytes())?;
    for &d in t.dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(t.len() * 4);
    for &v in t.data() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read<R: Read>(mut r: R) -> Result<Tensor> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn decode(bytes: &[u8]) -> Result<Tensor> {
    let parse = |offset: usize, message: String| Error::Parse { offset, message };
    if bytes.len() < 8 {
        return Err(parse(0, format!("header needs 8 bytes, file has {}", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(parse(0, "missing MDT1 magic".into()));
    }
    let modes = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if modes == 0 {
        return Err(parse(4, "mode count is zero".into()));
    }
    let header_end = modes
        .checked_mul(8)
        .and_then(|n| n.checked_add(8))
        .ok_or_else(|| parse(4, format!("mode count {modes} overflows")))?;
    if bytes.len() < header_end {
        return Err(parse(
            bytes.len(),
            format!("{modes} extents need {header_end} header bytes, file has {}", bytes.len()),
        ));
    }
    let mut dims = Vec::with_capacity(modes);
    let mut count: usize = 1;
    for k in 0..modes {
        let at = 8 + 8 * k;
        let d = u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        let d = usize::try_from(d).map_err(|_| parse(at, format!("extent {d} too large")))?;
        if d == 0 {
            return Err(parse(at, format!("extent {k} is zero")));
        }
        count = count
            .checked_mul(d)
            .ok_or_else(|| parse(at, "element count overflows".into()))?;
        dims.push(d);
    }
    let payload = &bytes[header_end..];
    let declared = count
        .checked_mul(4)
        .ok_or_else(|| parse(header_end, "payload size overflows".into()))?;
    if payload.len() != declared {
        return Err(parse(
            header_end,
            format!(
                "payload length mismatch: declared {declared} bytes ({count} f32), actual {}",
                payload.len()
            ),
        ));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Tensor::new(dims, data)
}
