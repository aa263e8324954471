//! Matrix file formats.
//!
//! Binary: a 16-byte header holding `rows` and `cols` as little-endian
//! `u64`, then `rows·cols` complex entries in column-major order, each as
//! two little-endian `f64` (real, imaginary).
//!
//! Text: JSON array of rows, each entry `[re, im]`.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{OplabError, Result};
use crate::linalg::CMat;
use crate::serde_ext::{self, ComplexRepr};

pub fn write_binary<W: Write>(m: &CMat, mut w: W) -> Result<()> {
    w.write_all(&(m.nrows() as u64).to_le_bytes())?;
    w.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for z in m.iter() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<CMat> {
    let mut word = [0u8; 8];
    let mut next = |r: &mut R| -> Result<[u8; 8]> {
        r.read_exact(&mut word)
            .map_err(|e| OplabError::Format(format!("truncated matrix file: {e}")))?;
        Ok(word)
    };
    let rows = u64::from_le_bytes(next(&mut r)?) as usize;
    let cols = u64::from_le_bytes(next(&mut r)?) as usize;
    let count = rows
        .checked_mul(cols)
        .filter(|&c| c <= 1 << 28)
        .ok_or_else(|| OplabError::Format(format!("implausible matrix size {rows}x{cols}")))?;
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        let re = f64::from_le_bytes(next(&mut r)?);
        let im = f64::from_le_bytes(next(&mut r)?);
        data.push(Complex64::new(re, im));
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(OplabError::Format(format!("{} trailing bytes after matrix data", rest.len())));
    }
    Ok(CMat::from_vec(rows, cols, data))
}

pub fn to_json(m: &CMat) -> String {
    serde_json::to_string(&serde_ext::matrix_to_rows(m)).expect("matrix rows serialize")
}

pub fn from_json(text: &str) -> Result<CMat> {
    let rows: Vec<Vec<ComplexRepr>> = serde_json::from_str(text)?;
    serde_ext::rows_to_matrix(&rows).map_err(OplabError::Format)
}

pub fn save_binary(m: &CMat, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_binary(m, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_binary(path: &Path) -> Result<CMat> {
    read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CMat {
        CMat::from_fn(3, 2, |i, j| Complex64::new(i as f64 + 0.25, -(j as f64) * 1e-300))
    }

    #[test]
    fn binary_round_trip_and_layout() {
        let m = sample();
        let mut buf = Vec::new();
        write_binary(&m, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 6 * 16);
        assert_eq!(&buf[0..8], &3u64.to_le_bytes());
        // second stored entry is (1, 0): column-major
        assert_eq!(f64::from_le_bytes(buf[32..40].try_into().unwrap()), 1.25);
        assert_eq!(read_binary(&buf[..]).unwrap(), m);
    }

    #[test]
    fn binary_rejects_truncation() {
        let mut buf = Vec::new();
        write_binary(&sample(), &mut buf).unwrap();
        assert!(read_binary(&buf[..buf.len() - 1]).is_err());
        buf.push(0);
        assert!(read_binary(&buf[..]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = sample();
        assert_eq!(from_json(&to_json(&m)).unwrap(), m);
        assert!(from_json("[[1, 2], [3]]").is_err());
        assert_eq!(from_json("[[1.5, [0, 2]]]").unwrap()[(0, 1)], Complex64::new(0.0, 2.0));
    }
}
