//! Binary density-matrix files.
//!
//! Layout, all little-endian: the magic `PLRE`, a `u32` format version, a
//! `u32` qubit count, then `d * d` entries in row-major order, each an `f64`
//! real part followed by an `f64` imaginary part.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{LreError, Result};
use crate::matrix::HermitianMatrix;
use crate::pauli::QubitCount;

pub const STATE_MAGIC: &[u8; 4] = b"PLRE";
pub const STATE_FORMAT_VERSION: u32 = 1;

pub fn write_state_to<W: Write>(m: &HermitianMatrix, mut out: W) -> Result<()> {
    let n = m
        .qubits()
        .ok_or_else(|| LreError::StateFile(format!("dimension {} is not 2^n", m.dim())))?;
    out.write_all(STATE_MAGIC)?;
    out.write_all(&STATE_FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&n.get().to_le_bytes())?;
    for z in m.as_slice() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_state(m: &HermitianMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_state_to(m, BufWriter::new(File::create(path)?))
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> LreError {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        LreError::StateFile("truncated state file".into())
    } else {
        LreError::Io(e)
    }
}

pub fn read_state_from<R: Read>(mut input: R) -> Result<HermitianMatrix> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(truncated)?;
    if &magic != STATE_MAGIC {
        return Err(LreError::StateFile("not a state file (bad magic)".into()));
    }
    let version = read_u32(&mut input)?;
    if version != STATE_FORMAT_VERSION {
        return Err(LreError::StateFile(format!(
            "unsupported version {version}"
        )));
    }
    let n = QubitCount::new(read_u32(&mut input)?)?;
    let d = n.dim();
    let mut data = Vec::with_capacity(d * d);
    let mut b = [0u8; 16];
    for _ in 0..d * d {
        input.read_exact(&mut b).map_err(truncated)?;
        let re = f64::from_le_bytes(b[..8].try_into().unwrap());
        let im = f64::from_le_bytes(b[8..].try_into().unwrap());
        data.push(Complex64::new(re, im));
    }
    if input.read(&mut b[..1])? != 0 {
        return Err(LreError::StateFile("trailing bytes after matrix".into()));
    }
    HermitianMatrix::from_row_major(d, data)
}

pub fn read_state(path: impl AsRef<Path>) -> Result<HermitianMatrix> {
    read_state_from(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::random_density;

    #[test]
    fn round_trip_is_bit_exact() {
        let rho = random_density(QubitCount::new(3).unwrap(), 11).unwrap();
        let mut buf = Vec::new();
        write_state_to(&rho, &mut buf).unwrap();
        assert_eq!(buf.len(), 12 + 64 * 16);
        assert_eq!(&buf[..4], b"PLRE");
        let back = read_state_from(&buf[..]).unwrap();
        assert_eq!(&back, rho.as_hermitian());
    }

    #[test]
    fn rejects_damaged_files() {
        let rho = HermitianMatrix::identity_scaled(2, 0.5);
        let mut buf = Vec::new();
        write_state_to(&rho, &mut buf).unwrap();
        assert!(matches!(
            read_state_from(&buf[..buf.len() - 1]),
            Err(LreError::StateFile(_))
        ));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_state_from(&bad[..]),
            Err(LreError::StateFile(_))
        ));
        let mut extra = buf.clone();
        extra.push(0);
        assert!(matches!(
            read_state_from(&extra[..]),
            Err(LreError::StateFile(_))
        ));
    }
}
