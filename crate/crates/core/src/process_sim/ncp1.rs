//! `NCP1` path files: little-endian header, grid, then matrices row-major as
//! `(re, im)` pairs, followed by the decomposition for decomposable paths.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use super::{Decomposition, ProcessPath, Role, TimeGrid};
use crate::error::{Error, Result};
use crate::matrix_alg::Matrix;

const MAGIC: &[u8; 4] = b"NCP1";

fn role_code(role: Role) -> u8 {
    match role {
        Role::Martingale => 0,
        Role::Fv => 1,
        Role::Decomposable => 2,
    }
}

fn put_matrices(out: &mut Vec<u8>, ms: &[Matrix]) {
    for m in ms {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
}

pub fn write_ncp1<W: Write>(path: &ProcessPath, mut w: W) -> Result<()> {
    let n = path.n();
    let t = path.grid.len();
    let mut out = Vec::with_capacity(13 + 8 * t + 16 * n * n * t);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(t as u32).to_le_bytes());
    out.push(role_code(path.role));
    for &s in path.times() {
        out.extend_from_slice(&s.to_le_bytes());
    }
    put_matrices(&mut out, &path.values);
    if path.role == Role::Decomposable {
        let d = path
            .decomposition
            .as_ref()
            .ok_or_else(|| Error::Format("decomposable path without decomposition".into()))?;
        put_matrices(&mut out, &d.martingale);
        put_matrices(&mut out, &d.fv);
    }
    w.write_all(&out)?;
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(k).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Format("truncated NCP1 data".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn matrices(&mut self, n: usize, count: usize) -> Result<Vec<Matrix>> {
        (0..count)
            .map(|_| {
                let mut m = Matrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = Complex64::new(self.f64()?, self.f64()?);
                    }
                }
                Ok(m)
            })
            .collect()
    }
}

pub fn read_ncp1<R: Read>(mut r: R) -> Result<ProcessPath> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let mut c = Cursor { buf: &buf, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err(Error::Format("missing NCP1 magic".into()));
    }
    let n = c.u32()? as usize;
    let t = c.u32()? as usize;
    if n == 0 || t == 0 {
        return Err(Error::Format("empty NCP1 path".into()));
    }
    let role = match c.take(1)?[0] {
        0 => Role::Martingale,
        1 => Role::Fv,
        2 => Role::Decomposable,
        b => return Err(Error::Format(format!("unknown role byte {b}"))),
    };
    let times = (0..t).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    let grid = Arc::new(TimeGrid::new(times).map_err(|e| Error::Format(e.to_string()))?);
    let values = c.matrices(n, t)?;
    let decomposition = if role == Role::Decomposable {
        let martingale = c.matrices(n, t)?;
        let fv = c.matrices(n, t)?;
        Some(Decomposition { martingale, fv })
    } else {
        None
    };
    if c.pos != buf.len() {
        return Err(Error::Format(format!("{} trailing bytes", buf.len() - c.pos)));
    }
    Ok(ProcessPath { grid, values, role, decomposition, lineage: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process_sim::{make_fv, simulate_hbm, FvKind, RngStream};

    #[test]
    fn round_trip_is_bit_exact() {
        let grid = Arc::new(TimeGrid::uniform(1.0, 0.25).unwrap());
        let m = simulate_hbm(3, grid.clone(), &RngStream::new(1, 0));
        let a = make_fv(&FvKind::scalar(|t| t * t), 3, grid);
        for p in [m.clone(), a.clone(), ProcessPath::decomposable(&m, &a).unwrap()] {
            let mut bytes = Vec::new();
            write_ncp1(&p, &mut bytes).unwrap();
            let q = read_ncp1(&bytes[..]).unwrap();
            assert_eq!(q.values, p.values);
            assert_eq!(q.grid, p.grid);
            assert_eq!(q.role, p.role);
            assert_eq!(q.decomposition, p.decomposition);
            let mut again = Vec::new();
            write_ncp1(&q, &mut again).unwrap();
            assert_eq!(bytes, again);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let grid = Arc::new(TimeGrid::uniform(1.0, 0.5).unwrap());
        let p = simulate_hbm(2, grid, &RngStream::new(1, 0));
        let mut bytes = Vec::new();
        write_ncp1(&p, &mut bytes).unwrap();
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(read_ncp1(&extra[..]).is_err());
        assert!(read_ncp1(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_ncp1(&bad[..]).is_err());
        let mut role = bytes;
        role[12] = 9;
        assert!(read_ncp1(&role[..]).is_err());
    }
}
