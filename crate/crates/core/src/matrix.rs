//! Matrices with entries in a presented algebra.
//!
//! Free modules are row vectors and maps act by right multiplication, so a
//! map `L_{m+1} -> L_m` between free modules of ranks `r_{m+1}` and `r_m` is an
//! `r_{m+1} x r_m` matrix. Composing `g` first and then `f` is the product
//! `M(g) * M(f)`.

use std::fmt;

use crate::algebra::{Algebra, AlgebraElement};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AlgMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<AlgebraElement>,
}

impl fmt::Debug for AlgMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgMatrix({}x{})", self.rows, self.cols)
    }
}

impl AlgMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        AlgMatrix { rows, cols, entries: vec![AlgebraElement::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, AlgebraElement::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<AlgebraElement>>, cols: usize) -> Result<Self> {
        let r = rows.len();
        let mut entries = Vec::with_capacity(r * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!("row of length {} in a matrix with {cols} columns", row.len())));
            }
            entries.extend(row);
        }
        Ok(AlgMatrix { rows: r, cols, entries })
    }

    /// Parses a matrix given as rows of element strings.
    pub fn parse(alg: &Algebra, rows: &[Vec<String>], cols: usize) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| alg.parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(parsed, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> &AlgebraElement {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: AlgebraElement) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &AlgebraElement)> + '_ {
        self.entries.iter().enumerate().map(move |(k, e)| (k / self.cols.max(1), k % self.cols.max(1), e))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    fn check_same_shape(&self, other: &AlgMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        Ok(())
    }

    pub fn add(&self, other: &AlgMatrix) -> Result<AlgMatrix> {
        self.check_same_shape(other)?;
        Ok(AlgMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn sub(&self, other: &AlgMatrix) -> Result<AlgMatrix> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> AlgMatrix {
        self.scale(&-Scalar::from_integer(1.into()))
    }

    pub fn scale(&self, c: &Scalar) -> AlgMatrix {
        AlgMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|e| e.scale(c)).collect() }
    }

    pub fn mul(&self, alg: &Algebra, other: &AlgMatrix) -> Result<AlgMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = AlgMatrix::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = AlgebraElement::zero();
                for k in 0..self.cols {
                    let a = self.get(r, k);
                    let b = other.get(k, c);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&alg.mul(a, b)?);
                }
                out.set(r, c, acc);
            }
        }
        Ok(out)
    }

    pub fn max_degree(&self, alg: &Algebra) -> Option<u32> {
        self.entries.iter().filter_map(|e| alg.degree(e)).max()
    }

    pub fn to_strings(&self, alg: &Algebra) -> Vec<Vec<String>> {
        (0..self.rows).map(|r| (0..self.cols).map(|c| alg.format(self.get(r, c))).collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_follows_right_action() {
        let a = Algebra::preset("weyl2").unwrap();
        let col = AlgMatrix::parse(&a, &[vec!["Dx".into()], vec!["Dy".into()]], 1).unwrap();
        let row = AlgMatrix::parse(&a, &[vec!["Dy".into(), "-Dx".into()]], 2).unwrap();
        assert!(row.mul(&a, &col).unwrap().is_zero());
        let row = AlgMatrix::parse(&a, &[vec!["x".into(), "0".into()]], 2).unwrap();
        let col = AlgMatrix::parse(&a, &[vec!["Dx".into()], vec!["1".into()]], 1).unwrap();
        assert_eq!(a.format(row.mul(&a, &col).unwrap().get(0, 0)), "x*Dx");
        assert!(row.mul(&a, &row).is_err());
    }
}
