//! Row-compressed complex operators for the numeric lattice checks.

use num_complex::Complex64 as C64;

use crate::error::{arg, Error, Result};
use crate::pauli::{string_entries, PauliOperator};
use crate::tensor::{checked_pow, DenseTensor};

/// Largest dimension accepted for numeric lattice operators (`2^16`).
pub const SPARSE_DIM_LIMIT: usize = 1 << 16;
/// Largest number of stored entries.
pub const SPARSE_NNZ_LIMIT: usize = 1 << 25;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseOperator {
    fn check_dim(dim: usize) -> Result<()> {
        if dim > SPARSE_DIM_LIMIT {
            return Err(Error::Resource(format!(
                "dimension {dim} exceeds {SPARSE_DIM_LIMIT}"
            )));
        }
        Ok(())
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::check_dim(dim)?;
        Ok(Self {
            dim,
            rows: vec![Vec::new(); dim],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::check_dim(dim)?;
        Ok(Self {
            dim,
            rows: (0..dim).map(|i| vec![(i, C64::new(1.0, 0.0))]).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.rows[row]
            .binary_search_by_key(&col, |&(c, _)| c)
            .map(|i| self.rows[row][i].1)
            .unwrap_or_default()
    }

    pub fn from_dense(m: &DenseTensor) -> Result<Self> {
        if !m.is_square() {
            return arg(format!("expected a square matrix, got {:?}", m.shape()));
        }
        let mut out = Self::zeros(m.rows())?;
        for (r, row) in out.rows.iter_mut().enumerate() {
            for c in 0..m.cols() {
                let z = m.get(r, c);
                if z != C64::new(0.0, 0.0) {
                    row.push((c, z));
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Result<DenseTensor> {
        if self.dim > crate::pauli::DENSE_DIM_LIMIT {
            return Err(Error::Resource(format!(
                "dimension {} too large for dense form",
                self.dim
            )));
        }
        let mut m = DenseTensor::zeros(vec![self.dim, self.dim]);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, z) in row {
                m.set(r, c, z);
            }
        }
        Ok(m)
    }

    /// `local` acting on `sites` (leg `j` on `sites[j]`) of an `n`-site register.
    pub fn embed(local: &DenseTensor, sites: &[usize], n: usize, d: usize) -> Result<Self> {
        let k = sites.len();
        let ldim = checked_pow(d, k)?;
        if local.shape() != [ldim, ldim] {
            return arg(format!(
                "local operator {:?} does not act on {k} sites",
                local.shape()
            ));
        }
        let mut seen = vec![false; n];
        for &s in sites {
            if s >= n || std::mem::replace(&mut seen[s], true) {
                return arg(format!("bad site list {sites:?} for {n} sites"));
            }
        }
        let dim = checked_pow(d, n)?;
        let mut out = Self::zeros(dim)?;
        let strides: Vec<usize> = sites.iter().map(|&s| d.pow((n - 1 - s) as u32)).collect();
        for (row, entries) in out.rows.iter_mut().enumerate() {
            let mut local_row = 0;
            let mut rest = row;
            for &st in &strides {
                let digit = (row / st) % d;
                local_row = local_row * d + digit;
                rest -= digit * st;
            }
            for local_col in 0..ldim {
                let z = local.get(local_row, local_col);
                if z == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut col = rest;
                let mut rem = local_col;
                for &st in strides.iter().rev() {
                    col += (rem % d) * st;
                    rem /= d;
                }
                entries.push((col, z));
            }
            entries.sort_unstable_by_key(|&(c, _)| c);
        }
        Ok(out)
    }

    /// Numeric value of an exact operator at `(u, v)`.
    pub fn from_pauli(op: &PauliOperator, u: C64, v: C64) -> Result<Self> {
        let n = op.n_sites();
        let dim = 1usize
            .checked_shl(n as u32)
            .filter(|&d| d <= SPARSE_DIM_LIMIT)
            .ok_or_else(|| Error::Resource(format!("2^{n} exceeds {SPARSE_DIM_LIMIT}")))?;
        let mut acc = vec![Vec::new(); dim];
        for (string, coeff) in op.terms() {
            let value = coeff.evaluate(u, v);
            for (row, col, sign) in string_entries(string, n) {
                acc[row].push((col, value * sign));
            }
        }
        let rows = acc.into_iter().map(merge_row).collect();
        Ok(Self { dim, rows })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return arg(format!("dimension mismatch {} vs {}", self.dim, other.dim));
        }
        let mut accumulator = vec![C64::new(0.0, 0.0); self.dim];
        let mut touched = vec![false; self.dim];
        let mut cols = Vec::new();
        let mut rows = Vec::with_capacity(self.dim);
        let mut nnz = 0usize;
        for row in &self.rows {
            for &(k, a) in row {
                for &(c, b) in &other.rows[k] {
                    if !touched[c] {
                        touched[c] = true;
                        cols.push(c);
                    }
                    accumulator[c] += a * b;
                }
            }
            cols.sort_unstable();
            let out: Vec<(usize, C64)> = cols
                .iter()
                .map(|&c| {
                    touched[c] = false;
                    (c, std::mem::take(&mut accumulator[c]))
                })
                .collect();
            cols.clear();
            nnz += out.len();
            if nnz > SPARSE_NNZ_LIMIT {
                return Err(Error::Resource(format!(
                    "product exceeds {SPARSE_NNZ_LIMIT} stored entries"
                )));
            }
            rows.push(out);
        }
        Ok(Self {
            dim: self.dim,
            rows,
        })
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        if self.dim != other.dim {
            return arg(format!("dimension mismatch {} vs {}", self.dim, other.dim));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut row: Vec<(usize, C64)> = a.clone();
                row.extend(b.iter().map(|&(c, z)| (c, z * sign)));
                merge_row(row)
            })
            .collect();
        Ok(Self {
            dim: self.dim,
            rows,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Ordered product `ops[0] · ops[1] · …`.
    pub fn product<'a>(
        dim: usize,
        ops: impl IntoIterator<Item = &'a SparseOperator>,
    ) -> Result<Self> {
        let mut acc = Self::identity(dim)?;
        for op in ops {
            acc = acc.matmul(op)?;
        }
        Ok(acc)
    }
}

fn merge_row(mut row: Vec<(usize, C64)>) -> Vec<(usize, C64)> {
    row.sort_unstable_by_key(|&(c, _)| c);
    let mut merged: Vec<(usize, C64)> = Vec::with_capacity(row.len());
    for (c, z) in row {
        match merged.last_mut() {
            Some((last, acc)) if *last == c => *acc += z,
            _ => merged.push((c, z)),
        }
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{embed_on_sites, relative_distance};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, n: usize) -> DenseTensor {
        let entries = (0..n * n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        DenseTensor::from_matrix(n, n, entries).unwrap()
    }

    #[test]
    fn embed_agrees_with_dense_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_matrix(&mut rng, 4);
        let sparse = SparseOperator::embed(&m, &[3, 1], 5, 2).unwrap();
        assert_eq!(
            sparse.to_dense().unwrap(),
            embed_on_sites(&m, &[3, 1], 5, 2).unwrap()
        );
    }

    #[test]
    fn products_and_differences_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = random_matrix(&mut rng, 16);
        let b = random_matrix(&mut rng, 16);
        let (sa, sb) = (
            SparseOperator::from_dense(&a).unwrap(),
            SparseOperator::from_dense(&b).unwrap(),
        );
        let prod = sa.matmul(&sb).unwrap().to_dense().unwrap();
        assert!(relative_distance(&prod, &a.matmul(&b).unwrap()).unwrap() < 1e-14);
        let comm = sa.commutator(&sb).unwrap();
        let dense_comm = a.matmul(&b).unwrap().sub(&b.matmul(&a).unwrap()).unwrap();
        assert!((comm.frobenius_norm() - dense_comm.frobenius_norm()).abs() < 1e-12);
        assert!((sa.trace() - a.trace().unwrap()).norm() < 1e-14);
    }

    #[test]
    fn pauli_conversion_matches_dense_evaluation() {
        let op: PauliOperator = "1 IIII\nu XXXX\n1/2*i*v YZIX".parse().unwrap();
        let (u, v) = (C64::new(0.3, 0.0), C64::new(-0.7, 0.1));
        let sparse = SparseOperator::from_pauli(&op, u, v).unwrap();
        let dense = op.evaluate_dense(u, v).unwrap();
        assert!(relative_distance(&sparse.to_dense().unwrap(), &dense).unwrap() < 1e-15);
    }

    #[test]
    fn guards() {
        assert!(SparseOperator::identity(1 << 17).is_err());
        let a = SparseOperator::identity(4).unwrap();
        let b = SparseOperator::identity(8).unwrap();
        assert!(a.matmul(&b).is_err());
    }
}
