use ndarray::{Array2, ArrayView2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

/// A dense complex tensor stored row-major (leftmost index slowest).
///
/// Operators on `k` sites of local dimension `d` are rank-2 tensors of shape
/// `[d^k, d^k]` whose element `[(o_1..o_k), (i_1..i_k)]` maps input basis state
/// `i` to output basis state `o`. Operators act on column vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    entries: Vec<C64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, entries: Vec<C64>) -> Result<Self> {
        if shape.contains(&0) {
            return arg(format!("shape {shape:?} has a zero extent"));
        }
        let count: usize = shape.iter().product();
        if count != entries.len() {
            return arg(format!(
                "shape {shape:?} needs {count} entries, got {}",
                entries.len()
            ));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return arg("tensor entries must be finite");
        }
        Ok(Self { shape, entries })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let count = shape.iter().product();
        Self {
            shape,
            entries: vec![C64::new(0.0, 0.0); count],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(vec![n, n]);
        for i in 0..n {
            m.entries[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_matrix(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        Self::new(vec![rows, cols], entries)
    }

    pub fn from_array2(a: Array2<C64>) -> Self {
        let (rows, cols) = a.dim();
        let entries = if a.is_standard_layout() {
            a.into_raw_vec_and_offset().0
        } else {
            a.iter().copied().collect()
        };
        Self {
            shape: vec![rows, cols],
            entries,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.entries
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.entries
    }

    pub fn is_matrix(&self) -> bool {
        self.shape.len() == 2
    }

    pub fn is_square(&self) -> bool {
        self.is_matrix() && self.shape[0] == self.shape[1]
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    fn require_matrix(&self, what: &str) -> Result<()> {
        if self.is_matrix() {
            Ok(())
        } else {
            arg(format!(
                "{what} requires a matrix, got shape {:?}",
                self.shape
            ))
        }
    }

    pub fn view2(&self) -> Result<ArrayView2<'_, C64>> {
        self.require_matrix("matrix view")?;
        Ok(
            ArrayView2::from_shape((self.shape[0], self.shape[1]), &self.entries)
                .expect("shape checked at construction"),
        )
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.shape[1] + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        let cols = self.shape[1];
        self.entries[row * cols + col] = value;
    }

    pub fn reshape(&self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.entries.clone())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        let (a, b) = (self.view2()?, other.view2()?);
        if a.ncols() != b.nrows() {
            return arg(format!(
                "cannot multiply {:?} by {:?}",
                self.shape, other.shape
            ));
        }
        Ok(Self::from_array2(a.dot(&b)))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.shape != other.shape {
            return arg(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape, other.shape
            ));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            shape: self.shape.clone(),
            entries,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            shape: self.shape.clone(),
            entries: self.entries.iter().map(|&z| z * factor).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Result<Self> {
        self.require_matrix("adjoint")?;
        let (r, c) = (self.rows(), self.cols());
        let mut entries = Vec::with_capacity(r * c);
        for j in 0..c {
            for i in 0..r {
                entries.push(self.entries[i * c + j].conj());
            }
        }
        Ok(Self {
            shape: vec![c, r],
            entries,
        })
    }

    pub fn transpose(&self) -> Result<Self> {
        self.require_matrix("transpose")?;
        let (r, c) = (self.rows(), self.cols());
        let mut entries = Vec::with_capacity(r * c);
        for j in 0..c {
            for i in 0..r {
                entries.push(self.entries[i * c + j]);
            }
        }
        Ok(Self {
            shape: vec![c, r],
            entries,
        })
    }

    /// Kronecker product of two matrices; `self` occupies the slow (left) factor.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        self.require_matrix("kron")?;
        other.require_matrix("kron")?;
        let (ar, ac) = (self.rows(), self.cols());
        let (br, bc) = (other.rows(), other.cols());
        let mut out = Self::zeros(vec![ar * br, ac * bc]);
        let cols = ac * bc;
        for i in 0..ar {
            for j in 0..ac {
                let a = self.entries[i * ac + j];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..br {
                    for l in 0..bc {
                        out.entries[(i * br + k) * cols + j * bc + l] =
                            a * other.entries[k * bc + l];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Result<C64> {
        if !self.is_square() {
            return arg(format!(
                "trace requires a square matrix, got {:?}",
                self.shape
            ));
        }
        let n = self.rows();
        Ok((0..n).map(|i| self.entries[i * n + i]).sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Frobenius inner product `tr(self^H other)`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.shape != other.shape {
            return arg(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape, other.shape
            ));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn to_json(&self) -> DenseJson {
        DenseJson {
            shape: self.shape.clone(),
            entries: self.entries.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn from_json(json: &DenseJson) -> Result<Self> {
        Self::new(
            json.shape.clone(),
            json.entries
                .iter()
                .map(|&[re, im]| C64::new(re, im))
                .collect(),
        )
    }
}

/// On-disk form: `{"shape":[...], "entries":[[re,im],...]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseJson {
    pub shape: Vec<usize>,
    pub entries: Vec<[f64; 2]>,
}

impl std::str::FromStr for DenseTensor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let json: DenseJson = serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        Self::from_json(&json)
    }
}

/// `d^k`, failing instead of overflowing.
pub fn checked_pow(d: usize, k: usize) -> Result<usize> {
    u32::try_from(k)
        .ok()
        .and_then(|k| d.checked_pow(k))
        .ok_or_else(|| Error::Resource(format!("{d}^{k} overflows")))
}

/// Number of sites `k` such that `d^k == dim`, if any.
pub fn site_count(dim: usize, d: usize) -> Option<usize> {
    if d < 2 {
        return None;
    }
    let (mut k, mut p) = (0, 1usize);
    while p < dim {
        p = p.checked_mul(d)?;
        k += 1;
    }
    (p == dim).then_some(k)
}
