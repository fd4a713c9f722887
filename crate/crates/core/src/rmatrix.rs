//! Four-site R-matrices.
//!
//! An [`RMatrixFour`] is an operator on `V⊗V⊗V⊗V` in either the checked form
//! `Ř` or the plain form `R`, whose outgoing pair of spaces is exchanged:
//! `R^{b1 b2 b3 b4}_{a} = Ř^{b3 b4 b1 b2}_{a}`. With operators acting on column
//! vectors this is `R = P13·P24·Ř`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::pauli::{
    BivariatePolynomial, GaussianRational, Letter, PauliOperator, PauliString, Variable,
};
use crate::tensor::{checked_pow, permutation_operator, DenseTensor, SWAP_PAIRS};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `Ř`, the form that enters the cubic equations and transfer matrices.
    #[default]
    Check,
    /// `R = P13·P24·Ř`.
    Plain,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Backend {
    /// Exact, qubits only; coefficients are polynomials in `(u, v)`.
    Pauli(PauliOperator),
    /// Numeric `d^4 x d^4` matrix with parameters already bound.
    Dense(DenseTensor),
}

/// Which spectral parameters the matrix depends on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParameterBinding {
    None,
    U,
    V,
    Both,
    /// Dense matrices carry numbers, not symbols.
    Numeric,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RMatrixFour {
    d: usize,
    convention: Convention,
    backend: Backend,
    /// Set on projective inverses: `self · inverse = scale · I`.
    projective_scale: Option<BivariatePolynomial>,
}

/// Requested inversion strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvertMode {
    /// `a·I + b·S` with `S² = I` inverts to `a·I - b·S` up to `a² - b²`.
    ExactProjective,
    /// LU inverse of a dense matrix.
    DenseNumeric,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scale {
    Exact(BivariatePolynomial),
    Numeric(C64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Inverse {
    pub matrix: RMatrixFour,
    /// `m · matrix = scale · I`.
    pub scale: Scale,
    /// Condition number in the 2-norm (dense mode only).
    pub condition_number: Option<f64>,
}

/// Relative singular-value floor below which a dense matrix counts as singular.
pub const SINGULAR_RTOL: f64 = 1e-13;

fn uniform_plus_identity(letter: Letter, coeff: BivariatePolynomial) -> PauliOperator {
    let mut op = PauliOperator::identity(4);
    op.add_term(PauliString::uniform(letter, &[0, 1, 2, 3]), coeff);
    op
}

impl RMatrixFour {
    pub fn from_pauli(op: PauliOperator, convention: Convention) -> Result<Self> {
        if op.n_sites() != 4 {
            return arg(format!("an R-matrix acts on 4 sites, got {}", op.n_sites()));
        }
        Ok(Self {
            d: 2,
            convention,
            backend: Backend::Pauli(op),
            projective_scale: None,
        })
    }

    pub fn from_dense(m: DenseTensor, d: usize, convention: Convention) -> Result<Self> {
        let dim = checked_pow(d, 4)?;
        if m.shape() != [dim, dim] {
            return arg(format!(
                "expected a {dim}x{dim} matrix for d = {d}, got {:?}",
                m.shape()
            ));
        }
        Ok(Self {
            d,
            convention,
            backend: Backend::Dense(m),
            projective_scale: None,
        })
    }

    /// `1⊗1⊗1⊗1 + x·σx⊗σx⊗σx⊗σx`.
    pub fn kitaev_a(param: Variable) -> Self {
        let op = uniform_plus_identity(Letter::X, BivariatePolynomial::variable(param));
        Self::from_pauli(op, Convention::Check).expect("four sites")
    }

    /// `1⊗1⊗1⊗1 + x·σz⊗σz⊗σz⊗σz`.
    pub fn kitaev_b(param: Variable) -> Self {
        let op = uniform_plus_identity(Letter::Z, BivariatePolynomial::variable(param));
        Self::from_pauli(op, Convention::Check).expect("four sites")
    }

    /// `1⊗1⊗1⊗1 - x·σx⊗σx⊗σx⊗σx`, inverse of [`Self::kitaev_a`] up to `1 - x²`.
    pub fn kitaev_a_inv(param: Variable) -> Self {
        let mut m = Self::kitaev_a(param)
            .invert(InvertMode::ExactProjective)
            .expect("recognized projective form")
            .matrix;
        m.projective_scale = Some(
            &BivariatePolynomial::one()
                - &BivariatePolynomial::variable(param)
                    .try_mul(&BivariatePolynomial::variable(param))
                    .expect("degree 2"),
        );
        m
    }

    pub fn identity_pauli() -> Self {
        Self::from_pauli(PauliOperator::identity(4), Convention::Check).expect("four sites")
    }

    pub fn identity_dense(d: usize) -> Result<Self> {
        Self::from_dense(
            DenseTensor::identity(checked_pow(d, 4)?),
            d,
            Convention::Check,
        )
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn pauli(&self) -> Option<&PauliOperator> {
        match &self.backend {
            Backend::Pauli(op) => Some(op),
            Backend::Dense(_) => None,
        }
    }

    pub fn projective_scale(&self) -> Option<&BivariatePolynomial> {
        self.projective_scale.as_ref()
    }

    pub fn binding(&self) -> ParameterBinding {
        match &self.backend {
            Backend::Dense(_) => ParameterBinding::Numeric,
            Backend::Pauli(op) => match op.degrees() {
                (0, 0) => ParameterBinding::None,
                (_, 0) => ParameterBinding::U,
                (0, _) => ParameterBinding::V,
                _ => ParameterBinding::Both,
            },
        }
    }

    /// Numeric matrix at `(u, v)`; dense matrices are returned unchanged.
    pub fn evaluate(&self, u: C64, v: C64) -> Result<DenseTensor> {
        match &self.backend {
            Backend::Pauli(op) => op.evaluate_dense(u, v),
            Backend::Dense(m) => Ok(m.clone()),
        }
    }

    /// Exchange `u` and `v` in a symbolic matrix (no-op for dense ones).
    pub fn swap_variables(&self) -> Self {
        let mut out = self.clone();
        if let Backend::Pauli(op) = &self.backend {
            out.backend = Backend::Pauli(op.swap_variables());
        }
        out.projective_scale = self
            .projective_scale
            .as_ref()
            .map(BivariatePolynomial::swap_variables);
        out
    }

    /// Reindex the outgoing legs `(b1 b2 b3 b4) -> (b3 b4 b1 b2)`.
    fn exchange_outgoing_pairs(&self) -> Result<Backend> {
        Ok(match &self.backend {
            Backend::Dense(m) => {
                let d = self.d;
                let dim = m.rows();
                let mut out = DenseTensor::zeros(vec![dim, dim]);
                let pair = d * d;
                for row in 0..dim {
                    let (hi, lo) = (row / pair, row % pair);
                    let source = lo * pair + hi;
                    for col in 0..dim {
                        out.set(row, col, m.get(source, col));
                    }
                }
                Backend::Dense(out)
            }
            Backend::Pauli(op) => Backend::Pauli(swap_pairs_pauli().multiply(op)?),
        })
    }

    /// Ř → R. Errors if the matrix is already plain.
    pub fn to_plain(&self) -> Result<Self> {
        if self.convention != Convention::Check {
            return arg("matrix is already in the plain convention");
        }
        Ok(Self {
            backend: self.exchange_outgoing_pairs()?,
            convention: Convention::Plain,
            ..self.clone()
        })
    }

    /// R → Ř. Errors if the matrix is already checked.
    pub fn to_check(&self) -> Result<Self> {
        if self.convention != Convention::Plain {
            return arg("matrix is already in the checked convention");
        }
        Ok(Self {
            backend: self.exchange_outgoing_pairs()?,
            convention: Convention::Check,
            ..self.clone()
        })
    }

    /// The checked form, converting if necessary.
    pub fn as_check(&self) -> Result<Self> {
        match self.convention {
            Convention::Check => Ok(self.clone()),
            Convention::Plain => self.to_check(),
        }
    }

    /// Conjugate by a permutation of the four legs: leg `j` moves to `perm[j]`.
    pub fn permute_legs(&self, perm: [usize; 4]) -> Result<Self> {
        let backend = match &self.backend {
            Backend::Pauli(op) => Backend::Pauli(op.embed(&perm, 4)?),
            Backend::Dense(m) => {
                let p = permutation_operator(&perm, self.d)?;
                Backend::Dense(p.matmul(m)?.matmul(&p.transpose()?)?)
            }
        };
        Ok(Self {
            backend,
            ..self.clone()
        })
    }

    pub fn invert(&self, mode: InvertMode) -> Result<Inverse> {
        match (mode, &self.backend) {
            (InvertMode::ExactProjective, Backend::Pauli(op)) => {
                let (inverse, scale) = projective_inverse(op)?;
                Ok(Inverse {
                    matrix: Self {
                        backend: Backend::Pauli(inverse),
                        projective_scale: Some(scale.clone()),
                        ..self.clone()
                    },
                    scale: Scale::Exact(scale),
                    condition_number: None,
                })
            }
            (InvertMode::ExactProjective, Backend::Dense(_)) => Err(Error::Mode(
                "projective inversion needs the exact Pauli backend".into(),
            )),
            (InvertMode::DenseNumeric, Backend::Dense(m)) => {
                let (inverse, condition) = dense_inverse(m)?;
                Ok(Inverse {
                    matrix: Self {
                        backend: Backend::Dense(inverse),
                        projective_scale: None,
                        ..self.clone()
                    },
                    scale: Scale::Numeric(C64::new(1.0, 0.0)),
                    condition_number: Some(condition),
                })
            }
            (InvertMode::DenseNumeric, Backend::Pauli(_)) => Err(Error::Mode(
                "dense inversion needs numeric values; evaluate the matrix first".into(),
            )),
        }
    }

    /// Exact inverse at a parameter point: the projective inverse divided by
    /// its scale. Fails where the scale vanishes.
    pub fn true_inverse_at(&self, u: C64, v: C64) -> Result<DenseTensor> {
        match &self.backend {
            Backend::Dense(m) => Ok(dense_inverse(m)?.0),
            Backend::Pauli(_) => {
                let inv = self.invert(InvertMode::ExactProjective)?;
                let Scale::Exact(scale) = inv.scale else {
                    unreachable!()
                };
                let c = scale.evaluate(u, v);
                let m = self.evaluate(u, v)?;
                if c.norm() < SINGULAR_RTOL * m.frobenius_norm().max(1.0) {
                    return Err(Error::Singular {
                        smallest_singular_value: smallest_singular_value(&m),
                    });
                }
                Ok(inv.matrix.evaluate(u, v)?.scale(c.inv()))
            }
        }
    }
}

/// `P13·P24` as an exact Pauli operator: each swap is `(II + XX + YY + ZZ)/2`.
fn swap_pairs_pauli() -> PauliOperator {
    let half = BivariatePolynomial::constant(GaussianRational::ratio(1, 2));
    let swap = |a: usize, b: usize| {
        let mut op = PauliOperator::zero(4);
        for letter in [Letter::I, Letter::X, Letter::Y, Letter::Z] {
            op.add_term(PauliString::uniform(letter, &[a, b]), half.clone());
        }
        op
    };
    debug_assert_eq!(SWAP_PAIRS, [2, 3, 0, 1]);
    swap(0, 2).multiply(&swap(1, 3)).expect("same register")
}

fn projective_inverse(op: &PauliOperator) -> Result<(PauliOperator, BivariatePolynomial)> {
    let a = op.coefficient(&PauliString::IDENTITY);
    let others: Vec<_> = op.terms().filter(|(s, _)| !s.is_identity()).collect();
    match others.as_slice() {
        [] if !a.is_zero() => Ok((PauliOperator::identity(op.n_sites()), a)),
        [(s, b)] => {
            let mut inverse = PauliOperator::term(op.n_sites(), PauliString::IDENTITY, a.clone());
            inverse.add_term(**s, -*b);
            let scale = &a.try_mul(&a)? - &b.try_mul(b)?;
            if scale.is_zero() {
                return Err(Error::Singular {
                    smallest_singular_value: 0.0,
                });
            }
            Ok((inverse, scale))
        }
        _ => Err(Error::Mode(format!(
            "projective inversion needs the form a·I + b·S, got {} non-identity terms",
            others.len()
        ))),
    }
}

pub(crate) fn to_nalgebra(m: &DenseTensor) -> DMatrix<C64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.entries())
}

pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> DenseTensor {
    let mut out = DenseTensor::zeros(vec![m.nrows(), m.ncols()]);
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.set(r, c, m[(r, c)]);
        }
    }
    out
}

fn singular_values(m: &DenseTensor) -> Vec<f64> {
    to_nalgebra(m).singular_values().iter().copied().collect()
}

pub fn smallest_singular_value(m: &DenseTensor) -> f64 {
    singular_values(m).into_iter().fold(f64::INFINITY, f64::min)
}

/// Condition number `σ_max / σ_min` (infinite when singular).
pub fn condition_number(m: &DenseTensor) -> f64 {
    let sv = singular_values(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn dense_inverse(m: &DenseTensor) -> Result<(DenseTensor, f64)> {
    if !m.is_square() {
        return arg(format!("cannot invert a {:?} matrix", m.shape()));
    }
    let sv = singular_values(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 || min <= SINGULAR_RTOL * max {
        return Err(Error::Singular {
            smallest_singular_value: min,
        });
    }
    let inverse = to_nalgebra(m).try_inverse().ok_or(Error::Singular {
        smallest_singular_value: min,
    })?;
    Ok((from_nalgebra(&inverse), max / min))
}
