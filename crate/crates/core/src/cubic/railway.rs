//! Row-level railway identity on three consecutive lattice rows.
//!
//! Local rows 0, 1, 2 stand for lattice rows `2n-1`, `2n`, `2n+1`; site
//! `(r, c)` with 1-based periodic column `c` has index `r·L + (c-1) mod L`.
//!
//! ```text
//! chain · lower(Ř¹) · upper(Ř²) = lower(Ř²) · upper(Ř¹) · chain'
//! ```
//!
//! `lower` covers rows 1 and 0 on columns `(2m, 2m+1)`, `upper` rows 2 and 1
//! on the same columns. The chain is `C_1·C_2···C_L` with `C_m` on
//! `(2,m)(2,m+1)(1,m)(1,m+1)`, Ř³ for even `m` and Ř⁴ for odd `m`; `chain'`
//! is either the reversed product or the same product.

use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{CubicOptions, Quadruple};
use crate::error::{arg, Error, Result};
use crate::pauli::PauliOperator;
use crate::report::{Conventions, ResidualReport};
use crate::rmatrix::Convention;
use crate::sparse::{SparseOperator, SPARSE_DIM_LIMIT};
use crate::tensor::checked_pow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainOrder {
    /// `C_L···C_1` on the right-hand side.
    Reversed,
    /// `C_1···C_L` on both sides.
    Forward,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RailwayMode {
    /// Pauli products with polynomial coefficients.
    Exact,
    /// Sparse matrices at a parameter point.
    Numeric { u: C64, v: C64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RailwayReading {
    pub order: ChainOrder,
    pub exact_zero: Option<bool>,
    pub absolute: f64,
    pub relative: f64,
}

/// Plaquette site tuples `(chain, lower, upper)` of one railway row.
pub type RailwaySites = (Vec<[usize; 4]>, Vec<[usize; 4]>, Vec<[usize; 4]>);

/// Site lists `(chain, lower, upper)` for width `l`.
pub fn railway_sites(l: usize) -> Result<RailwaySites> {
    if l < 4 || !l.is_multiple_of(2) {
        return arg(format!(
            "lattice width must be even and at least 4, got {l}"
        ));
    }
    let site = |r: usize, c: usize| r * l + (c - 1) % l;
    let chain = (1..=l)
        .map(|m| [site(2, m), site(2, m + 1), site(1, m), site(1, m + 1)])
        .collect();
    let slice = |hi: usize| {
        (1..=l / 2)
            .map(|m| {
                [
                    site(hi, 2 * m),
                    site(hi, 2 * m + 1),
                    site(hi - 1, 2 * m),
                    site(hi - 1, 2 * m + 1),
                ]
            })
            .collect()
    };
    Ok((chain, slice(1), slice(2)))
}

/// Operator algebra shared by the exact and numeric evaluations.
trait RowAlgebra: Sized {
    fn identity(n: usize) -> Result<Self>;
    fn then(&self, right: &Self) -> Result<Self>;
}

impl RowAlgebra for PauliOperator {
    fn identity(n: usize) -> Result<Self> {
        Ok(PauliOperator::identity(n))
    }
    fn then(&self, right: &Self) -> Result<Self> {
        self.multiply(right)
    }
}

impl RowAlgebra for SparseOperator {
    fn identity(n: usize) -> Result<Self> {
        SparseOperator::identity(1 << n)
    }
    fn then(&self, right: &Self) -> Result<Self> {
        self.matmul(right)
    }
}

struct Sides<T> {
    lhs: T,
    rhs_reversed: T,
    rhs_forward: T,
}

fn assemble<T: RowAlgebra>(
    n: usize,
    l: usize,
    place: impl Fn(usize, &[usize; 4]) -> Result<T>,
) -> Result<Sides<T>> {
    let (chain_sites, lower, upper) = railway_sites(l)?;
    let factors: Vec<T> = chain_sites
        .iter()
        .enumerate()
        .map(|(i, s)| place(if (i + 1) % 2 == 0 { 3 } else { 4 }, s))
        .collect::<Result<_>>()?;
    let product = |ops: &mut dyn Iterator<Item = Result<T>>| -> Result<T> {
        let mut acc = T::identity(n)?;
        for op in ops {
            acc = acc.then(&op?)?;
        }
        Ok(acc)
    };
    let slice = |k: usize, sites: &[[usize; 4]]| product(&mut sites.iter().map(|s| place(k, s)));
    let forward = product(&mut factors.iter().map(|f| f.then(&T::identity(n)?)))?;
    let reversed = product(&mut factors.iter().rev().map(|f| f.then(&T::identity(n)?)))?;
    let lhs = forward.then(&slice(1, &lower)?)?.then(&slice(2, &upper)?)?;
    let rhs_core = slice(2, &lower)?.then(&slice(1, &upper)?)?;
    Ok(Sides {
        lhs,
        rhs_reversed: rhs_core.then(&reversed)?,
        rhs_forward: rhs_core.then(&forward)?,
    })
}

/// Check the row identity for width `l` under both chain readings.
pub fn verify_railway_row(
    l: usize,
    quad: &Quadruple,
    mode: RailwayMode,
    options: CubicOptions,
) -> Result<ResidualReport> {
    let start = Instant::now();
    let n = 3 * l;
    let matrices = quad.assigned(options)?;
    if matrices.iter().any(|m| m.convention() != Convention::Check) {
        return arg("railway rows take Ř matrices");
    }
    let readings = match mode {
        RailwayMode::Exact => {
            let ops: Vec<&PauliOperator> = matrices
                .iter()
                .map(|m| {
                    m.pauli().ok_or_else(|| {
                        Error::Mode("exact railway check needs Pauli-backed matrices".into())
                    })
                })
                .collect::<Result<_>>()?;
            let sides = assemble(n, l, |k, sites| ops[k - 1].embed(sites, n))?;
            [
                (ChainOrder::Reversed, &sides.rhs_reversed),
                (ChainOrder::Forward, &sides.rhs_forward),
            ]
            .map(|(order, rhs)| -> Result<RailwayReading> {
                let diff = sides.lhs.sub(rhs)?;
                Ok(RailwayReading {
                    order,
                    exact_zero: Some(diff.is_zero()),
                    absolute: diff.len() as f64,
                    relative: if diff.is_zero() { 0.0 } else { 1.0 },
                })
            })
        }
        RailwayMode::Numeric { u, v } => {
            let dim = checked_pow(quad.d(), n)?;
            if quad.d() != 2 || dim > SPARSE_DIM_LIMIT {
                return Err(Error::Resource(format!(
                    "numeric railway rows need d = 2 and d^(3L) <= {SPARSE_DIM_LIMIT}; got d = {}, L = {l}",
                    quad.d()
                )));
            }
            let dense: Vec<_> = matrices
                .iter()
                .map(|m| m.evaluate(u, v))
                .collect::<Result<_>>()?;
            let sides = assemble(n, l, |k, sites| {
                SparseOperator::embed(&dense[k - 1], sites, n, 2)
            })?;
            [
                (ChainOrder::Reversed, &sides.rhs_reversed),
                (ChainOrder::Forward, &sides.rhs_forward),
            ]
            .map(|(order, rhs)| -> Result<RailwayReading> {
                let absolute = sides.lhs.sub(rhs)?.frobenius_norm();
                let scale = sides
                    .lhs
                    .frobenius_norm()
                    .max(rhs.frobenius_norm())
                    .max(crate::tensor::RELATIVE_FLOOR);
                Ok(RailwayReading {
                    order,
                    exact_zero: None,
                    absolute,
                    relative: absolute / scale,
                })
            })
        }
    };
    let [reversed, forward] = readings;
    let (reversed, forward) = (reversed?, forward?);
    let passing: Vec<ChainOrder> = [&reversed, &forward]
        .iter()
        .filter(|r| r.exact_zero.unwrap_or(r.relative <= 1e-12))
        .map(|r| r.order)
        .collect();
    let best = if reversed.relative <= forward.relative {
        &reversed
    } else {
        &forward
    };

    let mut inputs = quad.inputs_json(match mode {
        RailwayMode::Exact => None,
        RailwayMode::Numeric { u, v } => Some((u, v)),
    });
    inputs["L"] = json!(l);
    let mut report = ResidualReport::new("railway-row", inputs);
    report.conventions = Conventions::with_swap(options.swap_uv_assignment);
    report.absolute = best.absolute;
    report.relative = best.relative;
    if matches!(mode, RailwayMode::Exact) {
        report.exact_zero = Some(!passing.is_empty());
    }
    report.details = json!({
        "readings": [reversed, forward],
        "passing_readings": passing,
    });
    if passing.is_empty() {
        report
            .flags
            .push("no chain reading satisfies the row identity".into());
    }
    Ok(report.timed(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Variable;
    use crate::rmatrix::RMatrixFour;
    use std::collections::HashSet;

    #[test]
    fn site_lists_cover_three_rows() {
        let (chain, lower, upper) = railway_sites(4).unwrap();
        assert_eq!(chain.len(), 4);
        assert_eq!(chain[0], [8, 9, 4, 5]);
        assert_eq!(chain[3], [11, 8, 7, 4]);
        assert_eq!(lower, vec![[5, 6, 1, 2], [7, 4, 3, 0]]);
        assert_eq!(upper, vec![[9, 10, 5, 6], [11, 8, 7, 4]]);
        for slice in [&lower, &upper] {
            let sites: HashSet<usize> = slice.iter().flatten().copied().collect();
            assert_eq!(sites.len(), 8);
        }
        assert!(railway_sites(5).is_err());
        assert!(railway_sites(2).is_err());
    }

    #[test]
    fn symmetric_trivial_family_passes() {
        let id = RMatrixFour::identity_pauli();
        let a = RMatrixFour::kitaev_a(Variable::U);
        let quad = Quadruple::new(a.clone(), a, id.clone(), id).unwrap();
        let r = verify_railway_row(4, &quad, RailwayMode::Exact, CubicOptions::default()).unwrap();
        assert_eq!(r.exact_zero, Some(true));
        let numeric = RailwayMode::Numeric {
            u: C64::new(0.4, 0.0),
            v: C64::new(0.4, 0.0),
        };
        let r = verify_railway_row(4, &quad, numeric, CubicOptions::default()).unwrap();
        assert!(r.relative < 1e-14);
    }

    #[test]
    fn random_family_fails() {
        let quad = Quadruple::new(
            RMatrixFour::from_pauli(
                "1 IIII\nu XYZX\n1/3 ZIIY".parse().unwrap(),
                Convention::Check,
            )
            .unwrap(),
            RMatrixFour::from_pauli("1 IIII\nv YYXZ".parse().unwrap(), Convention::Check).unwrap(),
            RMatrixFour::from_pauli("1 IIII\nu ZXIY".parse().unwrap(), Convention::Check).unwrap(),
            RMatrixFour::identity_pauli(),
        )
        .unwrap();
        let r = verify_railway_row(4, &quad, RailwayMode::Exact, CubicOptions::default()).unwrap();
        assert_eq!(r.exact_zero, Some(false));
        assert!(!r.flags.is_empty());
    }

    #[test]
    fn exact_and_numeric_modes_agree_on_kitaev() {
        let quad = Quadruple::kitaev();
        let exact =
            verify_railway_row(4, &quad, RailwayMode::Exact, CubicOptions::default()).unwrap();
        let numeric = verify_railway_row(
            4,
            &quad,
            RailwayMode::Numeric {
                u: C64::new(0.3, 0.0),
                v: C64::new(0.7, 0.0),
            },
            CubicOptions::default(),
        )
        .unwrap();
        let numeric_passes = numeric.relative <= 1e-12;
        assert_eq!(exact.exact_zero, Some(numeric_passes));
    }

    #[test]
    fn dense_matrices_need_numeric_mode() {
        let quad = Quadruple::identity_dense(2).unwrap();
        assert!(matches!(
            verify_railway_row(4, &quad, RailwayMode::Exact, CubicOptions::default()),
            Err(Error::Mode(_))
        ));
        assert!(matches!(
            verify_railway_row(
                6,
                &quad,
                RailwayMode::Numeric {
                    u: C64::new(0.1, 0.0),
                    v: C64::new(0.1, 0.0)
                },
                CubicOptions::default()
            ),
            Err(Error::Resource(_))
        ));
    }
}
