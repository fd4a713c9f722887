//! Both sides of the cubic equations on nine sites, their residuals, the
//! braid-form Yang-Baxter baseline and the row-level railway identity.

mod railway;

pub use railway::{railway_sites, verify_railway_row, ChainOrder, RailwayMode, RailwayReading};

use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{arg, Error, Result};
use crate::pauli::{PauliOperator, Variable};
use crate::report::{Conventions, ResidualReport};
use crate::rmatrix::{Convention, RMatrixFour};
use crate::tensor::wiring::{CanonicalWiring, LHS_WIRING, RHS_WIRING};
use crate::tensor::{checked_pow, contract, frobenius_distance, DenseTensor, WiringDiagram};

/// Number of sites the cubic equations act on.
pub const CUBIC_SITES: usize = 9;

/// Largest `d^9` for which both sides are materialized densely.
pub const CUBIC_DIM_LIMIT: usize = 1 << 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lhs,
    Rhs,
}

impl Side {
    pub fn wiring(self) -> &'static CanonicalWiring {
        match self {
            Side::Lhs => &LHS_WIRING,
            Side::Rhs => &RHS_WIRING,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubicOptions {
    /// Let Ř¹ carry `v` and Ř² carry `u` instead of the default assignment.
    #[serde(default)]
    pub swap_uv_assignment: bool,
}

/// The four R-matrices `(Ř¹, Ř², Ř³, Ř⁴)` of one cubic equation.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadruple {
    pub r1: RMatrixFour,
    pub r2: RMatrixFour,
    pub r3: RMatrixFour,
    pub r4: RMatrixFour,
}

impl Quadruple {
    pub fn new(r1: RMatrixFour, r2: RMatrixFour, r3: RMatrixFour, r4: RMatrixFour) -> Result<Self> {
        let d = r1.d();
        if [&r2, &r3, &r4].iter().any(|m| m.d() != d) {
            return arg("all four R-matrices must share the local dimension");
        }
        Ok(Self { r1, r2, r3, r4 })
    }

    /// `(Ř_A(u), Ř_B(v), Ř_B(v), Ř_A⁻¹(u))`.
    pub fn kitaev() -> Self {
        Self {
            r1: RMatrixFour::kitaev_a(Variable::U),
            r2: RMatrixFour::kitaev_b(Variable::V),
            r3: RMatrixFour::kitaev_b(Variable::V),
            r4: RMatrixFour::kitaev_a_inv(Variable::U),
        }
    }

    pub fn identity_pauli() -> Self {
        let id = RMatrixFour::identity_pauli();
        Self {
            r1: id.clone(),
            r2: id.clone(),
            r3: id.clone(),
            r4: id,
        }
    }

    pub fn identity_dense(d: usize) -> Result<Self> {
        let id = RMatrixFour::identity_dense(d)?;
        Ok(Self {
            r1: id.clone(),
            r2: id.clone(),
            r3: id.clone(),
            r4: id,
        })
    }

    pub fn d(&self) -> usize {
        self.r1.d()
    }

    pub fn matrices(&self) -> [&RMatrixFour; 4] {
        [&self.r1, &self.r2, &self.r3, &self.r4]
    }

    pub fn is_pauli(&self) -> bool {
        self.matrices().iter().all(|m| m.pauli().is_some())
    }

    /// The matrices with the u/v assignment applied to Ř¹ and Ř².
    fn assigned(&self, options: CubicOptions) -> Result<[RMatrixFour; 4]> {
        for (k, m) in self.matrices().iter().enumerate() {
            if m.convention() != Convention::Check {
                return arg(format!(
                    "R{} is in the plain convention; the cubic equations take Ř",
                    k + 1
                ));
            }
        }
        let swap = |m: &RMatrixFour| {
            if options.swap_uv_assignment {
                m.swap_variables()
            } else {
                m.clone()
            }
        };
        Ok([
            swap(&self.r1),
            swap(&self.r2),
            self.r3.clone(),
            self.r4.clone(),
        ])
    }

    fn inputs_json(&self, u: Option<(C64, C64)>) -> serde_json::Value {
        let describe = |m: &RMatrixFour| match m.pauli() {
            Some(op) => json!({"backend": "pauli", "terms": op.to_string()}),
            None => json!({"backend": "dense", "d": m.d()}),
        };
        let mut v = json!({
            "d": self.d(),
            "r1": describe(&self.r1),
            "r2": describe(&self.r2),
            "r3": describe(&self.r3),
            "r4": describe(&self.r4),
        });
        if let Some((u, v_)) = u {
            v["u"] = json!([u.re, u.im]);
            v["v"] = json!([v_.re, v_.im]);
        }
        v
    }
}

fn guard_dense(d: usize) -> Result<usize> {
    let dim = checked_pow(d, CUBIC_SITES)?;
    if dim > CUBIC_DIM_LIMIT {
        return Err(Error::Resource(format!(
            "dense cubic sides need a {dim}x{dim} matrix; limit is {CUBIC_DIM_LIMIT}"
        )));
    }
    Ok(dim)
}

/// One side of the cubic equations at `(u, v)` as a `d^9 x d^9` matrix, by
/// contracting the canonical wiring. Rows follow `γ₁..γ₉`, columns `α₁..α₉`.
pub fn build_side(
    side: Side,
    quad: &Quadruple,
    u: C64,
    v: C64,
    options: CubicOptions,
) -> Result<DenseTensor> {
    let d = quad.d();
    guard_dense(d)?;
    let [r1, r2, r3, r4] = quad.assigned(options)?;
    let bound = [
        r1.evaluate(u, v)?,
        r2.evaluate(u, v)?,
        r3.evaluate(u, v)?,
        r4.evaluate(u, v)?,
    ];
    contract(
        &side
            .wiring()
            .bind(d, [&bound[0], &bound[1], &bound[2], &bound[3]]),
    )
}

/// One side as an exact operator on nine qubits.
pub fn build_side_symbolic(
    side: Side,
    quad: &Quadruple,
    options: CubicOptions,
) -> Result<PauliOperator> {
    let matrices = quad.assigned(options)?;
    let mut acc = PauliOperator::identity(CUBIC_SITES);
    for (k, sites) in side.wiring().site_sequence() {
        let op = matrices[k - 1]
            .pauli()
            .ok_or_else(|| Error::Argument(format!("R{k} is not Pauli-backed")))?;
        acc = op.embed(&sites, CUBIC_SITES)?.multiply(&acc)?;
    }
    Ok(acc)
}

/// `LHS - RHS` exactly; zero iff the equations hold for every `(u, v)`.
pub fn cubic_residual_symbolic(quad: &Quadruple, options: CubicOptions) -> Result<PauliOperator> {
    if !quad.is_pauli() {
        return arg("the symbolic residual needs four Pauli-backed R-matrices");
    }
    build_side_symbolic(Side::Lhs, quad, options)?.sub(&build_side_symbolic(
        Side::Rhs,
        quad,
        options,
    )?)
}

/// Scalars of projective intertwiners that vanish at `(u, v)`.
fn singular_scale_flags(quad: &Quadruple, u: C64, v: C64) -> Vec<String> {
    [(3, &quad.r3), (4, &quad.r4)]
        .into_iter()
        .filter_map(|(k, m)| {
            let c = m.projective_scale()?.evaluate(u, v);
            (c.norm() < 1e-12).then(|| format!("R{k} projective scale vanishes at this point"))
        })
        .collect()
}

pub fn cubic_residual(
    quad: &Quadruple,
    u: C64,
    v: C64,
    options: CubicOptions,
) -> Result<ResidualReport> {
    let start = Instant::now();
    let lhs = build_side(Side::Lhs, quad, u, v, options)?;
    let rhs = build_side(Side::Rhs, quad, u, v, options)?;
    let absolute = frobenius_distance(&lhs, &rhs)?;
    let scale = lhs.frobenius_norm().max(rhs.frobenius_norm());
    let mut report =
        ResidualReport::new("cubic", quad.inputs_json(Some((u, v)))).numeric(absolute, scale);
    report.conventions = Conventions::with_swap(options.swap_uv_assignment);
    report.flags = singular_scale_flags(quad, u, v);
    report.details = json!({"lhs_norm": lhs.frobenius_norm(), "rhs_norm": rhs.frobenius_norm()});
    Ok(report.timed(start))
}

pub fn cubic_report_symbolic(quad: &Quadruple, options: CubicOptions) -> Result<ResidualReport> {
    let start = Instant::now();
    let diff = cubic_residual_symbolic(quad, options)?;
    let mut report =
        ResidualReport::new("cubic-symbolic", quad.inputs_json(None)).exact(diff.is_zero());
    report.conventions = Conventions::with_swap(options.swap_uv_assignment);
    report.details = json!({"difference_terms": diff.len()});
    Ok(report.timed(start))
}

/// `‖Ř₁₂Ř₂₃Ř₁₂ - Ř₂₃Ř₁₂Ř₂₃‖` on three sites, via the contraction engine.
pub fn yang_baxter_residual(r: &DenseTensor, d: usize) -> Result<f64> {
    let dd = checked_pow(d, 2)?;
    if r.shape() != [dd, dd] {
        return arg(format!(
            "expected a {dd}x{dd} two-site matrix, got {:?}",
            r.shape()
        ));
    }
    let (a, b) = (vec![0, 1], vec![1, 2]);
    let circuit = |order: [&Vec<usize>; 3]| {
        let gates: Vec<_> = order.iter().map(|s| (r.clone(), (*s).clone())).collect();
        contract(&WiringDiagram::from_circuit(d, 3, &gates))
    };
    let lhs = circuit([&a, &b, &a])?;
    let rhs = circuit([&b, &a, &b])?;
    frobenius_distance(&lhs, &rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{Letter, PauliString};
    use crate::tensor::{embed_on_sites, permutation_operator, relative_distance};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn random_dense(rng: &mut impl Rng, dim: usize) -> DenseTensor {
        let entries = (0..dim * dim)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        DenseTensor::from_matrix(dim, dim, entries).unwrap()
    }

    fn dense_quad(rng: &mut impl Rng) -> Quadruple {
        let m = |rng: &mut _| {
            RMatrixFour::from_dense(random_dense(rng, 16), 2, Convention::Check).unwrap()
        };
        Quadruple::new(m(rng), m(rng), m(rng), m(rng)).unwrap()
    }

    #[test]
    fn identity_quadruple_gives_identity_sides() {
        let quad = Quadruple::identity_dense(2).unwrap();
        for side in [Side::Lhs, Side::Rhs] {
            let m = build_side(side, &quad, c(0.2), c(0.4), CubicOptions::default()).unwrap();
            assert_eq!(m, DenseTensor::identity(512));
        }
        let r = cubic_residual(&quad, c(0.2), c(0.4), CubicOptions::default()).unwrap();
        assert_eq!(r.absolute, 0.0);
        assert!(
            cubic_residual_symbolic(&Quadruple::identity_pauli(), CubicOptions::default())
                .unwrap()
                .is_zero()
        );
    }

    #[test]
    fn lhs_with_trivial_r1_r2_is_embedded_intertwiners() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (r3, r4) = (random_dense(&mut rng, 16), random_dense(&mut rng, 16));
        let id = RMatrixFour::identity_dense(2).unwrap();
        let quad = Quadruple::new(
            id.clone(),
            id,
            RMatrixFour::from_dense(r3.clone(), 2, Convention::Check).unwrap(),
            RMatrixFour::from_dense(r4.clone(), 2, Convention::Check).unwrap(),
        )
        .unwrap();
        let lhs = build_side(Side::Lhs, &quad, c(0.0), c(0.0), CubicOptions::default()).unwrap();
        let expected = embed_on_sites(&r3, &[3, 0, 4, 1], 9, 2)
            .unwrap()
            .matmul(&embed_on_sites(&r4, &[4, 1, 5, 2], 9, 2).unwrap())
            .unwrap();
        assert!(relative_distance(&lhs, &expected).unwrap() < 1e-14);
    }

    #[test]
    fn kitaev_identity_is_exact() {
        let diff = cubic_residual_symbolic(&Quadruple::kitaev(), CubicOptions::default()).unwrap();
        assert!(diff.is_zero());
        let report = cubic_report_symbolic(&Quadruple::kitaev(), CubicOptions::default()).unwrap();
        assert_eq!(report.exact_zero, Some(true));
    }

    #[test]
    fn kitaev_numeric_residual_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let (u, v) = (
                c(rng.random_range(-2.0..2.0)),
                c(rng.random_range(-2.0..2.0)),
            );
            let r = cubic_residual(&Quadruple::kitaev(), u, v, CubicOptions::default()).unwrap();
            assert!(r.relative < 1e-12, "{}", r.relative);
        }
    }

    #[test]
    fn swapped_assignment_breaks_kitaev_identity() {
        let opts = CubicOptions {
            swap_uv_assignment: true,
        };
        assert!(!cubic_residual_symbolic(&Quadruple::kitaev(), opts)
            .unwrap()
            .is_zero());
        let r = cubic_residual(&Quadruple::kitaev(), c(0.3), c(0.7), opts).unwrap();
        assert!(r.relative > 1e-3);
        assert_eq!(r.conventions.uv_assignment, "R1(v),R2(u)");
    }

    #[test]
    fn missing_inverse_is_detected() {
        let mut quad = Quadruple::kitaev();
        quad.r4 = RMatrixFour::kitaev_a(Variable::U);
        let diff = cubic_residual_symbolic(&quad, CubicOptions::default()).unwrap();
        assert!(!diff.is_zero());
        assert!(
            diff.evaluate_dense(c(0.3), c(0.7))
                .unwrap()
                .frobenius_norm()
                > 1e-3
        );
        let r = cubic_residual(&quad, c(0.3), c(0.7), CubicOptions::default()).unwrap();
        assert!(r.absolute > 1e-3);
    }

    #[test]
    fn symbolic_and_numeric_backends_agree() {
        let mut quad = Quadruple::kitaev();
        quad.r3 = RMatrixFour::from_pauli(
            "1 IIII\nv ZZZZ\n1/2*u XIYI".parse().unwrap(),
            Convention::Check,
        )
        .unwrap();
        let (u, v) = (c(0.35), c(-0.8));
        for side in [Side::Lhs, Side::Rhs] {
            let exact = build_side_symbolic(side, &quad, CubicOptions::default()).unwrap();
            let numeric = build_side(side, &quad, u, v, CubicOptions::default()).unwrap();
            let dense = crate::sparse::SparseOperator::from_pauli(&exact, u, v)
                .unwrap()
                .to_dense()
                .unwrap();
            assert!(relative_distance(&dense, &numeric).unwrap() < 1e-12);
        }
    }

    #[test]
    fn intertwiner_scaling_leaves_relative_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let quad = dense_quad(&mut rng);
        let base = cubic_residual(&quad, c(0.0), c(0.0), CubicOptions::default()).unwrap();
        let mut scaled = quad.clone();
        scaled.r3 = RMatrixFour::from_dense(
            quad.r3
                .evaluate(c(0.0), c(0.0))
                .unwrap()
                .scale(C64::new(-2.5, 1.0)),
            2,
            Convention::Check,
        )
        .unwrap();
        let other = cubic_residual(&scaled, c(0.0), c(0.0), CubicOptions::default()).unwrap();
        assert!((base.relative - other.relative).abs() < 1e-12);
    }

    #[test]
    fn residual_grows_linearly_with_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let h = random_dense(&mut rng, 16);
        let herm = h.add(&h.adjoint().unwrap()).unwrap().scale(c(0.5));
        let (u, v) = (c(0.3), c(0.7));
        let r4 = Quadruple::kitaev().r4.evaluate(u, v).unwrap();
        let mut points = Vec::new();
        for eps in [1e-4, 1e-3, 1e-2, 1e-1] {
            let mut quad = Quadruple::kitaev();
            quad.r4 =
                RMatrixFour::from_dense(r4.add(&herm.scale(c(eps))).unwrap(), 2, Convention::Check)
                    .unwrap();
            let r = cubic_residual(&quad, u, v, CubicOptions::default()).unwrap();
            points.push((eps.ln(), r.absolute.ln()));
        }
        let n = points.len() as f64;
        let (sx, sy) = points
            .iter()
            .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / n, sy / n);
        let slope = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / points.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
        assert!((slope - 1.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn sides_are_equivariant_under_site_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let quad = dense_quad(&mut rng);
        let lhs = build_side(Side::Lhs, &quad, c(0.0), c(0.0), CubicOptions::default()).unwrap();
        // Relabel the nine spaces by a permutation; conjugating the side by the
        // same permutation operator must give the side built on relabeled wiring.
        let perm = [4, 7, 1, 0, 8, 2, 6, 3, 5];
        let p = permutation_operator(&perm, 2).unwrap();
        let conjugated = p
            .matmul(&lhs)
            .unwrap()
            .matmul(&p.transpose().unwrap())
            .unwrap();
        let mut relabeled = crate::tensor::DenseTensor::identity(512);
        let mats: Vec<_> = quad
            .matrices()
            .iter()
            .map(|m| m.evaluate(c(0.0), c(0.0)).unwrap())
            .collect();
        for (k, sites) in Side::Lhs.wiring().site_sequence() {
            let moved: Vec<usize> = sites.iter().map(|&s| perm[s]).collect();
            relabeled = embed_on_sites(&mats[k - 1], &moved, 9, 2)
                .unwrap()
                .matmul(&relabeled)
                .unwrap();
        }
        assert!(relative_distance(&conjugated, &relabeled).unwrap() < 1e-13);
    }

    #[test]
    fn plain_convention_rejected() {
        let mut quad = Quadruple::identity_dense(2).unwrap();
        quad.r2 = quad.r2.to_plain().unwrap();
        assert!(matches!(
            build_side(Side::Lhs, &quad, c(0.0), c(0.0), CubicOptions::default()),
            Err(Error::Argument(_))
        ));
        let dense = Quadruple::identity_dense(2).unwrap();
        assert!(matches!(
            cubic_residual_symbolic(&dense, CubicOptions::default()),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            build_side(
                Side::Lhs,
                &Quadruple::identity_dense(3).unwrap(),
                c(0.0),
                c(0.0),
                CubicOptions::default()
            ),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn projective_scale_flagged_at_unit_parameter() {
        let r = cubic_residual(
            &Quadruple::kitaev(),
            c(1.0),
            c(0.5),
            CubicOptions::default(),
        )
        .unwrap();
        assert!(r.flags.iter().any(|f| f.contains("R4")));
        assert!(r.relative < 1e-12);
    }

    #[test]
    fn yang_baxter_baseline() {
        let swap = permutation_operator(&[1, 0], 2).unwrap();
        assert_eq!(yang_baxter_residual(&swap, 2).unwrap(), 0.0);
        assert_eq!(
            yang_baxter_residual(&DenseTensor::identity(4), 2).unwrap(),
            0.0
        );
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(yang_baxter_residual(&random_dense(&mut rng, 4), 2).unwrap() > 1e-6);
        assert!(yang_baxter_residual(&DenseTensor::identity(8), 2).is_err());
    }

    #[test]
    fn kitaev_sides_share_support() {
        let lhs =
            build_side_symbolic(Side::Lhs, &Quadruple::kitaev(), CubicOptions::default()).unwrap();
        let site7 = 1u64 << 6;
        assert!(lhs.strings().iter().all(|s| s.support() & site7 == 0));
        let zs = PauliString::uniform(Letter::Z, &[4, 5, 7, 8]);
        assert!(!lhs.coefficient(&zs).is_zero());
    }
}
