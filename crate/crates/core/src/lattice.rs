//! Plane transfer matrices on an `L x L` torus.
//!
//! Sites `(n, m)` with `n, m ∈ 1..=L` are numbered `(n-1)·L + (m-1)`, indices
//! taken modulo `L`. Dark plaquettes sit on `(2n,2m)(2n,2m+1)(2n-1,2m)(2n-1,2m+1)`.
//! White plaquettes come in two layouts, see [`Layout`].

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{arg, Error, Result};
use crate::pauli::{BivariatePolynomial, Letter, PauliOperator, PauliString, Variable, MAX_SITES};
use crate::report::ResidualReport;
use crate::rmatrix::{Convention, RMatrixFour};
use crate::sparse::{SparseOperator, SPARSE_DIM_LIMIT};
use crate::tensor::checked_pow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub l: usize,
    pub d: usize,
}

impl LatticeSpec {
    pub fn new(l: usize, d: usize) -> Result<Self> {
        if l < 4 || !l.is_multiple_of(2) {
            return arg(format!("lattice size must be even and at least 4, got {l}"));
        }
        if d < 2 {
            return arg(format!("local dimension must be at least 2, got {d}"));
        }
        Ok(Self { l, d })
    }

    pub fn sites(&self) -> usize {
        self.l * self.l
    }

    /// Index of the 1-based periodic site `(n, m)`.
    pub fn site(&self, n: isize, m: isize) -> usize {
        let l = self.l as isize;
        ((n - 1).rem_euclid(l) * l + (m - 1).rem_euclid(l)) as usize
    }
}

/// Column placement of the white plaquettes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// `(2n+1,2m)(2n+1,2m+1)(2n,2m)(2n,2m+1)`: each white plaquette shares two
    /// sites with a dark one.
    #[default]
    Stacked,
    /// `(2n+1,2m-1)(2n+1,2m)(2n,2m-1)(2n,2m)`: white plaquettes shifted by one
    /// column, sharing a single site with each neighbouring dark plaquette.
    Staggered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanKind {
    Dark,
    White,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementPlan {
    pub layout: Layout,
    pub dark: Vec<[usize; 4]>,
    pub white: Vec<[usize; 4]>,
}

impl PlacementPlan {
    pub fn plaquettes(&self, kind: PlanKind) -> &[[usize; 4]] {
        match kind {
            PlanKind::Dark => &self.dark,
            PlanKind::White => &self.white,
        }
    }
}

pub fn placement_plan(spec: &LatticeSpec, layout: Layout) -> PlacementPlan {
    let half = (spec.l / 2) as isize;
    let shift = match layout {
        Layout::Stacked => 0,
        Layout::Staggered => 1,
    };
    let mut dark = Vec::new();
    let mut white = Vec::new();
    for n in 1..=half {
        for m in 1..=half {
            let (r, c) = (2 * n, 2 * m);
            dark.push([
                spec.site(r, c),
                spec.site(r, c + 1),
                spec.site(r - 1, c),
                spec.site(r - 1, c + 1),
            ]);
            let c = c - shift;
            white.push([
                spec.site(r + 1, c),
                spec.site(r + 1, c + 1),
                spec.site(r, c),
                spec.site(r, c + 1),
            ]);
        }
    }
    PlacementPlan {
        layout,
        dark,
        white,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TransferBackend {
    Pauli(PauliOperator),
    /// Numeric, parameters bound.
    Sparse(SparseOperator),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    pub spec: LatticeSpec,
    pub backend: TransferBackend,
}

impl TransferMatrix {
    pub fn pauli(&self) -> Option<&PauliOperator> {
        match &self.backend {
            TransferBackend::Pauli(op) => Some(op),
            TransferBackend::Sparse(_) => None,
        }
    }

    pub fn sparse(&self) -> Option<&SparseOperator> {
        match &self.backend {
            TransferBackend::Sparse(op) => Some(op),
            TransferBackend::Pauli(_) => None,
        }
    }

    /// `self · other`.
    pub fn then(&self, other: &Self) -> Result<Self> {
        let backend = match (&self.backend, &other.backend) {
            (TransferBackend::Pauli(a), TransferBackend::Pauli(b)) => {
                TransferBackend::Pauli(a.multiply(b)?)
            }
            (TransferBackend::Sparse(a), TransferBackend::Sparse(b)) => {
                TransferBackend::Sparse(a.matmul(b)?)
            }
            _ => {
                return Err(Error::Mode(
                    "cannot mix exact and numeric transfer matrices".into(),
                ))
            }
        };
        Ok(Self {
            spec: self.spec,
            backend,
        })
    }

    /// Numeric value of an exact transfer matrix.
    pub fn at(&self, u: C64, v: C64) -> Result<Self> {
        let backend = match &self.backend {
            TransferBackend::Pauli(op) => {
                TransferBackend::Sparse(SparseOperator::from_pauli(op, u, v)?)
            }
            TransferBackend::Sparse(m) => TransferBackend::Sparse(m.clone()),
        };
        Ok(Self {
            spec: self.spec,
            backend,
        })
    }
}

fn mapped(tuple: &[usize; 4], leg_order: Option<[usize; 4]>) -> Result<[usize; 4]> {
    let Some(order) = leg_order else {
        return Ok(*tuple);
    };
    let mut seen = [false; 4];
    for &j in &order {
        if j >= 4 || std::mem::replace(&mut seen[j], true) {
            return arg(format!("leg order {order:?} is not a permutation of 0..4"));
        }
    }
    Ok(order.map(|j| tuple[j]))
}

/// Product of `r` over the plaquettes of one plan. Leg `j` of `r` sits on
/// `tuple[leg_order[j]]` (default: the identity order). Pauli-backed `r`
/// gives an exact matrix, dense `r` a numeric one.
pub fn build_transfer(
    spec: &LatticeSpec,
    plan: &PlacementPlan,
    kind: PlanKind,
    r: &RMatrixFour,
    leg_order: Option<[usize; 4]>,
) -> Result<TransferMatrix> {
    if r.convention() != Convention::Check {
        return arg("transfer matrices are built from Ř");
    }
    if r.d() != spec.d {
        return arg(format!(
            "R-matrix has d = {}, lattice has d = {}",
            r.d(),
            spec.d
        ));
    }
    let n = spec.sites();
    let backend = match r.pauli() {
        Some(op) => {
            if n > MAX_SITES {
                return Err(Error::Resource(format!(
                    "{n} sites exceed the {MAX_SITES}-site Pauli register"
                )));
            }
            let mut acc = PauliOperator::identity(n);
            for tuple in plan.plaquettes(kind) {
                acc = acc.multiply(&op.embed(&mapped(tuple, leg_order)?, n)?)?;
            }
            TransferBackend::Pauli(acc)
        }
        None => {
            let local = r.evaluate(C64::new(0.0, 0.0), C64::new(0.0, 0.0))?;
            let mut acc = SparseOperator::identity(dense_dim(spec)?)?;
            for tuple in plan.plaquettes(kind) {
                acc = acc.matmul(&SparseOperator::embed(
                    &local,
                    &mapped(tuple, leg_order)?,
                    n,
                    spec.d,
                )?)?;
            }
            TransferBackend::Sparse(acc)
        }
    };
    Ok(TransferMatrix {
        spec: *spec,
        backend,
    })
}

/// Numeric transfer matrix at `(u, v)` built from embedded numeric plaquettes.
pub fn build_transfer_at(
    spec: &LatticeSpec,
    plan: &PlacementPlan,
    kind: PlanKind,
    r: &RMatrixFour,
    u: C64,
    v: C64,
    leg_order: Option<[usize; 4]>,
) -> Result<TransferMatrix> {
    let local = RMatrixFour::from_dense(r.evaluate(u, v)?, r.d(), r.convention())?;
    build_transfer(spec, plan, kind, &local, leg_order)
}

fn dense_dim(spec: &LatticeSpec) -> Result<usize> {
    let dim = checked_pow(spec.d, spec.sites())?;
    if dim > SPARSE_DIM_LIMIT {
        return Err(Error::Resource(format!(
            "numeric transfer matrices are limited to dimension {SPARSE_DIM_LIMIT}; L = {} needs {dim}",
            spec.l
        )));
    }
    Ok(dim)
}

/// `(T_A, T_B)`: `1 + x·X⊗4` on white plaquettes and `1 + x·Z⊗4` on dark ones.
pub fn kitaev_transfer(
    spec: &LatticeSpec,
    layout: Layout,
    param: Variable,
) -> Result<(TransferMatrix, TransferMatrix)> {
    let plan = placement_plan(spec, layout);
    Ok((
        build_transfer(
            spec,
            &plan,
            PlanKind::White,
            &RMatrixFour::kitaev_a(param),
            None,
        )?,
        build_transfer(
            spec,
            &plan,
            PlanKind::Dark,
            &RMatrixFour::kitaev_b(param),
            None,
        )?,
    ))
}

/// `[T1, T2]`: exact zero test for Pauli matrices, Frobenius norm for numeric ones.
pub fn commutator_norm(t1: &TransferMatrix, t2: &TransferMatrix) -> Result<ResidualReport> {
    let start = Instant::now();
    if t1.spec != t2.spec {
        return arg("transfer matrices live on different lattices");
    }
    let inputs = json!({"L": t1.spec.l, "d": t1.spec.d});
    let report = match (&t1.backend, &t2.backend) {
        (TransferBackend::Pauli(a), TransferBackend::Pauli(b)) => {
            let c = a.commutator(b)?;
            let mut r = ResidualReport::new("transfer-commutator", inputs).exact(c.is_zero());
            r.absolute = c.len() as f64;
            r.relative = if c.is_zero() { 0.0 } else { 1.0 };
            r.details = json!({"commutator_terms": c.len()});
            r
        }
        (TransferBackend::Sparse(a), TransferBackend::Sparse(b)) => {
            let ab = a.matmul(b)?;
            let ba = b.matmul(a)?;
            let scale = ab.frobenius_norm().max(ba.frobenius_norm());
            ResidualReport::new("transfer-commutator", inputs)
                .numeric(ab.sub(&ba)?.frobenius_norm(), scale)
        }
        _ => {
            return Err(Error::Mode(
                "cannot mix exact and numeric transfer matrices".into(),
            ))
        }
    };
    Ok(report.timed(start))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianReport {
    pub layout: Layout,
    /// Degree-one coefficient of `T_A(u)·T_B(u)` in the Pauli text format.
    pub h1: String,
    pub terms: usize,
    pub identity_at_degree_zero: bool,
    pub matches_plaquette_sum: bool,
    /// Every pair of degree-one terms commutes.
    pub all_terms_commute: bool,
    pub anticommuting_pairs: usize,
    /// `T_A·T_B` and `T_B·T_A` agree at degree one.
    pub order_independent: bool,
}

/// Degree-one part of `T_A(u)·T_B(u)` for the Kitaev family, compared with
/// `Σ_white X⊗4 + Σ_dark Z⊗4`.
pub fn extract_hamiltonian(
    spec: &LatticeSpec,
    layout: Layout,
) -> Result<(PauliOperator, HamiltonianReport)> {
    let (ta, tb) = kitaev_transfer(spec, layout, Variable::U)?;
    let (ta, tb) = (ta.pauli().expect("exact"), tb.pauli().expect("exact"));
    let product = ta.multiply(tb)?;
    let reversed = tb.multiply(ta)?;
    let h1 = product.series_coefficient(1, 0);

    let plan = placement_plan(spec, layout);
    let n = spec.sites();
    let mut expected = PauliOperator::zero(n);
    for (kind, letter) in [(PlanKind::White, Letter::X), (PlanKind::Dark, Letter::Z)] {
        for tuple in plan.plaquettes(kind) {
            expected.add_term(
                PauliString::uniform(letter, tuple),
                BivariatePolynomial::one(),
            );
        }
    }
    let strings = h1.strings();
    let mut anticommuting = 0;
    for (i, a) in strings.iter().enumerate() {
        anticommuting += strings[i + 1..]
            .iter()
            .filter(|b| !a.commutes_with(b))
            .count();
    }
    let report = HamiltonianReport {
        layout,
        h1: h1.to_string(),
        terms: h1.len(),
        identity_at_degree_zero: product.series_coefficient(0, 0) == PauliOperator::identity(n),
        matches_plaquette_sum: h1 == expected,
        all_terms_commute: anticommuting == 0,
        anticommuting_pairs: anticommuting,
        order_independent: reversed.series_coefficient(1, 0) == h1,
    };
    Ok((h1, report))
}

#[derive(Clone, Debug, PartialEq)]
pub enum PartitionValue {
    Exact(BivariatePolynomial),
    Numeric(C64),
}

/// Largest number of Pauli terms any intermediate power may hold.
pub const PARTITION_TERM_LIMIT: usize = 1 << 16;

/// `Tr T^N`.
pub fn partition_trace(t: &TransferMatrix, power: u32) -> Result<PartitionValue> {
    match &t.backend {
        TransferBackend::Pauli(op) => {
            let mut acc = PauliOperator::identity(op.n_sites());
            for _ in 0..power {
                if acc.len().saturating_mul(op.len())
                    > PARTITION_TERM_LIMIT.saturating_mul(PARTITION_TERM_LIMIT)
                {
                    return Err(Error::Resource(
                        "partition power exceeds the term budget".into(),
                    ));
                }
                acc = acc.multiply(op)?;
                if acc.len() > PARTITION_TERM_LIMIT {
                    return Err(Error::Resource(format!(
                        "T^N holds more than {PARTITION_TERM_LIMIT} terms"
                    )));
                }
            }
            // Trace of a string is d^n for the identity and 0 otherwise.
            Ok(PartitionValue::Exact(acc.trace()))
        }
        TransferBackend::Sparse(m) => {
            let mut acc = SparseOperator::identity(m.dim())?;
            for _ in 0..power {
                acc = acc.matmul(m)?;
            }
            Ok(PartitionValue::Numeric(acc.trace()))
        }
    }
}

/// Site-usage count per plan, for covering checks.
pub fn site_usage(plan: &PlacementPlan, kind: PlanKind) -> BTreeMap<usize, usize> {
    let mut count = BTreeMap::new();
    for &s in plan.plaquettes(kind).iter().flatten() {
        *count.entry(s).or_insert(0) += 1;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::GaussianRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec4() -> LatticeSpec {
        LatticeSpec::new(4, 2).unwrap()
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(LatticeSpec::new(2, 2).is_err());
        assert!(LatticeSpec::new(5, 2).is_err());
        assert!(LatticeSpec::new(6, 1).is_err());
    }

    #[test]
    fn plans_cover_every_site_once() {
        for layout in [Layout::Stacked, Layout::Staggered] {
            for l in [4, 6, 8] {
                let spec = LatticeSpec::new(l, 2).unwrap();
                let plan = placement_plan(&spec, layout);
                for kind in [PlanKind::Dark, PlanKind::White] {
                    assert_eq!(plan.plaquettes(kind).len(), l * l / 4);
                    let usage = site_usage(&plan, kind);
                    assert_eq!(usage.len(), l * l);
                    assert!(usage.values().all(|&k| k == 1));
                }
            }
        }
    }

    #[test]
    fn plan_tuples_at_l4() {
        let plan = placement_plan(&spec4(), Layout::Stacked);
        assert_eq!(plan.dark[0], [5, 6, 1, 2]);
        assert_eq!(plan.white[0], [9, 10, 5, 6]);
        let staggered = placement_plan(&spec4(), Layout::Staggered);
        assert_eq!(staggered.white[0], [8, 9, 4, 5]);
        assert_eq!(staggered.dark, plan.dark);
    }

    #[test]
    fn plan_is_periodic_under_half_shift() {
        for l in [4, 6, 8] {
            let spec = LatticeSpec::new(l, 2).unwrap();
            let plan = placement_plan(&spec, Layout::Stacked);
            let half = (l / 2) as isize;
            let mut shifted = Vec::new();
            for n in 1 + half..=2 * half {
                for m in 1..=half {
                    let (r, c) = (2 * n, 2 * m);
                    shifted.push([
                        spec.site(r, c),
                        spec.site(r, c + 1),
                        spec.site(r - 1, c),
                        spec.site(r - 1, c + 1),
                    ]);
                }
            }
            assert_eq!(shifted, plan.dark);
        }
    }

    #[test]
    fn transfer_at_zero_is_identity() {
        let (ta, tb) = kitaev_transfer(&spec4(), Layout::Stacked, Variable::U).unwrap();
        for t in [&ta, &tb] {
            let p = t.pauli().unwrap();
            let at0 = p.map_coefficients(|c| BivariatePolynomial::constant(c.coefficient(0, 0)));
            assert_eq!(at0, PauliOperator::identity(16));
        }
    }

    #[test]
    fn top_coefficient_is_product_of_plaquettes() {
        let (ta, _) = kitaev_transfer(&spec4(), Layout::Stacked, Variable::U).unwrap();
        let top = ta.pauli().unwrap().series_coefficient(4, 0);
        // Four disjoint X plaquettes covering every site.
        let all_x = PauliString::uniform(Letter::X, &(0..16).collect::<Vec<_>>());
        assert_eq!(
            top,
            PauliOperator::term(16, all_x, BivariatePolynomial::one())
        );
        // Every coefficient is a nonnegative integer polynomial.
        for (_, poly) in ta.pauli().unwrap().terms() {
            for (_, coeff) in poly.terms() {
                assert!(
                    coeff.im == Default::default()
                        && coeff.re.is_integer()
                        && coeff.re > Default::default()
                );
            }
        }
    }

    #[test]
    fn plaquette_order_is_irrelevant() {
        let spec = spec4();
        let mut plan = placement_plan(&spec, Layout::Stacked);
        let r =
            RMatrixFour::from_pauli("1 IIII\nu XYZI\nv ZZYX".parse().unwrap(), Convention::Check)
                .unwrap();
        let forward = build_transfer(&spec, &plan, PlanKind::Dark, &r, None).unwrap();
        plan.dark.reverse();
        plan.dark.swap(0, 1);
        let shuffled = build_transfer(&spec, &plan, PlanKind::Dark, &r, None).unwrap();
        assert_eq!(forward, shuffled);
    }

    #[test]
    fn leg_order_moves_legs() {
        let spec = spec4();
        let plan = placement_plan(&spec, Layout::Stacked);
        let r =
            RMatrixFour::from_pauli("1 IIII\nu XIII".parse().unwrap(), Convention::Check).unwrap();
        let t = build_transfer(&spec, &plan, PlanKind::Dark, &r, Some([2, 0, 1, 3])).unwrap();
        let x_on = PauliString::uniform(Letter::X, &[plan.dark[0][2]]);
        assert!(!t.pauli().unwrap().coefficient(&x_on).is_zero());
        assert!(build_transfer(&spec, &plan, PlanKind::Dark, &r, Some([0, 0, 1, 2])).is_err());
        let kitaev = RMatrixFour::kitaev_a(Variable::U);
        assert_eq!(
            build_transfer(&spec, &plan, PlanKind::White, &kitaev, Some([3, 1, 0, 2])).unwrap(),
            build_transfer(&spec, &plan, PlanKind::White, &kitaev, None).unwrap()
        );
    }

    #[test]
    fn exact_and_numeric_transfer_agree() {
        let spec = spec4();
        let plan = placement_plan(&spec, Layout::Stacked);
        let r = RMatrixFour::kitaev_a(Variable::U);
        let exact = build_transfer(&spec, &plan, PlanKind::White, &r, None).unwrap();
        let numeric =
            build_transfer_at(&spec, &plan, PlanKind::White, &r, c(0.3), c(0.0), None).unwrap();
        let diff = exact
            .at(c(0.3), c(0.0))
            .unwrap()
            .sparse()
            .unwrap()
            .sub(numeric.sparse().unwrap())
            .unwrap();
        assert!(diff.frobenius_norm() < 1e-12);
    }

    #[test]
    fn kitaev_transfer_matrices_commute_exactly() {
        let spec = spec4();
        let (ta_u, tb_u) = kitaev_transfer(&spec, Layout::Stacked, Variable::U).unwrap();
        let (ta_v, tb_v) = kitaev_transfer(&spec, Layout::Stacked, Variable::V).unwrap();
        assert_eq!(
            commutator_norm(&ta_u, &ta_v).unwrap().exact_zero,
            Some(true)
        );
        let t_u = ta_u.then(&tb_u).unwrap();
        let t_v = ta_v.then(&tb_v).unwrap();
        assert_eq!(commutator_norm(&t_u, &t_v).unwrap().exact_zero, Some(true));
        assert_eq!(commutator_norm(&t_u, &t_u).unwrap().exact_zero, Some(true));
    }

    #[test]
    fn staggered_layout_does_not_commute() {
        let spec = spec4();
        let (ta_u, tb_u) = kitaev_transfer(&spec, Layout::Staggered, Variable::U).unwrap();
        let (ta_v, tb_v) = kitaev_transfer(&spec, Layout::Staggered, Variable::V).unwrap();
        let r = commutator_norm(&ta_u.then(&tb_u).unwrap(), &ta_v.then(&tb_v).unwrap()).unwrap();
        assert_eq!(r.exact_zero, Some(false));
    }

    #[test]
    fn perturbed_family_breaks_commutativity() {
        let spec = spec4();
        let plan = placement_plan(&spec, Layout::Stacked);
        let a: PauliOperator = "1 IIII\nu XXXX\n1/10 ZIII".parse().unwrap();
        let a = RMatrixFour::from_pauli(a, Convention::Check).unwrap();
        let b = RMatrixFour::kitaev_b(Variable::U);
        let t = |r: &RMatrixFour, s: &RMatrixFour, x: f64| {
            build_transfer_at(&spec, &plan, PlanKind::White, r, c(x), c(0.0), None)
                .unwrap()
                .then(
                    &build_transfer_at(&spec, &plan, PlanKind::Dark, s, c(x), c(0.0), None)
                        .unwrap(),
                )
                .unwrap()
        };
        let r = commutator_norm(&t(&a, &b, 0.3), &t(&a, &b, 0.7)).unwrap();
        assert!(r.absolute > 1e-3);
        let k = RMatrixFour::kitaev_a(Variable::U);
        let r = commutator_norm(&t(&k, &b, 0.3), &t(&k, &b, 0.7)).unwrap();
        assert!(r.absolute < 1e-10);
    }

    #[test]
    fn hamiltonian_is_plaquette_sum() {
        let (h1, report) = extract_hamiltonian(&spec4(), Layout::Stacked).unwrap();
        assert_eq!(h1.len(), 8);
        assert!(report.matches_plaquette_sum);
        assert!(report.all_terms_commute);
        assert!(report.identity_at_degree_zero);
        assert!(report.order_independent);
        let (_, staggered) = extract_hamiltonian(&spec4(), Layout::Staggered).unwrap();
        assert!(staggered.matches_plaquette_sum);
        assert!(!staggered.all_terms_commute);
    }

    #[test]
    fn partition_trace_cross_backend() {
        let spec = spec4();
        let (ta, _) = kitaev_transfer(&spec, Layout::Stacked, Variable::U).unwrap();
        assert_eq!(
            partition_trace(&ta, 0).unwrap(),
            PartitionValue::Exact(BivariatePolynomial::constant(
                GaussianRational::from_integer(65536)
            ))
        );
        let PartitionValue::Exact(z2) = partition_trace(&ta, 2).unwrap() else {
            panic!()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let u = c(rng.random_range(-1.0..1.0));
            let PartitionValue::Numeric(numeric) =
                partition_trace(&ta.at(u, c(0.0)).unwrap(), 2).unwrap()
            else {
                panic!()
            };
            let exact = z2.evaluate(u, c(0.0));
            assert!((numeric - exact).norm() <= 1e-9 * exact.norm());
        }
        let id = TransferMatrix {
            spec,
            backend: TransferBackend::Pauli(PauliOperator::identity(16)),
        };
        assert_eq!(
            partition_trace(&id, 3).unwrap(),
            PartitionValue::Exact(BivariatePolynomial::constant(
                GaussianRational::from_integer(65536)
            ))
        );
    }

    #[test]
    fn numeric_backend_is_capped() {
        let spec = LatticeSpec::new(6, 2).unwrap();
        let plan = placement_plan(&spec, Layout::Stacked);
        let r = RMatrixFour::identity_dense(2).unwrap();
        assert!(matches!(
            build_transfer(&spec, &plan, PlanKind::Dark, &r, None),
            Err(Error::Resource(_))
        ));
        // The exact backend handles L = 6.
        let (ta, _) = kitaev_transfer(&spec, Layout::Stacked, Variable::U).unwrap();
        assert_eq!(ta.pauli().unwrap().len(), 1 << 9);
    }
}
