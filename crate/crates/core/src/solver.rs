//! Alternating least squares for the intertwiners `(Ř³, Ř⁴)`.
//!
//! With `Ř¹`, `Ř²` bound and one intertwiner fixed, `LHS - RHS` is linear in
//! the other. Each side then has the form `P · E(X) · Q` with `E(X)` the
//! target embedded on four of the nine sites, and the Gram matrix `MᴴM` of
//! the linear map follows from traces of `PᴴP'` and `Q'Qᴴ`.

use std::time::Instant;

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cubic::{cubic_residual, CubicOptions, Quadruple};
use crate::error::{arg, Error, Result};
use crate::rmatrix::{condition_number, Convention, RMatrixFour};
use crate::tensor::{apply_on_sites, apply_on_sites_right, DenseJson, DenseTensor};

const N: usize = 9;
const DIM: usize = 512;
const LOCAL: usize = 16;
/// Eigenvalue gap below which the smallest singular vector counts as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;
/// Rounding allowance when asserting that a half-step does not increase the residual.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    R3,
    R4,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub enum AlsInit {
    #[default]
    Random,
    Provided {
        r3: DenseTensor,
        r4: DenseTensor,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlsConfig {
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    /// Stop when one full iteration improves the residual by less than this
    /// fraction.
    pub stall_tolerance: f64,
    pub seed: u64,
    pub init: AlsInit,
}

impl Default for AlsConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            residual_tolerance: 1e-10,
            stall_tolerance: 1e-3,
            seed: 0,
            init: AlsInit::Random,
        }
    }
}

impl AlsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return arg("max_iterations must be at least 1");
        }
        if self.residual_tolerance.is_nan()
            || self.stall_tolerance.is_nan()
            || self.residual_tolerance <= 0.0
            || self.stall_tolerance <= 0.0
        {
            return arg("tolerances must be positive");
        }
        if let AlsInit::Provided { r3, r4 } = &self.init {
            for m in [r3, r4] {
                if m.shape() != [LOCAL, LOCAL] {
                    return arg(format!(
                        "initial intertwiners must be 16x16, got {:?}",
                        m.shape()
                    ));
                }
                if m.frobenius_norm() == 0.0 {
                    return arg("initial intertwiners must be nonzero");
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    Stalled,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlsTrace {
    pub seed: u64,
    /// Residual before the first step, then after every half-step.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Smallest singular value of the linear map at every half-step.
    pub smallest_singular_values: Vec<f64>,
    /// Half-steps (1-based) whose smallest singular value was degenerate.
    pub degenerate_steps: Vec<usize>,
    /// Half-steps that increased the residual beyond rounding.
    pub monotonicity_violations: Vec<usize>,
    pub r3: DenseJson,
    pub r4: DenseJson,
    pub condition_numbers: [f64; 2],
    pub wall_time_ms: f64,
}

impl AlsTrace {
    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("initial residual recorded")
    }

    pub fn is_monotone(&self) -> bool {
        self.monotonicity_violations.is_empty()
    }
}

/// A product of gates `g_0 · g_1 · …` on nine sites; empty is the identity.
#[derive(Clone, Debug, Default)]
struct GateProduct(Vec<(DenseTensor, [usize; 4])>);

impl GateProduct {
    fn of(gates: &[(&DenseTensor, [usize; 4])]) -> Self {
        Self(gates.iter().map(|(g, s)| ((*g).clone(), *s)).collect())
    }

    /// `self · m`.
    fn left(&self, m: &DenseTensor) -> Result<DenseTensor> {
        let mut acc = m.clone();
        for (g, s) in self.0.iter().rev() {
            acc = apply_on_sites(g, s, &acc, N, 2)?;
        }
        Ok(acc)
    }

    /// `selfᴴ · m`.
    fn adjoint_left(&self, m: &DenseTensor) -> Result<DenseTensor> {
        let mut acc = m.clone();
        for (g, s) in &self.0 {
            acc = apply_on_sites(&g.adjoint()?, s, &acc, N, 2)?;
        }
        Ok(acc)
    }

    /// `m · selfᴴ`.
    fn adjoint_right(&self, m: &DenseTensor) -> Result<DenseTensor> {
        let mut acc = m.clone();
        for (g, s) in self.0.iter().rev() {
            acc = apply_on_sites_right(&acc, &g.adjoint()?, s, N, 2)?;
        }
        Ok(acc)
    }

    fn dense(&self) -> Result<DenseTensor> {
        self.left(&DenseTensor::identity(DIM))
    }
}

/// One side `P · E(X on sites) · Q`.
#[derive(Clone, Debug)]
struct Term {
    p: GateProduct,
    sites: [usize; 4],
    q: GateProduct,
    q_dense: DenseTensor,
}

impl Term {
    fn new(p: GateProduct, sites: [usize; 4], q: GateProduct) -> Result<Self> {
        let q_dense = q.dense()?;
        Ok(Self {
            p,
            sites,
            q,
            q_dense,
        })
    }
}

/// `X ↦ LHS(X) - RHS(X)` for one intertwiner slot.
#[derive(Clone, Debug)]
pub struct LinearMap {
    target: Target,
    lhs: Term,
    rhs: Term,
}

/// Site lists (zero-based) of the factors of both sides.
const L_R1: [usize; 4] = [1, 2, 4, 5];
const L_R2: [usize; 4] = [4, 5, 7, 8];
const L_R3: [usize; 4] = [3, 0, 4, 1];
const L_R4: [usize; 4] = [4, 1, 5, 2];
const R_R1: [usize; 4] = [3, 4, 6, 7];
const R_R2: [usize; 4] = [0, 1, 3, 4];
const R_R3: [usize; 4] = [7, 4, 8, 5];
const R_R4: [usize; 4] = [6, 3, 7, 4];

fn check_local(m: &DenseTensor, what: &str) -> Result<()> {
    if m.shape() != [LOCAL, LOCAL] {
        return arg(format!("{what} must be 16x16 (d = 2), got {:?}", m.shape()));
    }
    Ok(())
}

/// The linear map for `target` with the other intertwiner `fixed` and numeric
/// `r1`, `r2`, all `16 x 16` checked matrices.
pub fn linear_map_for(
    target: Target,
    fixed: &DenseTensor,
    r1: &DenseTensor,
    r2: &DenseTensor,
) -> Result<LinearMap> {
    check_local(fixed, "fixed intertwiner")?;
    check_local(r1, "R1")?;
    check_local(r2, "R2")?;
    let (lhs, rhs) = match target {
        Target::R3 => (
            Term::new(
                GateProduct::of(&[(r1, L_R1), (r2, L_R2)]),
                L_R3,
                GateProduct::of(&[(fixed, L_R4)]),
            )?,
            Term::new(
                GateProduct::of(&[(fixed, R_R4)]),
                R_R3,
                GateProduct::of(&[(r2, R_R2), (r1, R_R1)]),
            )?,
        ),
        Target::R4 => (
            Term::new(
                GateProduct::of(&[(r1, L_R1), (r2, L_R2), (fixed, L_R3)]),
                L_R4,
                GateProduct::default(),
            )?,
            Term::new(
                GateProduct::default(),
                R_R4,
                GateProduct::of(&[(fixed, R_R3), (r2, R_R2), (r1, R_R1)]),
            )?,
        ),
    };
    Ok(LinearMap { target, lhs, rhs })
}

/// `index[a][x]`: nine-site index with the digits of `a` on `sites` and the
/// digits of `x` on the remaining sites in increasing order.
fn index_table(sites: &[usize; 4]) -> Vec<[usize; 32]> {
    let rest: Vec<usize> = (0..N).filter(|s| !sites.contains(s)).collect();
    let bit = |site: usize| 1usize << (N - 1 - site);
    (0..LOCAL)
        .map(|a| {
            let mut row = [0usize; 32];
            for (x, slot) in row.iter_mut().enumerate() {
                let mut idx = 0;
                for (j, &s) in sites.iter().enumerate() {
                    if a >> (3 - j) & 1 == 1 {
                        idx |= bit(s);
                    }
                }
                for (j, &s) in rest.iter().enumerate() {
                    if x >> (4 - j) & 1 == 1 {
                        idx |= bit(s);
                    }
                }
                *slot = idx;
            }
            row
        })
        .collect()
}

impl LinearMap {
    pub fn target(&self) -> Target {
        self.target
    }

    fn side(term: &Term, x: &DenseTensor) -> Result<DenseTensor> {
        let e = apply_on_sites(x, &term.sites, &term.q_dense, N, 2)?;
        term.p.left(&e)
    }

    /// `LHS(X) - RHS(X)` as a `512 x 512` matrix.
    pub fn apply(&self, x: &DenseTensor) -> Result<DenseTensor> {
        check_local(x, "argument")?;
        Self::side(&self.lhs, x)?.sub(&Self::side(&self.rhs, x)?)
    }

    pub fn residual(&self, x: &DenseTensor) -> Result<f64> {
        Ok(self.apply(x)?.frobenius_norm())
    }

    /// `⟨M_i x, M_j y⟩ = x̄ · G_ij · y` for sides `i`, `j`.
    fn gram_block(t1: &Term, t2: &Term) -> Result<Array2<C64>> {
        // W = P1ᴴ P2, V = Q2 Q1ᴴ.
        let w = t1.p.adjoint_left(&t2.p.dense()?)?;
        let v = t1.q.adjoint_right(&t2.q_dense)?;
        let (i1, i2) = (index_table(&t1.sites), index_table(&t2.sites));
        let (we, ve) = (w.entries(), v.entries());
        let mut wp = Array2::<C64>::zeros((LOCAL * LOCAL, 1024));
        let mut vp = Array2::<C64>::zeros((LOCAL * LOCAL, 1024));
        for a in 0..LOCAL {
            for c in 0..LOCAL {
                let mut wrow = wp.row_mut(a * LOCAL + c);
                let mut vrow = vp.row_mut(a * LOCAL + c);
                for x in 0..32 {
                    for y in 0..32 {
                        wrow[x * 32 + y] = we[i1[a][x] * DIM + i2[c][y]];
                        // Row (b, e) = (a, c) here: V[w(e, y), s(b, x)].
                        vrow[x * 32 + y] = ve[i2[c][y] * DIM + i1[a][x]];
                    }
                }
            }
        }
        let g = wp.dot(&vp.t());
        // g[(a,c),(b,e)] -> G[(a,b),(c,e)].
        let mut out = Array2::<C64>::zeros((LOCAL * LOCAL, LOCAL * LOCAL));
        for ((ac, be), &z) in g.indexed_iter() {
            let (a, c) = (ac / LOCAL, ac % LOCAL);
            let (b, e) = (be / LOCAL, be % LOCAL);
            out[[a * LOCAL + b, c * LOCAL + e]] = z;
        }
        Ok(out)
    }

    /// `MᴴM` in the row-major vectorization of the target (Hermitian, 256 x 256).
    pub fn gram(&self) -> Result<DMatrix<C64>> {
        let ll = Self::gram_block(&self.lhs, &self.lhs)?;
        let rr = Self::gram_block(&self.rhs, &self.rhs)?;
        let lr = Self::gram_block(&self.lhs, &self.rhs)?;
        let n = LOCAL * LOCAL;
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let g = ll[[i, j]] + rr[[i, j]] - lr[[i, j]] - lr[[j, i]].conj();
            let gt = ll[[j, i]] + rr[[j, i]] - lr[[j, i]] - lr[[i, j]].conj();
            (g + gt.conj()) * 0.5
        }))
    }
}

struct Minimizer {
    vector: DenseTensor,
    smallest: f64,
    degenerate: bool,
}

/// Number of low Gram eigenvectors kept for the Rayleigh-Ritz refinement.
pub const RITZ_VECTORS: usize = 8;

fn to_local(column: impl Iterator<Item = C64>) -> Result<DenseTensor> {
    DenseTensor::from_matrix(LOCAL, LOCAL, column.collect())
}

/// Minimize `‖M x‖` over unit `x`. The Gram eigenvectors only fix a search
/// subspace; the minimum inside it (together with `previous`) comes from an
/// SVD of the applied map, which avoids squaring the conditioning.
fn minimize(map: &LinearMap, previous: &DenseTensor) -> Result<Minimizer> {
    let eig = map.gram()?.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    if !eig.eigenvalues.iter().all(|x| x.is_finite()) {
        return Err(Error::Resource(
            "eigen-decomposition produced non-finite values".into(),
        ));
    }
    let n = LOCAL * LOCAL;
    let k = RITZ_VECTORS.min(n);
    let mut basis = DMatrix::<C64>::zeros(n, k + 1);
    for (col, &i) in order.iter().take(k).enumerate() {
        basis.set_column(col, &eig.eigenvectors.column(i));
    }
    basis.set_column(
        k,
        &nalgebra::DVector::from_iterator(n, previous.entries().iter().copied()),
    );
    let q = basis.qr().q();

    let images: Vec<DenseTensor> = (0..q.ncols())
        .map(|c| map.apply(&to_local(q.column(c).iter().copied())?))
        .collect::<Result<_>>()?;
    let r = gram_schmidt_r(&images);
    let svd = r.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let mut ranked: Vec<(usize, f64)> = svd.singular_values.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    let min = ranked[0].1;
    let degenerate = ranked.len() > 1 && ranked[1].1 - min < DEGENERACY_GAP;
    let y = v_t.row(ranked[0].0).adjoint();
    let x = &q * y;
    let vector = normalized(&to_local(x.iter().copied())?);
    Ok(Minimizer {
        vector,
        smallest: min,
        degenerate,
    })
}

/// `R` of a thin QR of the matrix whose columns are `columns`, by classical
/// Gram-Schmidt with one reorthogonalization pass.
fn gram_schmidt_r(columns: &[DenseTensor]) -> DMatrix<C64> {
    let k = columns.len();
    let mut r = DMatrix::<C64>::zeros(k, k);
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(k);
    for (j, col) in columns.iter().enumerate() {
        let mut a = col.entries().to_vec();
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let proj: C64 = qi.iter().zip(&a).map(|(x, y)| x.conj() * y).sum();
                a.iter_mut().zip(qi).for_each(|(y, x)| *y -= proj * x);
                r[(i, j)] += proj;
            }
        }
        let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        r[(j, j)] = C64::new(norm, 0.0);
        if norm > 0.0 {
            a.iter_mut().for_each(|z| *z /= norm);
        }
        q.push(a);
    }
    r
}

fn random_unit(rng: &mut ChaCha8Rng) -> DenseTensor {
    let entries = (0..LOCAL * LOCAL)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    normalized(&DenseTensor::from_matrix(LOCAL, LOCAL, entries).expect("16x16"))
}

fn normalized(m: &DenseTensor) -> DenseTensor {
    m.scale(C64::new(1.0 / m.frobenius_norm(), 0.0))
}

fn as_dense(m: &DenseTensor) -> Result<RMatrixFour> {
    RMatrixFour::from_dense(m.clone(), 2, Convention::Check)
}

/// Residual `‖LHS - RHS‖` of the cubic equations via the contraction engine.
pub fn pair_residual(
    r1: &DenseTensor,
    r2: &DenseTensor,
    r3: &DenseTensor,
    r4: &DenseTensor,
) -> Result<f64> {
    let quad = Quadruple::new(as_dense(r1)?, as_dense(r2)?, as_dense(r3)?, as_dense(r4)?)?;
    let zero = C64::new(0.0, 0.0);
    Ok(cubic_residual(&quad, zero, zero, CubicOptions::default())?.absolute)
}

/// Search for unit-norm `(Ř³, Ř⁴)` solving the cubic equations with the given
/// `Ř¹`, `Ř²` at `(u, v)`.
pub fn als_search(
    r1: &RMatrixFour,
    r2: &RMatrixFour,
    u: C64,
    v: C64,
    config: &AlsConfig,
) -> Result<AlsTrace> {
    config.validate()?;
    let start = Instant::now();
    for (k, m) in [(1, r1), (2, r2)] {
        if m.d() != 2 {
            return arg(format!("R{k}: the intertwiner search supports d = 2 only"));
        }
        if m.convention() != Convention::Check {
            return arg(format!("R{k} must be in the checked convention"));
        }
    }
    let (m1, m2) = (r1.evaluate(u, v)?, r2.evaluate(u, v)?);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (mut x3, mut x4) = match &config.init {
        AlsInit::Random => {
            let a = random_unit(&mut rng);
            (a, random_unit(&mut rng))
        }
        AlsInit::Provided { r3, r4 } => (normalized(r3), normalized(r4)),
    };

    let mut residuals = vec![pair_residual(&m1, &m2, &x3, &x4)?];
    let mut smallest = Vec::new();
    let mut degenerate = Vec::new();
    let mut violations = Vec::new();
    let mut iterations = 0;
    let mut stop = if residuals[0] <= config.residual_tolerance {
        Some(StopReason::Converged)
    } else {
        None
    };

    while stop.is_none() {
        if iterations == config.max_iterations {
            stop = Some(StopReason::MaxIterations);
            break;
        }
        iterations += 1;
        let before = *residuals.last().expect("nonempty");
        for target in [Target::R3, Target::R4] {
            let fixed = match target {
                Target::R3 => &x4,
                Target::R4 => &x3,
            };
            let map = linear_map_for(target, fixed, &m1, &m2)?;
            let current_target = match target {
                Target::R3 => &x3,
                Target::R4 => &x4,
            };
            let found = minimize(&map, current_target)?;
            match target {
                Target::R3 => x3 = found.vector,
                Target::R4 => x4 = found.vector,
            }
            let previous = *residuals.last().expect("nonempty");
            let current = pair_residual(&m1, &m2, &x3, &x4)?;
            residuals.push(current);
            smallest.push(found.smallest);
            let step = residuals.len() - 1;
            if found.degenerate {
                degenerate.push(step);
            }
            if current > previous + MONOTONE_SLACK + 1e-9 * previous {
                violations.push(step);
            }
        }
        let after = *residuals.last().expect("nonempty");
        if after <= config.residual_tolerance {
            stop = Some(StopReason::Converged);
        } else if before - after < config.stall_tolerance * before {
            stop = Some(StopReason::Stalled);
        }
    }
    let stop_reason = stop.expect("loop exits with a reason");
    Ok(AlsTrace {
        seed: config.seed,
        iterations,
        converged: stop_reason == StopReason::Converged,
        stop_reason,
        smallest_singular_values: smallest,
        degenerate_steps: degenerate,
        monotonicity_violations: violations,
        condition_numbers: [condition_number(&x3), condition_number(&x4)],
        r3: x3.to_json(),
        r4: x4.to_json(),
        residuals,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Variable;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn kitaev_at(u: f64, v: f64) -> [DenseTensor; 4] {
        let q = Quadruple::kitaev();
        q.matrices().map(|m| m.evaluate(c(u), c(v)).unwrap())
    }

    #[test]
    fn index_table_places_digits() {
        let t = index_table(&[4, 1, 5, 2]);
        // a = 1000: first digit on site 4.
        assert_eq!(t[0b1000][0], 1 << 4);
        // x = 10000: first remaining site is 0.
        assert_eq!(t[0][0b10000], 1 << 8);
        assert_eq!(t[15][31], 511);
    }

    #[test]
    fn kitaev_pair_is_in_the_kernel() {
        let [r1, r2, r3, r4] = kitaev_at(0.3, 0.7);
        let m3 = linear_map_for(Target::R3, &r4, &r1, &r2).unwrap();
        assert!(m3.residual(&r3).unwrap() < 1e-12);
        let m4 = linear_map_for(Target::R4, &r3, &r1, &r2).unwrap();
        assert!(m4.residual(&r4).unwrap() < 1e-12);
    }

    #[test]
    fn identity_pair_is_in_the_kernel() {
        let id = DenseTensor::identity(16);
        let m = linear_map_for(Target::R3, &id, &id, &id).unwrap();
        assert_eq!(m.residual(&id).unwrap(), 0.0);
    }

    #[test]
    fn linear_map_matches_cubic_residual_and_gram() {
        let [r1, r2, _, _] = kitaev_at(0.3, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for target in [Target::R3, Target::R4] {
            let fixed = random_unit(&mut rng);
            let map = linear_map_for(target, &fixed, &r1, &r2).unwrap();
            let gram = map.gram().unwrap();
            for _ in 0..5 {
                let x = random_unit(&mut rng).scale(c(3.0));
                let direct = match target {
                    Target::R3 => pair_residual(&r1, &r2, &x, &fixed).unwrap(),
                    Target::R4 => pair_residual(&r1, &r2, &fixed, &x).unwrap(),
                };
                let applied = map.residual(&x).unwrap();
                assert!((direct - applied).abs() <= 1e-12 * direct.max(1.0));
                let vec = nalgebra::DVector::from_iterator(256, x.entries().iter().copied());
                let quad = (vec.adjoint() * &gram * &vec)[(0, 0)];
                assert!(quad.im.abs() < 1e-9 * quad.re.abs());
                assert!((quad.re.sqrt() - direct).abs() <= 1e-9 * direct);
            }
        }
    }

    #[test]
    fn minimizer_beats_subspace_probe() {
        let [r1, r2, _, r4] = kitaev_at(0.3, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fixed = r4.add(&random_unit(&mut rng).scale(c(0.3))).unwrap();
        let map = linear_map_for(Target::R3, &fixed, &r1, &r2).unwrap();
        let best = minimize(&map, &random_unit(&mut rng)).unwrap();
        let best_residual = map.residual(&best.vector).unwrap();
        assert!((best_residual - best.smallest).abs() < 1e-8);
        let y = random_unit(&mut rng);
        for k in 0..32 {
            let theta = std::f64::consts::PI * k as f64 / 32.0;
            let probe = normalized(
                &best
                    .vector
                    .scale(c(theta.cos()))
                    .add(&y.scale(c(theta.sin())))
                    .unwrap(),
            );
            assert!(map.residual(&probe).unwrap() >= best_residual - 1e-10);
        }
    }

    #[test]
    fn identity_start_converges_immediately() {
        let id = RMatrixFour::identity_dense(2).unwrap();
        let config = AlsConfig {
            init: AlsInit::Provided {
                r3: DenseTensor::identity(16),
                r4: DenseTensor::identity(16),
            },
            ..AlsConfig::default()
        };
        let trace = als_search(&id, &id, c(0.0), c(0.0), &config).unwrap();
        assert_eq!(trace.iterations, 0);
        assert_eq!(trace.residuals, vec![0.0]);
        assert!(trace.converged);
    }

    #[test]
    fn perturbed_kitaev_start_converges() {
        let [_, _, r3, r4] = kitaev_at(0.3, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noise = |rng: &mut ChaCha8Rng| random_unit(rng).scale(c(1e-2 * 16.0));
        let config = AlsConfig {
            max_iterations: 50,
            init: AlsInit::Provided {
                r3: r3.add(&noise(&mut rng)).unwrap(),
                r4: r4.add(&noise(&mut rng)).unwrap(),
            },
            ..AlsConfig::default()
        };
        let trace = als_search(
            &RMatrixFour::kitaev_a(Variable::U),
            &RMatrixFour::kitaev_b(Variable::V),
            c(0.3),
            c(0.7),
            &config,
        )
        .unwrap();
        assert!(trace.final_residual() < 1e-10, "{:?}", trace.residuals);
        assert!(trace.is_monotone());
        assert!(trace.iterations <= 50);
    }

    #[test]
    fn invalid_configs_rejected() {
        let a = RMatrixFour::kitaev_a(Variable::U);
        let bad = AlsConfig {
            max_iterations: 0,
            ..AlsConfig::default()
        };
        assert!(als_search(&a, &a, c(0.1), c(0.1), &bad).is_err());
        let bad = AlsConfig {
            residual_tolerance: 0.0,
            ..AlsConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = AlsConfig {
            init: AlsInit::Provided {
                r3: DenseTensor::zeros(vec![16, 16]),
                r4: DenseTensor::identity(16),
            },
            ..AlsConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
