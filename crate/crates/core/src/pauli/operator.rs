use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::poly::{BivariatePolynomial, GaussianRational};
use super::string::{PauliString, MAX_SITES};
use crate::error::{arg, Error, Result};
use crate::tensor::DenseTensor;

/// Largest dimension `evaluate_dense` will materialize (4096 x 4096 complex).
pub const DENSE_DIM_LIMIT: usize = 1 << 12;

/// Exact operator `Σ_s p_s(u, v) · s` over Pauli strings `s` on `n` qubits.
///
/// Terms are kept in canonical form: each string at most once, no zero
/// coefficients, iteration in lexicographic word order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    terms: BTreeMap<PauliString, BivariatePolynomial>,
}

impl PauliOperator {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_SITES, "at most {MAX_SITES} sites supported");
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::term(n, PauliString::IDENTITY, BivariatePolynomial::one())
    }

    pub fn term(n: usize, string: PauliString, coeff: BivariatePolynomial) -> Self {
        let mut op = Self::zero(n);
        op.add_term(string, coeff);
        op
    }

    /// Builds from `(word, coefficient)` pairs, e.g. `[("IIII", 1), ("XXXX", u)]`.
    pub fn from_words<'a>(
        terms: impl IntoIterator<Item = (&'a str, BivariatePolynomial)>,
    ) -> Result<Self> {
        let mut op: Option<Self> = None;
        for (word, coeff) in terms {
            let (string, n) = PauliString::parse(word)?;
            let target = op.get_or_insert_with(|| Self::zero(n));
            if target.n != n {
                return arg(format!(
                    "word {word} has {n} letters, expected {}",
                    target.n
                ));
            }
            target.add_term(string, coeff);
        }
        op.ok_or_else(|| Error::Argument("no terms given".into()))
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &BivariatePolynomial)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, string: &PauliString) -> BivariatePolynomial {
        self.terms.get(string).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, string: PauliString, coeff: BivariatePolynomial) {
        debug_assert!(string.extent() <= self.n);
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(string) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                e.get_mut().add_assign(&coeff);
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn same_size(&self, other: &Self) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            arg(format!("operators on {} and {} sites", self.n, other.n))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_size(other)?;
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(*s, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_size(other)?;
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(*s, -c);
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &BivariatePolynomial) -> Result<Self> {
        let mut out = Self::zero(self.n);
        for (s, c) in &self.terms {
            out.add_term(*s, c.try_mul(factor)?);
        }
        Ok(out)
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same_size(other)?;
        let mut out = Self::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (phase, s) = a.multiply(b);
                let coeff = ca.try_mul(cb)?.scale(&GaussianRational::i_pow(phase));
                out.add_term(s, coeff);
            }
        }
        Ok(out)
    }

    /// `a·b - b·a`. Pairs of commuting strings are skipped.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.same_size(other)?;
        let mut out = Self::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if a.commutes_with(b) {
                    continue;
                }
                // Anticommuting strings: ab - ba = 2ab.
                let (phase, s) = a.multiply(b);
                let coeff = ca
                    .try_mul(cb)?
                    .scale(&(&GaussianRational::i_pow(phase) * &GaussianRational::from_integer(2)));
                out.add_term(s, coeff);
            }
        }
        Ok(out)
    }

    /// Product of the operators in order, `ops[0] · ops[1] · …`.
    pub fn product<'a>(n: usize, ops: impl IntoIterator<Item = &'a PauliOperator>) -> Result<Self> {
        let mut acc = Self::identity(n);
        for op in ops {
            acc = acc.multiply(op)?;
        }
        Ok(acc)
    }

    /// Exact coefficient operator of `u^r v^s`.
    pub fn series_coefficient(&self, r: u32, s: u32) -> Self {
        let mut out = Self::zero(self.n);
        for (string, c) in &self.terms {
            out.add_term(*string, BivariatePolynomial::constant(c.coefficient(r, s)));
        }
        out
    }

    /// Place this `k`-site operator on `sites` of an `n`-site register.
    pub fn embed(&self, sites: &[usize], n: usize) -> Result<Self> {
        if sites.len() != self.n {
            return arg(format!(
                "{} sites given for a {}-site operator",
                sites.len(),
                self.n
            ));
        }
        if n > MAX_SITES {
            return arg(format!("at most {MAX_SITES} sites supported"));
        }
        let mut seen = 0u64;
        for &s in sites {
            if s >= n || seen >> s & 1 == 1 {
                return arg(format!("bad site list {sites:?} for {n} sites"));
            }
            seen |= 1 << s;
        }
        let mut out = Self::zero(n);
        for (s, c) in &self.terms {
            out.add_term(s.relocate(sites), c.clone());
        }
        Ok(out)
    }

    pub fn map_coefficients(
        &self,
        f: impl Fn(&BivariatePolynomial) -> BivariatePolynomial,
    ) -> Self {
        let mut out = Self::zero(self.n);
        for (s, c) in &self.terms {
            out.add_term(*s, f(c));
        }
        out
    }

    pub fn swap_variables(&self) -> Self {
        self.map_coefficients(BivariatePolynomial::swap_variables)
    }

    pub fn bind_v_to_u(&self) -> Self {
        self.map_coefficients(BivariatePolynomial::bind_v_to_u)
    }

    /// Highest exponents of `u` and `v` over all coefficients.
    pub fn degrees(&self) -> (u32, u32) {
        self.terms
            .values()
            .map(BivariatePolynomial::degrees)
            .fold((0, 0), |(a, b), (x, y)| (a.max(x), b.max(y)))
    }

    /// `tr(op)`: only the identity string has non-zero trace, `2^n`.
    pub fn trace(&self) -> BivariatePolynomial {
        let c = self.coefficient(&PauliString::IDENTITY);
        let dim = num_bigint::BigInt::from(1) << self.n;
        c.scale(&GaussianRational::new(
            num_rational::BigRational::from_integer(dim),
            num_rational::BigRational::default(),
        ))
    }

    /// Strings present in the operator (coefficients dropped).
    pub fn strings(&self) -> Vec<PauliString> {
        self.terms.keys().copied().collect()
    }

    /// Numeric matrix at parameter values `(u, v)`, qubit 0 as the slowest index.
    pub fn evaluate_dense(&self, u: C64, v: C64) -> Result<DenseTensor> {
        let dim = 1usize
            .checked_shl(self.n as u32)
            .filter(|&d| d <= DENSE_DIM_LIMIT)
            .ok_or_else(|| {
                Error::Resource(format!(
                    "2^{} exceeds the dense limit {DENSE_DIM_LIMIT}",
                    self.n
                ))
            })?;
        let mut out = DenseTensor::zeros(vec![dim, dim]);
        for (string, coeff) in &self.terms {
            let value = coeff.evaluate(u, v);
            for (row, col, sign) in string_entries(string, self.n) {
                let current = out.get(row, col);
                out.set(row, col, current + value * sign);
            }
        }
        Ok(out)
    }
}

/// Non-zero entries `(row, col, value)` of a Pauli string as a `2^n` matrix.
pub(crate) fn string_entries(
    string: &PauliString,
    n: usize,
) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
    // Site s corresponds to bit n-1-s of a basis index.
    let reverse = |mask: u64| {
        (0..n)
            .filter(|s| mask >> s & 1 == 1)
            .fold(0usize, |acc, s| acc | 1 << (n - 1 - s))
    };
    let flip = reverse(string.x_mask());
    let zmask = reverse(string.z_mask());
    let y_phase = GaussianRational::i_pow((string.y_count() % 4) as u8).to_c64();
    (0..1usize << n).map(move |col| {
        let sign = if (col & zmask).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        };
        (col ^ flip, col, y_phase * sign)
    })
}

#[cfg(test)]
mod tests {
    use super::super::poly::Variable;
    use super::*;
    use crate::tensor::relative_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(n: i64) -> BivariatePolynomial {
        BivariatePolynomial::constant(GaussianRational::from_integer(n))
    }

    fn u() -> BivariatePolynomial {
        BivariatePolynomial::variable(Variable::U)
    }

    fn v() -> BivariatePolynomial {
        BivariatePolynomial::variable(Variable::V)
    }

    fn single(word: &str) -> PauliOperator {
        PauliOperator::from_words([(word, c(1))]).unwrap()
    }

    fn random_operator(rng: &mut impl Rng, n: usize, terms: usize) -> PauliOperator {
        let letters = ['I', 'X', 'Y', 'Z'];
        let mut op = PauliOperator::zero(n);
        for _ in 0..terms {
            let word: String = (0..n).map(|_| letters[rng.random_range(0..4)]).collect();
            let (s, _) = PauliString::parse(&word).unwrap();
            let mut coeff = BivariatePolynomial::zero();
            for _ in 0..2 {
                let re = rng.random_range(-4..=4);
                let im = rng.random_range(-4..=4);
                let g = GaussianRational::new(
                    num_rational::BigRational::new(re.into(), rng.random_range(1..4i64).into()),
                    num_rational::BigRational::from_integer(im.into()),
                );
                coeff.add_assign(&BivariatePolynomial::monomial(
                    g,
                    rng.random_range(0..3),
                    rng.random_range(0..3),
                ));
            }
            op.add_term(s, coeff);
        }
        op
    }

    #[test]
    fn x_times_y_is_i_z() {
        let prod = single("X").multiply(&single("Y")).unwrap();
        let expected = PauliOperator::from_words([("Z", GaussianRational::i().into())]).unwrap();
        assert_eq!(prod, expected);
    }

    #[test]
    fn conjugate_binomials_multiply_to_scalar() {
        let plus = PauliOperator::from_words([("IIII", c(1)), ("XXXX", u())]).unwrap();
        let minus = PauliOperator::from_words([("IIII", c(1)), ("XXXX", -&u())]).unwrap();
        let expected =
            PauliOperator::from_words([("IIII", &c(1) - &u().try_mul(&u()).unwrap())]).unwrap();
        assert_eq!(plus.multiply(&minus).unwrap(), expected);
    }

    #[test]
    fn commutators() {
        let xz = single("X").commutator(&single("Z")).unwrap();
        let minus_two_i = GaussianRational::new(
            Default::default(),
            num_rational::BigRational::from_integer((-2).into()),
        );
        let expected = PauliOperator::from_words([("Y", minus_two_i.into())]).unwrap();
        assert_eq!(xz, expected);
        assert!(single("XX").commutator(&single("ZZ")).unwrap().is_zero());
    }

    #[test]
    fn plaquettes_sharing_two_sites_commute() {
        // Two 2x2 plaquettes on a 3x2 strip sharing the middle rung.
        let x_plaquette = PauliOperator::term(
            6,
            PauliString::uniform(super::super::Letter::X, &[0, 1, 2, 3]),
            c(1),
        );
        let z_plaquette = PauliOperator::term(
            6,
            PauliString::uniform(super::super::Letter::Z, &[2, 3, 4, 5]),
            c(1),
        );
        assert!(x_plaquette.commutator(&z_plaquette).unwrap().is_zero());
    }

    #[test]
    fn size_mismatch_is_rejected() {
        assert!(single("X").multiply(&single("XX")).is_err());
        assert!(single("X").commutator(&single("XX")).is_err());
    }

    #[test]
    fn dense_evaluation_basics() {
        let id = PauliOperator::identity(3)
            .evaluate_dense(C64::new(0.2, 0.0), C64::new(0.0, 0.0))
            .unwrap();
        assert_eq!(id, DenseTensor::identity(8));
        let ux = PauliOperator::from_words([("X", u())]).unwrap();
        assert_eq!(
            ux.evaluate_dense(C64::new(0.0, 0.0), C64::new(1.0, 0.0))
                .unwrap(),
            DenseTensor::zeros(vec![2, 2])
        );
        let y = single("Y")
            .evaluate_dense(C64::new(0.0, 0.0), C64::new(0.0, 0.0))
            .unwrap();
        assert_eq!(y.get(1, 0), C64::new(0.0, 1.0));
        assert_eq!(y.get(0, 1), C64::new(0.0, -1.0));
        assert!(PauliOperator::identity(13)
            .evaluate_dense(C64::new(0.0, 0.0), C64::new(0.0, 0.0))
            .is_err());
    }

    #[test]
    fn leftmost_site_is_slowest_index() {
        let xi = single("XI")
            .evaluate_dense(C64::new(0.0, 0.0), C64::new(0.0, 0.0))
            .unwrap();
        // X on the first site maps |00> (0) to |10> (2).
        assert_eq!(xi.get(2, 0), C64::new(1.0, 0.0));
    }

    #[test]
    fn dense_evaluation_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let a = random_operator(&mut rng, 4, 6);
            let b = random_operator(&mut rng, 4, 6);
            let (uu, vv) = (
                C64::new(rng.random_range(-2.0..2.0), 0.0),
                C64::new(rng.random_range(-2.0..2.0), 0.3),
            );
            let ev = |op: &PauliOperator| op.evaluate_dense(uu, vv).unwrap();
            let prod = ev(&a.multiply(&b).unwrap());
            assert!(relative_distance(&prod, &ev(&a).matmul(&ev(&b)).unwrap()).unwrap() < 1e-12);
            let sum = ev(&a.add(&b).unwrap());
            assert!(relative_distance(&sum, &ev(&a).add(&ev(&b)).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn x_only_operators_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let random_x = |rng: &mut ChaCha8Rng| {
            let mut op = PauliOperator::zero(5);
            for _ in 0..5 {
                let word: String = (0..5)
                    .map(|_| if rng.random_bool(0.5) { 'X' } else { 'I' })
                    .collect();
                op.add_term(
                    PauliString::parse(&word).unwrap().0,
                    &u() + &c(rng.random_range(-3..3)),
                );
            }
            op
        };
        for _ in 0..10 {
            let (p, q) = (random_x(&mut rng), random_x(&mut rng));
            assert!(p.commutator(&q).unwrap().is_zero());
        }
    }

    #[test]
    fn series_coefficient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let op = random_operator(&mut rng, 3, 5);
        let (u0, v0) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let h = 1e-4;
        let plus = op.evaluate_dense(C64::new(h, 0.0), v0).unwrap();
        let minus = op.evaluate_dense(C64::new(-h, 0.0), v0).unwrap();
        let fd = plus.sub(&minus).unwrap().scale(C64::new(0.5 / h, 0.0));
        let exact = op.series_coefficient(1, 0).evaluate_dense(u0, v0).unwrap();
        assert!(fd.sub(&exact).unwrap().frobenius_norm() < 1e-6 * exact.frobenius_norm().max(1.0));

        let dv_plus = op.evaluate_dense(u0, C64::new(h, 0.0)).unwrap();
        let dv_minus = op.evaluate_dense(u0, C64::new(-h, 0.0)).unwrap();
        let fd_v = dv_plus
            .sub(&dv_minus)
            .unwrap()
            .scale(C64::new(0.5 / h, 0.0));
        let exact_v = op.series_coefficient(0, 1).evaluate_dense(u0, v0).unwrap();
        assert!(
            fd_v.sub(&exact_v).unwrap().frobenius_norm() < 1e-6 * exact_v.frobenius_norm().max(1.0)
        );
    }

    #[test]
    fn trace_counts_identity_only() {
        let op = PauliOperator::from_words([("II", u()), ("XZ", c(5))]).unwrap();
        assert_eq!(op.trace(), u().scale(&GaussianRational::from_integer(4)));
    }

    #[test]
    fn embed_relocates_terms() {
        let op = PauliOperator::from_words([("XY", v())]).unwrap();
        let e = op.embed(&[3, 1], 4).unwrap();
        let expected = PauliOperator::from_words([("IYIX", v())]).unwrap();
        assert_eq!(e, expected);
        assert!(op.embed(&[1, 1], 4).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn canonical_form_has_no_zero_terms(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_operator(&mut rng, 3, 4);
                let b = random_operator(&mut rng, 3, 4);
                let prod = a.multiply(&b).unwrap();
                prop_assert!(prod.terms().all(|(_, c)| !c.is_zero()));
                prop_assert!(a.sub(&a).unwrap().is_zero());
                let strings = prod.strings();
                let mut sorted = strings.clone();
                sorted.sort();
                sorted.dedup();
                prop_assert_eq!(strings, sorted);
            }
        }
    }
}
