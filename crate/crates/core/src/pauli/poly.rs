use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest degree allowed in either variable.
pub const MAX_DEGREE: u32 = 64;

/// Exact complex number `re + i·im` with rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(
            BigRational::new(num.into(), den.into()),
            BigRational::zero(),
        )
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    /// `i^power`.
    pub fn i_pow(power: u8) -> Self {
        match power % 4 {
            0 => Self::one(),
            1 => Self::i(),
            2 => Self::from_integer(-1),
            _ => -Self::i(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Exact conversion of a finite double.
    pub fn from_f64(re: f64, im: f64) -> Option<Self> {
        Some(Self::new(
            BigRational::from_float(re)?,
            BigRational::from_float(im)?,
        ))
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: Self) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: Self) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: Self) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re, -self.im)
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &BigRational) -> fmt::Result {
    if r.denom() == &BigInt::one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write_rational(f, &self.re),
            (true, false) => {
                write_rational(f, &self.im)?;
                write!(f, "*i")
            }
            (false, false) => {
                write!(f, "(")?;
                write_rational(f, &self.re)?;
                write!(f, "{}", if self.im.is_negative() { "-" } else { "+" })?;
                write_rational(f, &self.im.abs())?;
                write!(f, "*i)")
            }
        }
    }
}

/// Which spectral parameter a monomial exponent refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variable {
    U,
    V,
}

/// Exact polynomial in `u` and `v` with Gaussian-rational coefficients.
///
/// Keys are `(degree in u, degree in v)`; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BivariatePolynomial {
    terms: BTreeMap<(u32, u32), GaussianRational>,
}

impl BivariatePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn monomial(c: GaussianRational, du: u32, dv: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((du, dv), c);
        }
        Self { terms }
    }

    pub fn variable(var: Variable) -> Self {
        match var {
            Variable::U => Self::monomial(GaussianRational::one(), 1, 0),
            Variable::V => Self::monomial(GaussianRational::one(), 0, 1),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &GaussianRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, du: u32, dv: u32) -> GaussianRational {
        self.terms.get(&(du, dv)).cloned().unwrap_or_default()
    }

    /// Highest exponent of `u` and of `v` (zero for the zero polynomial).
    pub fn degrees(&self) -> (u32, u32) {
        self.terms
            .keys()
            .fold((0, 0), |(a, b), &(du, dv)| (a.max(du), b.max(dv)))
    }

    fn add_term(&mut self, key: (u32, u32), c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (&k, c) in &other.terms {
            self.add_term(k, c.clone());
        }
    }

    pub fn sub_assign(&mut self, other: &Self) {
        for (&k, c) in &other.terms {
            self.add_term(k, -c.clone());
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            for (&(x, y), e) in &other.terms {
                let (du, dv) = (a + x, b + y);
                if du > MAX_DEGREE || dv > MAX_DEGREE {
                    return Err(Error::Resource(format!(
                        "polynomial degree ({du}, {dv}) exceeds {MAX_DEGREE}"
                    )));
                }
                out.add_term((du, dv), c * e);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        let mut out = Self::zero();
        for (&k, x) in &self.terms {
            out.add_term(k, x * c);
        }
        out
    }

    pub fn evaluate(&self, u: C64, v: C64) -> C64 {
        self.terms
            .iter()
            .map(|(&(du, dv), c)| c.to_c64() * u.powu(du) * v.powu(dv))
            .sum()
    }

    /// Exchange the roles of `u` and `v`.
    pub fn swap_variables(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), c)| ((b, a), c.clone()))
                .collect(),
        }
    }

    /// Substitute `v := u`.
    pub fn bind_v_to_u(&self) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            out.add_term((a + b, 0), c.clone());
        }
        out
    }

    /// Complex conjugate of every coefficient (the variables are treated as real).
    pub fn conj(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(&k, c)| (k, c.conj())).collect(),
        }
    }
}

impl Add for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn add(self, rhs: Self) -> BivariatePolynomial {
        let mut out = self.clone();
        out.add_assign(rhs);
        out
    }
}

impl Sub for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn sub(self, rhs: Self) -> BivariatePolynomial {
        let mut out = self.clone();
        out.sub_assign(rhs);
        out
    }
}

impl Neg for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn neg(self) -> BivariatePolynomial {
        self.scale(&GaussianRational::from_integer(-1))
    }
}

impl From<GaussianRational> for BivariatePolynomial {
    fn from(c: GaussianRational) -> Self {
        Self::constant(c)
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, du: u32, dv: u32) -> fmt::Result {
    for (name, deg) in [("u", du), ("v", dv)] {
        match deg {
            0 => {}
            1 => write!(f, "*{name}")?,
            k => write!(f, "*{name}^{k}")?,
        }
    }
    Ok(())
}

impl fmt::Display for BivariatePolynomial {
    /// Canonical text: `1 + 3/2*u^2*v - 1/4*i*v`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(du, dv), c) in &self.terms {
            for (part, imaginary) in [(&c.re, false), (&c.im, true)] {
                if part.is_zero() {
                    continue;
                }
                let negative = part.is_negative();
                match (first, negative) {
                    (true, true) => write!(f, "-")?,
                    (true, false) => {}
                    (false, true) => write!(f, " - ")?,
                    (false, false) => write!(f, " + ")?,
                }
                first = false;
                let mag = part.abs();
                let unit = mag.is_one();
                let bare = du == 0 && dv == 0 && !imaginary;
                if unit && !bare {
                    // Leading factor is `i`, `u` or `v`; drop the explicit 1.
                    if imaginary {
                        write!(f, "i")?;
                    } else {
                        let mut s = String::new();
                        for (name, deg) in [("u", du), ("v", dv)] {
                            match deg {
                                0 => {}
                                1 => s.push_str(&format!("*{name}")),
                                k => s.push_str(&format!("*{name}^{k}")),
                            }
                        }
                        write!(f, "{}", &s[1..])?;
                        continue;
                    }
                } else {
                    write_rational(f, &mag)?;
                    if imaginary {
                        write!(f, "*i")?;
                    }
                }
                write_monomial(f, du, dv)?;
            }
        }
        Ok(())
    }
}
