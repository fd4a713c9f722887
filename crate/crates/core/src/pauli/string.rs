use std::cmp::Ordering;
use std::fmt;

use crate::error::{arg, Result};

/// Largest register a [`PauliString`] can describe.
pub const MAX_SITES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Self::I),
            'X' => Some(Self::X),
            'Y' => Some(Self::Y),
            'Z' => Some(Self::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Self::I => 'I',
            Self::X => 'X',
            Self::Y => 'Y',
            Self::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Self::I => (false, false),
            Self::X => (true, false),
            Self::Y => (true, true),
            Self::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Self::I,
            (true, false) => Self::X,
            (true, true) => Self::Y,
            (false, true) => Self::Z,
        }
    }
}

/// Tensor product of single-site Pauli letters in symplectic form: bit `s` of
/// `x`/`z` marks an X/Z component on site `s` (Y has both).
///
/// The register size lives in the owning operator. Ordering is lexicographic
/// in the letter word read from site 0, with `I < X < Y < Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct PauliString {
    x: u64,
    z: u64,
}

impl PauliString {
    pub const IDENTITY: Self = Self { x: 0, z: 0 };

    pub fn from_letters(letters: &[Letter]) -> Result<Self> {
        if letters.len() > MAX_SITES {
            return arg(format!("at most {MAX_SITES} sites supported"));
        }
        let mut s = Self::IDENTITY;
        for (site, &l) in letters.iter().enumerate() {
            s = s.with_letter(site, l);
        }
        Ok(s)
    }

    pub fn parse(word: &str) -> Result<(Self, usize)> {
        let letters: Option<Vec<Letter>> = word.chars().map(Letter::from_char).collect();
        match letters {
            Some(l) if !l.is_empty() => Ok((Self::from_letters(&l)?, l.len())),
            _ => arg(format!("'{word}' is not a Pauli word over IXYZ")),
        }
    }

    /// The same letter on every listed site, identity elsewhere.
    pub fn uniform(letter: Letter, sites: &[usize]) -> Self {
        sites
            .iter()
            .fold(Self::IDENTITY, |s, &site| s.with_letter(site, letter))
    }

    pub fn letter(&self, site: usize) -> Letter {
        Letter::from_bits(self.x >> site & 1 == 1, self.z >> site & 1 == 1)
    }

    pub fn with_letter(mut self, site: usize, letter: Letter) -> Self {
        let (x, z) = letter.bits();
        let mask = 1u64 << site;
        self.x = (self.x & !mask) | if x { mask } else { 0 };
        self.z = (self.z & !mask) | if z { mask } else { 0 };
        self
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn word(&self, n: usize) -> String {
        (0..n).map(|s| self.letter(s).as_char()).collect()
    }

    /// Highest occupied site plus one.
    pub fn extent(&self) -> usize {
        MAX_SITES - self.support().leading_zeros() as usize
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// `self · other = i^phase · result`.
    pub fn multiply(&self, other: &Self) -> (u8, Self) {
        let product = Self {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        let mut phase = 0u8;
        let mut both = self.support() & other.support();
        while both != 0 {
            let site = both.trailing_zeros() as usize;
            both &= both - 1;
            phase += site_phase(self.letter(site), other.letter(site));
        }
        (phase % 4, product)
    }

    /// Relocate: letter on site `j` moves to `sites[j]` in the larger register.
    pub fn relocate(&self, sites: &[usize]) -> Self {
        sites
            .iter()
            .enumerate()
            .fold(Self::IDENTITY, |s, (j, &site)| {
                s.with_letter(site, self.letter(j))
            })
    }

    fn sort_key(&self) -> u128 {
        // Two bits per site with site 0 most significant; I=0, X=1, Y=2, Z=3.
        let mut key = 0u128;
        let mut support = self.support();
        while support != 0 {
            let site = support.trailing_zeros() as usize;
            support &= support - 1;
            let rank = self.letter(site) as u128;
            key |= rank << (2 * (MAX_SITES - 1 - site));
        }
        key
    }
}

// Power of i picked up by a·b on one site where both are non-identity.
fn site_phase(a: Letter, b: Letter) -> u8 {
    use Letter::*;
    match (a, b) {
        (X, Y) | (Y, Z) | (Z, X) => 1,
        (Y, X) | (Z, Y) | (X, Z) => 3,
        _ => 0,
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.word(self.extent().max(1)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(word: &str) -> PauliString {
        PauliString::parse(word).unwrap().0
    }

    #[test]
    fn single_site_phase_table() {
        assert_eq!(s("X").multiply(&s("Y")), (1, s("Z")));
        assert_eq!(s("Y").multiply(&s("Z")), (1, s("X")));
        assert_eq!(s("Z").multiply(&s("X")), (1, s("Y")));
        assert_eq!(s("Y").multiply(&s("X")), (3, s("Z")));
        assert_eq!(s("X").multiply(&s("X")), (0, s("I")));
    }

    #[test]
    fn multi_site_phases_accumulate() {
        // (XZ)(YY) = (XY)(ZY) = (iZ)(-iX) = ZX
        assert_eq!(s("XZ").multiply(&s("YY")), (0, s("ZX")));
    }

    #[test]
    fn commutation_counts_anticommuting_sites() {
        assert!(s("XX").commutes_with(&s("ZZ")));
        assert!(!s("XI").commutes_with(&s("ZI")));
        assert!(s("XXXXIII").commutes_with(&s("IIZZZZI")));
    }

    #[test]
    fn ordering_is_lexicographic_in_the_word() {
        let mut words = [s("ZI"), s("IX"), s("XI"), s("II"), s("YZ"), s("IZ")];
        words.sort();
        let sorted: Vec<String> = words.iter().map(|w| w.word(2)).collect();
        assert_eq!(sorted, ["II", "IX", "IZ", "XI", "YZ", "ZI"]);
    }

    #[test]
    fn relocate_moves_letters() {
        let moved = s("XYZ").relocate(&[4, 0, 2]);
        assert_eq!(moved.word(5), "YIZIX");
    }

    #[test]
    fn parse_rejects_bad_words() {
        assert!(PauliString::parse("XQ").is_err());
        assert!(PauliString::parse("").is_err());
    }
}
