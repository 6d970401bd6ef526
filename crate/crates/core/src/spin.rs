//! Half-integer spin quantum numbers.

use crate::{Error, Result};

/// A spin quantum number `j`, restricted to non-negative integers and
/// half-integers. Stored as the doubled value `2j` so that equality and
/// arithmetic on magnetic quantum numbers stay exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Spin {
    doubled: u32,
}

impl Spin {
    /// Validates that `j` is a non-negative integer or half-integer.
    pub fn new(j: f64) -> Result<Self> {
        if !j.is_finite() || j < 0.0 {
            return Err(Error::Domain(format!("spin j = {j} must be finite and >= 0")));
        }
        let doubled = 2.0 * j;
        if doubled.fract() != 0.0 || doubled > u32::MAX as f64 {
            return Err(Error::Domain(format!(
                "spin j = {j} is neither an integer nor a half-integer"
            )));
        }
        Ok(Self { doubled: doubled as u32 })
    }

    /// Builds from the doubled value `2j`.
    pub fn from_doubled(doubled: u32) -> Self {
        Self { doubled }
    }

    /// The doubled value `2j`.
    pub fn doubled(self) -> u32 {
        self.doubled
    }

    /// The value of `j` as a float.
    pub fn value(self) -> f64 {
        self.doubled as f64 / 2.0
    }

    /// Dimension of the spin-j representation, `2j + 1`.
    pub fn dim(self) -> usize {
        self.doubled as usize + 1
    }

    /// The Casimir eigenvalue `j(j+1)`.
    pub fn casimir(self) -> f64 {
        self.value() * (self.value() + 1.0)
    }

    /// Classical magnitude `sqrt(j(j+1))` matched to this quantum number.
    pub fn magnitude(self) -> f64 {
        self.casimir().sqrt()
    }

    /// Magnetic quantum number at basis index `i`, ordered `m = j, j-1, ..., -j`.
    pub fn m_at(self, i: usize) -> f64 {
        (self.doubled as f64 - 2.0 * i as f64) / 2.0
    }

    /// Doubled magnetic quantum number `2m` at basis index `i`.
    pub fn doubled_m_at(self, i: usize) -> i64 {
        self.doubled as i64 - 2 * i as i64
    }

    /// Iterator over `m` values in basis order (descending from `+j`).
    pub fn m_values(self) -> impl Iterator<Item = f64> {
        (0..self.dim()).map(move |i| self.m_at(i))
    }
}

impl std::fmt::Display for Spin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.doubled.is_multiple_of(2) {
            write!(f, "{}", self.doubled / 2)
        } else {
            write!(f, "{}/2", self.doubled)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_integers_and_half_integers() {
        assert_eq!(Spin::new(0.0).unwrap().dim(), 1);
        assert_eq!(Spin::new(0.5).unwrap().dim(), 2);
        assert_eq!(Spin::new(154.0).unwrap().dim(), 309);
        assert_eq!(Spin::new(27.5).unwrap().doubled(), 55);
    }

    #[test]
    fn rejects_invalid_spins() {
        assert!(Spin::new(0.3).is_err());
        assert!(Spin::new(-1.0).is_err());
        assert!(Spin::new(f64::NAN).is_err());
        assert!(Spin::new(f64::INFINITY).is_err());
    }

    #[test]
    fn m_ordering_descends_from_j() {
        let j = Spin::new(1.5).unwrap();
        let ms: Vec<f64> = j.m_values().collect();
        assert_eq!(ms, vec![1.5, 0.5, -0.5, -1.5]);
        assert_eq!(j.m_at(0), 1.5);
        assert_eq!(j.m_at(3), -1.5);
    }

    #[test]
    fn display_shows_half_integers_as_fractions() {
        assert_eq!(Spin::new(2.0).unwrap().to_string(), "2");
        assert_eq!(Spin::new(1.5).unwrap().to_string(), "3/2");
    }
}
