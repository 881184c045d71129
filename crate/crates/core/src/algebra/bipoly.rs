use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::{self, BigRational};
use super::unipoly::UniPoly;

/// Sparse bivariate polynomial `Σ c_{ij} x^i y^j`.
///
/// Monomial indices are zero-based: the coefficient stored at `(i, j)` is
/// the matrix entry `a_{i+1, j+1}` of the associated finite matrix.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BiPoly {
    terms: BTreeMap<(usize, usize), BigRational>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_terms([((0, 0), c)])
    }

    pub fn monomial(c: BigRational, i: usize, j: usize) -> Self {
        Self::from_terms([((i, j), c)])
    }

    /// Sums repeated indices and drops zeros.
    pub fn from_terms<I: IntoIterator<Item = ((usize, usize), BigRational)>>(terms: I) -> Self {
        let mut out = BiPoly::zero();
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    fn add_term(&mut self, k: (usize, usize), c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(k).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn coeff(&self, i: usize, j: usize) -> BigRational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// Largest x exponent present, `None` for zero.
    pub fn degree_x(&self) -> Option<usize> {
        self.terms.keys().map(|k| k.0).max()
    }

    pub fn degree_y(&self) -> Option<usize> {
        self.terms.keys().map(|k| k.1).max()
    }

    pub fn total_degree(&self) -> Option<usize> {
        self.terms.keys().map(|k| k.0 + k.1).max()
    }

    /// True when every term sits on the diagonal `i = j`.
    pub fn is_diagonal(&self) -> bool {
        self.terms.keys().all(|&(i, j)| i == j)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_terms(self.terms.iter().map(|(&k, v)| (k, v * c)))
    }

    pub fn dx(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(k, _)| k.0 > 0)
                .map(|(&(i, j), c)| ((i - 1, j), c * BigRational::from_integer(BigInt::from(i)))),
        )
    }

    pub fn dy(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(k, _)| k.1 > 0)
                .map(|(&(i, j), c)| ((i, j - 1), c * BigRational::from_integer(BigInt::from(j)))),
        )
    }

    /// Multiplies by `x^a y^b`.
    pub fn shift(&self, a: usize, b: usize) -> Self {
        BiPoly {
            terms: self.terms.iter().map(|(&(i, j), c)| ((i + a, j + b), c.clone())).collect(),
        }
    }

    /// Exact division by `x^a y^b`; `None` if some term is not divisible.
    pub fn unshift(&self, a: usize, b: usize) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (&(i, j), c) in &self.terms {
            if i < a || j < b {
                return None;
            }
            terms.insert((i - a, j - b), c.clone());
        }
        Some(BiPoly { terms })
    }

    /// Substitutes `t ↦ xy`.
    pub fn from_diagonal(q: &UniPoly) -> Self {
        Self::from_terms(q.coeffs().iter().enumerate().map(|(k, c)| ((k, k), c.clone())))
    }

    /// Inverse of [`BiPoly::from_diagonal`]; `None` when off-diagonal terms exist.
    pub fn to_diagonal(&self) -> Option<UniPoly> {
        if !self.is_diagonal() {
            return None;
        }
        let n = self.degree_x().map_or(0, |d| d + 1);
        Some(UniPoly::new((0..n).map(|k| self.coeff(k, k)).collect()))
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| rational::to_f64(c) * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }
}

impl<'a> Add<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.add_term(k, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn sub(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.terms {
            out.add_term(k, -c);
        }
        out
    }
}

impl<'a> Mul<&'a BiPoly> for &'a BiPoly {
    type Output = BiPoly;
    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &rhs.terms {
                out.add_term((i + k, j + l), a * b);
            }
        }
        out
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;
    fn neg(self) -> BiPoly {
        BiPoly {
            terms: self.terms.iter().map(|(&k, c)| (k, -c)).collect(),
        }
    }
}

/// Serialized as `[[i, j, "num/den"], ...]` in lexicographic index order.
impl Serialize for BiPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (&(i, j), c) in &self.terms {
            seq.serialize_element(&(i, j, rational::format(c)))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for BiPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let triples = Vec::<(usize, usize, String)>::deserialize(d)?;
        let mut terms = Vec::with_capacity(triples.len());
        for (i, j, c) in triples {
            terms.push(((i, j), rational::parse(&c).map_err(serde::de::Error::custom)?));
        }
        Ok(BiPoly::from_terms(terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::{frac, int};

    #[test]
    fn canonical_form_drops_zeros() {
        let p = BiPoly::from_terms([((1, 0), int(2)), ((1, 0), int(-2)), ((0, 3), int(0))]);
        assert!(p.is_zero());
        let x = BiPoly::monomial(int(1), 1, 0);
        assert!((&x - &x).is_zero());
    }

    #[test]
    fn derivatives() {
        // 3 x^2 y + y^2
        let p = BiPoly::from_terms([((2, 1), int(3)), ((0, 2), int(1))]);
        assert_eq!(p.dx(), BiPoly::monomial(int(6), 1, 1));
        assert_eq!(p.dy(), BiPoly::from_terms([((2, 0), int(3)), ((0, 1), int(2))]));
    }

    #[test]
    fn serde_triples_sorted() {
        let p = BiPoly::from_terms([((1, 1), frac(-1, 192)), ((0, 0), frac(1, 3))]);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"[[0,0,"1/3"],[1,1,"-1/192"]]"#);
        let back: BiPoly = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn diagonal_round_trip() {
        let q = UniPoly::new(vec![frac(1, 3), int(1), int(1), frac(1, 3)]);
        let u = BiPoly::from_diagonal(&q);
        assert!(u.is_diagonal());
        assert_eq!(u.coeff(3, 3), frac(1, 3));
        assert_eq!(u.to_diagonal().unwrap(), q);
    }
}
