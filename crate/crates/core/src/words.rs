//! Exact symbolic algebra of words in `V`, `P0` and powers of `Q0/H0`.
//!
//! Reduction rules: `P·P = P`, `P·R = R·P = 0`, `R^a·R^b = R^{a+b}`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    V,
    P,
    /// `(Q0/H0)^k`, k ≥ 1.
    R(u32),
}

pub type Word = Vec<Letter>;

/// Reduced product of two reduced words; `None` when it vanishes.
pub fn concat(a: &[Letter], b: &[Letter]) -> Option<Word> {
    let (Some(&x), Some(&y)) = (a.last(), b.first()) else {
        return Some([a, b].concat());
    };
    let mid = match (x, y) {
        (Letter::P, Letter::P) => Letter::P,
        (Letter::P, Letter::R(_)) | (Letter::R(_), Letter::P) => return None,
        (Letter::R(i), Letter::R(j)) => Letter::R(i + j),
        _ => return Some([a, b].concat()),
    };
    let mut w = a[..a.len() - 1].to_vec();
    w.push(mid);
    w.extend_from_slice(&b[1..]);
    Some(w)
}

/// Linear combination of words with exact rational coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    pub terms: BTreeMap<Word, BigRational>,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn word(w: &[Letter]) -> Self {
        Self::term(w, BigRational::one())
    }

    pub fn term(w: &[Letter], c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(w.to_vec(), c);
        p
    }

    pub fn identity() -> Self {
        Self::word(&[])
    }

    pub fn v() -> Self {
        Self::word(&[Letter::V])
    }

    pub fn p() -> Self {
        Self::word(&[Letter::P])
    }

    pub fn r() -> Self {
        Self::word(&[Letter::R(1)])
    }

    /// `Q0 = 1 − P0`.
    pub fn q() -> Self {
        Self::identity().sub(&Self::p())
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

    pub fn add_term(&mut self, w: Word, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (w, c) in &o.terms {
            r.add_term(w.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-BigRational::one()))
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(w, c)| (w.clone(), c * s)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                if let Some(w) = concat(a, b) {
                    r.add_term(w, ca * cb);
                }
            }
        }
        r
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    /// Reversal of every word (the adjoint, all letters being Hermitian).
    pub fn adjoint(&self) -> Self {
        Self { terms: self.terms.iter().map(|(w, c)| (w.iter().rev().copied().collect(), c.clone())).collect() }
    }

    pub fn sandwich_p(&self) -> Self {
        Self::p().mul(self).mul(&Self::p())
    }

    /// Number of `V` letters, if uniform across terms.
    pub fn v_degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|w| w.iter().filter(|l| **l == Letter::V).count());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            write!(f, "{sign}{} ", c.abs())?;
            for l in w {
                match l {
                    Letter::V => write!(f, "V")?,
                    Letter::P => write!(f, "P")?,
                    Letter::R(1) => write!(f, "R")?,
                    Letter::R(k) => write!(f, "R^{k}")?,
                }
            }
        }
        Ok(())
    }
}

/// `ℒ(X) = R X P − P X R`.
pub fn superop_l(x: &Poly) -> Poly {
    Poly::r().mul(x).mul(&Poly::p()).sub(&Poly::p().mul(x).mul(&Poly::r()))
}

/// `X_d = P X P + Q X Q`.
pub fn diag_part(x: &Poly) -> Poly {
    let (p, q) = (Poly::p(), Poly::q());
    p.mul(x).mul(&p).add(&q.mul(x).mul(&q))
}

/// `X_od = P X Q + Q X P`.
pub fn offdiag_part(x: &Poly) -> Poly {
    let (p, q) = (Poly::p(), Poly::q());
    p.mul(x).mul(&q).add(&q.mul(x).mul(&p))
}

/// Splits a sandwiched chain `P V B_1 V … B_m V P` into its inner letters `B_i`.
pub fn chain_letters(w: &[Letter]) -> Option<Vec<Letter>> {
    if w.len() < 3 || w[0] != Letter::P || w[w.len() - 1] != Letter::P || w.len().is_multiple_of(2) {
        return None;
    }
    let inner = &w[1..w.len() - 1];
    let mut out = Vec::new();
    for (i, l) in inner.iter().enumerate() {
        if i % 2 == 0 {
            if *l != Letter::V {
                return None;
            }
        } else if *l == Letter::V {
            return None;
        } else {
            out.push(*l);
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Letter::*;

    #[test]
    fn reduction_rules() {
        assert_eq!(concat(&[V, P], &[P, V]), Some(vec![V, P, V]));
        assert_eq!(concat(&[V, R(1)], &[P]), None);
        assert_eq!(concat(&[R(2)], &[R(1), V]), Some(vec![R(3), V]));
        assert_eq!(concat(&[], &[V]), Some(vec![V]));
    }

    #[test]
    fn q_is_idempotent_and_kills_p() {
        let q = Poly::q();
        assert_eq!(q.mul(&q), q);
        assert!(q.mul(&Poly::p()).is_zero());
        assert_eq!(q.mul(&Poly::r()), Poly::r());
    }

    #[test]
    fn second_order_is_minus_pvrvp() {
        let v = Poly::v();
        let s1 = superop_l(&v);
        let w = s1.commutator(&offdiag_part(&v)).scale(&rat(1, 2));
        let t = w.sandwich_p();
        assert_eq!(t, Poly::term(&[P, V, R(1), V, P], rat(-1, 1)));
    }

    #[test]
    fn chain_parsing() {
        assert_eq!(chain_letters(&[P, V, R(2), V, P, V, P]), Some(vec![R(2), P]));
        assert_eq!(chain_letters(&[P, V, P]), Some(vec![]));
        assert_eq!(chain_letters(&[P, V, V, P]), None);
    }

    #[test]
    fn adjoint_reverses() {
        let p = Poly::term(&[R(1), V, P], rat(2, 3));
        assert_eq!(p.adjoint(), Poly::term(&[P, V, R(1)], rat(2, 3)));
    }
}
