//! Super-commutative differential polynomials with exact coefficients.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::scalar::{int, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn bit(self) -> u64 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn from_bit(bit: u64) -> Parity {
        if bit.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        Parity::from_bit(self.bit() + rhs.bit())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A family of generators `psi_{parity, index}`. Human-readable names live in
/// the frontend; the kernel only needs the `(parity, index)` key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Family {
    pub parity: Parity,
    pub index: u32,
}

impl Family {
    pub fn new(parity: Parity, index: u32) -> Family {
        Family { parity, index }
    }

    pub fn even(index: u32) -> Family {
        Family::new(Parity::Even, index)
    }

    pub fn odd(index: u32) -> Family {
        Family::new(Parity::Odd, index)
    }

    /// The `n`-th derivative of this family as a generator.
    pub fn gen(self, order: u32) -> Generator {
        Generator {
            family: self,
            order,
        }
    }
}

/// `psi^{(order)}` for some family. The derived ordering (parity, index,
/// order) is the normal order of factors inside a monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub family: Family,
    pub order: u32,
}

impl Generator {
    pub fn parity(self) -> Parity {
        self.family.parity
    }

    pub fn is_odd(self) -> bool {
        self.family.parity.is_odd()
    }

    pub fn derivative(self) -> Generator {
        Generator {
            family: self.family,
            order: self.order + 1,
        }
    }
}

/// A normally ordered product of generators without odd repeats. The empty
/// monomial is the unit.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<Generator>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn factors(&self) -> &[Generator] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parity(&self) -> Parity {
        Parity::from_bit(self.0.iter().filter(|g| g.is_odd()).count() as u64)
    }

    /// Sorts an arbitrary product into normal order. Returns `None` when an
    /// odd generator repeats, otherwise whether the reordering flipped the sign.
    pub fn normalize(mut factors: Vec<Generator>) -> Option<(bool, Monomial)> {
        let mut negate = false;
        for i in 1..factors.len() {
            let mut j = i;
            while j > 0 && factors[j - 1] > factors[j] {
                if factors[j - 1].is_odd() && factors[j].is_odd() {
                    negate = !negate;
                }
                factors.swap(j - 1, j);
                j -= 1;
            }
        }
        if factors.windows(2).any(|w| w[0] == w[1] && w[0].is_odd()) {
            return None;
        }
        Some((negate, Monomial(factors)))
    }

    /// Product `self * rhs` of two normal monomials.
    pub fn mul(&self, rhs: &Monomial) -> Option<(bool, Monomial)> {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let mut odd_left = a.iter().filter(|g| g.is_odd()).count();
        let mut negate = false;
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let take_right = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => {
                    if x == y && x.is_odd() {
                        return None;
                    }
                    y < x
                }
                (None, Some(_)) => true,
                _ => false,
            };
            if take_right {
                let y = b[j];
                if y.is_odd() && odd_left % 2 == 1 {
                    negate = !negate;
                }
                out.push(y);
                j += 1;
            } else {
                let x = a[i];
                if x.is_odd() {
                    odd_left -= 1;
                }
                out.push(x);
                i += 1;
            }
        }
        Some((negate, Monomial(out)))
    }
}

impl From<Generator> for Monomial {
    fn from(g: Generator) -> Monomial {
        Monomial(vec![g])
    }
}

/// Parity classification of a polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyParity {
    Even,
    Odd,
    Mixed,
    Zero,
}

impl PolyParity {
    /// Whether the polynomial lies in the given homogeneous component
    /// (zero lies in both).
    pub fn fits(self, parity: Parity) -> bool {
        match self {
            PolyParity::Zero => true,
            PolyParity::Mixed => false,
            PolyParity::Even => parity == Parity::Even,
            PolyParity::Odd => parity == Parity::Odd,
        }
    }
}

impl From<Parity> for PolyParity {
    fn from(p: Parity) -> PolyParity {
        match p {
            Parity::Even => PolyParity::Even,
            Parity::Odd => PolyParity::Odd,
        }
    }
}

/// An element of the super differential polynomial algebra, stored as a map
/// from normal monomials to nonzero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SuperPoly {
    terms: BTreeMap<Monomial, Scalar>,
}

impl SuperPoly {
    pub fn zero() -> SuperPoly {
        SuperPoly::default()
    }

    pub fn constant(c: Scalar) -> SuperPoly {
        let mut p = SuperPoly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn one() -> SuperPoly {
        SuperPoly::constant(int(1))
    }

    pub fn generator(g: Generator) -> SuperPoly {
        SuperPoly::term(g.into(), int(1))
    }

    pub fn term(m: Monomial, c: Scalar) -> SuperPoly {
        let mut p = SuperPoly::zero();
        p.add_term(m, c);
        p
    }

    /// Product of generators in the given (not necessarily normal) order.
    pub fn product(factors: Vec<Generator>, c: Scalar) -> SuperPoly {
        match Monomial::normalize(factors) {
            None => SuperPoly::zero(),
            Some((negate, m)) => SuperPoly::term(m, if negate { -c } else { c }),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn constant_term(&self) -> Scalar {
        self.coefficient(&Monomial::one())
    }

    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Scalar) -> SuperPoly {
        if c.is_zero() {
            return SuperPoly::zero();
        }
        SuperPoly {
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn parity_of(&self) -> PolyParity {
        let mut seen: Option<Parity> = None;
        for m in self.terms.keys() {
            let p = m.parity();
            match seen {
                None => seen = Some(p),
                Some(q) if q != p => return PolyParity::Mixed,
                _ => {}
            }
        }
        seen.map_or(PolyParity::Zero, PolyParity::from)
    }

    pub fn generators(&self) -> BTreeSet<Generator> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().iter().copied())
            .collect()
    }

    pub fn families(&self) -> BTreeSet<Family> {
        self.generators().into_iter().map(|g| g.family).collect()
    }

    pub fn max_order(&self, f: Family) -> Option<u32> {
        self.terms
            .keys()
            .flat_map(|m| m.factors().iter())
            .filter(|g| g.family == f)
            .map(|g| g.order)
            .max()
    }

    /// Total derivative `d/dx`, an even derivation shifting every generator.
    pub fn total_derivative(&self) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for (m, c) in &self.terms {
            for i in 0..m.len() {
                let mut factors = m.0.clone();
                factors[i] = factors[i].derivative();
                if let Some((negate, n)) = Monomial::normalize(factors) {
                    out.add_term(n, if negate { -c.clone() } else { c.clone() });
                }
            }
        }
        out
    }

    pub fn total_derivative_n(&self, n: u32) -> SuperPoly {
        let mut p = self.clone();
        for _ in 0..n {
            if p.is_zero() {
                break;
            }
            p = p.total_derivative();
        }
        p
    }

    /// Left partial derivative: passing `g` over a factor `x` contributes
    /// `(-1)^{|g||x|}`.
    pub fn partial(&self, g: Generator) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for (m, c) in &self.terms {
            let mut odd_before = 0usize;
            for (i, x) in m.0.iter().enumerate() {
                if *x == g {
                    let mut rest = m.0.clone();
                    rest.remove(i);
                    let negate = g.is_odd() && odd_before % 2 == 1;
                    out.add_term(Monomial(rest), if negate { -c.clone() } else { c.clone() });
                }
                if x.is_odd() {
                    odd_before += 1;
                }
            }
        }
        out
    }

    /// The degree operator: multiplies each monomial by its length.
    pub fn degree_operator(&self) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * int(m.len() as i64));
        }
        out
    }

    /// Inverse of the degree operator on the positive-degree part; the
    /// constant term is discarded.
    pub fn inverse_degree_operator(&self) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for (m, c) in &self.terms {
            if !m.is_empty() {
                out.add_term(m.clone(), c / int(m.len() as i64));
            }
        }
        out
    }

    /// Renames generator families; each factor keeps its derivative order.
    pub fn map_families(&self, f: impl Fn(Family) -> Family) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for (m, c) in &self.terms {
            let factors =
                m.0.iter()
                    .map(|g| Generator {
                        family: f(g.family),
                        order: g.order,
                    })
                    .collect();
            out += SuperPoly::product(factors, c.clone());
        }
        out
    }
}

impl From<Scalar> for SuperPoly {
    fn from(c: Scalar) -> SuperPoly {
        SuperPoly::constant(c)
    }
}

impl From<Generator> for SuperPoly {
    fn from(g: Generator) -> SuperPoly {
        SuperPoly::generator(g)
    }
}

impl AddAssign<&SuperPoly> for SuperPoly {
    fn add_assign(&mut self, rhs: &SuperPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl AddAssign for SuperPoly {
    fn add_assign(&mut self, rhs: SuperPoly) {
        if self.terms.len() < rhs.terms.len() {
            let lhs = std::mem::replace(self, rhs);
            *self += &lhs;
        } else {
            *self += &rhs;
        }
    }
}

impl SubAssign<&SuperPoly> for SuperPoly {
    fn sub_assign(&mut self, rhs: &SuperPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl SubAssign for SuperPoly {
    fn sub_assign(&mut self, rhs: SuperPoly) {
        *self -= &rhs;
    }
}

impl Add for &SuperPoly {
    type Output = SuperPoly;
    fn add(self, rhs: &SuperPoly) -> SuperPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for SuperPoly {
    type Output = SuperPoly;
    fn add(mut self, rhs: SuperPoly) -> SuperPoly {
        self += rhs;
        self
    }
}

impl Sub for &SuperPoly {
    type Output = SuperPoly;
    fn sub(self, rhs: &SuperPoly) -> SuperPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for SuperPoly {
    type Output = SuperPoly;
    fn sub(mut self, rhs: SuperPoly) -> SuperPoly {
        self -= &rhs;
        self
    }
}

impl Neg for &SuperPoly {
    type Output = SuperPoly;
    fn neg(self) -> SuperPoly {
        SuperPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for SuperPoly {
    type Output = SuperPoly;
    fn neg(self) -> SuperPoly {
        -&self
    }
}

impl Mul for &SuperPoly {
    type Output = SuperPoly;
    fn mul(self, rhs: &SuperPoly) -> SuperPoly {
        let mut out = SuperPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                if let Some((negate, m)) = ma.mul(mb) {
                    let c = ca * cb;
                    out.add_term(m, if negate { -c } else { c });
                }
            }
        }
        out
    }
}

impl Mul for SuperPoly {
    type Output = SuperPoly;
    fn mul(self, rhs: SuperPoly) -> SuperPoly {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn psi(n: u32) -> SuperPoly {
        Family::even(0).gen(n).into()
    }

    fn theta(n: u32) -> SuperPoly {
        Family::odd(0).gen(n).into()
    }

    fn c(n: i64) -> SuperPoly {
        SuperPoly::constant(int(n))
    }

    #[test]
    fn odd_square_vanishes() {
        assert!((&theta(0) * &theta(0)).is_zero());
    }

    #[test]
    fn odd_reordering_flips_sign() {
        let lhs = &theta(1) * &theta(0);
        assert_eq!(lhs, -(&theta(0) * &theta(1)));
    }

    #[test]
    fn even_odd_cross_terms_cancel() {
        let p = &psi(0) + &theta(0);
        let q = &psi(0) - &theta(0);
        assert_eq!(&p * &q, &psi(0) * &psi(0));
    }

    #[test]
    fn total_derivative_examples() {
        assert_eq!(
            (&psi(0) * &psi(0)).total_derivative(),
            &c(2) * &(&psi(0) * &psi(1))
        );
        assert_eq!(
            (&theta(0) * &theta(1)).total_derivative(),
            &theta(0) * &theta(2)
        );
        assert!(c(5).total_derivative().is_zero());
    }

    #[test]
    fn partial_derivative_examples() {
        let g = Family::even(0).gen(0);
        assert_eq!((&psi(0) * &psi(0)).partial(g), &c(2) * &psi(0));
        assert!((&psi(0) * &psi(0))
            .partial(Family::even(0).gen(1))
            .is_zero());
        let tt = &theta(0) * &theta(1);
        assert_eq!(tt.partial(Family::odd(0).gen(1)), -theta(0));
        assert_eq!(tt.partial(Family::odd(0).gen(0)), theta(1));
    }

    #[test]
    fn degree_operator_examples() {
        let p = &psi(0) * &psi(2);
        assert_eq!(p.degree_operator(), &c(2) * &p);
        assert!(c(1).degree_operator().is_zero());
        let q = &(&theta(0) * &theta(1)) * &psi(0);
        assert_eq!(q.degree_operator(), &c(3) * &q);
        assert_eq!(q.degree_operator().inverse_degree_operator(), q);
    }

    #[test]
    fn parity_examples() {
        assert_eq!((&psi(0) * &theta(0)).parity_of(), PolyParity::Odd);
        assert_eq!((&psi(0) + &theta(0)).parity_of(), PolyParity::Mixed);
        assert_eq!(SuperPoly::zero().parity_of(), PolyParity::Zero);
        assert_eq!(c(3).parity_of(), PolyParity::Even);
    }

    #[test]
    fn product_normalizes_arbitrary_order() {
        let t = Family::odd(0);
        let s = Family::odd(1);
        let p = SuperPoly::product(vec![s.gen(0), t.gen(1), t.gen(0)], ratio(1, 2));
        let expected = SuperPoly::product(vec![t.gen(0), t.gen(1), s.gen(0)], ratio(-1, 2));
        assert_eq!(p, expected);
        assert!(SuperPoly::product(vec![t.gen(0), s.gen(0), t.gen(0)], int(1)).is_zero());
    }
}
