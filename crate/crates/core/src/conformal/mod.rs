//! Conformal superalgebras given by structure constants on a free basis, and
//! their correspondence with linear Hamiltonian operators.

mod jacobi;
mod lie;

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::diffop::{check_hamiltonian, BilinearForm, DiffOpEntry, FormError, MatrixDiffOp};
use crate::scalar::{binomial, factorial, falling, int, sign, Scalar};
use crate::superpoly::{Family, Parity, SuperPoly};
use crate::verdict::{Constraint, Residual, Verdict};

pub use jacobi::{check_jacobi_conformal, jacobi_residuals, JacobiKey};
pub use lie::{central_extension, check_cocycle, check_lie_super};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConformalError {
    #[error("duplicate basis element `{0}`")]
    DuplicateBasis(String),
    #[error("basis position {0} is out of range")]
    UnknownBasis(usize),
    #[error(
        "grading violated: parity of target {b3} must be the sum of the parities of {b1} and {b2}"
    )]
    Grading { b1: usize, b2: usize, b3: usize },
    #[error("central constant between {b1} and {b2} requires equal parities")]
    CentralGrading { b1: usize, b2: usize },
    #[error("central constants need a structure with a center")]
    NoCenter,
    #[error(
        "coefficient of D^{order} in entry ({row:?}, {col:?}) is not affine in the generators"
    )]
    NonAffine {
        row: Family,
        col: Family,
        order: u32,
    },
    #[error("family {0:?} does not correspond to a basis element")]
    UncoveredFamily(Family),
    #[error("basis must be purely even")]
    NotEven,
    #[error("form has entries of order {0}; only order {1} is supported here")]
    FormOrder(u32, u32),
    #[error("structure constants do not define a Lie superalgebra")]
    NotLie(Box<Verdict>),
    #[error(transparent)]
    Form(#[from] FormError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElement {
    pub name: String,
    pub parity: Parity,
}

/// An ordered basis with parities. Element `k` corresponds to the family
/// whose index is the number of earlier elements of the same parity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Basis {
    elements: Vec<BasisElement>,
    families: Vec<Family>,
}

impl Basis {
    pub fn new(elements: Vec<BasisElement>) -> Result<Basis, ConformalError> {
        let mut counts = [0u32; 2];
        let mut families = Vec::with_capacity(elements.len());
        for (k, e) in elements.iter().enumerate() {
            if elements[..k].iter().any(|o| o.name == e.name) {
                return Err(ConformalError::DuplicateBasis(e.name.clone()));
            }
            let slot = &mut counts[e.parity.bit() as usize];
            families.push(Family::new(e.parity, *slot));
            *slot += 1;
        }
        Ok(Basis { elements, families })
    }

    /// Convenience constructor from `(name, parity)` pairs.
    pub fn from_pairs<S: Into<String>>(
        pairs: impl IntoIterator<Item = (S, Parity)>,
    ) -> Result<Basis, ConformalError> {
        Basis::new(
            pairs
                .into_iter()
                .map(|(name, parity)| BasisElement {
                    name: name.into(),
                    parity,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[BasisElement] {
        &self.elements
    }

    pub fn parity(&self, k: usize) -> Parity {
        self.elements[k].parity
    }

    pub fn name(&self, k: usize) -> &str {
        &self.elements[k].name
    }

    pub fn family(&self, k: usize) -> Family {
        self.families[k]
    }

    pub fn position_of_family(&self, f: Family) -> Option<usize> {
        self.families.iter().position(|g| *g == f)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.name == name)
    }

    fn check(&self, k: usize) -> Result<(), ConformalError> {
        if k < self.len() {
            Ok(())
        } else {
            Err(ConformalError::UnknownBasis(k))
        }
    }

    fn odd_pair(&self, a: usize, b: usize) -> bool {
        self.parity(a).is_odd() && self.parity(b).is_odd()
    }
}

/// Structure constants `[e_b1, e_b2] = sum_b3 c_{b1,b2}^{b3} e_b3`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LieSuperData {
    basis: Basis,
    constants: BTreeMap<(usize, usize, usize), Scalar>,
}

impl LieSuperData {
    pub fn new(basis: Basis) -> LieSuperData {
        LieSuperData {
            basis,
            constants: BTreeMap::new(),
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn constants(&self) -> &BTreeMap<(usize, usize, usize), Scalar> {
        &self.constants
    }

    pub fn constant(&self, b1: usize, b2: usize, b3: usize) -> Scalar {
        self.constants
            .get(&(b1, b2, b3))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn set(
        &mut self,
        b1: usize,
        b2: usize,
        b3: usize,
        x: Scalar,
    ) -> Result<(), ConformalError> {
        for b in [b1, b2, b3] {
            self.basis.check(b)?;
        }
        if self.basis.parity(b1) + self.basis.parity(b2) != self.basis.parity(b3) {
            return Err(ConformalError::Grading { b1, b2, b3 });
        }
        if x.is_zero() {
            self.constants.remove(&(b1, b2, b3));
        } else {
            self.constants.insert((b1, b2, b3), x);
        }
        Ok(())
    }

    /// `[e_b1, e_b2]` as a combination of basis elements.
    pub fn bracket(&self, b1: usize, b2: usize) -> BTreeMap<usize, Scalar> {
        self.constants
            .range((b1, b2, 0)..=(b1, b2, usize::MAX))
            .map(|(&(_, _, b3), x)| (b3, x.clone()))
            .collect()
    }
}

/// `lambda` key: `(b1, b2, b3, n, m)` for the coefficient of
/// `d^n e_b3 z^{-m-1}` in `Y(e_b1, z) e_b2`.
pub type LambdaKey = (usize, usize, usize, u32, u32);

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConformalStructure {
    basis: Basis,
    lambda: BTreeMap<LambdaKey, Scalar>,
    mu: BTreeMap<(usize, usize, u32), Scalar>,
    has_center: bool,
}

impl ConformalStructure {
    pub fn new(basis: Basis, has_center: bool) -> ConformalStructure {
        ConformalStructure {
            basis,
            lambda: BTreeMap::new(),
            mu: BTreeMap::new(),
            has_center,
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn has_center(&self) -> bool {
        self.has_center
    }

    pub fn lambda(&self) -> &BTreeMap<LambdaKey, Scalar> {
        &self.lambda
    }

    pub fn mu(&self) -> &BTreeMap<(usize, usize, u32), Scalar> {
        &self.mu
    }

    pub fn set_lambda(&mut self, key: LambdaKey, x: Scalar) -> Result<(), ConformalError> {
        let (b1, b2, b3, _, _) = key;
        for b in [b1, b2, b3] {
            self.basis.check(b)?;
        }
        if self.basis.parity(b1) + self.basis.parity(b2) != self.basis.parity(b3) {
            return Err(ConformalError::Grading { b1, b2, b3 });
        }
        if x.is_zero() {
            self.lambda.remove(&key);
        } else {
            self.lambda.insert(key, x);
        }
        Ok(())
    }

    pub fn set_mu(
        &mut self,
        b1: usize,
        b2: usize,
        m: u32,
        x: Scalar,
    ) -> Result<(), ConformalError> {
        self.basis.check(b1)?;
        self.basis.check(b2)?;
        if !self.has_center {
            return Err(ConformalError::NoCenter);
        }
        if self.basis.parity(b1) != self.basis.parity(b2) {
            return Err(ConformalError::CentralGrading { b1, b2 });
        }
        if x.is_zero() {
            self.mu.remove(&(b1, b2, m));
        } else {
            self.mu.insert((b1, b2, m), x);
        }
        Ok(())
    }
}

/// An element `sum x d^k e_b + c 1` of the module generated by the basis
/// (and the center).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConformalElement {
    pub terms: BTreeMap<(usize, u32), Scalar>,
    pub center: Scalar,
}

impl ConformalElement {
    pub fn basis(b: usize) -> ConformalElement {
        ConformalElement::term(b, 0, int(1))
    }

    /// `x d^k e_b`.
    pub fn term(b: usize, k: u32, x: Scalar) -> ConformalElement {
        let mut e = ConformalElement::default();
        e.add(b, k, x);
        e
    }

    pub fn central(c: Scalar) -> ConformalElement {
        ConformalElement {
            terms: BTreeMap::new(),
            center: c,
        }
    }

    pub fn add(&mut self, b: usize, k: u32, x: Scalar) {
        if x.is_zero() {
            return;
        }
        let slot = self.terms.entry((b, k)).or_insert_with(Scalar::zero);
        *slot += x;
        if slot.is_zero() {
            self.terms.remove(&(b, k));
        }
    }

    pub fn add_scaled(&mut self, other: &ConformalElement, c: &Scalar) {
        for (&(b, k), x) in &other.terms {
            self.add(b, k, x * c);
        }
        self.center += &other.center * c;
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.center.is_zero()
    }

    /// Applies `d^k`; the center is killed by `d`.
    pub fn shift(&self, k: u32) -> ConformalElement {
        if k == 0 {
            return self.clone();
        }
        ConformalElement {
            terms: self
                .terms
                .iter()
                .map(|(&(b, j), x)| ((b, j + k), x.clone()))
                .collect(),
            center: Scalar::zero(),
        }
    }
}

/// Coefficients of `z^{-m-1}`.
pub type YProduct = BTreeMap<u32, ConformalElement>;

fn add_to(y: &mut YProduct, m: u32, e: &ConformalElement, c: &Scalar) {
    let slot = y.entry(m).or_default();
    slot.add_scaled(e, c);
    if slot.is_zero() {
        y.remove(&m);
    }
}

/// `Y(e_a, z) e_b` read off the stored constants.
fn basis_product(s: &ConformalStructure, a: usize, b: usize) -> YProduct {
    let mut y = YProduct::new();
    for (&(_, _, c, n, m), x) in s
        .lambda
        .range((a, b, 0, 0, 0)..=(a, b, usize::MAX, u32::MAX, u32::MAX))
    {
        add_to(&mut y, m, &ConformalElement::term(c, n, int(1)), x);
    }
    for (&(_, _, m), x) in s.mu.range((a, b, 0)..=(a, b, u32::MAX)) {
        add_to(&mut y, m, &ConformalElement::central(int(1)), x);
    }
    y
}

/// `Y(d^k e_a, z) d^l e_b`: `d` on the left acts as `d/dz`, on the right as
/// `d - d/dz` applied to the product.
fn derived_product(s: &ConformalStructure, a: usize, k: u32, b: usize, l: u32) -> YProduct {
    let base = basis_product(s, a, b);
    let mut out = YProduct::new();
    for p in 0..=l {
        // (d/dz)^{k+p} with the extra (-1)^p: z^{-m-1} becomes
        // (-1)^k (m+1)...(m+k+p) z^{-m-k-p-1}.
        let shift = k + p;
        let outer = &binomial(l, p) * sign(u64::from(k));
        for (m, e) in &base {
            let c = &outer * falling(m + shift, shift);
            add_to(&mut out, m + shift, &e.shift(l - p), &c);
        }
    }
    out
}

/// The `Y` product extended bilinearly to module elements.
pub fn y_plus_product(
    s: &ConformalStructure,
    a: &ConformalElement,
    b: &ConformalElement,
) -> Result<YProduct, ConformalError> {
    for &(k, _) in a.terms.keys().chain(b.terms.keys()) {
        s.basis.check(k)?;
    }
    let mut out = YProduct::new();
    for (&(i, k), x) in &a.terms {
        for (&(j, l), y) in &b.terms {
            let c = x * y;
            for (m, e) in derived_product(s, i, k, j, l) {
                add_to(&mut out, m, &e, &c);
            }
        }
    }
    Ok(out)
}

/// The right-hand side of the conjugation identity as a map on lambda
/// tables: entry `(a, b, c, n', p)` feeds `(b, a, c, n' + p - m, m)` for
/// `m <= p` with weight `-(-1)^{|a||b|} (-1)^p / (p - m)!`.
pub fn conjugation_transform(
    basis: &Basis,
    lambda: &BTreeMap<LambdaKey, Scalar>,
) -> BTreeMap<LambdaKey, Scalar> {
    let mut out: BTreeMap<LambdaKey, Scalar> = BTreeMap::new();
    for (&(a, b, c, n0, p), x) in lambda {
        let outer = if basis.odd_pair(a, b) {
            sign(u64::from(p))
        } else {
            -sign(u64::from(p))
        };
        for m in 0..=p {
            let w = &outer / factorial(p - m) * x;
            let slot = out
                .entry((b, a, c, n0 + p - m, m))
                .or_insert_with(Scalar::zero);
            *slot += w;
        }
    }
    out.retain(|_, x| !x.is_zero());
    out
}

fn central_mirror_sign(basis: &Basis, a: usize, b: usize, m: u32) -> Scalar {
    let s = sign(u64::from(m) + 1);
    if basis.odd_pair(a, b) {
        -s
    } else {
        s
    }
}

/// Checks the conjugation identity on lambda and, for centered structures,
/// `mu^m_{a,b} = (-1)^{|a||b|} (-1)^{m+1} mu^m_{b,a}`.
pub fn check_conjugation(s: &ConformalStructure) -> Verdict {
    let rhs = conjugation_transform(&s.basis, &s.lambda);
    let mut v = Verdict::pass();
    let keys: std::collections::BTreeSet<_> = s.lambda.keys().chain(rhs.keys()).copied().collect();
    for key in keys {
        let lhs = s.lambda.get(&key).cloned().unwrap_or_else(Scalar::zero);
        let r = rhs.get(&key).cloned().unwrap_or_else(Scalar::zero);
        let diff = lhs - r;
        if !diff.is_zero() {
            let (b1, b2, b3, n, m) = key;
            v.push(
                Constraint::Conjugation { b1, b2, b3, n, m },
                Residual::Scalar(diff),
            );
        }
    }
    let keys: std::collections::BTreeSet<_> =
        s.mu.keys()
            .map(|&(a, b, m)| (a.min(b), a.max(b), m))
            .collect();
    for (a, b, m) in keys {
        let x = s.mu.get(&(a, b, m)).cloned().unwrap_or_else(Scalar::zero);
        let y = s.mu.get(&(b, a, m)).cloned().unwrap_or_else(Scalar::zero);
        let diff = x - central_mirror_sign(&s.basis, a, b, m) * y;
        if !diff.is_zero() {
            v.push(
                Constraint::CentralConjugation { b1: a, b2: b, m },
                Residual::Scalar(diff),
            );
        }
    }
    v
}

/// Conjugation and Jacobi for center-free structures; centered structures
/// are decided through their Hamiltonian operator after the conjugation
/// check.
pub fn check_conformal(s: &ConformalStructure) -> Verdict {
    let mut v = check_conjugation(s);
    if s.has_center {
        if v.passed() {
            v = check_hamiltonian(&to_hamiltonian(s));
        }
        return v;
    }
    v.absorb(check_jacobi_conformal(s));
    v
}

/// The operator with `H[b2, b1] = sum lambda^{b3,n,m}_{b1,b2}/m! psi_b3^{(n)} D^m
/// + sum mu^m_{b1,b2}/m! D^m`; note the column index comes first.
pub fn to_hamiltonian(s: &ConformalStructure) -> MatrixDiffOp {
    let mut h = MatrixDiffOp::new();
    for (&(b1, b2, b3, n, m), x) in &s.lambda {
        let coeff = SuperPoly::generator(s.basis.family(b3).gen(n)).scale(&(x / factorial(m)));
        h.accumulate(
            s.basis.family(b2),
            s.basis.family(b1),
            &DiffOpEntry::term(m, coeff),
        );
    }
    for (&(b1, b2, m), x) in &s.mu {
        h.accumulate(
            s.basis.family(b2),
            s.basis.family(b1),
            &DiffOpEntry::constant(m, x / factorial(m)),
        );
    }
    h
}

/// Inverse of [`to_hamiltonian`] for operators whose coefficients are affine
/// in the generators. The structure has a center iff some coefficient has a
/// constant part.
pub fn from_linear_operator(
    h: &MatrixDiffOp,
    basis: &Basis,
) -> Result<ConformalStructure, ConformalError> {
    let locate = |f: Family| {
        basis
            .position_of_family(f)
            .ok_or(ConformalError::UncoveredFamily(f))
    };
    let mut lambda: BTreeMap<LambdaKey, Scalar> = BTreeMap::new();
    let mut mu: BTreeMap<(usize, usize, u32), Scalar> = BTreeMap::new();
    for (row, col, entry) in h.entries() {
        let (b2, b1) = (locate(row)?, locate(col)?);
        for (m, a) in entry.terms() {
            let scale = factorial(m);
            for (mono, x) in a.terms() {
                match mono.factors() {
                    [] => {
                        *mu.entry((b1, b2, m)).or_insert_with(Scalar::zero) += x * &scale;
                    }
                    [g] => {
                        let b3 = locate(g.family)?;
                        *lambda
                            .entry((b1, b2, b3, g.order, m))
                            .or_insert_with(Scalar::zero) += x * &scale;
                    }
                    _ => return Err(ConformalError::NonAffine { row, col, order: m }),
                }
            }
        }
    }
    let mut s = ConformalStructure::new(basis.clone(), !mu.is_empty());
    for (k, x) in lambda {
        s.set_lambda(k, x)?;
    }
    for ((a, b, m), x) in mu {
        s.set_mu(a, b, m, x)?;
    }
    Ok(s)
}

/// The affine structure `Y(u, z) v = [u, v] z^{-1} + <u, v> 1 z^{-2}` built
/// from an even Lie algebra and an order-one form on its canonical families.
pub fn affine_structure(
    lie: &LieSuperData,
    form: &BilinearForm,
) -> Result<ConformalStructure, ConformalError> {
    let basis = lie.basis();
    if basis.elements().iter().any(|e| e.parity.is_odd()) {
        return Err(ConformalError::NotEven);
    }
    if let Some(m) = form.orders().into_iter().find(|m| *m != 1) {
        return Err(ConformalError::FormOrder(m, 1));
    }
    let mut s = ConformalStructure::new(basis.clone(), true);
    for (&(b1, b2, b3), x) in lie.constants() {
        s.set_lambda((b1, b2, b3, 0, 0), x.clone())?;
    }
    for ((a, b, _), x) in form.entries() {
        let pa = basis
            .position_of_family(a)
            .ok_or(ConformalError::UncoveredFamily(a))?;
        let pb = basis
            .position_of_family(b)
            .ok_or(ConformalError::UncoveredFamily(b))?;
        s.set_mu(pa, pb, 1, x.clone())?;
    }
    Ok(s)
}
