//! Matrix differential operators with super differential polynomial
//! coefficients, their adjoints, and the Hamiltonian property.

mod closedness;
mod constructors;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Neg, Sub};

use thiserror::Error;

use crate::scalar::{binomial, sign, Scalar};
use crate::superpoly::{Family, Parity, SuperPoly};
use crate::varcalc::{
    evolutionary_derivative, is_even_sector, variational_derivative, Covector, VectorField,
};
use crate::verdict::{Constraint, Residual, Verdict};

pub use closedness::{
    check_hamiltonian, check_pair, closedness_density, closedness_residual, schouten_bracket,
    schouten_density, ClosednessCertificate, TestCovectors,
};
pub use constructors::{
    bilinear_form_operator, form_symmetry_sign, linear_lie_operator, BilinearForm, FormError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffOpError {
    #[error("coefficient of D^{order} in entry ({row:?}, {col:?}) must be {expected}")]
    EntryParity {
        row: Family,
        col: Family,
        order: u32,
        expected: Parity,
    },
    #[error("covector component at {family:?} does not have the parity of its family")]
    CovectorParity { family: Family },
    #[error("density is not even")]
    DensityParity,
    #[error("operator is not skew-symmetric")]
    NotSkew(Box<Verdict>),
}

/// `sum_n a_n D^n`, coefficients stored to the left of the powers of `D`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiffOpEntry {
    coeffs: BTreeMap<u32, SuperPoly>,
}

impl DiffOpEntry {
    pub fn zero() -> DiffOpEntry {
        DiffOpEntry::default()
    }

    pub fn term(order: u32, a: SuperPoly) -> DiffOpEntry {
        let mut e = DiffOpEntry::zero();
        e.add_term(order, a);
        e
    }

    /// Constant coefficient `c D^order`.
    pub fn constant(order: u32, c: Scalar) -> DiffOpEntry {
        DiffOpEntry::term(order, SuperPoly::constant(c))
    }

    pub fn add_term(&mut self, order: u32, a: SuperPoly) {
        if a.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(order).or_default();
        *slot += a;
        if slot.is_zero() {
            self.coeffs.remove(&order);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (u32, &SuperPoly)> {
        self.coeffs.iter().map(|(n, a)| (*n, a))
    }

    pub fn coefficient(&self, order: u32) -> SuperPoly {
        self.coeffs.get(&order).cloned().unwrap_or_default()
    }

    pub fn apply(&self, u: &SuperPoly) -> SuperPoly {
        let mut out = SuperPoly::zero();
        let mut dn = u.clone();
        let mut at = 0;
        for (n, a) in &self.coeffs {
            while at < *n {
                dn = dn.total_derivative();
                at += 1;
            }
            out += a * &dn;
        }
        out
    }

    pub fn map_coefficients(&self, f: impl Fn(&SuperPoly) -> SuperPoly) -> DiffOpEntry {
        let mut out = DiffOpEntry::zero();
        for (n, a) in &self.coeffs {
            out.add_term(*n, f(a));
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> DiffOpEntry {
        self.map_coefficients(|a| a.scale(c))
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.values().all(|a| a.generators().is_empty())
    }

    /// `(-D)^n o a` for each term, expanded back into normal form.
    fn adjoint_terms(&self) -> DiffOpEntry {
        let mut out = DiffOpEntry::zero();
        for (n, a) in &self.coeffs {
            let s = sign(u64::from(*n));
            let mut da = a.clone();
            for k in (0..=*n).rev() {
                // da = D^{n-k}(a)
                out.add_term(k, da.scale(&(&s * binomial(*n, k))));
                if k > 0 {
                    da = da.total_derivative();
                }
            }
        }
        out
    }
}

impl Add for &DiffOpEntry {
    type Output = DiffOpEntry;
    fn add(self, rhs: &DiffOpEntry) -> DiffOpEntry {
        let mut out = self.clone();
        for (n, a) in &rhs.coeffs {
            out.add_term(*n, a.clone());
        }
        out
    }
}

impl Neg for &DiffOpEntry {
    type Output = DiffOpEntry;
    fn neg(self) -> DiffOpEntry {
        self.map_coefficients(|a| -a)
    }
}

impl Sub for &DiffOpEntry {
    type Output = DiffOpEntry;
    fn sub(self, rhs: &DiffOpEntry) -> DiffOpEntry {
        self + &(-rhs)
    }
}

/// A finitely supported matrix of differential operators acting on covectors:
/// `H(u)_row = sum_col H[row, col](u_col)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MatrixDiffOp {
    entries: BTreeMap<(Family, Family), DiffOpEntry>,
}

impl MatrixDiffOp {
    pub fn new() -> MatrixDiffOp {
        MatrixDiffOp::default()
    }

    fn check_entry(row: Family, col: Family, entry: &DiffOpEntry) -> Result<(), DiffOpError> {
        let expected = row.parity + col.parity;
        for (order, a) in entry.terms() {
            if !a.parity_of().fits(expected) {
                return Err(DiffOpError::EntryParity {
                    row,
                    col,
                    order,
                    expected,
                });
            }
        }
        Ok(())
    }

    /// Adds `entry` to the entry at `(row, col)`.
    pub fn add_entry(
        &mut self,
        row: Family,
        col: Family,
        entry: DiffOpEntry,
    ) -> Result<(), DiffOpError> {
        MatrixDiffOp::check_entry(row, col, &entry)?;
        self.accumulate(row, col, &entry);
        Ok(())
    }

    // Callers guarantee the parity constraint.
    pub(crate) fn accumulate(&mut self, row: Family, col: Family, entry: &DiffOpEntry) {
        if entry.is_zero() {
            return;
        }
        let slot = self.entries.entry((row, col)).or_default();
        *slot = &*slot + entry;
        if slot.is_zero() {
            self.entries.remove(&(row, col));
        }
    }

    pub fn entry(&self, row: Family, col: Family) -> Option<&DiffOpEntry> {
        self.entries.get(&(row, col))
    }

    pub fn entries(&self) -> impl Iterator<Item = (Family, Family, &DiffOpEntry)> {
        self.entries.iter().map(|((r, c), e)| (*r, *c, e))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Row and column families.
    pub fn index_families(&self) -> BTreeSet<Family> {
        self.entries.keys().flat_map(|(r, c)| [*r, *c]).collect()
    }

    /// Row, column and coefficient families.
    pub fn all_families(&self) -> BTreeSet<Family> {
        let mut out = self.index_families();
        for e in self.entries.values() {
            for (_, a) in e.terms() {
                out.extend(a.families());
            }
        }
        out
    }

    pub fn is_constant(&self) -> bool {
        self.entries.values().all(DiffOpEntry::is_constant)
    }

    pub fn scale(&self, c: &Scalar) -> MatrixDiffOp {
        let mut out = MatrixDiffOp::new();
        for ((r, c0), e) in &self.entries {
            out.accumulate(*r, *c0, &e.scale(c));
        }
        out
    }

    /// Renames families in indices and coefficients alike. The renaming must
    /// preserve parity.
    pub fn map_families(&self, f: impl Fn(Family) -> Family) -> MatrixDiffOp {
        let mut out = MatrixDiffOp::new();
        for ((r, c), e) in &self.entries {
            out.accumulate(f(*r), f(*c), &e.map_coefficients(|a| a.map_families(&f)));
        }
        out
    }

    /// `H(u)`, defined on the even sector.
    pub fn apply(&self, u: &Covector) -> Result<VectorField, DiffOpError> {
        if let Some((family, _)) = u.iter().find(|(f, p)| !p.parity_of().fits(f.parity)) {
            return Err(DiffOpError::CovectorParity { family: *family });
        }
        Ok(self.apply_unchecked(u))
    }

    pub(crate) fn apply_unchecked(&self, u: &Covector) -> VectorField {
        let mut out = VectorField::new();
        for ((r, c), e) in &self.entries {
            if let Some(uc) = u.get(c) {
                let v = e.apply(uc);
                if !v.is_zero() {
                    *out.entry(*r).or_default() += v;
                }
            }
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// The formal super-adjoint `K` with
    /// `K[r, c] = (-1)^{|r||c|} sum_n (-D)^n o a[c, r; n]`.
    pub fn super_adjoint(&self) -> MatrixDiffOp {
        let mut out = MatrixDiffOp::new();
        for ((r, c), e) in &self.entries {
            let mut k = e.adjoint_terms();
            if r.parity.is_odd() && c.parity.is_odd() {
                k = -&k;
            }
            out.accumulate(*c, *r, &k);
        }
        out
    }

    /// Differentiates every coefficient along the evolutionary field `v`.
    pub fn differentiate_coefficients(&self, v: &VectorField) -> MatrixDiffOp {
        let mut out = MatrixDiffOp::new();
        for ((r, c), e) in &self.entries {
            out.accumulate(
                *r,
                *c,
                &e.map_coefficients(|a| evolutionary_derivative(v, a)),
            );
        }
        out
    }

    /// `d_{H(u)}(H)`: coefficients differentiated along the field `H(u)`.
    pub fn directional_derivative(&self, u: &Covector) -> Result<MatrixDiffOp, DiffOpError> {
        let v = self.apply(u)?;
        Ok(self.differentiate_coefficients(&v))
    }
}

impl Add for &MatrixDiffOp {
    type Output = MatrixDiffOp;
    fn add(self, rhs: &MatrixDiffOp) -> MatrixDiffOp {
        let mut out = self.clone();
        for ((r, c), e) in &rhs.entries {
            out.accumulate(*r, *c, e);
        }
        out
    }
}

impl Neg for &MatrixDiffOp {
    type Output = MatrixDiffOp;
    fn neg(self) -> MatrixDiffOp {
        self.scale(&crate::scalar::int(-1))
    }
}

/// Passes iff `H + H^*` vanishes; each nonzero entry of the sum is a witness.
pub fn check_skew(h: &MatrixDiffOp) -> Verdict {
    let sum = h + &h.super_adjoint();
    let mut v = Verdict::pass();
    for (row, col, e) in sum.entries() {
        v.push(
            Constraint::SkewEntry { row, col },
            Residual::Entry(e.clone()),
        );
    }
    v
}

/// The evolution system `psi_t = H(delta L)`, one equation per row.
pub fn evolution_equation(
    h: &MatrixDiffOp,
    density: &SuperPoly,
) -> Result<VectorField, DiffOpError> {
    if !density.parity_of().fits(Parity::Even) {
        return Err(DiffOpError::DensityParity);
    }
    let mut grad = Covector::new();
    for f in h.index_families() {
        grad.insert(f, variational_derivative(f, density));
    }
    debug_assert!(is_even_sector(&grad));
    let mut out = h.apply(&grad)?;
    for f in h.entries().map(|(r, _, _)| r) {
        out.entry(f).or_default();
    }
    Ok(out)
}
