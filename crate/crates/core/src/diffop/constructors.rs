//! Operators built from bilinear forms and from Lie superalgebra structure
//! constants.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use crate::conformal::LieSuperData;
use crate::scalar::Scalar;
use crate::superpoly::{Family, Parity, SuperPoly};

use super::{DiffOpEntry, MatrixDiffOp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("form pairs {a:?} with {b:?}, which have different parities")]
    ParityMismatch { a: Family, b: Family },
    #[error("values at ({a:?}, {b:?}) and ({b:?}, {a:?}) violate the symmetry law at m = {m}")]
    Symmetry { a: Family, b: Family, m: u32 },
    #[error("diagonal value at ({a:?}, {a:?}) must vanish at m = {m}")]
    Diagonal { a: Family, m: u32 },
}

/// Constant bilinear forms `<a, b>_m` on generator families, one per order
/// `m`, satisfying `<a, b>_m = (-1)^{1+i+m} <b, a>_m` on the parity-`i`
/// sector. Missing mirror entries are filled in by that law.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BilinearForm {
    values: BTreeMap<(Family, Family, u32), Scalar>,
}

/// The sign relating `<a, b>_m` to `<b, a>_m` on the parity sector `i`.
pub fn form_symmetry_sign(i: Parity, m: u32) -> bool {
    (1 + i.bit() + u64::from(m)) % 2 == 1
}

impl BilinearForm {
    pub fn new(
        entries: impl IntoIterator<Item = ((Family, Family, u32), Scalar)>,
    ) -> Result<BilinearForm, FormError> {
        let given: BTreeMap<_, _> = entries.into_iter().filter(|(_, x)| !x.is_zero()).collect();
        let mut values = BTreeMap::new();
        for (&(a, b, m), x) in &given {
            if a.parity != b.parity {
                return Err(FormError::ParityMismatch { a, b });
            }
            let flip = form_symmetry_sign(a.parity, m);
            let mirror = if flip { -x.clone() } else { x.clone() };
            if a == b {
                if flip {
                    return Err(FormError::Diagonal { a, m });
                }
            } else if let Some(y) = given.get(&(b, a, m)) {
                if *y != mirror {
                    return Err(FormError::Symmetry { a, b, m });
                }
            }
            values.insert((a, b, m), x.clone());
            values.insert((b, a, m), mirror);
        }
        Ok(BilinearForm { values })
    }

    pub fn value(&self, a: Family, b: Family, m: u32) -> Scalar {
        self.values
            .get(&(a, b, m))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((Family, Family, u32), &Scalar)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    pub fn orders(&self) -> BTreeSet<u32> {
        self.values.keys().map(|(_, _, m)| *m).collect()
    }

    pub fn families(&self) -> BTreeSet<Family> {
        self.values.keys().flat_map(|(a, b, _)| [*a, *b]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }
}

/// `H[a, b] = sum_m <a, b>_m D^m`, a block-diagonal constant operator.
pub fn bilinear_form_operator(form: &BilinearForm) -> MatrixDiffOp {
    let mut h = MatrixDiffOp::new();
    for ((a, b, m), x) in form.entries() {
        h.accumulate(a, b, &DiffOpEntry::constant(m, x.clone()));
    }
    h
}

/// `H[r, c] = sum_k lambda^k_{r;c} psi_k`, an order-zero operator linear in
/// the generators. Basis element `k` is identified with its canonical family.
pub fn linear_lie_operator(lie: &LieSuperData) -> MatrixDiffOp {
    let basis = lie.basis();
    let mut h = MatrixDiffOp::new();
    for (&(b1, b2, b3), x) in lie.constants() {
        let coeff = SuperPoly::generator(basis.family(b3).gen(0)).scale(x);
        h.accumulate(
            basis.family(b1),
            basis.family(b2),
            &DiffOpEntry::term(0, coeff),
        );
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffop::check_skew;
    use crate::scalar::int;

    #[test]
    fn form_operator_examples() {
        let psi = Family::even(0);
        let f = BilinearForm::new([((psi, psi, 1), int(1))]).unwrap();
        let mut d = MatrixDiffOp::new();
        d.add_entry(psi, psi, DiffOpEntry::constant(1, int(1)))
            .unwrap();
        assert_eq!(bilinear_form_operator(&f), d);

        let theta = Family::odd(0);
        let g = BilinearForm::new([((theta, theta, 0), int(1))]).unwrap();
        let h = bilinear_form_operator(&g);
        assert_eq!(
            h.entry(theta, theta),
            Some(&DiffOpEntry::constant(0, int(1)))
        );
        assert!(check_skew(&h).passed());

        assert_eq!(
            BilinearForm::new([((psi, psi, 0), int(1))]),
            Err(FormError::Diagonal { a: psi, m: 0 })
        );
    }

    #[test]
    fn form_completion_and_conflicts() {
        let (a, b) = (Family::even(0), Family::even(1));
        let f = BilinearForm::new([((a, b, 0), int(2))]).unwrap();
        assert_eq!(f.value(b, a, 0), int(-2));
        let g = BilinearForm::new([((a, b, 1), int(2))]).unwrap();
        assert_eq!(g.value(b, a, 1), int(2));
        assert!(matches!(
            BilinearForm::new([((a, b, 1), int(2)), ((b, a, 1), int(3))]),
            Err(FormError::Symmetry { .. })
        ));
        assert!(matches!(
            BilinearForm::new([((a, Family::odd(0), 1), int(2))]),
            Err(FormError::ParityMismatch { .. })
        ));
    }
}
