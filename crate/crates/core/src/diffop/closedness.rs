//! The closedness condition and Schouten brackets, evaluated on generic test
//! covectors built from fresh generator families.

use std::collections::BTreeMap;

use crate::superpoly::{Family, Parity, SuperPoly};
use crate::varcalc::{pairing_density, variational_derivative, Covector};
use crate::verdict::{Constraint, PairSlot, Residual, TestSlot, Verdict};

use super::{check_skew, DiffOpError, MatrixDiffOp};

/// Three generic covectors: slot `s` has component `u^s_f` at every index
/// family `f`, where `u^s_f` is a fresh family of the same parity.
#[derive(Clone, Debug)]
pub struct TestCovectors {
    pub slots: [Covector; 3],
    pub families: BTreeMap<Family, TestSlot>,
}

impl TestCovectors {
    pub fn for_operators(ops: &[&MatrixDiffOp]) -> TestCovectors {
        let mut used = std::collections::BTreeSet::new();
        let mut index = std::collections::BTreeSet::new();
        for h in ops {
            used.extend(h.all_families());
            index.extend(h.index_families());
        }
        let mut next_even = 1 + used
            .iter()
            .filter(|f| f.parity == Parity::Even)
            .map(|f| f.index)
            .max()
            .unwrap_or(0);
        let mut next_odd = 1 + used
            .iter()
            .filter(|f| f.parity == Parity::Odd)
            .map(|f| f.index)
            .max()
            .unwrap_or(0);
        let mut slots: [Covector; 3] = Default::default();
        let mut families = BTreeMap::new();
        for (s, slot) in slots.iter_mut().enumerate() {
            for f in &index {
                let next = match f.parity {
                    Parity::Even => &mut next_even,
                    Parity::Odd => &mut next_odd,
                };
                let fresh = Family::new(f.parity, *next);
                *next += 1;
                slot.insert(*f, SuperPoly::generator(fresh.gen(0)));
                families.insert(
                    fresh,
                    TestSlot {
                        slot: s as u8 + 1,
                        origin: *f,
                    },
                );
            }
        }
        TestCovectors { slots, families }
    }
}

/// `w[d_{F(v)}(G)(u)]`, the density of one term of the closedness sums.
fn term(g: &MatrixDiffOp, f: &MatrixDiffOp, u: &Covector, v: &Covector, w: &Covector) -> SuperPoly {
    let field = f.apply_unchecked(v);
    let dg = g.differentiate_coefficients(&field);
    pairing_density(w, &dg.apply_unchecked(u))
}

fn cyclic(g: &MatrixDiffOp, f: &MatrixDiffOp, t: &TestCovectors) -> SuperPoly {
    let [u1, u2, u3] = &t.slots;
    let mut e = term(g, f, u1, u2, u3);
    e += term(g, f, u2, u3, u1);
    e += term(g, f, u3, u1, u2);
    e
}

/// `E = u3[d_{H(u2)}(H)(u1)] + u1[d_{H(u3)}(H)(u2)] + u2[d_{H(u1)}(H)(u3)]`.
pub fn closedness_density(h: &MatrixDiffOp, t: &TestCovectors) -> SuperPoly {
    cyclic(h, h, t)
}

/// The six-term Schouten density of `[H1, H2]`.
pub fn schouten_density(h1: &MatrixDiffOp, h2: &MatrixDiffOp, t: &TestCovectors) -> SuperPoly {
    cyclic(h2, h1, t) + cyclic(h1, h2, t)
}

/// Nonzero variational derivatives of a density, with the test families
/// that may appear in them. Empty iff the density vanishes in the quotient.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosednessCertificate {
    pub residuals: Vec<(Family, SuperPoly)>,
    pub test_families: BTreeMap<Family, TestSlot>,
}

impl ClosednessCertificate {
    fn build(density: &SuperPoly, t: &TestCovectors) -> ClosednessCertificate {
        ClosednessCertificate {
            residuals: crate::varcalc::euler_residuals(density),
            test_families: t.families.clone(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }
}

fn first_residual(density: &SuperPoly) -> Option<(Family, SuperPoly)> {
    density.families().into_iter().find_map(|f| {
        let d = variational_derivative(f, density);
        (!d.is_zero()).then_some((f, d))
    })
}

fn require_skew(h: &MatrixDiffOp) -> Result<(), DiffOpError> {
    let v = check_skew(h);
    if v.passed() {
        Ok(())
    } else {
        Err(DiffOpError::NotSkew(Box::new(v)))
    }
}

pub fn closedness_residual(h: &MatrixDiffOp) -> Result<ClosednessCertificate, DiffOpError> {
    require_skew(h)?;
    let t = TestCovectors::for_operators(&[h]);
    Ok(ClosednessCertificate::build(&closedness_density(h, &t), &t))
}

pub fn schouten_bracket(
    h1: &MatrixDiffOp,
    h2: &MatrixDiffOp,
) -> Result<ClosednessCertificate, DiffOpError> {
    require_skew(h1)?;
    require_skew(h2)?;
    let t = TestCovectors::for_operators(&[h1, h2]);
    Ok(ClosednessCertificate::build(
        &schouten_density(h1, h2, &t),
        &t,
    ))
}

/// Skew-symmetry, then closedness; the first failing stage supplies the
/// witnesses.
pub fn check_hamiltonian(h: &MatrixDiffOp) -> Verdict {
    let skew = check_skew(h);
    if !skew.passed() {
        return skew;
    }
    let t = TestCovectors::for_operators(&[h]);
    let mut v = Verdict::pass();
    if let Some((family, residual)) = first_residual(&closedness_density(h, &t)) {
        v.push(Constraint::Closedness { family }, Residual::Poly(residual));
        v.test_families = t.families;
    }
    v
}

/// Both operators skew and all three Schouten brackets vanish.
pub fn check_pair(h1: &MatrixDiffOp, h2: &MatrixDiffOp) -> Verdict {
    let mut v = check_skew(h1);
    v.absorb(check_skew(h2));
    if !v.passed() {
        return v;
    }
    let t = TestCovectors::for_operators(&[h1, h2]);
    let brackets = [
        (PairSlot::First, h1, h1),
        (PairSlot::Second, h2, h2),
        (PairSlot::Mixed, h1, h2),
    ];
    for (slot, a, b) in brackets {
        if let Some((family, residual)) = first_residual(&schouten_density(a, b, &t)) {
            v.push(
                Constraint::Schouten { slot, family },
                Residual::Poly(residual),
            );
        }
    }
    if !v.passed() {
        v.test_families = t.families;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffop::DiffOpEntry;
    use crate::scalar::int;

    fn psi(n: u32) -> SuperPoly {
        Family::even(0).gen(n).into()
    }

    fn single(e: DiffOpEntry) -> MatrixDiffOp {
        let f = Family::even(0);
        let mut h = MatrixDiffOp::new();
        h.add_entry(f, f, e).unwrap();
        h
    }

    fn d() -> MatrixDiffOp {
        single(DiffOpEntry::constant(1, int(1)))
    }

    fn virasoro() -> MatrixDiffOp {
        let mut e = DiffOpEntry::term(1, psi(0).scale(&int(2)));
        e.add_term(0, psi(1));
        single(e)
    }

    fn kdv() -> MatrixDiffOp {
        &virasoro().scale(&int(2)) + &single(DiffOpEntry::constant(3, int(1)))
    }

    #[test]
    fn closedness_examples() {
        assert!(closedness_residual(&d()).unwrap().is_empty());
        assert!(closedness_residual(&kdv()).unwrap().is_empty());
        assert!(closedness_residual(&virasoro()).unwrap().is_empty());
        assert!(check_hamiltonian(&kdv()).passed());
    }

    #[test]
    fn non_skew_is_rejected() {
        let h = single(DiffOpEntry::term(0, psi(0)));
        assert!(matches!(
            closedness_residual(&h),
            Err(DiffOpError::NotSkew(_))
        ));
        let v = check_hamiltonian(&h);
        assert!(matches!(
            v.witnesses[0].constraint,
            Constraint::SkewEntry { .. }
        ));
    }

    #[test]
    fn skew_but_not_closed() {
        // psi' D + D o psi' is skew, but fails the closedness condition.
        let sq = psi(1);
        let mut e = DiffOpEntry::term(1, sq.scale(&int(2)));
        e.add_term(0, sq.total_derivative());
        let h = single(e);
        assert!(check_skew(&h).passed());
        let v = check_hamiltonian(&h);
        assert!(!v.passed());
        assert!(matches!(
            v.witnesses[0].constraint,
            Constraint::Closedness { .. }
        ));
    }

    #[test]
    fn schouten_examples() {
        assert!(schouten_bracket(&d(), &d()).unwrap().is_empty());
        assert!(schouten_bracket(&d(), &kdv()).unwrap().is_empty());
        let t = TestCovectors::for_operators(&[&virasoro()]);
        let e = closedness_density(&virasoro(), &t);
        let s = schouten_density(&virasoro(), &virasoro(), &t);
        assert_eq!(s, e.scale(&int(2)));
        assert!(check_pair(&d(), &kdv()).passed());
    }
}
