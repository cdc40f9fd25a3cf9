//! Lie superalgebra axioms and central extensions by bilinear forms.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::diffop::BilinearForm;
use crate::scalar::{int, Scalar};
use crate::superpoly::Parity;
use crate::verdict::{Constraint, Residual, Verdict};

use super::{Basis, BasisElement, ConformalError, LieSuperData};

type Combination = BTreeMap<usize, Scalar>;
type FormTable = BTreeMap<(usize, usize), Scalar>;

fn add_scaled(acc: &mut Combination, x: &Combination, c: &Scalar) {
    for (k, v) in x {
        let slot = acc.entry(*k).or_insert_with(Scalar::zero);
        *slot += v * c;
    }
}

/// `[x, e_b]` for a combination `x`.
fn bracket_left(lie: &LieSuperData, x: &Combination, b: usize) -> Combination {
    let mut out = Combination::new();
    for (k, c) in x {
        add_scaled(&mut out, &lie.bracket(*k, b), c);
    }
    out
}

fn sign_of(odd: bool) -> Scalar {
    if odd {
        int(-1)
    } else {
        int(1)
    }
}

/// Super skew-symmetry `c_{1,2} = -(-1)^{|1||2|} c_{2,1}` and, for every
/// basis triple, the graded Jacobi sum
/// `[[3,1],2] + (-1)^{(|1|+|2|)|3|} [[1,2],3] + (-1)^{(|1|+|3|)|2|} [[2,3],1]`.
pub fn check_lie_super(lie: &LieSuperData) -> Verdict {
    let basis = lie.basis();
    let n = basis.len();
    let p = |k: usize| basis.parity(k).bit();
    let mut v = Verdict::pass();
    for b1 in 0..n {
        for b2 in b1..n {
            let s = sign_of(p(b1) * p(b2) == 1);
            for b3 in 0..n {
                let r = lie.constant(b1, b2, b3) + &s * lie.constant(b2, b1, b3);
                if !r.is_zero() {
                    v.push(Constraint::LieSkew { b1, b2, b3 }, Residual::Scalar(r));
                }
            }
        }
    }
    for b1 in 0..n {
        for b2 in 0..n {
            for b3 in 0..n {
                let mut sum = bracket_left(lie, &lie.bracket(b3, b1), b2);
                let s12 = sign_of((p(b1) + p(b2)) * p(b3) % 2 == 1);
                add_scaled(&mut sum, &bracket_left(lie, &lie.bracket(b1, b2), b3), &s12);
                let s23 = sign_of((p(b1) + p(b3)) * p(b2) % 2 == 1);
                add_scaled(&mut sum, &bracket_left(lie, &lie.bracket(b2, b3), b1), &s23);
                sum.retain(|_, x| !x.is_zero());
                if !sum.is_empty() {
                    v.push(
                        Constraint::LieJacobi { b1, b2, b3 },
                        Residual::Combination(sum),
                    );
                }
            }
        }
    }
    v
}

/// Order of the (single) form component, with all families resolved to
/// basis positions.
fn form_table(lie: &LieSuperData, form: &BilinearForm) -> Result<(u32, FormTable), ConformalError> {
    let orders = form.orders();
    let order = match orders.iter().next() {
        None => 0,
        Some(&m) => m,
    };
    if order > 1 {
        return Err(ConformalError::FormOrder(order, 1));
    }
    if let Some(&other) = orders.iter().find(|&&m| m != order) {
        return Err(ConformalError::FormOrder(other, order));
    }
    let basis = lie.basis();
    let mut table = BTreeMap::new();
    for ((a, b, _), x) in form.entries() {
        let pa = basis
            .position_of_family(a)
            .ok_or(ConformalError::UncoveredFamily(a))?;
        let pb = basis
            .position_of_family(b)
            .ok_or(ConformalError::UncoveredFamily(b))?;
        table.insert((pa, pb), x.clone());
    }
    Ok((order, table))
}

fn pairing(table: &FormTable, x: &Combination, b: usize) -> Scalar {
    let mut acc = Scalar::zero();
    for (k, c) in x {
        if let Some(v) = table.get(&(*k, b)) {
            acc += c * v;
        }
    }
    acc
}

/// Whether a bilinear form defines a central extension of the Lie
/// superalgebra. An order-0 form must satisfy the three-term closedness sum
/// `<[3,1],2> + (-1)^{|3|} <[1,2],3> + (-1)^{|2|} <[2,3],1>` on triples of
/// total parity zero; an order-1 form (the affine case) must be invariant,
/// `<[a,b],c> = <a,[b,c]>` in the argument order of the central term
/// `mu(x, y) = <y, x>`.
pub fn check_cocycle(lie: &LieSuperData, form: &BilinearForm) -> Result<Verdict, ConformalError> {
    let lie_verdict = check_lie_super(lie);
    if !lie_verdict.passed() {
        return Err(ConformalError::NotLie(Box::new(lie_verdict)));
    }
    let (order, table) = form_table(lie, form)?;
    let basis = lie.basis();
    let n = basis.len();
    let p = |k: usize| basis.parity(k).bit();
    let mut v = Verdict::pass();
    for b1 in 0..n {
        for b2 in 0..n {
            for b3 in 0..n {
                let r = if order == 0 {
                    if (p(b1) + p(b2) + p(b3)) % 2 == 1 {
                        continue;
                    }
                    pairing(&table, &lie.bracket(b3, b1), b2)
                        + sign_of(p(b3) == 1) * pairing(&table, &lie.bracket(b1, b2), b3)
                        + sign_of(p(b2) == 1) * pairing(&table, &lie.bracket(b2, b3), b1)
                } else {
                    // mu(a, [b, c]) - mu([a, b], c) with mu(x, y) = <y, x>.
                    let bc = lie.bracket(b2, b3);
                    let lhs: Scalar = bc
                        .iter()
                        .map(|(k, c)| {
                            c * table.get(&(*k, b1)).cloned().unwrap_or_else(Scalar::zero)
                        })
                        .sum();
                    let rhs: Scalar = lie
                        .bracket(b1, b2)
                        .iter()
                        .map(|(k, c)| {
                            c * table.get(&(b3, *k)).cloned().unwrap_or_else(Scalar::zero)
                        })
                        .sum();
                    lhs - rhs
                };
                if !r.is_zero() {
                    v.push(Constraint::Cocycle { b1, b2, b3 }, Residual::Scalar(r));
                }
            }
        }
    }
    Ok(v)
}

/// The extension `[u, v] + omega(u, v) c` by a new even central element
/// named `center`, for an order-0 cocycle. The new element is appended to
/// the basis.
pub fn central_extension(
    lie: &LieSuperData,
    form: &BilinearForm,
    center: &str,
) -> Result<LieSuperData, ConformalError> {
    let verdict = check_cocycle(lie, form)?;
    if !verdict.passed() {
        return Err(ConformalError::NotLie(Box::new(verdict)));
    }
    let (order, table) = form_table(lie, form)?;
    if order != 0 {
        return Err(ConformalError::FormOrder(order, 0));
    }
    let mut elements = lie.basis().elements().to_vec();
    elements.push(BasisElement {
        name: center.to_string(),
        parity: Parity::Even,
    });
    let c = elements.len() - 1;
    let mut out = LieSuperData::new(Basis::new(elements)?);
    for (&(a, b, k), x) in lie.constants() {
        out.set(a, b, k, x.clone())?;
    }
    for (&(a, b), x) in &table {
        out.set(a, b, c, x.clone())?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::superpoly::Family;

    fn super_heisenberg() -> LieSuperData {
        let basis = Basis::from_pairs([("h", Parity::Even), ("q", Parity::Odd)]).unwrap();
        let mut l = LieSuperData::new(basis);
        l.set(1, 1, 0, int(1)).unwrap();
        l
    }

    #[test]
    fn lie_examples() {
        assert!(check_lie_super(&sl2()).passed());
        assert!(check_lie_super(&super_heisenberg()).passed());
        let v = check_lie_super(&non_jacobi());
        let first = &v.witnesses[0];
        assert_eq!(
            first.constraint,
            Constraint::LieJacobi {
                b1: 0,
                b2: 1,
                b3: 2
            }
        );
        assert_eq!(
            first.residual,
            Residual::Combination([(0, int(3))].into_iter().collect())
        );
    }

    #[test]
    fn skew_failure_is_reported() {
        let mut l = sl2();
        l.set(1, 0, 2, int(0)).unwrap();
        let v = check_lie_super(&l);
        assert!(v.witnesses.iter().any(|w| w.constraint
            == Constraint::LieSkew {
                b1: 0,
                b2: 1,
                b3: 2
            }));
    }

    #[test]
    fn cocycle_examples() {
        let l = sl2();
        let f = |k| l.basis().family(k);
        let trace =
            BilinearForm::new([((f(0), f(1), 1), int(1)), ((f(2), f(2), 1), int(2))]).unwrap();
        assert!(check_cocycle(&l, &trace).unwrap().passed());
        let hh = BilinearForm::new([((f(2), f(2), 1), int(1))]).unwrap();
        assert!(!check_cocycle(&l, &hh).unwrap().passed());
        assert!(check_cocycle(&l, &BilinearForm::default())
            .unwrap()
            .passed());
        assert!(matches!(
            check_cocycle(&non_jacobi(), &trace),
            Err(ConformalError::NotLie(_))
        ));
    }

    #[test]
    fn order_zero_cocycle_and_extension() {
        // Abelian even pair with the symplectic form: a Heisenberg extension.
        let basis = Basis::from_pairs([("x", Parity::Even), ("y", Parity::Even)]).unwrap();
        let l = LieSuperData::new(basis);
        let form = BilinearForm::new([((Family::even(0), Family::even(1), 0), int(1))]).unwrap();
        assert!(check_cocycle(&l, &form).unwrap().passed());
        let ext = central_extension(&l, &form, "c").unwrap();
        assert_eq!(ext.constant(0, 1, 2), int(1));
        assert_eq!(ext.constant(1, 0, 2), int(-1));
        assert!(check_lie_super(&ext).passed());
    }
}
