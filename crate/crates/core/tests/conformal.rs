mod common;

use std::collections::BTreeMap;

use common::*;
use superham::conformal::{
    affine_structure, check_cocycle, check_conformal, check_conjugation, check_lie_super,
    from_linear_operator, jacobi_residuals, to_hamiltonian, y_plus_product, ConformalElement,
    ConformalStructure, JacobiKey, YProduct,
};
use superham::diffop::{
    bilinear_form_operator, check_hamiltonian, check_pair, linear_lie_operator, BilinearForm,
};
use superham::scalar::{binomial, int, Scalar};
use superham::verdict::Constraint;

fn add(out: &mut BTreeMap<JacobiKey, Scalar>, key: JacobiKey, x: Scalar) {
    *out.entry(key).or_insert_with(|| int(0)) += x;
}

fn element_terms(e: &ConformalElement) -> Vec<(usize, u32, Scalar)> {
    assert!(e.center == int(0), "center-free structures only");
    e.terms
        .iter()
        .map(|(&(j, n), x)| (j, n, x.clone()))
        .collect()
}

fn y(s: &ConformalStructure, a: &ConformalElement, b: &ConformalElement) -> YProduct {
    y_plus_product(s, a, b).unwrap()
}

/// The Jacobi expression computed directly from products and the residue
/// expansion `(z1 - x)^{-p-1} = sum_k C(p+k, k) x^k z1^{-p-k-1}`,
/// `1/(z2 - x) = sum_l x^l z2^{-l-1}`.
fn jacobi_oracle(s: &ConformalStructure) -> BTreeMap<JacobiKey, Scalar> {
    let n = s.basis().len();
    let mut out = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let (ea, eb, ec) = (
                    ConformalElement::basis(a),
                    ConformalElement::basis(b),
                    ConformalElement::basis(c),
                );
                let odd = s.basis().parity(a).is_odd() && s.basis().parity(b).is_odd();
                for (m2, inner) in y(s, &eb, &ec) {
                    for (m1, outer) in y(s, &ea, &inner) {
                        for (j, d, x) in element_terms(&outer) {
                            add(&mut out, (a, b, c, j, m1, m2, d), x);
                        }
                    }
                }
                for (m1, inner) in y(s, &ea, &ec) {
                    for (m2, outer) in y(s, &eb, &inner) {
                        for (j, d, x) in element_terms(&outer) {
                            let w = if odd { x } else { -x };
                            add(&mut out, (a, b, c, j, m1, m2, d), w);
                        }
                    }
                }
                for (p, ep) in y(s, &ea, &eb) {
                    for (q, fq) in y(s, &ep, &ec) {
                        for k in 0..=q {
                            for (j, d, x) in element_terms(&fq) {
                                add(
                                    &mut out,
                                    (a, b, c, j, p + k, q - k, d),
                                    -(x * binomial(p + k, k)),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    out.retain(|_, x| *x != int(0));
    out
}

#[test]
fn sparse_jacobi_matches_oracle() {
    let mut r = rng(11);
    let mut nonempty = 0;
    for _ in 0..60 {
        let s = random_structure(&mut r, None);
        let sparse = jacobi_residuals(&s);
        if !sparse.is_empty() {
            nonempty += 1;
        }
        assert_eq!(sparse, jacobi_oracle(&s));
    }
    for s in [virasoro(), current(&sl2()), current(&non_jacobi())] {
        assert_eq!(jacobi_residuals(&s), jacobi_oracle(&s));
    }
    assert!(nonempty > 10);
}

#[test]
fn operator_route_agrees_on_random_structures() {
    let mut r = rng(5);
    let (mut pass, mut fail) = (0, 0);
    for k in 0..40 {
        let seed = match k % 4 {
            0 => Some(virasoro()),
            1 => Some(current(&sl2())),
            _ => None,
        };
        let s = random_structure(&mut r, seed.as_ref());
        let direct = check_conformal(&s).passed();
        assert_eq!(
            direct,
            check_hamiltonian(&to_hamiltonian(&s)).passed(),
            "{s:?}"
        );
        if direct {
            pass += 1;
        } else {
            fail += 1;
        }
        assert_eq!(
            from_linear_operator(&to_hamiltonian(&s), s.basis()).unwrap(),
            s
        );
    }
    assert!(pass > 0 && fail > 0, "pass {pass}, fail {fail}");
}

#[test]
fn current_algebra_degeneration() {
    let mut r = rng(3);
    for _ in 0..60 {
        let lie = random_skew_lie(&mut r, 3, 1, 0.3);
        let lv = check_lie_super(&lie);
        let s = current(&lie);
        assert!(check_conjugation(&s).passed());
        let jacobi_ok = !lv
            .witnesses
            .iter()
            .any(|w| matches!(w.constraint, Constraint::LieJacobi { .. }));
        assert_eq!(jacobi_residuals(&s).is_empty(), jacobi_ok);
    }
    // Without skew-completion the conjugation check sees the asymmetry.
    let mut lopsided = sl2();
    lopsided.set(1, 0, 2, int(0)).unwrap();
    assert!(!check_conjugation(&current(&lopsided)).passed());
    assert!(!check_lie_super(&lopsided).passed());
}

#[test]
fn pair_agrees_with_cocycle() {
    let l = sl2();
    let f = |k| l.basis().family(k);
    let forms = [
        BilinearForm::new([((f(0), f(1), 1), int(1)), ((f(2), f(2), 1), int(2))]).unwrap(),
        BilinearForm::new([((f(2), f(2), 1), int(1))]).unwrap(),
        BilinearForm::new([((f(0), f(1), 1), int(2)), ((f(2), f(2), 1), int(4))]).unwrap(),
        BilinearForm::new([((f(0), f(0), 1), int(1))]).unwrap(),
        BilinearForm::default(),
    ];
    for form in &forms {
        let pair = check_pair(&bilinear_form_operator(form), &linear_lie_operator(&l)).passed();
        let algebraic = check_lie_super(&l).passed() && check_cocycle(&l, form).unwrap().passed();
        assert_eq!(pair, algebraic, "{form:?}");
        let affine = affine_structure(&l, form).unwrap();
        assert_eq!(check_conformal(&affine).passed(), algebraic);
    }
}

#[test]
fn kdv_maps_to_centered_virasoro() {
    let s = from_linear_operator(
        &kdv(),
        &superham::conformal::Basis::from_pairs([("psi", superham::Parity::Even)]).unwrap(),
    )
    .unwrap();
    assert!(s.has_center());
    assert_eq!(s.mu().get(&(0, 0, 3)), Some(&int(6)));
    assert_eq!(to_hamiltonian(&s), kdv());
    assert!(check_conformal(&s).passed());
}

#[test]
fn central_sign_law_matches_skewness() {
    // A lone central term passes conjugation exactly when its operator is skew.
    let basis = superham::conformal::Basis::from_pairs([
        ("a", superham::Parity::Odd),
        ("b", superham::Parity::Odd),
    ])
    .unwrap();
    for m in 0..4u32 {
        for (a, b) in [(0, 0), (0, 1)] {
            for mirror in [-1i64, 1] {
                let mut s = ConformalStructure::new(basis.clone(), true);
                s.set_mu(a, b, m, int(1)).unwrap();
                if a != b {
                    s.set_mu(b, a, m, int(mirror)).unwrap();
                }
                let skew = superham::diffop::check_skew(&to_hamiltonian(&s)).passed();
                assert_eq!(
                    check_conjugation(&s).passed(),
                    skew,
                    "m={m} ({a},{b}) mirror {mirror}"
                );
            }
        }
    }
}
