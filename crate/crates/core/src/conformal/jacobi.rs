//! The Jacobi identity of a center-free conformal structure, expanded on
//! structure constants and evaluated sparsely.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::scalar::{binomial, factorial, sign, Scalar};
use crate::verdict::{Constraint, Residual, Verdict};

use super::{ConformalStructure, LambdaKey};

/// `(b1, b2, b3, j5, m1, m2, n2)`: the coefficient of
/// `d^{n2} e_j5 z1^{-m1-1} z2^{-m2-1}` in the Jacobi identity applied to
/// `e_b1, e_b2, e_b3`.
pub type JacobiKey = (usize, usize, usize, usize, u32, u32, u32);

fn ratio_factorial(top: u32, bottom: u32) -> Scalar {
    factorial(top) / factorial(bottom)
}

/// Nonzero values of
/// `Y(a,z1)Y(b,z2)c - (-1)^{|a||b|} Y(b,z2)Y(a,z1)c - Res_x Y(Y(a,z1-x)b,x)c/(z2-x)`
/// on basis triples, as a sparse table. Every constraint instance with a
/// nonzero contribution appears among the keys visited here.
pub fn jacobi_residuals(s: &ConformalStructure) -> BTreeMap<JacobiKey, Scalar> {
    let entries: Vec<(LambdaKey, &Scalar)> = s.lambda().iter().map(|(k, x)| (*k, x)).collect();
    let mut by_first: BTreeMap<usize, Vec<(LambdaKey, &Scalar)>> = BTreeMap::new();
    let mut by_second: BTreeMap<usize, Vec<(LambdaKey, &Scalar)>> = BTreeMap::new();
    for &(k, x) in &entries {
        by_first.entry(k.0).or_default().push((k, x));
        by_second.entry(k.1).or_default().push((k, x));
    }
    let basis = s.basis();
    let mut out: BTreeMap<JacobiKey, Scalar> = BTreeMap::new();
    let mut add = |key: JacobiKey, x: Scalar| {
        let slot = out.entry(key).or_insert_with(Scalar::zero);
        *slot += x;
    };
    let none = Vec::new();

    for &((b2, b3, j4, a, m2), x) in &entries {
        // Y(e_b1, z1) applied to d^a e_j4 coming out of Y(e_b2, z2) e_b3.
        for &((b1, _, j5, n1, c), y) in by_second.get(&j4).unwrap_or(&none) {
            let xy = x * y;
            for p in 0..=a {
                let w = &xy * binomial(a, p) * ratio_factorial(c + p, c);
                add((b1, b2, b3, j5, c + p, m2, a + n1 - p), w);
            }
        }
    }
    for &((b1, b3, j4, a, m1), x) in &entries {
        for &((b2, _, j5, n1, c), y) in by_second.get(&j4).unwrap_or(&none) {
            let mut xy = x * y;
            if !(basis.parity(b1).is_odd() && basis.parity(b2).is_odd()) {
                xy = -xy;
            }
            for p in 0..=a {
                let w = &xy * binomial(a, p) * ratio_factorial(c + p, c);
                add((b1, b2, b3, j5, m1, c + p, a + n1 - p), w);
            }
        }
    }
    for &((b1, b2, j4, n1, c), x) in &entries {
        for &((_, b3, j5, n2, e), y) in by_first.get(&j4).unwrap_or(&none) {
            let xy = -(x * y) * sign(u64::from(n1)) * ratio_factorial(e + n1, e);
            for p in 0..=e + n1 {
                let w = &xy * binomial(c + p, p);
                add((b1, b2, b3, j5, c + p, e + n1 - p, n2), w);
            }
        }
    }
    out.retain(|_, x| !x.is_zero());
    out
}

pub fn check_jacobi_conformal(s: &ConformalStructure) -> Verdict {
    let mut v = Verdict::pass();
    for ((b1, b2, b3, j5, m1, m2, n2), x) in jacobi_residuals(s) {
        v.push(
            Constraint::Jacobi {
                b1,
                b2,
                b3,
                j5,
                m1,
                m2,
                n2,
            },
            Residual::Scalar(x),
        );
    }
    v
}
