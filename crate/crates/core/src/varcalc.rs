//! Variational calculus: Euler operators, the total-derivative quotient,
//! evolutionary vector fields and the covector pairing.

use std::collections::BTreeMap;

use crate::scalar::Scalar;
use crate::superpoly::{Family, SuperPoly};

/// Components of an evolutionary vector field, keyed by family.
pub type VectorField = BTreeMap<Family, SuperPoly>;

/// Components of a covector, keyed by family.
pub type Covector = BTreeMap<Family, SuperPoly>;

/// `delta_f(p) = sum_n (-D)^n d p / d f^{(n)}`.
pub fn variational_derivative(f: Family, p: &SuperPoly) -> SuperPoly {
    let Some(top) = p.max_order(f) else {
        return SuperPoly::zero();
    };
    let mut acc = p.partial(f.gen(top));
    for n in (0..top).rev() {
        acc = p.partial(f.gen(n)) - acc.total_derivative();
    }
    acc
}

/// Outcome of deciding membership in `D(A) + constants`.
#[derive(Clone, Debug, PartialEq)]
pub enum TildeVerdict {
    /// `input = D(antiderivative) + constant`.
    Trivial {
        antiderivative: SuperPoly,
        constant: Scalar,
    },
    /// Some variational derivative is nonzero.
    Nontrivial { family: Family, witness: SuperPoly },
}

impl TildeVerdict {
    pub fn is_trivial(&self) -> bool {
        matches!(self, TildeVerdict::Trivial { .. })
    }
}

/// All nonzero variational derivatives of `p`, in family order.
pub fn euler_residuals(p: &SuperPoly) -> Vec<(Family, SuperPoly)> {
    p.families()
        .into_iter()
        .filter_map(|f| {
            let d = variational_derivative(f, p);
            (!d.is_zero()).then_some((f, d))
        })
        .collect()
}

/// Decides whether `p` is a total derivative up to a constant, recovering
/// the antiderivative by inverting the degree operator when it is.
pub fn decide_trivial(p: &SuperPoly) -> TildeVerdict {
    if let Some((family, witness)) = euler_residuals(p).into_iter().next() {
        return TildeVerdict::Nontrivial { family, witness };
    }
    let constant = p.constant_term();
    let u = p - &SuperPoly::constant(constant.clone());
    // Upsilon(u) = sum_f psi_f * delta_f(u) + D(w), and every delta vanishes.
    let mut w = SuperPoly::zero();
    for f in u.families() {
        let top = u.max_order(f).unwrap_or(0);
        for k in 1..=top {
            let mut chain = u.partial(f.gen(k));
            for j in (0..k).rev() {
                // chain = (-D)^{k-1-j} d u / d f^{(k)}
                w += &SuperPoly::generator(f.gen(j)) * &chain;
                chain = -chain.total_derivative();
            }
        }
    }
    let antiderivative = w.inverse_degree_operator();
    let rebuilt = &antiderivative.total_derivative() + &SuperPoly::constant(constant.clone());
    assert_eq!(&rebuilt, p, "antiderivative reconstruction failed");
    TildeVerdict::Trivial {
        antiderivative,
        constant,
    }
}

/// Whether every component of the field has the parity of its family.
pub fn is_even_sector(u: &BTreeMap<Family, SuperPoly>) -> bool {
    u.iter().all(|(f, p)| p.parity_of().fits(f.parity))
}

/// The evolutionary derivation `sum D^n(u_f) d/d f^{(n)}` applied to `p`.
pub fn evolutionary_derivative(u: &VectorField, p: &SuperPoly) -> SuperPoly {
    let mut out = SuperPoly::zero();
    for f in p.families() {
        let Some(uf) = u.get(&f) else { continue };
        if uf.is_zero() {
            continue;
        }
        let top = p.max_order(f).unwrap_or(0);
        let mut dn = uf.clone();
        for n in 0..=top {
            let part = p.partial(f.gen(n));
            if !part.is_zero() {
                out += &dn * &part;
            }
            if n < top {
                dn = dn.total_derivative();
            }
        }
    }
    out
}

/// `[u, v] = d_u(v) - d_v(u)` componentwise, for even fields.
pub fn field_bracket(u: &VectorField, v: &VectorField) -> VectorField {
    let mut out = VectorField::new();
    for f in u.keys().chain(v.keys()) {
        if out.contains_key(f) {
            continue;
        }
        let zero = SuperPoly::zero();
        let uf = u.get(f).unwrap_or(&zero);
        let vf = v.get(f).unwrap_or(&zero);
        let c = evolutionary_derivative(u, vf) - evolutionary_derivative(v, uf);
        out.insert(*f, c);
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// The density `sum_f v_f u_f` whose class is the pairing of `u` with `v`.
pub fn pairing_density(u: &Covector, v: &VectorField) -> SuperPoly {
    let mut out = SuperPoly::zero();
    for (f, uf) in u {
        if let Some(vf) = v.get(f) {
            out += vf * uf;
        }
    }
    out
}

/// Whether the pairing of `u` with `v` vanishes in the quotient by total
/// derivatives (with zero constant part).
pub fn pair_is_zero(u: &Covector, v: &VectorField) -> bool {
    match decide_trivial(&pairing_density(u, v)) {
        TildeVerdict::Trivial { constant, .. } => num_traits::Zero::is_zero(&constant),
        TildeVerdict::Nontrivial { .. } => false,
    }
}

/// Replaces every generator `f^{(n)}` with `D^n(image_f)`; families without
/// an image are left untouched.
pub fn substitute(p: &SuperPoly, images: &BTreeMap<Family, SuperPoly>) -> SuperPoly {
    let mut cache: BTreeMap<(Family, u32), SuperPoly> = BTreeMap::new();
    let mut out = SuperPoly::zero();
    for (m, c) in p.terms() {
        let mut acc = SuperPoly::constant(c.clone());
        for g in m.factors() {
            let factor = match images.get(&g.family) {
                Some(img) => cache
                    .entry((g.family, g.order))
                    .or_insert_with(|| img.total_derivative_n(g.order))
                    .clone(),
                None => SuperPoly::generator(*g),
            };
            acc = &acc * &factor;
            if acc.is_zero() {
                break;
            }
        }
        out += acc;
    }
    out
}
