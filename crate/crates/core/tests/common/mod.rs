//! Seeded samplers and the algebraic laws shared by the property suites and
//! the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use superham::conformal::{conjugation_transform, Basis, ConformalStructure, LieSuperData};
use superham::diffop::{DiffOpEntry, MatrixDiffOp};
use superham::scalar::{int, sign, Scalar};
use superham::varcalc::{
    evolutionary_derivative, field_bracket, variational_derivative, VectorField,
};
use superham::{Family, Generator, Parity, PolyParity, SuperPoly};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two even and two odd families.
pub const FAMILIES: [Family; 4] = [
    Family {
        parity: Parity::Even,
        index: 0,
    },
    Family {
        parity: Parity::Even,
        index: 1,
    },
    Family {
        parity: Parity::Odd,
        index: 0,
    },
    Family {
        parity: Parity::Odd,
        index: 1,
    },
];

pub fn psi(n: u32) -> SuperPoly {
    Family::even(0).gen(n).into()
}

pub fn random_generator(rng: &mut ChaCha8Rng, fams: &[Family], max_order: u32) -> Generator {
    fams[rng.gen_range(0..fams.len())].gen(rng.gen_range(0..=max_order))
}

pub fn random_poly(
    rng: &mut ChaCha8Rng,
    fams: &[Family],
    max_order: u32,
    max_terms: usize,
    max_degree: usize,
) -> SuperPoly {
    let mut p = SuperPoly::zero();
    for _ in 0..rng.gen_range(0..=max_terms) {
        let deg = rng.gen_range(0..=max_degree);
        let gens = (0..deg)
            .map(|_| random_generator(rng, fams, max_order))
            .collect();
        let c = rng.gen_range(-3i64..=3);
        p += SuperPoly::product(gens, int(c));
    }
    p
}

/// The terms of `p` of the given parity.
pub fn part(p: &SuperPoly, parity: Parity) -> SuperPoly {
    let mut out = SuperPoly::zero();
    for (m, c) in p.terms() {
        if m.parity() == parity {
            out.add_term(m.clone(), c.clone());
        }
    }
    out
}

pub fn random_homogeneous(rng: &mut ChaCha8Rng, parity: Parity) -> SuperPoly {
    part(&random_poly(rng, &FAMILIES, 3, 4, 3), parity)
}

pub fn random_operator(rng: &mut ChaCha8Rng, fams: &[Family], max_order: u32) -> MatrixDiffOp {
    let mut h = MatrixDiffOp::new();
    for &r in fams {
        for &c in fams {
            if rng.gen_bool(0.5) {
                continue;
            }
            let mut e = DiffOpEntry::zero();
            for n in 0..=max_order {
                e.add_term(
                    n,
                    part(&random_poly(rng, fams, 2, 2, 2), r.parity + c.parity),
                );
            }
            h.add_entry(r, c, e).expect("homogeneous coefficients");
        }
    }
    h
}

/// A vector field in the even sector: `u_f` has the parity of `f`.
pub fn random_even_field(rng: &mut ChaCha8Rng, fams: &[Family]) -> VectorField {
    fams.iter()
        .map(|f| (*f, part(&random_poly(rng, fams, 2, 3, 2), f.parity)))
        .collect()
}

pub fn random_basis(rng: &mut ChaCha8Rng, max_even: usize, max_odd: usize) -> Basis {
    let even = rng.gen_range(1..=max_even);
    let odd = rng.gen_range(0..=max_odd);
    let names = ["a", "b", "c", "d"];
    let mut pairs: Vec<(String, Parity)> = (0..even)
        .map(|k| (names[k].to_string(), Parity::Even))
        .collect();
    pairs.extend((0..odd).map(|k| (format!("q{k}"), Parity::Odd)));
    Basis::from_pairs(pairs).unwrap()
}

fn graded(b: &Basis, b1: usize, b2: usize, b3: usize) -> bool {
    b.parity(b1) + b.parity(b2) == b.parity(b3)
}

/// Structure constants satisfying super skew-symmetry, entries in `-2..=2`.
/// `density` is the chance that an independent constant is nonzero.
pub fn random_skew_lie(
    rng: &mut ChaCha8Rng,
    max_even: usize,
    max_odd: usize,
    density: f64,
) -> LieSuperData {
    let basis = random_basis(rng, max_even, max_odd);
    let n = basis.len();
    let mut l = LieSuperData::new(basis.clone());
    for b1 in 0..n {
        for b2 in b1..n {
            let both_odd = basis.parity(b1).is_odd() && basis.parity(b2).is_odd();
            if b1 == b2 && !both_odd {
                continue;
            }
            for b3 in 0..n {
                if !graded(&basis, b1, b2, b3) || !rng.gen_bool(density) {
                    continue;
                }
                let x = int(rng.gen_range(-2i64..=2));
                // c21 = -(-1)^{|1||2|} c12
                let mirror = if both_odd { x.clone() } else { -x.clone() };
                l.set(b1, b2, b3, x).unwrap();
                l.set(b2, b1, b3, mirror).unwrap();
            }
        }
    }
    l
}

/// A raw lambda table with `n, m <= support`.
pub fn random_lambda(
    rng: &mut ChaCha8Rng,
    basis: &Basis,
    support: u32,
    entries: usize,
) -> BTreeMap<(usize, usize, usize, u32, u32), Scalar> {
    let n = basis.len();
    let mut out = BTreeMap::new();
    let mut tries = 0;
    while out.len() < entries && tries < 100 {
        tries += 1;
        let (b1, b2, b3) = (
            rng.gen_range(0..n),
            rng.gen_range(0..n),
            rng.gen_range(0..n),
        );
        if !graded(basis, b1, b2, b3) {
            continue;
        }
        let x = rng.gen_range(-2i64..=2);
        if x != 0 {
            out.insert(
                (
                    b1,
                    b2,
                    b3,
                    rng.gen_range(0..=support),
                    rng.gen_range(0..=support),
                ),
                int(x),
            );
        }
    }
    out
}

pub fn structure_from(
    basis: &Basis,
    lambda: &BTreeMap<(usize, usize, usize, u32, u32), Scalar>,
) -> ConformalStructure {
    let mut s = ConformalStructure::new(basis.clone(), false);
    for (k, x) in lambda {
        s.set_lambda(*k, x.clone()).unwrap();
    }
    s
}

/// `lambda + T(lambda)`, which satisfies the conjugation identity because
/// the transform is an involution.
pub fn symmetrize(
    basis: &Basis,
    lambda: &BTreeMap<(usize, usize, usize, u32, u32), Scalar>,
) -> BTreeMap<(usize, usize, usize, u32, u32), Scalar> {
    let mut out = lambda.clone();
    for (k, x) in conjugation_transform(basis, lambda) {
        *out.entry(k).or_insert_with(|| int(0)) += x;
    }
    out.retain(|_, x| *x != int(0));
    out
}

/// Center-free structures: a quarter raw, the rest symmetrized; `seed_table`
/// (if any) is perturbed by the random table before symmetrizing.
pub fn random_structure(
    rng: &mut ChaCha8Rng,
    seed_table: Option<&ConformalStructure>,
) -> ConformalStructure {
    let basis = match seed_table {
        Some(s) => s.basis().clone(),
        None => random_basis(rng, 2, 1),
    };
    let count = rng.gen_range(1..=2);
    let mut lambda = random_lambda(rng, &basis, 2, count);
    if let Some(s) = seed_table {
        for (k, x) in s.lambda() {
            *lambda.entry(*k).or_insert_with(|| int(0)) += x;
        }
        lambda.retain(|_, x| *x != int(0));
    }
    if seed_table.is_none() && rng.gen_bool(0.25) {
        return structure_from(&basis, &lambda);
    }
    structure_from(&basis, &symmetrize(&basis, &lambda))
}

pub fn virasoro() -> ConformalStructure {
    let basis = Basis::from_pairs([("L", Parity::Even)]).unwrap();
    let mut s = ConformalStructure::new(basis, false);
    s.set_lambda((0, 0, 0, 1, 0), int(1)).unwrap();
    s.set_lambda((0, 0, 0, 0, 1), int(2)).unwrap();
    s
}

pub fn sl2() -> LieSuperData {
    let basis = Basis::from_pairs([
        ("e", Parity::Even),
        ("f", Parity::Even),
        ("h", Parity::Even),
    ])
    .unwrap();
    let mut l = LieSuperData::new(basis);
    for (a, b, c, x) in [
        (0, 1, 2, 1),
        (1, 0, 2, -1),
        (2, 0, 0, 2),
        (0, 2, 0, -2),
        (2, 1, 1, -2),
        (1, 2, 1, 2),
    ] {
        l.set(a, b, c, int(x)).unwrap();
    }
    l
}

pub fn current(l: &LieSuperData) -> ConformalStructure {
    let mut s = ConformalStructure::new(l.basis().clone(), false);
    for (&(a, b, c), x) in l.constants() {
        s.set_lambda((a, b, c, 0, 0), x.clone()).unwrap();
    }
    s
}

/// `[e1, e2] = e2, [e1, e3] = 2 e3, [e2, e3] = e1`, skew-completed.
pub fn non_jacobi() -> LieSuperData {
    let basis = Basis::from_pairs([
        ("e1", Parity::Even),
        ("e2", Parity::Even),
        ("e3", Parity::Even),
    ])
    .unwrap();
    let mut l = LieSuperData::new(basis);
    for (a, b, c, x) in [
        (0, 1, 1, 1),
        (1, 0, 1, -1),
        (0, 2, 2, 2),
        (2, 0, 2, -2),
        (1, 2, 0, 1),
        (2, 1, 0, -1),
    ] {
        l.set(a, b, c, int(x)).unwrap();
    }
    l
}

/// `[q, q] = h` with `q` odd.
pub fn odd_square() -> LieSuperData {
    let basis = Basis::from_pairs([("h", Parity::Even), ("q", Parity::Odd)]).unwrap();
    let mut l = LieSuperData::new(basis);
    l.set(1, 1, 0, int(1)).unwrap();
    l
}

pub fn kdv() -> MatrixDiffOp {
    let f = Family::even(0);
    let mut e = DiffOpEntry::constant(3, int(1));
    e.add_term(1, psi(0).scale(&int(4)));
    e.add_term(0, psi(1).scale(&int(2)));
    let mut h = MatrixDiffOp::new();
    h.add_entry(f, f, e).unwrap();
    h
}

pub fn d_operator() -> MatrixDiffOp {
    let f = Family::even(0);
    let mut h = MatrixDiffOp::new();
    h.add_entry(f, f, DiffOpEntry::constant(1, int(1))).unwrap();
    h
}

// Laws. Each returns a description of the first discrepancy.

type Law = Result<(), String>;

fn expect_eq(what: &str, a: &SuperPoly, b: &SuperPoly) -> Law {
    if a == b {
        Ok(())
    } else {
        Err(format!("{what}: {a:?} != {b:?}"))
    }
}

fn parity_sign(a: Parity, b: Parity) -> Scalar {
    sign(a.bit() * b.bit())
}

pub fn law_supercommutative(p: &SuperPoly, q: &SuperPoly) -> Law {
    for a in [Parity::Even, Parity::Odd] {
        for b in [Parity::Even, Parity::Odd] {
            let (pa, qb) = (part(p, a), part(q, b));
            expect_eq(
                "supercommutativity",
                &(&pa * &qb),
                &(&qb * &pa).scale(&parity_sign(a, b)),
            )?;
        }
    }
    Ok(())
}

pub fn law_ring(p: &SuperPoly, q: &SuperPoly, r: &SuperPoly) -> Law {
    expect_eq("associativity", &(&(p * q) * r), &(p * &(q * r)))?;
    expect_eq("distributivity", &(p * &(q + r)), &(&(p * q) + &(p * r)))
}

/// `D` is an even derivation and `d/d g` a left derivation of parity `|g|`.
pub fn law_derivations(p: &SuperPoly, q: &SuperPoly, g: Generator) -> Law {
    let pq = p * q;
    expect_eq(
        "D(pq)",
        &pq.total_derivative(),
        &(&(&p.total_derivative() * q) + &(p * &q.total_derivative())),
    )?;
    for a in [Parity::Even, Parity::Odd] {
        let pa = part(p, a);
        let lhs = (&pa * q).partial(g);
        let rhs = &(&pa.partial(g) * q) + &(&pa * &q.partial(g)).scale(&parity_sign(g.parity(), a));
        expect_eq("partial(pq)", &lhs, &rhs)?;
    }
    Ok(())
}

pub fn law_degree_commutes(p: &SuperPoly) -> Law {
    expect_eq(
        "[Y, D]",
        &p.total_derivative().degree_operator(),
        &p.degree_operator().total_derivative(),
    )?;
    let back = p.inverse_degree_operator().degree_operator();
    expect_eq(
        "Y Y^-1",
        &back,
        &(p - &SuperPoly::constant(p.constant_term())),
    )
}

/// `[d/d psi^(n), D] = d/d psi^(n-1)` (and `0` at `n = 0`).
pub fn law_partial_commutator(p: &SuperPoly, g: Generator) -> Law {
    let lhs = &p.total_derivative().partial(g) - &p.partial(g).total_derivative();
    let rhs = if g.order == 0 {
        SuperPoly::zero()
    } else {
        p.partial(g.family.gen(g.order - 1))
    };
    expect_eq("[d/dg, D]", &lhs, &rhs)
}

pub fn law_adjoint_involution(h: &MatrixDiffOp) -> Law {
    if h.super_adjoint().super_adjoint() == *h {
        Ok(())
    } else {
        Err("adjoint is not an involution".into())
    }
}

pub fn law_delta_kills_d(p: &SuperPoly) -> Law {
    let dp = p.total_derivative();
    for f in FAMILIES {
        let d = variational_derivative(f, &dp);
        if !d.is_zero() {
            return Err(format!("delta D(p) / delta {f:?} = {d:?}"));
        }
    }
    Ok(())
}

pub fn law_conjugation_involution(
    basis: &Basis,
    lambda: &BTreeMap<(usize, usize, usize, u32, u32), Scalar>,
) -> Law {
    let twice = conjugation_transform(basis, &conjugation_transform(basis, lambda));
    if twice == *lambda {
        Ok(())
    } else {
        Err(format!("T(T(lambda)) = {twice:?} != {lambda:?}"))
    }
}

/// For a structure satisfying the conjugation identity, the Jacobi residual
/// table is antisymmetric under exchanging the first two arguments (with
/// their variables), up to the sign `(-1)^{|1||2|}`.
pub fn law_jacobi_swap(s: &ConformalStructure) -> Law {
    let r = superham::conformal::jacobi_residuals(s);
    let b = s.basis();
    for (&(b1, b2, b3, j5, m1, m2, n2), x) in &r {
        let swapped = r
            .get(&(b2, b1, b3, j5, m2, m1, n2))
            .cloned()
            .unwrap_or_else(|| int(0));
        let expected = -(x * parity_sign(b.parity(b1), b.parity(b2)));
        if swapped != expected {
            return Err(format!(
                "swap of {:?}: {swapped} != {expected}",
                (b1, b2, b3, j5, m1, m2, n2)
            ));
        }
    }
    Ok(())
}

pub fn law_evolutionary_commutes(u: &VectorField, p: &SuperPoly) -> Law {
    expect_eq(
        "[d_u, D]",
        &evolutionary_derivative(u, &p.total_derivative()),
        &evolutionary_derivative(u, p).total_derivative(),
    )
}

pub fn law_bracket_realization(u: &VectorField, v: &VectorField, p: &SuperPoly) -> Law {
    let lhs = &evolutionary_derivative(u, &evolutionary_derivative(v, p))
        - &evolutionary_derivative(v, &evolutionary_derivative(u, p));
    expect_eq(
        "[d_u, d_v]",
        &lhs,
        &evolutionary_derivative(&field_bracket(u, v), p),
    )
}

pub fn is_even_poly(p: &SuperPoly) -> bool {
    p.parity_of().fits(Parity::Even) || p.parity_of() == PolyParity::Zero
}
