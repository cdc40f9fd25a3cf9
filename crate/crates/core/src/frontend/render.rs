//! Canonical rendering in the same surface syntax the parser reads.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::conformal::Basis;
use crate::diffop::DiffOpEntry;
use crate::scalar::{format_scalar, Scalar};
use crate::superpoly::{Family, Generator, Monomial, SuperPoly};
use crate::verdict::{Constraint, PairSlot, Residual, TestSlot, Witness};

/// Display names of generator families.
#[derive(Clone, Debug, Default)]
pub struct Names {
    map: BTreeMap<Family, String>,
}

impl Names {
    pub fn new() -> Names {
        Names::default()
    }

    pub fn insert(&mut self, f: Family, name: impl Into<String>) {
        self.map.insert(f, name.into());
    }

    pub fn get(&self, f: Family) -> String {
        match self.map.get(&f) {
            Some(s) => s.clone(),
            None => format!("_{}{}", if f.parity.is_odd() { "o" } else { "e" }, f.index),
        }
    }

    /// Adds names `u{slot}_{origin}` for the auxiliary families of a
    /// closedness test.
    pub fn with_test_families(&self, tests: &BTreeMap<Family, TestSlot>) -> Names {
        let mut out = self.clone();
        for (f, t) in tests {
            out.insert(*f, format!("u{}_{}", t.slot, self.get(t.origin)));
        }
        out
    }
}

impl FromIterator<(Family, String)> for Names {
    fn from_iter<I: IntoIterator<Item = (Family, String)>>(iter: I) -> Names {
        Names {
            map: iter.into_iter().collect(),
        }
    }
}

pub fn render_generator(g: Generator, names: &Names) -> String {
    let name = names.get(g.family);
    match g.order {
        0..=3 => format!("{name}{}", "'".repeat(g.order as usize)),
        n => format!("D^{n}[{name}]"),
    }
}

/// Factors joined by `*`, with repeated even factors collapsed to powers.
fn render_monomial(m: &Monomial, names: &Names) -> String {
    let mut parts: Vec<String> = Vec::new();
    let f = m.factors();
    let mut i = 0;
    while i < f.len() {
        let mut j = i + 1;
        while j < f.len() && f[j] == f[i] {
            j += 1;
        }
        let g = render_generator(f[i], names);
        parts.push(if j - i > 1 {
            format!("{g}^{}", j - i)
        } else {
            g
        });
        i = j;
    }
    parts.join("*")
}

/// Joins `(negative, body)` pairs into `a + b - c`.
fn join_signed(terms: Vec<(bool, String)>) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (neg, body)) in terms.into_iter().enumerate() {
        match (k, neg) {
            (0, false) => {}
            (0, true) => out.push('-'),
            (_, false) => out.push_str(" + "),
            (_, true) => out.push_str(" - "),
        }
        out.push_str(&body);
    }
    out
}

/// `c` times a body (`None` for the empty product), with the sign split off.
fn scaled(c: &Scalar, body: Option<String>) -> (bool, String) {
    let a = c.abs();
    let text = match body {
        None => format_scalar(&a),
        Some(b) if a.is_one() => b,
        Some(b) => format!("{}*{b}", format_scalar(&a)),
    };
    (c.is_negative(), text)
}

fn poly_terms(p: &SuperPoly, names: &Names) -> Vec<(bool, String)> {
    let mut terms: Vec<(&Monomial, &Scalar)> = p.terms().collect();
    terms.sort_by_key(|(m, _)| m.len());
    terms
        .into_iter()
        .map(|(m, c)| scaled(c, (!m.is_empty()).then(|| render_monomial(m, names))))
        .collect()
}

pub fn render_poly(p: &SuperPoly, names: &Names) -> String {
    join_signed(poly_terms(p, names))
}

fn d_power(n: u32) -> String {
    if n == 1 {
        "D".to_string()
    } else {
        format!("D^{n}")
    }
}

/// Highest power of `D` first; multi-term coefficients are parenthesized.
pub fn render_entry(e: &DiffOpEntry, names: &Names) -> String {
    let mut terms = Vec::new();
    for (n, a) in e.terms().rev() {
        if n == 0 {
            terms.extend(poly_terms(a, names));
        } else if a.num_terms() == 1 {
            let (m, c) = a.terms().next().expect("one term");
            let body = if m.is_empty() {
                d_power(n)
            } else {
                format!("{}*{}", render_monomial(m, names), d_power(n))
            };
            terms.push(scaled(c, Some(body)));
        } else {
            terms.push((false, format!("({})*{}", render_poly(a, names), d_power(n))));
        }
    }
    join_signed(terms)
}

pub fn render_combination(x: &BTreeMap<usize, Scalar>, basis: &Basis) -> String {
    join_signed(
        x.iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| scaled(c, Some(basis.name(*k).to_string())))
            .collect(),
    )
}

/// What a witness refers to: family names plus, for Lie and conformal
/// checks, the basis whose positions the constraint uses.
pub struct Context<'a> {
    pub names: Names,
    pub basis: Option<&'a Basis>,
}

impl Context<'_> {
    fn element(&self, k: usize) -> String {
        match self.basis {
            Some(b) if k < b.len() => b.name(k).to_string(),
            _ => format!("#{k}"),
        }
    }

    fn residual(&self, r: &Residual) -> String {
        match r {
            Residual::Poly(p) => render_poly(p, &self.names),
            Residual::Entry(e) => render_entry(e, &self.names),
            Residual::Scalar(x) => format_scalar(x),
            Residual::Combination(x) => match self.basis {
                Some(b) => render_combination(x, b),
                None => format!("{x:?}"),
            },
        }
    }

    pub fn witness(&self, w: &Witness) -> String {
        let e = |k| self.element(k);
        let head = match &w.constraint {
            Constraint::SkewEntry { row, col } => {
                format!(
                    "skew ({}, {}): H + H*",
                    self.names.get(*row),
                    self.names.get(*col)
                )
            }
            Constraint::Closedness { family } => {
                format!("closedness: delta/delta {}", self.names.get(*family))
            }
            Constraint::Schouten { slot, family } => {
                let s = match slot {
                    PairSlot::First => "[H1, H1]",
                    PairSlot::Second => "[H2, H2]",
                    PairSlot::Mixed => "[H1, H2]",
                };
                format!("schouten {s}: delta/delta {}", self.names.get(*family))
            }
            Constraint::LieSkew { b1, b2, b3 } => {
                format!("skew ({}, {} -> {})", e(*b1), e(*b2), e(*b3))
            }
            Constraint::LieJacobi { b1, b2, b3 } => {
                format!("jacobi ({}, {}, {})", e(*b1), e(*b2), e(*b3))
            }
            Constraint::Cocycle { b1, b2, b3 } => {
                format!("cocycle ({}, {}, {})", e(*b1), e(*b2), e(*b3))
            }
            Constraint::Conjugation { b1, b2, b3, n, m } => {
                format!(
                    "conjugation ({}, {} -> {})[n={n}, m={m}]",
                    e(*b1),
                    e(*b2),
                    e(*b3)
                )
            }
            Constraint::CentralConjugation { b1, b2, m } => {
                format!("central conjugation ({}, {})[m={m}]", e(*b1), e(*b2))
            }
            Constraint::Jacobi {
                b1,
                b2,
                b3,
                j5,
                m1,
                m2,
                n2,
            } => format!(
                "jacobi ({}, {}, {} -> {})[n={n2}, m1={m1}, m2={m2}]",
                e(*b1),
                e(*b2),
                e(*b3),
                e(*j5)
            ),
        };
        let sep = if matches!(
            w.constraint,
            Constraint::SkewEntry { .. }
                | Constraint::Closedness { .. }
                | Constraint::Schouten { .. }
        ) {
            " = "
        } else {
            ": "
        };
        format!("{head}{sep}{}", self.residual(&w.residual))
    }
}
