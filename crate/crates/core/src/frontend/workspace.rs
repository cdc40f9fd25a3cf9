//! Name resolution from the syntax tree and the canonical serializer.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use super::lexer::{Pos, SyntaxError};
use super::parser::{parse_items, BasisDecl, ConstDecl, EntryDecl, Expr, Ident, Item};
use super::render::{render_entry, render_poly, Names};
use crate::conformal::{Basis, BasisElement, ConformalError, ConformalStructure, LieSuperData};
use crate::diffop::{BilinearForm, DiffOpEntry, DiffOpError, MatrixDiffOp};
use crate::scalar::{format_scalar, Scalar};
use crate::superpoly::{Family, Parity, SuperPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    UnknownIdentifier,
    ParityMismatch,
    DuplicateName,
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{pos}: {message}")]
pub struct WorkspaceError {
    pub pos: Pos,
    pub kind: ErrorKind,
    pub message: String,
}

impl From<SyntaxError> for WorkspaceError {
    fn from(e: SyntaxError) -> WorkspaceError {
        WorkspaceError {
            pos: e.pos,
            kind: ErrorKind::Syntax,
            message: e.message,
        }
    }
}

fn fail<T>(pos: Pos, kind: ErrorKind, message: impl Into<String>) -> Result<T, WorkspaceError> {
    Err(WorkspaceError {
        pos,
        kind,
        message: message.into(),
    })
}

/// A form as written: values keyed by names, resolved against whatever
/// families the operands of a command provide.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FormDecl {
    pub pairs: BTreeMap<(String, String, u32), Scalar>,
}

impl FormDecl {
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.pairs
            .keys()
            .flat_map(|(a, b, _)| [a.as_str(), b.as_str()])
    }

    /// Resolves names through `lookup`, reporting the first unknown name.
    pub fn resolve(&self, lookup: impl Fn(&str) -> Option<Family>) -> Result<BilinearForm, String> {
        let mut entries = Vec::new();
        for ((a, b, m), x) in &self.pairs {
            let fa = lookup(a).ok_or_else(|| format!("unknown identifier `{a}` in form"))?;
            let fb = lookup(b).ok_or_else(|| format!("unknown identifier `{b}` in form"))?;
            entries.push(((fa, fb, *m), x.clone()));
        }
        BilinearForm::new(entries).map_err(|e| match e {
            crate::diffop::FormError::ParityMismatch { .. } => {
                "form pairs elements of different parity".to_string()
            }
            crate::diffop::FormError::Symmetry { m, .. } => {
                format!("form values violate the symmetry law at m = {m}")
            }
            crate::diffop::FormError::Diagonal { m, .. } => {
                format!("form has a nonzero diagonal value at m = {m}")
            }
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Workspace {
    /// Declared families in canonical order.
    pub families: Vec<(String, Family)>,
    pub polys: BTreeMap<String, SuperPoly>,
    pub operators: BTreeMap<String, MatrixDiffOp>,
    pub lie: BTreeMap<String, LieSuperData>,
    pub forms: BTreeMap<String, FormDecl>,
    pub conformal: BTreeMap<String, ConformalStructure>,
}

struct Scope<'a> {
    families: &'a BTreeMap<String, Family>,
}

impl Scope<'_> {
    fn family(&self, id: &Ident) -> Result<Family, WorkspaceError> {
        match self.families.get(&id.name) {
            Some(f) => Ok(*f),
            None => fail(
                id.pos,
                ErrorKind::UnknownIdentifier,
                format!("unknown identifier `{}`", id.name),
            ),
        }
    }

    fn poly(&self, e: &Expr) -> Result<SuperPoly, WorkspaceError> {
        Ok(match e {
            Expr::Num(q) => SuperPoly::constant(q.clone()),
            Expr::Gen { name, order } => SuperPoly::generator(self.family(name)?.gen(*order)),
            Expr::Neg(x) => -self.poly(x)?,
            Expr::Sum(terms) => {
                let mut acc = SuperPoly::zero();
                for (neg, t) in terms {
                    let p = self.poly(t)?;
                    if *neg {
                        acc -= p;
                    } else {
                        acc += p;
                    }
                }
                acc
            }
            Expr::Product(fs) => {
                let mut acc = SuperPoly::one();
                for f in fs {
                    acc = &acc * &self.poly(f)?;
                }
                acc
            }
            Expr::Pow { base, exp, pos } => {
                let Expr::Gen { name, .. } = base.as_ref() else {
                    return fail(
                        *pos,
                        ErrorKind::Invalid,
                        "`^` applies only to a single generator",
                    );
                };
                if self.family(name)?.parity.is_odd() {
                    return fail(
                        *pos,
                        ErrorKind::ParityMismatch,
                        format!("`^` applied to odd generator `{}`", name.name),
                    );
                }
                let g = self.poly(base)?;
                let mut acc = SuperPoly::one();
                for _ in 0..*exp {
                    acc = &acc * &g;
                }
                acc
            }
        })
    }

    fn entry(&self, decl: &EntryDecl) -> Result<DiffOpEntry, WorkspaceError> {
        let mut out = DiffOpEntry::zero();
        for t in &decl.terms {
            let mut a = match &t.coefficient {
                Some(e) => self.poly(e)?,
                None => SuperPoly::one(),
            };
            if t.negated {
                a = -a;
            }
            out.add_term(t.power, a);
        }
        Ok(out)
    }
}

fn check_name(id: &Ident) -> Result<(), WorkspaceError> {
    if id.name == "D" {
        return fail(
            id.pos,
            ErrorKind::Invalid,
            "`D` is reserved for the total derivative",
        );
    }
    Ok(())
}

fn unique<'a>(
    seen: &mut BTreeMap<&'a str, ()>,
    id: &'a Ident,
    what: &str,
) -> Result<(), WorkspaceError> {
    if seen.insert(&id.name, ()).is_some() {
        return fail(
            id.pos,
            ErrorKind::DuplicateName,
            format!("duplicate {what} `{}`", id.name),
        );
    }
    Ok(())
}

fn basis_of(decls: &[BasisDecl]) -> Result<Basis, WorkspaceError> {
    let mut seen = BTreeMap::new();
    for d in decls {
        check_name(&d.name)?;
        unique(&mut seen, &d.name, "basis element")?;
    }
    Ok(Basis::new(
        decls
            .iter()
            .map(|d| BasisElement {
                name: d.name.name.clone(),
                parity: d.parity,
            })
            .collect(),
    )
    .expect("names checked"))
}

fn position(basis: &Basis, id: &Ident) -> Result<usize, WorkspaceError> {
    match basis.position(&id.name) {
        Some(k) => Ok(k),
        None => fail(
            id.pos,
            ErrorKind::UnknownIdentifier,
            format!("unknown basis element `{}`", id.name),
        ),
    }
}

fn grading(pos: Pos, e: ConformalError) -> WorkspaceError {
    let kind = match e {
        ConformalError::Grading { .. } | ConformalError::CentralGrading { .. } => {
            ErrorKind::ParityMismatch
        }
        _ => ErrorKind::Invalid,
    };
    WorkspaceError {
        pos,
        kind,
        message: e.to_string(),
    }
}

fn constants<'a, K: Ord>(
    decls: &'a [ConstDecl],
    basis: &Basis,
    key: impl Fn(&[usize], &[u32]) -> K,
) -> Result<Vec<(K, &'a ConstDecl)>, WorkspaceError> {
    let mut out: BTreeMap<K, &ConstDecl> = BTreeMap::new();
    for d in decls {
        let idx = d
            .args
            .iter()
            .map(|a| position(basis, a))
            .collect::<Result<Vec<_>, _>>()?;
        if out.insert(key(&idx, &d.orders), d).is_some() {
            return fail(d.pos, ErrorKind::DuplicateName, "duplicate constant");
        }
    }
    Ok(out.into_iter().collect())
}

pub fn parse_workspace(src: &str) -> Result<Workspace, WorkspaceError> {
    let items = parse_items(src)?;
    let mut ws = Workspace::default();

    // Families first, so that later items may refer to any of them.
    let mut families: BTreeMap<String, Family> = BTreeMap::new();
    let mut counts = [0u32; 2];
    for item in &items {
        if let Item::Family { name, parity } = item {
            check_name(name)?;
            if families.contains_key(&name.name) {
                return fail(
                    name.pos,
                    ErrorKind::DuplicateName,
                    format!("duplicate family `{}`", name.name),
                );
            }
            let slot = &mut counts[parity.bit() as usize];
            families.insert(name.name.clone(), Family::new(*parity, *slot));
            *slot += 1;
        }
    }
    let scope = Scope {
        families: &families,
    };
    let mut seen: [BTreeMap<&str, ()>; 5] = Default::default();

    // Parities of every name a form may refer to.
    let mut known: BTreeMap<&str, Parity> = families
        .iter()
        .map(|(n, f)| (n.as_str(), f.parity))
        .collect();
    for item in &items {
        if let Item::Lie { basis, .. } | Item::Conformal { basis, .. } = item {
            for b in basis {
                known.entry(&b.name.name).or_insert(b.parity);
            }
        }
    }

    for item in &items {
        match item {
            Item::Family { .. } => {}
            Item::Poly { name, expr } => {
                unique(&mut seen[0], name, "poly")?;
                ws.polys.insert(name.name.clone(), scope.poly(expr)?);
            }
            Item::Operator { name, entries } => {
                unique(&mut seen[1], name, "operator")?;
                let mut h = MatrixDiffOp::new();
                let mut cells = BTreeMap::new();
                for e in entries {
                    let (r, c) = (scope.family(&e.row)?, scope.family(&e.col)?);
                    if cells.insert((r, c), ()).is_some() {
                        return fail(
                            e.row.pos,
                            ErrorKind::DuplicateName,
                            format!("duplicate entry ({}, {})", e.row.name, e.col.name),
                        );
                    }
                    if let Err(DiffOpError::EntryParity {
                        order, expected, ..
                    }) = h.add_entry(r, c, scope.entry(e)?)
                    {
                        return fail(
                            e.row.pos,
                            ErrorKind::ParityMismatch,
                            format!(
                                "coefficient of D^{order} in entry ({}, {}) must be {}",
                                e.row.name,
                                e.col.name,
                                expected.name()
                            ),
                        );
                    }
                }
                ws.operators.insert(name.name.clone(), h);
            }
            Item::Lie {
                name,
                basis,
                brackets,
            } => {
                unique(&mut seen[2], name, "lie")?;
                let basis = basis_of(basis)?;
                let mut l = LieSuperData::new(basis.clone());
                for ((b1, b2, b3), d) in constants(brackets, &basis, |i, _| (i[0], i[1], i[2]))? {
                    l.set(b1, b2, b3, d.value.clone())
                        .map_err(|e| grading(d.pos, e))?;
                }
                ws.lie.insert(name.name.clone(), l);
            }
            Item::Form { name, pairs } => {
                unique(&mut seen[3], name, "form")?;
                let mut decl = FormDecl::default();
                for p in pairs {
                    let mut parities = Vec::new();
                    for a in &p.args {
                        match known.get(a.name.as_str()) {
                            Some(par) => parities.push(*par),
                            None => {
                                return fail(
                                    a.pos,
                                    ErrorKind::UnknownIdentifier,
                                    format!("unknown identifier `{}`", a.name),
                                )
                            }
                        }
                    }
                    if parities[0] != parities[1] {
                        return fail(
                            p.pos,
                            ErrorKind::ParityMismatch,
                            "form pairs elements of different parity",
                        );
                    }
                    let key = (p.args[0].name.clone(), p.args[1].name.clone(), p.orders[0]);
                    if decl.pairs.insert(key, p.value.clone()).is_some() {
                        return fail(p.pos, ErrorKind::DuplicateName, "duplicate form value");
                    }
                }
                // Provisional resolution catches symmetry conflicts early.
                let provisional: BTreeMap<&str, Family> = known
                    .iter()
                    .enumerate()
                    .map(|(k, (n, p))| (*n, Family::new(*p, k as u32)))
                    .collect();
                if let Err(msg) = decl.resolve(|n| provisional.get(n).copied()) {
                    return fail(name.pos, ErrorKind::Invalid, msg);
                }
                ws.forms.insert(name.name.clone(), decl);
            }
            Item::Conformal {
                name,
                basis,
                lambdas,
                mus,
            } => {
                unique(&mut seen[4], name, "conformal")?;
                let basis = basis_of(basis)?;
                let mut s = ConformalStructure::new(basis.clone(), !mus.is_empty());
                for (key, d) in constants(lambdas, &basis, |i, o| (i[0], i[1], i[2], o[0], o[1]))? {
                    s.set_lambda(key, d.value.clone())
                        .map_err(|e| grading(d.pos, e))?;
                }
                for ((b1, b2, m), d) in constants(mus, &basis, |i, o| (i[0], i[1], o[0]))? {
                    s.set_mu(b1, b2, m, d.value.clone())
                        .map_err(|e| grading(d.pos, e))?;
                }
                ws.conformal.insert(name.name.clone(), s);
            }
        }
    }
    let mut fams: Vec<(String, Family)> = families.into_iter().collect();
    fams.sort_by_key(|(_, f)| *f);
    ws.families = fams;
    Ok(ws)
}

impl Workspace {
    pub fn names(&self) -> Names {
        self.families.iter().map(|(n, f)| (*f, n.clone())).collect()
    }

    pub fn family(&self, name: &str) -> Option<Family> {
        self.families
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, f)| *f)
    }

    pub fn serialize(&self) -> String {
        self.to_string()
    }
}

fn write_basis(out: &mut String, b: &Basis) {
    for e in b.elements() {
        let _ = writeln!(out, "  basis {} parity {};", e.name, e.parity.name());
    }
}

pub fn write_operator(out: &mut String, name: &str, h: &MatrixDiffOp, names: &Names) {
    let _ = writeln!(out, "operator {name} {{");
    for (r, c, e) in h.entries() {
        let _ = writeln!(
            out,
            "  entry ({}, {}) = {};",
            names.get(r),
            names.get(c),
            render_entry(e, names)
        );
    }
    out.push_str("}\n");
}

pub fn write_lie(out: &mut String, name: &str, l: &LieSuperData) {
    let b = l.basis();
    let _ = writeln!(out, "lie {name} {{");
    write_basis(out, b);
    for (&(b1, b2, b3), x) in l.constants() {
        let _ = writeln!(
            out,
            "  bracket ({}, {} -> {}) = {};",
            b.name(b1),
            b.name(b2),
            b.name(b3),
            format_scalar(x)
        );
    }
    out.push_str("}\n");
}

pub fn write_conformal(out: &mut String, name: &str, s: &ConformalStructure) {
    let b = s.basis();
    let _ = writeln!(out, "conformal {name} {{");
    write_basis(out, b);
    for (&(b1, b2, b3, n, m), x) in s.lambda() {
        let _ = writeln!(
            out,
            "  lambda ({}, {} -> {})[n={n}, m={m}] = {};",
            b.name(b1),
            b.name(b2),
            b.name(b3),
            format_scalar(x)
        );
    }
    for (&(b1, b2, m), x) in s.mu() {
        let _ = writeln!(
            out,
            "  mu ({}, {})[m={m}] = {};",
            b.name(b1),
            b.name(b2),
            format_scalar(x)
        );
    }
    out.push_str("}\n");
}

/// The canonical document: families, polys, then one block per object with
/// blank lines between sections.
impl fmt::Display for Workspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.names();
        let mut sections: Vec<String> = Vec::new();
        if !self.families.is_empty() {
            let mut s = String::new();
            for (n, fam) in &self.families {
                let _ = writeln!(s, "family {n} parity {};", fam.parity.name());
            }
            sections.push(s);
        }
        if !self.polys.is_empty() {
            let mut s = String::new();
            for (n, p) in &self.polys {
                let _ = writeln!(s, "poly {n} = {};", render_poly(p, &names));
            }
            sections.push(s);
        }
        for (n, h) in &self.operators {
            let mut s = String::new();
            write_operator(&mut s, n, h, &names);
            sections.push(s);
        }
        for (n, l) in &self.lie {
            let mut s = String::new();
            write_lie(&mut s, n, l);
            sections.push(s);
        }
        for (n, form) in &self.forms {
            let mut s = String::new();
            let _ = writeln!(s, "form {n} {{");
            for ((a, b, m), x) in &form.pairs {
                let _ = writeln!(s, "  pair ({a}, {b})[m={m}] = {};", format_scalar(x));
            }
            s.push_str("}\n");
            sections.push(s);
        }
        for (n, c) in &self.conformal {
            let mut s = String::new();
            write_conformal(&mut s, n, c);
            sections.push(s);
        }
        f.write_str(&sections.join("\n"))
    }
}
