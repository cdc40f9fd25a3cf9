//! Command dispatch and report emission.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::render::{render_poly, Context, Names};
use super::workspace::{parse_workspace, write_conformal, write_operator, FormDecl, Workspace};
use crate::conformal::{
    check_cocycle, check_conformal, check_lie_super, from_linear_operator, to_hamiltonian, Basis,
    BasisElement, ConformalError,
};
use crate::diffop::{
    bilinear_form_operator, check_hamiltonian, check_pair, check_skew, evolution_equation,
    linear_lie_operator, schouten_bracket, DiffOpError, MatrixDiffOp,
};
use crate::scalar::format_scalar;
use crate::superpoly::{Family, Parity, SuperPoly};
use crate::varcalc::{decide_trivial, variational_derivative, TildeVerdict};
use crate::verdict::{Constraint, Residual, Verdict};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "superham",
    about = "Exact checks for Hamiltonian superoperators and conformal superalgebras"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
}

#[derive(clap::Args, Debug)]
struct Source {
    /// Workspace file (`.shs`).
    file: Option<PathBuf>,
    #[arg(long)]
    workspace: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Skew-symmetry of an operator.
    CheckSkew {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        operator: String,
    },
    /// Skew-symmetry and closedness.
    CheckHamiltonian {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        operator: String,
    },
    /// Compatibility of two Hamiltonian operators.
    CheckPair {
        #[command(flatten)]
        src: Source,
        #[arg(long = "operator", required = true)]
        operators: Vec<String>,
    },
    /// The Schouten bracket [H1, H2] (or [H, H] for a single operator).
    Schouten {
        #[command(flatten)]
        src: Source,
        #[arg(long = "operator", required = true)]
        operators: Vec<String>,
    },
    /// Super skew-symmetry and graded Jacobi identity of structure constants.
    CheckLie {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        lie: String,
    },
    /// Whether a form defines a central extension.
    CheckCocycle {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        lie: String,
        #[arg(long)]
        form: String,
    },
    /// Axioms of a conformal superalgebra.
    CheckConformal {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        structure: String,
    },
    /// The operator attached to a conformal structure.
    ToOperator {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        structure: String,
    },
    /// The conformal structure attached to an affine operator.
    FromOperator {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        operator: String,
    },
    /// The evolution system of a Hamiltonian density.
    Evolve {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        operator: String,
        #[arg(long)]
        density: String,
    },
    /// Variational derivatives and triviality of a density.
    Vardelta {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        density: String,
    },
    /// Print the workspace in canonical form.
    Fmt {
        #[command(flatten)]
        src: Source,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerdictReport {
    pub name: String,
    pub pass: bool,
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub command: String,
    pub verdicts: Vec<VerdictReport>,
    pub output: Vec<String>,
    pub error: Option<String>,
    pub exit_code: i32,
    #[serde(skip)]
    pub format: Format,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.exit_code == 0
    }

    pub fn render(&self) -> String {
        match self.format {
            Format::Json => serde_json::to_string_pretty(self).expect("serializable") + "\n",
            Format::Text => {
                let mut out = String::new();
                for v in &self.verdicts {
                    out.push_str(&format!(
                        "{}: {}\n",
                        v.name,
                        if v.pass { "pass" } else { "FAIL" }
                    ));
                    for w in &v.witnesses {
                        out.push_str(&format!("  {w}\n"));
                    }
                }
                for line in &self.output {
                    out.push_str(line);
                    out.push('\n');
                }
                if let Some(e) = &self.error {
                    out.push_str(&format!("error: {e}\n"));
                }
                out
            }
        }
    }
}

struct Outcome {
    verdicts: Vec<VerdictReport>,
    output: Vec<String>,
}

type CmdResult = Result<Outcome, String>;

fn verdict_report(name: String, v: &Verdict, ctx: &Context) -> VerdictReport {
    let ctx = Context {
        names: ctx.names.with_test_families(&v.test_families),
        basis: ctx.basis,
    };
    VerdictReport {
        name,
        pass: v.passed(),
        witnesses: v.witnesses.iter().map(|w| ctx.witness(w)).collect(),
    }
}

fn load(src: &Source) -> Result<Workspace, String> {
    let path = match (&src.file, &src.workspace) {
        (Some(_), Some(_)) => {
            return Err("give the workspace either positionally or with --workspace".into())
        }
        (Some(p), None) | (None, Some(p)) => p,
        (None, None) => return Err("no workspace file given".into()),
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_workspace(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// An operator together with display names for its families.
struct Operand {
    label: String,
    op: MatrixDiffOp,
    names: BTreeMap<Family, String>,
    basis: Option<Basis>,
}

fn basis_names(b: &Basis) -> BTreeMap<Family, String> {
    (0..b.len())
        .map(|k| (b.family(k), b.name(k).to_string()))
        .collect()
}

fn ws_names(ws: &Workspace) -> BTreeMap<Family, String> {
    ws.families.iter().map(|(n, f)| (*f, n.clone())).collect()
}

enum Spec<'a> {
    Ready(Operand),
    Form(&'a str, &'a FormDecl),
}

fn lookup_spec<'a>(ws: &'a Workspace, spec: &'a str) -> Result<Spec<'a>, String> {
    let (kind, name) = spec.split_once(':').unwrap_or(("operator", spec));
    let missing = || format!("unknown {kind} `{name}`");
    Ok(match kind {
        "operator" => Spec::Ready(Operand {
            label: name.to_string(),
            op: ws.operators.get(name).ok_or_else(missing)?.clone(),
            names: ws_names(ws),
            basis: None,
        }),
        "lie" => {
            let l = ws.lie.get(name).ok_or_else(missing)?;
            Spec::Ready(Operand {
                label: spec.to_string(),
                op: linear_lie_operator(l),
                names: basis_names(l.basis()),
                basis: Some(l.basis().clone()),
            })
        }
        "conformal" => {
            let s = ws.conformal.get(name).ok_or_else(missing)?;
            Spec::Ready(Operand {
                label: spec.to_string(),
                op: to_hamiltonian(s),
                names: basis_names(s.basis()),
                basis: Some(s.basis().clone()),
            })
        }
        "form" => Spec::Form(name, ws.forms.get(name).ok_or_else(missing)?),
        _ => {
            return Err(format!(
                "unknown operator kind `{kind}` (use lie:, form: or conformal:)"
            ))
        }
    })
}

/// Parity of a name as the operands or the workspace declare it.
fn parity_of(name: &str, ready: &[&Operand], ws: &Workspace) -> Option<Parity> {
    for o in ready {
        if let Some((f, _)) = o.names.iter().find(|(_, n)| *n == name) {
            return Some(f.parity);
        }
    }
    if let Some(f) = ws.family(name) {
        return Some(f.parity);
    }
    let bases = ws
        .lie
        .values()
        .map(|l| l.basis())
        .chain(ws.conformal.values().map(|s| s.basis()));
    for b in bases {
        if let Some(k) = b.position(name) {
            return Some(b.parity(k));
        }
    }
    None
}

/// Names to families, assigned per parity in order of first appearance.
#[derive(Default)]
struct Unifier {
    map: BTreeMap<String, Family>,
    counts: [u32; 2],
}

impl Unifier {
    fn family(&mut self, name: &str, parity: Parity) -> Result<Family, String> {
        if let Some(f) = self.map.get(name) {
            if f.parity != parity {
                return Err(format!(
                    "`{name}` has different parities in different operands"
                ));
            }
            return Ok(*f);
        }
        let slot = &mut self.counts[parity.bit() as usize];
        let f = Family::new(parity, *slot);
        *slot += 1;
        self.map.insert(name.to_string(), f);
        Ok(f)
    }

    fn absorb(
        &mut self,
        names: &BTreeMap<Family, String>,
        used: impl IntoIterator<Item = Family>,
    ) -> Result<BTreeMap<Family, Family>, String> {
        let mut out = BTreeMap::new();
        for f in used {
            let name = names
                .get(&f)
                .ok_or_else(|| format!("unnamed family {f:?}"))?;
            out.insert(f, self.family(name, f.parity)?);
        }
        Ok(out)
    }

    fn names(&self) -> Names {
        self.map.iter().map(|(n, f)| (*f, n.clone())).collect()
    }
}

/// Resolves operator specs to operators over one shared set of families,
/// identifying families by name.
fn operands(
    ws: &Workspace,
    specs: &[String],
    unifier: &mut Unifier,
) -> Result<Vec<Operand>, String> {
    let looked: Vec<Spec> = specs
        .iter()
        .map(|s| lookup_spec(ws, s))
        .collect::<Result<_, _>>()?;
    let ready: Vec<&Operand> = looked
        .iter()
        .filter_map(|s| match s {
            Spec::Ready(o) => Some(o),
            Spec::Form(..) => None,
        })
        .collect();
    let mut resolved = Vec::new();
    for s in &looked {
        resolved.push(match s {
            Spec::Ready(o) => Operand {
                label: o.label.clone(),
                op: o.op.clone(),
                names: o.names.clone(),
                basis: o.basis.clone(),
            },
            Spec::Form(name, decl) => {
                let mut local: BTreeMap<String, Family> = BTreeMap::new();
                let mut counts = [0u32; 2];
                for n in decl.names() {
                    if local.contains_key(n) {
                        continue;
                    }
                    let p = parity_of(n, &ready, ws)
                        .ok_or_else(|| format!("unknown identifier `{n}` in form `{name}`"))?;
                    let slot = &mut counts[p.bit() as usize];
                    local.insert(n.to_string(), Family::new(p, *slot));
                    *slot += 1;
                }
                let form = decl.resolve(|n| local.get(n).copied())?;
                Operand {
                    label: format!("form:{name}"),
                    op: bilinear_form_operator(&form),
                    names: local.into_iter().map(|(n, f)| (f, n)).collect(),
                    basis: None,
                }
            }
        });
    }
    for o in &mut resolved {
        let renaming = unifier.absorb(&o.names, o.op.all_families())?;
        o.op = o.op.map_families(|f| renaming[&f]);
    }
    Ok(resolved)
}

fn single(ws: &Workspace, spec: &str) -> Result<(Operand, Names), String> {
    let mut u = Unifier::default();
    let mut ops = operands(ws, &[spec.to_string()], &mut u)?;
    Ok((ops.remove(0), u.names()))
}

fn density(ws: &Workspace, name: &str) -> Result<SuperPoly, String> {
    ws.polys
        .get(name)
        .cloned()
        .ok_or_else(|| format!("unknown poly `{name}`"))
}

fn diffop_error(e: DiffOpError) -> String {
    match e {
        DiffOpError::DensityParity => "the density must be even".into(),
        other => other.to_string(),
    }
}

fn skew_precondition(label: &str, v: Verdict, ctx: &Context) -> VerdictReport {
    verdict_report(format!("skew {label}"), &v, ctx)
}

fn execute(cmd: &Cmd) -> CmdResult {
    let mut out = Outcome {
        verdicts: Vec::new(),
        output: Vec::new(),
    };
    match cmd {
        Cmd::CheckSkew { src, operator } => {
            let ws = load(src)?;
            let (o, names) = single(&ws, operator)?;
            let ctx = Context { names, basis: None };
            out.verdicts.push(verdict_report(
                format!("skew {}", o.label),
                &check_skew(&o.op),
                &ctx,
            ));
        }
        Cmd::CheckHamiltonian { src, operator } => {
            let ws = load(src)?;
            let (o, names) = single(&ws, operator)?;
            let ctx = Context { names, basis: None };
            out.verdicts.push(verdict_report(
                format!("hamiltonian {}", o.label),
                &check_hamiltonian(&o.op),
                &ctx,
            ));
        }
        Cmd::CheckPair { src, operators } => {
            if operators.len() != 2 {
                return Err("check-pair needs exactly two --operator values".into());
            }
            let ws = load(src)?;
            let mut u = Unifier::default();
            let ops = operands(&ws, operators, &mut u)?;
            let ctx = Context {
                names: u.names(),
                basis: None,
            };
            let name = format!("pair ({}, {})", ops[0].label, ops[1].label);
            out.verdicts.push(verdict_report(
                name,
                &check_pair(&ops[0].op, &ops[1].op),
                &ctx,
            ));
        }
        Cmd::Schouten { src, operators } => {
            if operators.is_empty() || operators.len() > 2 {
                return Err("schouten needs one or two --operator values".into());
            }
            let ws = load(src)?;
            let mut u = Unifier::default();
            let ops = operands(&ws, operators, &mut u)?;
            let (a, b) = (&ops[0], ops.last().expect("nonempty"));
            let ctx = Context {
                names: u.names(),
                basis: None,
            };
            let name = format!("schouten [{}, {}]", a.label, b.label);
            match schouten_bracket(&a.op, &b.op) {
                Ok(cert) => {
                    let mut v = Verdict::pass();
                    for (family, r) in cert.residuals {
                        let slot = if ops.len() == 1 {
                            crate::verdict::PairSlot::First
                        } else {
                            crate::verdict::PairSlot::Mixed
                        };
                        v.push(Constraint::Schouten { slot, family }, Residual::Poly(r));
                    }
                    if !v.passed() {
                        v.test_families = cert.test_families;
                    }
                    out.verdicts.push(verdict_report(name, &v, &ctx));
                }
                Err(DiffOpError::NotSkew(v)) => {
                    out.verdicts.push(skew_precondition(
                        &format!("({}, {})", a.label, b.label),
                        *v,
                        &ctx,
                    ));
                }
                Err(e) => return Err(diffop_error(e)),
            }
        }
        Cmd::CheckLie { src, lie } => {
            let ws = load(src)?;
            let l = ws
                .lie
                .get(lie)
                .ok_or_else(|| format!("unknown lie `{lie}`"))?;
            let ctx = Context {
                names: Names::new(),
                basis: Some(l.basis()),
            };
            out.verdicts.push(verdict_report(
                format!("lie {lie}"),
                &check_lie_super(l),
                &ctx,
            ));
        }
        Cmd::CheckCocycle { src, lie, form } => {
            let ws = load(src)?;
            let l = ws
                .lie
                .get(lie)
                .ok_or_else(|| format!("unknown lie `{lie}`"))?;
            let decl = ws
                .forms
                .get(form)
                .ok_or_else(|| format!("unknown form `{form}`"))?;
            let b = l.basis();
            let f = decl.resolve(|n| b.position(n).map(|k| b.family(k)))?;
            let ctx = Context {
                names: Names::new(),
                basis: Some(b),
            };
            let name = format!("cocycle ({lie}, {form})");
            match check_cocycle(l, &f) {
                Ok(v) => out.verdicts.push(verdict_report(name, &v, &ctx)),
                Err(ConformalError::NotLie(v)) => {
                    out.verdicts
                        .push(verdict_report(format!("lie {lie}"), &v, &ctx))
                }
                Err(e) => return Err(e.to_string()),
            }
        }
        Cmd::CheckConformal { src, structure } => {
            let ws = load(src)?;
            let s = ws
                .conformal
                .get(structure)
                .ok_or_else(|| format!("unknown conformal `{structure}`"))?;
            let ctx = Context {
                names: basis_names(s.basis()).into_iter().collect(),
                basis: Some(s.basis()),
            };
            out.verdicts.push(verdict_report(
                format!("conformal {structure}"),
                &check_conformal(s),
                &ctx,
            ));
        }
        Cmd::ToOperator { src, structure } => {
            let ws = load(src)?;
            let s = ws
                .conformal
                .get(structure)
                .ok_or_else(|| format!("unknown conformal `{structure}`"))?;
            let names: Names = basis_names(s.basis()).into_iter().collect();
            let mut text = String::new();
            for e in s.basis().elements() {
                text.push_str(&format!("family {} parity {};\n", e.name, e.parity.name()));
            }
            text.push('\n');
            write_operator(&mut text, structure, &to_hamiltonian(s), &names);
            out.output.extend(text.lines().map(str::to_string));
        }
        Cmd::FromOperator { src, operator } => {
            let ws = load(src)?;
            let (o, names) = single(&ws, operator)?;
            let fams: Vec<Family> = o.op.all_families().into_iter().collect();
            let basis = Basis::new(
                fams.iter()
                    .map(|f| BasisElement {
                        name: names.get(*f),
                        parity: f.parity,
                    })
                    .collect(),
            )
            .map_err(|e| e.to_string())?;
            let h =
                o.op.map_families(|f| basis.family(basis.position(&names.get(f)).expect("listed")));
            let s = from_linear_operator(&h, &basis).map_err(|e| match e {
                ConformalError::NonAffine { row, col, order } => format!(
                    "entry ({}, {}) has a coefficient of D^{order} that is not affine in the generators",
                    names.get(row),
                    names.get(col)
                ),
                other => other.to_string(),
            })?;
            let label = operator.rsplit(':').next().unwrap_or(operator);
            let mut text = String::new();
            write_conformal(&mut text, label, &s);
            out.output.extend(text.lines().map(str::to_string));
        }
        Cmd::Evolve {
            src,
            operator,
            density: dens,
        } => {
            let ws = load(src)?;
            let l = density(&ws, dens)?;
            let mut u = Unifier::default();
            let o = operands(&ws, std::slice::from_ref(operator), &mut u)?.remove(0);
            let renaming = u.absorb(&ws_names(&ws), l.families())?;
            let l = l.map_families(|f| renaming[&f]);
            let names = u.names();
            let system = evolution_equation(&o.op, &l).map_err(diffop_error)?;
            for (f, p) in system {
                out.output
                    .push(format!("{}_t = {}", names.get(f), render_poly(&p, &names)));
            }
        }
        Cmd::Vardelta { src, density: dens } => {
            let ws = load(src)?;
            let l = density(&ws, dens)?;
            let names = ws.names();
            for (n, f) in &ws.families {
                let d = variational_derivative(*f, &l);
                out.output.push(format!(
                    "delta {dens}/delta {n} = {}",
                    render_poly(&d, &names)
                ));
            }
            out.output.push(match decide_trivial(&l) {
                TildeVerdict::Trivial {
                    antiderivative,
                    constant,
                } => format!(
                    "trivial: {dens} = D({}) + {}",
                    render_poly(&antiderivative, &names),
                    format_scalar(&constant)
                ),
                TildeVerdict::Nontrivial { family, witness } => format!(
                    "nontrivial: delta {dens}/delta {} = {}",
                    names.get(family),
                    render_poly(&witness, &names)
                ),
            });
        }
        Cmd::Fmt { src } => {
            let ws = load(src)?;
            out.output
                .extend(ws.serialize().lines().map(str::to_string));
        }
    }
    Ok(out)
}

/// Runs one command line (`argv[0]` is the program name).
pub fn run_command<S: AsRef<str>>(argv: &[S]) -> Report {
    let args: Vec<&str> = argv.iter().map(AsRef::as_ref).collect();
    let command = args.iter().skip(1).copied().collect::<Vec<_>>().join(" ");
    let wants_json = args
        .windows(2)
        .any(|w| w[0] == "--format" && w[1] == "json")
        || args.contains(&"--format=json");
    let mut report = Report {
        command,
        verdicts: Vec::new(),
        output: Vec::new(),
        error: None,
        exit_code: 2,
        format: if wants_json {
            Format::Json
        } else {
            Format::Text
        },
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                report.output = e.to_string().lines().map(str::to_string).collect();
                report.exit_code = 0;
            } else {
                let text = e.to_string();
                let text = text.strip_prefix("error: ").unwrap_or(&text);
                report.error = Some(text.trim_end().to_string());
            }
            return report;
        }
    };
    report.format = cli.format;
    match execute(&cli.cmd) {
        Ok(o) => {
            report.exit_code = if o.verdicts.iter().all(|v| v.pass) {
                0
            } else {
                1
            };
            report.verdicts = o.verdicts;
            report.output = o.output;
        }
        Err(e) => report.error = Some(e),
    }
    report
}
