mod export;
mod pretty;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::{json, Value};

use toda_forge::affine_roots::{build_restricted_roots, verify_beta0, Beta0Check};
use toda_forge::diagram::DiagramView;
use toda_forge::higgs::{baraglia_pair, build_higgs, HiggsDescription};
use toda_forge::involutions::{
    enumerate_labellings, fixed_subalgebra_type, parse_signs, totally_noncompact_table, Labelling, RealFormReport,
};
use toda_forge::solver::{
    newton_constant, pde_solve_torus, principal_case, torus_closed_form, Field, SolveResult, SolverOptions, TorusGrid,
};
use toda_forge::stability::stability_check;
use toda_forge::toda::{assemble_system, degree_polytope, fold_by_symmetry, non_cyclic_reduce, TodaPair};
use toda_forge::{build_diagram, AffineDiagram, DiagramId};

/// Affine Dynkin diagrams, real forms and geometric Toda systems.
#[derive(Parser, Debug)]
#[command(name = "toda-forge", version)]
struct Cli {
    /// Render human-readable tables instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Legal affine diagrams.
    Diagrams {
        #[command(subcommand)]
        action: DiagramsAction,
    },
    /// Cartan matrix, marks, lengths and symmetries of one diagram.
    Diagram {
        #[command(subcommand)]
        action: DiagramAction,
    },
    /// All labellings of a diagram.
    Labellings {
        id: DiagramId,
        #[arg(long)]
        up_to_symmetry: bool,
    },
    /// Real form attached to a labelling.
    Realform {
        id: DiagramId,
        #[arg(long, allow_hyphen_values = true)]
        ell: Signs,
    },
    /// Totally noncompact labellings against the tabulated fixed subalgebras.
    Table1 {
        #[arg(long, default_value_t = 8)]
        max_rank: usize,
    },
    /// Roots restricting to a_0 for the twisted diagrams.
    Table2 {
        #[arg(long, default_value_t = 8)]
        max_rank: usize,
    },
    /// Admissible degree vectors (d_1..d_r) for a genus.
    Degrees {
        id: DiagramId,
        #[arg(long)]
        genus: u32,
    },
    /// Stability of a Toda pair with compact-free support.
    Stability(PairArgs),
    /// Solve the geometric Toda equations.
    Solve {
        #[command(subcommand)]
        method: SolveMethod,
    },
    /// Symbolic Higgs bundle and Hodge test of a Toda pair.
    Higgs(PairArgs),
    /// Cyclic pair from the principal c-vector and a section phi_0.
    Baraglia {
        id: DiagramId,
        #[arg(long)]
        genus: u32,
        /// Pointwise norm of phi_0 (constant).
        #[arg(long, default_value_t = 0.0)]
        phi0: f64,
    },
    /// Fold a pair along a diagram symmetry.
    Fold {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        perm: Indices,
    },
}

#[derive(Subcommand, Debug)]
enum DiagramsAction {
    List {
        #[arg(long, default_value_t = 8)]
        max_rank: usize,
    },
}

#[derive(Subcommand, Debug)]
enum DiagramAction {
    Show {
        id: DiagramId,
        /// Include the restricted root system.
        #[arg(long)]
        roots: bool,
    },
}

#[derive(Args, Debug, Clone)]
struct PairArgs {
    id: DiagramId,
    /// Signs ell_0..ell_r; defaults to the totally noncompact labelling.
    #[arg(long, allow_hyphen_values = true)]
    ell: Option<Signs>,
    #[arg(long, default_value_t = 2)]
    genus: u32,
    /// Degrees d_1..d_r (d_0 follows from the marks); defaults to zero.
    #[arg(long, allow_hyphen_values = true)]
    degrees: Option<Ints>,
    /// Coefficients a_0..a_r; defaults to all ones.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "phi_norms")]
    coeffs: Option<Floats>,
    /// Squared norms of phi_0..phi_r, converted with the root lengths.
    #[arg(long, allow_hyphen_values = true)]
    phi_norms: Option<Floats>,
}

#[derive(Subcommand, Debug)]
enum SolveMethod {
    /// Exact constant solution on a torus (totally noncompact, cyclic).
    Closed {
        id: DiagramId,
        #[arg(long, allow_hyphen_values = true)]
        coeffs: Floats,
    },
    /// Damped Newton for constant fields.
    Newton {
        #[command(flatten)]
        pair: PairArgs,
        /// Initial w_0..w_r (projected onto the constraint).
        #[arg(long, allow_hyphen_values = true)]
        init: Option<Floats>,
    },
    /// Newton on an n x n periodic grid of a flat square torus.
    Pde {
        id: DiagramId,
        #[arg(long, allow_hyphen_values = true)]
        coeffs: Floats,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        side: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Amplitude of the random initial fields.
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        /// Directory for CSV and PNG output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

macro_rules! list_type {
    ($name:ident, $t:ty, $parse:expr) => {
        #[derive(Debug, Clone)]
        struct $name(Vec<$t>);

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                s.split(',')
                    .map(|tok| $parse(tok.trim()).map_err(|_| format!("invalid list entry `{}`", tok.trim())))
                    .collect::<Result<Vec<$t>, String>>()
                    .map($name)
            }
        }
    };
}

list_type!(Ints, i64, i64::from_str);
list_type!(Floats, f64, f64::from_str);
list_type!(Indices, usize, usize::from_str);

#[derive(Debug, Clone)]
struct Signs(Vec<i8>);

impl FromStr for Signs {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_signs(s).map(Signs).map_err(|e| e.to_string())
    }
}

fn solver_options() -> Result<SolverOptions, String> {
    let mut opts = SolverOptions::default();
    if let Ok(v) = std::env::var("TODA_FORGE_PRECISION") {
        let tol: f64 = v.trim().parse().map_err(|_| format!("TODA_FORGE_PRECISION: invalid value `{v}`"))?;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(format!("TODA_FORGE_PRECISION: must be a positive number, got `{v}`"));
        }
        opts.tol = tol;
        opts.grid_tol = tol;
    }
    Ok(opts)
}

/// What a command produced: JSON value, its pretty form, and whether it
/// signals a mismatch (exit 1).
struct Output {
    json: Value,
    pretty: String,
    ok: bool,
}

impl Output {
    fn new<T: Serialize>(v: &T, pretty: String) -> anyhow::Result<Self> {
        Ok(Output { json: serde_json::to_value(v)?, pretty, ok: true })
    }
}

fn build_pair(d: &AffineDiagram, a: &PairArgs) -> anyhow::Result<TodaPair> {
    let r = d.r();
    let ell = a.ell.clone().map(|s| s.0).unwrap_or_else(|| vec![-1; r + 1]);
    let lab = Labelling::new(d, ell)?;
    let degrees = a.degrees.clone().map(|v| v.0).unwrap_or_else(|| vec![0; r]);
    let pair = match (&a.coeffs, &a.phi_norms) {
        (_, Some(p)) => TodaPair::from_phi_norms(d, lab, a.genus, &degrees, p.0.clone())?,
        (Some(c), None) => TodaPair::new(d, lab, a.genus, &degrees, c.0.clone())?,
        (None, None) => TodaPair::new(d, lab, a.genus, &degrees, vec![1.0; r + 1])?,
    };
    Ok(pair)
}

#[derive(Serialize)]
struct DiagramSummary {
    id: DiagramId,
    r: usize,
    twist: u8,
    coxeter_number: i64,
    marks: Vec<i64>,
}

#[derive(Serialize)]
struct LabellingRow {
    ell: Vec<i8>,
    inner: bool,
    h_type: String,
    totally_noncompact: bool,
    class_representative: Vec<i8>,
}

#[derive(Serialize)]
struct RootRow {
    finite_part: Vec<i64>,
    grade: u8,
    multiplicity: usize,
    expansion: Vec<i64>,
}

#[derive(Serialize)]
struct DiagramShow {
    diagram: DiagramView,
    #[serde(skip_serializing_if = "Option::is_none")]
    roots: Option<Vec<RootRow>>,
}

#[derive(Serialize)]
struct TableReport<T: Serialize> {
    rows: Vec<T>,
    all_match: bool,
}

#[derive(Serialize)]
struct DegreesReport {
    diagram: DiagramId,
    genus: u32,
    count: usize,
    points: Vec<Vec<i64>>,
}

#[derive(Serialize)]
struct GridSummary {
    n: usize,
    side: f64,
    min: Vec<f64>,
    max: Vec<f64>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct SolveReport {
    method: &'static str,
    diagram: DiagramId,
    converged: bool,
    iterations: usize,
    residual_norm: f64,
    residual_history: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    options: SolverOptions,
}

fn solve_report(method: &'static str, id: DiagramId, s: SolveResult, opts: SolverOptions, grid: Option<GridSummary>) -> SolveReport {
    SolveReport {
        method,
        diagram: id,
        converged: s.converged,
        iterations: s.iterations,
        residual_norm: s.residual_norm,
        residual_history: s.residual_history.clone(),
        w: s.constant().map(|w| w.to_vec()),
        grid,
        message: s.message,
        options: opts,
    }
}

fn run(cli: &Cli) -> anyhow::Result<Output> {
    match &cli.command {
        Command::Diagrams { action: DiagramsAction::List { max_rank } } => {
            let rows: Vec<DiagramSummary> = DiagramId::all(*max_rank)
                .into_iter()
                .map(|id| {
                    let d = build_diagram(id)?;
                    Ok(DiagramSummary { id, r: d.r(), twist: d.twist, coxeter_number: d.coxeter_number(), marks: d.marks })
                })
                .collect::<anyhow::Result<_>>()?;
            let p = pretty::diagrams(&rows.iter().map(|r| (r.id, r.r, r.twist, r.coxeter_number, r.marks.clone())).collect::<Vec<_>>());
            Output::new(&rows, p)
        }
        Command::Diagram { action: DiagramAction::Show { id, roots } } => {
            let d = build_diagram(*id)?;
            let roots = if *roots {
                let sys = build_restricted_roots(*id)?;
                Some(
                    sys.all_roots()
                        .map(|x| RootRow {
                            finite_part: x.finite_part.clone(),
                            grade: x.grade,
                            multiplicity: x.multiplicity,
                            expansion: x.expansion.clone(),
                        })
                        .collect(),
                )
            } else {
                None
            };
            let view = DiagramView::from(&d);
            let p = pretty::diagram(&view, roots.as_ref().map(|v: &Vec<RootRow>| {
                v.iter().map(|x| (x.finite_part.clone(), x.grade, x.multiplicity)).collect::<Vec<_>>()
            }));
            Output::new(&DiagramShow { diagram: view, roots }, p)
        }
        Command::Labellings { id, up_to_symmetry } => {
            let d = build_diagram(*id)?;
            let sys = build_restricted_roots(*id)?;
            let rows: Vec<LabellingRow> = enumerate_labellings(&d, *up_to_symmetry)
                .into_iter()
                .map(|lab| {
                    let rep = fixed_subalgebra_type(&sys, &lab)?;
                    Ok(LabellingRow {
                        h_type: rep.h_type_string(),
                        ell: lab.ell,
                        inner: rep.inner,
                        totally_noncompact: rep.totally_noncompact,
                        class_representative: rep.class_representative,
                    })
                })
                .collect::<anyhow::Result<_>>()?;
            let p = pretty::labellings(&rows.iter().map(|r| (r.ell.clone(), r.inner, r.h_type.clone())).collect::<Vec<_>>());
            Output::new(&rows, p)
        }
        Command::Realform { id, ell } => {
            let sys = build_restricted_roots(*id)?;
            let lab = Labelling::new(&sys.diagram, ell.0.clone())?;
            let rep: RealFormReport = fixed_subalgebra_type(&sys, &lab)?;
            let p = pretty::realform(&rep);
            let mut v = serde_json::to_value(&rep)?;
            v["h_type"] = json!(rep.h_type_string());
            Ok(Output { json: v, pretty: p, ok: true })
        }
        Command::Table1 { max_rank } => {
            let rows = totally_noncompact_table(*max_rank)?;
            let all_match = rows.iter().all(|r| r.matches);
            let p = pretty::table1(&rows);
            let mut out = Output::new(&TableReport { all_match, rows }, p)?;
            out.ok = all_match;
            Ok(out)
        }
        Command::Table2 { max_rank } => {
            let rows: Vec<Beta0Check> = DiagramId::all(*max_rank)
                .into_iter()
                .filter(|i| i.twist > 1)
                .map(verify_beta0)
                .collect::<Result<_, _>>()?;
            let all_match = rows.iter().all(|r| r.matches);
            let p = pretty::table2(&rows);
            let mut out = Output::new(&TableReport { all_match, rows }, p)?;
            out.ok = all_match;
            Ok(out)
        }
        Command::Degrees { id, genus } => {
            let d = build_diagram(*id)?;
            let points = degree_polytope(&d, *genus);
            let p = pretty::degrees(*id, *genus, &points);
            Output::new(&DegreesReport { diagram: *id, genus: *genus, count: points.len(), points }, p)
        }
        Command::Stability(a) => {
            let d = build_diagram(a.id)?;
            let pair = build_pair(&d, a)?;
            let rep = stability_check(&d, &pair)?;
            let mut v = json!({ "diagram": a.id, "pair": pair, "report": rep });
            if !pair.is_cyclic() && !pair.support().is_empty() {
                if let Ok(red) = non_cyclic_reduce(&d, &pair) {
                    v["reduction"] = serde_json::to_value(red)?;
                }
            }
            let p = pretty::stability(&rep);
            Ok(Output { json: v, pretty: p, ok: true })
        }
        Command::Solve { method } => solve(method),
        Command::Higgs(a) => {
            let d = build_diagram(a.id)?;
            let pair = build_pair(&d, a)?;
            let h: HiggsDescription = build_higgs(&d, &pair)?;
            let p = pretty::higgs(&h);
            Output::new(&h, p)
        }
        Command::Baraglia { id, genus, phi0 } => {
            let d = build_diagram(*id)?;
            let pair = baraglia_pair(&d, *genus, *phi0)?;
            let principal = principal_case(&d, *genus)?;
            let sys = assemble_system(&d, &pair)?;
            let equations: Vec<String> = sys.equations(0)?.iter().map(|e| e.render()).collect();
            let stab = stability_check(&d, &pair)?;
            let p = pretty::baraglia(&principal, &equations, &pair);
            let v = json!({
                "diagram": id,
                "pair": pair,
                "principal": principal,
                "equations": equations,
                "stability": stab,
            });
            Ok(Output { json: v, pretty: p, ok: true })
        }
        Command::Fold { pair, perm } => {
            let d = build_diagram(pair.id)?;
            let p = build_pair(&d, pair)?;
            let f = fold_by_symmetry(&d, &p, &perm.0)?;
            let pr = pretty::fold(&f);
            let mut v = serde_json::to_value(&f)?;
            v["nonaffine_matrix"] = json!(f.nonaffine_matrix());
            v["diagram"] = json!(pair.id);
            Ok(Output { json: v, pretty: pr, ok: true })
        }
    }
}

fn tn_pair(d: &AffineDiagram, coeffs: &[f64], genus: u32) -> anyhow::Result<TodaPair> {
    let lab = Labelling::new(d, vec![-1; d.r() + 1])?;
    Ok(TodaPair::new(d, lab, genus, &vec![0; d.r()], coeffs.to_vec())?)
}

fn solve(method: &SolveMethod) -> anyhow::Result<Output> {
    let opts = solver_options().map_err(UsageError)?;
    match method {
        SolveMethod::Closed { id, coeffs } => {
            let d = build_diagram(*id)?;
            let sys = assemble_system(&d, &tn_pair(&d, &coeffs.0, 1)?)?;
            let s = torus_closed_form(&d, &sys)?;
            let rep = solve_report("closed", *id, s, opts, None);
            let p = pretty::solve(&rep.w, rep.converged, rep.iterations, rep.residual_norm);
            Output::new(&rep, p)
        }
        SolveMethod::Newton { pair, init } => {
            let d = build_diagram(pair.id)?;
            let p = build_pair(&d, pair)?;
            let sys = assemble_system(&d, &p)?;
            let init = init.clone().map(|v| v.0).unwrap_or_else(|| vec![0.0; d.r() + 1]);
            let s = newton_constant(&sys, &init, &opts)?;
            let rep = solve_report("newton", pair.id, s, opts, None);
            let pr = pretty::solve(&rep.w, rep.converged, rep.iterations, rep.residual_norm);
            let mut out = Output::new(&rep, pr)?;
            out.ok = rep.converged;
            Ok(out)
        }
        SolveMethod::Pde { id, coeffs, n, side, seed, amplitude, out } => {
            let d = build_diagram(*id)?;
            let sys = assemble_system(&d, &tn_pair(&d, &coeffs.0, 1)?)?;
            let grid = TorusGrid { n: *n, side: *side };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let init: Vec<Vec<f64>> = (0..d.r())
                .map(|_| (0..n * n).map(|_| amplitude * rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let s = pde_solve_torus(&sys, &grid, &init, &opts)?;
            let Field::Grid { values, .. } = &s.field else { bail!("grid solver returned a constant field") };
            let files = match out {
                Some(dir) => export::write_fields(dir, *n, values).context("writing grid output")?,
                None => Vec::new(),
            };
            let summary = GridSummary {
                n: *n,
                side: *side,
                min: values.iter().map(|f| f.iter().copied().fold(f64::INFINITY, f64::min)).collect(),
                max: values.iter().map(|f| f.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect(),
                files,
            };
            let rep = solve_report("pde", *id, s, opts, Some(summary));
            let pr = pretty::solve_grid(rep.grid.as_ref().map(|g| (&g.min, &g.max)).unwrap(), rep.converged, rep.iterations, rep.residual_norm);
            let mut o = Output::new(&rep, pr)?;
            o.ok = rep.converged;
            Ok(o)
        }
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = if cli.pretty {
                out.pretty
            } else {
                serde_json::to_string_pretty(&out.json).expect("serializable output") + "\n"
            };
            // a closed pipe (e.g. `| head`) is not an error worth reporting
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
