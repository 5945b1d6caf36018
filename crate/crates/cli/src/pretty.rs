//! Plain-text renderings for `--pretty`.

use std::fmt::Write;

use toda_forge::affine_roots::Beta0Check;
use toda_forge::diagram::DiagramView;
use toda_forge::higgs::HiggsDescription;
use toda_forge::involutions::{RealFormReport, Table1Row};
use toda_forge::solver::PrincipalReport;
use toda_forge::stability::StabilityReport;
use toda_forge::toda::{FoldedSystem, TodaPair};
use toda_forge::DiagramId;

fn signs(ell: &[i8]) -> String {
    ell.iter().map(|x| if *x < 0 { "-" } else { "+" }).collect()
}

fn list<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn matrix<T: std::fmt::Display>(m: &[Vec<T>]) -> String {
    let cells: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    let w = cells.iter().flatten().map(|s| s.len()).max().unwrap_or(1);
    let mut s = String::new();
    for row in cells {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>w$}")).collect();
        let _ = writeln!(s, "  {}", line.join(" "));
    }
    s
}

pub fn diagrams(rows: &[(DiagramId, usize, u8, i64, Vec<i64>)]) -> String {
    let mut s = format!("{:<8} {:>3} {:>5} {:>8}  marks\n", "id", "r", "twist", "coxeter");
    for (id, r, tw, h, m) in rows {
        let _ = writeln!(s, "{:<8} {:>3} {:>5} {:>8}  {}", id.to_string(), r, tw, h, list(m));
    }
    s
}

pub fn diagram(v: &DiagramView, roots: Option<Vec<(Vec<i64>, u8, usize)>>) -> String {
    let mut s = format!("{}  r = {}  twist = {}  coxeter number = {}\n", v.id, v.r, v.twist, v.coxeter_number);
    s += "cartan:\n";
    s += &matrix(&v.cartan);
    let _ = writeln!(s, "marks: {}", list(&v.marks));
    let lengths: Vec<String> = v
        .lengths_num
        .iter()
        .zip(&v.lengths_den)
        .map(|(n, d)| if *d == 1 { n.to_string() } else { format!("{n}/{d}") })
        .collect();
    let _ = writeln!(s, "lengths: {}", lengths.join(","));
    let _ = writeln!(s, "symmetries: {}", v.symmetries.len());
    if let Some(roots) = roots {
        let _ = writeln!(s, "restricted roots: {}", roots.len());
        for (f, g, m) in roots {
            let _ = writeln!(s, "  ({}; {})  x{}", list(&f), g, m);
        }
    }
    s
}

pub fn labellings(rows: &[(Vec<i8>, bool, String)]) -> String {
    let mut s = format!("{:<12} {:<6} h\n", "ell", "kind");
    for (ell, inner, h) in rows {
        let _ = writeln!(s, "{:<12} {:<6} {}", signs(ell), if *inner { "inner" } else { "outer" }, h);
    }
    s
}

pub fn realform(r: &RealFormReport) -> String {
    let mut s = format!("{} ell = {}\n", r.diagram, signs(&r.ell));
    let _ = writeln!(s, "{} involution", if r.inner { "inner" } else { "outer" });
    let _ = writeln!(s, "h = {}  (dim {}), m dim {}", r.h_type_string(), r.h_dimension, r.m_dimension);
    if let Some(h) = &r.witness_h {
        let _ = writeln!(s, "witness h = {}", h.join(","));
    }
    s
}

pub fn table1(rows: &[Table1Row]) -> String {
    let mut s = format!("{:<8} {:<18} {:<18} ok\n", "id", "expected", "computed");
    for r in rows {
        let _ = writeln!(
            s,
            "{:<8} {:<18} {:<18} {}",
            r.id.to_string(),
            r.expected.clone().unwrap_or_else(|| "-".into()),
            r.computed.clone().unwrap_or_else(|| "-".into()),
            if r.matches { "OK" } else { "MISMATCH" }
        );
    }
    s
}

pub fn table2(rows: &[Beta0Check]) -> String {
    let mut s = format!("{:<8} {:<24} ok\n", "id", "beta0");
    for r in rows {
        let _ = writeln!(s, "{:<8} {:<24} {}", r.id.to_string(), list(&r.fixture), if r.matches { "OK" } else { "MISMATCH" });
    }
    s
}

pub fn degrees(id: DiagramId, genus: u32, pts: &[Vec<i64>]) -> String {
    let mut s = format!("{id} genus {genus}: {} degree vectors\n", pts.len());
    for p in pts {
        let _ = writeln!(s, "  {}", list(p));
    }
    s
}

pub fn stability(r: &StabilityReport) -> String {
    let mut s = format!("verdict: {:?} (route {:?})\n", r.verdict, r.route);
    let _ = writeln!(s, "support: {}", list(&r.support));
    if let Some(w) = &r.witness_character {
        let _ = writeln!(s, "witness: {}", w.join(","));
    }
    if let Some(m) = &r.r_matrix {
        s += "R:\n";
        s += &matrix(m);
    }
    s
}

pub fn solve(w: &Option<Vec<f64>>, converged: bool, its: usize, res: f64) -> String {
    let mut s = format!("converged: {converged}  iterations: {its}  residual: {res:.3e}\n");
    if let Some(w) = w {
        for (j, x) in w.iter().enumerate() {
            let _ = writeln!(s, "  w{j} = {x:.15}");
        }
    }
    s
}

pub fn solve_grid(range: (&Vec<f64>, &Vec<f64>), converged: bool, its: usize, res: f64) -> String {
    let mut s = format!("converged: {converged}  iterations: {its}  residual: {res:.3e}\n");
    for (j, (lo, hi)) in range.0.iter().zip(range.1).enumerate() {
        let _ = writeln!(s, "  w{j} in [{lo:.12}, {hi:.12}]");
    }
    s
}

pub fn higgs(h: &HiggsDescription) -> String {
    let mut s = format!("{} ell = {}  rank {}\n", h.diagram, signs(&h.ell), h.rank());
    s += "summands (weight; grade) degree:\n";
    for (i, x) in h.summands.iter().enumerate() {
        let mult = if x.multiplicity > 1 { format!(" x{}", x.multiplicity) } else { String::new() };
        let _ = writeln!(s, "  [{i}] ({}; {}) {}{}", list(&x.finite_part), x.grade, x.degree, mult);
    }
    let _ = writeln!(s, "Phi components: {}", list(&h.phi_components));
    for a in &h.dbar_arrows {
        let _ = writeln!(s, "  arrow [{}] -> [{}] via phi_{}", a.from, a.to, a.k);
    }
    let _ = writeln!(s, "hodge: {}", h.hodge);
    s
}

pub fn baraglia(p: &PrincipalReport, eqs: &[String], pair: &TodaPair) -> String {
    let mut s = format!("{} genus {}: c = {}\n", p.diagram, p.genus, p.c.join(","));
    if let Some(a) = &p.alternate_order {
        let _ = writeln!(s, "as {}: c = {}", a.target, a.c.join(","));
    }
    let _ = writeln!(s, "phi_0 in H0(K^{})", p.phi0_exponent);
    let _ = writeln!(s, "degrees: {}", list(&pair.degrees));
    let _ = writeln!(s, "coefficients: {}", list(&pair.coeffs));
    for e in eqs {
        let _ = writeln!(s, "  {e}");
    }
    s
}

pub fn fold(f: &FoldedSystem) -> String {
    let orbits: Vec<String> = f.orbits.iter().map(|o| format!("{{{}}}", list(o))).collect();
    let mut s = format!("orbits: {}\n", orbits.join(" "));
    s += "matrix:\n";
    s += &matrix(&f.matrix);
    s += "non-affine block:\n";
    s += &matrix(&f.nonaffine_matrix());
    s
}
