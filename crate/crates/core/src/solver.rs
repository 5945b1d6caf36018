//! Solvers for the constant (torus or verification) regime and for doubly
//! periodic fields on a flat square torus.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::diagram::{AffineDiagram, DiagramId};
use crate::error::{Result, TodaError};
use crate::involutions::Labelling;
use crate::linalg::{int_matrix_to_q, q, solve, to_f64, Q};
use crate::toda::TodaSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub grid_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-12, grid_tol: 1e-10, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Field {
    Constant { w: Vec<f64> },
    /// `values[j]` is w_j on an n×n grid, row-major (index iy*n + ix).
    Grid { n: usize, side: f64, values: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub field: Field,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual_history: Vec<f64>,
    pub message: Option<String>,
}

impl SolveResult {
    pub fn constant(&self) -> Option<&[f64]> {
        match &self.field {
            Field::Constant { w } => Some(w),
            Field::Grid { .. } => None,
        }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Exact constant solution of a cyclic totally noncompact pair on a torus:
/// a_k e^{w_k} proportional to the right null vector.
pub fn torus_closed_form(d: &AffineDiagram, sys: &TodaSystem) -> Result<SolveResult> {
    if sys.signs.iter().any(|&s| s != -1) {
        return Err(TodaError::Precondition("closed form needs the totally noncompact labelling".into()));
    }
    if sys.coeffs.iter().any(|&a| a <= 0.0) {
        return Err(TodaError::Precondition("closed form needs all a_k > 0".into()));
    }
    if sys.sources.iter().any(|&x| x != 0.0) {
        return Err(TodaError::Precondition("closed form needs genus 1 (all degrees zero)".into()));
    }
    let v: Vec<f64> = d.right_null_vector().iter().map(to_f64).collect();
    let logs: Vec<f64> = v.iter().zip(&sys.coeffs).map(|(v, a)| (v / a).ln()).collect();
    let msum: f64 = d.marks.iter().sum::<i64>() as f64;
    let log_lambda = -logs.iter().zip(&d.marks).map(|(l, &m)| l * m as f64).sum::<f64>() / msum;
    let w: Vec<f64> = logs.iter().map(|l| log_lambda + l).collect();
    let res = sys.reduced_residual(&w[1..]);
    let rn = max_abs(&res);
    Ok(SolveResult {
        field: Field::Constant { w },
        residual_norm: rn,
        iterations: 0,
        converged: true,
        residual_history: vec![rn],
        message: None,
    })
}

/// Orthogonal projection onto Σ m_j w_j = 0, with w_0 then recomputed.
pub fn project_constraint(marks: &[i64], w: &[f64]) -> Vec<f64> {
    let mm: f64 = marks.iter().map(|m| (m * m) as f64).sum();
    let s: f64 = marks.iter().zip(w).map(|(m, x)| *m as f64 * x).sum();
    let mut out: Vec<f64> = w.iter().zip(marks).map(|(x, m)| x - s / mm * *m as f64).collect();
    out[0] = -(1..w.len()).map(|j| marks[j] as f64 * out[j]).sum::<f64>() / marks[0] as f64;
    out
}

fn dense_solve(jac: &[Vec<f64>], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let a = Mat::<f64>::from_fn(n, n, |i, j| jac[i][j]);
    let sv = a.singular_values().map_err(|_| TodaError::SingularJacobian { condition: f64::INFINITY })?;
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !cond.is_finite() || cond > 1e14 {
        return Err(TodaError::SingularJacobian { condition: cond });
    }
    let b = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
    let x = a.partial_piv_lu().solve(&b);
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

/// Damped Newton for constant fields on the reduced variables w_1..w_r.
/// `init` holds w_0..w_r and is projected onto the constraint first.
pub fn newton_constant(sys: &TodaSystem, init: &[f64], opts: &SolverOptions) -> Result<SolveResult> {
    let r = sys.r();
    if init.len() != r + 1 {
        return Err(TodaError::Precondition(format!("expected {} initial values", r + 1)));
    }
    let start = project_constraint(&sys.marks, init);
    let mut w: Vec<f64> = start[1..].to_vec();
    let mut res = sys.reduced_residual(&w);
    let mut history = vec![max_abs(&res)];
    let mut message = None;
    let mut iterations = 0;
    while !(max_abs(&res) < opts.tol) && iterations < opts.max_iter {
        let jac = sys.reduced_jacobian(&w);
        let neg: Vec<f64> = res.iter().map(|x| -x).collect();
        let step = dense_solve(&jac, &neg)?;
        let base = norm2(&res);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = w.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            let tr = sys.reduced_residual(&trial);
            let n = norm2(&tr);
            if n.is_finite() && n < base {
                accepted = Some((trial, tr));
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((nw, nr)) => {
                w = nw;
                res = nr;
                history.push(max_abs(&res));
            }
            None => {
                message = Some("line search failed to reduce the residual".into());
                break;
            }
        }
    }
    let rn = max_abs(&res);
    let converged = rn < opts.tol;
    if !converged && message.is_none() {
        message = Some(format!("no convergence after {iterations} iterations"));
    }
    Ok(SolveResult {
        field: Field::Constant { w: sys.lift(&w) },
        residual_norm: rn,
        iterations,
        converged,
        residual_history: history,
        message,
    })
}

/// Uniform n×n periodic grid on a square torus of the given side length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub n: usize,
    pub side: f64,
}

impl TorusGrid {
    pub fn h(&self) -> f64 {
        self.side / self.n as f64
    }

    fn neighbors(&self, p: usize) -> [usize; 4] {
        let n = self.n;
        let (x, y) = (p % n, p / n);
        [
            y * n + (x + 1) % n,
            y * n + (x + n - 1) % n,
            ((y + 1) % n) * n + x,
            ((y + n - 1) % n) * n + x,
        ]
    }

    /// Non-negative five-point Laplacian.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let h2 = self.h() * self.h();
        (0..f.len())
            .map(|p| (4.0 * f[p] - self.neighbors(p).iter().map(|&q| f[q]).sum::<f64>()) / h2)
            .collect()
    }
}

/// Full fields w_0..w_r from the reduced fields w_1..w_r.
pub fn lift_fields(sys: &TodaSystem, reduced: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let np = reduced[0].len();
    let w0: Vec<f64> = (0..np)
        .map(|p| -(1..=sys.r()).map(|j| sys.marks[j] as f64 * reduced[j - 1][p]).sum::<f64>() / sys.marks[0] as f64)
        .collect();
    let mut out = vec![w0];
    out.extend(reduced.iter().cloned());
    out
}

/// Residual of equations 1..r at every grid point (flattened by equation).
pub fn grid_residual(sys: &TodaSystem, grid: &TorusGrid, reduced: &[Vec<f64>]) -> Vec<f64> {
    let full = lift_fields(sys, reduced);
    let k = sys.coefficient_matrix();
    let r = sys.r();
    let np = grid.n * grid.n;
    let mut out = Vec::with_capacity(r * np);
    for j in 1..=r {
        let lap = grid.laplacian(&full[j]);
        for p in 0..np {
            let s: f64 = (0..=r).map(|c| k[j][c] * full[c][p].exp()).sum();
            out.push(lap[p] + s + sys.sources[j]);
        }
    }
    out
}

/// Sparse Jacobian of `grid_residual` as merged (row, col, value) triplets.
pub fn grid_jacobian(sys: &TodaSystem, grid: &TorusGrid, reduced: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let full = lift_fields(sys, reduced);
    let k = sys.coefficient_matrix();
    let r = sys.r();
    let np = grid.n * grid.n;
    let h2 = grid.h() * grid.h();
    let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(r * np * (5 + r));
    for j in 1..=r {
        for p in 0..np {
            let row = (j - 1) * np + p;
            entries.push((row, row, 4.0 / h2));
            for q in grid.neighbors(p) {
                entries.push((row, (j - 1) * np + q, -1.0 / h2));
            }
            let e0 = full[0][p].exp();
            for i in 1..=r {
                let v = k[j][i] * full[i][p].exp() - k[j][0] * e0 * sys.marks[i] as f64 / sys.marks[0] as f64;
                if v != 0.0 {
                    entries.push((row, (i - 1) * np + p, v));
                }
            }
        }
    }
    entries.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
    for e in entries {
        match merged.last_mut() {
            Some(last) if last.0 == e.0 && last.1 == e.1 => last.2 += e.2,
            _ => merged.push(e),
        }
    }
    merged
}

fn sparse_solve(n: usize, entries: &[(usize, usize, f64)], rhs: &[f64]) -> Result<Vec<f64>> {
    let trip: Vec<Triplet<usize, usize, f64>> = entries.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| TodaError::Inconsistent(format!("sparse assembly: {e:?}")))?;
    let lu = a.sp_lu().map_err(|_| TodaError::SingularJacobian { condition: f64::INFINITY })?;
    let b = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
    let x = lu.solve(&b);
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(TodaError::SingularJacobian { condition: f64::INFINITY });
    }
    Ok(out)
}

/// Damped Newton for doubly periodic fields. `init` holds the reduced
/// fields w_1..w_r, each of length n².
pub fn pde_solve_torus(sys: &TodaSystem, grid: &TorusGrid, init: &[Vec<f64>], opts: &SolverOptions) -> Result<SolveResult> {
    let r = sys.r();
    let np = grid.n * grid.n;
    if grid.n < 3 {
        return Err(TodaError::Precondition("grid needs n >= 3".into()));
    }
    if init.len() != r || init.iter().any(|f| f.len() != np) {
        return Err(TodaError::Precondition(format!("expected {r} initial fields of length {np}")));
    }
    let mut w: Vec<Vec<f64>> = init.to_vec();
    let mut res = grid_residual(sys, grid, &w);
    let mut history = vec![max_abs(&res)];
    let mut iterations = 0;
    let mut message = None;
    while !(max_abs(&res) < opts.grid_tol) && iterations < opts.max_iter {
        let jac = grid_jacobian(sys, grid, &w);
        let neg: Vec<f64> = res.iter().map(|x| -x).collect();
        let step = sparse_solve(r * np, &jac, &neg)?;
        let base = norm2(&res);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<Vec<f64>> = (0..r)
                .map(|j| (0..np).map(|p| w[j][p] + t * step[j * np + p]).collect())
                .collect();
            let tr = grid_residual(sys, grid, &trial);
            let n = norm2(&tr);
            if n.is_finite() && n < base {
                accepted = Some((trial, tr));
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((nw, nr)) => {
                w = nw;
                res = nr;
                history.push(max_abs(&res));
            }
            None => {
                message = Some("line search failed to reduce the residual".into());
                break;
            }
        }
    }
    let rn = max_abs(&res);
    let converged = rn < opts.grid_tol;
    if !converged && message.is_none() {
        message = Some(format!("no convergence after {iterations} iterations"));
    }
    Ok(SolveResult {
        field: Field::Grid { n: grid.n, side: grid.side, values: lift_fields(sys, &w) },
        residual_norm: rn,
        iterations,
        converged,
        residual_history: history,
        message,
    })
}

/// Vertex relabelling from a3~2 to the isomorphic d3~2 numbering.
pub const A3_TWISTED_TO_D3_TWISTED: [usize; 3] = [0, 2, 1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternateOrder {
    pub target: DiagramId,
    /// perm[j] is the target vertex of vertex j.
    pub perm: Vec<usize>,
    pub c: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalReport {
    pub diagram: DiagramId,
    pub genus: u32,
    /// Solution of Σ_k C[j][k] c_k = 1 over j, k >= 1.
    pub c: Vec<String>,
    pub alternate_order: Option<AlternateOrder>,
    /// Exponent m/n with φ_0 a section of K^{m/n}.
    pub phi0_exponent: i64,
    pub degrees: Vec<i64>,
    pub w: Vec<f64>,
    /// Exact residuals of all r+1 equations at e^{w_j} = 2g-2 (j >= 1).
    pub exact_residual: Vec<String>,
}

pub fn principal_c(d: &AffineDiagram) -> Vec<Q> {
    let c = int_matrix_to_q(&d.finite_cartan());
    solve(&c, &vec![q(1); d.r()]).expect("finite Cartan matrix is invertible")
}

pub fn principal_case(d: &AffineDiagram, genus: u32) -> Result<PrincipalReport> {
    if genus < 2 {
        return Err(TodaError::Precondition("principal case needs genus >= 2".into()));
    }
    let r = d.r();
    Labelling::new(d, vec![-1; r + 1])
        .map_err(|_| TodaError::Precondition(format!("{} has no totally noncompact labelling", d.id)))?;
    let c = principal_c(d);
    if c.iter().any(|x| *x <= q(0)) {
        return Err(TodaError::Inconsistent("principal c-vector not positive".into()));
    }
    let x = q(2 * genus as i64 - 2);
    let degrees: Vec<i64> = {
        let mut v = vec![0; r + 1];
        for item in v.iter_mut().skip(1) {
            *item = 2 - 2 * genus as i64;
        }
        v[0] = -(1..=r).map(|k| d.marks[k] * v[k]).sum::<i64>();
        v
    };
    // a_0 = 0, a_k = c_k, e^{w_k} = 2g - 2: residual_j = Σ_k C[j][k] c_k x + d_j
    let exact: Vec<Q> = (0..=r)
        .map(|j| (1..=r).map(|k| q(d.cartan[j][k]) * c[k - 1] * x).sum::<Q>() + q(degrees[j]))
        .collect();
    let lw = (2.0 * genus as f64 - 2.0).ln();
    let mut w = vec![0.0; r + 1];
    for item in w.iter_mut().skip(1) {
        *item = lw;
    }
    w[0] = -(1..=r).map(|k| d.marks[k] as f64 * lw).sum::<f64>();
    let alternate_order = if d.id.to_string() == "a3~2" {
        let p = A3_TWISTED_TO_D3_TWISTED;
        let mut alt = vec![Q::from_integer(0); r];
        for j in 1..=r {
            alt[p[j] - 1] = c[j - 1];
        }
        Some(AlternateOrder {
            target: "d3~2".parse()?,
            perm: p.to_vec(),
            c: alt.iter().map(|v| v.to_string()).collect(),
        })
    } else {
        None
    };
    Ok(PrincipalReport {
        diagram: d.id,
        genus,
        c: c.iter().map(|v| v.to_string()).collect(),
        alternate_order,
        phi0_exponent: d.marks.iter().sum(),
        degrees,
        w,
        exact_residual: exact.iter().map(|v| v.to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::build_diagram;
    use crate::toda::{assemble_system, TodaPair};
    use rand::{Rng, SeedableRng};

    fn system(s: &str, ell: &[i8], g: u32, deg: &[i64], a: &[f64]) -> (AffineDiagram, TodaSystem) {
        let d = build_diagram(s.parse().unwrap()).unwrap();
        let lab = Labelling::new(&d, ell.to_vec()).unwrap();
        let p = TodaPair::new(&d, lab, g, deg, a.to_vec()).unwrap();
        let sys = assemble_system(&d, &p).unwrap();
        (d, sys)
    }

    #[test]
    fn closed_form_a1() {
        let e2 = 1f64.exp().powi(2);
        let (d, sys) = system("a1~1", &[-1, -1], 1, &[0], &[e2, 1.0]);
        let sol = torus_closed_form(&d, &sys).unwrap();
        let w = sol.constant().unwrap();
        assert!((w[0] + 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_preconditions() {
        let (d, sys) = system("a2~1", &[-1, 1, -1], 1, &[0, 0], &[1.0, 1.0, 1.0]);
        assert!(torus_closed_form(&d, &sys).is_err());
    }

    #[test]
    fn newton_matches_closed_form_from_random_starts() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for s in ["a1~1", "a3~1", "g2~1", "a4~2", "d4~3", "c3~1"] {
            let d = build_diagram(s.parse().unwrap()).unwrap();
            let a: Vec<f64> = (0..=d.r()).map(|_| rng.gen_range(0.1..10.0)).collect();
            let lab = Labelling::new(&d, vec![-1; d.r() + 1]).unwrap();
            let p = TodaPair::new(&d, lab, 1, &vec![0; d.r()], a).unwrap();
            let sys = assemble_system(&d, &p).unwrap();
            let exact = torus_closed_form(&d, &sys).unwrap();
            for _ in 0..20 {
                let init: Vec<f64> = (0..=d.r()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let sol = newton_constant(&sys, &init, &SolverOptions::default()).unwrap();
                assert!(sol.converged, "{s}: {:?}", sol.message);
                let err = sol.constant().unwrap().iter().zip(exact.constant().unwrap()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err < 1e-10, "{s}: {err}");
            }
        }
    }

    #[test]
    fn zero_system_returns_projected_init() {
        let (_, sys) = system("a2~1", &[-1, -1, 1], 1, &[0, 0], &[0.0; 3]);
        let sol = newton_constant(&sys, &[1.0, 0.5, -0.25], &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.iterations, 0);
        let w = sol.constant().unwrap();
        assert!((w[0] + w[1] + w[2]).abs() < 1e-15);
    }

    #[test]
    fn mixed_signs_existence_threshold() {
        // ell = (-1,1,-1), g = 2, d = (-2, 4, -2): constant solutions exist iff t <= 32/27
        let opts = SolverOptions::default();
        let (_, sys) = system("a2~1", &[-1, 1, -1], 2, &[4, -2], &[1.0, 0.0, 1.0]);
        let sol = newton_constant(&sys, &[0.0; 3], &opts).unwrap();
        assert!(sol.converged);
        let w = sol.constant().unwrap();
        assert!((w[0] - 2f64.ln()).abs() < 1e-10 && (w[2] - 2f64.ln()).abs() < 1e-10);
        let (_, sys) = system("a2~1", &[-1, 1, -1], 2, &[4, -2], &[1.0, 1.0, 1.0]);
        assert!(newton_constant(&sys, &[0.0; 3], &opts).unwrap().converged);
        let (_, sys) = system("a2~1", &[-1, 1, -1], 2, &[4, -2], &[1.0, 2.0, 1.0]);
        match newton_constant(&sys, &[0.0; 3], &opts) {
            Ok(sol) => assert!(!sol.converged),
            Err(e) => assert!(matches!(e, TodaError::SingularJacobian { .. })),
        }
    }

    #[test]
    fn constraint_holds_on_output() {
        let (_, sys) = system("e6~1", &[-1; 7], 1, &[0; 6], &[1.0, 2.0, 0.5, 3.0, 1.0, 2.0, 1.5]);
        let sol = newton_constant(&sys, &[0.1; 7], &SolverOptions::default()).unwrap();
        let w = sol.constant().unwrap();
        let s: f64 = w.iter().zip(&sys.marks).map(|(a, m)| a * *m as f64).sum();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn grid_solver_converges_to_constant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let (d, sys) = system("a3~1", &[-1; 4], 1, &[0, 0, 0], &[1.0, 2.0, 0.5, 1.5]);
        let exact = torus_closed_form(&d, &sys).unwrap();
        let grid = TorusGrid { n: 16, side: 1.0 };
        let init: Vec<Vec<f64>> = (0..3).map(|_| (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let sol = pde_solve_torus(&sys, &grid, &init, &SolverOptions::default()).unwrap();
        assert!(sol.converged, "{:?}", sol.message);
        let Field::Grid { values, .. } = &sol.field else { panic!() };
        let e = exact.constant().unwrap();
        for (j, f) in values.iter().enumerate() {
            for v in f {
                assert!((v - e[j]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn grid_starting_at_solution_needs_no_iterations() {
        let (d, sys) = system("b3~1", &[-1; 4], 1, &[0; 3], &[1.0, 1.0, 2.0, 3.0]);
        let exact = torus_closed_form(&d, &sys).unwrap();
        let e = exact.constant().unwrap();
        let grid = TorusGrid { n: 8, side: 1.0 };
        let init: Vec<Vec<f64>> = (1..=3).map(|j| vec![e[j]; 64]).collect();
        let sol = pde_solve_torus(&sys, &grid, &init, &SolverOptions::default()).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!(sol.converged);
    }

    #[test]
    fn grid_jacobian_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let (_, sys) = system("c2~1", &[-1, 1, -1], 2, &[0, 0], &[1.0, 0.7, 1.3]);
        let grid = TorusGrid { n: 4, side: 2.0 };
        let np = 16;
        let w: Vec<Vec<f64>> = (0..2).map(|_| (0..np).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let jac = grid_jacobian(&sys, &grid, &w);
        let mut dense = vec![vec![0.0; 2 * np]; 2 * np];
        for (i, j, v) in jac {
            dense[i][j] += v;
        }
        let h = 1e-6;
        for col in 0..2 * np {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[col / np][col % np] += h;
            wm[col / np][col % np] -= h;
            let rp = grid_residual(&sys, &grid, &wp);
            let rm = grid_residual(&sys, &grid, &wm);
            for row in 0..2 * np {
                let fd = (rp[row] - rm[row]) / (2.0 * h);
                assert!((fd - dense[row][col]).abs() < 1e-5 * (1.0 + dense[row][col].abs()));
            }
        }
    }

    #[test]
    fn principal_c_vectors() {
        let d = build_diagram("a3~1".parse().unwrap()).unwrap();
        assert_eq!(principal_case(&d, 2).unwrap().c, vec!["3/2", "2", "3/2"]);
        let d = build_diagram("a3~2".parse().unwrap()).unwrap();
        let rep = principal_case(&d, 2).unwrap();
        assert_eq!(rep.c, vec!["3/2", "2"]);
        let alt = rep.alternate_order.unwrap();
        assert_eq!(alt.c, vec!["2", "3/2"]);
        assert_eq!(rep.phi0_exponent, 3);
        let d3 = build_diagram("d3~2".parse().unwrap()).unwrap();
        assert_eq!(principal_case(&d3, 2).unwrap().c, alt.c);
        // the recorded relabelling is a diagram isomorphism
        let p = A3_TWISTED_TO_D3_TWISTED;
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d.cartan[i][j], d3.cartan[p[i]][p[j]]);
            }
        }
    }

    #[test]
    fn principal_residual_is_exactly_zero() {
        for id in DiagramId::all(8) {
            let d = build_diagram(id).unwrap();
            if Labelling::new(&d, vec![-1; d.r() + 1]).is_err() {
                assert!(principal_case(&d, 2).is_err());
                continue;
            }
            for g in 2..=4 {
                let rep = principal_case(&d, g).unwrap();
                assert!(rep.exact_residual.iter().all(|s| s == "0"), "{id}");
            }
        }
        let d = build_diagram("a2~1".parse().unwrap()).unwrap();
        assert!(principal_case(&d, 1).is_err());
    }
}
