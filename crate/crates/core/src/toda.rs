//! Toda pairs and the geometric Toda system they define.
//!
//! Equations are written as
//! `Δw_j = Σ_k ε_k a_k C[j][k] e^{w_k} − d_j`, with Δ the non-negative
//! Laplacian and the constraint `Σ m_j w_j = 0`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::cartan::{identify_connected, FiniteType};
use crate::diagram::AffineDiagram;
use crate::error::{Result, TodaError};
use crate::involutions::Labelling;
use crate::linalg::{inverse, q, to_f64, Q};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TodaPair {
    pub labelling: Labelling,
    pub genus: u32,
    /// Degrees d_0..d_r; d_0 = -Σ_{k>=1} m_k d_k.
    pub degrees: Vec<i64>,
    /// a_k = ‖φ_k‖² |a_k|²/2.
    pub coeffs: Vec<f64>,
    /// ‖φ_k‖² when the pair was given in that form.
    pub phi_norms_sq: Option<Vec<f64>>,
}

impl TodaPair {
    /// `degrees` holds d_1..d_r.
    pub fn new(d: &AffineDiagram, labelling: Labelling, genus: u32, degrees: &[i64], coeffs: Vec<f64>) -> Result<Self> {
        let r = d.r();
        if labelling.diagram != d.id {
            return Err(TodaError::InvalidPair("labelling belongs to another diagram".into()));
        }
        if degrees.len() != r {
            return Err(TodaError::InvalidPair(format!("expected {r} degrees d_1..d_r, got {}", degrees.len())));
        }
        if coeffs.len() != r + 1 {
            return Err(TodaError::InvalidPair(format!("expected {} coefficients, got {}", r + 1, coeffs.len())));
        }
        if coeffs.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(TodaError::InvalidPair("coefficients must be finite and nonnegative".into()));
        }
        let d0 = -(1..=r).map(|k| d.marks[k] * degrees[k - 1]).sum::<i64>();
        let mut full = vec![d0];
        full.extend_from_slice(degrees);
        let floor = 2 - 2 * genus as i64;
        for k in 0..=r {
            if coeffs[k] > 0.0 && full[k] < floor {
                return Err(TodaError::InvalidPair(format!(
                    "phi_{k} is nonzero but d_{k} = {} < 2-2g = {floor}",
                    full[k]
                )));
            }
        }
        Ok(TodaPair { labelling, genus, degrees: full, coeffs, phi_norms_sq: None })
    }

    /// Build from ‖φ_k‖², converting with the squared root lengths.
    pub fn from_phi_norms(
        d: &AffineDiagram,
        labelling: Labelling,
        genus: u32,
        degrees: &[i64],
        phi_norms_sq: Vec<f64>,
    ) -> Result<Self> {
        if phi_norms_sq.len() != d.r() + 1 {
            return Err(TodaError::InvalidPair("wrong number of norms".into()));
        }
        let coeffs = phi_norms_sq.iter().zip(&d.lengths).map(|(p, l)| p * to_f64(l) / 2.0).collect();
        let mut p = TodaPair::new(d, labelling, genus, degrees, coeffs)?;
        p.phi_norms_sq = Some(phi_norms_sq);
        Ok(p)
    }

    /// J = {k : φ_k ≠ 0}.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&k| self.coeffs[k] > 0.0).collect()
    }

    pub fn is_cyclic(&self) -> bool {
        self.coeffs.iter().all(|&a| a > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TodaSystem {
    pub diagram: crate::diagram::DiagramId,
    pub cartan: Vec<Vec<i64>>,
    pub marks: Vec<i64>,
    pub signs: Vec<i8>,
    pub coeffs: Vec<f64>,
    pub sources: Vec<f64>,
}

pub fn assemble_system(d: &AffineDiagram, p: &TodaPair) -> Result<TodaSystem> {
    if p.labelling.diagram != d.id {
        return Err(TodaError::InvalidPair("pair belongs to another diagram".into()));
    }
    Ok(TodaSystem {
        diagram: d.id,
        cartan: d.cartan.clone(),
        marks: d.marks.clone(),
        signs: p.labelling.ell.clone(),
        coeffs: p.coeffs.clone(),
        sources: p.degrees.iter().map(|&x| x as f64).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    /// Integer factor ε_k C[j][k].
    pub factor: i64,
    /// Index k of the coefficient a_k.
    pub coeff: usize,
    /// Exponent as a linear form: (variable index, integer coefficient).
    pub exponent: Vec<(usize, i64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicEquation {
    pub row: usize,
    pub terms: Vec<Term>,
    pub source: f64,
}

impl SymbolicEquation {
    pub fn render(&self) -> String {
        let mut s = format!("Δw{} =", self.row);
        for (i, t) in self.terms.iter().enumerate() {
            let sign = if t.factor < 0 { "-" } else { "+" };
            let mag = t.factor.abs();
            let mag = if mag == 1 { String::new() } else { mag.to_string() };
            let mut e = String::new();
            for (n, (v, c)) in t.exponent.iter().enumerate() {
                let cs = match (c.abs(), *c < 0, n == 0) {
                    (1, true, _) => "-".to_string(),
                    (1, false, true) => String::new(),
                    (1, false, false) => "+".to_string(),
                    (a, true, _) => format!("-{a}"),
                    (a, false, true) => a.to_string(),
                    (a, false, false) => format!("+{a}"),
                };
                let _ = write!(e, "{cs}w{v}");
            }
            if i == 0 {
                let lead = if sign == "-" { "-" } else { "" };
                let _ = write!(s, " {lead}{mag}a{}·exp({e})", t.coeff);
            } else {
                let _ = write!(s, " {sign} {mag}a{}·exp({e})", t.coeff);
            }
        }
        if self.source < 0.0 {
            let _ = write!(s, " + {}", -self.source);
        } else {
            let _ = write!(s, " - {}", self.source);
        }
        s
    }
}

impl TodaSystem {
    pub fn r(&self) -> usize {
        self.cartan.len() - 1
    }

    /// K[j][k] = -ε_k a_k C[j][k], so that Δw + K e^w + d = 0.
    pub fn coefficient_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.cartan.len();
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| -(self.signs[k] as f64) * self.coeffs[k] * self.cartan[j][k] as f64)
                    .collect()
            })
            .collect()
    }

    /// Full vector w_0..w_r from w_1..w_r through the constraint.
    pub fn lift(&self, w: &[f64]) -> Vec<f64> {
        let w0 = -(1..=self.r()).map(|j| self.marks[j] as f64 * w[j - 1]).sum::<f64>() / self.marks[0] as f64;
        let mut full = vec![w0];
        full.extend_from_slice(w);
        full
    }

    /// R_j = Δw_j - Σ_k ε_k a_k C[j][k] e^{w_k} + d_j for all j, given Δw.
    pub fn residual_full(&self, w: &[f64], lap: &[f64]) -> Vec<f64> {
        let k = self.coefficient_matrix();
        let e: Vec<f64> = w.iter().map(|x| x.exp()).collect();
        (0..w.len())
            .map(|j| lap[j] + (0..w.len()).map(|c| k[j][c] * e[c]).sum::<f64>() + self.sources[j])
            .collect()
    }

    /// Constant-field residual of equations 1..r in the reduced variables.
    pub fn reduced_residual(&self, w: &[f64]) -> Vec<f64> {
        let full = self.lift(w);
        let zero = vec![0.0; full.len()];
        self.residual_full(&full, &zero)[1..].to_vec()
    }

    /// Jacobian of `reduced_residual`; column i is the derivative in w_{i+1}.
    pub fn reduced_jacobian(&self, w: &[f64]) -> Vec<Vec<f64>> {
        let full = self.lift(w);
        let k = self.coefficient_matrix();
        let r = self.r();
        let e: Vec<f64> = full.iter().map(|x| x.exp()).collect();
        (1..=r)
            .map(|j| {
                (1..=r)
                    .map(|i| k[j][i] * e[i] - k[j][0] * e[0] * self.marks[i] as f64)
                    .collect()
            })
            .collect()
    }

    /// Equations j != `eliminate`, with w_eliminate written through the
    /// constraint. Requires m_eliminate = 1.
    pub fn equations(&self, eliminate: usize) -> Result<Vec<SymbolicEquation>> {
        let n = self.cartan.len();
        if eliminate >= n || self.marks[eliminate] != 1 {
            return Err(TodaError::Precondition("can only eliminate a vertex with mark 1".into()));
        }
        let elim_expr: Vec<(usize, i64)> = (0..n).filter(|&i| i != eliminate).map(|i| (i, -self.marks[i])).collect();
        let eqs = (0..n)
            .filter(|&j| j != eliminate)
            .map(|j| SymbolicEquation {
                row: j,
                terms: (0..n)
                    .filter(|&k| self.cartan[j][k] != 0)
                    .map(|k| Term {
                        factor: self.signs[k] as i64 * self.cartan[j][k],
                        coeff: k,
                        exponent: if k == eliminate { elim_expr.clone() } else { vec![(k, 1)] },
                    })
                    .collect(),
                source: self.sources[j],
            })
            .collect();
        Ok(eqs)
    }
}

/// Integer points (d_1..d_r) with d_k >= 2-2g for all k including d_0.
pub fn degree_polytope(d: &AffineDiagram, genus: u32) -> Vec<Vec<i64>> {
    let r = d.r();
    let lo = 2 - 2 * genus as i64;
    let cap = 2 * genus as i64 - 2;
    let marks = &d.marks[1..];
    let mut out = Vec::new();
    let mut cur = vec![0i64; r];
    fn go(k: usize, used: i64, lo: i64, cap: i64, marks: &[i64], cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let r = marks.len();
        if k == r {
            if used <= cap {
                out.push(cur.clone());
            }
            return;
        }
        let rest: i64 = marks[k + 1..].iter().map(|m| m * lo).sum();
        let budget = cap - used - rest;
        if budget < marks[k] * lo {
            return;
        }
        let hi = budget.div_euclid(marks[k]);
        for v in lo..=hi {
            cur[k] = v;
            go(k + 1, used + marks[k] * v, lo, cap, marks, cur, out);
        }
    }
    go(0, 0, lo, cap, marks, &mut cur, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcedRelation {
    pub vertex: usize,
    /// w_l = Σ_j coeff_j w_j and d_l = Σ_j coeff_j d_j over j ∈ J.
    pub coeffs: Vec<(usize, String)>,
    pub forced_degree: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub support: Vec<usize>,
    pub b: Vec<Vec<i64>>,
    pub a: Vec<Vec<String>>,
    pub relations: Vec<ForcedRelation>,
    pub components: Vec<Vec<usize>>,
    pub component_types: Vec<FiniteType>,
    pub order: i64,
}

/// The K_lj = Σ_k C[l][k] A[k][j] coefficients for l outside J.
pub fn reduction_coefficients(d: &AffineDiagram, support: &[usize]) -> Result<(Vec<Vec<Q>>, Vec<Vec<Q>>)> {
    let b: Vec<Vec<Q>> = support.iter().map(|&j| support.iter().map(|&k| q(d.cartan[j][k])).collect()).collect();
    let a = inverse(&b).ok_or_else(|| TodaError::Inconsistent("J-submatrix is singular".into()))?;
    let n = d.cartan.len();
    let k: Vec<Vec<Q>> = (0..n)
        .map(|l| {
            (0..support.len())
                .map(|jj| (0..support.len()).map(|kk| q(d.cartan[l][support[kk]]) * a[kk][jj]).sum())
                .collect()
        })
        .collect();
    Ok((a, k))
}

pub fn non_cyclic_reduce(d: &AffineDiagram, p: &TodaPair) -> Result<ReductionReport> {
    let support = p.support();
    let n = d.cartan.len();
    if support.is_empty() || support.len() == n {
        return Err(TodaError::Precondition("reduction needs a nonempty proper support J".into()));
    }
    let (a, k) = reduction_coefficients(d, &support)?;
    let mut relations = Vec::new();
    for l in (0..n).filter(|l| !support.contains(l)) {
        let forced: Q = (0..support.len()).map(|jj| k[l][jj] * q(p.degrees[support[jj]])).sum();
        if forced != q(p.degrees[l]) {
            return Err(TodaError::InvalidPair(format!(
                "forced relation d_{l} = {} violated (d_{l} = {})",
                forced, p.degrees[l]
            )));
        }
        relations.push(ForcedRelation {
            vertex: l,
            coeffs: (0..support.len()).map(|jj| (support[jj], k[l][jj].to_string())).collect(),
            forced_degree: forced.to_string(),
        });
    }
    let sub: Vec<Vec<i64>> = support.iter().map(|&j| support.iter().map(|&k| d.cartan[j][k]).collect()).collect();
    let comps: Vec<Vec<usize>> = crate::cartan::connected_components(&sub)
        .into_iter()
        .map(|c| c.into_iter().map(|i| support[i]).collect())
        .collect();
    let component_types = comps
        .iter()
        .map(|c| {
            let m: Vec<Vec<i64>> = c.iter().map(|&i| c.iter().map(|&j| d.cartan[i][j]).collect()).collect();
            identify_connected(&m).ok_or_else(|| TodaError::Inconsistent("unidentified component".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let order = (0..n).filter(|l| !support.contains(l)).map(|l| d.twist as i64 * d.marks[l]).sum();
    Ok(ReductionReport {
        b: sub,
        a: a.iter().map(|row| row.iter().map(|x| x.to_string()).collect()).collect(),
        support,
        relations,
        components: comps,
        component_types,
        order,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldedSystem {
    pub orbits: Vec<Vec<usize>>,
    /// M[a][b] = Σ_{k ∈ orbit b} K[rep a][k].
    pub matrix: Vec<Vec<f64>>,
    pub sources: Vec<f64>,
    /// Σ of marks over each orbit (constraint weights).
    pub weights: Vec<i64>,
}

impl FoldedSystem {
    /// Rows and columns of the orbits not containing vertex 0.
    pub fn nonaffine_matrix(&self) -> Vec<Vec<f64>> {
        let keep: Vec<usize> = (0..self.orbits.len()).filter(|&o| !self.orbits[o].contains(&0)).collect();
        keep.iter().map(|&a| keep.iter().map(|&b| self.matrix[a][b]).collect()).collect()
    }
}

pub fn fold_by_symmetry(d: &AffineDiagram, p: &TodaPair, perm: &[usize]) -> Result<FoldedSystem> {
    if !d.symmetries.iter().any(|s| s == perm) {
        return Err(TodaError::Precondition(format!("{perm:?} is not a diagram symmetry")));
    }
    let n = d.cartan.len();
    for j in 0..n {
        let i = perm[j];
        if p.labelling.ell[i] != p.labelling.ell[j] {
            return Err(TodaError::NonInvariant(format!("ell_{j} != ell_{i}")));
        }
        if p.coeffs[i] != p.coeffs[j] {
            return Err(TodaError::NonInvariant(format!("a_{j} != a_{i}")));
        }
        if p.degrees[i] != p.degrees[j] {
            return Err(TodaError::NonInvariant(format!("d_{j} != d_{i}")));
        }
    }
    let mut seen = BTreeSet::new();
    let mut orbits = Vec::new();
    for j in 0..n {
        if seen.contains(&j) {
            continue;
        }
        let mut o = crate::affine_roots::orbit_of(perm, j);
        o.sort_unstable();
        seen.extend(o.iter().copied());
        orbits.push(o);
    }
    let sys = assemble_system(d, p)?;
    let k = sys.coefficient_matrix();
    let matrix = orbits
        .iter()
        .map(|oa| orbits.iter().map(|ob| ob.iter().map(|&c| k[oa[0]][c]).sum()).collect())
        .collect();
    Ok(FoldedSystem {
        sources: orbits.iter().map(|o| sys.sources[o[0]]).collect(),
        weights: orbits.iter().map(|o| o.iter().map(|&j| d.marks[j]).sum()).collect(),
        orbits,
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{build_diagram, DiagramId};
    use rand::{Rng, SeedableRng};

    fn diag(s: &str) -> AffineDiagram {
        build_diagram(s.parse().unwrap()).unwrap()
    }

    fn pair(d: &AffineDiagram, ell: &[i8], g: u32, deg: &[i64], a: &[f64]) -> TodaPair {
        let lab = Labelling::new(d, ell.to_vec()).unwrap();
        TodaPair::new(d, lab, g, deg, a.to_vec()).unwrap()
    }

    #[test]
    fn a2_symbolic_equations() {
        let d = diag("a2~1");
        let p = pair(&d, &[-1, 1, -1], 2, &[0, 0], &[1.0, 1.0, 1.0]);
        let sys = assemble_system(&d, &p).unwrap();
        let eqs = sys.equations(1).unwrap();
        assert_eq!(eqs.len(), 2);
        let t0: Vec<(i64, usize, Vec<(usize, i64)>)> =
            eqs[0].terms.iter().map(|t| (t.factor, t.coeff, t.exponent.clone())).collect();
        assert_eq!(
            t0,
            vec![(-2, 0, vec![(0, 1)]), (-1, 1, vec![(0, -1), (2, -1)]), (1, 2, vec![(2, 1)])]
        );
        let t2: Vec<(i64, usize)> = eqs[1].terms.iter().map(|t| (t.factor, t.coeff)).collect();
        assert_eq!(t2, vec![(1, 0), (-1, 1), (-2, 2)]);
        assert_eq!(eqs[0].render(), "Δw0 = -2a0·exp(w0) - a1·exp(-w0-w2) + a2·exp(w2) - 0");
    }

    #[test]
    fn sinh_gordon() {
        let d = diag("a1~1");
        let p = pair(&d, &[-1, -1], 1, &[0], &[1.0, 1.0]);
        let sys = assemble_system(&d, &p).unwrap();
        // Δw0 + 2e^{w0} - 2e^{-w0} = 0, written for w1 = -w0
        for w1 in [-0.7, 0.0, 0.3, 1.9] {
            let w0: f64 = -w1;
            let res = sys.residual_full(&[w0, w1], &[0.0, 0.0])[0];
            assert!((res - (2.0 * w0.exp() - 2.0 * (-w0).exp())).abs() < 1e-12);
        }
    }

    #[test]
    fn vanishing_higgs_data_is_linear() {
        let d = diag("b3~1");
        let p = pair(&d, &[-1, -1, -1, -1], 2, &[1, -1, 0], &[0.0; 4]);
        let sys = assemble_system(&d, &p).unwrap();
        let r = sys.residual_full(&[0.3, -1.0, 2.0, 0.1], &[0.0; 4]);
        assert_eq!(r, sys.sources);
    }

    #[test]
    fn redundancy_of_weighted_sum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for id in DiagramId::all(6) {
            let d = build_diagram(id).unwrap();
            let lab = crate::involutions::enumerate_labellings(&d, false).pop().unwrap();
            let a: Vec<f64> = (0..=d.r()).map(|_| rng.gen_range(0.1..5.0)).collect();
            let p = TodaPair::new(&d, lab, 3, &vec![0; d.r()], a).unwrap();
            let sys = assemble_system(&d, &p).unwrap();
            for _ in 0..100 {
                let w: Vec<f64> = (0..=d.r()).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let res = sys.residual_full(&w, &vec![0.0; w.len()]);
                let s: f64 = res.iter().zip(&d.marks).map(|(x, m)| x * *m as f64).sum();
                let scale: f64 = res.iter().map(|x| x.abs()).sum::<f64>() + 1.0;
                assert!(s.abs() < 1e-12 * scale, "{id}: {s}");
            }
        }
    }

    #[test]
    fn polytope_low_genus() {
        for id in DiagramId::all(8) {
            let d = build_diagram(id).unwrap();
            assert!(degree_polytope(&d, 0).is_empty());
            assert_eq!(degree_polytope(&d, 1), vec![vec![0; d.r()]]);
        }
    }

    #[test]
    fn polytope_a2_genus_two() {
        // u = d1 + 2, v = d2 + 2 >= 0 with u + v <= 6
        let pts = degree_polytope(&diag("a2~1"), 2);
        assert_eq!(pts.len(), 28);
        assert!(pts.iter().all(|p| p[0] >= -2 && p[1] >= -2 && p[0] + p[1] <= 2));
    }

    #[test]
    fn polytope_matches_bounding_box_filter() {
        for id in DiagramId::all(8).into_iter().filter(|i| i.affine_rank() <= 4) {
            let d = build_diagram(id).unwrap();
            for g in 0..=3u32 {
                let lo = 2 - 2 * g as i64;
                let r = d.r();
                let box_hi = 2 * g as i64 - 2 - lo * (d.marks[1..].iter().sum::<i64>() - 1);
                let mut brute = Vec::new();
                let mut cur = vec![lo; r];
                'outer: loop {
                    let d0 = -(0..r).map(|k| d.marks[k + 1] * cur[k]).sum::<i64>();
                    if d0 >= lo {
                        brute.push(cur.clone());
                    }
                    for k in (0..r).rev() {
                        if cur[k] < box_hi {
                            cur[k] += 1;
                            continue 'outer;
                        }
                        cur[k] = lo;
                    }
                    break;
                }
                brute.sort();
                let mut ours = degree_polytope(&d, g);
                ours.sort();
                assert_eq!(ours, brute, "{id} g={g}");
            }
        }
    }

    #[test]
    fn reduction_examples() {
        let d = diag("a2~1");
        let p = pair(&d, &[-1, -1, 1], 2, &[1, -2], &[0.0, 1.0, 1.0]);
        let rep = non_cyclic_reduce(&d, &p).unwrap();
        assert_eq!(rep.a, vec![vec!["2/3", "1/3"], vec!["1/3", "2/3"]]);
        assert_eq!(rep.relations[0].coeffs, vec![(1, "-1".to_string()), (2, "-1".to_string())]);
        assert_eq!(rep.order, 1);
        assert_eq!(rep.component_types, vec![FiniteType::new(crate::Family::A, 2)]);

        let p = pair(&d, &[-1, -1, 1], 2, &[2, -1], &[0.0, 1.0, 0.0]);
        let rep = non_cyclic_reduce(&d, &p).unwrap();
        let half: Vec<(usize, String)> = vec![(1, "-1/2".into())];
        assert_eq!(rep.relations[0].coeffs, half);
        assert_eq!(rep.relations[1].coeffs, half);
        assert_eq!(rep.order, 2);

        let bad = pair(&d, &[-1, -1, 1], 2, &[2, 0], &[0.0, 1.0, 0.0]);
        assert!(matches!(non_cyclic_reduce(&d, &bad), Err(TodaError::InvalidPair(_))));
        let empty = pair(&d, &[-1, -1, 1], 2, &[0, 0], &[0.0; 3]);
        assert!(matches!(non_cyclic_reduce(&d, &empty), Err(TodaError::Precondition(_))));
    }

    #[test]
    fn reduction_substitution_is_an_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for id in DiagramId::all(5) {
            let d = build_diagram(id).unwrap();
            let n = d.r() + 1;
            for mask in 1u32..(1 << n) - 1 {
                let support: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
                let (_, k) = reduction_coefficients(&d, &support).unwrap();
                // x_k = ε_k a_k e^{w_k} on J and Δw_j on J: solve the J rows for Δw
                for _ in 0..5 {
                    let x: Vec<f64> = support.iter().map(|_| rng.gen_range(-3.0..3.0)).collect();
                    let src: Vec<f64> = support.iter().map(|_| rng.gen_range(-3.0..3.0)).collect();
                    let lap_j: Vec<f64> = support
                        .iter()
                        .enumerate()
                        .map(|(jj, &j)| {
                            support.iter().enumerate().map(|(kk, &c)| d.cartan[j][c] as f64 * x[kk]).sum::<f64>()
                                - src[jj]
                        })
                        .collect();
                    for l in (0..n).filter(|l| !support.contains(l)) {
                        let kl: Vec<f64> = k[l].iter().map(to_f64).collect();
                        let lap_l: f64 = kl.iter().zip(&lap_j).map(|(a, b)| a * b).sum();
                        let d_l: f64 = kl.iter().zip(&src).map(|(a, b)| a * b).sum();
                        let rhs: f64 = support.iter().enumerate().map(|(kk, &c)| d.cartan[l][c] as f64 * x[kk]).sum::<f64>() - d_l;
                        assert!((lap_l - rhs).abs() < 1e-9, "{id} J={support:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn fold_a3_untwisted() {
        let d = diag("a3~1");
        let p = pair(&d, &[-1; 4], 2, &[-2, -2, -2], &[0.7, 1.5, 2.0, 1.5]);
        let f = fold_by_symmetry(&d, &p, &[0, 3, 2, 1]).unwrap();
        assert_eq!(f.orbits, vec![vec![0], vec![1, 3], vec![2]]);
        assert_eq!(f.nonaffine_matrix(), vec![vec![3.0, -2.0], vec![-3.0, 4.0]]);
        assert_eq!(f.weights, vec![1, 2, 1]);
        let id = fold_by_symmetry(&d, &p, &[0, 1, 2, 3]).unwrap();
        assert_eq!(id.matrix, assemble_system(&d, &p).unwrap().coefficient_matrix());
        assert!(fold_by_symmetry(&d, &p, &[1, 0, 2, 3]).is_err());
        let q = pair(&d, &[-1; 4], 2, &[-2, -2, -2], &[0.7, 1.5, 2.0, 1.0]);
        assert!(matches!(fold_by_symmetry(&d, &q, &[0, 3, 2, 1]), Err(TodaError::NonInvariant(_))));
    }

    #[test]
    fn pair_validation() {
        let d = diag("a2~1");
        let lab = Labelling::new(&d, vec![-1, -1, 1]).unwrap();
        assert!(TodaPair::new(&d, lab.clone(), 2, &[-3, 0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(TodaPair::new(&d, lab.clone(), 2, &[-3, 0], vec![1.0, 0.0, 1.0]).is_ok());
        assert!(TodaPair::new(&d, lab.clone(), 2, &[0], vec![1.0; 3]).is_err());
        assert!(TodaPair::new(&d, lab, 2, &[0, 0], vec![-1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn phi_norm_form_uses_lengths() {
        let d = diag("a2~2");
        let lab = Labelling::new(&d, vec![-1, -1]).unwrap();
        let p = TodaPair::from_phi_norms(&d, lab, 2, &[-1], vec![2.0, 2.0]).unwrap();
        assert_eq!(p.coeffs, vec![2.0, 0.5]);
    }
}
