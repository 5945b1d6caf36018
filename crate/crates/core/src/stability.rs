//! 0-stability of Toda pairs: the inverse-Gram shortcut for simple
//! non-affine supports and an exact Fourier–Motzkin test for general ones.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::diagram::AffineDiagram;
use crate::error::{Result, TodaError};
use crate::linalg::{inverse, null_space, q, Q};
use crate::toda::TodaPair;

type R128 = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    PolystableOnly,
    Unstable,
    Vacuous,
}

impl Verdict {
    /// Whether a solution is expected (stable or vacuously so).
    pub fn is_stable(self) -> bool {
        matches!(self, Verdict::Stable | Verdict::Vacuous)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Cyclic,
    RMatrix,
    FourierMotzkin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub verdict: Verdict,
    pub route: Route,
    pub support: Vec<usize>,
    /// χ = Σ x_j a_j (j = 1..r) destabilizing or of degree zero.
    pub witness_character: Option<Vec<String>>,
    pub r_matrix: Option<Vec<Vec<String>>>,
}

/// Linear inequality a·x <= b with integer data.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Ineq {
    a: Vec<i128>,
    b: i128,
}

fn checked(x: Option<i128>) -> Result<i128> {
    x.ok_or_else(|| TodaError::Overflow("Fourier–Motzkin coefficients".into()))
}

impl Ineq {
    fn normalized(mut self) -> Self {
        let g = self.a.iter().fold(self.b.abs(), |acc, x| acc.gcd(x));
        if g > 1 {
            for x in self.a.iter_mut() {
                *x /= g;
            }
            self.b /= g;
        }
        self
    }
}

fn from_rational_row(a: &[Q], b: Q) -> Ineq {
    let l = a.iter().fold(*b.denom(), |acc, x| acc.lcm(x.denom())) as i128;
    Ineq {
        a: a.iter().map(|x| *x.numer() as i128 * (l / *x.denom() as i128)).collect(),
        b: *b.numer() as i128 * (l / *b.denom() as i128),
    }
    .normalized()
}

/// Exact feasibility of {x : a_i·x <= b_i}; returns a rational point if feasible.
fn fourier_motzkin(system: &[Ineq], nvars: usize) -> Result<Option<Vec<R128>>> {
    let mut stages: Vec<Vec<Ineq>> = vec![system.to_vec()];
    for v in (0..nvars).rev() {
        let cur = stages.last().unwrap();
        let mut next: Vec<Ineq> = cur.iter().filter(|c| c.a[v] == 0).cloned().collect();
        let pos: Vec<&Ineq> = cur.iter().filter(|c| c.a[v] > 0).collect();
        let neg: Vec<&Ineq> = cur.iter().filter(|c| c.a[v] < 0).collect();
        for p in &pos {
            for n in &neg {
                let (sp, sn) = (-n.a[v], p.a[v]);
                let mut a = Vec::with_capacity(nvars);
                for i in 0..nvars {
                    a.push(checked(checked(p.a[i].checked_mul(sp))?.checked_add(checked(n.a[i].checked_mul(sn))?))?);
                }
                let b = checked(checked(p.b.checked_mul(sp))?.checked_add(checked(n.b.checked_mul(sn))?))?;
                next.push(Ineq { a, b }.normalized());
            }
        }
        next.sort_by(|x, y| (&x.a, x.b).cmp(&(&y.a, y.b)));
        next.dedup();
        if next.iter().any(|c| c.a.iter().all(|&x| x == 0) && c.b < 0) {
            return Ok(None);
        }
        next.retain(|c| c.a.iter().any(|&x| x != 0));
        stages.push(next);
    }
    // back-substitute: stages[nvars - v] only involves x_0..x_{v-1}
    let mut x: Vec<R128> = vec![R128::zero(); nvars];
    for v in 0..nvars {
        let cons = &stages[nvars - 1 - v];
        let mut lo: Option<R128> = None;
        let mut hi: Option<R128> = None;
        for c in cons.iter().filter(|c| c.a[v] != 0 && c.a[v + 1..].iter().all(|&t| t == 0)) {
            let rest: R128 = (0..v).map(|i| R128::from_integer(c.a[i]) * x[i]).sum();
            let bound = (R128::from_integer(c.b) - rest) / R128::from_integer(c.a[v]);
            if c.a[v] > 0 {
                hi = Some(hi.map_or(bound, |h: R128| h.min(bound)));
            } else {
                lo = Some(lo.map_or(bound, |l: R128| l.max(bound)));
            }
        }
        x[v] = match (lo, hi) {
            (None, None) => R128::zero(),
            (Some(l), None) => l.ceil().max(l),
            (None, Some(h)) => h.floor().min(h),
            (Some(l), Some(h)) => {
                if l > h {
                    return Err(TodaError::Inconsistent("Fourier–Motzkin back-substitution".into()));
                }
                if l <= R128::zero() && R128::zero() <= h {
                    R128::zero()
                } else if l.ceil() <= h {
                    l.ceil()
                } else {
                    l
                }
            }
        };
    }
    for c in system {
        let s: R128 = c.a.iter().zip(&x).map(|(&a, xi)| R128::from_integer(a) * xi).sum();
        if s > R128::from_integer(c.b) {
            return Err(TodaError::Inconsistent("Fourier–Motzkin witness fails".into()));
        }
    }
    Ok(Some(x))
}

fn r128_string(x: &R128) -> String {
    x.to_string()
}

/// Cone test on the rows <a_k, ·> for k in `support`, with χ = Σ x_j a_j.
pub fn stability_by_fourier_motzkin(d: &AffineDiagram, support: &[usize], degrees: &[i64]) -> Result<(Verdict, Option<Vec<String>>)> {
    let r = d.r();
    let gram = d.gram();
    let rows: Vec<Vec<Q>> = support.iter().map(|&k| (1..=r).map(|j| gram[k][j]).collect()).collect();
    let deg: Vec<Q> = degrees[1..].iter().map(|&x| q(x)).collect();
    let cone: Vec<Ineq> = rows.iter().map(|row| from_rational_row(row, Q::zero())).collect();

    let mut p1 = cone.clone();
    p1.push(from_rational_row(&deg, q(-1)));
    if let Some(x) = fourier_motzkin(&p1, r)? {
        return Ok((Verdict::Unstable, Some(x.iter().map(r128_string).collect())));
    }
    let sum_row: Vec<Q> = (0..r).map(|j| rows.iter().map(|row| row[j]).sum()).collect();
    let mut p2 = cone.clone();
    p2.push(from_rational_row(&deg, Q::zero()));
    p2.push(from_rational_row(&sum_row, q(-1)));
    if let Some(x) = fourier_motzkin(&p2, r)? {
        return Ok((Verdict::Unstable, Some(x.iter().map(r128_string).collect())));
    }
    let lineality = null_space(&rows, r);
    if let Some(v) = lineality.first() {
        return Ok((Verdict::PolystableOnly, Some(v.iter().map(|x| x.to_string()).collect())));
    }
    Ok((Verdict::Stable, None))
}

/// Inverse Gram matrix of a_1..a_r and the sign test R d < 0.
pub fn stability_by_r_matrix(d: &AffineDiagram, degrees: &[i64], genus: u32) -> (Verdict, Vec<Vec<Q>>) {
    let rm = inverse(&d.finite_gram()).expect("finite Gram matrix is invertible");
    let floor = 2 - 2 * genus as i64;
    let ok_deg = degrees[1..].iter().all(|&x| x >= floor);
    let ok_sign = rm
        .iter()
        .all(|row| row.iter().zip(&degrees[1..]).map(|(a, &b)| a * q(b)).sum::<Q>().is_negative());
    (if ok_deg && ok_sign { Verdict::Stable } else { Verdict::Unstable }, rm)
}

pub fn stability_check(d: &AffineDiagram, p: &TodaPair) -> Result<StabilityReport> {
    let support = p.support();
    if let Some(k) = support.iter().find(|&&k| p.labelling.ell[k] != -1) {
        return Err(TodaError::NotPrincipalPair(format!(
            "vertex {k} carries a nonzero field but is compact (ell = +1)"
        )));
    }
    let n = d.r() + 1;
    if support.len() == n {
        return Ok(StabilityReport {
            verdict: Verdict::Vacuous,
            route: Route::Cyclic,
            support,
            witness_character: None,
            r_matrix: None,
        });
    }
    if support == (1..n).collect::<Vec<_>>() {
        let (verdict, rm) = stability_by_r_matrix(d, &p.degrees, p.genus);
        let witness = if verdict == Verdict::Unstable {
            stability_by_fourier_motzkin(d, &support, &p.degrees)?.1
        } else {
            None
        };
        return Ok(StabilityReport {
            verdict,
            route: Route::RMatrix,
            support,
            witness_character: witness,
            r_matrix: Some(rm.iter().map(|row| row.iter().map(|x| x.to_string()).collect()).collect()),
        });
    }
    let (verdict, witness) = stability_by_fourier_motzkin(d, &support, &p.degrees)?;
    Ok(StabilityReport { verdict, route: Route::FourierMotzkin, support, witness_character: witness, r_matrix: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{build_diagram, DiagramId};
    use crate::involutions::Labelling;

    fn simple_pair(d: &AffineDiagram, g: u32, deg: &[i64]) -> Result<TodaPair> {
        let lab = Labelling::new(d, vec![-1; d.r() + 1]).or_else(|_| {
            let mut ell = vec![-1; d.r() + 1];
            ell[0] = 1;
            Labelling::new(d, ell)
        })?;
        let mut a = vec![1.0; d.r() + 1];
        a[0] = 0.0;
        TodaPair::new(d, lab, g, deg, a)
    }

    #[test]
    fn a2_admissible_set() {
        let d = build_diagram("a2~1".parse().unwrap()).unwrap();
        let mut adm = Vec::new();
        for d1 in -8..=8 {
            for d2 in -8..=8 {
                let Ok(p) = simple_pair(&d, 2, &[d1, d2]) else { continue };
                if stability_check(&d, &p).unwrap().verdict == Verdict::Stable {
                    adm.push((d1, d2));
                }
            }
        }
        assert_eq!(
            adm,
            vec![(-2, -2), (-2, -1), (-2, 0), (-1, -2), (-1, -1), (-1, 0), (0, -2), (0, -1)]
        );
    }

    #[test]
    fn a2_zero_degrees_unstable_with_witness() {
        let d = build_diagram("a2~1".parse().unwrap()).unwrap();
        let p = simple_pair(&d, 2, &[0, 0]).unwrap();
        let rep = stability_check(&d, &p).unwrap();
        assert_eq!(rep.verdict, Verdict::Unstable);
        let x: Vec<Q> = rep.witness_character.unwrap().iter().map(|s| s.parse().unwrap()).collect();
        assert!(x.iter().any(|v| !v.is_zero()));
        let g = d.finite_gram();
        for row in &g {
            assert!(row.iter().zip(&x).map(|(a, b)| a * b).sum::<Q>() <= Q::zero());
        }
        assert_eq!(rep.r_matrix.unwrap(), vec![vec!["2/3", "1/3"], vec!["1/3", "2/3"]]);
    }

    #[test]
    fn cyclic_is_vacuous() {
        for id in DiagramId::all(6) {
            let d = build_diagram(id).unwrap();
            let Ok(lab) = Labelling::new(&d, vec![-1; d.r() + 1]) else { continue };
            let p = TodaPair::new(&d, lab, 2, &vec![0; d.r()], vec![1.0; d.r() + 1]).unwrap();
            let rep = stability_check(&d, &p).unwrap();
            assert_eq!(rep.verdict, Verdict::Vacuous);
            assert!(rep.verdict.is_stable());
            let support: Vec<usize> = (0..=d.r()).collect();
            assert_eq!(stability_by_fourier_motzkin(&d, &support, &p.degrees).unwrap().0, Verdict::Stable);
        }
    }

    #[test]
    fn compact_support_is_rejected() {
        let d = build_diagram("a2~1".parse().unwrap()).unwrap();
        let lab = Labelling::new(&d, vec![-1, 1, -1]).unwrap();
        let p = TodaPair::new(&d, lab, 2, &[0, 0], vec![1.0; 3]).unwrap();
        assert!(matches!(stability_check(&d, &p), Err(TodaError::NotPrincipalPair(_))));
    }

    #[test]
    fn fm_agrees_with_r_matrix_small_box() {
        for id in DiagramId::all(8).into_iter().filter(|i| i.affine_rank() <= 3) {
            let d = build_diagram(id).unwrap();
            let r = d.r();
            let support: Vec<usize> = (1..=r).collect();
            let mut cur = vec![-3i64; r];
            loop {
                let mut full = vec![0];
                full.extend_from_slice(&cur);
                let (a, _) = stability_by_r_matrix(&d, &full, 3);
                let (b, _) = stability_by_fourier_motzkin(&d, &support, &full).unwrap();
                assert_eq!(a, b, "{id} {cur:?}");
                let Some(k) = (0..r).rev().find(|&k| cur[k] < 3) else { break };
                cur[k] += 1;
                for c in cur.iter_mut().skip(k + 1) {
                    *c = -3;
                }
            }
        }
    }

    #[test]
    fn verdict_is_invariant_under_rescaling() {
        let d = build_diagram("b3~1".parse().unwrap()).unwrap();
        let mut scaled = d.clone();
        scaled.lengths = d.lengths.iter().map(|x| x * q(7) / q(3)).collect();
        for deg in [[-1, -1, -1], [0, -1, 0], [2, -3, -1], [-2, -2, 1]] {
            let mut full = vec![0];
            full.extend_from_slice(&deg);
            assert_eq!(stability_by_r_matrix(&d, &full, 3).0, stability_by_r_matrix(&scaled, &full, 3).0);
            let s: Vec<usize> = vec![1, 2, 3];
            assert_eq!(
                stability_by_fourier_motzkin(&d, &s, &full).unwrap().0,
                stability_by_fourier_motzkin(&scaled, &s, &full).unwrap().0
            );
        }
    }

    #[test]
    fn polystable_when_cone_has_lineality() {
        // J = {1} in a2: the cone contains the line orthogonal to a_1
        let d = build_diagram("a2~1".parse().unwrap()).unwrap();
        let (v, w) = stability_by_fourier_motzkin(&d, &[1], &[2, -1, -1]).unwrap();
        assert_eq!(v, Verdict::Unstable, "{w:?}");
        let (v, _) = stability_by_fourier_motzkin(&d, &[1], &[1, -2, 1]).unwrap();
        assert_eq!(v, Verdict::PolystableOnly);
    }
}
