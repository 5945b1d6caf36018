//! Sign labellings of affine diagrams and the real forms they describe.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::affine_roots::{build_restricted_roots, RestrictedRootSystem};
use crate::cartan::{identify, Family, FiniteType};
use crate::diagram::{AffineDiagram, DiagramId};
use crate::error::{Result, TodaError};
use crate::linalg::{int_matrix_to_q, q, solve, Q};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Labelling {
    pub diagram: DiagramId,
    pub ell: Vec<i8>,
}

impl Labelling {
    pub fn new(d: &AffineDiagram, ell: Vec<i8>) -> Result<Self> {
        if ell.len() != d.r() + 1 {
            return Err(TodaError::InvalidLabelling(format!(
                "expected {} signs for {}, got {}",
                d.r() + 1,
                d.id,
                ell.len()
            )));
        }
        if ell.iter().any(|&x| x != 1 && x != -1) {
            return Err(TodaError::InvalidLabelling("entries must be +1 or -1".into()));
        }
        if !ell.contains(&-1) {
            return Err(TodaError::InvalidLabelling("at least one entry must be -1".into()));
        }
        let n = d.twist as i64;
        let exp: i64 = ell.iter().zip(&d.marks).filter(|(&l, _)| l == -1).map(|(_, m)| n * m).sum();
        if exp % 2 != 0 {
            return Err(TodaError::InvalidLabelling(format!(
                "product of ell_j^(n m_j) is -1 for {}",
                d.id
            )));
        }
        Ok(Labelling { diagram: d.id, ell })
    }

    pub fn i_plus(&self) -> Vec<usize> {
        (0..self.ell.len()).filter(|&j| self.ell[j] == 1).collect()
    }

    pub fn i_minus(&self) -> Vec<usize> {
        (0..self.ell.len()).filter(|&j| self.ell[j] == -1).collect()
    }

    pub fn is_totally_noncompact(&self) -> bool {
        self.ell.iter().all(|&x| x == -1)
    }
}

impl fmt::Display for Labelling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.ell.iter().map(|x| format!("{x:+}")).collect();
        write!(f, "{} ({})", self.diagram, s.join(","))
    }
}

pub fn parse_signs(s: &str) -> Result<Vec<i8>> {
    s.split(',')
        .map(|t| match t.trim() {
            "1" | "+1" | "+" => Ok(1),
            "-1" | "-" => Ok(-1),
            other => Err(TodaError::InvalidLabelling(format!("bad sign `{other}`"))),
        })
        .collect()
}

/// Lexicographically smallest relabelling under the diagram symmetries.
pub fn canonical_representative(d: &AffineDiagram, ell: &[i8]) -> Vec<i8> {
    d.symmetries
        .iter()
        .map(|p| p.iter().map(|&j| ell[j]).collect::<Vec<i8>>())
        .min()
        .unwrap_or_else(|| ell.to_vec())
}

pub fn enumerate_labellings(d: &AffineDiagram, up_to_symmetry: bool) -> Vec<Labelling> {
    let n = d.r() + 1;
    let mut out: Vec<Labelling> = Vec::new();
    for bits in 1u32..(1 << n) {
        let ell: Vec<i8> = (0..n).map(|j| if bits >> j & 1 == 1 { -1 } else { 1 }).collect();
        let Ok(lab) = Labelling::new(d, ell) else { continue };
        if up_to_symmetry && canonical_representative(d, &lab.ell) != lab.ell {
            continue;
        }
        out.push(lab);
    }
    out
}

/// Whether the labelling gives an inner involution, with a witness h
/// (coefficients on the simple coroots H_1..H_r) such that a_j(h) = 1 where
/// ell_j = -1 and 0 elsewhere, for j >= 1.
pub fn inner_or_outer(d: &AffineDiagram, lab: &Labelling) -> (bool, Option<Vec<Q>>) {
    let exp: i64 = lab.ell.iter().zip(&d.marks).filter(|(&l, _)| l == -1).map(|(_, m)| *m).sum();
    if exp % 2 != 0 {
        return (false, None);
    }
    let c = int_matrix_to_q(&d.finite_cartan());
    let s: Vec<Q> = lab.ell[1..].iter().map(|&l| if l == -1 { q(1) } else { q(0) }).collect();
    let h = solve(&c, &s).expect("finite Cartan matrix is invertible");
    (true, Some(h))
}

pub fn ell_of_expansion(ell: &[i8], n: &[i64]) -> i8 {
    let neg: i64 = ell.iter().zip(n).filter(|(&l, _)| l == -1).map(|(_, k)| k.rem_euclid(2)).sum();
    if neg % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Value of ell on every restricted root (first `roots`, then `zero_grades`).
pub fn extend_labelling(sys: &RestrictedRootSystem, lab: &Labelling) -> Vec<i8> {
    sys.all_roots().map(|x| ell_of_expansion(&lab.ell, &x.expansion)).collect()
}

/// Value of ell on the imaginary root (0, 1).
pub fn ell_on_delta(d: &AffineDiagram, lab: &Labelling) -> i8 {
    ell_of_expansion(&lab.ell, &d.marks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealFormReport {
    pub diagram: DiagramId,
    pub ell: Vec<i8>,
    pub inner: bool,
    /// Coefficients of the inner witness h on the simple coroots.
    pub witness_h: Option<Vec<String>>,
    pub h_factors: Vec<FiniteType>,
    pub h_center_rank: usize,
    pub h_dimension: usize,
    pub m_dimension: usize,
    pub totally_noncompact: bool,
    pub class_representative: Vec<i8>,
}

impl RealFormReport {
    pub fn h_type_string(&self) -> String {
        type_string(&self.h_factors, self.h_center_rank)
    }
}

pub fn type_string(factors: &[FiniteType], center: usize) -> String {
    let mut parts: Vec<String> = factors.iter().map(|t| t.to_string()).collect();
    if center > 0 {
        parts.push(if center == 1 { "C".to_string() } else { format!("C^{center}") });
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn indecomposables<F: Fn(&[i64], &[i64]) -> Option<()>>(pos: &[Vec<i64>], is_diff_in: F) -> Vec<usize> {
    (0..pos.len())
        .filter(|&i| !pos.iter().any(|y| is_diff_in(&pos[i], y).is_some()))
        .collect()
}

pub fn fixed_subalgebra_type(sys: &RestrictedRootSystem, lab: &Labelling) -> Result<RealFormReport> {
    let d = &sys.diagram;
    if lab.diagram != d.id {
        return Err(TodaError::Precondition("labelling belongs to another diagram".into()));
    }
    let (inner, witness) = inner_or_outer(d, lab);
    let ell_roots: Vec<i8> = sys.roots.iter().map(|x| ell_of_expansion(&lab.ell, &x.expansion)).collect();
    let g = &sys.finite;
    let dim_g = g.ftype.dimension();
    let (cartan, center, dim_h) = if ell_on_delta(d, lab) == 1 {
        // ell is a function of the weight alone: work with the roots of g
        let mut ell_g = vec![0i8; g.len()];
        for (i, srcs) in sys.origin.iter().enumerate() {
            for &x in srcs {
                if ell_g[x] != 0 && ell_g[x] != ell_roots[i] {
                    return Err(TodaError::Inconsistent("ell depends on the grade".into()));
                }
                ell_g[x] = ell_roots[i];
            }
        }
        let pos: Vec<Vec<i64>> = (0..g.n_pos).filter(|&x| ell_g[x] == 1).map(|x| g.coeffs[x].clone()).collect();
        let simple = indecomposables(&pos, |x, y| {
            let diff: Vec<i64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            pos.contains(&diff).then_some(())
        });
        let gram: Vec<Vec<Q>> = simple
            .iter()
            .map(|&a| simple.iter().map(|&b| g.inner_coeffs(&pos[a], &pos[b])).collect())
            .collect();
        let dim_h = g.rank + 2 * pos.len();
        (crate::cartan::cartan_from_gram(&gram), g.rank - simple.len(), dim_h)
    } else {
        let weights: Vec<Vec<i64>> = sys
            .roots
            .iter()
            .zip(&ell_roots)
            .filter(|(_, &l)| l == 1)
            .map(|(x, _)| x.finite_part.clone())
            .collect();
        let positive = |v: &[i64]| v.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0);
        let pos: Vec<Vec<i64>> = weights.iter().filter(|w| positive(w)).cloned().collect();
        if 2 * pos.len() != weights.len() {
            return Err(TodaError::Inconsistent("fixed weights are not symmetric".into()));
        }
        let simple = indecomposables(&pos, |x, y| {
            let diff: Vec<i64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
            pos.contains(&diff).then_some(())
        });
        let gram: Vec<Vec<Q>> = simple
            .iter()
            .map(|&a| simple.iter().map(|&b| sys.weight_inner(&pos[a], &pos[b])).collect())
            .collect();
        let r = d.r();
        (crate::cartan::cartan_from_gram(&gram), r - simple.len(), r + weights.len())
    };
    let h_factors = identify(&cartan)
        .ok_or_else(|| TodaError::Inconsistent(format!("unrecognized Cartan matrix {cartan:?}")))?;
    let sum: usize = h_factors.iter().map(|t| t.dimension()).sum::<usize>() + center;
    if sum != dim_h {
        return Err(TodaError::Inconsistent(format!(
            "{lab}: dimension {dim_h} but factors give {sum}"
        )));
    }
    Ok(RealFormReport {
        diagram: d.id,
        ell: lab.ell.clone(),
        inner,
        witness_h: witness.map(|h| h.iter().map(|x| x.to_string()).collect()),
        h_factors,
        h_center_rank: center,
        h_dimension: dim_h,
        m_dimension: dim_g - dim_h,
        totally_noncompact: lab.is_totally_noncompact(),
        class_representative: canonical_representative(d, &lab.ell),
    })
}

/// Compact real Lie algebras used in the reference table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Compact {
    U(usize),
    SU(usize),
    SO(usize),
    SP(usize),
}

impl fmt::Display for Compact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Compact::U(n) => write!(f, "u({n})"),
            Compact::SU(n) => write!(f, "su({n})"),
            Compact::SO(n) => write!(f, "so({n})"),
            Compact::SP(n) => write!(f, "sp({n})"),
        }
    }
}

impl Compact {
    /// Complexification as canonical simple factors plus center rank.
    pub fn complexify(self) -> (Vec<FiniteType>, usize) {
        use Family::*;
        let t = FiniteType::new;
        match self {
            Compact::SU(1) => (vec![], 0),
            Compact::SU(n) => (vec![t(A, n - 1)], 0),
            Compact::U(n) => {
                let (f, c) = Compact::SU(n).complexify();
                (f, c + 1)
            }
            Compact::SO(n) => match n {
                1 => (vec![], 0),
                2 => (vec![], 1),
                3 => (vec![t(A, 1)], 0),
                4 => (vec![t(A, 1), t(A, 1)], 0),
                5 => (vec![t(B, 2)], 0),
                6 => (vec![t(A, 3)], 0),
                n if n % 2 == 1 => (vec![t(B, (n - 1) / 2)], 0),
                n => (vec![t(D, n / 2)], 0),
            },
            Compact::SP(n) => match n {
                1 => (vec![t(A, 1)], 0),
                2 => (vec![t(B, 2)], 0),
                n => (vec![t(C, n)], 0),
            },
        }
    }
}

/// Maximal compact subalgebra of the split real form, as tabulated.
pub fn table1_fixture(id: DiagramId) -> Option<Vec<Compact>> {
    use Compact::*;
    let l = id.rank;
    Some(match (id.twist, id.family) {
        (1, Family::A) if l % 2 == 0 => return None,
        (1, Family::A) => {
            let k = l.div_ceil(2);
            vec![U(k), SU(k)]
        }
        (1, Family::B) => vec![SO(l + 1), SO(l)],
        (1, Family::C) => vec![U(l)],
        (1, Family::D) if l % 2 == 0 => vec![SO(l), SO(l)],
        (1, Family::D) => vec![SO(l + 1), SO(l - 1)],
        (1, Family::E) => match l {
            6 => vec![SU(6), SU(2)],
            7 => vec![SU(8)],
            _ => vec![SO(16)],
        },
        (1, Family::F) => vec![SP(3), SU(2)],
        (1, Family::G) => vec![SU(2), SU(2)],
        (2, Family::A) => vec![SO(l + 1)],
        (2, Family::D) => vec![SO(l), SO(l)],
        (2, Family::E) => vec![SP(4)],
        (3, Family::D) => vec![SO(4), SO(4)],
        _ => unreachable!(),
    })
}

pub fn complexify_all(parts: &[Compact]) -> (Vec<FiniteType>, usize) {
    let mut f = Vec::new();
    let mut c = 0;
    for p in parts {
        let (ff, cc) = p.complexify();
        f.extend(ff);
        c += cc;
    }
    f.sort();
    (f, c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub id: DiagramId,
    pub fixture: Option<String>,
    pub expected: Option<String>,
    pub computed: Option<String>,
    pub matches: bool,
}

pub fn totally_noncompact_row(id: DiagramId) -> Result<Table1Row> {
    let sys = build_restricted_roots(id)?;
    let ell = vec![-1i8; sys.r() + 1];
    let computed = match Labelling::new(&sys.diagram, ell) {
        Ok(lab) => {
            let rep = fixed_subalgebra_type(&sys, &lab)?;
            Some((rep.h_factors, rep.h_center_rank))
        }
        Err(_) => None,
    };
    let fix = table1_fixture(id);
    let expected = fix.as_ref().map(|p| complexify_all(p));
    Ok(Table1Row {
        id,
        fixture: fix.map(|p| p.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" + ")),
        expected: expected.as_ref().map(|(f, c)| type_string(f, *c)),
        computed: computed.as_ref().map(|(f, c)| type_string(f, *c)),
        matches: computed == expected,
    })
}

pub fn totally_noncompact_table(max_rank: usize) -> Result<Vec<Table1Row>> {
    DiagramId::all(max_rank).into_iter().map(totally_noncompact_row).collect()
}

/// Labelling from Kac coordinates s_j in {0,1} with sum n m_j s_j = 2.
pub fn kac_to_labelling(d: &AffineDiagram, s: &[i64]) -> Result<Labelling> {
    if s.len() != d.r() + 1 || s.iter().any(|&x| x != 0 && x != 1) {
        return Err(TodaError::InvalidLabelling("Kac coordinates must be r+1 entries in {0,1}".into()));
    }
    let n = d.twist as i64;
    let total: i64 = s.iter().zip(&d.marks).map(|(a, m)| n * a * m).sum();
    if total != 2 {
        return Err(TodaError::InvalidLabelling(format!("sum n m_j s_j = {total}, expected 2")));
    }
    Labelling::new(d, s.iter().map(|&x| if x == 1 { -1 } else { 1 }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::build_diagram;

    fn id(s: &str) -> DiagramId {
        s.parse().unwrap()
    }

    fn report(s: &str, ell: &[i8]) -> RealFormReport {
        let sys = build_restricted_roots(id(s)).unwrap();
        let lab = Labelling::new(&sys.diagram, ell.to_vec()).unwrap();
        fixed_subalgebra_type(&sys, &lab).unwrap()
    }

    #[test]
    fn a2_twisted_labellings() {
        let d = build_diagram(id("a2~2")).unwrap();
        let labs = enumerate_labellings(&d, false);
        assert_eq!(labs.len(), 3);
        let a1 = vec![FiniteType::new(Family::A, 1)];
        let r = report("a2~2", &[-1, 1]);
        assert!(!r.inner);
        assert_eq!((r.h_factors.clone(), r.h_center_rank), (a1.clone(), 0));
        let r = report("a2~2", &[1, -1]);
        assert!(r.inner);
        assert_eq!((r.h_factors.clone(), r.h_center_rank), (a1.clone(), 1));
        let r = report("a2~2", &[-1, -1]);
        assert!(!r.inner);
        assert_eq!((r.h_factors.clone(), r.h_center_rank), (a1, 0));
    }

    #[test]
    fn a2_untwisted_single_class() {
        let d = build_diagram(id("a2~1")).unwrap();
        assert_eq!(enumerate_labellings(&d, false).len(), 3);
        assert_eq!(enumerate_labellings(&d, true).len(), 1);
        let r = report("a2~1", &[-1, -1, 1]);
        assert_eq!(r.h_type_string(), "a1 + C");
    }

    #[test]
    fn rejects_bad_labellings() {
        let d = build_diagram(id("a2~1")).unwrap();
        assert!(Labelling::new(&d, vec![-1, 1, 1]).is_err());
        assert!(Labelling::new(&d, vec![1, 1, 1]).is_err());
        assert!(Labelling::new(&d, vec![1, -1]).is_err());
        assert!(Labelling::new(&build_diagram(id("a1~1")).unwrap(), vec![-1, -1]).is_ok());
    }

    #[test]
    fn inner_witness_evaluates_correctly() {
        for did in DiagramId::all(6) {
            let d = build_diagram(did).unwrap();
            for lab in enumerate_labellings(&d, false) {
                let (inner, h) = inner_or_outer(&d, &lab);
                if d.twist == 1 || did.twist == 3 {
                    assert!(inner);
                }
                let Some(h) = h else { continue };
                let r = d.r();
                for j in 0..=r {
                    let v: Q = (0..r).map(|k| q(d.cartan[j][k + 1]) * h[k]).sum();
                    assert!(v.is_integer());
                    let sign = if v.to_integer().rem_euclid(2) == 0 { 1 } else { -1 };
                    assert_eq!(sign, lab.ell[j], "{lab}");
                }
            }
        }
    }

    #[test]
    fn table1_matches() {
        for row in totally_noncompact_table(8).unwrap() {
            assert!(row.matches, "{:?}", row);
        }
        let row = totally_noncompact_row(id("a4~1")).unwrap();
        assert!(row.computed.is_none() && row.expected.is_none());
    }

    #[test]
    fn d5_split_form() {
        let r = report("d5~1", &[-1; 6]);
        assert_eq!(r.h_type_string(), "a1 + a1 + a3");
    }

    #[test]
    fn kac_coordinates() {
        let d = build_diagram(id("a2~2")).unwrap();
        assert_eq!(kac_to_labelling(&d, &[1, 0]).unwrap().ell, vec![-1, 1]);
        assert!(kac_to_labelling(&d, &[0, 1]).is_err());
        let e8 = build_diagram(id("e8~1")).unwrap();
        let mut s = vec![0; 9];
        s[1] = 1;
        assert_eq!(kac_to_labelling(&e8, &s).unwrap().ell[1], -1);
        s[2] = 1;
        assert!(kac_to_labelling(&e8, &s).is_err());
    }

    #[test]
    fn fixed_subalgebra_dimensions_add_up() {
        for did in DiagramId::all(6) {
            let sys = build_restricted_roots(did).unwrap();
            for lab in enumerate_labellings(&sys.diagram, true) {
                let r = fixed_subalgebra_type(&sys, &lab).unwrap();
                assert_eq!(r.h_dimension + r.m_dimension, did.finite_type().dimension());
                assert!(r.m_dimension > 0);
            }
        }
    }
}
