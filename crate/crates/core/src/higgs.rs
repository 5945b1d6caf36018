//! Symbolic Higgs bundle attached to a Toda pair, the Hodge bundle test and
//! the cyclic pairs built from the principal c-vector.

use serde::{Deserialize, Serialize};

use crate::affine_roots::{build_restricted_roots, RestrictedRootSystem};
use crate::diagram::{AffineDiagram, DiagramId};
use crate::error::{Result, TodaError};
use crate::involutions::{ell_of_expansion, Labelling};
use crate::linalg::{int_matrix_to_q, q, rank, solve_any, to_f64, Q};
use crate::solver::principal_c;
use crate::toda::TodaPair;

/// Root space of 𝔪 tensored up to a line bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summand {
    pub finite_part: Vec<i64>,
    pub grade: u8,
    pub root_expansion: Vec<i64>,
    pub multiplicity: usize,
    pub degree: i64,
}

/// ρφ_k maps summand `from` into summand `to` (weight drops by a_k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub from: usize,
    pub to: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HodgeResult {
    pub hodge: bool,
    /// γ on the simple coroots H_1..H_r.
    pub gamma: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiggsDescription {
    pub diagram: DiagramId,
    pub ell: Vec<i8>,
    pub support: Vec<usize>,
    pub summands: Vec<Summand>,
    pub phi_components: Vec<usize>,
    pub dbar_arrows: Vec<Arrow>,
    pub hodge: bool,
    pub hodge_gamma: Option<Vec<String>>,
}

impl HiggsDescription {
    pub fn rank(&self) -> usize {
        self.summands.iter().map(|s| s.multiplicity).sum()
    }

    pub fn find(&self, finite_part: &[i64], grade: u8) -> Option<usize> {
        self.summands.iter().position(|s| s.finite_part == finite_part && s.grade == grade)
    }
}

fn degree_of(expansion: &[i64], degrees: &[i64]) -> i64 {
    expansion.iter().zip(degrees).map(|(n, d)| n * d).sum()
}

/// Summands and arrows from an already built restricted root system.
pub fn build_higgs_with(sys: &RestrictedRootSystem, d: &AffineDiagram, p: &TodaPair) -> Result<HiggsDescription> {
    let lab = &p.labelling;
    let summands: Vec<Summand> = sys
        .all_roots()
        .filter(|x| ell_of_expansion(&lab.ell, &x.expansion) == -1)
        .map(|x| Summand {
            finite_part: x.finite_part.clone(),
            grade: x.grade,
            root_expansion: x.expansion.clone(),
            multiplicity: x.multiplicity,
            degree: degree_of(&x.expansion, &p.degrees),
        })
        .collect();
    let support = p.support();
    let phi_components: Vec<usize> = support.iter().copied().filter(|&k| lab.ell[k] == -1).collect();
    let mut dbar_arrows = Vec::new();
    for &k in support.iter().filter(|&&k| lab.ell[k] == 1) {
        for (i, s) in summands.iter().enumerate() {
            let mut e = s.root_expansion.clone();
            e[k] -= 1;
            let (f, g) = sys.key_of_expansion(&e);
            if let Some(j) = summands.iter().position(|t| t.finite_part == f && t.grade == g) {
                dbar_arrows.push(Arrow { from: i, to: j, k });
            }
        }
    }
    let h = hodge_test(d, p);
    Ok(HiggsDescription {
        diagram: d.id,
        ell: lab.ell.clone(),
        support,
        summands,
        phi_components,
        dbar_arrows,
        hodge: h.hodge,
        hodge_gamma: h.gamma,
    })
}

pub fn build_higgs(d: &AffineDiagram, p: &TodaPair) -> Result<HiggsDescription> {
    let sys = build_restricted_roots(d.id)?;
    build_higgs_with(&sys, d, p)
}

/// Solvability of a_j(γ) = 1 on I₋∩J and a_j(γ) = 0 on I₊∩J, decided by
/// comparing ranks of the coefficient and augmented matrices.
pub fn hodge_test(d: &AffineDiagram, p: &TodaPair) -> HodgeResult {
    hodge_test_support(d, &p.labelling, &p.support())
}

pub fn hodge_test_support(d: &AffineDiagram, lab: &Labelling, support: &[usize]) -> HodgeResult {
    let r = d.r();
    if support.is_empty() {
        return HodgeResult { hodge: true, gamma: Some(vec!["0".into(); r]) };
    }
    let c = int_matrix_to_q(&d.cartan);
    // a_j(Σ x_k H_k) = Σ_k C[j][k] x_k
    let a: Vec<Vec<Q>> = support.iter().map(|&j| c[j][1..].to_vec()).collect();
    let b: Vec<Q> = support.iter().map(|&j| if lab.ell[j] == -1 { q(1) } else { q(0) }).collect();
    let aug: Vec<Vec<Q>> = a.iter().zip(&b).map(|(row, bj)| row.iter().copied().chain([*bj]).collect()).collect();
    if rank(&a) != rank(&aug) {
        return HodgeResult { hodge: false, gamma: None };
    }
    let gamma = solve_any(&a, &b).map(|g| g.iter().map(|x| x.to_string()).collect());
    HodgeResult { hodge: true, gamma }
}

/// Totally noncompact cyclic pair with Q_j ≅ K^{-1} for j >= 1, a_j = c_j
/// and a_0 = ‖φ_0‖² |a_0|²/2.
pub fn baraglia_pair(d: &AffineDiagram, genus: u32, phi0_norm: f64) -> Result<TodaPair> {
    if genus < 2 {
        return Err(TodaError::Precondition("needs genus >= 2".into()));
    }
    if !phi0_norm.is_finite() || phi0_norm < 0.0 {
        return Err(TodaError::Precondition("phi0 norm must be finite and nonnegative".into()));
    }
    let r = d.r();
    let lab = Labelling::new(d, vec![-1; r + 1])
        .map_err(|_| TodaError::Precondition(format!("{} has no totally noncompact labelling", d.id)))?;
    let c = principal_c(d);
    let mut coeffs = vec![phi0_norm * phi0_norm * to_f64(&d.lengths[0]) / 2.0];
    coeffs.extend(c.iter().map(to_f64));
    TodaPair::new(d, lab, genus, &vec![2 - 2 * genus as i64; r], coeffs)
}
