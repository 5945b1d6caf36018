//! Restricted roots of the (twisted) loop algebra attached to an affine
//! diagram: pairs (weight, grade mod n) together with their expansions in
//! the simple affine roots.

use std::collections::{HashMap, VecDeque};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cartan::{Family, FiniteType};
use crate::chevalley::{build_root_system, nu_action, NuAction, RootSystem, StructureConstants};
use crate::diagram::{build_diagram, AffineDiagram, DiagramId};
use crate::error::{Result, TodaError};
use crate::linalg::{q, Q};

/// How an affine diagram arises from a finite one: the finite type g, the
/// automorphism nu of its diagram and, for each non-affine vertex j >= 1,
/// the g-vertex whose restriction is a_j (all indices 0-based in g).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldingData {
    pub finite: FiniteType,
    pub perm: Vec<usize>,
    pub reps: Vec<usize>,
}

pub fn folding_data(id: DiagramId) -> FoldingData {
    let l = id.rank;
    let finite = id.finite_type();
    let ident: Vec<usize> = (0..l).collect();
    let (perm, reps) = match (id.twist, id.family) {
        (1, _) => (ident.clone(), ident),
        (2, Family::A) => ((0..l).map(|i| l - 1 - i).collect(), (0..id.affine_rank()).collect()),
        (2, Family::D) => {
            let mut p = ident.clone();
            p.swap(l - 2, l - 1);
            (p, (0..l - 1).collect())
        }
        (2, Family::E) => (vec![5, 1, 4, 3, 2, 0], vec![0, 2, 3, 1]),
        (3, Family::D) => (vec![2, 1, 3, 0], vec![0, 1]),
        _ => unreachable!("illegal diagram"),
    };
    FoldingData { finite, perm, reps }
}

/// Root of g restricting to a_0 with grade 1, as tabulated for each twisted
/// diagram (simple-root coordinates of g).
pub fn beta0_fixture(id: DiagramId) -> Option<Vec<i64>> {
    let l = id.rank;
    let delta: Vec<i64> = match (id.twist, id.family) {
        (1, _) => return None,
        (_, Family::A) => vec![1; l],
        (_, Family::D) => {
            let mut d = vec![2; l];
            d[0] = 1;
            d[l - 2] = 1;
            d[l - 1] = 1;
            d
        }
        (_, Family::E) => vec![1, 2, 2, 3, 2, 1],
        _ => unreachable!(),
    };
    let neg = |v: &[i64]| v.iter().map(|x| -x).collect::<Vec<_>>();
    Some(match (id.twist, id.family) {
        (2, Family::A) if l % 2 == 0 => neg(&delta),
        (2, Family::A) => {
            let mut v = neg(&delta);
            v[l - 1] += 1;
            v
        }
        (2, Family::D) => {
            let mut v = vec![-1; l - 1];
            v.push(0);
            v
        }
        (2, Family::E) => {
            let mut v = neg(&delta);
            v[1] += 1;
            v[2] += 1;
            v[3] += 1;
            v
        }
        (3, Family::D) => {
            let mut v = neg(&delta);
            v[1] += 1;
            v[3] += 1;
            v
        }
        _ => unreachable!(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedRoot {
    /// Coordinates of the weight in the basis a_1..a_r.
    pub finite_part: Vec<i64>,
    pub grade: u8,
    pub multiplicity: usize,
    /// Coefficients n_0..n_r with the root equal to sum n_k a_k (affine).
    pub expansion: Vec<i64>,
}

impl RestrictedRoot {
    pub fn key(&self) -> (Vec<i64>, u8) {
        (self.finite_part.clone(), self.grade)
    }

    pub fn is_zero_weight(&self) -> bool {
        self.finite_part.iter().all(|&x| x == 0)
    }
}

#[derive(Debug, Clone)]
pub struct RestrictedRootSystem {
    pub diagram: AffineDiagram,
    pub folding: FoldingData,
    pub finite: RootSystem,
    pub constants: StructureConstants,
    pub nu: NuAction,
    /// Nonzero-weight restricted roots, each of multiplicity one.
    pub roots: Vec<RestrictedRoot>,
    /// Zero-weight roots (0, j), j != 0, with multiplicities.
    pub zero_grades: Vec<RestrictedRoot>,
    /// For each entry of `roots`, the roots of g restricting to it.
    pub origin: Vec<Vec<usize>>,
    index: HashMap<(Vec<i64>, u8), usize>,
}

impl RestrictedRootSystem {
    pub fn n(&self) -> u8 {
        self.diagram.twist
    }

    pub fn r(&self) -> usize {
        self.diagram.r()
    }

    /// Index into `roots` of a nonzero-weight restricted root.
    pub fn find(&self, finite_part: &[i64], grade: u8) -> Option<usize> {
        self.index.get(&(finite_part.to_vec(), grade)).copied()
    }

    /// The simple affine root a_k as a restricted root index.
    pub fn simple(&self, k: usize) -> usize {
        let (f, g) = simple_key(&self.diagram, k);
        self.find(&f, g).unwrap()
    }

    /// Restriction of a root of g to a_1..a_r coordinates.
    pub fn restrict(&self, g_root: usize) -> Vec<i64> {
        restrict_coeffs(&self.folding, self.r(), &self.finite.coeffs[g_root])
    }

    /// Inner product of weights given in a_1..a_r coordinates.
    pub fn weight_inner(&self, a: &[i64], b: &[i64]) -> Q {
        let g = self.diagram.finite_gram();
        let mut s = Q::zero();
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                s += g[i][j] * q(ai * bj);
            }
        }
        s
    }

    /// All roots (nonzero and zero weight) as (finite_part, grade, multiplicity).
    pub fn all_roots(&self) -> impl Iterator<Item = &RestrictedRoot> {
        self.roots.iter().chain(self.zero_grades.iter())
    }

    /// Root with a given expansion, reduced modulo the null relation.
    pub fn key_of_expansion(&self, n: &[i64]) -> (Vec<i64>, u8) {
        expansion_key(&self.diagram, n)
    }
}

fn simple_key(d: &AffineDiagram, k: usize) -> (Vec<i64>, u8) {
    let r = d.r();
    if k == 0 {
        let n = d.twist as i64;
        (d.marks[1..].iter().map(|m| -m).collect(), (1 % n) as u8)
    } else {
        let mut f = vec![0; r];
        f[k - 1] = 1;
        (f, 0)
    }
}

fn expansion_key(d: &AffineDiagram, n: &[i64]) -> (Vec<i64>, u8) {
    let r = d.r();
    let tw = d.twist as i64;
    let f = (0..r).map(|j| n[j + 1] - n[0] * d.marks[j + 1]).collect();
    (f, n[0].rem_euclid(tw) as u8)
}

fn restrict_coeffs(f: &FoldingData, r: usize, c: &[i64]) -> Vec<i64> {
    let mut out = vec![0; r];
    for (i, &ci) in c.iter().enumerate() {
        // orbit of i contains exactly one representative
        let mut v = i;
        loop {
            if let Some(j) = f.reps.iter().position(|&x| x == v) {
                out[j] += ci;
                break;
            }
            v = f.perm[v];
        }
    }
    out
}

pub fn build_restricted_roots(id: DiagramId) -> Result<RestrictedRootSystem> {
    let diagram = build_diagram(id)?;
    let folding = folding_data(id);
    let finite = build_root_system(folding.finite)?;
    let constants = StructureConstants::new(&finite);
    let nu = nu_action(&finite, &constants, &folding.perm)?;
    let n = id.twist;
    let r = diagram.r();
    if nu.order() != n as usize {
        return Err(TodaError::Inconsistent(format!("{id}: automorphism has wrong order")));
    }

    let mut roots: Vec<RestrictedRoot> = Vec::new();
    let mut origin: Vec<Vec<usize>> = Vec::new();
    let mut index: HashMap<(Vec<i64>, u8), usize> = HashMap::new();
    let mut push = |f: Vec<i64>, g: u8, src: usize, roots: &mut Vec<RestrictedRoot>, origin: &mut Vec<Vec<usize>>| {
        if let Some(&i) = index.get(&(f.clone(), g)) {
            origin[i].push(src);
            return;
        }
        index.insert((f.clone(), g), roots.len());
        roots.push(RestrictedRoot { finite_part: f, grade: g, multiplicity: 1, expansion: vec![] });
        origin.push(vec![src]);
    };
    for x in 0..finite.len() {
        let f = restrict_coeffs(&folding, r, &finite.coeffs[x]);
        if nu.is_fixed(x) {
            let g = match nu.signs[x] {
                1 => 0,
                _ if n == 2 => 1,
                _ => return Err(TodaError::Inconsistent("fixed root with sign -1 for n=3".into())),
            };
            push(f, g, x, &mut roots, &mut origin);
        } else {
            for g in 0..n {
                push(f.clone(), g, x, &mut roots, &mut origin);
            }
        }
    }
    // each orbit of size n produced n entries n times over
    for o in origin.iter_mut() {
        o.sort_unstable();
        o.dedup();
    }
    if roots.iter().any(|x| x.finite_part.iter().all(|&c| c == 0)) {
        return Err(TodaError::Inconsistent("root of g restricts to zero".into()));
    }

    let size_n_orbits = folding.perm.iter().enumerate().filter(|(i, &p)| p != *i).count() / n as usize;
    let zero_grades: Vec<RestrictedRoot> = (1..n)
        .filter(|_| size_n_orbits > 0)
        .map(|g| RestrictedRoot {
            finite_part: vec![0; r],
            grade: g,
            multiplicity: size_n_orbits,
            expansion: vec![],
        })
        .collect();

    let mut sys = RestrictedRootSystem {
        diagram,
        folding,
        finite,
        constants,
        nu,
        roots,
        zero_grades,
        origin,
        index: HashMap::new(),
    };
    sys.index = sys.roots.iter().enumerate().map(|(i, x)| (x.key(), i)).collect();
    check_simple_roots(&sys)?;
    compute_expansions(&mut sys)?;
    Ok(sys)
}

fn check_simple_roots(sys: &RestrictedRootSystem) -> Result<()> {
    let d = &sys.diagram;
    let r = d.r();
    for k in 0..=r {
        let (f, g) = simple_key(d, k);
        if sys.find(&f, g).is_none() {
            return Err(TodaError::Inconsistent(format!("{}: a_{k} is not a root", d.id)));
        }
    }
    // averaged weights in g coordinates reproduce the catalog matrix
    let l = sys.finite.rank;
    let weight = |k: usize| -> Vec<Q> {
        let mut w = vec![Q::zero(); l];
        let mut add_rep = |j: usize, c: Q| {
            let orbit = orbit_of(&sys.folding.perm, sys.folding.reps[j]);
            let size = q(orbit.len() as i64);
            for v in orbit {
                w[v] += c / size;
            }
        };
        if k == 0 {
            for j in 0..r {
                add_rep(j, q(-d.marks[j + 1]));
            }
        } else {
            add_rep(k - 1, q(1));
        }
        w
    };
    let ws: Vec<Vec<Q>> = (0..=r).map(weight).collect();
    let ip = |a: &[Q], b: &[Q]| -> Q {
        let mut s = Q::zero();
        for i in 0..l {
            for j in 0..l {
                s += a[i] * b[j] * sys.finite.gram[i][j];
            }
        }
        s
    };
    let gram: Vec<Vec<Q>> = ws.iter().map(|a| ws.iter().map(|b| ip(a, b)).collect()).collect();
    let cartan = crate::cartan::cartan_from_gram(&gram);
    if cartan != d.cartan {
        return Err(TodaError::Inconsistent(format!("{}: folded Cartan matrix {cartan:?} differs", d.id)));
    }
    let max = (0..=r).map(|k| gram[k][k]).max().unwrap();
    let lengths: Vec<Q> = (0..=r).map(|k| gram[k][k] * q(2) / max).collect();
    if lengths != d.lengths {
        return Err(TodaError::Inconsistent(format!("{}: folded lengths differ", d.id)));
    }
    Ok(())
}

pub fn orbit_of(perm: &[usize], i: usize) -> Vec<usize> {
    let mut o = vec![i];
    let mut v = perm[i];
    while v != i {
        o.push(v);
        v = perm[v];
    }
    o
}

fn compute_expansions(sys: &mut RestrictedRootSystem) -> Result<()> {
    let d = sys.diagram.clone();
    let r = d.r();
    let mut found: HashMap<(Vec<i64>, u8), Vec<i64>> = HashMap::new();
    let is_root = |key: &(Vec<i64>, u8), sys: &RestrictedRootSystem| {
        sys.index.contains_key(key) || sys.zero_grades.iter().any(|z| &z.key() == key)
    };
    let mut queue = VecDeque::new();
    for k in 0..=r {
        let mut e = vec![0; r + 1];
        e[k] = 1;
        let key = simple_key(&d, k);
        found.insert(key.clone(), e.clone());
        queue.push_back(e);
    }
    while let Some(e) = queue.pop_front() {
        for k in 0..=r {
            let mut next = e.clone();
            next[k] += 1;
            let key = expansion_key(&d, &next);
            if !found.contains_key(&key) && is_root(&key, sys) {
                found.insert(key, next.clone());
                queue.push_back(next);
            }
        }
    }
    let neg_key = |key: &(Vec<i64>, u8)| -> (Vec<i64>, u8) {
        let n = d.twist;
        (key.0.iter().map(|x| -x).collect(), (n - key.1) % n)
    };
    let fill = |x: &mut RestrictedRoot| -> Result<()> {
        let key = x.key();
        if let Some(e) = found.get(&key) {
            x.expansion = e.clone();
        } else if let Some(e) = found.get(&neg_key(&key)) {
            x.expansion = e.iter().map(|v| -v).collect();
        } else {
            return Err(TodaError::Inconsistent(format!("{}: root {key:?} not reached", d.id)));
        }
        Ok(())
    };
    for x in sys.roots.iter_mut() {
        fill(x)?;
    }
    for x in sys.zero_grades.iter_mut() {
        fill(x)?;
    }
    Ok(())
}

/// Principal grading: the height sum n_k taken mod the Coxeter number.
pub fn coxeter_grading(sys: &RestrictedRootSystem, root: &RestrictedRoot) -> i64 {
    let m = sys.diagram.coxeter_number();
    root.expansion.iter().sum::<i64>().rem_euclid(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beta0Check {
    pub id: DiagramId,
    pub candidates: Vec<Vec<i64>>,
    pub fixture: Vec<i64>,
    pub matches: bool,
}

/// Roots of g that restrict to a_0 and contribute to grade 1, compared with
/// the tabulated choice.
pub fn verify_beta0(id: DiagramId) -> Result<Beta0Check> {
    if id.twist == 1 {
        return Err(TodaError::Precondition("beta_0 is only tabulated for twisted diagrams".into()));
    }
    let sys = build_restricted_roots(id)?;
    let (target, _) = simple_key(&sys.diagram, 0);
    let mut candidates = Vec::new();
    for x in 0..sys.finite.len() {
        if sys.restrict(x) != target {
            continue;
        }
        let grade_one = if sys.nu.is_fixed(x) { sys.nu.signs[x] == -1 && sys.n() == 2 } else { true };
        if grade_one {
            candidates.push(sys.finite.coeffs[x].clone());
        }
    }
    candidates.sort();
    let fixture = beta0_fixture(id).unwrap();
    let matches = candidates.contains(&fixture);
    Ok(Beta0Check { id, candidates, fixture, matches })
}
