//! Finite root systems, Chevalley structure constants and the lift of a
//! diagram automorphism to a Lie algebra automorphism.

use std::collections::HashMap;

use num_traits::Zero;

use crate::cartan::FiniteType;
use crate::error::{Result, TodaError};
use crate::linalg::{q, Q};

#[derive(Debug, Clone)]
pub struct RootSystem {
    pub ftype: FiniteType,
    pub rank: usize,
    /// Gram matrix of the simple roots (longest root has squared length 2).
    pub gram: Vec<Vec<Q>>,
    pub cartan: Vec<Vec<i64>>,
    /// Simple-root coordinates. Positive roots come first, ordered by
    /// height then lexicographically; negatives follow in the same order.
    pub coeffs: Vec<Vec<i64>>,
    /// Standard Euclidean coordinates (unscaled realization).
    pub euclidean: Vec<Vec<Q>>,
    pub n_pos: usize,
    index: HashMap<Vec<i64>, usize>,
}

impl RootSystem {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn find(&self, c: &[i64]) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub fn is_positive(&self, i: usize) -> bool {
        i < self.n_pos
    }

    pub fn neg(&self, i: usize) -> usize {
        if i < self.n_pos {
            i + self.n_pos
        } else {
            i - self.n_pos
        }
    }

    pub fn height(&self, i: usize) -> i64 {
        self.coeffs[i].iter().sum()
    }

    pub fn simple(&self, i: usize) -> usize {
        let mut c = vec![0; self.rank];
        c[i] = 1;
        self.find(&c).unwrap()
    }

    pub fn add(&self, x: usize, y: usize) -> Option<usize> {
        let s: Vec<i64> = self.coeffs[x].iter().zip(&self.coeffs[y]).map(|(a, b)| a + b).collect();
        self.find(&s)
    }

    pub fn inner_coeffs(&self, a: &[i64], b: &[i64]) -> Q {
        let mut s = Q::zero();
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj != 0 {
                    s += self.gram[i][j] * q(ai * bj);
                }
            }
        }
        s
    }

    pub fn inner(&self, x: usize, y: usize) -> Q {
        self.inner_coeffs(&self.coeffs[x], &self.coeffs[y])
    }

    pub fn norm2(&self, x: usize) -> Q {
        self.inner(x, x)
    }

    /// Largest p with y - p x a root (x != ±y).
    pub fn string_down(&self, x: usize, y: usize) -> i64 {
        let mut p = 0;
        let mut cur: Vec<i64> = self.coeffs[y].clone();
        loop {
            for (c, d) in cur.iter_mut().zip(&self.coeffs[x]) {
                *c -= d;
            }
            if self.find(&cur).is_some() {
                p += 1;
            } else {
                return p;
            }
        }
    }

    pub fn highest_root(&self) -> usize {
        self.n_pos - 1
    }
}

/// Root system generated from the Cartan matrix by root strings.
pub fn build_root_system(ftype: FiniteType) -> Result<RootSystem> {
    if !ftype.is_realizable() {
        return Err(TodaError::Precondition(format!("no realization for {ftype}")));
    }
    let cartan = ftype.cartan();
    let gram = ftype.gram();
    let (eucl_simple, _) = ftype.euclidean_simple_roots();
    let l = ftype.rank;
    let mut levels: Vec<Vec<Vec<i64>>> = vec![(0..l)
        .map(|i| {
            let mut c = vec![0; l];
            c[i] = 1;
            c
        })
        .collect()];
    let mut all: std::collections::HashSet<Vec<i64>> = levels[0].iter().cloned().collect();
    loop {
        let mut next: Vec<Vec<i64>> = Vec::new();
        for beta in levels.last().unwrap() {
            for i in 0..l {
                // p: how far beta - k a_i stays a root
                let mut p = 0;
                let mut cur = beta.clone();
                loop {
                    cur[i] -= 1;
                    if all.contains(&cur) {
                        p += 1;
                    } else {
                        break;
                    }
                }
                // <beta, a_i^vee> = sum_j b_j C[j][i]
                let pairing: i64 = (0..l).map(|j| beta[j] * cartan[j][i]).sum();
                let qq = p - pairing;
                if qq > 0 {
                    let mut c = beta.clone();
                    c[i] += 1;
                    if !next.contains(&c) {
                        next.push(c);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        for c in &next {
            all.insert(c.clone());
        }
        levels.push(next);
    }
    let mut pos: Vec<Vec<i64>> = levels.into_iter().flatten().collect();
    pos.sort_by(|a, b| {
        let ha: i64 = a.iter().sum();
        let hb: i64 = b.iter().sum();
        ha.cmp(&hb).then_with(|| a.cmp(b))
    });
    let n_pos = pos.len();
    let mut coeffs = pos.clone();
    coeffs.extend(pos.iter().map(|c| c.iter().map(|x| -x).collect::<Vec<_>>()));
    let dim = eucl_simple[0].len();
    let euclidean = coeffs
        .iter()
        .map(|c| {
            (0..dim)
                .map(|k| c.iter().zip(&eucl_simple).map(|(&ci, s)| q(ci) * s[k]).sum())
                .collect()
        })
        .collect();
    let index = coeffs.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    let rs = RootSystem { ftype, rank: l, gram, cartan, coeffs, euclidean, n_pos, index };
    if rs.len() != ftype.root_count() {
        return Err(TodaError::Inconsistent(format!(
            "{ftype}: generated {} roots, expected {}",
            rs.len(),
            ftype.root_count()
        )));
    }
    Ok(rs)
}

/// Structure constants N(x, y) with [E_x, E_y] = N(x, y) E_{x+y}, normalized
/// by positive extraspecial pairs.
#[derive(Debug, Clone)]
pub struct StructureConstants {
    table: HashMap<(usize, usize), i64>,
    pub extraspecial: Vec<Option<(usize, usize)>>,
}

fn ratio_to_int(x: Q) -> i64 {
    assert!(x.is_integer(), "non-integral structure constant {x}");
    x.to_integer()
}

fn lookup(rs: &RootSystem, pos: &HashMap<(usize, usize), i64>, x: usize, y: usize) -> i64 {
    if rs.add(x, y).is_none() {
        return 0;
    }
    match (rs.is_positive(x), rs.is_positive(y)) {
        (true, true) => pos[&(x, y)],
        (false, false) => -lookup(rs, pos, rs.neg(x), rs.neg(y)),
        (false, true) => -lookup(rs, pos, y, x),
        (true, false) => {
            let z = rs.neg(rs.add(x, y).unwrap());
            if rs.is_positive(z) {
                ratio_to_int(rs.norm2(z) / rs.norm2(y) * q(lookup(rs, pos, z, x)))
            } else {
                ratio_to_int(-rs.norm2(z) / rs.norm2(x) * q(lookup(rs, pos, rs.neg(y), rs.neg(z))))
            }
        }
    }
}

impl StructureConstants {
    pub fn new(rs: &RootSystem) -> Self {
        let n_pos = rs.n_pos;
        let mut extraspecial = vec![None; n_pos];
        for g in 0..n_pos {
            if rs.height(g) == 1 {
                continue;
            }
            let a = (0..n_pos)
                .find(|&a| {
                    let d: Vec<i64> = rs.coeffs[g].iter().zip(&rs.coeffs[a]).map(|(x, y)| x - y).collect();
                    rs.find(&d).is_some_and(|b| rs.is_positive(b))
                })
                .unwrap();
            let d: Vec<i64> = rs.coeffs[g].iter().zip(&rs.coeffs[a]).map(|(x, y)| x - y).collect();
            extraspecial[g] = Some((a, rs.find(&d).unwrap()));
        }
        let mut pos: HashMap<(usize, usize), i64> = HashMap::new();
        // positive pairs, in order of the height of their sum
        for g in 0..n_pos {
            let Some((a, b)) = extraspecial[g] else { continue };
            let nab = rs.string_down(a, b) + 1;
            pos.insert((a, b), nab);
            pos.insert((b, a), -nab);
            let na = rs.neg(a);
            let nb = rs.neg(b);
            for xi in 0..n_pos {
                let Some(eta) = rs.find(
                    &rs.coeffs[g].iter().zip(&rs.coeffs[xi]).map(|(x, y)| x - y).collect::<Vec<_>>(),
                ) else {
                    continue;
                };
                if !rs.is_positive(eta) || (xi, eta) == (a, b) || (xi, eta) == (b, a) {
                    continue;
                }
                let mut s = Q::zero();
                if let Some(ea) = rs.add(eta, na) {
                    s += q(lookup(rs, &pos, eta, na) * lookup(rs, &pos, xi, nb)) / rs.norm2(ea);
                }
                if let Some(xa) = rs.add(xi, na) {
                    s += q(lookup(rs, &pos, na, xi) * lookup(rs, &pos, eta, nb)) / rs.norm2(xa);
                }
                let v = rs.norm2(g) / q(nab) * s;
                pos.insert((xi, eta), ratio_to_int(v));
            }
        }
        let mut table = HashMap::new();
        for x in 0..rs.len() {
            for y in 0..rs.len() {
                if rs.add(x, y).is_some() {
                    table.insert((x, y), lookup(rs, &pos, x, y));
                }
            }
        }
        StructureConstants { table, extraspecial }
    }

    pub fn get(&self, x: usize, y: usize) -> i64 {
        self.table.get(&(x, y)).copied().unwrap_or(0)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&(usize, usize), &i64)> {
        self.table.iter()
    }
}

/// Lift of a diagram automorphism nu: E_x -> c_x E_{nu x}, with c = 1 on
/// simple roots.
#[derive(Debug, Clone)]
pub struct NuAction {
    pub perm: Vec<usize>,
    pub on_roots: Vec<usize>,
    pub signs: Vec<i64>,
}

impl NuAction {
    pub fn order(&self) -> usize {
        let n = self.perm.len();
        (1..=6)
            .find(|&k| (0..n).all(|i| (0..k).fold(i, |acc, _| self.perm[acc]) == i))
            .unwrap_or(0)
    }

    pub fn is_fixed(&self, root: usize) -> bool {
        self.on_roots[root] == root
    }
}

pub fn permute_coeffs(perm: &[usize], c: &[i64]) -> Vec<i64> {
    let mut out = vec![0; c.len()];
    for (i, &ci) in c.iter().enumerate() {
        out[perm[i]] += ci;
    }
    out
}

pub fn nu_action(rs: &RootSystem, sc: &StructureConstants, perm: &[usize]) -> Result<NuAction> {
    let l = rs.rank;
    if perm.len() != l {
        return Err(TodaError::Precondition("permutation has wrong length".into()));
    }
    for i in 0..l {
        for j in 0..l {
            if rs.cartan[perm[i]][perm[j]] != rs.cartan[i][j] {
                return Err(TodaError::Precondition("not a diagram automorphism".into()));
            }
        }
    }
    let on_roots: Vec<usize> = (0..rs.len())
        .map(|x| rs.find(&permute_coeffs(perm, &rs.coeffs[x])).unwrap())
        .collect();
    let mut signs = vec![0i64; rs.len()];
    let n_pos = rs.n_pos;
    for pass in 0..2 {
        let offset = pass * n_pos;
        for g in 0..n_pos {
            let gi = g + offset;
            if rs.height(g) == 1 {
                signs[gi] = 1;
                continue;
            }
            let mut value = None;
            for i in 0..l {
                let s = rs.simple(i);
                let s = if pass == 0 { s } else { rs.neg(s) };
                let d: Vec<i64> = rs.coeffs[gi].iter().zip(&rs.coeffs[s]).map(|(x, y)| x - y).collect();
                let Some(b) = rs.find(&d) else { continue };
                let c = q(signs[s] * signs[b] * sc.get(on_roots[s], on_roots[b])) / q(sc.get(s, b));
                let c = ratio_to_int(c);
                match value {
                    None => value = Some(c),
                    Some(v) if v != c => {
                        return Err(TodaError::Inconsistent("sign depends on decomposition".into()))
                    }
                    _ => {}
                }
            }
            signs[gi] = value.unwrap();
        }
    }
    Ok(NuAction { perm: perm.to_vec(), on_roots, signs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::Family;
    use crate::linalg::dot;
    use std::collections::HashSet;

    fn ft(f: Family, l: usize) -> FiniteType {
        FiniteType::new(f, l)
    }

    fn all_types() -> Vec<FiniteType> {
        use Family::*;
        vec![
            ft(A, 1), ft(A, 2), ft(A, 3), ft(A, 5), ft(B, 2), ft(B, 3), ft(B, 4), ft(C, 3),
            ft(C, 4), ft(D, 3), ft(D, 4), ft(D, 5), ft(E, 6), ft(E, 7), ft(E, 8), ft(F, 4), ft(G, 2),
        ]
    }

    /// Closure of the simple roots under simple reflections, computed on
    /// Euclidean vectors.
    fn reflection_closure(t: FiniteType) -> HashSet<Vec<Q>> {
        let (simple, _) = t.euclidean_simple_roots();
        let mut set: HashSet<Vec<Q>> = simple.iter().cloned().collect();
        let mut frontier: Vec<Vec<Q>> = simple.clone();
        while let Some(v) = frontier.pop() {
            for a in &simple {
                let c = q(2) * dot(&v, a) / dot(a, a);
                let w: Vec<Q> = v.iter().zip(a).map(|(x, y)| x - c * y).collect();
                if set.insert(w.clone()) {
                    frontier.push(w);
                }
            }
        }
        set
    }

    #[test]
    fn root_counts_match_reflection_closure() {
        for t in all_types() {
            let rs = build_root_system(t).unwrap();
            let oracle = reflection_closure(t);
            let ours: HashSet<Vec<Q>> = rs.euclidean.iter().cloned().collect();
            assert_eq!(ours, oracle, "{t}");
        }
        assert_eq!(build_root_system(ft(Family::E, 6)).unwrap().len(), 72);
    }

    #[test]
    fn d_roots_are_the_norm_two_integer_vectors() {
        let rs = build_root_system(ft(Family::D, 5)).unwrap();
        let mut oracle = HashSet::new();
        for a in 0..5 {
            for b in a + 1..5 {
                for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    let mut v = vec![q(0); 5];
                    v[a] = q(sa);
                    v[b] = q(sb);
                    oracle.insert(v);
                }
            }
        }
        assert_eq!(rs.euclidean.iter().cloned().collect::<HashSet<_>>(), oracle);
    }

    #[test]
    fn highest_roots() {
        let e8 = build_root_system(ft(Family::E, 8)).unwrap();
        assert_eq!(e8.coeffs[e8.highest_root()], vec![2, 3, 4, 6, 5, 4, 3, 2]);
        let g2 = build_root_system(ft(Family::G, 2)).unwrap();
        assert_eq!(g2.coeffs[g2.highest_root()], vec![3, 2]);
        let f4 = build_root_system(ft(Family::F, 4)).unwrap();
        assert_eq!(f4.coeffs[f4.highest_root()], vec![2, 3, 4, 2]);
    }

    #[test]
    fn structure_constant_identities() {
        for t in all_types() {
            let rs = build_root_system(t).unwrap();
            let sc = StructureConstants::new(&rs);
            for (&(x, y), &n) in sc.pairs() {
                let p = rs.string_down(x, y);
                assert_eq!(n.abs(), p + 1, "{t}");
                assert_eq!(sc.get(y, x), -n, "{t}");
                assert_eq!(n * sc.get(rs.neg(x), rs.neg(y)), -(p + 1) * (p + 1), "{t}");
                let z = rs.neg(rs.add(x, y).unwrap());
                let lhs = q(n) / rs.norm2(z);
                assert_eq!(lhs, q(sc.get(y, z)) / rs.norm2(x), "{t}");
                assert_eq!(lhs, q(sc.get(z, x)) / rs.norm2(y), "{t}");
            }
            for (g, es) in sc.extraspecial.iter().enumerate() {
                if let Some((a, b)) = es {
                    assert!(sc.get(*a, *b) > 0);
                    assert_eq!(rs.add(*a, *b), Some(g));
                }
            }
        }
    }

    /// Sparse element of g: Cartan part (coroot basis) plus root part.
    #[derive(Clone, Default, PartialEq, Debug)]
    struct Elt {
        h: Vec<Q>,
        e: HashMap<usize, Q>,
    }

    impl Elt {
        fn zero(l: usize) -> Self {
            Elt { h: vec![Q::zero(); l], e: HashMap::new() }
        }
        fn add_scaled(&mut self, other: &Elt, c: Q) {
            for (a, b) in self.h.iter_mut().zip(&other.h) {
                *a += c * b;
            }
            for (k, v) in &other.e {
                *self.e.entry(*k).or_insert(Q::zero()) += c * v;
            }
            self.e.retain(|_, v| !v.is_zero());
        }
    }

    fn basis(rs: &RootSystem, i: usize) -> Elt {
        let mut b = Elt::zero(rs.rank);
        if i < rs.rank {
            b.h[i] = q(1);
        } else {
            b.e.insert(i - rs.rank, q(1));
        }
        b
    }

    fn bracket_basis(rs: &RootSystem, sc: &StructureConstants, a: usize, b: usize) -> Elt {
        let l = rs.rank;
        let mut out = Elt::zero(l);
        match (a < l, b < l) {
            (true, true) => {}
            (true, false) => {
                let x = b - l;
                let pairing: i64 = (0..l).map(|j| rs.coeffs[x][j] * rs.cartan[j][a]).sum();
                if pairing != 0 {
                    out.e.insert(x, q(pairing));
                }
            }
            (false, true) => {
                let mut t = Elt::zero(l);
                t.add_scaled(&bracket_basis(rs, sc, b, a), q(-1));
                return t;
            }
            (false, false) => {
                let (x, y) = (a - l, b - l);
                if rs.neg(x) == y {
                    // H_x = sum_i c_i |a_i|^2/|x|^2 H_i
                    for i in 0..l {
                        out.h[i] = q(rs.coeffs[x][i]) * rs.gram[i][i] / rs.norm2(x);
                    }
                } else if let Some(s) = rs.add(x, y) {
                    out.e.insert(s, q(sc.get(x, y)));
                }
            }
        }
        out
    }

    fn bracket(rs: &RootSystem, sc: &StructureConstants, u: &Elt, v: &Elt) -> Elt {
        let l = rs.rank;
        let expand = |x: &Elt| -> Vec<(usize, Q)> {
            let mut t: Vec<(usize, Q)> =
                x.h.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, *c)).collect();
            t.extend(x.e.iter().map(|(k, c)| (k + l, *c)));
            t
        };
        let mut out = Elt::zero(l);
        for (i, ci) in expand(u) {
            for (j, cj) in expand(v) {
                out.add_scaled(&bracket_basis(rs, sc, i, j), ci * cj);
            }
        }
        out
    }

    fn check_jacobi(t: FiniteType, triples: Option<usize>) {
        let rs = build_root_system(t).unwrap();
        let sc = StructureConstants::new(&rs);
        let dim = rs.rank + rs.len();
        let run = |a: usize, b: usize, c: usize| {
            let (x, y, z) = (basis(&rs, a), basis(&rs, b), basis(&rs, c));
            let mut s = bracket(&rs, &sc, &x, &bracket(&rs, &sc, &y, &z));
            s.add_scaled(&bracket(&rs, &sc, &y, &bracket(&rs, &sc, &z, &x)), q(1));
            s.add_scaled(&bracket(&rs, &sc, &z, &bracket(&rs, &sc, &x, &y)), q(1));
            assert_eq!(s, Elt::zero(rs.rank), "{t}: Jacobi fails on ({a},{b},{c})");
        };
        match triples {
            None => {
                for a in 0..dim {
                    for b in a + 1..dim {
                        for c in b + 1..dim {
                            run(a, b, c);
                        }
                    }
                }
            }
            Some(n) => {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
                for _ in 0..n {
                    run(rng.gen_range(0..dim), rng.gen_range(0..dim), rng.gen_range(0..dim));
                }
            }
        }
    }

    #[test]
    fn jacobi_identity_small_types() {
        use Family::*;
        for t in [ft(A, 1), ft(A, 2), ft(A, 3), ft(B, 2), ft(B, 3), ft(C, 3), ft(D, 4), ft(G, 2)] {
            check_jacobi(t, None);
        }
    }

    #[test]
    fn jacobi_identity_sampled_large_types() {
        use Family::*;
        for t in [ft(F, 4), ft(E, 6), ft(E, 7), ft(E, 8)] {
            check_jacobi(t, Some(3000));
        }
    }

    #[test]
    fn a2_swap_negates_the_fixed_root() {
        let rs = build_root_system(ft(Family::A, 2)).unwrap();
        let sc = StructureConstants::new(&rs);
        let nu = nu_action(&rs, &sc, &[1, 0]).unwrap();
        let top = rs.find(&[1, 1]).unwrap();
        assert!(nu.is_fixed(top));
        assert_eq!(nu.signs[top], -1);
        assert_eq!(nu.signs[rs.neg(top)], -1);
    }

    #[test]
    fn nu_actions_are_automorphisms_of_the_right_order() {
        use Family::*;
        let cases: Vec<(FiniteType, Vec<usize>, usize)> = vec![
            (ft(A, 4), vec![3, 2, 1, 0], 2),
            (ft(A, 5), vec![4, 3, 2, 1, 0], 2),
            (ft(D, 4), vec![0, 1, 3, 2], 2),
            (ft(D, 5), vec![0, 1, 2, 4, 3], 2),
            (ft(E, 6), vec![5, 1, 4, 3, 2, 0], 2),
            (ft(D, 4), vec![2, 1, 3, 0], 3),
        ];
        for (t, perm, order) in cases {
            let rs = build_root_system(t).unwrap();
            let sc = StructureConstants::new(&rs);
            let nu = nu_action(&rs, &sc, &perm).unwrap();
            assert_eq!(nu.order(), order);
            for (&(x, y), &n) in sc.pairs() {
                let s = rs.add(x, y).unwrap();
                assert_eq!(
                    nu.signs[x] * nu.signs[y] * sc.get(nu.on_roots[x], nu.on_roots[y]),
                    nu.signs[s] * n,
                    "{t}"
                );
            }
            for x in 0..rs.len() {
                assert_eq!(nu.signs[x], nu.signs[rs.neg(x)]);
                let mut prod = 1;
                let mut cur = x;
                for _ in 0..order {
                    prod *= nu.signs[cur];
                    cur = nu.on_roots[cur];
                }
                assert_eq!(cur, x);
                assert_eq!(prod, 1, "{t}: nu^n is not the identity");
            }
        }
    }

    #[test]
    fn rejects_non_automorphism() {
        let rs = build_root_system(ft(Family::B, 3)).unwrap();
        let sc = StructureConstants::new(&rs);
        assert!(nu_action(&rs, &sc, &[2, 1, 0]).is_err());
    }
}
