//! Finite simple types, their standard Euclidean realizations and Cartan
//! matrix identification.
//!
//! Cartan matrices follow the column convention used across the crate:
//! `C[j][k] = 2<a_j, a_k> / <a_k, a_k>`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{dot, q, qf, Q};
use num_traits::Zero;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Family {
    pub fn letter(self) -> char {
        match self {
            Family::A => 'a',
            Family::B => 'b',
            Family::C => 'c',
            Family::D => 'd',
            Family::E => 'e',
            Family::F => 'f',
            Family::G => 'g',
        }
    }

    pub fn from_letter(c: char) -> Option<Family> {
        Some(match c.to_ascii_lowercase() {
            'a' => Family::A,
            'b' => Family::B,
            'c' => Family::C,
            'd' => Family::D,
            'e' => Family::E,
            'f' => Family::F,
            'g' => Family::G,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FiniteType {
    pub family: Family,
    pub rank: usize,
}

impl fmt::Display for FiniteType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.letter(), self.rank)
    }
}

impl FiniteType {
    pub fn new(family: Family, rank: usize) -> Self {
        FiniteType { family, rank }
    }

    /// Types with a standard realization here (d3, d2 etc. included for
    /// folding purposes).
    pub fn is_realizable(&self) -> bool {
        let l = self.rank;
        match self.family {
            Family::A => l >= 1,
            Family::B => l >= 2,
            Family::C => l >= 2,
            Family::D => l >= 3,
            Family::E => (6..=8).contains(&l),
            Family::F => l == 4,
            Family::G => l == 2,
        }
    }

    /// Canonical names used when identifying components: b2 rather than c2,
    /// a3 rather than d3.
    pub fn is_canonical(&self) -> bool {
        let l = self.rank;
        match self.family {
            Family::A => l >= 1,
            Family::B => l >= 2,
            Family::C => l >= 3,
            Family::D => l >= 4,
            Family::E => (6..=8).contains(&l),
            Family::F => l == 4,
            Family::G => l == 2,
        }
    }

    pub fn dimension(&self) -> usize {
        let l = self.rank;
        match self.family {
            Family::A => l * (l + 2),
            Family::B | Family::C => l * (2 * l + 1),
            Family::D => l * (2 * l - 1),
            Family::E => match l {
                6 => 78,
                7 => 133,
                _ => 248,
            },
            Family::F => 52,
            Family::G => 14,
        }
    }

    pub fn root_count(&self) -> usize {
        self.dimension() - self.rank
    }

    /// Simple roots in the standard Euclidean coordinates together with the
    /// factor making the longest root have squared length 2.
    pub fn euclidean_simple_roots(&self) -> (Vec<Vec<Q>>, Q) {
        assert!(self.is_realizable(), "no realization for {self}");
        let l = self.rank;
        let e = |dim: usize, i: usize| -> Vec<Q> {
            let mut v = vec![Q::zero(); dim];
            v[i] = q(1);
            v
        };
        let sub = |a: Vec<Q>, b: Vec<Q>| -> Vec<Q> { a.iter().zip(&b).map(|(x, y)| x - y).collect() };
        let add = |a: Vec<Q>, b: Vec<Q>| -> Vec<Q> { a.iter().zip(&b).map(|(x, y)| x + y).collect() };
        let roots: Vec<Vec<Q>> = match self.family {
            Family::A => (0..l).map(|i| sub(e(l + 1, i), e(l + 1, i + 1))).collect(),
            Family::B => {
                let mut r: Vec<_> = (0..l - 1).map(|i| sub(e(l, i), e(l, i + 1))).collect();
                r.push(e(l, l - 1));
                r
            }
            Family::C => {
                let mut r: Vec<_> = (0..l - 1).map(|i| sub(e(l, i), e(l, i + 1))).collect();
                r.push(e(l, l - 1).iter().map(|x| x * q(2)).collect());
                r
            }
            Family::D => {
                let mut r: Vec<_> = (0..l - 1).map(|i| sub(e(l, i), e(l, i + 1))).collect();
                r.push(add(e(l, l - 2), e(l, l - 1)));
                r
            }
            Family::E => {
                let h = qf(1, 2);
                let mut a1 = vec![-h; 8];
                a1[0] = h;
                a1[7] = h;
                let mut r = vec![a1, add(e(8, 0), e(8, 1)), sub(e(8, 1), e(8, 0))];
                for i in 1..6 {
                    r.push(sub(e(8, i + 1), e(8, i)));
                }
                r.truncate(l);
                r
            }
            Family::F => {
                let h = qf(1, 2);
                vec![
                    sub(e(4, 1), e(4, 2)),
                    sub(e(4, 2), e(4, 3)),
                    e(4, 3),
                    vec![h, -h, -h, -h],
                ]
            }
            Family::G => vec![
                sub(e(3, 0), e(3, 1)),
                vec![q(-2), q(1), q(1)],
            ],
        };
        let max = roots.iter().map(|r| dot(r, r)).max().unwrap();
        (roots, q(2) / max)
    }

    /// Gram matrix of the simple roots, longest root normalized to 2.
    pub fn gram(&self) -> Vec<Vec<Q>> {
        let (roots, scale) = self.euclidean_simple_roots();
        roots
            .iter()
            .map(|a| roots.iter().map(|b| dot(a, b) * scale).collect())
            .collect()
    }

    pub fn cartan(&self) -> Vec<Vec<i64>> {
        cartan_from_gram(&self.gram())
    }
}

pub fn cartan_from_gram(gram: &[Vec<Q>]) -> Vec<Vec<i64>> {
    let n = gram.len();
    (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let v = q(2) * gram[j][k] / gram[k][k];
                    assert!(v.is_integer(), "non-integral Cartan entry");
                    v.to_integer()
                })
                .collect()
        })
        .collect()
}

/// Connected components of the Dynkin graph of a Cartan matrix, each sorted.
pub fn connected_components(cartan: &[Vec<i64>]) -> Vec<Vec<usize>> {
    let n = cartan.len();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut stack = vec![s];
        let mut comp = Vec::new();
        seen[s] = true;
        while let Some(v) = stack.pop() {
            comp.push(v);
            for w in 0..n {
                if !seen[w] && cartan[v][w] != 0 {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Find a permutation `p` with `a[i][j] == b[p[i]][p[j]]`.
pub fn cartan_isomorphism(a: &[Vec<i64>], b: &[Vec<i64>]) -> Option<Vec<usize>> {
    let n = a.len();
    if b.len() != n {
        return None;
    }
    let profile = |m: &[Vec<i64>], i: usize| {
        let mut row: Vec<i64> = m[i].clone();
        let mut col: Vec<i64> = m.iter().map(|r| r[i]).collect();
        row.sort_unstable();
        col.sort_unstable();
        (row, col)
    };
    let pa: Vec<_> = (0..n).map(|i| profile(a, i)).collect();
    let pb: Vec<_> = (0..n).map(|i| profile(b, i)).collect();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(
        i: usize,
        a: &[Vec<i64>],
        b: &[Vec<i64>],
        pa: &[(Vec<i64>, Vec<i64>)],
        pb: &[(Vec<i64>, Vec<i64>)],
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        let n = a.len();
        if i == n {
            return true;
        }
        for t in 0..n {
            if used[t] || pa[i] != pb[t] {
                continue;
            }
            let ok = (0..i).all(|j| a[i][j] == b[t][perm[j]] && a[j][i] == b[perm[j]][t])
                && a[i][i] == b[t][t];
            if ok {
                perm[i] = t;
                used[t] = true;
                if go(i + 1, a, b, pa, pb, perm, used) {
                    return true;
                }
                used[t] = false;
            }
        }
        false
    }
    if go(0, a, b, &pa, &pb, &mut perm, &mut used) {
        Some(perm)
    } else {
        None
    }
}

fn candidate_types(rank: usize) -> Vec<FiniteType> {
    use Family::*;
    [A, B, C, D, E, F, G]
        .into_iter()
        .map(|f| FiniteType::new(f, rank))
        .filter(|t| t.is_canonical())
        .collect()
}

/// Identify a connected Cartan matrix with a canonical finite type.
pub fn identify_connected(cartan: &[Vec<i64>]) -> Option<FiniteType> {
    candidate_types(cartan.len())
        .into_iter()
        .find(|t| cartan_isomorphism(cartan, &t.cartan()).is_some())
}

/// Sorted list of simple factors of a (possibly decomposable) Cartan matrix.
pub fn identify(cartan: &[Vec<i64>]) -> Option<Vec<FiniteType>> {
    let mut out = Vec::new();
    for comp in connected_components(cartan) {
        let sub: Vec<Vec<i64>> = comp
            .iter()
            .map(|&i| comp.iter().map(|&j| cartan[i][j]).collect())
            .collect();
        out.push(identify_connected(&sub)?);
    }
    out.sort();
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_cartan_matrices() {
        assert_eq!(FiniteType::new(Family::A, 2).cartan(), vec![vec![2, -1], vec![-1, 2]]);
        // b3: a3 short, entry C[1][2] = 2<a2,a3>/<a3,a3> = -2
        assert_eq!(
            FiniteType::new(Family::B, 3).cartan(),
            vec![vec![2, -1, 0], vec![-1, 2, -2], vec![0, -1, 2]]
        );
        assert_eq!(
            FiniteType::new(Family::C, 3).cartan(),
            vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -2, 2]]
        );
        // a1 short: C[1][0] = 2<a2,a1>/<a1,a1> = -3
        assert_eq!(FiniteType::new(Family::G, 2).cartan(), vec![vec![2, -1], vec![-3, 2]]);
    }

    #[test]
    fn exceptional_determinants() {
        // det of the Cartan matrix equals the index of the root lattice in the weight lattice
        let det = |t: FiniteType| {
            let m = crate::linalg::int_matrix_to_q(&t.cartan());
            let mut a = m.clone();
            let n = a.len();
            let mut d = q(1);
            for c in 0..n {
                let p = (c..n).find(|&i| !a[i][c].is_zero()).unwrap();
                if p != c {
                    a.swap(p, c);
                    d = -d;
                }
                d *= a[c][c];
                for i in c + 1..n {
                    let f = a[i][c] / a[c][c];
                    for j in c..n {
                        let t = a[c][j] * f;
                        a[i][j] -= t;
                    }
                }
            }
            d
        };
        assert_eq!(det(FiniteType::new(Family::E, 6)), q(3));
        assert_eq!(det(FiniteType::new(Family::E, 7)), q(2));
        assert_eq!(det(FiniteType::new(Family::E, 8)), q(1));
        assert_eq!(det(FiniteType::new(Family::F, 4)), q(1));
        assert_eq!(det(FiniteType::new(Family::D, 5)), q(4));
        assert_eq!(det(FiniteType::new(Family::A, 4)), q(5));
    }

    #[test]
    fn identification_handles_small_coincidences() {
        let d3 = FiniteType::new(Family::D, 3).cartan();
        assert_eq!(identify(&d3).unwrap(), vec![FiniteType::new(Family::A, 3)]);
        let c2 = FiniteType::new(Family::C, 2).cartan();
        assert_eq!(identify(&c2).unwrap(), vec![FiniteType::new(Family::B, 2)]);
        let e7 = FiniteType::new(Family::E, 7).cartan();
        assert_eq!(identify(&e7).unwrap(), vec![FiniteType::new(Family::E, 7)]);
    }

    #[test]
    fn identification_of_disconnected_matrix() {
        let m = vec![vec![2, 0, 0], vec![0, 2, -1], vec![0, -1, 2]];
        assert_eq!(
            identify(&m).unwrap(),
            vec![FiniteType::new(Family::A, 1), FiniteType::new(Family::A, 2)]
        );
    }
}
