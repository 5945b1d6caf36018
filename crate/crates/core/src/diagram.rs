//! Catalog of affine Dynkin diagrams of twist 1, 2 and 3.
//!
//! Vertex 0 is always the affine vertex. Untwisted diagrams use Bourbaki
//! numbering for vertices 1..r. Twisted diagrams are numbered so that the
//! vertex j >= 1 is the restriction of the j-th orbit representative of
//! the folded finite diagram (see [`crate::affine_roots::folding_data`]).

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cartan::{Family, FiniteType};
use crate::error::{Result, TodaError};
use crate::linalg::{int_matrix_to_q, null_space, primitive_integer, q, transpose, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiagramId {
    pub family: Family,
    /// Rank of the finite simple algebra g whose loop algebra is realized.
    pub rank: usize,
    pub twist: u8,
}

impl DiagramId {
    pub fn new(family: Family, rank: usize, twist: u8) -> Result<Self> {
        let id = DiagramId { family, rank, twist };
        if id.is_legal() {
            Ok(id)
        } else {
            Err(TodaError::IllegalDiagram(id.to_string()))
        }
    }

    pub fn is_legal(&self) -> bool {
        let l = self.rank;
        match (self.twist, self.family) {
            (1, Family::A) => l >= 1,
            (1, Family::B) => l >= 3,
            (1, Family::C) => l >= 2,
            (1, Family::D) => l >= 4,
            (1, Family::E) => (6..=8).contains(&l),
            (1, Family::F) => l == 4,
            (1, Family::G) => l == 2,
            (2, Family::A) => l >= 2,
            (2, Family::D) => l >= 3,
            (2, Family::E) => l == 6,
            (3, Family::D) => l == 4,
            _ => false,
        }
    }

    /// Number of non-affine vertices.
    pub fn affine_rank(&self) -> usize {
        match (self.twist, self.family) {
            (1, _) => self.rank,
            (2, Family::A) => self.rank.div_ceil(2),
            (2, Family::D) => self.rank - 1,
            (2, Family::E) => 4,
            (3, Family::D) => 2,
            _ => unreachable!("illegal diagram"),
        }
    }

    pub fn finite_type(&self) -> FiniteType {
        FiniteType::new(self.family, self.rank)
    }

    /// All legal ids with `rank <= max_rank`.
    pub fn all(max_rank: usize) -> Vec<DiagramId> {
        use Family::*;
        let mut out = Vec::new();
        for twist in 1..=3u8 {
            for family in [A, B, C, D, E, F, G] {
                for rank in 1..=max_rank {
                    let id = DiagramId { family, rank, twist };
                    if id.is_legal() {
                        out.push(id);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for DiagramId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}~{}", self.family.letter(), self.rank, self.twist)
    }
}

impl FromStr for DiagramId {
    type Err = TodaError;

    fn from_str(s: &str) -> Result<Self> {
        let err = || TodaError::Parse(s.to_string());
        let (head, twist) = s.trim().split_once('~').ok_or_else(err)?;
        let mut chars = head.chars();
        let family = chars.next().and_then(Family::from_letter).ok_or_else(err)?;
        let rank: usize = chars.as_str().parse().map_err(|_| err())?;
        let twist: u8 = twist.parse().map_err(|_| err())?;
        DiagramId::new(family, rank, twist)
    }
}

impl Serialize for DiagramId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DiagramId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineDiagram {
    pub id: DiagramId,
    pub cartan: Vec<Vec<i64>>,
    pub marks: Vec<i64>,
    /// Squared root lengths, maximum normalized to 2.
    pub lengths: Vec<Q>,
    pub twist: u8,
    pub symmetries: Vec<Vec<usize>>,
}

impl AffineDiagram {
    /// Number of non-affine vertices r (the matrix has size r + 1).
    pub fn r(&self) -> usize {
        self.cartan.len() - 1
    }

    pub fn coxeter_number(&self) -> i64 {
        self.twist as i64 * self.marks.iter().sum::<i64>()
    }

    /// Right null vector v_k = m_k |a_k|^2 / 2.
    pub fn right_null_vector(&self) -> Vec<Q> {
        self.marks
            .iter()
            .zip(&self.lengths)
            .map(|(&m, l)| q(m) * l / q(2))
            .collect()
    }

    /// Cartan matrix with vertex 0 deleted.
    pub fn finite_cartan(&self) -> Vec<Vec<i64>> {
        self.cartan[1..].iter().map(|row| row[1..].to_vec()).collect()
    }

    /// Gram matrix <a_j, a_k> of the affine simple roots.
    pub fn gram(&self) -> Vec<Vec<Q>> {
        let n = self.cartan.len();
        (0..n)
            .map(|j| (0..n).map(|k| q(self.cartan[j][k]) * self.lengths[k] / q(2)).collect())
            .collect()
    }

    pub fn finite_gram(&self) -> Vec<Vec<Q>> {
        self.gram()[1..].iter().map(|row| row[1..].to_vec()).collect()
    }
}

struct Bonds {
    c: Vec<Vec<i64>>,
}

impl Bonds {
    fn new(n: usize) -> Self {
        let mut c = vec![vec![0; n]; n];
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = 2;
        }
        Bonds { c }
    }
    fn simple(&mut self, j: usize, k: usize) {
        self.c[j][k] = -1;
        self.c[k][j] = -1;
    }
    /// Bond between a long vertex and a short one with length ratio `ratio`.
    fn multiple(&mut self, long: usize, short: usize, ratio: i64) {
        self.c[long][short] = -ratio;
        self.c[short][long] = -1;
    }
    fn chain(&mut self, from: usize, to: usize) {
        for j in from..to {
            self.simple(j, j + 1);
        }
    }
}

fn cartan_of(id: DiagramId) -> Vec<Vec<i64>> {
    let l = id.rank;
    let r = id.affine_rank();
    let mut b = Bonds::new(r + 1);
    match (id.twist, id.family) {
        (1, Family::A) => {
            if l == 1 {
                b.c[0][1] = -2;
                b.c[1][0] = -2;
            } else {
                b.chain(1, l);
                b.simple(0, 1);
                b.simple(0, l);
            }
        }
        (1, Family::B) => {
            b.chain(1, l - 1);
            b.multiple(l - 1, l, 2);
            b.simple(0, 2);
        }
        (1, Family::C) => {
            b.chain(1, l - 1);
            b.multiple(l, l - 1, 2);
            b.multiple(0, 1, 2);
        }
        (1, Family::D) => {
            b.chain(1, l - 1);
            b.simple(l - 2, l);
            b.simple(0, 2);
        }
        (1, Family::E) => {
            b.simple(1, 3);
            b.chain(3, l);
            b.simple(2, 4);
            match l {
                6 => b.simple(0, 2),
                7 => b.simple(0, 1),
                _ => b.simple(0, 8),
            }
        }
        (1, Family::F) => {
            b.simple(0, 1);
            b.simple(1, 2);
            b.multiple(2, 3, 2);
            b.simple(3, 4);
        }
        (1, Family::G) => {
            b.multiple(2, 1, 3);
            b.simple(0, 2);
        }
        (2, Family::A) if l % 2 == 0 => {
            if r == 1 {
                b.multiple(0, 1, 4);
            } else {
                b.multiple(0, 1, 2);
                b.chain(1, r - 1);
                b.multiple(r - 1, r, 2);
            }
        }
        (2, Family::A) => {
            if r == 2 {
                b.multiple(2, 0, 2);
                b.multiple(2, 1, 2);
            } else {
                b.simple(0, 2);
                b.chain(1, r - 1);
                b.multiple(r, r - 1, 2);
            }
        }
        (2, Family::D) => {
            b.multiple(1, 0, 2);
            b.chain(1, r - 1);
            b.multiple(r - 1, r, 2);
        }
        (2, Family::E) => {
            b.simple(0, 1);
            b.simple(1, 2);
            b.multiple(3, 2, 2);
            b.simple(3, 4);
        }
        (3, Family::D) => {
            b.simple(0, 1);
            b.multiple(2, 1, 3);
        }
        _ => unreachable!("illegal diagram"),
    }
    b.c
}

/// Squared lengths from the symmetrizability of `cartan`, max normalized to 2.
pub fn symmetrizer_lengths(cartan: &[Vec<i64>]) -> Result<Vec<Q>> {
    let n = cartan.len();
    let mut len: Vec<Option<Q>> = vec![None; n];
    len[0] = Some(Q::one());
    let mut stack = vec![0];
    while let Some(j) = stack.pop() {
        let lj = len[j].unwrap();
        for k in 0..n {
            if k == j || cartan[j][k] == 0 {
                continue;
            }
            // C[j][k] |a_k|^2 = C[k][j] |a_j|^2
            let lk = lj * q(cartan[k][j]) / q(cartan[j][k]);
            match len[k] {
                None => {
                    len[k] = Some(lk);
                    stack.push(k);
                }
                Some(prev) if prev != lk => {
                    return Err(TodaError::Inconsistent("Cartan matrix is not symmetrizable".into()))
                }
                _ => {}
            }
        }
    }
    let len: Vec<Q> = len
        .into_iter()
        .map(|x| x.ok_or_else(|| TodaError::Inconsistent("disconnected diagram".into())))
        .collect::<Result<_>>()?;
    let max = *len.iter().max().unwrap();
    Ok(len.iter().map(|x| x * q(2) / max).collect())
}

/// Primitive positive left null vector of an affine Cartan matrix.
pub fn left_marks(cartan: &[Vec<i64>]) -> Result<Vec<i64>> {
    let n = cartan.len();
    let ns = null_space(&transpose(&int_matrix_to_q(cartan)), n);
    if ns.len() != 1 {
        return Err(TodaError::Inconsistent(format!("corank {} instead of 1", ns.len())));
    }
    let m = primitive_integer(&ns[0]);
    if m.iter().any(|&x| x <= 0) {
        return Err(TodaError::Inconsistent("null vector not positive".into()));
    }
    Ok(m)
}

/// Permutations p of the vertices with C[p(i)][p(j)] = C[i][j].
pub fn diagram_automorphisms(cartan: &[Vec<i64>]) -> Vec<Vec<usize>> {
    let n = cartan.len();
    let mut out = Vec::new();
    let mut perm = vec![0; n];
    let mut used = vec![false; n];
    fn go(
        i: usize,
        c: &[Vec<i64>],
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let n = c.len();
        if i == n {
            out.push(perm.clone());
            return;
        }
        for t in 0..n {
            if used[t] {
                continue;
            }
            if (0..i).all(|j| c[i][j] == c[t][perm[j]] && c[j][i] == c[perm[j]][t]) {
                perm[i] = t;
                used[t] = true;
                go(i + 1, c, perm, used, out);
                used[t] = false;
            }
        }
    }
    go(0, cartan, &mut perm, &mut used, &mut out);
    out
}

pub fn build_diagram(id: DiagramId) -> Result<AffineDiagram> {
    if !id.is_legal() {
        return Err(TodaError::IllegalDiagram(id.to_string()));
    }
    let cartan = cartan_of(id);
    let marks = left_marks(&cartan)?;
    if marks[0] != 1 {
        return Err(TodaError::Inconsistent(format!("{id}: m0 = {}", marks[0])));
    }
    let lengths = symmetrizer_lengths(&cartan)?;
    let symmetries = diagram_automorphisms(&cartan);
    let d = AffineDiagram { id, cartan, marks, lengths, twist: id.twist, symmetries };
    let v = d.right_null_vector();
    let cv = crate::linalg::mat_vec(&int_matrix_to_q(&d.cartan), &v);
    if cv.iter().any(|x| !x.is_zero()) {
        return Err(TodaError::Inconsistent(format!("{id}: right null vector fails")));
    }
    Ok(d)
}

/// Serializable view of a diagram.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DiagramView {
    pub id: DiagramId,
    pub twist: u8,
    pub r: usize,
    pub cartan: Vec<Vec<i64>>,
    pub marks: Vec<i64>,
    pub lengths_num: Vec<i64>,
    pub lengths_den: Vec<i64>,
    pub coxeter_number: i64,
    pub symmetries: Vec<Vec<usize>>,
}

impl From<&AffineDiagram> for DiagramView {
    fn from(d: &AffineDiagram) -> Self {
        DiagramView {
            id: d.id,
            twist: d.twist,
            r: d.r(),
            cartan: d.cartan.clone(),
            marks: d.marks.clone(),
            lengths_num: d.lengths.iter().map(|x| *x.numer()).collect(),
            lengths_den: d.lengths.iter().map(|x| *x.denom()).collect(),
            coxeter_number: d.coxeter_number(),
            symmetries: d.symmetries.clone(),
        }
    }
}
