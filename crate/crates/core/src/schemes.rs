//! Symmetric association schemes and their Bose–Mesner algebra.
//!
//! Two routes lead to [`SchemeParameters`]:
//!
//! * the explicit route works on a [`RelationPartition`] of `X × X`: it counts
//!   intersection numbers exactly, extracts the primitive idempotents from a
//!   generic element of the algebra, and reads `P` and `Q` off the matrices;
//! * the parametric route starts from the intersection numbers alone and
//!   diagonalizes the (commuting) intersection matrices, which keeps large
//!   families such as `J(51, 3)` within reach.
//!
//! Both routes order the idempotents canonically: `E_0 = J/n` first, then by
//! decreasing eigenvalue of `A_1`, ties broken by increasing rank.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graphs::{content_lines, distance_data, lagrange_projector, Graph, GraphError};
use crate::numerics::{
    cluster_values, eigen_clusters, from_usize, lit, snap, NumericsError, Scalar, SquareMatrix, SymMatrix,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("axiom {axiom} violated at ({x}, {y}): {msg}")]
    Axiom { axiom: u8, x: usize, y: usize, msg: String },
    #[error("relation label {label} at ({x}, {y}) exceeds class count {d}")]
    LabelOutOfRange { x: usize, y: usize, label: u32, d: usize },
    #[error("relation class {0} is empty")]
    EmptyClass(usize),
    #[error("degenerate scheme: need at least 2 points and 1 class (n = {n}, d = {d})")]
    Degenerate { n: usize, d: usize },
    #[error(
        "axiom 4 violated (not a scheme): p_{{{i},{j}}}^{{{k}}} differs between pairs ({x1}, {y1}) and ({x2}, {y2}): {v1} vs {v2}"
    )]
    NotAScheme { i: usize, j: usize, k: usize, x1: usize, y1: usize, v1: i64, x2: usize, y2: usize, v2: i64 },
    #[error("inconsistent intersection numbers: {0}")]
    InconsistentTensor(String),
    #[error("intersection matrices B_{0} and B_{1} do not commute")]
    NonCommuting(usize, usize),
    #[error("generic element degenerate after reseeding: no seed produced {expected} distinct eigenvalues")]
    DegenerateGenericElement { expected: usize },
    #[error("PQ ≠ nI: max deviation {0}")]
    PqMismatch(f64),
    #[error("singular P")]
    SingularP,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Labels `0..=d` on `X × X`, one relation per label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationPartition {
    n: usize,
    d: usize,
    labels: Vec<u32>,
}

impl RelationPartition {
    /// Checks axioms 1–3: `R_0` is the diagonal, the classes partition
    /// `X × X` into nonempty relations, and every relation is symmetric.
    pub fn new(n: usize, d: usize, labels: Vec<u32>) -> Result<Self, SchemeError> {
        if n < 2 || d == 0 {
            return Err(SchemeError::Degenerate { n, d });
        }
        assert_eq!(labels.len(), n * n, "label matrix must be n × n");
        let mut seen = vec![false; d + 1];
        for x in 0..n {
            for y in 0..n {
                let l = labels[x * n + y];
                if l as usize > d {
                    return Err(SchemeError::LabelOutOfRange { x, y, label: l, d });
                }
                if (x == y) != (l == 0) {
                    return Err(SchemeError::Axiom {
                        axiom: 1,
                        x,
                        y,
                        msg: format!("R_0 must be the diagonal, but the label is {l}"),
                    });
                }
                if labels[y * n + x] != l {
                    return Err(SchemeError::Axiom {
                        axiom: 3,
                        x,
                        y,
                        msg: format!("label {l} but ({y}, {x}) has label {}", labels[y * n + x]),
                    });
                }
                seen[l as usize] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(SchemeError::EmptyClass(i));
        }
        Ok(Self { n, d, labels })
    }

    /// Distance partition of a connected graph.
    pub fn from_distances(g: &Graph) -> Result<Self, SchemeError> {
        let dd = distance_data(g);
        if !dd.connected {
            return Err(GraphError::NotConnected.into());
        }
        let n = g.n();
        let labels = (0..n * n).map(|p| dd.dist(p / n, p % n)).collect();
        Self::new(n, dd.diameter as usize, labels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Class count.
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn label(&self, x: usize, y: usize) -> usize {
        self.labels[x * self.n + y] as usize
    }

    pub fn adjacency<T: Scalar>(&self, i: usize) -> SymMatrix<T> {
        let mut m = SymMatrix::zeros(self.n);
        for x in 0..self.n {
            for y in x..self.n {
                if self.label(x, y) == i {
                    m.set(x, y, T::one());
                }
            }
        }
        m
    }

    /// The graph `(X, R_i)`.
    pub fn relation_graph(&self, i: usize) -> Graph {
        Graph::from_predicate(self.n, |x, y| self.label(x, y) == i)
    }

    /// Some pair in `R_i`, searched from the first row.
    pub fn representative(&self, i: usize) -> (usize, usize) {
        (0..self.n * self.n)
            .map(|p| (p / self.n, p % self.n))
            .find(|&(x, y)| self.label(x, y) == i)
            .expect("classes are nonempty")
    }

    /// Relabels classes: class `i` becomes `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self, SchemeError> {
        let labels = self.labels.iter().map(|&l| perm[l as usize] as u32).collect();
        Self::new(self.n, self.d, labels)
    }

    /// Parses the relation-matrix format: header `n d`, then `n` rows of `n`
    /// labels in `0..=d`.
    pub fn parse(text: &str) -> Result<Self, SchemeError> {
        let mut lines = content_lines(text);
        let (hline, header) = lines.next().ok_or(SchemeError::Parse { line: 0, msg: "empty input".into() })?;
        let hv = parse_ints(hline, header)?;
        if hv.len() != 2 || hv.iter().any(|&v| v < 0) {
            return Err(SchemeError::Parse { line: hline, msg: "header must be `n d`".into() });
        }
        let (n, d) = (hv[0] as usize, hv[1] as usize);
        let mut labels = Vec::with_capacity(n * n);
        let mut rows = 0;
        for (line, body) in lines {
            let row = parse_ints(line, body)?;
            if row.len() != n {
                return Err(SchemeError::Parse { line, msg: format!("expected {n} labels, found {}", row.len()) });
            }
            if let Some(bad) = row.iter().find(|&&v| v < 0 || v > d as i64) {
                return Err(SchemeError::Parse { line, msg: format!("label {bad} outside 0..={d}") });
            }
            labels.extend(row.into_iter().map(|v| v as u32));
            rows += 1;
        }
        if rows != n {
            return Err(SchemeError::Parse { line: hline, msg: format!("expected {n} rows, found {rows}") });
        }
        Self::new(n, d, labels)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.d);
        for x in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|y| self.label(x, y).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

fn parse_ints(line: usize, body: &str) -> Result<Vec<i64>, SchemeError> {
    body.split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|e| SchemeError::Parse { line, msg: format!("bad integer {t:?}: {e}") }))
        .collect()
}

/// Intersection numbers `p_ij^k`, exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionNumbers {
    d: usize,
    p: Vec<i64>,
}

impl IntersectionNumbers {
    pub fn zeros(d: usize) -> Self {
        Self { d, p: vec![0; (d + 1).pow(3)] }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * (self.d + 1) + j) * (self.d + 1) + k
    }

    /// `p_ij^k`
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> i64 {
        self.p[self.idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: i64) {
        let ix = self.idx(i, j, k);
        self.p[ix] = v;
    }

    /// `k_i = p_ii^0`
    pub fn degrees(&self) -> Vec<i64> {
        (0..=self.d).map(|i| self.get(i, i, 0)).collect()
    }

    /// `|X| = Σ k_i`
    pub fn point_count(&self) -> i64 {
        self.degrees().iter().sum()
    }

    /// `B_i` with `(B_i)_{kj} = p_ij^k`.
    pub fn intersection_matrix(&self, i: usize) -> Vec<Vec<i64>> {
        (0..=self.d).map(|k| (0..=self.d).map(|j| self.get(i, j, k)).collect()).collect()
    }

    /// Checks the identities every symmetric scheme satisfies: `p_ij^k = p_ji^k`,
    /// `p_0j^k = δ_jk`, `p_ij^0 = δ_ij k_i`, `Σ_j p_ij^k = k_i`,
    /// `k_k p_ij^k = k_j p_ik^j`, and commuting intersection matrices.
    pub fn check_consistency(&self) -> Result<(), SchemeError> {
        let d = self.d;
        let k = self.degrees();
        let bad = |m: String| Err(SchemeError::InconsistentTensor(m));
        if k[0] != 1 {
            return bad(format!("p_00^0 = {} (expected 1)", k[0]));
        }
        if let Some(i) = k.iter().position(|&v| v <= 0) {
            return bad(format!("k_{i} = {} is not positive", k[i]));
        }
        for i in 0..=d {
            for j in 0..=d {
                for kk in 0..=d {
                    let v = self.get(i, j, kk);
                    if v < 0 {
                        return bad(format!("p_{i}{j}^{kk} = {v} is negative"));
                    }
                    if v != self.get(j, i, kk) {
                        return bad(format!("p_{i}{j}^{kk} ≠ p_{j}{i}^{kk}"));
                    }
                    if i == 0 && v != (j == kk) as i64 {
                        return bad(format!("p_0{j}^{kk} = {v}"));
                    }
                    if kk == 0 && v != if i == j { k[i] } else { 0 } {
                        return bad(format!("p_{i}{j}^0 = {v}"));
                    }
                    if k[kk] * v != k[j] * self.get(i, kk, j) {
                        return bad(format!("k_{kk} p_{i}{j}^{kk} ≠ k_{j} p_{i}{kk}^{j}"));
                    }
                }
            }
            for kk in 0..=d {
                let row: i64 = (0..=d).map(|j| self.get(i, j, kk)).sum();
                if row != k[i] {
                    return bad(format!("Σ_j p_{i}j^{kk} = {row} ≠ k_{i} = {}", k[i]));
                }
            }
        }
        let mats: Vec<Vec<Vec<i64>>> = (0..=d).map(|i| self.intersection_matrix(i)).collect();
        let mul = |a: &Vec<Vec<i64>>, b: &Vec<Vec<i64>>| -> Vec<Vec<i128>> {
            (0..=d)
                .map(|r| (0..=d).map(|c| (0..=d).map(|t| a[r][t] as i128 * b[t][c] as i128).sum()).collect())
                .collect()
        };
        for i in 1..=d {
            for j in (i + 1)..=d {
                if mul(&mats[i], &mats[j]) != mul(&mats[j], &mats[i]) {
                    return Err(SchemeError::NonCommuting(i, j));
                }
            }
        }
        Ok(())
    }

    /// Parses the tensor format: header `n d`, then quadruples `i j k p`;
    /// absent quadruples are zero. Returns the point count with the tensor.
    pub fn parse(text: &str) -> Result<(usize, Self), SchemeError> {
        let mut lines = content_lines(text);
        let (hline, header) = lines.next().ok_or(SchemeError::Parse { line: 0, msg: "empty input".into() })?;
        let hv = parse_ints(hline, header)?;
        if hv.len() != 2 || hv.iter().any(|&v| v < 0) {
            return Err(SchemeError::Parse { line: hline, msg: "header must be `n d`".into() });
        }
        let (n, d) = (hv[0] as usize, hv[1] as usize);
        let mut t = Self::zeros(d);
        for (line, body) in lines {
            let q = parse_ints(line, body)?;
            if q.len() != 4 {
                return Err(SchemeError::Parse { line, msg: format!("expected `i j k p`, found {} values", q.len()) });
            }
            if q[..3].iter().any(|&v| v < 0 || v > d as i64) {
                return Err(SchemeError::Parse { line, msg: format!("index outside 0..={d}") });
            }
            t.set(q[0] as usize, q[1] as usize, q[2] as usize, q[3]);
        }
        Ok((n, t))
    }

    /// Writes every quadruple, zeros included.
    pub fn to_text(&self, n: usize) -> String {
        let mut out = format!("{n} {}\n", self.d);
        for i in 0..=self.d {
            for j in 0..=self.d {
                for k in 0..=self.d {
                    out.push_str(&format!("{i} {j} {k} {}\n", self.get(i, j, k)));
                }
            }
        }
        out
    }
}

/// Axiom 4: for every `(i, j, k)` the count `|{z : (x,z) ∈ R_i, (z,y) ∈ R_j}|`
/// is the same for all `(x, y) ∈ R_k`. Returns the exact intersection numbers.
pub fn validate_scheme(rel: &RelationPartition) -> Result<IntersectionNumbers, SchemeError> {
    let n = rel.n;
    let d = rel.d;
    let w = d + 1;
    let mut p = IntersectionNumbers::zeros(d);
    let mut first: Vec<Option<(usize, usize)>> = vec![None; w];
    let mut counts = vec![0i64; w * w];
    for x in 0..n {
        let row_x = &rel.labels[x * n..(x + 1) * n];
        for y in 0..n {
            let k = rel.label(x, y);
            counts.iter_mut().for_each(|c| *c = 0);
            for z in 0..n {
                counts[row_x[z] as usize * w + rel.labels[z * n + y] as usize] += 1;
            }
            match first[k] {
                None => {
                    first[k] = Some((x, y));
                    for i in 0..w {
                        for j in 0..w {
                            p.set(i, j, k, counts[i * w + j]);
                        }
                    }
                }
                Some((x1, y1)) => {
                    for i in 0..w {
                        for j in 0..w {
                            let (v1, v2) = (p.get(i, j, k), counts[i * w + j]);
                            if v1 != v2 {
                                return Err(SchemeError::NotAScheme { i, j, k, x1, y1, v1, x2: x, y2: y, v2 });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(p)
}

/// Seed sets for the generic-element draws. Each set holds the primary seed
/// and two reseeds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SeedSet {
    #[default]
    Primary,
    Alternate,
}

impl SeedSet {
    pub fn seeds(self) -> [u64; 3] {
        match self {
            SeedSet::Primary => [0x5EED_0001, 0x5EED_0002, 0x5EED_0003],
            SeedSet::Alternate => [0xA17E_0001, 0xA17E_0002, 0xA17E_0003],
        }
    }
}

pub(crate) fn generic_coefficients<T: Scalar>(seed: u64, count: usize) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| lit(rng.gen_range(1.0..2.0))).collect()
}

/// Krein parameters `q_ij^k`, defined by `E_i ∘ E_j = (1/n) Σ_k q_ij^k E_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct KreinParameters<T> {
    d: usize,
    q: Vec<T>,
}

impl<T: Scalar> KreinParameters<T> {
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.q[(i * (self.d + 1) + j) * (self.d + 1) + k]
    }

    /// Most negative parameter (Krein condition holds when this is ≥ -tol).
    pub fn min(&self) -> T {
        self.q.iter().copied().fold(T::infinity(), T::min)
    }

    fn permuted(&self, perm: &[usize]) -> Self {
        let w = self.d + 1;
        let mut q = vec![T::zero(); w * w * w];
        for i in 0..w {
            for j in 0..w {
                for k in 0..w {
                    q[(i * w + j) * w + k] = self.get(perm[i], perm[j], perm[k]);
                }
            }
        }
        Self { d: self.d, q }
    }
}

/// Eigenmatrices and derived parameters of a symmetric scheme.
///
/// `p` holds `P_i(j)` at row `j`, column `i`; `q` likewise holds `Q_i(j)`.
#[derive(Clone, Debug)]
pub struct SchemeParameters<T> {
    pub n: usize,
    pub d: usize,
    pub intersection: IntersectionNumbers,
    pub p: SquareMatrix<T>,
    pub q: SquareMatrix<T>,
    /// `k_i`, exact.
    pub degrees: Vec<u64>,
    /// `m_i = Q_i(0)`
    pub multiplicities: Vec<T>,
    pub krein: KreinParameters<T>,
}

impl<T: Scalar> SchemeParameters<T> {
    /// `P_i(j)`: eigenvalue of `A_i` on the image of `E_j`.
    #[inline]
    pub fn p_value(&self, i: usize, j: usize) -> T {
        self.p.get(j, i)
    }

    /// `Q_i(j)`
    #[inline]
    pub fn q_value(&self, i: usize, j: usize) -> T {
        self.q.get(j, i)
    }

    /// `(P_i(0), …, P_i(d))`
    pub fn p_sequence(&self, i: usize) -> Vec<T> {
        (0..=self.d).map(|j| self.p_value(i, j)).collect()
    }

    /// `(Q_i(0), …, Q_i(d))`
    pub fn q_sequence(&self, i: usize) -> Vec<T> {
        (0..=self.d).map(|j| self.q_value(i, j)).collect()
    }

    /// Max-abs entry of `PQ - nI`.
    pub fn pq_deviation(&self) -> T {
        let prod = self.p.matmul(&self.q);
        let n: T = from_usize(self.n);
        let mut worst = T::zero();
        for i in 0..=self.d {
            for j in 0..=self.d {
                let target = if i == j { n } else { T::zero() };
                worst = worst.max((prod.get(i, j) - target).abs());
            }
        }
        worst
    }

    /// Max-abs deviation of `Σ_j m_j P_i(j) P_l(j) = n k_i δ_il`.
    pub fn orthogonality_deviation(&self) -> T {
        let n: T = from_usize(self.n);
        let mut worst = T::zero();
        for i in 0..=self.d {
            for l in 0..=self.d {
                let s: T = (0..=self.d)
                    .map(|j| self.multiplicities[j] * self.p_value(i, j) * self.p_value(l, j))
                    .sum();
                let target = if i == l { n * from_usize(self.degrees[i] as usize) } else { T::zero() };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    /// Reorders idempotents so that new index `a` is old index `perm[a]`.
    pub fn with_idempotent_order(&self, perm: &[usize]) -> Self {
        let id: Vec<usize> = (0..=self.d).collect();
        Self {
            p: self.p.permuted(perm, &id),
            q: self.q.permuted(&id, perm),
            multiplicities: perm.iter().map(|&a| self.multiplicities[a]).collect(),
            krein: self.krein.permuted(perm),
            ..self.clone()
        }
    }
}

/// Max-abs distance between two parameter sets of the same scheme, after
/// matching idempotents by their `P` rows. `None` if the shapes differ or the
/// rows cannot be matched.
pub fn parameter_distance<T: Scalar>(a: &SchemeParameters<T>, b: &SchemeParameters<T>) -> Option<T> {
    if a.n != b.n || a.d != b.d || a.degrees != b.degrees {
        return None;
    }
    let w = a.d + 1;
    let row_dist = |x: usize, y: usize| (0..w).fold(T::zero(), |m, c| m.max((a.p.get(x, c) - b.p.get(y, c)).abs()));
    let mut perm = vec![usize::MAX; w];
    let mut used = vec![false; w];
    for (x, slot) in perm.iter_mut().enumerate() {
        let best = (0..w)
            .filter(|&y| !used[y])
            .min_by(|&y1, &y2| row_dist(x, y1).partial_cmp(&row_dist(x, y2)).expect("finite"))?;
        used[best] = true;
        *slot = best;
    }
    let b = b.with_idempotent_order(&perm);
    Some(a.p.max_abs_diff(&b.p).max(a.q.max_abs_diff(&b.q)))
}

/// Sorts idempotent indices canonically given their `P` rows and ranks:
/// the trivial one (row equal to the degrees) first, then decreasing
/// `P_1`, then increasing rank.
fn canonical_order<T: Scalar>(rows: &[Vec<T>], ranks: &[T], degrees: &[u64], tol: T) -> Vec<usize> {
    let w = rows.len();
    let trivial_dev = |l: usize| {
        (0..w).fold(T::zero(), |m, i| m.max((rows[l][i] - from_usize(degrees[i] as usize)).abs()))
    };
    let zero = (0..w)
        .min_by(|&a, &b| trivial_dev(a).partial_cmp(&trivial_dev(b)).expect("finite"))
        .expect("nonempty");
    let mut rest: Vec<usize> = (0..w).filter(|&l| l != zero).collect();
    rest.sort_by(|&a, &b| {
        let (pa, pb) = (rows[a][1], rows[b][1]);
        if (pa - pb).abs() > tol {
            pb.partial_cmp(&pa).expect("finite")
        } else {
            ranks[a].partial_cmp(&ranks[b]).expect("finite")
        }
    });
    std::iter::once(zero).chain(rest).collect()
}

/// Primitive idempotents `E_0 … E_d` in canonical order.
///
/// They are the spectral projectors of a generic element `Σ c_i A_i` with
/// fixed pseudo-random `c_i ∈ [1, 2)`. When that element has `d + 1` distinct
/// eigenvalues its projectors are exactly the primitive idempotents; each
/// one is still checked to be a common eigenprojector of every `A_i`. Other
/// outcomes trigger a reseed, and the call fails after the third seed.
pub fn idempotents<T: Scalar>(
    rel: &RelationPartition,
    tol: T,
    seeds: SeedSet,
) -> Result<Vec<SymMatrix<T>>, SchemeError> {
    let d = rel.d;
    let n = rel.n;
    let adj: Vec<SymMatrix<T>> = (0..=d).map(|i| rel.adjacency(i)).collect();
    let degrees: Vec<u64> = (0..=d).map(|i| (0..n).filter(|&y| rel.label(0, y) == i).count() as u64).collect();
    let max_degree: T = from_usize(*degrees.iter().max().expect("nonempty") as usize);
    let check_tol = lit::<T>(1e3) * tol * (T::one() + max_degree);

    'seeds: for seed in seeds.seeds() {
        let c = generic_coefficients::<T>(seed, d);
        let mut generic = SymMatrix::zeros(n);
        for (i, &ci) in c.iter().enumerate() {
            generic = generic.add_scaled(ci, &adj[i + 1]);
        }
        let Ok(spec) = eigen_clusters(&generic, tol) else { continue };
        if spec.len() != d + 1 {
            continue;
        }
        let proj: Vec<SymMatrix<T>> = (0..=d).map(|l| lagrange_projector(&generic, &spec.values, l)).collect();
        let ranks: Vec<T> = proj.iter().map(|e| e.trace()).collect();
        let mut rows = Vec::with_capacity(d + 1);
        for (e, &m) in proj.iter().zip(&ranks) {
            let row: Vec<T> = adj.iter().map(|a| a.frobenius_inner(e) / m).collect();
            for (a, &theta) in adj.iter().zip(&row) {
                if a.matmul(e).max_abs_diff(&e.scale(theta)) > check_tol {
                    continue 'seeds;
                }
            }
            rows.push(row);
        }
        let order = canonical_order(&rows, &ranks, &degrees, tol);
        return Ok(order.into_iter().map(|l| proj[l].clone()).collect());
    }
    Err(SchemeError::DegenerateGenericElement { expected: d + 1 })
}

/// `q_ij^k = n ⟨E_i ∘ E_j, E_k⟩ / m_k`, via Frobenius inner products.
pub fn krein_parameters<T: Scalar>(idempotents: &[SymMatrix<T>]) -> KreinParameters<T> {
    let w = idempotents.len();
    let n: T = from_usize(idempotents[0].n());
    let ranks: Vec<T> = idempotents.iter().map(|e| e.trace()).collect();
    let mut q = vec![T::zero(); w * w * w];
    for i in 0..w {
        for j in i..w {
            let h = idempotents[i].hadamard(&idempotents[j]);
            for k in 0..w {
                let v = n * h.frobenius_inner(&idempotents[k]) / ranks[k];
                q[(i * w + j) * w + k] = v;
                q[(j * w + i) * w + k] = v;
            }
        }
    }
    KreinParameters { d: w - 1, q }
}

/// Krein parameters from `P` and the multiplicities:
/// `q_ij^k = (m_i m_j / n) Σ_l P_l(i) P_l(j) P_l(k) / k_l²`.
fn krein_from_eigenmatrix<T: Scalar>(p: &SquareMatrix<T>, degrees: &[u64], mults: &[T], n: usize) -> KreinParameters<T> {
    let w = degrees.len();
    let nf: T = from_usize(n);
    let mut q = vec![T::zero(); w * w * w];
    for i in 0..w {
        for j in 0..w {
            for k in 0..w {
                let s: T = (0..w)
                    .map(|l| {
                        let kl: T = from_usize(degrees[l] as usize);
                        p.get(i, l) * p.get(j, l) * p.get(k, l) / (kl * kl)
                    })
                    .sum();
                q[(i * w + j) * w + k] = mults[i] * mults[j] / nf * s;
            }
        }
    }
    KreinParameters { d: w - 1, q }
}

/// `P` and `Q` of an explicit scheme. `P_i(j)` is `⟨A_i, E_j⟩ / tr E_j` and
/// `Q_i(j)` is `n (E_i)_{xy}` at a representative `(x, y) ∈ R_j`. Values within
/// `tol` of an integer are snapped.
pub fn eigenmatrices<T: Scalar>(
    rel: &RelationPartition,
    idempotents: &[SymMatrix<T>],
    intersection: &IntersectionNumbers,
    tol: T,
) -> Result<SchemeParameters<T>, SchemeError> {
    let n = rel.n;
    let d = rel.d;
    let w = d + 1;
    // sums[j][i] = Σ_{(x,y) ∈ R_i} (E_j)_{xy}
    let mut sums = vec![vec![T::zero(); w]; w];
    for x in 0..n {
        for y in 0..n {
            let i = rel.label(x, y);
            for (j, e) in idempotents.iter().enumerate() {
                sums[j][i] += e.get(x, y);
            }
        }
    }
    let ranks: Vec<T> = idempotents.iter().map(|e| e.trace()).collect();
    let p = SquareMatrix::from_fn(w, |j, i| snap(sums[j][i] / ranks[j], tol));
    let reps: Vec<(usize, usize)> = (0..w).map(|j| rel.representative(j)).collect();
    let nf: T = from_usize(n);
    let q = SquareMatrix::from_fn(w, |j, i| snap(nf * idempotents[i].get(reps[j].0, reps[j].1), tol));
    let degrees: Vec<u64> = intersection.degrees().into_iter().map(|k| k as u64).collect();
    let multiplicities = (0..w).map(|i| q.get(0, i)).collect();
    let params = SchemeParameters {
        n,
        d,
        intersection: intersection.clone(),
        p,
        q,
        degrees,
        multiplicities,
        krein: krein_parameters(idempotents),
    };
    let dev = params.pq_deviation();
    if dev > lit::<T>(100.0) * tol {
        return Err(SchemeError::PqMismatch(dev.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(params)
}

/// Parameters from intersection numbers alone.
///
/// The matrices `B_i` are simultaneously diagonalizable; with `K = diag(k)`,
/// `K^{1/2} B_i K^{-1/2}` is symmetric, so a generic combination is handled by
/// the symmetric eigensolver. For an eigenvector `u`, `K^{1/2} u` is
/// proportional to `(P_0(l), …, P_d(l))`.
pub fn parametric_parameters<T: Scalar>(
    intersection: &IntersectionNumbers,
    n: usize,
    tol: T,
    seeds: SeedSet,
) -> Result<SchemeParameters<T>, SchemeError> {
    intersection.check_consistency()?;
    let d = intersection.d();
    if d == 0 || n < 2 {
        return Err(SchemeError::Degenerate { n, d });
    }
    let total = intersection.point_count();
    if total != n as i64 {
        return Err(SchemeError::InconsistentTensor(format!("Σ k_i = {total} but n = {n}")));
    }
    let w = d + 1;
    let degrees: Vec<u64> = intersection.degrees().into_iter().map(|k| k as u64).collect();
    let sqrt_k: Vec<T> = degrees.iter().map(|&k| from_usize::<T>(k as usize).sqrt()).collect();
    let sym: Vec<SymMatrix<T>> = (0..w)
        .map(|i| {
            let rows: Vec<Vec<T>> = (0..w)
                .map(|k| {
                    (0..w).map(|j| sqrt_k[k] / sqrt_k[j] * from_usize::<T>(intersection.get(i, j, k) as usize)).collect()
                })
                .collect();
            SymMatrix::from_rows(&rows)
        })
        .collect::<Result<_, _>>()?;

    for seed in seeds.seeds() {
        let c = generic_coefficients::<T>(seed, d);
        let mut generic = SymMatrix::zeros(w);
        for (i, &ci) in c.iter().enumerate() {
            generic = generic.add_scaled(ci, &sym[i + 1]);
        }
        let (vals, vecs) = generic.eigen()?;
        match cluster_values(&vals, tol) {
            Ok(cl) if cl.len() == w => {}
            _ => continue,
        }
        let rows: Vec<Vec<T>> = vecs
            .iter()
            .map(|u| {
                let v: Vec<T> = (0..w).map(|k| sqrt_k[k] * u[k]).collect();
                v.iter().map(|&x| snap(x / v[0], tol)).collect()
            })
            .collect();
        let mults: Vec<T> = rows
            .iter()
            .map(|row| {
                let s: T = (0..w).map(|i| row[i] * row[i] / from_usize(degrees[i] as usize)).sum();
                snap(from_usize::<T>(n) / s, tol)
            })
            .collect();
        let order = canonical_order(&rows, &mults, &degrees, tol);
        let p = SquareMatrix::from_fn(w, |a, i| rows[order[a]][i]);
        let multiplicities: Vec<T> = order.iter().map(|&l| mults[l]).collect();
        let q_raw = p.inverse().map_err(|_| SchemeError::SingularP)?.scale(from_usize(n));
        let q = SquareMatrix::from_fn(w, |a, b| snap(q_raw.get(a, b), tol));
        let krein = krein_from_eigenmatrix(&p, &degrees, &multiplicities, n);
        return Ok(SchemeParameters { n, d, intersection: intersection.clone(), p, q, degrees, multiplicities, krein });
    }
    Err(SchemeError::DegenerateGenericElement { expected: w })
}

/// A scheme with whichever representations are available.
#[derive(Clone, Debug)]
pub struct Scheme<T> {
    pub relations: Option<RelationPartition>,
    pub idempotents: Option<Vec<SymMatrix<T>>>,
    pub params: SchemeParameters<T>,
}

impl<T: Scalar> Scheme<T> {
    /// Validates the partition and computes idempotents and eigenmatrices.
    pub fn explicit(rel: RelationPartition, tol: T, seeds: SeedSet) -> Result<Self, SchemeError> {
        let p = validate_scheme(&rel)?;
        let idem = idempotents(&rel, tol, seeds)?;
        let params = eigenmatrices(&rel, &idem, &p, tol)?;
        Ok(Self { relations: Some(rel), idempotents: Some(idem), params })
    }

    pub fn parametric(p: &IntersectionNumbers, n: usize, tol: T, seeds: SeedSet) -> Result<Self, SchemeError> {
        Ok(Self { relations: None, idempotents: None, params: parametric_parameters(p, n, tol, seeds)? })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn d(&self) -> usize {
        self.params.d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> RelationPartition {
        RelationPartition::new(n, 1, (0..n * n).map(|p| (p / n != p % n) as u32).collect()).unwrap()
    }

    fn cycle(n: usize) -> RelationPartition {
        let g = Graph::from_edges(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap();
        RelationPartition::from_distances(&g).unwrap()
    }

    fn petersen() -> RelationPartition {
        let pairs: Vec<(usize, usize)> = (0..5).flat_map(|a| ((a + 1)..5).map(move |b| (a, b))).collect();
        let g = Graph::from_predicate(10, |i, j| {
            let (a, b) = pairs[i];
            let (c, d) = pairs[j];
            a != c && a != d && b != c && b != d
        });
        RelationPartition::from_distances(&g).unwrap()
    }

    /// Brute-force count of p_ij^k at one pair, independent of validate_scheme.
    fn count_at(rel: &RelationPartition, i: usize, j: usize, x: usize, y: usize) -> i64 {
        (0..rel.n()).filter(|&z| rel.label(x, z) == i && rel.label(z, y) == j).count() as i64
    }

    #[test]
    fn petersen_intersection_numbers() {
        let rel = petersen();
        let p = validate_scheme(&rel).unwrap();
        assert_eq!(p.get(1, 1, 1), 0);
        assert_eq!(p.get(1, 1, 2), 1);
        assert_eq!(p.degrees(), vec![1, 3, 6]);
        let (x, y) = rel.representative(2);
        assert_eq!(p.get(2, 2, 2), count_at(&rel, 2, 2, x, y));
        p.check_consistency().unwrap();
    }

    #[test]
    fn four_cycle_intersection() {
        let p = validate_scheme(&cycle(4)).unwrap();
        assert_eq!(p.get(1, 1, 2), 2);
    }

    #[test]
    fn axiom_violations() {
        // asymmetric labels
        let mut labels: Vec<u32> = (0..9).map(|p| (p / 3 != p % 3) as u32).collect();
        labels[1] = 2;
        labels[3 + 2] = 2;
        labels[2 * 3 + 1] = 2;
        let err = RelationPartition::new(3, 2, labels).unwrap_err();
        assert!(matches!(err, SchemeError::Axiom { axiom: 3, .. }), "{err}");

        let mut labels: Vec<u32> = (0..9).map(|p| (p / 3 != p % 3) as u32).collect();
        labels[4] = 1;
        assert!(matches!(RelationPartition::new(3, 1, labels).unwrap_err(), SchemeError::Axiom { axiom: 1, .. }));

        let labels: Vec<u32> = (0..9).map(|p| (p / 3 != p % 3) as u32).collect();
        assert_eq!(RelationPartition::new(3, 2, labels).unwrap_err(), SchemeError::EmptyClass(2));

        assert!(matches!(RelationPartition::new(1, 0, vec![0]), Err(SchemeError::Degenerate { .. })));
    }

    #[test]
    fn path_distance_partition_is_not_a_scheme() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let rel = RelationPartition::from_distances(&g).unwrap();
        match validate_scheme(&rel).unwrap_err() {
            SchemeError::NotAScheme { i, j, k, x1, y1, v1, x2, y2, v2 } => {
                assert_ne!(v1, v2);
                assert_eq!(rel.label(x1, y1), k);
                assert_eq!(rel.label(x2, y2), k);
                assert_eq!(count_at(&rel, i, j, x1, y1), v1);
                assert_eq!(count_at(&rel, i, j, x2, y2), v2);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn petersen_idempotents_and_eigenmatrices() {
        let s = Scheme::<f64>::explicit(petersen(), 1e-9, SeedSet::Primary).unwrap();
        let idem = s.idempotents.as_ref().unwrap();
        let ranks: Vec<f64> = idem.iter().map(|e| e.trace()).collect();
        for (r, e) in ranks.iter().zip([1.0, 5.0, 4.0]) {
            assert!((r - e).abs() < 1e-10);
        }
        let p = &s.params;
        assert_eq!(p.p.rows(), vec![vec![1.0, 3.0, 6.0], vec![1.0, 1.0, -2.0], vec![1.0, -2.0, 1.0]]);
        // Oracle: Q = n P^{-1}
        let q_oracle = p.p.inverse().unwrap().scale(10.0);
        assert!(p.q.max_abs_diff(&q_oracle) < 1e-9);
        let expected = [[1.0, 5.0, 4.0], [1.0, 5.0 / 3.0, -8.0 / 3.0], [1.0, -5.0 / 3.0, 2.0 / 3.0]];
        for j in 0..3 {
            for i in 0..3 {
                assert!((p.q.get(j, i) - expected[j][i]).abs() < 1e-9);
            }
        }
        assert!(p.pq_deviation() < 1e-9);
        assert!(p.orthogonality_deviation() < 1e-9);
    }

    #[test]
    fn complete_scheme() {
        let n = 6;
        let s = Scheme::<f64>::explicit(complete(n), 1e-9, SeedSet::Primary).unwrap();
        let idem = s.idempotents.as_ref().unwrap();
        assert!(idem[0].max_abs_diff(&SymMatrix::ones(n).scale(1.0 / n as f64)) < 1e-12);
        assert!(idem[1].max_abs_diff(&SymMatrix::identity(n).sub(&idem[0])) < 1e-12);
        assert_eq!(s.params.p.rows(), vec![vec![1.0, 5.0], vec![1.0, -1.0]]);
        assert!((s.params.krein.get(1, 1, 1) - (n as f64 - 2.0)).abs() < 1e-9);
    }

    #[test]
    fn pentagon_ranks() {
        let s = Scheme::<f64>::explicit(cycle(5), 1e-9, SeedSet::Alternate).unwrap();
        let ranks: Vec<f64> = s.idempotents.unwrap().iter().map(|e| e.trace()).collect();
        assert!((ranks[0] - 1.0).abs() < 1e-10 && (ranks[1] - 2.0).abs() < 1e-10 && (ranks[2] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn krein_identities() {
        let s = Scheme::<f64>::explicit(petersen(), 1e-9, SeedSet::Primary).unwrap();
        let idem = s.idempotents.as_ref().unwrap();
        let k = &s.params.krein;
        for j in 0..3 {
            for kk in 0..3 {
                assert!((k.get(0, j, kk) - (j == kk) as u8 as f64).abs() < 1e-9);
            }
        }
        assert!(k.get(1, 1, 2) > 1e-6);
        assert!(k.min() > -1e-9);
        // round trip: E_i ∘ E_j = (1/n) Σ q_ij^k E_k
        for i in 0..3 {
            for j in 0..3 {
                let lhs = idem[i].hadamard(&idem[j]);
                let mut rhs = SymMatrix::zeros(10);
                for kk in 0..3 {
                    rhs = rhs.add_scaled(k.get(i, j, kk) / 10.0, &idem[kk]);
                }
                assert!(lhs.max_abs_diff(&rhs) < 1e-7);
            }
        }
        // trace route agrees with the eigenmatrix formula
        let formula = krein_from_eigenmatrix(&s.params.p, &s.params.degrees, &s.params.multiplicities, 10);
        for i in 0..3 {
            for j in 0..3 {
                for kk in 0..3 {
                    assert!((formula.get(i, j, kk) - k.get(i, j, kk)).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn parametric_matches_explicit() {
        for rel in [petersen(), cycle(5), cycle(6), complete(4)] {
            let s = Scheme::<f64>::explicit(rel.clone(), 1e-9, SeedSet::Primary).unwrap();
            let par = parametric_parameters::<f64>(&s.params.intersection, rel.n(), 1e-9, SeedSet::Primary).unwrap();
            let dist = parameter_distance(&s.params, &par).unwrap();
            assert!(dist < 1e-9, "distance {dist}");
            assert!(par.pq_deviation() < 1e-9);
        }
    }

    #[test]
    fn parametric_complete() {
        let n = 7;
        let mut p = IntersectionNumbers::zeros(1);
        p.set(0, 0, 0, 1);
        p.set(0, 1, 1, 1);
        p.set(1, 0, 1, 1);
        p.set(1, 1, 0, n - 1);
        p.set(1, 1, 1, n - 2);
        let par = parametric_parameters::<f64>(&p, n as usize, 1e-9, SeedSet::Primary).unwrap();
        assert_eq!(par.p.rows(), vec![vec![1.0, 6.0], vec![1.0, -1.0]]);
    }

    #[test]
    fn tensor_errors() {
        let mut p = validate_scheme(&petersen()).unwrap();
        p.set(1, 1, 2, 2);
        assert!(matches!(p.check_consistency(), Err(SchemeError::InconsistentTensor(_))));
        let good = validate_scheme(&petersen()).unwrap();
        assert!(matches!(
            parametric_parameters::<f64>(&good, 11, 1e-9, SeedSet::Primary),
            Err(SchemeError::InconsistentTensor(_))
        ));
    }

    #[test]
    fn text_formats_roundtrip() {
        let rel = petersen();
        assert_eq!(RelationPartition::parse(&rel.to_text()).unwrap(), rel);
        let p = validate_scheme(&rel).unwrap();
        let (n, back) = IntersectionNumbers::parse(&p.to_text(10)).unwrap();
        assert_eq!((n, back), (10, p));
        // sparse tensor input: absent quadruples default to zero
        let sparse = "3 1\n0 0 0 1\n0 1 1 1\n1 0 1 1\n1 1 0 2\n1 1 1 1\n";
        let (n, t) = IntersectionNumbers::parse(sparse).unwrap();
        assert_eq!(n, 3);
        t.check_consistency().unwrap();
        assert!(matches!(RelationPartition::parse("2 1\n0 1\n1 5\n"), Err(SchemeError::Parse { line: 3, .. })));
        assert!(matches!(RelationPartition::parse("2 1\n0 1\n"), Err(SchemeError::Parse { .. })));
    }
}
