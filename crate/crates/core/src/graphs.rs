//! Regular-graph analysis: distances, girth, spectrum, eigenprojectors, the
//! Moore bound, and the forced projector entries at maximal distance.

use std::collections::VecDeque;

use thiserror::Error;

use crate::combinatorics::{checked_pow, Overflow};
use crate::numerics::{
    eigen_clusters, from_usize, EigenClusters, NumericsError, Scalar, SymMatrix,
};
use crate::report::{Status, TheoremReport, Witness};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} out of range for {n} vertices")]
    OutOfRange { vertex: usize, n: usize },
    #[error("graph is not regular")]
    NotRegular,
    #[error("graph is not connected")]
    NotConnected,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Simple undirected graph with sorted neighbor lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::OutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, nb) in adj.iter_mut().enumerate() {
            nb.sort_unstable();
            if let Some(w) = nb.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::DuplicateEdge(u.min(w[0]), u.max(w[0])));
            }
        }
        Ok(Self { adj })
    }

    /// Builds the graph whose edges are the pairs `u < v` with `adjacent(u, v)`.
    pub fn from_predicate(n: usize, mut adjacent: impl FnMut(usize, usize) -> bool) -> Self {
        let mut adj = vec![Vec::new(); n];
        for u in 0..n {
            for v in (u + 1)..n {
                if adjacent(u, v) {
                    adj[u].push(v);
                    adj[v].push(u);
                }
            }
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        Self { adj }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Common degree, or `None` if the graph is not regular (or empty).
    pub fn regular_degree(&self) -> Option<usize> {
        let k = self.adj.first()?.len();
        self.adj.iter().all(|nb| nb.len() == k).then_some(k)
    }

    pub fn complement(&self) -> Self {
        Self::from_predicate(self.n(), |u, v| !self.has_edge(u, v))
    }

    pub fn adjacency_matrix<T: Scalar>(&self) -> SymMatrix<T> {
        let mut m = SymMatrix::zeros(self.n());
        for (u, v) in self.edges() {
            m.set(u, v, T::one());
        }
        m
    }

    /// Parses the edge-list format: a header `n m`, then `m` lines `u v` with
    /// 0-based indices. Blank lines and `#` comments are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = content_lines(text);
        let (hline, header) = lines.next().ok_or(GraphError::Parse { line: 0, msg: "empty input".into() })?;
        let nums = parse_usizes(hline, header, 2)?;
        let (n, m) = (nums[0], nums[1]);
        let mut edges = Vec::with_capacity(m);
        for (line, body) in lines {
            let uv = parse_usizes(line, body, 2)?;
            edges.push((uv[0], uv[1]));
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: hline,
                msg: format!("header announces {m} edges, found {}", edges.len()),
            });
        }
        Self::from_edges(n, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), self.edge_count());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

/// Non-empty lines with `#` comments stripped, paired with 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let body = l.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

pub(crate) fn parse_usizes(line: usize, body: &str, expect: usize) -> Result<Vec<usize>, GraphError> {
    let vals = body
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| GraphError::Parse { line, msg: format!("bad integer {t:?}: {e}") }))
        .collect::<Result<Vec<_>, _>>()?;
    if vals.len() != expect {
        return Err(GraphError::Parse { line, msg: format!("expected {expect} integers, found {}", vals.len()) });
    }
    Ok(vals)
}

/// Sentinel distance for pairs in different components.
pub const UNREACHABLE: u32 = u32::MAX;

/// All-pairs hop distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceData {
    n: usize,
    dist: Vec<u32>,
    /// Largest finite distance.
    pub diameter: u32,
    pub connected: bool,
}

impl DistanceData {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, x: usize, y: usize) -> u32 {
        self.dist[x * self.n + y]
    }

    /// Pairs `(x, y)` with `x < y` at distance `t`.
    pub fn class(&self, t: u32) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.n {
            for y in (x + 1)..self.n {
                if self.dist(x, y) == t {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// `|R_t(x)|`
    pub fn sphere_size(&self, x: usize, t: u32) -> usize {
        (0..self.n).filter(|&y| self.dist(x, y) == t).count()
    }
}

/// BFS from every vertex.
pub fn distance_data(g: &Graph) -> DistanceData {
    let n = g.n();
    let mut dist = vec![UNREACHABLE; n * n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        queue.clear();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let du = row[u];
            for &w in g.neighbors(u) {
                if row[w] == UNREACHABLE {
                    row[w] = du + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    let connected = !dist.contains(&UNREACHABLE);
    let diameter = dist.iter().copied().filter(|&d| d != UNREACHABLE).max().unwrap_or(0);
    DistanceData { n, dist, diameter, connected }
}

/// Length of a shortest cycle, or `None` for a forest.
pub fn girth(g: &Graph) -> Option<usize> {
    let n = g.n();
    let mut best: Option<usize> = None;
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        parent[s] = usize::MAX;
        queue.clear();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            if best.is_some_and(|b| 2 * dist[u] + 1 >= b) {
                break;
            }
            for &w in g.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    let len = dist[u] + dist[w] + 1;
                    best = Some(best.map_or(len, |b| b.min(len)));
                }
            }
        }
    }
    best
}

/// `M(k, d) = 1 + k Σ_{j<d} (k-1)^j`, the largest vertex count of a
/// `k`-regular graph of diameter `d`.
pub fn moore_bound(k: u64, d: u32) -> Result<u64, Overflow> {
    let mut sum: u64 = 0;
    for j in 0..d {
        sum = sum.checked_add(checked_pow(k.saturating_sub(1), j)?).ok_or(Overflow("Moore bound"))?;
    }
    k.checked_mul(sum).and_then(|v| v.checked_add(1)).ok_or(Overflow("Moore bound"))
}

/// Distinct adjacency eigenvalues with multiplicities.
pub fn spectrum<T: Scalar>(g: &Graph, tol: T) -> Result<EigenClusters<T>, GraphError> {
    Ok(eigen_clusters(&g.adjacency_matrix::<T>(), tol)?)
}

/// Spectrum together with the orthogonal projectors onto each eigenspace,
/// indexed like `spectrum.values`.
#[derive(Clone, Debug)]
pub struct ProjectorFamily<T> {
    pub spectrum: EigenClusters<T>,
    pub projectors: Vec<SymMatrix<T>>,
}

/// Max-abs residuals of the projector identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectorResiduals<T> {
    /// `E_i² - E_i`
    pub idempotency: T,
    /// `E_i E_j` for `i ≠ j`
    pub orthogonality: T,
    /// `Σ E_i - I`
    pub resolution: T,
    /// `Σ θ_i E_i - A`
    pub reconstruction: T,
}

impl<T: Scalar> ProjectorResiduals<T> {
    pub fn max(&self) -> T {
        self.idempotency.max(self.orthogonality).max(self.resolution).max(self.reconstruction)
    }
}

impl<T: Scalar> ProjectorFamily<T> {
    pub fn residuals(&self, a: &SymMatrix<T>) -> ProjectorResiduals<T> {
        let n = a.n();
        let mut idem = T::zero();
        let mut orth = T::zero();
        let mut sum = SymMatrix::zeros(n);
        let mut recon = SymMatrix::zeros(n);
        for (i, e) in self.projectors.iter().enumerate() {
            idem = idem.max(e.matmul(e).max_abs_diff(e));
            for f in &self.projectors[i + 1..] {
                orth = orth.max(e.matmul(f).max_abs());
            }
            sum = sum.add(e);
            recon = recon.add_scaled(self.spectrum.values[i], e);
        }
        ProjectorResiduals {
            idempotency: idem,
            orthogonality: orth,
            resolution: sum.max_abs_diff(&SymMatrix::identity(n)),
            reconstruction: recon.max_abs_diff(a),
        }
    }
}

/// Projector onto the `theta_i` eigenspace of `a` as the Lagrange product
/// `Π_{j≠i} (a - θ_j I) / (θ_i - θ_j)` over the distinct eigenvalues `thetas`.
pub fn lagrange_projector<T: Scalar>(a: &SymMatrix<T>, thetas: &[T], i: usize) -> SymMatrix<T> {
    let n = a.n();
    let mut e = SymMatrix::identity(n);
    for (j, &tj) in thetas.iter().enumerate() {
        if j == i {
            continue;
        }
        let factor = a.shift_diagonal(-tj).scale(T::one() / (thetas[i] - tj));
        e = e.matmul(&factor);
    }
    e
}

/// Eigenprojectors of a connected regular graph.
pub fn spectral_projectors<T: Scalar>(g: &Graph, tol: T) -> Result<ProjectorFamily<T>, GraphError> {
    if g.regular_degree().is_none() {
        return Err(GraphError::NotRegular);
    }
    if !distance_data(g).connected {
        return Err(GraphError::NotConnected);
    }
    let a = g.adjacency_matrix::<T>();
    let spectrum = eigen_clusters(&a, tol)?;
    let projectors = (0..spectrum.len()).map(|i| lagrange_projector(&a, &spectrum.values, i)).collect();
    Ok(ProjectorFamily { spectrum, projectors })
}

/// `K_i = Π_{j ∈ 1..s, j ≠ i} (θ_0 - θ_j) / (θ_i - θ_j)`; empty product is 1.
pub fn k_factor<T: Scalar>(spec: &EigenClusters<T>, i: usize) -> T {
    lagrange_ratio(&spec.values, i)
}

/// `Π_{j ∈ 1..s, j ≠ i} (v_0 - v_j) / (v_i - v_j)` for `v = values`.
pub(crate) fn lagrange_ratio<T: Scalar>(values: &[T], i: usize) -> T {
    assert!(i >= 1 && i < values.len(), "index {i} out of 1..{}", values.len());
    (1..values.len())
        .filter(|&j| j != i)
        .fold(T::one(), |acc, j| acc * (values[0] - values[j]) / (values[i] - values[j]))
}

fn f64_of<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn subject(g: &Graph) -> String {
    match g.regular_degree() {
        Some(k) => format!("{k}-regular graph on {} vertices", g.n()),
        None => format!("graph on {} vertices", g.n()),
    }
}

/// Records the hypothesis failure and returns `true` when `g` is not a
/// connected regular graph.
fn reject_non_regular(g: &Graph, dd: &DistanceData, report: &mut TheoremReport) -> bool {
    if g.regular_degree().is_none() {
        report.settle(Status::HypothesisNotMet, "not regular");
        return true;
    }
    if !dd.connected {
        report.settle(Status::HypothesisNotMet, "not connected");
        return true;
    }
    false
}

/// Checks every `(E_i)_{xy}` at pairs of maximal distance `d` against
/// `-K_i / n`, for `i = 1..d`, on the caller's tolerance.
fn check_distance_d_entries<T: Scalar>(
    fam: &ProjectorFamily<T>,
    dd: &DistanceData,
    d: usize,
    tol: T,
    report: &mut TheoremReport,
) {
    let n = dd.n();
    let targets: Vec<T> = (1..=d).map(|i| -k_factor(&fam.spectrum, i) / from_usize(n)).collect();
    report.evidence("asserted_entries", targets.iter().map(|&t| f64_of(t)).collect::<Vec<_>>());
    let pairs = dd.class(d as u32);
    report.evidence("distance_d_pairs", pairs.len());
    let mut worst: Option<(T, usize, usize, usize)> = None;
    for &(x, y) in &pairs {
        for i in 1..=d {
            let dev = (fam.projectors[i].get(x, y) - targets[i - 1]).abs();
            if worst.is_none_or(|w| dev > w.0) {
                worst = Some((dev, i, x, y));
            }
        }
    }
    if let Some((dev, i, x, y)) = worst {
        report.deviation(f64_of(dev));
        let w = Witness::Pair { label: format!("max deviation in E_{i}"), x, y };
        if dev > tol {
            report.fail(format!("(E_{i})_{{{x},{y}}} deviates from -K_{i}/n by {}", f64_of(dev)), w);
        } else {
            report.witness(w);
        }
    }
}

/// Forced projector entries at distance `d`: when the diameter `d` equals the
/// number of nontrivial distinct eigenvalues, every `(E_i)_{xy}` with
/// `∂(x, y) = d` equals `-K_i / n`.
///
/// Hypothesis failures (not regular, disconnected, `s ≠ d`) are report states.
pub fn verify_projector_entries<T: Scalar>(g: &Graph, tol: T) -> Result<TheoremReport, GraphError> {
    let mut report = TheoremReport::new(subject(g), "projector-entries", f64_of(tol));
    let dd = distance_data(g);
    if reject_non_regular(g, &dd, &mut report) {
        return Ok(report);
    }
    let fam = spectral_projectors(g, tol)?;
    let s = fam.spectrum.len() - 1;
    let d = dd.diameter as usize;
    report.evidence("n", g.n()).evidence("diameter", d).evidence("s", s);
    report.evidence("spectrum", fam.spectrum.values.iter().map(|&v| f64_of(v)).collect::<Vec<_>>());
    if s != d {
        report.settle(Status::HypothesisNotMet, format!("{s} nontrivial eigenvalues but diameter {d}"));
        return Ok(report);
    }
    let k: Vec<f64> = (1..=s).map(|i| f64_of(k_factor(&fam.spectrum, i))).collect();
    report.evidence("k_factors", k);
    check_distance_d_entries(&fam, &dd, d, tol, &mut report);
    Ok(report)
}

/// Consequences for graphs exceeding the Moore bound `M(k, d-1)`, where `d` is
/// the number of nontrivial distinct eigenvalues: the diameter is `d`, there
/// are `d + 1` eigenvalues, entries at distance `d` are `-K_i / n`, and every
/// row of `E_i` holds at least `n - M(k, d-1)` such entries.
pub fn large_graph_report<T: Scalar>(g: &Graph, tol: T) -> Result<TheoremReport, GraphError> {
    let mut report = TheoremReport::new(subject(g), "large-graph", f64_of(tol));
    let dd = distance_data(g);
    if reject_non_regular(g, &dd, &mut report) {
        return Ok(report);
    }
    let k = g.regular_degree().expect("checked regular") as u64;
    let n = g.n();
    let fam = spectral_projectors(g, tol)?;
    let d = fam.spectrum.len() - 1;
    report.evidence("n", n).evidence("k", k).evidence("d", d);

    if d == 0 {
        report.settle(Status::HypothesisNotMet, "single vertex: no nontrivial eigenvalue");
        return Ok(report);
    }
    let bound = match moore_bound(k, d as u32 - 1) {
        Ok(b) => b,
        Err(e) => {
            report.settle(Status::Inconclusive, e.to_string());
            return Ok(report);
        }
    };
    report.evidence("moore_bound_d_minus_1", bound);
    if n as u64 <= bound {
        report.settle(Status::Inconclusive, "size hypothesis not met");
        return Ok(report);
    }

    // (1) diameter equals d
    report.evidence("diameter", dd.diameter as usize);
    if dd.diameter as usize != d {
        report.fail(
            format!("diameter {} differs from d = {d}", dd.diameter),
            Witness::Index { label: "diameter".into(), value: dd.diameter as usize },
        );
        return Ok(report);
    }
    // (2) d + 1 distinct eigenvalues: holds by construction of d
    report.evidence("distinct_eigenvalues", d + 1);

    // (3) entries at distance d
    check_distance_d_entries(&fam, &dd, d, tol, &mut report);

    // (4) per-row counts of the forced value
    let required = n - bound as usize;
    report.evidence("row_count_required", required);
    let mut min_count = usize::MAX;
    let mut min_at = (0, 0);
    for i in 1..=d {
        let target = -k_factor(&fam.spectrum, i) / from_usize(n);
        for x in 0..n {
            let count = fam.projectors[i].row(x).iter().filter(|&&v| (v - target).abs() <= tol).count();
            if count < min_count {
                min_count = count;
                min_at = (i, x);
            }
        }
    }
    report.evidence("row_count_min", min_count);
    if min_count < required {
        report.fail(
            format!("row {} of E_{} has only {min_count} forced entries", min_at.1, min_at.0),
            Witness::Index { label: "row".into(), value: min_at.1 },
        );
    }
    Ok(report)
}
