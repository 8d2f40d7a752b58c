//! Finite subsets of the unit sphere given by their Gram matrices: inner
//! product sets, the absolute bound, Schur-diameter, and the forced
//! eigenvalues `-K_i*` of the distance-class graphs.

use thiserror::Error;

use crate::combinatorics::{binomial, Overflow};
use crate::graphs::{content_lines, lagrange_ratio};
use crate::numerics::{
    cluster_values, eval_matrix_poly, from_usize, hadamard_power, lit, poly_from_roots, rank_tol, NumericsError,
    PolyMode, Scalar, SymMatrix,
};
use crate::report::{Status, TheoremReport, Witness};
use crate::schemes::{generic_coefficients, SeedSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SphericalError {
    #[error("not a unit-sphere Gram matrix: {0}")]
    NotUnitGram(String),
    #[error("idempotent has rank 0")]
    RankZero,
    #[error("Schur-disconnected up to degree limit {t_max}")]
    SchurDisconnected { t_max: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Overflow(#[from] Overflow),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// `N(m, d) = C(m+d-1, d) + C(m+d-2, d-1)`, with `N(m, 0) = 1`.
pub fn absolute_bound(m: u64, d: u64) -> Result<u64, Overflow> {
    if d == 0 {
        return Ok(1);
    }
    let (m, d) = (m as i64, d as i64);
    binomial(m + d - 1, d)?.checked_add(binomial(m + d - 2, d - 1)?).ok_or(Overflow("absolute bound"))
}

/// `K_i* = Π_{j ∈ 1..s, j ≠ i} (θ*_0 - θ*_j) / (θ*_i - θ*_j)` where `values`
/// is `θ*_0 = 1, θ*_1, …, θ*_s`.
pub fn k_star<T: Scalar>(values: &[T], i: usize) -> T {
    lagrange_ratio(values, i)
}

#[derive(Clone, Debug)]
pub struct SphericalSet<T> {
    gram: SymMatrix<T>,
    dimension: usize,
    /// `θ*_1 > … > θ*_s`
    values: Vec<T>,
}

impl<T: Scalar> SphericalSet<T> {
    /// Accepts a Gram matrix with unit diagonal that is positive semidefinite
    /// and has no repeated points, all within `tol`.
    pub fn from_gram(gram: SymMatrix<T>, tol: T) -> Result<Self, SphericalError> {
        let n = gram.n();
        if n < 2 {
            return Err(SphericalError::NotUnitGram("need at least two points".into()));
        }
        if let Some(x) = (0..n).find(|&x| (gram.get(x, x) - T::one()).abs() > tol) {
            return Err(SphericalError::NotUnitGram(format!("diagonal entry {x} is {}", gram.get(x, x))));
        }
        let eig = gram.eigenvalues()?;
        let smallest = *eig.last().expect("n ≥ 2");
        if smallest < -tol {
            return Err(SphericalError::NotUnitGram(format!("not positive semidefinite (eigenvalue {smallest})")));
        }
        let dimension = eig.iter().filter(|x| x.abs() > tol).count();
        let off: Vec<T> = (0..n).flat_map(|x| ((x + 1)..n).map(move |y| (x, y))).map(|(x, y)| gram.get(x, y)).collect();
        let values = cluster_values(&off, tol)?.values;
        if values[0] >= T::one() - tol {
            return Err(SphericalError::NotUnitGram("repeated points (inner product 1)".into()));
        }
        Ok(Self { gram, dimension, values })
    }

    /// The embedding `(n / m) E` of a primitive idempotent `E` of rank `m`.
    pub fn from_idempotent(e: &SymMatrix<T>, tol: T) -> Result<Self, SphericalError> {
        let rank = e.trace();
        if rank < lit(0.5) {
            return Err(SphericalError::RankZero);
        }
        Self::from_gram(e.scale(from_usize::<T>(e.n()) / rank), tol)
    }

    pub fn n(&self) -> usize {
        self.gram.n()
    }

    pub fn gram(&self) -> &SymMatrix<T> {
        &self.gram
    }

    /// Ambient dimension, the numerical rank of the Gram matrix.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// The inner-product set `A(X)`, decreasing.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `s = |A(X)|`
    pub fn s(&self) -> usize {
        self.values.len()
    }

    fn with_unit(&self) -> Vec<T> {
        std::iter::once(T::one()).chain(self.values.iter().copied()).collect()
    }

    /// `K_i*` for `i ∈ 1..=s`.
    pub fn k_star(&self, i: usize) -> T {
        k_star(&self.with_unit(), i)
    }

    /// Index of the value cluster containing `x`, if any.
    fn class_of(&self, x: T, tol: T) -> Option<usize> {
        self.values.iter().position(|&v| (v - x).abs() <= tol).map(|i| i + 1)
    }

    /// Adjacency matrix of the graph joining points with inner product `θ*_i`.
    pub fn class_adjacency(&self, i: usize, tol: T) -> SymMatrix<T> {
        let n = self.n();
        let mut a = SymMatrix::zeros(n);
        for x in 0..n {
            for y in (x + 1)..n {
                if self.class_of(self.gram.get(x, y), tol) == Some(i) {
                    a.set(x, y, T::one());
                }
            }
        }
        a
    }

    /// `f_i*(M∘)` with `f_i*(t) = Π_{j ≠ i} (t - θ*_j) / (θ*_i - θ*_j)`.
    pub fn class_polynomial(&self, i: usize) -> SymMatrix<T> {
        let theta = &self.values;
        let others: Vec<T> = (0..theta.len()).filter(|&j| j != i - 1).map(|j| theta[j]).collect();
        let denom = others.iter().fold(T::one(), |acc, &t| acc * (theta[i - 1] - t));
        eval_matrix_poly(&poly_from_roots(&others, T::one() / denom), &self.gram, PolyMode::Hadamard)
    }

    /// Schur-diameter, searched by generic combinations below `s` and
    /// certified at `s` by the annihilator `Π_{α ∈ A(X)} (x - α)`.
    pub fn schur_diameter(&self, tol: T) -> Result<SchurDiameter, SphericalError> {
        let s = self.s();
        if let Ok(t) = schur_diameter(&self.gram, tol, s - 1) {
            return Ok(SchurDiameter { degree: t, by_annihilator: false });
        }
        let annihilator = eval_matrix_poly(&poly_from_roots(&self.values, T::one()), &self.gram, PolyMode::Hadamard);
        if rank_tol(&annihilator, tol)? == self.n() {
            Ok(SchurDiameter { degree: s, by_annihilator: true })
        } else {
            Err(SphericalError::SchurDisconnected { t_max: s })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SchurDiameter {
    pub degree: usize,
    /// Whether the annihilator, rather than a generic combination, certified it.
    pub by_annihilator: bool,
}

/// Least `t ≤ t_max` such that some combination of `M^{∘0}, …, M^{∘t}` has full
/// rank, tested on three fixed-seed combinations per degree.
pub fn schur_diameter<T: Scalar>(m: &SymMatrix<T>, tol: T, t_max: usize) -> Result<usize, SphericalError> {
    let n = m.n();
    let mut powers = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        powers.push(hadamard_power(m, t as u32));
        for seed in SeedSet::Primary.seeds() {
            let c = generic_coefficients::<T>(seed, t + 1);
            let combo = powers.iter().zip(&c).fold(SymMatrix::zeros(n), |acc, (p, &ci)| acc.add_scaled(ci, p));
            if rank_tol(&combo, tol)? == n {
                return Ok(t);
            }
        }
    }
    Err(SphericalError::SchurDisconnected { t_max })
}

/// Hypothesis route for the forced-eigenvalue check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereRoute {
    /// Assume the Schur-diameter equals `|A(X)|`; checked, not trusted.
    SchurDiameter,
    /// `|A(X)| ≤ d` and `|X| > N(m, d-1)`; `d` defaults to `|A(X)|`.
    LargeSet { degree_bound: Option<usize> },
}

/// Checks that each `-K_i*` is an eigenvalue of `A_i` with multiplicity at
/// least `|X| - N(m, d-1)`, and that `f_i*(M∘) = K_i* I + A_i`.
pub fn verify_sphere_theorem<T: Scalar>(
    set: &SphericalSet<T>,
    tol: T,
    route: SphereRoute,
    subject: &str,
) -> Result<TheoremReport, SphericalError> {
    let tol64 = tol.to_f64().unwrap_or(f64::NAN);
    let mut r = TheoremReport::new(subject, "sphere-eigenvalue", tol64);
    let n = set.n();
    let s = set.s();
    let m = set.dimension();
    r.evidence("n", n)
        .evidence("dimension", m)
        .evidence("inner_products", set.values().iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>())
        .evidence("s", s);

    let sd = set.schur_diameter(tol)?;
    r.evidence("schur_diameter", sd.degree).evidence("schur_certified_by_annihilator", sd.by_annihilator);

    let d = match route {
        SphereRoute::SchurDiameter => {
            r.evidence("route", "schur-diameter");
            if sd.degree != s {
                r.settle(Status::HypothesisNotMet, format!("Schur-diameter {} differs from |A(X)| = {s}", sd.degree));
                return Ok(r);
            }
            s
        }
        SphereRoute::LargeSet { degree_bound } => {
            let d = degree_bound.unwrap_or(s);
            r.evidence("route", "large-set").evidence("degree_bound", d);
            if s > d {
                r.settle(Status::HypothesisNotMet, format!("|A(X)| = {s} exceeds the bound {d}"));
                return Ok(r);
            }
            let bound = absolute_bound(m as u64, d as u64 - 1)?;
            r.evidence("absolute_bound_d_minus_1", bound);
            if n as u64 <= bound {
                r.settle(Status::Inconclusive, "size hypothesis not met");
                return Ok(r);
            }
            if sd.degree != d {
                r.fail(
                    format!("Schur-diameter {} but the size bound forces {d}", sd.degree),
                    Witness::Index { label: "schur_diameter".into(), value: sd.degree },
                );
            }
            if s != d {
                r.fail(format!("|A(X)| = {s} but the size bound forces {d}"), Witness::Index { label: "s".into(), value: s });
            }
            if r.status == Status::Fail {
                return Ok(r);
            }
            d
        }
    };

    let bound = absolute_bound(m as u64, d as u64 - 1)?;
    let required = n as i64 - bound as i64;
    if r.find("absolute_bound_d_minus_1").is_none() {
        r.evidence("absolute_bound_d_minus_1", bound);
    }
    r.evidence("multiplicity_required", required);
    let mut kstars = Vec::with_capacity(s);
    let mut mults = Vec::with_capacity(s);
    let mut vacuous_miss = false;
    for i in 1..=s {
        let ks = set.k_star(i);
        kstars.push(ks.to_f64().unwrap_or(f64::NAN));
        let a = set.class_adjacency(i, tol);
        let residual = set.class_polynomial(i).max_abs_diff(&a.shift_diagonal(ks));
        r.deviation(residual.to_f64().unwrap_or(f64::MAX));
        if residual > lit::<T>(100.0) * tol {
            r.fail(
                format!("f_{i}*(M∘) differs from K_{i}* I + A_{i} by {residual}"),
                Witness::Index { label: "class".into(), value: i },
            );
        }
        let mult = a.eigenvalues()?.into_iter().filter(|&x| (x + ks).abs() <= tol).count();
        mults.push(mult);
        if (mult as i64) < required {
            r.fail(
                format!("-K_{i}* = {} has multiplicity {mult} < {required}", -ks),
                Witness::Index { label: "class".into(), value: i },
            );
        } else if mult == 0 {
            vacuous_miss = true;
        }
    }
    r.evidence("k_star", kstars).evidence("multiplicities", mults);
    if vacuous_miss {
        r.settle(Status::Inconclusive, "-K_i* absent but the multiplicity bound is vacuous");
    }
    Ok(r)
}

/// Parses the Gram-matrix format: first line `n`, then `n` rows of `n` reals.
/// Rows must be symmetric within `tol`.
pub fn parse_gram<T: Scalar>(text: &str, tol: T) -> Result<SymMatrix<T>, SphericalError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(SphericalError::Parse { line: 0, msg: "empty input".into() })?;
    let n: usize = header
        .trim()
        .parse()
        .map_err(|e| SphericalError::Parse { line: hline, msg: format!("bad size {header:?}: {e}") })?;
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(n);
    for (line, body) in lines {
        let row = body
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map(lit::<T>)
                    .map_err(|e| SphericalError::Parse { line, msg: format!("bad real {t:?}: {e}") })
            })
            .collect::<Result<Vec<T>, _>>()?;
        if row.len() != n {
            return Err(SphericalError::Parse { line, msg: format!("expected {n} values, found {}", row.len()) });
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(SphericalError::Parse { line: hline, msg: format!("expected {n} rows, found {}", rows.len()) });
    }
    for x in 0..n {
        for y in (x + 1)..n {
            if (rows[x][y] - rows[y][x]).abs() > tol {
                return Err(SphericalError::NotUnitGram(format!("entries ({x}, {y}) and ({y}, {x}) differ")));
            }
        }
    }
    Ok(SymMatrix::from_rows(&rows)?)
}

pub fn gram_to_text<T: Scalar>(gram: &SymMatrix<T>) -> String {
    let mut out = format!("{}\n", gram.n());
    for x in 0..gram.n() {
        let row: Vec<String> = gram.row(x).iter().map(|v| v.to_f64().unwrap_or(f64::NAN).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pentagon() -> SymMatrix<f64> {
        SymMatrix::from_fn(5, |x, y| (2.0 * PI * (x as f64 - y as f64) / 5.0).cos()).unwrap()
    }

    fn petersen_embedding() -> SphericalSet<f64> {
        use crate::generators::{build_scheme, FamilySpec};
        use crate::schemes::{idempotents, validate_scheme};
        let rel = build_scheme(&FamilySpec::Petersen, 100).unwrap();
        validate_scheme(&rel).unwrap();
        let e = idempotents::<f64>(&rel, 1e-9, SeedSet::Primary).unwrap();
        SphericalSet::from_idempotent(&e[1], 1e-9).unwrap()
    }

    #[test]
    fn absolute_bounds() {
        assert_eq!(absolute_bound(9, 2).unwrap(), 54);
        assert_eq!(absolute_bound(2, 1).unwrap(), 3);
        assert_eq!(absolute_bound(6, 2).unwrap(), 27);
        assert_eq!(absolute_bound(7, 0).unwrap(), 1);
        for m in 1..20 {
            assert_eq!(absolute_bound(m, 1).unwrap(), 1 + m);
        }
    }

    #[test]
    fn gram_shapes() {
        let id = SphericalSet::from_gram(SymMatrix::<f64>::identity(4), 1e-9).unwrap();
        assert_eq!((id.dimension(), id.values()), (4, &[0.0][..]));
        let p = SphericalSet::from_gram(pentagon(), 1e-9).unwrap();
        assert_eq!((p.dimension(), p.s()), (2, 2));
        let pe = petersen_embedding();
        assert_eq!(pe.dimension(), 5);
        assert!((pe.values()[0] - 1.0 / 3.0).abs() < 1e-12 && (pe.values()[1] + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gram_rejections() {
        let bad_diag = SymMatrix::<f64>::identity(3).scale(2.0);
        assert!(matches!(SphericalSet::from_gram(bad_diag, 1e-9), Err(SphericalError::NotUnitGram(_))));
        let not_psd = SymMatrix::from_fn(3, |x, y| if x == y { 1.0 } else { -0.9 }).unwrap();
        assert!(matches!(SphericalSet::from_gram(not_psd, 1e-9), Err(SphericalError::NotUnitGram(_))));
        let repeated = SymMatrix::<f64>::ones(3);
        assert!(matches!(SphericalSet::from_gram(repeated, 1e-9), Err(SphericalError::NotUnitGram(_))));
    }

    #[test]
    fn k_star_values() {
        let p = SphericalSet::from_gram(pentagon(), 1e-9).unwrap();
        assert!((p.k_star(1) - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        let direct = (1.0 - (4.0 * PI / 5.0).cos()) / ((2.0 * PI / 5.0).cos() - (4.0 * PI / 5.0).cos());
        assert!((p.k_star(1) - direct).abs() < 1e-12);
        assert!((petersen_embedding().k_star(1) - 2.0).abs() < 1e-12);
        assert_eq!(k_star(&[1.0, -0.25], 1), 1.0);
    }

    #[test]
    fn schur_diameters() {
        let id = SphericalSet::from_gram(SymMatrix::<f64>::identity(5), 1e-9).unwrap();
        assert_eq!(id.schur_diameter(1e-9).unwrap().degree, 1);
        let p = SphericalSet::from_gram(pentagon(), 1e-9).unwrap();
        assert_eq!(p.schur_diameter(1e-9).unwrap().degree, 2);
        assert_eq!(schur_diameter(&pentagon(), 1e-9, 4).unwrap(), 2);
        assert_eq!(petersen_embedding().schur_diameter(1e-9).unwrap().degree, 2);
        assert_eq!(schur_diameter(&SymMatrix::<f64>::ones(3), 1e-9, 3), Err(SphericalError::SchurDisconnected { t_max: 3 }));
    }

    #[test]
    fn pentagon_theorem() {
        let p = SphericalSet::from_gram(pentagon(), 1e-9).unwrap();
        for route in [SphereRoute::SchurDiameter, SphereRoute::LargeSet { degree_bound: None }] {
            let r = verify_sphere_theorem(&p, 1e-9, route, "pentagon").unwrap();
            assert_eq!(r.status, Status::Pass, "{r:?}");
            assert_eq!(r.find("multiplicities"), Some(&vec![2usize, 2].into()));
            assert!(r.max_deviation.unwrap() <= 1e-7);
        }
    }

    #[test]
    fn petersen_and_simplex_theorem() {
        let r = verify_sphere_theorem(&petersen_embedding(), 1e-9, SphereRoute::LargeSet { degree_bound: None }, "p")
            .unwrap();
        assert_eq!(r.status, Status::Pass, "{r:?}");
        assert_eq!(r.find("multiplicity_required"), Some(&4i64.into()));
        let simplex = SymMatrix::from_fn(4, |x, y| if x == y { 1.0 } else { -1.0 / 3.0 }).unwrap();
        let s = SphericalSet::from_gram(simplex, 1e-9).unwrap();
        assert_eq!(s.k_star(1), 1.0);
        let r = verify_sphere_theorem(&s, 1e-9, SphereRoute::LargeSet { degree_bound: None }, "simplex").unwrap();
        assert_eq!(r.status, Status::Pass, "{r:?}");
        assert_eq!(r.find("multiplicities"), Some(&vec![3usize].into()));
    }

    #[test]
    fn small_set_is_inconclusive() {
        // {e1, e2, -e1, e3}: inner products {0, -1} in R^3, 4 ≤ N(3, 1) = 4
        let pts = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        let g = SymMatrix::from_fn(4, |x, y| (0..3).map(|c| pts[x][c] * pts[y][c]).sum()).unwrap();
        let s = SphericalSet::from_gram(g, 1e-9).unwrap();
        assert_eq!((s.dimension(), s.s()), (3, 2));
        let r = verify_sphere_theorem(&s, 1e-9, SphereRoute::LargeSet { degree_bound: None }, "e1e2e3").unwrap();
        assert_eq!(r.status, Status::Inconclusive);
        let r = verify_sphere_theorem(&s, 1e-9, SphereRoute::LargeSet { degree_bound: Some(1) }, "e1e2e3").unwrap();
        assert_eq!(r.status, Status::HypothesisNotMet);
    }

    #[test]
    fn gram_text_roundtrip() {
        let g = pentagon();
        let back: SymMatrix<f64> = parse_gram(&gram_to_text(&g), 1e-12).unwrap();
        assert!(back.max_abs_diff(&g) == 0.0);
        assert!(matches!(parse_gram::<f64>("2\n1 0.5\n0.4 1\n", 1e-9), Err(SphericalError::NotUnitGram(_))));
        assert!(matches!(parse_gram::<f64>("2\n1 x\n0 1\n", 1e-9), Err(SphericalError::Parse { line: 2, .. })));
    }
}
