//! Runs every applicable check on a graph or a scheme and collects the
//! reports; also the threshold scans over Johnson and Hamming families.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::{family_parameters, FamilySpec, GeneratorError};
use crate::graphs::{
    distance_data, girth, large_graph_report, moore_bound, spectral_projectors, verify_projector_entries, Graph,
    GraphError,
};
use crate::numerics::{ensure_dense, lit, NumericsError, Scalar};
use crate::polyprops::{
    check_p_large, check_product_formula_p, check_product_formula_q, check_q_large, p_polynomial_ordering,
    q_polynomial_ordering, PolyError, PolyStatus, PolyVerdict,
};
use crate::report::{Status, TheoremReport, Value, Witness};
use crate::schemes::{Scheme, SchemeError, SeedSet};
use crate::spherical::{absolute_bound, verify_sphere_theorem, SphereRoute, SphericalError, SphericalSet};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Spherical(#[from] SphericalError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Clone, Copy, Debug)]
pub struct AnalysisOptions<T> {
    pub tol: T,
    pub max_dense: usize,
    pub seeds: SeedSet,
    pub sphere_route: SphereRoute,
}

impl<T: Scalar> Default for AnalysisOptions<T> {
    fn default() -> Self {
        Self {
            tol: lit(crate::numerics::DEFAULT_TOL),
            max_dense: crate::numerics::DEFAULT_MAX_DENSE,
            seeds: SeedSet::Primary,
            sphere_route: SphereRoute::LargeSet { degree_bound: None },
        }
    }
}

fn f64_of<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exit status rule: a run fails only if some report failed.
pub fn any_failed(reports: &[TheoremReport]) -> bool {
    reports.iter().any(|r| r.status == Status::Fail)
}

/// Structure, projector identities, forced entries and the Moore-bound
/// consequences of a graph.
pub fn analyze_graph<T: Scalar>(
    g: &Graph,
    subject: &str,
    opts: &AnalysisOptions<T>,
) -> Result<Vec<TheoremReport>, AnalysisError> {
    ensure_dense(g.n(), opts.max_dense)?;
    let tol = opts.tol;
    let tol64 = f64_of(tol);
    let dd = distance_data(g);
    let mut structure = TheoremReport::new(subject, "graph-structure", tol64);
    structure
        .evidence("n", g.n())
        .evidence("edges", g.edge_count())
        .evidence("connected", dd.connected)
        .evidence("girth", girth(g).map_or(Value::Text("acyclic".into()), Value::from));
    if dd.connected {
        structure.evidence("diameter", dd.diameter as usize);
    }
    let mut reports = Vec::new();
    match (g.regular_degree(), dd.connected) {
        (None, _) => {
            structure.settle(Status::HypothesisNotMet, "not regular");
        }
        (Some(_), false) => {
            structure.settle(Status::HypothesisNotMet, "not connected");
        }
        (Some(k), true) => {
            structure.evidence("degree", k);
            let fam = spectral_projectors(g, tol)?;
            structure
                .evidence("spectrum", fam.spectrum.values.iter().map(|&v| f64_of(v)).collect::<Vec<_>>())
                .evidence("spectrum_multiplicities", fam.spectrum.multiplicities.clone());
            let s = fam.spectrum.len() - 1;
            if s >= 1 {
                if let Ok(m) = moore_bound(k as u64, s as u32 - 1) {
                    structure.evidence("moore_bound_d_minus_1", m);
                }
            }
            let mut ident = TheoremReport::new(subject, "projector-identities", tol64);
            let res = fam.residuals(&g.adjacency_matrix::<T>());
            ident
                .evidence("idempotency", f64_of(res.idempotency))
                .evidence("orthogonality", f64_of(res.orthogonality))
                .evidence("resolution", f64_of(res.resolution))
                .evidence("reconstruction", f64_of(res.reconstruction))
                .deviation(f64_of(res.max()));
            if res.max() > lit::<T>(100.0) * tol {
                ident.fail(
                    format!("projector identities violated by {}", f64_of(res.max())),
                    Witness::Index { label: "eigenvalue count".into(), value: fam.spectrum.len() },
                );
            }
            reports.push(ident);
        }
    }
    reports.insert(0, structure);
    reports.push(verify_projector_entries(g, tol)?);
    reports.push(large_graph_report(g, tol)?);
    for r in &mut reports {
        r.subject = subject.to_string();
    }
    Ok(reports)
}

fn describe(status: &PolyStatus) -> String {
    match status {
        PolyStatus::Polynomial { .. } => "polynomial".into(),
        PolyStatus::NotPolynomial(r) => format!("not polynomial: {r}"),
        PolyStatus::Inconclusive(r) => format!("inconclusive: {r}"),
    }
}

fn verdict_report(subject: &str, theorem: &str, j: usize, tol: f64, v: &PolyVerdict) -> TheoremReport {
    let mut r = TheoremReport::new(subject, theorem, tol);
    r.evidence("j", j).evidence("verdict", describe(&v.status));
    if let Some(o) = v.ordering() {
        r.evidence("ordering", o.to_vec());
        r.witness(Witness::Ordering { label: "ordering".into(), order: o.to_vec() });
    }
    if let Some(l) = v.witness {
        r.evidence("witness_l", l);
        r.witness(Witness::Index { label: "l".into(), value: l });
    }
    r.evidence.extend(v.evidence.iter().cloned());
    r
}

fn j_witness(j: usize) -> Witness {
    Witness::Index { label: "j".into(), value: j }
}

/// Size-condition report: polynomial is a pass, a failed size hypothesis is
/// inconclusive, and a detector contradicting the conclusion is a failure.
fn large_report(
    subject: &str,
    theorem: &str,
    j: usize,
    tol: f64,
    result: Result<PolyVerdict, PolyError>,
) -> Result<TheoremReport, AnalysisError> {
    match result {
        Ok(v) => {
            let mut r = verdict_report(subject, theorem, j, tol, &v);
            match &v.status {
                PolyStatus::Polynomial { .. } => {}
                PolyStatus::Inconclusive(reason) if reason.contains("not separated") => {
                    r.settle(Status::HypothesisNotMet, reason.clone());
                }
                PolyStatus::Inconclusive(reason) => {
                    r.settle(Status::Inconclusive, reason.clone());
                }
                PolyStatus::NotPolynomial(reason) => {
                    r.fail(format!("sufficient condition returned not polynomial: {reason}"), j_witness(j));
                }
            }
            Ok(r)
        }
        Err(e @ PolyError::DetectorDisagreement { .. }) => {
            let mut r = TheoremReport::new(subject, theorem, tol);
            r.evidence("j", j).fail(e.to_string(), j_witness(j));
            Ok(r)
        }
        Err(e) => Err(e.into()),
    }
}

/// Product-formula report: the formula must agree with the detector, and its
/// witness must be the last index of the detected ordering.
fn product_report(
    subject: &str,
    theorem: &str,
    j: usize,
    tol: f64,
    formula: &PolyVerdict,
    detector: &PolyVerdict,
) -> TheoremReport {
    let mut r = verdict_report(subject, theorem, j, tol, formula);
    r.evidence("detector_verdict", describe(&detector.status));
    if let PolyStatus::Inconclusive(reason) = &formula.status {
        r.settle(Status::HypothesisNotMet, reason.clone());
        return r;
    }
    if formula.is_polynomial() != detector.is_polynomial() {
        r.fail("product formula and ordering detector disagree", j_witness(j));
        return r;
    }
    if let (Some(l), Some(o)) = (formula.witness, detector.ordering()) {
        let last = *o.last().expect("nonempty ordering");
        r.evidence("ordering_last", last);
        if l != last {
            r.fail(format!("witness l = {l} but the ordering ends at {last}"), Witness::Index { label: "l".into(), value: l });
        }
    }
    r
}

/// All checks on a scheme: parameter health, and for each `j` the P- and
/// Q-side detectors, size conditions, product formulas, and (for explicit
/// schemes) the spherical embedding of `E_j`.
pub fn analyze_scheme<T: Scalar>(
    scheme: &Scheme<T>,
    subject: &str,
    opts: &AnalysisOptions<T>,
) -> Result<Vec<TheoremReport>, AnalysisError> {
    let tol = opts.tol;
    let tol64 = f64_of(tol);
    let params = &scheme.params;
    let d = params.d;
    let mut reports = Vec::new();

    let mut health = TheoremReport::new(subject, "scheme-parameters", tol64);
    let pq = params.pq_deviation();
    let krein_min = params.krein.min();
    health
        .evidence("n", params.n)
        .evidence("d", d)
        .evidence("mode", if scheme.relations.is_some() { "explicit" } else { "parametric" })
        .evidence("degrees", params.degrees.iter().map(|&k| k as usize).collect::<Vec<_>>())
        .evidence("multiplicities", params.multiplicities.iter().map(|&m| f64_of(m)).collect::<Vec<_>>())
        .evidence("krein_min", f64_of(krein_min))
        .evidence("pq_deviation", f64_of(pq))
        .deviation(f64_of(pq));
    for j in 0..=d {
        health.evidence(format!("P_row_{j}"), params.p.row(j).iter().map(|&v| f64_of(v)).collect::<Vec<_>>());
    }
    for j in 0..=d {
        health.evidence(format!("Q_row_{j}"), params.q.row(j).iter().map(|&v| f64_of(v)).collect::<Vec<_>>());
    }
    if pq > lit::<T>(100.0) * tol {
        health.fail(format!("PQ ≠ nI by {}", f64_of(pq)), Witness::Index { label: "d".into(), value: d });
    }
    if krein_min < -lit::<T>(100.0) * tol {
        health.fail("negative Krein parameter", Witness::Index { label: "d".into(), value: d });
    }
    reports.push(health);

    for j in 1..=d {
        let pdet = p_polynomial_ordering(scheme, j, tol)?;
        let mut pord = verdict_report(subject, "p-ordering", j, tol64, &pdet);
        if pdet.find("degree_separated") == Some(&Value::Bool(false)) {
            pord.settle(Status::HypothesisNotMet, "degree not separated");
        } else if scheme.relations.is_some() {
            let diameter_is_d = pdet.find("diameter") == Some(&Value::from(d));
            if diameter_is_d != pdet.is_polynomial() {
                pord.fail("diameter of (X, R_j) equals d but the classes differ from the relations", j_witness(j));
            }
        }
        reports.push(pord);
        reports.push(large_report(subject, "p-large", j, tol64, check_p_large(scheme, j, tol))?);
        reports.push(product_report(
            subject,
            "p-product-formula",
            j,
            tol64,
            &check_product_formula_p(params, j, tol),
            &pdet,
        ));

        let qdet = q_polynomial_ordering(scheme, j, tol)?;
        let mut qord = verdict_report(subject, "q-ordering", j, tol64, &qdet);
        if qdet.find("multiplicity_separated") == Some(&Value::Bool(false)) {
            qord.settle(Status::HypothesisNotMet, "multiplicity not separated");
        }
        reports.push(qord);
        reports.push(large_report(subject, "q-large", j, tol64, check_q_large(scheme, j, tol))?);
        reports.push(product_report(
            subject,
            "q-product-formula",
            j,
            tol64,
            &check_product_formula_q(params, j, tol),
            &qdet,
        ));

        if let Some(idem) = &scheme.idempotents {
            let r = match SphericalSet::from_idempotent(&idem[j], tol) {
                Ok(set) => {
                    let mut r = verify_sphere_theorem(&set, tol, opts.sphere_route, subject)?;
                    r.evidence.insert(0, crate::report::Evidence { name: "j".into(), value: j.into() });
                    r
                }
                Err(SphericalError::NotUnitGram(reason)) => {
                    let mut r = TheoremReport::new(subject, "sphere-eigenvalue", tol64);
                    r.evidence("j", j).settle(Status::HypothesisNotMet, reason);
                    r
                }
                Err(e) => return Err(e.into()),
            };
            reports.push(r);
        }
    }
    Ok(reports)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanFamily {
    /// `J(n, 3)` over `n`.
    Johnson3,
    /// `H(3, q)` over `q`.
    Hamming3,
}

impl ScanFamily {
    pub fn spec(self, param: usize) -> FamilySpec {
        match self {
            ScanFamily::Johnson3 => FamilySpec::Johnson { n: param, k: 3 },
            ScanFamily::Hamming3 => FamilySpec::Hamming { d: 3, q: param },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub param: usize,
    pub n: Option<u64>,
    pub degree: Option<u64>,
    pub moore_bound: Option<u64>,
    pub p_holds: bool,
    pub multiplicity: Option<u64>,
    pub absolute_bound: Option<u64>,
    pub q_holds: bool,
    pub error: Option<String>,
}

/// Where a size condition first holds in a scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub first_success: Option<usize>,
    /// Largest scanned parameter where the condition fails.
    pub boundary_failure: Option<usize>,
    /// The condition holds at every parameter after the first success.
    pub monotone: bool,
}

impl Threshold {
    fn from_rows(rows: &[ScanRow], holds: impl Fn(&ScanRow) -> bool) -> Self {
        let first = rows.iter().position(&holds);
        Self {
            first_success: first.map(|i| rows[i].param),
            boundary_failure: rows.iter().filter(|r| !holds(r)).map(|r| r.param).max(),
            monotone: first.is_none_or(|i| rows[i..].iter().all(&holds)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub family: ScanFamily,
    pub rows: Vec<ScanRow>,
    pub p_threshold: Threshold,
    pub q_threshold: Threshold,
}

fn scan_row<T: Scalar>(family: ScanFamily, param: usize, tol: T, seeds: SeedSet) -> Result<ScanRow, AnalysisError> {
    let params = family_parameters(&family.spec(param), tol, seeds)?;
    let scheme = Scheme { relations: None, idempotents: None, params };
    let p = check_p_large(&scheme, 1, tol)?;
    let q = check_q_large(&scheme, 1, tol)?;
    let int = |v: &PolyVerdict, name: &str| match v.find(name) {
        Some(Value::Int(x)) => Some(*x as u64),
        _ => None,
    };
    Ok(ScanRow {
        param,
        n: Some(scheme.params.n as u64),
        degree: int(&p, "k_j"),
        moore_bound: int(&p, "moore_bound_d_minus_1"),
        p_holds: p.is_polynomial(),
        multiplicity: int(&q, "m_j"),
        absolute_bound: int(&q, "absolute_bound_d_minus_1"),
        q_holds: q.is_polynomial(),
        error: None,
    })
}

/// Evaluates both size conditions with respect to the first relation and the
/// first nontrivial idempotent across `params`. Failures are kept per row.
pub fn scan<T: Scalar>(
    family: ScanFamily,
    params: impl IntoIterator<Item = usize>,
    tol: T,
    seeds: SeedSet,
) -> ScanResult {
    let rows: Vec<ScanRow> = params
        .into_iter()
        .map(|param| {
            scan_row(family, param, tol, seeds).unwrap_or_else(|e| ScanRow {
                param,
                n: None,
                degree: None,
                moore_bound: None,
                p_holds: false,
                multiplicity: None,
                absolute_bound: None,
                q_holds: false,
                error: Some(e.to_string()),
            })
        })
        .collect();
    ScanResult {
        family,
        p_threshold: Threshold::from_rows(&rows, |r| r.p_holds),
        q_threshold: Threshold::from_rows(&rows, |r| r.q_holds),
        rows,
    }
}

/// Rows indexed by the first argument from 1, columns by `d` from 0; `None`
/// marks overflow.
pub type BoundTable = Vec<Vec<Option<u64>>>;

/// `M(k, d)` and `N(m, d)` over small grids, as printed by the CLI.
pub fn bound_tables(max_arg: u64, max_d: u64) -> (BoundTable, BoundTable) {
    let moore = (1..=max_arg).map(|k| (0..=max_d).map(|d| moore_bound(k, d as u32).ok()).collect()).collect();
    let abs = (1..=max_arg).map(|m| (0..=max_d).map(|d| absolute_bound(m, d).ok()).collect()).collect();
    (moore, abs)
}
