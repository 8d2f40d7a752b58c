//! P- and Q-polynomial structure: ordering detectors, the size-based
//! sufficient conditions, and the product-formula characterizations.
//!
//! The ordering detectors are exact tests and do not need the separation
//! hypothesis (`P_j(0)` distinct from the other `P_j(i)`); that hypothesis only
//! gates the diameter and Schur-diameter equivalences and the theorem checks.

use thiserror::Error;

use crate::combinatorics::Overflow;
use crate::graphs::{distance_data, lagrange_ratio, moore_bound};
use crate::numerics::{from_usize, Scalar};
use crate::report::{Evidence, Value};
use crate::schemes::{Scheme, SchemeParameters};
use crate::spherical::{absolute_bound, schur_diameter, SphericalError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error(transparent)]
    Overflow(#[from] Overflow),
    #[error("detectors disagree for {kind}-polynomiality with respect to index {index}: {msg}")]
    DetectorDisagreement { kind: PolyKind, index: usize, msg: String },
    #[error("methods disagree for E_{index}: Krein path says {krein}, Schur-diameter is {schur:?} with d = {d}")]
    MethodsDisagree { index: usize, krein: bool, schur: Option<usize>, d: usize },
    #[error("multiplicity m_{index} = {value} is not an integer")]
    NonIntegralMultiplicity { index: usize, value: f64 },
    #[error(transparent)]
    Spherical(#[from] SphericalError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyKind {
    P,
    Q,
}

impl std::fmt::Display for PolyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PolyKind::P => "P",
            PolyKind::Q => "Q",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PolyStatus {
    /// Ordering of classes (P) or idempotents (Q), starting `0, j`, when known.
    Polynomial { ordering: Option<Vec<usize>> },
    NotPolynomial(String),
    Inconclusive(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolyVerdict {
    pub kind: PolyKind,
    pub base_index: usize,
    pub status: PolyStatus,
    /// Index `l` found by a product formula.
    pub witness: Option<usize>,
    pub evidence: Vec<Evidence>,
}

impl PolyVerdict {
    fn new(kind: PolyKind, base_index: usize) -> Self {
        Self { kind, base_index, status: PolyStatus::Inconclusive("not evaluated".into()), witness: None, evidence: Vec::new() }
    }

    fn note(&mut self, name: &str, value: impl Into<Value>) -> &mut Self {
        self.evidence.push(Evidence { name: name.to_string(), value: value.into() });
        self
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self.status, PolyStatus::Polynomial { .. })
    }

    pub fn ordering(&self) -> Option<&[usize]> {
        match &self.status {
            PolyStatus::Polynomial { ordering: Some(o) } => Some(o),
            _ => None,
        }
    }

    pub fn find(&self, name: &str) -> Option<&Value> {
        self.evidence.iter().find(|e| e.name == name).map(|e| &e.value)
    }

    fn settle_ordering(&mut self, found: Result<Vec<usize>, String>) {
        self.status = match found {
            Ok(o) => PolyStatus::Polynomial { ordering: Some(o) },
            Err(reason) => PolyStatus::NotPolynomial(reason),
        };
    }
}

fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn reals<T: Scalar>(xs: &[T]) -> Vec<f64> {
    xs.iter().map(|&x| to_f64(x)).collect()
}

/// `values[0]` differs from every later value by more than `tol`.
fn separated<T: Scalar>(values: &[T], tol: T) -> bool {
    values[1..].iter().all(|&v| (v - values[0]).abs() > tol)
}

fn mutually_distinct<T: Scalar>(values: &[T], tol: T) -> bool {
    (0..values.len()).all(|a| ((a + 1)..values.len()).all(|b| (values[a] - values[b]).abs() > tol))
}

/// Breadth-first levels from index 0 in the graph `adjacent(i, h)` on
/// `0..=d`. Succeeds when every level is a single index and all are reached.
fn path_ordering(d: usize, adjacent: impl Fn(usize, usize) -> bool) -> Result<Vec<usize>, String> {
    let mut order = vec![0];
    let mut seen = vec![false; d + 1];
    seen[0] = true;
    while order.len() <= d {
        let last = *order.last().expect("nonempty");
        let level: Vec<usize> = (0..=d).filter(|&h| !seen[h] && order.iter().any(|&i| adjacent(i, h))).collect();
        match level.as_slice() {
            [] => {
                let missing: Vec<usize> = (0..=d).filter(|&h| !seen[h]).collect();
                return Err(format!("indices {missing:?} unreachable from 0"));
            }
            [h] => {
                if !adjacent(last, *h) {
                    return Err(format!("index {h} is not adjacent to {last}"));
                }
                seen[*h] = true;
                order.push(*h);
            }
            many => return Err(format!("level {} contains indices {many:?}", order.len())),
        }
    }
    Ok(order)
}

/// P-ordering from intersection numbers: `i → h` when `p_{j,i}^h > 0`.
fn parametric_p_ordering<T: Scalar>(params: &SchemeParameters<T>, j: usize) -> Result<Vec<usize>, String> {
    path_ordering(params.d, |i, h| params.intersection.get(j, i, h) > 0)
}

/// Detects P-polynomiality with respect to `A_j`. With relations available
/// the distance partition of `(X, R_j)` is compared with the relation
/// classes; otherwise the intersection numbers are walked. The explicit test
/// is also checked against the parametric one.
pub fn p_polynomial_ordering<T: Scalar>(scheme: &Scheme<T>, j: usize, tol: T) -> Result<PolyVerdict, PolyError> {
    let params = &scheme.params;
    let d = params.d;
    let mut v = PolyVerdict::new(PolyKind::P, j);
    v.note("degree_separated", separated(&params.p_sequence(j), tol));
    let parametric = parametric_p_ordering(params, j);
    let Some(rel) = &scheme.relations else {
        v.note("method", "index-graph walk over p_{j,i}^h > 0");
        v.settle_ordering(parametric);
        return Ok(v);
    };
    v.note("method", "distance partition of (X, R_j)");
    let dd = distance_data(&rel.relation_graph(j));
    v.note("connected", dd.connected);
    let explicit = if !dd.connected {
        Err(format!("graph (X, R_{j}) is disconnected"))
    } else {
        v.note("diameter", dd.diameter as usize);
        let mut class_of_distance = vec![usize::MAX; dd.diameter as usize + 1];
        let mut distance_of_class = vec![u32::MAX; d + 1];
        let n = rel.n();
        let mut mismatch = None;
        'pairs: for x in 0..n {
            for y in 0..n {
                let (t, l) = (dd.dist(x, y), rel.label(x, y));
                let c = &mut class_of_distance[t as usize];
                let s = &mut distance_of_class[l];
                if *c == usize::MAX && *s == u32::MAX {
                    *c = l;
                    *s = t;
                } else if *c != l || *s != t {
                    mismatch = Some((x, y, t, l));
                    break 'pairs;
                }
            }
        }
        match mismatch {
            Some((x, y, t, l)) => {
                v.note("witness_pair", vec![x, y]);
                Err(format!("pair ({x}, {y}) at distance {t} lies in relation {l}, splitting a class"))
            }
            None if dd.diameter as usize != d => Err(format!("diameter {} differs from d = {d}", dd.diameter)),
            None => Ok(class_of_distance),
        }
    };
    if explicit.is_ok() != parametric.is_ok() || (explicit.is_ok() && explicit != parametric) {
        return Err(PolyError::DetectorDisagreement {
            kind: PolyKind::P,
            index: j,
            msg: format!("distance partition gives {explicit:?}, intersection walk gives {parametric:?}"),
        });
    }
    v.settle_ordering(explicit);
    Ok(v)
}

/// Size condition `n > M(k_j, d-1)`: when it holds the scheme is P-polynomial
/// with respect to `A_j`. The comparison is exact. An explicit scheme also has
/// its ordering detected, which must agree.
pub fn check_p_large<T: Scalar>(scheme: &Scheme<T>, j: usize, tol: T) -> Result<PolyVerdict, PolyError> {
    let params = &scheme.params;
    let d = params.d;
    let mut v = PolyVerdict::new(PolyKind::P, j);
    let k = params.degrees[j];
    let bound = moore_bound(k, d as u32 - 1)?;
    v.note("n", params.n).note("k_j", k).note("d", d).note("moore_bound_d_minus_1", bound);
    if !separated(&params.p_sequence(j), tol) {
        v.status = PolyStatus::Inconclusive("degree not separated".into());
        return Ok(v);
    }
    if params.n as u64 <= bound {
        v.status = PolyStatus::Inconclusive("size hypothesis not met".into());
        return Ok(v);
    }
    let ordering = if scheme.relations.is_some() {
        let detected = p_polynomial_ordering(scheme, j, tol)?;
        match detected.ordering() {
            Some(o) => Some(o.to_vec()),
            None => {
                return Err(PolyError::DetectorDisagreement {
                    kind: PolyKind::P,
                    index: j,
                    msg: format!("size condition holds but the detector reports {:?}", detected.status),
                })
            }
        }
    } else {
        None
    };
    v.status = PolyStatus::Polynomial { ordering };
    Ok(v)
}

/// Searches `l` with `target(h, l) = -lhs[h-1]` for every `h ∈ 1..=d`.
fn product_search<T: Scalar>(
    v: &mut PolyVerdict,
    lhs: &[T],
    d: usize,
    tol: T,
    target: impl Fn(usize, usize) -> T,
) {
    let matches: Vec<usize> = (0..=d)
        .filter(|&l| {
            (1..=d).all(|h| {
                let t = target(h, l);
                (lhs[h - 1] + t).abs() <= tol * T::one().max(t.abs())
            })
        })
        .collect();
    v.note("lhs", reals(lhs)).note("matching_l", matches.clone());
    match matches.first() {
        None => v.status = PolyStatus::NotPolynomial("no l satisfies the product formula".into()),
        Some(&l) => {
            if matches.len() > 1 {
                v.note("anomaly", "several l satisfy the product formula");
            }
            v.witness = Some(l);
            v.status = PolyStatus::Polynomial { ordering: None };
        }
    }
}

/// `Π_{i≠h} (P_j(0) - P_j(i)) / (P_j(h) - P_j(i)) = -Q_h(l)` for some `l`.
pub fn check_product_formula_p<T: Scalar>(params: &SchemeParameters<T>, j: usize, tol: T) -> PolyVerdict {
    let mut v = PolyVerdict::new(PolyKind::P, j);
    let seq = params.p_sequence(j);
    v.note("eigenvalues", reals(&seq));
    if !mutually_distinct(&seq, tol) {
        v.status = PolyStatus::Inconclusive("eigenvalues of A_j not mutually distinct".into());
        return v;
    }
    let lhs: Vec<T> = (1..=params.d).map(|h| lagrange_ratio(&seq, h)).collect();
    product_search(&mut v, &lhs, params.d, tol, |h, l| params.q_value(h, l));
    v
}

/// Q-ordering from Krein parameters: `h → i` when `q_{j,h}^i > tol`.
fn krein_ordering<T: Scalar>(params: &SchemeParameters<T>, j: usize, tol: T) -> Result<Vec<usize>, String> {
    path_ordering(params.d, |h, i| params.krein.get(j, h, i) > tol)
}

/// Detects Q-polynomiality with respect to `E_j` along the Krein path. When
/// the idempotents are available and `Q_j(0)` is separated, the
/// Schur-diameter of `E_j` is compared against `d`; disagreement is an error.
pub fn q_polynomial_ordering<T: Scalar>(scheme: &Scheme<T>, j: usize, tol: T) -> Result<PolyVerdict, PolyError> {
    let params = &scheme.params;
    let d = params.d;
    let mut v = PolyVerdict::new(PolyKind::Q, j);
    let separated_q = separated(&params.q_sequence(j), tol);
    v.note("method", "Krein path over q_{j,h}^i > tol").note("multiplicity_separated", separated_q);
    let krein = krein_ordering(params, j, tol);
    match (&scheme.idempotents, separated_q) {
        (Some(idem), true) => {
            let n: T = from_usize(params.n);
            let gram = idem[j].scale(n / idem[j].trace());
            let schur = match schur_diameter(&gram, tol, d) {
                Ok(t) => Some(t),
                Err(SphericalError::SchurDisconnected { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            v.note("schur_diameter", schur.map_or(Value::Text("disconnected".into()), Value::from));
            if krein.is_ok() != (schur == Some(d)) {
                return Err(PolyError::MethodsDisagree { index: j, krein: krein.is_ok(), schur, d });
            }
        }
        (Some(_), false) => {
            v.note("schur_cross_check", "skipped: Q_j(0) not separated");
        }
        (None, _) => {
            v.note("schur_cross_check", "skipped: no idempotents");
        }
    }
    v.settle_ordering(krein);
    Ok(v)
}

/// Size condition `n > N(m_j, d-1)`, compared exactly after snapping `m_j`
/// to an integer. An explicit scheme also has its Q-ordering detected.
pub fn check_q_large<T: Scalar>(scheme: &Scheme<T>, j: usize, tol: T) -> Result<PolyVerdict, PolyError> {
    let params = &scheme.params;
    let d = params.d;
    let mut v = PolyVerdict::new(PolyKind::Q, j);
    let raw = params.multiplicities[j];
    let m = raw.round();
    if (raw - m).abs() > tol * T::one().max(m) || m < T::one() {
        return Err(PolyError::NonIntegralMultiplicity { index: j, value: to_f64(raw) });
    }
    let m = m.to_u64().expect("positive integer");
    let bound = absolute_bound(m, d as u64 - 1)?;
    v.note("n", params.n).note("m_j", m).note("d", d).note("absolute_bound_d_minus_1", bound);
    if !separated(&params.q_sequence(j), tol) {
        v.status = PolyStatus::Inconclusive("multiplicity not separated".into());
        return Ok(v);
    }
    if params.n as u64 <= bound {
        v.status = PolyStatus::Inconclusive("size hypothesis not met".into());
        return Ok(v);
    }
    let ordering = if scheme.idempotents.is_some() {
        let detected = q_polynomial_ordering(scheme, j, tol)?;
        match detected.ordering() {
            Some(o) => Some(o.to_vec()),
            None => {
                return Err(PolyError::DetectorDisagreement {
                    kind: PolyKind::Q,
                    index: j,
                    msg: format!("size condition holds but the detector reports {:?}", detected.status),
                })
            }
        }
    } else {
        None
    };
    v.status = PolyStatus::Polynomial { ordering };
    Ok(v)
}

/// `Π_{i≠h} (Q_j(0) - Q_j(i)) / (Q_j(h) - Q_j(i)) = -P_h(l)` for some `l`.
pub fn check_product_formula_q<T: Scalar>(params: &SchemeParameters<T>, j: usize, tol: T) -> PolyVerdict {
    let mut v = PolyVerdict::new(PolyKind::Q, j);
    let seq = params.q_sequence(j);
    v.note("dual_eigenvalues", reals(&seq));
    if !mutually_distinct(&seq, tol) {
        v.status = PolyStatus::Inconclusive("values Q_j(i) not mutually distinct".into());
        return v;
    }
    let lhs: Vec<T> = (1..=params.d).map(|h| lagrange_ratio(&seq, h)).collect();
    product_search(&mut v, &lhs, params.d, tol, |h, l| params.p_value(h, l));
    v
}
