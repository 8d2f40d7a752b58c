//! Catalog constructions: cycles, complete graphs, Petersen, Hoffman–Singleton,
//! Paley, Johnson and Hamming, plus closed-form parameters for the last two.

use std::fmt;

use thiserror::Error;

use crate::combinatorics::{binomial, checked_pow, k_subsets, Overflow};
use crate::graphs::Graph;
use crate::numerics::{ensure_dense, from_usize, lit, NumericsError, Scalar};
use crate::schemes::{
    parametric_parameters, validate_scheme, IntersectionNumbers, RelationPartition, SchemeError, SchemeParameters,
    SeedSet,
};

pub const PALEY_MAX: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("invalid parameters for {family}: {msg}")]
    Domain { family: &'static str, msg: String },
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("closed-form parameters are only available for johnson and hamming, not {0}")]
    Unsupported(&'static str),
    #[error("distance partition is not a scheme: {0}")]
    NotAScheme(SchemeError),
    #[error("closed-form {what} disagrees with the parametric path at index {index}")]
    ClosedFormMismatch { what: &'static str, index: usize },
    #[error(transparent)]
    Overflow(#[from] Overflow),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    Cycle(usize),
    Complete(usize),
    Petersen,
    HoffmanSingleton,
    /// Prime `q ≡ 1 (mod 4)`.
    Paley(u64),
    /// `J(n, k)`: `k`-subsets of an `n`-set.
    Johnson { n: usize, k: usize },
    /// `H(d, q)`: words of length `d` over a `q`-letter alphabet.
    Hamming { d: usize, q: usize },
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Cycle(n) => write!(f, "C{n}"),
            FamilySpec::Complete(n) => write!(f, "K{n}"),
            FamilySpec::Petersen => f.write_str("Petersen"),
            FamilySpec::HoffmanSingleton => f.write_str("Hoffman-Singleton"),
            FamilySpec::Paley(q) => write!(f, "Paley({q})"),
            FamilySpec::Johnson { n, k } => write!(f, "J({n},{k})"),
            FamilySpec::Hamming { d, q } => write!(f, "H({d},{q})"),
        }
    }
}

fn is_prime(q: u64) -> bool {
    q >= 2 && (2..).take_while(|p| p * p <= q).all(|p| !q.is_multiple_of(p))
}

impl FamilySpec {
    pub fn family(&self) -> &'static str {
        match self {
            FamilySpec::Cycle(_) => "cycle",
            FamilySpec::Complete(_) => "complete",
            FamilySpec::Petersen => "petersen",
            FamilySpec::HoffmanSingleton => "hoffman_singleton",
            FamilySpec::Paley(_) => "paley",
            FamilySpec::Johnson { .. } => "johnson",
            FamilySpec::Hamming { .. } => "hamming",
        }
    }

    /// Builds a spec from a family name and integer arguments, as on the command line.
    pub fn from_args(name: &str, args: &[u64]) -> Result<Self, GeneratorError> {
        let family = match name.replace('-', "_").as_str() {
            "cycle" => "cycle",
            "complete" => "complete",
            "petersen" => "petersen",
            "hoffman_singleton" => "hoffman_singleton",
            "paley" => "paley",
            "johnson" => "johnson",
            "hamming" => "hamming",
            _ => return Err(GeneratorError::UnknownFamily(name.to_string())),
        };
        let want = match family {
            "petersen" | "hoffman_singleton" => 0,
            "johnson" | "hamming" => 2,
            _ => 1,
        };
        if args.len() != want {
            return Err(GeneratorError::Domain { family, msg: format!("expected {want} integer arguments") });
        }
        let a = |i: usize| args[i] as usize;
        let spec = match family {
            "cycle" => FamilySpec::Cycle(a(0)),
            "complete" => FamilySpec::Complete(a(0)),
            "petersen" => FamilySpec::Petersen,
            "hoffman_singleton" => FamilySpec::HoffmanSingleton,
            "paley" => FamilySpec::Paley(args[0]),
            "johnson" => FamilySpec::Johnson { n: a(0), k: a(1) },
            _ => FamilySpec::Hamming { d: a(0), q: a(1) },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        let family = self.family();
        let bad = |msg: &str| Err(GeneratorError::Domain { family, msg: msg.to_string() });
        match *self {
            FamilySpec::Cycle(n) if n < 3 => bad("cycle needs n ≥ 3"),
            FamilySpec::Complete(n) if n < 2 => bad("complete graph needs n ≥ 2"),
            FamilySpec::Paley(q) if !is_prime(q) || q % 4 != 1 || q > PALEY_MAX => {
                bad("q must be a prime ≡ 1 (mod 4) and at most 10000")
            }
            FamilySpec::Johnson { n, k } if !(n > k && k >= 1) => bad("need n > k ≥ 1"),
            FamilySpec::Hamming { d, q } if d < 1 || q < 2 => bad("need d ≥ 1 and q ≥ 2"),
            _ => Ok(()),
        }
    }

    /// Number of points, exact.
    pub fn point_count(&self) -> Result<u64, GeneratorError> {
        self.validate()?;
        Ok(match *self {
            FamilySpec::Cycle(n) | FamilySpec::Complete(n) => n as u64,
            FamilySpec::Petersen => 10,
            FamilySpec::HoffmanSingleton => 50,
            FamilySpec::Paley(q) => q,
            FamilySpec::Johnson { n, k } => binomial(n as i64, k as i64)?,
            FamilySpec::Hamming { d, q } => checked_pow(q as u64, u32::try_from(d).map_err(|_| Overflow("power"))?)?,
        })
    }
}

/// Builds the graph of the family (for Johnson and Hamming, the graph of the
/// first relation).
pub fn build_graph(spec: &FamilySpec, max_dense: usize) -> Result<Graph, GeneratorError> {
    let n = spec.point_count()?;
    ensure_dense(usize::try_from(n).unwrap_or(usize::MAX), max_dense)?;
    let n = n as usize;
    let g = match *spec {
        FamilySpec::Cycle(n) => Graph::from_predicate(n, |x, y| (x + 1) % n == y || (y + 1) % n == x),
        FamilySpec::Complete(n) => Graph::from_predicate(n, |x, y| x != y),
        FamilySpec::Petersen => {
            let sets = k_subsets(5, 2);
            Graph::from_predicate(10, |x, y| sets[x] & sets[y] == 0)
        }
        FamilySpec::HoffmanSingleton => hoffman_singleton(),
        FamilySpec::Paley(q) => {
            let mut square = vec![false; q as usize];
            for x in 1..q {
                square[(x * x % q) as usize] = true;
            }
            Graph::from_predicate(n, |x, y| square[(x + n - y) % n])
        }
        FamilySpec::Johnson { .. } | FamilySpec::Hamming { .. } => build_scheme(spec, max_dense)?.relation_graph(1),
    };
    Ok(g)
}

/// Pentagons `P_h` (`j ~ j ± 1`) and pentagrams `Q_i` (`j ~ j ± 2`), with
/// vertex `j` of `P_h` joined to vertex `h·i + j (mod 5)` of `Q_i`.
fn hoffman_singleton() -> Graph {
    let pentagon = |h: usize, j: usize| 5 * h + j;
    let pentagram = |i: usize, j: usize| 25 + 5 * i + j;
    let mut edges = Vec::with_capacity(175);
    for h in 0..5 {
        for j in 0..5 {
            edges.push((pentagon(h, j), pentagon(h, (j + 1) % 5)));
            edges.push((pentagram(h, j), pentagram(h, (j + 2) % 5)));
            for i in 0..5 {
                edges.push((pentagon(h, j), pentagram(i, (h * i + j) % 5)));
            }
        }
    }
    Graph::from_edges(50, &edges).expect("construction has no repeated edges")
}

/// Relation partition of the family: intersection size for Johnson, Hamming
/// distance for Hamming, graph distance otherwise. Validated as a scheme.
pub fn build_scheme(spec: &FamilySpec, max_dense: usize) -> Result<RelationPartition, GeneratorError> {
    let n = spec.point_count()?;
    ensure_dense(usize::try_from(n).unwrap_or(usize::MAX), max_dense)?;
    let n = n as usize;
    let rel = match *spec {
        FamilySpec::Johnson { n: ground, k } => {
            let sets = k_subsets(ground, k);
            let labels = (0..n * n).map(|p| k as u32 - (sets[p / n] & sets[p % n]).count_ones()).collect();
            RelationPartition::new(n, k.min(ground - k), labels)?
        }
        FamilySpec::Hamming { d, q } => {
            let words: Vec<Vec<usize>> =
                (0..n).map(|mut x| (0..d).map(|_| { let c = x % q; x /= q; c }).collect()).collect();
            let labels = (0..n * n)
                .map(|p| words[p / n].iter().zip(&words[p % n]).filter(|(a, b)| a != b).count() as u32)
                .collect();
            RelationPartition::new(n, d, labels)?
        }
        _ => RelationPartition::from_distances(&build_graph(spec, max_dense)?)?,
    };
    validate_scheme(&rel).map_err(GeneratorError::NotAScheme)?;
    Ok(rel)
}

fn to_i64(v: u64) -> Result<i64, Overflow> {
    i64::try_from(v).map_err(|_| Overflow("intersection number"))
}

fn mul(a: i64, b: i64) -> Result<i64, Overflow> {
    a.checked_mul(b).ok_or(Overflow("intersection number"))
}

fn factorial(n: usize) -> Result<i64, Overflow> {
    (1..=n as i64).try_fold(1i64, mul)
}

/// Intersection numbers of `J(n, k)` by counting how a `k`-set splits over
/// `x ∩ y`, `x \ y`, `y \ x` and the complement.
pub fn johnson_intersection(n: usize, k: usize) -> Result<IntersectionNumbers, Overflow> {
    let d = k.min(n - k);
    let (n, k) = (n as i64, k as i64);
    let mut p = IntersectionNumbers::zeros(d);
    for l in 0..=d as i64 {
        for i in 0..=d as i64 {
            for j in 0..=d as i64 {
                let mut total = 0i64;
                for a in 0..=(k - l) {
                    let (b, c, e) = (k - i - a, k - j - a, i + j + a - k);
                    if b < 0 || c < 0 || e < 0 {
                        continue;
                    }
                    let term = [binomial(k - l, a)?, binomial(l, b)?, binomial(l, c)?, binomial(n - k - l, e)?]
                        .into_iter()
                        .try_fold(1i64, |acc, v| mul(acc, to_i64(v)?))?;
                    total = total.checked_add(term).ok_or(Overflow("intersection number"))?;
                }
                p.set(i as usize, j as usize, l as usize, total);
            }
        }
    }
    Ok(p)
}

/// Intersection numbers of `H(d, q)`: over the `l` coordinates where `x` and
/// `y` differ, `z` agrees with `y`, with `x`, or with neither; over the rest it
/// either agrees with both or differs from both.
pub fn hamming_intersection(d: usize, q: usize) -> Result<IntersectionNumbers, Overflow> {
    let mut p = IntersectionNumbers::zeros(d);
    let q = q as i64;
    for l in 0..=d {
        for beta in 0..=l {
            for gamma in 0..=(l - beta) {
                let delta = l - beta - gamma;
                let split = factorial(l)? / (factorial(beta)? * factorial(gamma)? * factorial(delta)?);
                let neither = to_i64(checked_pow((q - 2) as u64, delta as u32)?)?;
                for alpha in 0..=(d - l) {
                    let i = alpha + beta + delta;
                    let j = alpha + gamma + delta;
                    let outside = mul(
                        to_i64(binomial((d - l) as i64, alpha as i64)?)?,
                        to_i64(checked_pow((q - 1) as u64, alpha as u32)?)?,
                    )?;
                    let term = mul(mul(outside, split)?, neither)?;
                    let cur = p.get(i, j, l);
                    p.set(i, j, l, cur.checked_add(term).ok_or(Overflow("intersection number"))?);
                }
            }
        }
    }
    Ok(p)
}

/// Closed-form spectrum data of a Johnson or Hamming scheme, indexed by class
/// (degrees) or idempotent (eigenvalues of the first relation, multiplicities).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedForm {
    pub points: u64,
    pub degrees: Vec<u64>,
    pub first_eigenvalues: Vec<i64>,
    pub multiplicities: Vec<u64>,
}

pub fn closed_form(spec: &FamilySpec) -> Result<ClosedForm, GeneratorError> {
    spec.validate()?;
    let points = spec.point_count()?;
    match *spec {
        FamilySpec::Johnson { n, k } => {
            let d = k.min(n - k);
            let (n, k) = (n as i64, k as i64);
            let degrees = (0..=d as i64)
                .map(|i| binomial(k, i)?.checked_mul(binomial(n - k, i)?).ok_or(Overflow("degree")))
                .collect::<Result<_, Overflow>>()?;
            let first_eigenvalues = (0..=d as i64).map(|j| (k - j) * (n - k - j) - j).collect();
            let multiplicities = (0..=d as i64)
                .map(|j| Ok(binomial(n, j)? - binomial(n, j - 1)?))
                .collect::<Result<_, Overflow>>()?;
            Ok(ClosedForm { points, degrees, first_eigenvalues, multiplicities })
        }
        FamilySpec::Hamming { d, q } => {
            let per = |j: usize| -> Result<u64, Overflow> {
                binomial(d as i64, j as i64)?.checked_mul(checked_pow(q as u64 - 1, j as u32)?).ok_or(Overflow("degree"))
            };
            let degrees: Vec<u64> = (0..=d).map(per).collect::<Result<_, _>>()?;
            let first_eigenvalues = (0..=d as i64).map(|j| d as i64 * (q as i64 - 1) - q as i64 * j).collect();
            Ok(ClosedForm { points, multiplicities: degrees.clone(), degrees, first_eigenvalues })
        }
        _ => Err(GeneratorError::Unsupported(spec.family())),
    }
}

pub fn family_intersection(spec: &FamilySpec) -> Result<IntersectionNumbers, GeneratorError> {
    spec.validate()?;
    match *spec {
        FamilySpec::Johnson { n, k } => Ok(johnson_intersection(n, k)?),
        FamilySpec::Hamming { d, q } => Ok(hamming_intersection(d, q)?),
        _ => Err(GeneratorError::Unsupported(spec.family())),
    }
}

/// Full parameters of a Johnson or Hamming scheme via the parametric path,
/// cross-checked against the closed-form degrees, first-relation eigenvalues
/// and multiplicities.
pub fn family_parameters<T: Scalar>(
    spec: &FamilySpec,
    tol: T,
    seeds: SeedSet,
) -> Result<SchemeParameters<T>, GeneratorError> {
    let cf = closed_form(spec)?;
    let p = family_intersection(spec)?;
    let n = usize::try_from(cf.points).map_err(|_| Overflow("point count"))?;
    let params = parametric_parameters(&p, n, tol, seeds)?;
    for (i, &k) in cf.degrees.iter().enumerate() {
        if params.degrees[i] != k {
            return Err(GeneratorError::ClosedFormMismatch { what: "degree", index: i });
        }
    }
    let check = lit::<T>(100.0) * tol;
    for j in 0..=params.d {
        let theta: T = lit(cf.first_eigenvalues[j] as f64);
        if (params.p_value(1, j) - theta).abs() > check {
            return Err(GeneratorError::ClosedFormMismatch { what: "eigenvalue", index: j });
        }
        let m: T = from_usize(cf.multiplicities[j] as usize);
        if (params.multiplicities[j] - m).abs() > check * m.max(T::one()) {
            return Err(GeneratorError::ClosedFormMismatch { what: "multiplicity", index: j });
        }
    }
    Ok(params)
}

/// Every catalog entry small enough for the explicit path.
pub fn catalog() -> Vec<FamilySpec> {
    vec![
        FamilySpec::Complete(4),
        FamilySpec::Complete(6),
        FamilySpec::Cycle(5),
        FamilySpec::Cycle(6),
        FamilySpec::Cycle(7),
        FamilySpec::Petersen,
        FamilySpec::HoffmanSingleton,
        FamilySpec::Paley(13),
        FamilySpec::Johnson { n: 5, k: 2 },
        FamilySpec::Johnson { n: 6, k: 3 },
        FamilySpec::Johnson { n: 8, k: 3 },
        FamilySpec::Hamming { d: 3, q: 2 },
        FamilySpec::Hamming { d: 3, q: 3 },
        FamilySpec::Hamming { d: 2, q: 4 },
    ]
}
