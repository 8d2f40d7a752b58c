//! Plain-text rendering of reports, scans and bound tables.

use std::fmt::Write as _;

use schemecheck_core::analysis::{BoundTable, ScanResult, Threshold};
use schemecheck_core::report::{TheoremReport, Value, Witness};
use schemecheck_core::Status;

const MAX_DENOMINATOR: i64 = 64;

/// Integers and fractions with small denominators print exactly when `x` is
/// within `tol` of them; everything else prints as a decimal.
pub fn real(x: f64, tol: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x != 0.0 && x.abs() < 1e-6 {
        return format!("{x:.3e}");
    }
    let slack = tol * x.abs().max(1.0);
    for q in 1..=MAX_DENOMINATOR {
        let p = (x * q as f64).round();
        if (x - p / q as f64).abs() <= slack {
            let p = p as i64;
            return if q == 1 { p.to_string() } else { format!("{p}/{q}") };
        }
    }
    if x.abs() >= 1e6 {
        return format!("{x:.6e}");
    }
    let s = format!("{x:.9}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn value(v: &Value, tol: f64) -> String {
    match v {
        Value::Int(x) => x.to_string(),
        Value::Real(x) => real(*x, tol),
        Value::Bool(b) => b.to_string(),
        Value::Text(s) => s.clone(),
        Value::Reals(xs) => format!("[{}]", xs.iter().map(|&x| real(x, tol)).collect::<Vec<_>>().join(", ")),
        Value::Indices(xs) => format!("{xs:?}"),
    }
}

fn witness(w: &Witness) -> String {
    match w {
        Witness::Pair { label, x, y } => format!("pair ({x}, {y}): {label}"),
        Witness::Index { label, value } => format!("{label} = {value}"),
        Witness::Ordering { label, order } => format!("{label} {order:?}"),
    }
}

fn status_tag(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Inconclusive => "INCONCLUSIVE",
        Status::HypothesisNotMet => "HYPOTHESIS-NOT-MET",
    }
}

pub fn reports(reports: &[TheoremReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = write!(out, "[{}] {} :: {} (tol {:e}", status_tag(r.status), r.subject, r.theorem, r.tolerance);
        if let Some(d) = r.max_deviation {
            let _ = write!(out, ", max deviation {d:.2e}");
        }
        out.push_str(")\n");
        for e in &r.evidence {
            let _ = writeln!(out, "    {}: {}", e.name, value(&e.value, r.tolerance));
        }
        for w in &r.witnesses {
            let _ = writeln!(out, "    witness: {}", witness(w));
        }
    }
    let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
    let _ = writeln!(
        out,
        "{} checks: {} pass, {} fail, {} inconclusive, {} hypothesis not met",
        reports.len(),
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Inconclusive),
        count(Status::HypothesisNotMet)
    );
    out
}

fn opt(x: Option<u64>) -> String {
    x.map_or("-".into(), |v| v.to_string())
}

fn threshold(name: &str, param: &str, t: &Threshold) -> String {
    let first = t.first_success.map_or("never".into(), |p| format!("{param} = {p}"));
    let boundary = t.boundary_failure.map_or("none".into(), |p| format!("{param} = {p}"));
    let tail = if t.monotone { "holds for every later parameter" } else { "NOT monotone after first success" };
    format!("{name}: first success {first}, boundary failure {boundary}, {tail}\n")
}

pub fn scan(res: &ScanResult) -> String {
    let param = match res.family {
        schemecheck_core::ScanFamily::Johnson3 => "n",
        schemecheck_core::ScanFamily::Hamming3 => "q",
    };
    let mut out = format!(
        "{:>6} {:>12} {:>8} {:>14} {:>6} {:>8} {:>14} {:>6}\n",
        param, "|X|", "k_1", "M(k_1,d-1)", "P", "m_1", "N(m_1,d-1)", "Q"
    );
    for r in &res.rows {
        let _ = write!(
            out,
            "{:>6} {:>12} {:>8} {:>14} {:>6} {:>8} {:>14} {:>6}",
            r.param,
            opt(r.n),
            opt(r.degree),
            opt(r.moore_bound),
            r.p_holds,
            opt(r.multiplicity),
            opt(r.absolute_bound),
            r.q_holds
        );
        if let Some(e) = &r.error {
            let _ = write!(out, "  error: {e}");
        }
        out.push('\n');
    }
    out.push_str(&threshold("P condition |X| > M(k_1, d-1)", param, &res.p_threshold));
    out.push_str(&threshold("Q condition |X| > N(m_1, d-1)", param, &res.q_threshold));
    out
}

fn table(title: &str, arg: &str, t: &BoundTable) -> String {
    let cols = t.first().map_or(0, Vec::len);
    let mut out = format!("{title}\n{arg:>4}");
    for d in 0..cols {
        let _ = write!(out, " {:>14}", format!("d={d}"));
    }
    out.push('\n');
    for (row, vals) in t.iter().enumerate() {
        let _ = write!(out, "{:>4}", row + 1);
        for v in vals {
            let _ = write!(out, " {:>14}", v.map_or("overflow".into(), |x| x.to_string()));
        }
        out.push('\n');
    }
    out
}

pub fn bounds(moore: &BoundTable, absolute: &BoundTable) -> String {
    format!("{}\n{}", table("Moore bound M(k, d)", "k", moore), table("Absolute bound N(m, d)", "m", absolute))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_snap() {
        assert_eq!(real(-1.0 / 6.0, 1e-9), "-1/6");
        assert_eq!(real(1.0 / 15.0 + 1e-13, 1e-9), "1/15");
        assert_eq!(real(3.0, 1e-9), "3");
        assert_eq!(real(2f64.sqrt(), 1e-9), "1.414213562");
        assert_eq!(real(2e-15, 1e-9), "2.000e-15");
    }
}
