//! Checked integer arithmetic for bounds and closed-form counts.

use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("integer overflow while computing {0}")]
pub struct Overflow(pub &'static str);

/// `C(n, k)`, zero when `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> Result<u64, Overflow> {
    if k < 0 || n < 0 || k > n {
        return Ok(0);
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is exact at every step
        acc = acc.checked_mul(n - i).ok_or(Overflow("binomial"))? / (i + 1);
    }
    u64::try_from(acc).map_err(|_| Overflow("binomial"))
}

pub fn checked_pow(base: u64, exp: u32) -> Result<u64, Overflow> {
    base.checked_pow(exp).ok_or(Overflow("power"))
}

/// All `k`-subsets of `{0, …, n-1}` as bitmasks, in lexicographic order of
/// their sorted element lists.
pub fn k_subsets(n: usize, k: usize) -> Vec<u64> {
    assert!(n <= 64, "subset masks limited to 64 elements");
    fn rec(start: usize, n: usize, k: usize, mask: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(mask);
            return;
        }
        for e in start..=(n - k) {
            rec(e + 1, n, k - 1, mask | (1 << e), out);
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, 0, &mut out);
    }
    out
}
