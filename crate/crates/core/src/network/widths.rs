use serde::{Deserialize, Serialize};

/// Hidden widths `N(M-1)` and `3⌈(N+1)/2⌉(5M)^N` (`M-1` and `6M` for
/// `N = 1`) with the exact parameter count `w1(N+1) + w2(w1+1) + w2`.
/// Values that do not fit in `u128` are reported as `None` with
/// `overflow = true`; the base-10 logarithms are always finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthSchedule {
    pub n: u64,
    pub m: u64,
    pub w1: u128,
    pub w2: Option<u128>,
    pub param_count_bound: Option<u128>,
    pub log10_w2: f64,
    pub log10_param_count: f64,
    pub overflow: bool,
    /// `M > 5N²`.
    pub hypothesis_satisfied: bool,
}

pub fn theoretical_widths(n: u64, m: u64) -> WidthSchedule {
    let hypothesis_satisfied = (m as u128) > 5 * (n as u128) * (n as u128);
    if !hypothesis_satisfied {
        log::warn!("width schedule: M = {m} does not exceed 5N² = {}", 5 * n as u128 * n as u128);
    }
    let (w1, w2, log10_w2) = if n == 1 {
        let w2 = 6 * m as u128;
        (m.saturating_sub(1) as u128, Some(w2), (w2 as f64).log10())
    } else {
        let w1 = n as u128 * m.saturating_sub(1) as u128;
        let lead = 3 * (n + 1).div_ceil(2) as u128;
        let base = 5 * m as u128;
        let w2 = u32::try_from(n)
            .ok()
            .and_then(|e| base.checked_pow(e))
            .and_then(|p| p.checked_mul(lead));
        let log = (lead as f64).log10() + n as f64 * (base as f64).log10();
        (w1, w2, log)
    };
    let count = w2.and_then(|w2| {
        let a = w1.checked_mul(n as u128 + 1)?;
        let b = w2.checked_mul(w1 + 1)?;
        a.checked_add(b)?.checked_add(w2)
    });
    let log10_param_count = match count {
        Some(c) => (c as f64).log10(),
        None => {
            // w2 (w1 + 2) dominates.
            log10_w2 + ((w1 + 2) as f64).log10()
        }
    };
    WidthSchedule {
        n,
        m,
        w1,
        w2,
        param_count_bound: count,
        log10_w2,
        log10_param_count,
        overflow: count.is_none(),
        hypothesis_satisfied,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_examples() {
        let s = theoretical_widths(1, 10);
        assert_eq!((s.w1, s.w2), (9, Some(60)));
        assert_eq!(s.param_count_bound, Some(9 * 2 + 60 * 10 + 60));
        let s = theoretical_widths(2, 25);
        assert_eq!((s.w1, s.w2), (48, Some(93_750)));
        assert!(s.hypothesis_satisfied);
        assert!(!theoretical_widths(2, 20).hypothesis_satisfied);
        let s = theoretical_widths(3, 46);
        assert_eq!(s.w1, 135);
        assert!(s.hypothesis_satisfied);
        assert_eq!(s.w2, Some(3 * 2 * 230u128.pow(3)));
    }

    #[test]
    fn overflow_is_flagged() {
        let s = theoretical_widths(40, 10_000);
        assert!(s.overflow && s.w2.is_none());
        assert!(s.log10_w2.is_finite() && s.log10_w2 > 38.0);
        assert!(s.log10_param_count > s.log10_w2);
    }
}
