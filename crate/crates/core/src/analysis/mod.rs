//! Run statistics, bound certificates, potential and tail diagnostics, and
//! scaling-law fits.

mod certificates;
mod diagnostics;
mod fit;
mod report;

pub use certificates::{local_upper_bound, lower_bound_certificate, Certificate, CertificateKind};
pub use diagnostics::{
    birth_count_event_check, birth_event_rho, default_sigma, empirical_tail_check,
    exponential_potential, log_exponential_potential, tail_census, BirthEventCheck,
    BirthEventViolation, TailRow, TailTable,
};
pub use fit::{fit_scaling, Fit, ScalingModel};
pub use report::{summarize, RunReport};

use crate::error::{Error, Result};

/// True iff every descending prefix sum of `a` is at least the matching
/// prefix sum of `b`. Both must have the same total.
pub fn check_majorizes(a: &[u32], b: &[u32]) -> Result<bool> {
    let total = |x: &[u32]| x.iter().map(|&v| u64::from(v)).sum::<u64>();
    if total(a) != total(b) {
        return Err(Error::InvalidInput(format!(
            "majorization needs equal totals, got {} and {}",
            total(a),
            total(b)
        )));
    }
    let sorted = |x: &[u32]| {
        let mut v = x.to_vec();
        v.sort_unstable_by(|p, q| q.cmp(p));
        v
    };
    let (a, b) = (sorted(a), sorted(b));
    let len = a.len().max(b.len());
    let (mut sa, mut sb) = (0u64, 0u64);
    for k in 0..len {
        sa += u64::from(a.get(k).copied().unwrap_or(0));
        sb += u64::from(b.get(k).copied().unwrap_or(0));
        if sa < sb {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Median of a sample; the mean of the two middle values for even sizes.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}
