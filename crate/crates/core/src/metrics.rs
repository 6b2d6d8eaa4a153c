//! Empirical throughput distributions, percentiles and relative gains.
//!
//! Percentiles interpolate linearly between order statistics at the
//! 1-based rank `q·(n − 1) + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputDistribution {
    samples: Vec<f64>,
    pub label: String,
}

impl ThroughputDistribution {
    /// Sorts `samples` ascending. NaNs are not expected and sort last.
    pub fn new(label: impl Into<String>, mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        ThroughputDistribution {
            samples,
            label: label.into(),
        }
    }

    /// Pools several distributions (order-independent).
    pub fn merge<'a>(
        label: impl Into<String>,
        parts: impl IntoIterator<Item = &'a ThroughputDistribution>,
    ) -> Self {
        let samples = parts
            .into_iter()
            .flat_map(|d| d.samples.iter().copied())
            .collect();
        Self::new(label, samples)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn percentile(&self, q: f64) -> Result<f64> {
        percentile_sorted(&self.samples, q)
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.partition_point(|&s| s <= x) as f64 / self.samples.len() as f64
    }

    /// `(sample, (i + 1) / n)` for every sorted sample.
    pub fn cdf_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.samples.len() as f64;
        self.samples
            .iter()
            .enumerate()
            .map(move |(i, &s)| (s, (i + 1) as f64 / n))
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.label.clone(),
            self.samples.iter().map(|s| s * factor).collect(),
        )
    }
}

/// Percentile of already-sorted samples.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> Result<f64> {
    let n = sorted.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::BadQuantile(q));
    }
    let h = q * (n - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        return Ok(sorted[n - 1]);
    }
    Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
}

/// Percentile of unsorted samples; reorders `samples` in place.
pub fn percentile_unsorted(samples: &mut [f64], q: f64) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::BadQuantile(q));
    }
    let h = q * (n - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    let (_, &mut a, rest) = samples.select_nth_unstable_by(lo, f64::total_cmp);
    if lo + 1 >= n {
        return Ok(a);
    }
    let b = rest
        .iter()
        .copied()
        .min_by(f64::total_cmp)
        .expect("non-empty");
    Ok(a + frac * (b - a))
}

/// Relative gain of `candidate` over `reference` at percentile `q`, in
/// percent.
pub fn gain(
    reference: &ThroughputDistribution,
    candidate: &ThroughputDistribution,
    q: f64,
) -> Result<f64> {
    gain_from_levels(reference.percentile(q)?, candidate.percentile(q)?)
}

pub fn gain_from_levels(reference: f64, candidate: f64) -> Result<f64> {
    if reference == 0.0 {
        return Err(Error::UndefinedGain);
    }
    Ok(100.0 * (candidate - reference) / reference)
}

/// Standard error of a percentile across drops (diagnostic only).
pub fn across_drop_std_error(per_drop: &[ThroughputDistribution], q: f64) -> Result<f64> {
    let levels = per_drop
        .iter()
        .map(|d| d.percentile(q))
        .collect::<Result<Vec<_>>>()?;
    let n = levels.len();
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let mean = levels.iter().sum::<f64>() / n as f64;
    let var = levels.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok((var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn percentile_examples() {
        let d = ThroughputDistribution::new("x", (1..=100).map(f64::from).collect());
        assert_relative_eq!(d.percentile(0.05).unwrap(), 5.95, epsilon = 1e-12);
        let c = ThroughputDistribution::new("c", vec![3.5; 17]);
        for q in [0.01, 0.05, 0.5, 0.99] {
            assert_eq!(c.percentile(q).unwrap(), 3.5);
        }
        let two = ThroughputDistribution::new("t", vec![3.0, 1.0]);
        assert_eq!(two.percentile(0.5).unwrap(), 2.0);
    }

    #[test]
    fn percentile_errors() {
        let one = ThroughputDistribution::new("o", vec![1.0]);
        assert!(matches!(one.percentile(0.5), Err(Error::TooFewSamples(1))));
        let two = ThroughputDistribution::new("t", vec![1.0, 2.0]);
        assert!(matches!(two.percentile(0.0), Err(Error::BadQuantile(_))));
        assert!(matches!(two.percentile(1.0), Err(Error::BadQuantile(_))));
    }

    #[test]
    fn gain_examples() {
        let r = ThroughputDistribution::new("r", (1..=50).map(f64::from).collect());
        assert_eq!(gain(&r, &r, 0.05).unwrap(), 0.0);
        assert_relative_eq!(
            gain_from_levels(1.0e6, 3.64e6).unwrap(),
            264.0,
            epsilon = 1e-9
        );
        let zero = ThroughputDistribution::new("z", vec![0.0; 10]);
        assert!(matches!(gain(&zero, &r, 0.05), Err(Error::UndefinedGain)));
    }

    #[test]
    fn cdf_points_end_at_one() {
        let d = ThroughputDistribution::new("d", vec![3.0, 1.0, 2.0]);
        let pts: Vec<_> = d.cdf_points().collect();
        assert_eq!(pts, vec![(1.0, 1.0 / 3.0), (2.0, 2.0 / 3.0), (3.0, 1.0)]);
    }

    #[test]
    fn merge_is_order_independent() {
        let a = ThroughputDistribution::new("a", vec![5.0, 1.0]);
        let b = ThroughputDistribution::new("b", vec![3.0, 2.0, 4.0]);
        assert_eq!(
            ThroughputDistribution::merge("m", [&a, &b]),
            ThroughputDistribution::merge("m", [&b, &a])
        );
    }

    #[test]
    fn std_error_of_identical_drops_is_zero() {
        let d = ThroughputDistribution::new("d", vec![1.0, 2.0, 3.0]);
        assert_eq!(
            across_drop_std_error(&[d.clone(), d.clone(), d], 0.5).unwrap(),
            0.0
        );
    }

    fn samples() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1e8, 2..300)
    }

    proptest! {
        #[test]
        fn percentile_monotone_in_q(xs in samples(), q1 in 0.001f64..0.999, q2 in 0.001f64..0.999) {
            let d = ThroughputDistribution::new("p", xs);
            let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
            prop_assert!(d.percentile(lo).unwrap() <= d.percentile(hi).unwrap());
        }

        #[test]
        fn percentile_scale_equivariant(xs in samples(), q in 0.001f64..0.999, c in 0.01f64..100.0) {
            let d = ThroughputDistribution::new("p", xs);
            let a = d.scaled(c).percentile(q).unwrap();
            let b = c * d.percentile(q).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }

        #[test]
        fn gain_invariant_to_common_scale(xs in samples(), ys in samples(), c in 0.01f64..100.0) {
            let r = ThroughputDistribution::new("r", xs.iter().map(|x| x + 1.0).collect());
            let k = ThroughputDistribution::new("k", ys);
            let g1 = gain(&r, &k, 0.05).unwrap();
            let g2 = gain(&r.scaled(c), &k.scaled(c), 0.05).unwrap();
            prop_assert!((g1 - g2).abs() <= 1e-7 * g1.abs().max(1.0));
        }

        #[test]
        fn doubled_candidate_gains_one_hundred_percent(xs in samples(), q in 0.01f64..0.99) {
            let r = ThroughputDistribution::new("r", xs.iter().map(|x| x + 1.0).collect());
            let g = gain(&r, &r.scaled(2.0), q).unwrap();
            prop_assert!((g - 100.0).abs() < 1e-9);
        }

        #[test]
        fn cdf_inverts_percentile(xs in prop::collection::btree_set(0u32..1_000_000, 2..300), q in 0.001f64..0.999) {
            let d = ThroughputDistribution::new("p", xs.into_iter().map(f64::from).collect());
            let n = d.len() as f64;
            let f = d.cdf(d.percentile(q).unwrap());
            prop_assert!((f - q).abs() <= 1.0 / (n - 1.0));
        }

        #[test]
        fn unsorted_selection_matches_sort(xs in samples(), q in 0.001f64..0.999) {
            let d = ThroughputDistribution::new("p", xs.clone());
            let mut ys = xs;
            prop_assert_eq!(percentile_unsorted(&mut ys, q).unwrap(), d.percentile(q).unwrap());
        }
    }
}
