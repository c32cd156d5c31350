//! Trace-comparison metric, difference series, and interval scoring.
//!
//! Two orientation traces are compared through the cumulative sums of
//! `|1 − Re(exp(x_k) · exp(−y_k))|`, the real part of the relative
//! quaternion of each sample pair. The pointwise difference of two such
//! series against a common ground truth indicates, per sample, which filter
//! drifted less; interval scores count the fraction of strict increases of
//! that difference per time window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::so3::{real, AxisAngle, Quaternion, Real};
use crate::synth::ImuSample;

/// Cumulative divergence between two orientation traces.
#[derive(Clone, Debug)]
pub struct MetricSeries<T> {
    /// Nonnegative, nondecreasing cumulative values.
    pub values: Vec<T>,
    /// Sample times in seconds.
    pub t: Vec<T>,
}

impl<T: Real> MetricSeries<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn final_value(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }
}

/// One summand of the divergence series: `|1 − Re(qa · qb⁻¹)|`.
///
/// Identical inputs contribute exactly zero; otherwise the real part is
/// computed through the 4-dimensional dot product, which equals
/// `Re(qa · qb⁻¹)` for unit quaternions.
pub fn divergence_term<T: Real>(qa: &Quaternion<T>, qb: &Quaternion<T>) -> T {
    if qa == qb {
        return T::zero();
    }
    (T::one() - qa.dot(qb)).abs()
}

/// Cumulative divergence of two canonical axis-angle traces sampled at the
/// given times.
pub fn divergence_series<T: Real>(
    x: &[AxisAngle<T>],
    y: &[AxisAngle<T>],
    times: &[T],
) -> Result<MetricSeries<T>> {
    if x.len() != y.len() {
        return Err(Error::TraceMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if times.len() != x.len() {
        return Err(Error::TraceMismatch {
            left: times.len(),
            right: x.len(),
        });
    }
    let mut values = Vec::with_capacity(x.len());
    let mut acc = T::zero();
    for (xk, yk) in x.iter().zip(y) {
        acc += divergence_term(&xk.exp(), &yk.exp());
        values.push(acc);
    }
    Ok(MetricSeries {
        values,
        t: times.to_vec(),
    })
}

/// Pointwise difference `a − b` of two cumulative series that share a ground
/// truth. A strictly increasing difference means `b`'s filter gained less
/// divergence on that sample.
pub fn difference_series<T: Real>(a: &MetricSeries<T>, b: &MetricSeries<T>) -> Result<Vec<T>> {
    if a.len() != b.len() {
        return Err(Error::TraceMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(&av, &bv)| av - bv)
        .collect())
}

/// Score of one time window.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IntervalScore<T> {
    pub t_start: T,
    pub t_end: T,
    /// Percentage of strict increases of the difference series, in [0, 100].
    pub percentage: T,
    pub n_samples: usize,
}

/// Interval scores plus the total row over all samples.
#[derive(Clone, Debug)]
pub struct ScoreTable<T> {
    pub intervals: Vec<IntervalScore<T>>,
    pub total: IntervalScore<T>,
}

/// Splits the difference series into contiguous windows aligned to the
/// stream start and scores each one; the final partial window is reported
/// with its own sample count. Comparisons are between consecutive samples
/// that fall in the same window.
pub fn interval_scores<T: Real>(diff: &[T], times: &[T], window: T) -> Result<ScoreTable<T>> {
    if diff.len() != times.len() {
        return Err(Error::TraceMismatch {
            left: diff.len(),
            right: times.len(),
        });
    }
    if !(window > T::zero()) {
        return Err(Error::InvalidConfig("window must be positive".into()));
    }
    if diff.is_empty() {
        return Err(Error::InvalidConfig("empty difference series".into()));
    }

    let t0 = times[0];
    let bucket = |t: T| -> usize {
        let idx = ((t - t0) / window).floor();
        idx.to_subset().map(|f: f64| f as usize).unwrap_or(0)
    };

    let mut intervals: Vec<IntervalScore<T>> = Vec::new();
    let flush = |current: usize,
                 start_idx: usize,
                 end_idx: usize,
                 out: &mut Vec<IntervalScore<T>>| {
        let n = end_idx - start_idx;
        let mut increases = 0usize;
        let mut comparisons = 0usize;
        for k in (start_idx + 1)..end_idx {
            comparisons += 1;
            if diff[k] > diff[k - 1] {
                increases += 1;
            }
        }
        let percentage = if comparisons == 0 {
            T::zero()
        } else {
            real::<T>(100.0) * real::<T>(increases as f64) / real::<T>(comparisons as f64)
        };
        out.push(IntervalScore {
            t_start: t0 + window * real::<T>(current as f64),
            t_end: t0 + window * real::<T>((current + 1) as f64),
            percentage,
            n_samples: n,
        });
    };

    let mut current = 0usize;
    let mut start_idx = 0usize;
    for k in 0..times.len() {
        let b = bucket(times[k]);
        if b != current {
            flush(current, start_idx, k, &mut intervals);
            // Empty windows between samples are skipped rather than padded.
            current = b;
            start_idx = k;
        }
    }
    flush(current, start_idx, times.len(), &mut intervals);

    let mut increases = 0usize;
    for k in 1..diff.len() {
        if diff[k] > diff[k - 1] {
            increases += 1;
        }
    }
    let total_pct = if diff.len() > 1 {
        real::<T>(100.0) * real::<T>(increases as f64) / real::<T>((diff.len() - 1) as f64)
    } else {
        T::zero()
    };
    let total = IntervalScore {
        t_start: times[0],
        t_end: *times.last().unwrap(),
        percentage: total_pct,
        n_samples: diff.len(),
    };

    Ok(ScoreTable { intervals, total })
}

/// Constant ground-truth orientation for a static stream: the normalized,
/// sign-aligned arithmetic mean of the per-sample accel/mag triad attitudes.
pub fn static_truth<T: Real>(
    samples: &[ImuSample<T>],
    g_ref: &nalgebra::Vector3<T>,
    b_ref: &nalgebra::Vector3<T>,
) -> Result<Quaternion<T>> {
    let mut mean = Quaternion::new(T::zero(), T::zero(), T::zero(), T::zero());
    let mut reference: Option<Quaternion<T>> = None;
    let mut used = 0usize;
    for s in samples {
        let Ok(q) = crate::so3::triad(&s.accel, &s.mag, g_ref, b_ref) else {
            continue;
        };
        let q = match &reference {
            Some(r) if q.dot(r) < T::zero() => -q,
            _ => q,
        };
        if reference.is_none() {
            reference = Some(q);
        }
        mean.w += q.w;
        mean.x += q.x;
        mean.y += q.y;
        mean.z += q.z;
        used += 1;
    }
    if used == 0 {
        return Err(Error::DegenerateMeasurement(
            "no sample yields a triad attitude",
        ));
    }
    Ok(mean.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector3;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    type Aa = AxisAngle<f64>;

    fn random_trace(rng: &mut ChaCha8Rng, n: usize) -> Vec<Aa> {
        (0..n)
            .map(|_| {
                Aa::new(Vector3::new(
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                ))
                .canonical()
            })
            .collect()
    }

    fn times(n: usize) -> Vec<f64> {
        (0..n).map(|k| k as f64 * 0.01).collect()
    }

    #[test]
    fn identical_traces_are_exactly_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x = random_trace(&mut rng, 50);
        let series = divergence_series(&x, &x, &times(50)).unwrap();
        assert!(series.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn half_turn_contributes_exactly_one() {
        let x = vec![Aa::new(Vector3::new(PI, 0.0, 0.0))];
        let y = vec![Aa::zero()];
        let series = divergence_series(&x, &y, &times(1)).unwrap();
        assert_eq!(series.values[0], 1.0);
    }

    #[test]
    fn single_sample_angle_formula() {
        for &alpha in &[0.1, 0.5, 1.0, 2.0, 3.0] {
            let axis = Vector3::new(1.0, 2.0, -1.0).normalize();
            let x = vec![Aa::new(axis * alpha)];
            let y = vec![Aa::zero()];
            let series = divergence_series(&x, &y, &times(1)).unwrap();
            assert_abs_diff_eq!(
                series.values[0],
                (1.0 - (alpha / 2.0).cos()).abs(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn left_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let x = random_trace(&mut rng, 40);
        let y = random_trace(&mut rng, 40);
        let h = Aa::new(Vector3::new(0.4, -0.2, 0.9)).exp();
        let lift = |trace: &[Aa]| -> Vec<Aa> {
            trace.iter().map(|v| (h * v.exp()).log().unwrap()).collect()
        };
        let base = divergence_series(&x, &y, &times(40)).unwrap();
        let moved = divergence_series(&lift(&x), &lift(&y), &times(40)).unwrap();
        for (a, b) in base.values.iter().zip(&moved.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x = random_trace(&mut rng, 40);
        let y = random_trace(&mut rng, 40);
        let ab = divergence_series(&x, &y, &times(40)).unwrap();
        let ba = divergence_series(&y, &x, &times(40)).unwrap();
        for (a, b) in ab.values.iter().zip(&ba.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_iff_equal() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let x = random_trace(&mut rng, 30);
        let mut y = x.clone();
        y[17] = Aa::new(y[17].v + Vector3::new(1e-6, 0.0, 0.0));
        let series = divergence_series(&x, &y, &times(30)).unwrap();
        assert!(series.values[16] == 0.0);
        assert!(series.values[17] > 0.0);
    }

    #[test]
    fn series_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let x = random_trace(&mut rng, 60);
        let y = random_trace(&mut rng, 60);
        let series = divergence_series(&x, &y, &times(60)).unwrap();
        for k in 1..series.len() {
            assert!(series.values[k] >= series.values[k - 1]);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let x = vec![Aa::zero(); 3];
        let y = vec![Aa::zero(); 4];
        assert!(matches!(
            divergence_series(&x, &y, &times(3)),
            Err(Error::TraceMismatch { .. })
        ));
    }

    #[test]
    fn difference_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let truth = random_trace(&mut rng, 40);
        let a = random_trace(&mut rng, 40);
        let la = divergence_series(&a, &truth, &times(40)).unwrap();

        // Identical filters: zero difference.
        let same = difference_series(&la, &la).unwrap();
        assert!(same.iter().all(|&d| d == 0.0));

        // Zero second series: the difference equals the first series.
        let zero = divergence_series(&truth, &truth, &times(40)).unwrap();
        let diff = difference_series(&la, &zero).unwrap();
        assert_eq!(diff, la.values);

        // Difference increments equal the per-sample summand gap.
        let b = random_trace(&mut rng, 40);
        let lb = divergence_series(&b, &truth, &times(40)).unwrap();
        let diff = difference_series(&la, &lb).unwrap();
        for k in 1..diff.len() {
            let inc = diff[k] - diff[k - 1];
            let expected = divergence_term(&a[k].exp(), &truth[k].exp())
                - divergence_term(&b[k].exp(), &truth[k].exp());
            assert_abs_diff_eq!(inc, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn interval_score_counting() {
        let n = 100;
        let t = times(n);

        let constant = vec![1.0; n];
        let table = interval_scores(&constant, &t, 0.25).unwrap();
        assert!(table.intervals.iter().all(|s| s.percentage == 0.0));
        assert_eq!(table.total.percentage, 0.0);

        let increasing: Vec<f64> = (0..n).map(|k| k as f64).collect();
        let table = interval_scores(&increasing, &t, 0.25).unwrap();
        assert!(table.intervals.iter().all(|s| s.percentage == 100.0));
        assert_eq!(table.total.percentage, 100.0);

        let alternating: Vec<f64> = (0..n).map(|k| if k % 2 == 0 { 0.0 } else { 1.0 }).collect();
        let table = interval_scores(&alternating, &t, 1.0).unwrap();
        assert!((table.total.percentage - 50.0).abs() <= 100.0 / (n as f64 - 1.0));
    }

    #[test]
    fn interval_windows_cover_all_samples() {
        let n = 37;
        let t = times(n);
        let diff: Vec<f64> = (0..n).map(|k| (k as f64 * 0.7).sin()).collect();
        let table = interval_scores(&diff, &t, 0.1).unwrap();
        let covered: usize = table.intervals.iter().map(|s| s.n_samples).sum();
        assert_eq!(covered, n);
        assert_eq!(table.total.n_samples, n);
    }

    #[test]
    fn static_truth_averages_triads() {
        let g = Vector3::new(0.0, 0.0, 9.81);
        let b = Vector3::new(1.0, 0.0, 0.0);
        let q = Aa::new(Vector3::new(0.1, -0.2, 0.5)).exp();
        let samples: Vec<ImuSample> = (0..10)
            .map(|k| ImuSample {
                t: k as f64,
                omega: Vector3::zeros(),
                accel: q.conjugate().rotate(&g),
                mag: q.conjugate().rotate(&b),
            })
            .collect();
        let mean = static_truth(&samples, &g, &b).unwrap();
        assert!(crate::so3::geodesic_distance(&mean, &q) < 1e-10);
    }
}
