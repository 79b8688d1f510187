//! Statistical contracts of the telegraph-noise sampler.

mod common;

use common::{chi_square_quantile, poisson_pmf};
use proptest::prelude::*;
use qflip_core::{sample_batch, NoiseTrajectory, RtnParams};

fn params(tau_c: f64) -> RtnParams {
    RtnParams::new(0.125, tau_c).unwrap()
}

#[test]
fn no_jump_probability_matches_exponential_law() {
    // P(no jump in [0, t]) = exp(-t / tau_c), within 3 sigma binomial.
    let n = 100_000;
    let tau_c = 1.0;
    for (i, ratio) in [0.25, 0.5, 1.0, 2.0].into_iter().enumerate() {
        let horizon = ratio * tau_c;
        let batch = sample_batch(&params(tau_c), horizon, n, 1000 + i as u64);
        let empty = batch.iter().filter(|t| t.jump_count() == 0).count();
        let p_hat = empty as f64 / n as f64;
        let p = (-horizon / tau_c).exp();
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (p_hat - p).abs() <= 3.0 * sigma,
            "t/tau_c = {ratio}: empirical {p_hat}, expected {p}, sigma {sigma}"
        );
    }
}

#[test]
fn mean_sojourn_time_is_tau_c() {
    let tau_c = 0.8;
    let horizon = 50.0 * tau_c;
    let batch = sample_batch(&params(tau_c), horizon, 4000, 77);
    let mut gaps = Vec::new();
    for traj in &batch {
        let times = traj.jump_times();
        for w in times.windows(2) {
            // Only sojourns starting in the first half: their completion is
            // essentially untruncated, so no length bias.
            if w[0] < horizon / 2.0 {
                gaps.push(w[1] - w[0]);
            }
        }
    }
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!(
        (mean - tau_c).abs() <= 3.0 * se,
        "mean sojourn {mean}, expected {tau_c}, se {se}"
    );
}

#[test]
fn jump_counts_are_poisson() {
    // Chi-square of the jump-count histogram against the Poisson pmf with
    // mean T / tau_c, computed independently.
    let n = 100_000;
    let tau_c = 2.0;
    let horizon = 6.0; // mean count 3
    let mean = horizon / tau_c;
    let batch = sample_batch(&params(tau_c), horizon, n, 4242);

    let max_bin = 10; // counts >= max_bin pooled into the tail
    let mut observed = vec![0.0f64; max_bin + 1];
    for traj in &batch {
        let k = traj.jump_count().min(max_bin);
        observed[k] += 1.0;
    }
    let mut expected = vec![0.0f64; max_bin + 1];
    let mut tail = 1.0;
    for (k, e) in expected.iter_mut().enumerate().take(max_bin) {
        let p = poisson_pmf(mean, k);
        *e = p * n as f64;
        tail -= p;
    }
    expected[max_bin] = tail * n as f64;
    assert!(expected.iter().all(|&e| e >= 5.0), "bins too thin");

    let chi2: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let dof = max_bin as f64; // bins - 1
    let threshold = chi_square_quantile(dof, 3.0902); // 99.9% quantile
    assert!(chi2 <= threshold, "chi2 {chi2} over threshold {threshold}");
}

#[test]
fn disjoint_streams_are_uncorrelated() {
    let n = 20_000;
    let batch = sample_batch(&params(1.0), 5.0, 2 * n, 5151);
    let a: Vec<f64> = batch[..n].iter().map(|t| t.jump_count() as f64).collect();
    let b: Vec<f64> = batch[n..].iter().map(|t| t.jump_count() as f64).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (ma, mb) = (mean(&a), mean(&b));
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..n {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma).powi(2);
        vb += (b[i] - mb).powi(2);
    }
    let r = cov / (va.sqrt() * vb.sqrt());
    // Under independence r sqrt(n) is asymptotically standard normal.
    assert!(
        r.abs() * (n as f64).sqrt() <= 3.0,
        "correlation {r} too large"
    );
}

#[test]
fn eta_changes_sign_exactly_at_stored_jumps() {
    let p = params(1.0);
    let batch = sample_batch(&p, 10.0, 50, 31);
    for traj in &batch {
        let mut sign = traj.initial_sign() as f64;
        let mut prev = 0.0;
        for &tj in traj.jump_times() {
            let mid = 0.5 * (prev + tj);
            assert_eq!(traj.eta_at(&p, mid).unwrap(), sign * p.delta());
            sign = -sign;
            prev = tj;
        }
        let mid = 0.5 * (prev + traj.horizon());
        assert_eq!(traj.eta_at(&p, mid).unwrap(), sign * p.delta());
    }
}

fn arbitrary_trajectory() -> impl Strategy<Value = NoiseTrajectory> {
    (1usize..40, prop::bool::ANY).prop_flat_map(|(jumps, positive)| {
        prop::collection::vec(0.0f64..10.0, jumps).prop_map(move |mut times| {
            times.sort_by(f64::total_cmp);
            times.dedup();
            let sign = if positive { 1 } else { -1 };
            NoiseTrajectory::new(sign, times, 10.0).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn window_segments_concatenate(
        traj in arbitrary_trajectory(),
        bounds in (0.0f64..10.0, 0.0f64..10.0, 0.0f64..10.0),
    ) {
        let p = params(1.0);
        let mut ts = [bounds.0, bounds.1, bounds.2];
        ts.sort_by(f64::total_cmp);
        let (from, mid, to) = (ts[0], ts[1], ts[2]);

        let whole = traj.segments(&p, from, to).unwrap();
        let mut split = traj.segments(&p, from, mid).unwrap();
        split.extend(traj.segments(&p, mid, to).unwrap());

        // Merge zero-duration and equal-sign neighbours, then compare.
        let merge = |segs: Vec<(f64, f64)>| {
            let mut out: Vec<(f64, f64)> = Vec::new();
            for (d, eta) in segs {
                if d == 0.0 {
                    continue;
                }
                match out.last_mut() {
                    Some(last) if last.1 == eta => last.0 += d,
                    _ => out.push((d, eta)),
                }
            }
            out
        };
        let whole = merge(whole);
        let split = merge(split);
        prop_assert_eq!(whole.len(), split.len());
        for (w, s) in whole.iter().zip(&split) {
            prop_assert!((w.0 - s.0).abs() < 1e-12);
            prop_assert_eq!(w.1, s.1);
        }
    }

    #[test]
    fn segment_durations_cover_the_window(
        traj in arbitrary_trajectory(),
        window in (0.0f64..10.0, 0.0f64..10.0),
    ) {
        let p = params(1.0);
        let (from, to) = if window.0 <= window.1 {
            (window.0, window.1)
        } else {
            (window.1, window.0)
        };
        let segs = traj.segments(&p, from, to).unwrap();
        let total: f64 = segs.iter().map(|s| s.0).sum();
        prop_assert!((total - (to - from)).abs() <= 1e-12);
    }
}
