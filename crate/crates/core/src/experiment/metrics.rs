//! Summary statistics over loss and cost curves.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Trailing moving average; element `k` averages `losses[k + 1 - window ..= k]`
/// (shorter at the start).
pub fn trailing_mean(losses: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(losses.len());
    let mut sum = 0.0;
    for (k, &x) in losses.iter().enumerate() {
        sum += x;
        if k >= window {
            sum -= losses[k - window];
        }
        out.push(sum / (k + 1).min(window) as f64);
    }
    out
}

/// Mean of the first `window` losses: the reference level at the start of training.
pub fn initial_loss(losses: &[f64], window: usize) -> f64 {
    mean(&losses[..window.max(1).min(losses.len())])
}

/// First 1-based step whose full-window trailing mean is at or below `threshold`.
pub fn steps_to_threshold(losses: &[f64], threshold: f64, window: usize) -> Option<u64> {
    let window = window.max(1);
    trailing_mean(losses, window)
        .iter()
        .enumerate()
        .skip(window - 1)
        .find(|(_, &m)| m <= threshold)
        .map(|(k, _)| k as u64 + 1)
}

/// Average over all full windows of the sample standard deviation within the window.
pub fn rolling_std(losses: &[f64], window: usize) -> f64 {
    if window < 2 || losses.len() < window {
        return f64::NAN;
    }
    let stds: Vec<f64> = losses
        .windows(window)
        .map(|w| {
            let m = mean(w);
            (w.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (window - 1) as f64).sqrt()
        })
        .collect();
    mean(&stds)
}

/// Freeze-alignment count over a loss curve.
///
/// `losses[k]` is the loss of 1-based step `k + 1`; `freeze_steps` are the steps
/// after which the target network was synced, so the first loss priced with the
/// new targets belongs to step `f + 1`. Each sync is the center of a window of
/// `interval` steps, `(f - interval/2, f + interval/2]`; a window counts as aligned
/// when its largest single-step increase `losses[t] - losses[t-1]` lands within
/// `tolerance` steps of `f + 1`. Windows that run past the curve are skipped.
/// Returns `(aligned, windows)`.
pub fn freeze_alignment(losses: &[f64], freeze_steps: &[u64], interval: u64, tolerance: u64) -> (usize, usize) {
    let half = interval / 2;
    let n = losses.len() as u64;
    let mut aligned = 0;
    let mut total = 0;
    for &f in freeze_steps {
        if f < half + 1 || f + half > n {
            continue;
        }
        // steps (f - half, f + half]; a jump at step t needs step t - 1
        let first = (f - half + 1).max(2);
        let last = f + half;
        let mut best_step = first;
        let mut best_jump = f64::NEG_INFINITY;
        for t in first..=last {
            let jump = losses[(t - 1) as usize] - losses[(t - 2) as usize];
            if jump > best_jump {
                best_jump = jump;
                best_step = t;
            }
        }
        total += 1;
        if best_step.abs_diff(f + 1) <= tolerance {
            aligned += 1;
        }
    }
    (aligned, total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_stats() {
        assert_eq!(mean(&[1.0, 2.0, 6.0]), 3.0);
        assert_eq!(median(&[5.0, 1.0, 3.0]), 3.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert!(mean(&[]).is_nan());
    }

    #[test]
    fn trailing_mean_and_threshold() {
        let l = [4.0, 2.0, 0.0, 0.0, 0.0];
        assert_eq!(trailing_mean(&l, 2), vec![4.0, 3.0, 1.0, 0.0, 0.0]);
        assert_eq!(steps_to_threshold(&l, 1.0, 2), Some(3));
        assert_eq!(steps_to_threshold(&l, -1.0, 2), None);
        assert_eq!(initial_loss(&l, 2), 3.0);
        // a single low early loss does not count before the window fills
        assert_eq!(steps_to_threshold(&[0.0, 9.0, 9.0], 1.0, 2), None);
    }

    #[test]
    fn rolling_std_of_constant_is_zero() {
        assert_eq!(rolling_std(&[2.0; 100], 50), 0.0);
        let alt: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s = rolling_std(&alt, 50);
        assert!((s - (50.0f64 / 49.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn alignment_finds_spikes_after_syncs() {
        // smooth decay with a bump at the first step after each sync
        let n = 1000;
        let mut l: Vec<f64> = (0..n).map(|k| 1.0 / (1.0 + k as f64)).collect();
        for f in [200usize, 400, 600, 800] {
            // step f + 1 is index f
            l[f] += 0.5;
        }
        let (hit, total) = freeze_alignment(&l, &[200, 400, 600, 800, 1000], 200, 5);
        assert_eq!((hit, total), (4, 4));
        // a bump far from the sync is not aligned
        let mut l2: Vec<f64> = (0..n).map(|k| 1.0 / (1.0 + k as f64)).collect();
        l2[250] += 0.5;
        let (hit, total) = freeze_alignment(&l2, &[200], 200, 5);
        assert_eq!((hit, total), (0, 1));
    }
}
