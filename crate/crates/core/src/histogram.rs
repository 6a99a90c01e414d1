//! One-dimensional analysis of a node's projected values: equal-width
//! binning, normalized dimension entropy, valley-emphasis thresholding,
//! the proportion-difference path increment, and the blank-space split.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
    pub probs: Vec<f64>,
    pub total: usize,
    /// Set when every value is identical; all mass sits in the first bin.
    pub degenerate: bool,
}

impl Histogram {
    /// Builds a histogram directly from bin counts over `[lo, hi]`.
    pub fn from_counts(lo: f64, hi: f64, counts: Vec<usize>) -> Result<Self> {
        let total: usize = counts.iter().sum();
        if total == 0 || counts.len() < 2 {
            return Err(Error::EmptyInput);
        }
        if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
            return Err(Error::DegenerateInput(format!("invalid range [{lo}, {hi}]")));
        }
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Ok(Self {
            lo,
            hi,
            degenerate: hi == lo,
            counts,
            probs,
            total,
        })
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.bin_count() as f64
    }

    /// Upper edge of the 1-based bin `t`.
    pub fn upper_edge(&self, t: usize) -> f64 {
        self.lo + t as f64 * self.bin_width()
    }
}

/// Index (0-based) of the equal-width bin holding `v`; the maximum lands in the last bin.
#[inline]
pub(crate) fn bin_index(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let pos = (bins as f64 * (v - lo) / (hi - lo)).floor();
    if pos <= 0.0 {
        0
    } else {
        (pos as usize).min(bins - 1)
    }
}

pub fn build_histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if bins < 2 {
        return Err(Error::InvalidParam {
            field: "num_bins",
            reason: "a histogram needs at least 2 bins".into(),
        });
    }
    let (lo, hi) = min_max(values);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::DegenerateInput("non-finite value".into()));
    }
    let mut counts = vec![0usize; bins];
    if hi == lo {
        counts[0] = values.len();
    } else {
        for &v in values {
            counts[bin_index(v, lo, hi, bins)] += 1;
        }
    }
    Histogram::from_counts(lo, hi, counts)
}

pub(crate) fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Shannon entropy of the bin probabilities (natural log, `0 ln 0 = 0`) divided by `ln L`.
pub fn dimension_entropy(h: &Histogram) -> f64 {
    let raw: f64 = h
        .probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    // + 0.0 turns the -0.0 of a single occupied bin into 0.0
    (raw / (h.bin_count() as f64).ln()).clamp(0.0, 1.0) + 0.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValleySplit {
    /// 1-based threshold bin; bins `1..=t_star` go left.
    pub t_star: usize,
    pub split_point: f64,
    pub objective: f64,
    pub w_left: f64,
    pub w_right: f64,
    pub path_increment: f64,
}

/// Valley-emphasis threshold: maximizes `(1 - p_t)(w_L mu_L^2 + w_R mu_R^2)` over
/// `1 < t < L`, with class means measured on the bin indices `1..=L`.
///
/// Only thresholds that leave mass on both sides are considered, ties go to the
/// smaller `t`, and the split point is the upper edge of bin `t*`.
pub fn valley_emphasis(h: &Histogram) -> Result<ValleySplit> {
    let bins = h.bin_count();
    if bins < 3 {
        return Err(Error::InvalidParam {
            field: "num_bins",
            reason: "valley emphasis needs at least 3 bins".into(),
        });
    }
    if h.degenerate {
        return Err(Error::NoValleySplit);
    }
    let n = h.total as f64;
    let total_count = h.total;
    let total_moment: usize = h.counts.iter().enumerate().map(|(j, &c)| (j + 1) * c).sum();

    // Integer prefix sums keep mathematically equal objectives bitwise equal.
    let mut left_count = h.counts[0];
    let mut left_moment = h.counts[0];
    let mut best: Option<(usize, f64, usize)> = None;
    for t in 2..bins {
        left_count += h.counts[t - 1];
        left_moment += t * h.counts[t - 1];
        let right_count = total_count - left_count;
        if left_count == 0 || right_count == 0 {
            continue;
        }
        let right_moment = total_moment - left_moment;
        // w mu^2 = (sum j p_j)^2 / w = moment^2 / (count * n)
        let between = (left_moment as f64).powi(2) / (left_count as f64 * n)
            + (right_moment as f64).powi(2) / (right_count as f64 * n);
        let objective = (1.0 - h.probs[t - 1]) * between;
        if best.is_none_or(|(_, b, _)| objective > b) {
            best = Some((t, objective, left_count));
        }
    }
    let (t_star, objective, left_count) = best.ok_or(Error::NoValleySplit)?;
    let w_left = left_count as f64 / n;
    let w_right = (total_count - left_count) as f64 / n;
    Ok(ValleySplit {
        t_star,
        split_point: h.upper_edge(t_star),
        objective,
        w_left,
        w_right,
        path_increment: 1.0 - (w_left - w_right).abs(),
    })
}

/// `1 - |mass(bins 1..=t) - mass(bins t+1..=L)|` for a 1-based threshold bin `t`.
pub fn split_path_length(h: &Histogram, t_star: usize) -> f64 {
    let t = t_star.min(h.bin_count());
    let left: f64 = h.probs[..t].iter().sum();
    let right: f64 = h.probs[t..].iter().sum();
    1.0 - (left - right).abs()
}

/// Midpoint of the widest gap between consecutive distinct values (leftmost on ties).
/// Returns `(split_point, gap_width)`.
pub fn blank_space_split(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut best: Option<(f64, f64)> = None;
    for pair in sorted.windows(2) {
        let gap = pair[1] - pair[0];
        if best.is_none_or(|(_, g)| gap > g) {
            best = Some((pair[0] + 0.5 * gap, gap));
        }
    }
    best.ok_or(Error::IdenticalValues)
}
