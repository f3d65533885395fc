//! Ridge extraction and the density index.
//!
//! Ridges are found greedily. Each pass runs a dynamic program over the time
//! columns that maximizes the summed magnitude along a path minus a squared
//! log-frequency jump penalty, then forbids the chosen cells and their
//! neighbours for later passes.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::transform::TimeFrequencyPlane;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RidgeParams {
    /// Maximum number of ridges.
    pub count: usize,
    /// Jump penalty lambda; `None` picks it so a one-bin jump costs 2% of the
    /// median column maximum.
    pub penalty: Option<f64>,
    /// Largest bin change between adjacent columns.
    pub max_jump: usize,
    /// Ridges with less energy than this fraction of the first are discarded.
    pub min_energy_fraction: f64,
    /// Bins on either side of an extracted ridge that later ridges may not use.
    pub clear_radius: usize,
    /// A ridge is dead at a column when `|sum S d_eta|` over the unclaimed
    /// bins within `presence_radius` of it (the local component amplitude) is at most
    /// `presence_fraction` times its 90th-percentile value, or at most `floor`.
    pub presence_fraction: f64,
    pub presence_radius: usize,
    /// Absolute magnitude floor for the presence test.
    pub floor: f64,
    /// Dead runs longer than this many columns split a ridge; the
    /// highest-energy piece is kept.
    pub max_gap: usize,
}

impl Default for RidgeParams {
    fn default() -> Self {
        Self {
            count: 3,
            penalty: None,
            max_jump: 8,
            min_energy_fraction: 0.1,
            clear_radius: 4,
            presence_fraction: 0.5,
            presence_radius: 32,
            floor: 0.0,
            max_gap: 3,
        }
    }
}

impl RidgeParams {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(invalid("ridge.count", "must be at least 1"));
        }
        if let Some(l) = self.penalty {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(invalid("ridge.penalty", format!("must be non-negative, got {l}")));
            }
        }
        if self.max_jump == 0 {
            return Err(invalid("ridge.max_jump", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.min_energy_fraction) {
            return Err(invalid(
                "ridge.min_energy_fraction",
                format!("must lie in [0, 1], got {}", self.min_energy_fraction),
            ));
        }
        if !(0.0..1.0).contains(&self.presence_fraction) {
            return Err(invalid(
                "ridge.presence_fraction",
                format!("must lie in [0, 1), got {}", self.presence_fraction),
            ));
        }
        if !(self.floor >= 0.0) {
            return Err(invalid("ridge.floor", format!("must be non-negative, got {}", self.floor)));
        }
        Ok(())
    }

    /// Keep every column of every path: no birth/death truncation.
    pub fn without_truncation(self) -> Self {
        Self {
            presence_fraction: 0.0,
            floor: 0.0,
            ..self
        }
    }
}

/// One IF curve over a contiguous run of time columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Ridge {
    /// Extraction order, 0 for the strongest.
    pub rank: usize,
    /// First time column covered.
    pub start: usize,
    pub bins: Vec<usize>,
    pub freqs: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl Ridge {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// One past the last column covered.
    pub fn end(&self) -> usize {
        self.start + self.bins.len()
    }

    pub fn covers(&self, column: usize) -> bool {
        column >= self.start && column < self.end()
    }

    pub fn bin_at(&self, column: usize) -> Option<usize> {
        self.covers(column).then(|| self.bins[column - self.start])
    }

    pub fn freq_at(&self, column: usize) -> Option<f64> {
        self.covers(column).then(|| self.freqs[column - self.start])
    }

    pub fn energy(&self) -> f64 {
        self.magnitudes.iter().sum()
    }

    pub fn mean_frequency(&self) -> f64 {
        self.freqs.iter().sum::<f64>() / self.freqs.len() as f64
    }

    /// `sum (bin[t+1] - bin[t])^2`.
    pub fn squared_jumps(&self) -> f64 {
        self.bins
            .windows(2)
            .map(|w| (w[1] as f64 - w[0] as f64).powi(2))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeSet {
    /// Sorted by mean frequency.
    pub ridges: Vec<Ridge>,
    pub times: Vec<f64>,
    pub params: RidgeParams,
    /// The penalty actually used.
    pub penalty: f64,
}

impl RidgeSet {
    pub fn len(&self) -> usize {
        self.ridges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ridges.is_empty()
    }

    /// Ridge with extraction rank 0, if any.
    pub fn strongest(&self) -> Option<&Ridge> {
        self.ridges.iter().find(|r| r.rank == 0)
    }
}

fn automatic_penalty(mags: &Array2<f64>, log_step: f64) -> f64 {
    let mut col_max: Vec<f64> = mags
        .columns()
        .into_iter()
        .map(|c| c.iter().copied().fold(0.0, f64::max))
        .collect();
    col_max.sort_by(f64::total_cmp);
    let median = col_max[col_max.len() / 2];
    if log_step > 0.0 {
        0.02 * median / (log_step * log_step)
    } else {
        0.0
    }
}

/// Highest-scoring path; `None` when some column has no allowed cell.
fn best_path(mags: &Array2<f64>, allowed: &Array2<bool>, log_f: &[f64], penalty: f64, max_jump: usize) -> Option<Vec<usize>> {
    let (rows, cols) = mags.dim();
    let mut score: Vec<f64> = (0..rows)
        .map(|m| if allowed[[m, 0]] { mags[[m, 0]] } else { f64::NEG_INFINITY })
        .collect();
    let mut next = vec![f64::NEG_INFINITY; rows];
    let mut back = Array2::<usize>::zeros((rows, cols));
    for n in 1..cols {
        for m in 0..rows {
            next[m] = f64::NEG_INFINITY;
            if !allowed[[m, n]] {
                continue;
            }
            let lo = m.saturating_sub(max_jump);
            let hi = (m + max_jump).min(rows - 1);
            let mut best = f64::NEG_INFINITY;
            let mut arg = lo;
            for p in lo..=hi {
                let s = score[p] - penalty * (log_f[m] - log_f[p]).powi(2);
                if s > best {
                    best = s;
                    arg = p;
                }
            }
            if best > f64::NEG_INFINITY {
                next[m] = best + mags[[m, n]];
                back[[m, n]] = arg;
            }
        }
        std::mem::swap(&mut score, &mut next);
    }
    let mut end = None;
    let mut best = f64::NEG_INFINITY;
    for (m, &s) in score.iter().enumerate() {
        if s > best {
            best = s;
            end = Some(m);
        }
    }
    let mut m = end?;
    let mut path = vec![0; cols];
    path[cols - 1] = m;
    for n in (1..cols).rev() {
        m = back[[m, n]];
        path[n - 1] = m;
    }
    Some(path)
}

/// Columns `[start, end)` of the strongest living stretch of `path`.
fn living_span(
    values: &Array2<Complex64>,
    mags: &Array2<f64>,
    allowed: &Array2<bool>,
    widths: &[f64],
    path: &[usize],
    params: &RidgeParams,
) -> Option<(usize, usize)> {
    let rows = mags.nrows();
    let presence: Vec<f64> = path
        .iter()
        .enumerate()
        .map(|(n, &m)| {
            let lo = m.saturating_sub(params.presence_radius);
            let hi = (m + params.presence_radius).min(rows - 1);
            (lo..=hi)
                .filter(|&k| allowed[[k, n]])
                .map(|k| values[[k, n]] * widths[k])
                .sum::<Complex64>()
                .norm()
        })
        .collect();
    let mut sorted = presence.clone();
    sorted.sort_by(f64::total_cmp);
    let reference = sorted[(sorted.len() * 9 / 10).min(sorted.len() - 1)];
    let cut = (params.presence_fraction * reference).max(params.floor);
    let alive: Vec<bool> = presence.iter().map(|&p| p > cut || (cut == 0.0 && p >= 0.0)).collect();

    // Stretches of living columns joined across short dead gaps.
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut n = 0;
    while n < alive.len() {
        if !alive[n] {
            n += 1;
            continue;
        }
        let start = n;
        let mut end = n + 1;
        let mut k = end;
        while k < alive.len() {
            if alive[k] {
                end = k + 1;
                k += 1;
            } else if k - end + 1 > params.max_gap {
                break;
            } else {
                k += 1;
            }
        }
        spans.push((start, end));
        n = end.max(k);
    }
    let energy = |&(s, e): &(usize, usize)| (s..e).map(|n| mags[[path[n], n]]).sum::<f64>();
    let mut best: Option<((usize, usize), f64)> = None;
    for span in spans {
        let e = energy(&span);
        if best.is_none_or(|(_, b)| e > b) {
            best = Some((span, e));
        }
    }
    best.map(|(s, _)| s)
}

/// Greedy penalized-path ridge extraction on a squeezed (or any
/// time-frequency) plane.
pub fn extract_ridges(plane: &TimeFrequencyPlane, params: &RidgeParams) -> Result<RidgeSet> {
    params.validate()?;
    let mags = plane.values().mapv(|z| z.norm());
    let freqs = plane.freqs();
    let log_f: Vec<f64> = freqs.iter().map(|f| f.ln()).collect();
    let widths = plane.grid().widths();
    let penalty = params
        .penalty
        .unwrap_or_else(|| automatic_penalty(&mags, plane.grid().typical_log_step()));
    let (rows, cols) = mags.dim();
    let mut allowed = Array2::from_elem((rows, cols), true);
    let mut ridges: Vec<Ridge> = Vec::new();
    let mut first_energy = None;

    if mags.iter().any(|&m| m > 0.0) {
        for rank in 0..params.count {
            let Some(path) = best_path(&mags, &allowed, &log_f, penalty, params.max_jump) else {
                break;
            };
            let Some((start, end)) = living_span(plane.values(), &mags, &allowed, &widths, &path, params) else {
                break;
            };
            let bins = path[start..end].to_vec();
            let ridge = Ridge {
                rank,
                start,
                freqs: bins.iter().map(|&m| freqs[m]).collect(),
                magnitudes: bins.iter().enumerate().map(|(i, &m)| mags[[m, start + i]]).collect(),
                bins,
            };
            for (i, &m) in ridge.bins.iter().enumerate() {
                let lo = m.saturating_sub(params.clear_radius);
                let hi = (m + params.clear_radius).min(rows - 1);
                for k in lo..=hi {
                    allowed[[k, ridge.start + i]] = false;
                }
            }
            let energy = ridge.energy();
            let reference = *first_energy.get_or_insert(energy);
            if energy <= 0.0 || energy < params.min_energy_fraction * reference {
                break;
            }
            ridges.push(ridge);
        }
    }
    ridges.sort_by(|a, b| a.mean_frequency().total_cmp(&b.mean_frequency()));
    Ok(RidgeSet {
        ridges,
        times: plane.times().to_vec(),
        params: *params,
        penalty,
    })
}

/// `DI(t) = sum_k |f_k(t)|` over ridges alive at `t`.
pub fn density_index(ridges: &RidgeSet) -> Vec<f64> {
    let mut di = vec![0.0; ridges.times.len()];
    for r in &ridges.ridges {
        for (i, f) in r.freqs.iter().enumerate() {
            di[r.start + i] += f.abs();
        }
    }
    di
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{Coi, FrequencyGrid};

    fn plane_from(mags: Array2<f64>) -> TimeFrequencyPlane {
        let (rows, cols) = mags.dim();
        let grid = FrequencyGrid::arithmetic(1.0, 1.0, rows).unwrap();
        let times = (0..cols).map(|n| n as f64 * 0.1).collect();
        TimeFrequencyPlane::new(mags.mapv(|m| Complex64::new(m, 0.0)), grid, times, Coi::Window { half_width: 0.0 }).unwrap()
    }

    #[test]
    fn single_line_is_one_ridge() {
        let mut mags = Array2::zeros((10, 20));
        mags.row_mut(4).fill(1.0);
        let set = extract_ridges(&plane_from(mags), &RidgeParams::default()).unwrap();
        assert_eq!(set.len(), 1);
        let r = &set.ridges[0];
        assert_eq!((r.start, r.len()), (0, 20));
        assert!(r.bins.iter().all(|&b| b == 4));
        assert!(density_index(&set).iter().all(|&d| d == 5.0));
    }

    #[test]
    fn zero_plane_gives_empty_set() {
        let set = extract_ridges(&plane_from(Array2::zeros((8, 12))), &RidgeParams::default()).unwrap();
        assert!(set.is_empty());
        assert!(density_index(&set).iter().all(|&d| d == 0.0));
    }

    #[test]
    fn late_onset_is_truncated() {
        let mut mags = Array2::zeros((20, 40));
        mags.row_mut(3).fill(1.0);
        for n in 25..40 {
            mags[[12, n]] = 0.8;
        }
        let set = extract_ridges(&plane_from(mags), &RidgeParams::default()).unwrap();
        assert_eq!(set.len(), 2);
        let upper = &set.ridges[1];
        assert_eq!((upper.start, upper.end()), (25, 40));
        let di = density_index(&set);
        assert_eq!(di[24], 4.0);
        assert_eq!(di[25], 17.0);
    }

    #[test]
    fn weak_ridges_are_discarded() {
        let mut mags = Array2::zeros((20, 30));
        mags.row_mut(3).fill(1.0);
        mags.row_mut(12).fill(0.01);
        let set = extract_ridges(&plane_from(mags), &RidgeParams::default()).unwrap();
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn ridges_do_not_share_cells() {
        let mut mags = Array2::zeros((12, 16));
        mags.row_mut(5).fill(1.0);
        mags.row_mut(6).fill(0.9);
        let params = RidgeParams {
            min_energy_fraction: 0.0,
            ..RidgeParams::default()
        }
        .without_truncation();
        let set = extract_ridges(&plane_from(mags), &params).unwrap();
        for n in 0..16 {
            let mut bins: Vec<usize> = set.ridges.iter().filter_map(|r| r.bin_at(n)).collect();
            let before = bins.len();
            bins.sort();
            bins.dedup();
            assert_eq!(bins.len(), before);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        let bad = RidgeParams {
            count: 0,
            ..RidgeParams::default()
        };
        assert!(extract_ridges(&plane_from(Array2::zeros((8, 8))), &bad).is_err());
    }
}
