/// Order statistics of a sample, for terminal summaries.
#[derive(Debug, Clone, Copy)]
pub struct Summary {
    pub count: usize,
    pub min: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| {
            let h = (v.len() - 1) as f64 * q;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(v.len() - 1);
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Self {
            count: v.len(),
            min: v[0],
            p25: at(0.25),
            median: at(0.5),
            p75: at(0.75),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }

    pub fn line(&self) -> String {
        format!(
            "n={} min={} p25={} median={} p75={} max={} mean={}",
            self.count, self.min, self.p25, self.median, self.p75, self.max, self.mean
        )
    }
}

/// Counts per bin over `bins` equal-width bins of `log10(value)`.
pub fn log_histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    let logs: Vec<f64> = values
        .iter()
        .filter(|v| **v > 0.0)
        .map(|v| v.log10())
        .collect();
    let Some(lo) = logs.iter().copied().reduce(f64::min) else {
        return Vec::new();
    };
    let hi = logs.iter().copied().fold(lo, f64::max);
    if hi == lo {
        return vec![(10f64.powf(lo), 10f64.powf(hi), logs.len())];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for l in logs {
        let b = (((l - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            (
                10f64.powf(lo + width * i as f64),
                10f64.powf(lo + width * (i + 1) as f64),
                c,
            )
        })
        .collect()
}
