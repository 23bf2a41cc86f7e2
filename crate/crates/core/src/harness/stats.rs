use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::metrics::Report;
use crate::scalar::Scalar;

/// Mean and sample standard deviation (`n − 1` denominator) of a metric.
/// `std` is `None` for a single sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary<S> {
    pub n: usize,
    pub mean: S,
    pub std: Option<S>,
}

/// `None` for an empty sample. Samples are sorted before accumulation so
/// the result does not depend on their order, bit for bit.
pub fn summarize<S: Scalar>(samples: &[S]) -> Option<Summary<S>> {
    if samples.is_empty() {
        return None;
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = S::of_count(xs.len() as u64);
    let mean = xs.iter().fold(S::zero(), |acc, &x| acc + x) / n;
    let std = (xs.len() > 1).then(|| {
        let mut dev: Vec<S> = xs.iter().map(|&x| (x - mean) * (x - mean)).collect();
        dev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        let ss = dev.into_iter().fold(S::zero(), |acc, d| acc + d);
        (ss / (n - S::one())).sqrt()
    });
    Some(Summary {
        n: xs.len(),
        mean,
        std,
    })
}

/// Summaries of the five headline metrics, in [`Report::CSV_HEADER`] order.
pub fn summarize_reports<S: Scalar>(reports: &[Report<S>]) -> Option<[Summary<S>; 5]> {
    if reports.is_empty() {
        return None;
    }
    let column = |i: usize| -> Summary<S> {
        let xs: Vec<S> = reports.iter().map(|r| r.headline()[i]).collect();
        summarize(&xs).expect("nonempty")
    };
    Some([column(0), column(1), column(2), column(3), column(4)])
}

/// Power-of-ten exponents used when printing summary tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scaling {
    pub pd: i32,
    pub pps: i32,
    /// `None` picks −2 or −3 from the magnitude of the bias means.
    pub bias: Option<i32>,
    pub unfairness: i32,
}

impl Default for Scaling {
    fn default() -> Self {
        Self {
            pd: -3,
            pps: -2,
            bias: None,
            unfairness: -1,
        }
    }
}

impl Scaling {
    /// Exponents for the five headline metrics, resolving the bias
    /// exponent against the bias means that will be printed.
    pub fn exponents(&self, bias_means: &[f64]) -> [i32; 5] {
        let bias = self.bias.unwrap_or_else(|| {
            let largest = bias_means.iter().fold(0.0f64, |m, b| m.max(b.abs()));
            if largest >= 1e-2 {
                -2
            } else {
                -3
            }
        });
        [self.pd, self.pps, self.pps, bias, self.unfairness]
    }
}

/// `"1.23 ± 0.45"` in units of `10^exp`; a missing std prints as `n/a`.
pub fn format_scaled(summary: &Summary<f64>, exp: i32) -> String {
    let scale = 10f64.powi(-exp);
    match summary.std {
        Some(s) => format!("{:.2} ± {:.2}", summary.mean * scale, s * scale),
        None => format!("{:.2} ± n/a", summary.mean * scale),
    }
}
