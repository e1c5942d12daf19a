//! Numerical certification of the resonance, weight and multiplier
//! inequalities behind the bilinear estimate.
//!
//! Every scan is exhaustive over its declared integer range; each report
//! carries the extremal witness so it can be re-evaluated on its own.
//! Implicit constants ("≪", "0⁺", "1−") are explicit parameters.

pub mod gtv;
pub mod multiplier;
pub mod omega;
pub mod resonance;
pub mod weight;

use crate::measure::fmt_f64;

/// Default constant for "≪": `x ≪ X` means `x < c0·X`.
pub const DEFAULT_C0: f64 = 0.1;
/// Default reading of a `0⁺` exponent.
pub const DEFAULT_EPSILON: f64 = 0.01;
/// Default `ζ = 1−`.
pub const DEFAULT_ZETA: f64 = 0.95;
/// Relative change below which a scan counts as stabilised.
pub const STABILITY_TOLERANCE: f64 = 0.01;

/// Outcome of one certification scan.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub lemma: &'static str,
    /// `(parameter, low, high)` of the scanned box.
    pub ranges: Vec<(String, f64, f64)>,
    /// Arg-extremum of the scan.
    pub witness: Vec<(String, f64)>,
    /// Extremal value found.
    pub observed: f64,
    /// Value of the same quantity on the coarser/smaller scan.
    pub reference: Option<f64>,
    pub stable: bool,
    pub pass: bool,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub notes: Vec<String>,
}

impl EstimateReport {
    pub(crate) fn new(lemma: &'static str, columns: &[&str]) -> Self {
        Self {
            lemma,
            ranges: vec![],
            witness: vec![],
            observed: f64::NAN,
            reference: None,
            stable: false,
            pass: false,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: vec![],
            notes: vec![],
        }
    }

    pub fn witness_value(&self, name: &str) -> Option<f64> {
        self.witness.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn relative_change(&self) -> Option<f64> {
        self.reference
            .map(|r| ((self.observed - r) / r.abs().max(f64::MIN_POSITIVE)).abs())
    }

    pub fn verdict_line(&self) -> String {
        let witness = self
            .witness
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ");
        format!(
            "verdict: {} lemma={} observed={} stable={} witness=({witness})",
            if self.pass { "PASS" } else { "FAIL" },
            self.lemma,
            fmt_f64(self.observed),
            self.stable
        )
    }

    /// CSV block followed by `#`-prefixed metadata and the verdict line.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        for (name, lo, hi) in &self.ranges {
            out.push_str(&format!("# range {name} [{lo}, {hi}]\n"));
        }
        if let Some(r) = self.reference {
            out.push_str(&format!("# reference {}\n", fmt_f64(r)));
        }
        for note in &self.notes {
            out.push_str(&format!("# {note}\n"));
        }
        out.push_str(&self.verdict_line());
        out.push('\n');
        out
    }
}

pub(crate) fn stabilised(observed: f64, reference: f64) -> bool {
    observed.is_finite()
        && reference.is_finite()
        && ((observed - reference) / reference.abs().max(f64::MIN_POSITIVE)).abs()
            < STABILITY_TOLERANCE
}
