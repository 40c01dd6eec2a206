//! JSON report and CSV emission.

use serde::Serialize;

use annulus_core::conditions::{ConstantsSet, UniquenessReport, Verdict, WindowCheck};
use annulus_core::solver::StartResult;
use annulus_core::{BoundReport, KernelParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSummary {
    pub params: KernelParams,
    pub varrho: f64,
    pub wp: f64,
    pub wp_max_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub iterates: usize,
    pub tolerance: f64,
    pub d_history: Vec<f64>,
    pub rho_history: Vec<f64>,
    pub rho_p: f64,
    pub empirical_ratio: Option<f64>,
    pub residual: Option<f64>,
    pub residual_limit: Option<f64>,
    pub component_sup_norms: Vec<f64>,
    /// `min u_i - wp max u_i` per component
    pub cone_margins: Vec<f64>,
    pub failure: Option<String>,
    pub multistart: Option<Vec<StartResult>>,
    pub distinct_solutions: Option<usize>,
}

/// One printed value next to what the library computes for it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub quantity: String,
    pub citation: String,
    pub printed_value: f64,
    pub computed_value: Option<f64>,
    pub computed_status: String,
    pub first_cutoff: Option<f64>,
    pub value_at_first_cutoff: Option<f64>,
    /// Relative difference against the computed value, or the first-cutoff value
    /// when the computed value is unavailable.
    pub relative_difference: Option<f64>,
    pub comparison_basis: Option<String>,
    pub note: Option<String>,
}

impl Discrepancy {
    pub fn new(
        quantity: impl Into<String>,
        citation: impl Into<String>,
        printed_value: f64,
        computed_value: Option<f64>,
        computed_status: impl Into<String>,
        first_cutoff: Option<(f64, f64)>,
    ) -> Self {
        let rel = |v: f64| ((v - printed_value) / printed_value).abs();
        let (relative_difference, comparison_basis) = match (computed_value, first_cutoff) {
            (Some(v), _) => (Some(rel(v)), Some("computed".to_string())),
            (None, Some((eps, v))) => (Some(rel(v)), Some(format!("truncated at {eps:e}"))),
            _ => (None, None),
        };
        Discrepancy {
            quantity: quantity.into(),
            citation: citation.into(),
            printed_value,
            computed_value,
            computed_status: computed_status.into(),
            first_cutoff: first_cutoff.map(|x| x.0),
            value_at_first_cutoff: first_cutoff.map(|x| x.1),
            relative_difference,
            comparison_basis,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub example: Option<u32>,
    pub kernel: KernelSummary,
    pub kernel_bounds: Option<BoundReport>,
    pub constants: Option<ConstantsSet>,
    pub windows: Vec<WindowCheck>,
    /// Window checks with the printed constants injected in place of computed ones.
    pub windows_with_printed_constants: Vec<WindowCheck>,
    pub uniqueness: Option<UniquenessReport>,
    pub solve: Option<SolveSummary>,
    pub discrepancies: Vec<Discrepancy>,
    pub verdict: Option<Verdict>,
    pub exit_code: i32,
}

impl RunReport {
    pub fn new(command: &str, kernel: KernelSummary) -> Self {
        RunReport {
            command: command.to_string(),
            example: None,
            kernel,
            kernel_bounds: None,
            constants: None,
            windows: Vec::new(),
            windows_with_printed_constants: Vec::new(),
            uniqueness: None,
            solve: None,
            discrepancies: Vec::new(),
            verdict: None,
            exit_code: 0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Header row plus one row per record; non-finite values print as `inf`/`nan`.
pub fn csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format_cell(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn format_cell(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:e}")
    }
}
