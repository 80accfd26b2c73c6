//! Explicit eigenvalue-distribution bounds, the inequalities they rest on,
//! and their comparison against computed spectra.
//!
//! Bounds whose implied constant is unspecified are evaluated with the
//! constant set to 1 ([`ConstantMode::ShapeOnly`]); [`fit_constant`] then
//! recovers one global constant per bound from an experiment grid.

mod checks;
mod formulas;
mod report;
mod schatten;

pub use checks::{
    cheby_count_check, crossing_check, crossing_window, lemma1_transform, n_eps_window, synthesis_check,
    synthesis_exponent, window_report, CrossingCheck, NWindow,
};
pub use formulas::{
    bound_cube_convex_ed, bound_cube_pair, bound_karnik_1d, bound_main1, bound_main2, bound_mrs, bound_stage1,
    decay_bound_1d, landau_widom, log_factor_h,
};
pub(crate) use report::fmt_f64;
pub use report::{fit_constant, fit_exponent, reports_to_json, write_reports_csv, FittedConstant};
pub use schatten::{schatten_subadditivity, SubadditivityTrial};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMode {
    Exact,
    ShapeOnly,
}

impl ConstantMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::ShapeOnly => "shape_only",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Natural,
    Base2,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            Self::Natural => x.ln(),
            Self::Base2 => x.log2(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Natural => "natural",
            Self::Base2 => "base2",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "natural" | "ln" | "e" => Ok(Self::Natural),
            "base2" | "log2" | "2" => Ok(Self::Base2),
            other => Err(format!("unknown log base '{other}' (expected natural or base2)")),
        }
    }
}

/// A bound evaluated at concrete parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub value: f64,
    pub constant_mode: ConstantMode,
    pub log_base: LogBase,
    pub notes: String,
}

impl BoundValue {
    pub fn new(name: &str, params: &[(&str, f64)], value: f64, constant_mode: ConstantMode, log_base: LogBase) -> Self {
        Self {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value,
            constant_mode,
            log_base,
            notes: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl AsRef<str>) -> Self {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(note.as_ref());
        self
    }

    /// Compare an observed quantity against `constant · value`.
    pub fn report(&self, empirical: f64, constant: f64) -> BoundReport {
        BoundReport::new(self.clone(), empirical, constant)
    }
}

/// An empirical quantity measured against a bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound: BoundValue,
    pub empirical: f64,
    /// `empirical / value`; `0` when both vanish and `+∞` when only the bound does.
    pub ratio: f64,
    /// `empirical ≤ constant · value`; `None` when no comparison applies.
    pub pass: Option<bool>,
}

impl BoundReport {
    pub fn new(bound: BoundValue, empirical: f64, constant: f64) -> Self {
        let ratio = ratio(empirical, bound.value);
        let pass = Some(empirical <= constant * bound.value);
        Self { bound, empirical, ratio, pass }
    }

    /// A report that only records the ratio.
    pub fn informational(bound: BoundValue, empirical: f64) -> Self {
        let ratio = ratio(empirical, bound.value);
        Self { bound, empirical, ratio, pass: None }
    }
}

fn ratio(empirical: f64, value: f64) -> f64 {
    if value > 0.0 {
        empirical / value
    } else if empirical == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}
