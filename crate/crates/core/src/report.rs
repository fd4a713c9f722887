//! Structured verification results.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Version of the JSON layout written by [`ResidualReport`].
pub const REPORT_SCHEMA: u32 = 1;

/// Conventions in force when a check ran, recorded so results can be audited.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    /// Operators act on column vectors.
    pub operator_action: String,
    /// Which spectral parameter each of the first two R-matrices carries.
    pub uv_assignment: String,
    pub flattening: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self::with_swap(false)
    }
}

impl Conventions {
    pub fn with_swap(swap_uv_assignment: bool) -> Self {
        Self {
            operator_action: "column".into(),
            uv_assignment: if swap_uv_assignment {
                "R1(v),R2(u)"
            } else {
                "R1(u),R2(v)"
            }
            .into(),
            flattening: "row-major, leftmost index slowest".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub schema: u32,
    pub check: String,
    pub inputs: Value,
    pub conventions: Conventions,
    pub absolute: f64,
    pub relative: f64,
    /// Set when the check was exact: the difference is the zero polynomial.
    pub exact_zero: Option<bool>,
    pub wall_time_ms: f64,
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl ResidualReport {
    pub fn new(check: impl Into<String>, inputs: Value) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            check: check.into(),
            inputs,
            conventions: Conventions::default(),
            absolute: 0.0,
            relative: 0.0,
            exact_zero: None,
            wall_time_ms: 0.0,
            flags: Vec::new(),
            details: Value::Null,
        }
    }

    pub fn numeric(mut self, absolute: f64, scale: f64) -> Self {
        self.absolute = absolute;
        self.relative = absolute / scale.max(crate::tensor::RELATIVE_FLOOR);
        self
    }

    pub fn exact(mut self, is_zero: bool) -> Self {
        self.exact_zero = Some(is_zero);
        self
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        self
    }

    pub fn flag(mut self, flag: impl Into<String>) -> Self {
        self.flags.push(flag.into());
        self
    }

    /// Passes when the exact check (if any) is zero and the relative residual
    /// is within `tolerance`.
    pub fn passes(&self, tolerance: f64) -> bool {
        self.exact_zero.unwrap_or(true) && self.relative <= tolerance
    }

    /// Zero out timings so identical runs serialize identically.
    pub fn strip_timing(&mut self) {
        self.wall_time_ms = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let r = ResidualReport::new("demo", serde_json::json!({"u": 0.5}))
            .numeric(2.0, 4.0)
            .exact(false);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["relative"], 0.5);
        assert_eq!(v["exact_zero"], false);
        assert_eq!(v["conventions"]["operator_action"], "column");
        assert!(v.get("details").is_none());
        let back: ResidualReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
        assert!(!r.passes(1.0));
    }
}
