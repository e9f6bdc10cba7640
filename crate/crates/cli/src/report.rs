use std::collections::BTreeMap;

use frogpr::ambiguity::EquivalenceReport;
use frogpr::selftest::CriterionOutcome;
use serde::Serialize;
use serde_json::Value;

/// Summary of one command, printed to stdout as a single JSON document.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub inputs: BTreeMap<&'static str, Value>,
    pub outputs: BTreeMap<&'static str, String>,
    pub residuals: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_branch: Option<i8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<EquivalenceReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub criteria: Vec<CriterionOutcome>,
    pub elapsed_ms: f64,
}

impl RunReport {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            residuals: BTreeMap::new(),
            sign_branch: None,
            equivalence: None,
            criteria: Vec::new(),
            elapsed_ms: 0.0,
        }
    }

    pub fn input(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.inputs.insert(key, value.into());
        self
    }
}
