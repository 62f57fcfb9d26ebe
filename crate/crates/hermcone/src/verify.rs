//! Randomized verification driver. Each suite turns `(seed, case)` into a
//! list of residual checks; cases run in parallel and records come back in
//! case order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Tolerances};

/// One JSON-lines record.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Record {
    pub suite: String,
    pub rule: String,
    pub case: u64,
    pub residual: f64,
    pub pass: bool,
    /// Serialized inputs, kept only for failing checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<serde_json::Value>,
}

/// A residual with the tolerance it is judged against.
#[derive(Clone, Debug)]
pub struct Check {
    pub rule: String,
    pub residual: f64,
    pub tol: f64,
    pub inputs: serde_json::Value,
}

impl Check {
    pub fn new(rule: &str, residual: f64, tol: f64, inputs: serde_json::Value) -> Check {
        Check { rule: rule.to_string(), residual, tol, inputs }
    }

    /// A computation that should have succeeded but did not.
    pub fn failed(rule: &str, err: &Error, inputs: serde_json::Value) -> Check {
        let inputs = serde_json::json!({ "error": err.to_string(), "inputs": inputs });
        Check { rule: rule.to_string(), residual: f64::INFINITY, tol: 0.0, inputs }
    }

    pub fn passes(&self) -> bool {
        self.residual.is_finite() && self.residual <= self.tol
    }
}

/// Collect `(rule, Result<residual>)` into a check, turning errors into failures.
pub fn check_result(rule: &str, r: crate::Result<f64>, tol: f64, inputs: impl FnOnce() -> serde_json::Value) -> Check {
    match r {
        Ok(v) => Check::new(rule, v, tol, inputs()),
        Err(e) => Check::failed(rule, &e, inputs()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    AcyclicCalculus,
    TriangleClasses,
    ConeWelldef,
    OsmAssoc,
    Genera,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::AcyclicCalculus, Suite::TriangleClasses, Suite::ConeWelldef, Suite::OsmAssoc, Suite::Genera];

    pub fn name(self) -> &'static str {
        match self {
            Suite::AcyclicCalculus => "acyclic-calculus",
            Suite::TriangleClasses => "triangle-classes",
            Suite::ConeWelldef => "cone-welldef",
            Suite::OsmAssoc => "osm-assoc",
            Suite::Genera => "genera",
        }
    }

    pub fn parse(s: &str) -> Option<Vec<Suite>> {
        if s == "all" {
            return Some(Suite::ALL.to_vec());
        }
        Suite::ALL.iter().copied().find(|x| x.name() == s).map(|x| vec![x])
    }

    fn case(self, seed: u64, k: u64, tol: &Tolerances) -> Vec<Check> {
        match self {
            Suite::AcyclicCalculus => crate::acyccalc::calculus_case(seed, k, tol),
            Suite::TriangleClasses => crate::derived::verify::triangle_case(seed, k, tol),
            Suite::ConeWelldef => crate::derived::verify::cone_case(seed, k, tol),
            Suite::OsmAssoc => crate::osm::assoc_case(seed, k, tol),
            Suite::Genera => crate::genera::genera_case(seed, k),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub tol: Tolerances,
    /// Test hook: add 1 to every residual of this rule, so a correct
    /// implementation is reported as failing.
    pub corrupt_rule: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub records: Vec<Record>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// Rules in first-seen order.
    pub fn rules(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.rule) {
                out.push(r.rule.clone());
            }
        }
        out
    }

    pub fn max_residual(&self, rule: &str) -> f64 {
        self.records.iter().filter(|r| r.rule == rule).map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn count(&self, rule: &str) -> usize {
        self.records.iter().filter(|r| r.rule == rule).count()
    }

    pub fn rule_passes(&self, rule: &str) -> bool {
        self.records.iter().filter(|r| r.rule == rule).all(|r| r.pass)
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
    }
}

/// Run `cases` cases of one suite.
pub fn run_suite(suite: Suite, seed: u64, cases: u64, opts: &RunOptions) -> Report {
    run_cases(suite.name(), seed, cases, opts, |s, k, tol| suite.case(s, k, tol))
}

pub fn run_cases(
    name: &str,
    seed: u64,
    cases: u64,
    opts: &RunOptions,
    case: impl Fn(u64, u64, &Tolerances) -> Vec<Check> + Sync,
) -> Report {
    let per_case: Vec<Vec<Check>> = (0..cases).into_par_iter().map(|k| case(seed, k, &opts.tol)).collect();
    let mut records = Vec::new();
    for (k, checks) in per_case.into_iter().enumerate() {
        for mut ch in checks {
            if opts.corrupt_rule.as_deref() == Some(ch.rule.as_str()) {
                ch.residual += 1.0;
            }
            let pass = ch.passes();
            records.push(Record {
                suite: name.to_string(),
                rule: ch.rule,
                case: k as u64,
                residual: ch.residual,
                pass,
                inputs: if pass { None } else { Some(ch.inputs) },
            });
        }
    }
    Report { records }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_in_case_order() {
        let rep = run_cases("t", 1, 50, &RunOptions::default(), |_, k, _| {
            vec![Check::new("r", k as f64 * 1e-12, 1e-9, serde_json::Value::Null)]
        });
        assert_eq!(rep.records.len(), 50);
        assert!(rep.records.iter().enumerate().all(|(i, r)| r.case == i as u64));
        assert!(rep.all_pass());
    }

    #[test]
    fn corrupt_hook_fails_rule() {
        let opts = RunOptions { corrupt_rule: Some("r".into()), ..Default::default() };
        let rep = run_cases("t", 1, 3, &opts, |_, _, _| {
            vec![Check::new("r", 0.0, 1e-9, serde_json::json!({"x": 1})), Check::new("s", 0.0, 1e-9, serde_json::Value::Null)]
        });
        assert!(!rep.rule_passes("r"));
        assert!(rep.rule_passes("s"));
        assert_eq!(rep.failures().next().unwrap().inputs, Some(serde_json::json!({"x": 1})));
    }

    #[test]
    fn zero_cases_vacuous() {
        for s in Suite::ALL {
            assert!(run_suite(s, 42, 0, &RunOptions::default()).all_pass());
        }
    }

    #[test]
    fn nan_fails() {
        assert!(!Check::new("r", f64::NAN, 1.0, serde_json::Value::Null).passes());
    }
}
