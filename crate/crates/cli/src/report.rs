//! `report.json`: checks as `{name, value, bound, pass}` plus free-form info.

use serde_json::{json, Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
    pub info: Map<String, Value>,
}

/// Finite numbers as JSON numbers, the rest as `"inf"`, `"-inf"` or `"nan"`.
pub fn num(x: f64) -> Value {
    if x.is_nan() {
        Value::String("nan".into())
    } else if x.is_infinite() {
        Value::String(if x > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        json!(x)
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

impl Report {
    /// Passes when `value <= bound`.
    pub fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        self.push(name, value, bound, value <= bound);
    }

    /// Passes when `value >= bound`.
    pub fn at_least(&mut self, name: &str, value: f64, bound: f64) {
        self.push(name, value, bound, value >= bound);
    }

    pub fn push(&mut self, name: &str, value: f64, bound: f64, pass: bool) {
        self.checks.push(Check { name: name.into(), value, bound, pass });
    }

    pub fn info(&mut self, key: &str, value: Value) {
        self.info.insert(key.into(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn checks_json(&self) -> Value {
        Value::Array(
            self.checks
                .iter()
                .map(|c| json!({"name": c.name, "value": num(c.value), "bound": num(c.bound), "pass": c.pass}))
                .collect(),
        )
    }
}

pub struct Header<'a> {
    pub command: &'a str,
    pub problem: &'a str,
    pub seed: u64,
}

pub fn document(h: &Header, outcome: &Result<Report, CliError>) -> (Value, i32) {
    let (checks, info, error, code) = match outcome {
        Ok(r) => (r.checks_json(), Value::Object(r.info.clone()), Value::Null, if r.passed() { 0 } else { 4 }),
        Err(e) => (
            json!([]),
            json!({}),
            json!({"category": e.category(), "message": e.to_string()}),
            e.exit_code(),
        ),
    };
    let status = match code {
        0 => "ok",
        4 => "check_failure",
        3 => "solver_failure",
        _ => "validation_failure",
    };
    let doc = json!({
        "command": h.command,
        "problem": h.problem,
        "seed": h.seed,
        "status": status,
        "exit_code": code,
        "checks": checks,
        "info": info,
        "error": error,
    });
    (doc, code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_numbers_are_strings() {
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(num(f64::NAN), json!("nan"));
        assert_eq!(num(0.25), json!(0.25));
    }

    #[test]
    fn exit_codes() {
        let h = Header { command: "verify", problem: "p", seed: 0 };
        let mut r = Report::default();
        r.at_most("a", 1.0, 2.0);
        assert_eq!(document(&h, &Ok(r.clone())).1, 0);
        r.at_least("b", 1.0, 2.0);
        let (doc, code) = document(&h, &Ok(r));
        assert_eq!(code, 4);
        assert_eq!(doc["checks"][1]["pass"], json!(false));
        let err = CliError::Core(selfsim::Error::Bracket("x".into()));
        let (doc, code) = document(&h, &Err(err));
        assert_eq!(code, 3);
        assert_eq!(doc["error"]["category"], json!("solver"));
        assert_eq!(document(&h, &Err(CliError::Validation(vec!["x".into()]))).1, 2);
    }
}
