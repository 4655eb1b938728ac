//! JSON reports with fixed key order and 17 significant digits per real.

use std::ops::Range;

use kyfan_core::spectral::{Mat, Vector};
use serde_json::{Map, Number, Value};

/// A real in `d.dddddddddddddddde±x` form; non-finite values become strings.
pub fn real(x: f64) -> Value {
    if !x.is_finite() {
        let s = if x.is_nan() {
            "NaN"
        } else if x > 0.0 {
            "Infinity"
        } else {
            "-Infinity"
        };
        return Value::String(s.into());
    }
    let text = format!("{x:.16e}");
    Value::Number(text.parse::<Number>().expect("formatted float is valid JSON"))
}

pub fn reals(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| real(x)).collect())
}

pub fn vector(v: &Vector) -> Value {
    reals(v.as_slice())
}

/// Row-major nested arrays.
pub fn matrix(a: &Mat) -> Value {
    Value::Array((0..a.nrows()).map(|i| Value::Array((0..a.ncols()).map(|j| real(a[(i, j)])).collect())).collect())
}

/// 1-based indices of a 0-based range.
pub fn index_set(r: &Range<usize>) -> Value {
    Value::Array(r.clone().map(|i| Value::from(i + 1)).collect())
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub inputs: Map<String, Value>,
    pub outputs: Map<String, Value>,
    pub residuals: Map<String, Value>,
    pub verdicts: Map<String, Value>,
    pub seed: Option<u64>,
    pub diagnostic: Option<(String, String)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.into(),
            inputs: Map::new(),
            outputs: Map::new(),
            residuals: Map::new(),
            verdicts: Map::new(),
            seed: None,
            diagnostic: None,
        }
    }

    pub fn input(&mut self, key: &str, v: Value) {
        self.inputs.insert(key.into(), v);
    }

    pub fn output(&mut self, key: &str, v: Value) {
        self.outputs.insert(key.into(), v);
    }

    pub fn residual(&mut self, key: &str, x: f64) {
        self.residuals.insert(key.into(), real(x));
    }

    pub fn verdict(&mut self, key: &str, b: bool) {
        self.verdicts.insert(key.into(), Value::Bool(b));
    }

    /// `true` when no verdict is false.
    pub fn all_verdicts_hold(&self) -> bool {
        self.verdicts.values().all(|v| v.as_bool() != Some(false))
    }

    pub fn to_value(&self) -> Value {
        let mut root = Map::new();
        root.insert("command".into(), Value::String(self.command.clone()));
        root.insert("inputs".into(), Value::Object(self.inputs.clone()));
        root.insert("outputs".into(), Value::Object(self.outputs.clone()));
        root.insert("residuals".into(), Value::Object(self.residuals.clone()));
        root.insert("verdicts".into(), Value::Object(self.verdicts.clone()));
        root.insert("seed".into(), self.seed.map_or(Value::Null, Value::from));
        root.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
        if let Some((code, msg)) = &self.diagnostic {
            let mut d = Map::new();
            d.insert("code".into(), Value::String(code.clone()));
            d.insert("message".into(), Value::String(msg.clone()));
            root.insert("diagnostic".into(), Value::Object(d));
        }
        Value::Object(root)
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_carry_seventeen_digits() {
        assert_eq!(real(5.0).to_string(), "5.0000000000000000e+0");
        assert_eq!(real(-0.1).to_string(), "-1.0000000000000001e-1");
        let back: f64 = serde_json::from_str(&real(1.0 / 3.0).to_string()).unwrap();
        assert_eq!(back, 1.0 / 3.0);
        assert_eq!(real(f64::INFINITY), Value::String("Infinity".into()));
    }

    #[test]
    fn indices_are_one_based() {
        assert_eq!(index_set(&(1..3)).to_string(), "[2,3]");
        assert_eq!(index_set(&(0..0)).to_string(), "[]");
    }

    #[test]
    fn key_order_is_fixed() {
        let mut r = Report::new("norm");
        r.output("z", real(1.0));
        r.output("a", real(2.0));
        let s = r.render();
        assert!(s.find("\"command\"").unwrap() < s.find("\"inputs\"").unwrap());
        assert!(s.find("\"z\"").unwrap() < s.find("\"a\"").unwrap());
        let parsed: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(parsed["outputs"]["a"].as_f64(), Some(2.0));
    }
}
