//! Self-contained experiment records with a stable JSON layout.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodValue {
    pub value: f64,
    pub err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    /// `2 pi (2n - 1)`
    pub b1: f64,
    /// `2 pi (n - 1 + sqrt n)`
    pub b2: f64,
    /// `2 pi n`
    pub danchenko: f64,
    /// `2n`
    pub ref2n: f64,
}

impl Bounds {
    pub fn for_degree(n: usize) -> Self {
        let nf = n as f64;
        let tau = std::f64::consts::TAU;
        Bounds {
            b1: tau * (2.0 * nf - 1.0),
            b2: tau * (nf - 1.0 + nf.sqrt()),
            danchenko: tau * nf,
            ref2n: 2.0 * nf,
        }
    }

    /// `2 pi (2k - 1)` for `k` distinct roots.
    pub fn distinct_roots(k: usize) -> f64 {
        std::f64::consts::TAU * (2.0 * k as f64 - 1.0)
    }
}

/// One checked relation `lhs <= rhs` (or as named).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl Assertion {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Assertion {
            name: name.into(),
            lhs,
            rhs,
            pass: lhs <= rhs,
        }
    }

    pub fn lt(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Assertion {
            name: name.into(),
            lhs,
            rhs,
            pass: lhs < rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub seed: u64,
    pub budget: String,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub polynomial: String,
    pub methods: BTreeMap<String, MethodValue>,
    pub bounds: Bounds,
    pub asserts: Vec<Assertion>,
    pub meta: Meta,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.asserts.iter().all(|a| a.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.asserts.iter().filter(|a| !a.pass)
    }

    /// JSON with `meta.elapsed_s` zeroed, for byte comparisons between runs.
    pub fn to_json_without_timing(&self) -> String {
        let mut copy = self.clone();
        copy.meta.elapsed_s = 0.0;
        serde_json::to_string_pretty(&copy).expect("report serializes")
    }
}
