//! Fixture loading and small helpers shared by the integration tests.
#![allow(dead_code)]

pub mod oracles;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;
use sslp_core::bitspace::{BitString, SearchParams};
use sslp_core::codes::{Amplitude, LogicalCode};
use sslp_core::exactnum::Rational;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn load<T: for<'de> Deserialize<'de>>(name: &str) -> T {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    serde_json::from_str(&text).expect("fixture parses")
}

#[derive(Clone, Debug, Deserialize)]
pub struct TableRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub order: u32,
    pub m: u32,
    pub n: usize,
    pub w: Vec<u32>,
    #[serde(rename = "S")]
    pub s: Vec<u32>,
    pub class_sizes: Option<Vec<usize>>,
}

impl TableRow {
    pub fn params(&self) -> SearchParams {
        SearchParams::new(self.m, self.w.clone(), self.s.clone()).unwrap()
    }
}

/// `(bits, ±1, probability)`
pub type Term = (String, i8, String);

#[derive(Clone, Debug, Deserialize)]
pub struct ExplicitCode {
    pub label: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub order: u32,
    pub m: u32,
    pub w: Vec<u32>,
    #[serde(rename = "S")]
    pub s: Vec<u32>,
    pub gate_residues: Vec<u32>,
    pub states: Vec<Vec<Term>>,
}

impl ExplicitCode {
    pub fn code(&self) -> LogicalCode {
        code_from_terms(self.m, &self.w, &self.s, &self.states)
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct ExtremaExample {
    pub n: usize,
    pub m: u32,
    pub s: u32,
    pub states: Vec<Vec<Term>>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Expansion {
    pub m: u32,
    pub w: Vec<u32>,
    #[serde(rename = "S")]
    pub s: Vec<u32>,
    pub states: Vec<Vec<Term>>,
}

pub fn parameter_tables() -> Vec<TableRow> {
    load("parameter_tables.json")
}

pub fn explicit_codes() -> Vec<ExplicitCode> {
    load("explicit_states.json")
}

pub fn extrema_examples() -> Vec<ExtremaExample> {
    load("extrema_examples.json")
}

pub fn c642_expansion() -> Expansion {
    load("c642_expansion.json")
}

pub fn states_from_terms(states: &[Vec<Term>]) -> Vec<BTreeMap<BitString, Amplitude>> {
    states
        .iter()
        .map(|terms| {
            terms
                .iter()
                .map(|(bits, sign, p)| {
                    let x: BitString = bits.parse().unwrap();
                    let p: Rational = p.parse().unwrap();
                    (x, Amplitude::signed(*sign < 0, p))
                })
                .collect()
        })
        .collect()
}

pub fn code_from_terms(m: u32, w: &[u32], s: &[u32], states: &[Vec<Term>]) -> LogicalCode {
    LogicalCode::new(m, w.to_vec(), s.to_vec(), states_from_terms(states)).unwrap()
}

pub fn bits(s: &str) -> BitString {
    s.parse().unwrap()
}

#[derive(Clone, Debug, Deserialize)]
pub struct EvenParityExample {
    pub example: u32,
    pub n: usize,
    pub m: u32,
    pub w: Vec<u32>,
    #[serde(rename = "S")]
    pub s: Vec<u32>,
    pub order: u32,
    pub supports: Vec<Vec<String>>,
}

pub fn even_parity_examples() -> Vec<EvenParityExample> {
    load("even_parity_examples.json")
}
