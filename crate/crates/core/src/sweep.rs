//! The search driver: enumerate canonical `(m, w, S)`, screen, solve, audit.

use std::collections::BTreeMap;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{full_audit, AuditConfig, AuditSummary, DEFAULT_TAU};
use crate::bitspace::{distance_of_set, BitString, ResidueClass, SearchParams, UnionDistance, MAX_QUBITS};
use crate::codes::{assemble, transversal_action};
use crate::exactnum::Rational;
use crate::screens::shift_screen;
use crate::zfeas::{build_lp, exact_bfs_reconstruct, solve_feasibility, ProbabilityTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SweepError {
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub k: usize,
    pub m_min: u32,
    pub m_max: u32,
    /// Keep only `gcd(m, S₁, …, S_{K−1}) = 1`, i.e. full order `m`.
    pub coprime_filter: bool,
    /// Demand `d(C) = 2` rather than `d(C) ≥ 2`.
    pub require_exact_distance_2: bool,
    /// Continued-fraction bound for the projection fallback; `None` means `2·m·n`.
    pub denominator_bound: Option<u64>,
    pub jobs: usize,
    pub tau_float: f64,
}

impl SweepConfig {
    pub fn new(n: usize, k: usize, m_min: u32, m_max: u32) -> Self {
        SweepConfig {
            n,
            k,
            m_min,
            m_max,
            coprime_filter: false,
            require_exact_distance_2: true,
            denominator_bound: None,
            jobs: 1,
            tau_float: DEFAULT_TAU,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.n == 0 || self.n > MAX_QUBITS {
            return Err(SweepError::Config(format!("n = {} outside [1, {MAX_QUBITS}]", self.n)));
        }
        if self.k == 0 {
            return Err(SweepError::Config("K must be at least 1".into()));
        }
        if self.m_min < 2 || self.m_min > self.m_max {
            return Err(SweepError::Config(format!(
                "modulus range [{}, {}] must be non-empty and start at 2 or more",
                self.m_min, self.m_max
            )));
        }
        if self.jobs == 0 {
            return Err(SweepError::Config("jobs must be at least 1".into()));
        }
        if self.denominator_bound == Some(0) {
            return Err(SweepError::Config("denominator bound must be at least 1".into()));
        }
        Ok(())
    }

    pub fn bound_for(&self, m: u32) -> u64 {
        self.denominator_bound.unwrap_or(2 * u64::from(m) * self.n as u64)
    }

    fn pipeline(&self) -> PipelineOptions {
        PipelineOptions {
            require_exact_distance_2: self.require_exact_distance_2,
            denominator_bound: self.denominator_bound,
            tau_float: self.tau_float,
        }
    }
}

/// Options of a single-candidate run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineOptions {
    pub require_exact_distance_2: bool,
    pub denominator_bound: Option<u64>,
    pub tau_float: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            require_exact_distance_2: true,
            denominator_bound: None,
            tau_float: DEFAULT_TAU,
        }
    }
}

/// An audited code found by the search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitRecord {
    pub params: SearchParams,
    pub class_sizes: Vec<usize>,
    pub probabilities: ProbabilityTable,
    /// `⟨Zᵢ⟩` per logical state (all rows equal).
    pub z_expectations: Vec<Vec<Rational>>,
    pub order: u32,
    pub audit: AuditSummary,
    /// Lexicographically least `(sorted u·w, sorted u·S)` over units `u` mod m.
    pub scaling_key: (Vec<u32>, Vec<u32>),
}

impl HitRecord {
    /// `(n, K, m, w, S)`; weights and residues are already canonical.
    pub fn dedup_key(&self) -> DedupKey {
        dedup_key(&self.params)
    }
}

/// `(n, K, m, w, S)`: identity of a candidate in a catalog.
pub type DedupKey = (usize, usize, u32, Vec<u32>, Vec<u32>);

pub fn dedup_key(params: &SearchParams) -> DedupKey {
    (
        params.n(),
        params.k(),
        params.m(),
        params.weights().to_vec(),
        params.residues().to_vec(),
    )
}

/// A candidate that reached the solver but could not be certified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedRecord {
    pub params: SearchParams,
    pub stage: String,
    pub reason: String,
}

/// Why a candidate is not a hit (and not an anomaly either).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rejection {
    Screen,
    EmptyClass(usize),
    Distance(UnionDistance),
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PipelineOutcome {
    Hit(Box<HitRecord>),
    Flagged(FlaggedRecord),
    Rejected(Rejection),
}

fn flag(params: &SearchParams, stage: &str, reason: impl Into<String>) -> PipelineOutcome {
    PipelineOutcome::Flagged(FlaggedRecord {
        params: params.clone(),
        stage: stage.into(),
        reason: reason.into(),
    })
}

/// Unit-scaling representative of `(w, S)`.
pub fn scaling_key(params: &SearchParams) -> (Vec<u32>, Vec<u32>) {
    let m = params.m();
    (1..m)
        .filter(|u| u.gcd(&m) == 1)
        .map(|u| {
            let mut w: Vec<u32> = params.weights().iter().map(|&x| x * u % m).collect();
            let mut s: Vec<u32> = params.residues().iter().map(|&x| x * u % m).collect();
            w.sort_unstable();
            s.sort_unstable();
            (w, s)
        })
        .min()
        .expect("1 is a unit")
}

/// Screen, classes, distance, LP, reconstruction, assembly and audit for one
/// candidate.
pub fn run_pipeline(params: &SearchParams, options: &PipelineOptions) -> PipelineOutcome {
    if shift_screen(params).is_err() {
        return PipelineOutcome::Rejected(Rejection::Screen);
    }
    evaluate(params, params.classes(), options)
}

fn evaluate(params: &SearchParams, classes: Vec<ResidueClass>, options: &PipelineOptions) -> PipelineOutcome {
    if let Some(j) = classes.iter().position(ResidueClass::is_empty) {
        return PipelineOutcome::Rejected(Rejection::EmptyClass(j));
    }
    let union: Vec<BitString> = classes.iter().flat_map(|c| c.members.iter().copied()).collect();
    let distance = distance_of_set(&union);
    if !distance.at_least(2) {
        // the shift screen excludes this; reaching it means a bug upstream
        return flag(params, "distance", format!("screen passed but d(C) = {distance}"));
    }
    if options.require_exact_distance_2 && distance != UnionDistance::Finite(2) {
        return PipelineOutcome::Rejected(Rejection::Distance(distance));
    }
    let lp = match build_lp(&classes) {
        Ok(lp) => lp,
        Err(e) => return flag(params, "lp", e.to_string()),
    };
    let Some(bfs) = solve_feasibility(&lp) else {
        return PipelineOutcome::Rejected(Rejection::Infeasible);
    };
    // the exact vertex doubles as the numeric input of the recovery path
    let numeric: Vec<f64> = lp.vector_from_table(&bfs).iter().map(Rational::to_f64).collect();
    let bound = options
        .denominator_bound
        .unwrap_or(2 * u64::from(params.m()) * params.n() as u64);
    let table = match exact_bfs_reconstruct(&lp, &numeric, bound) {
        Ok(r) => r.table,
        Err(e) => return flag(params, "reconstruction", e.to_string()),
    };
    if table.support_size() > lp.rows() {
        return flag(params, "reconstruction", "solution is not basic");
    }
    let code = match assemble(params, &table) {
        Ok(code) => code,
        Err(e) => return flag(params, "assemble", e.to_string()),
    };
    let order = match transversal_action(&code) {
        Ok(action) => action.order,
        Err(e) => return flag(params, "transversal", e.to_string()),
    };
    let report = full_audit(&code, &AuditConfig::float(options.tau_float));
    if !report.accepted() {
        return flag(params, "audit", report.failure_lines().join("; "));
    }
    let summary = report.summary();
    let z = table.z_expectations();
    if summary.lambda_z.as_ref() != z.first() {
        return flag(params, "audit", "audited Z expectations differ from the solver's");
    }
    PipelineOutcome::Hit(Box::new(HitRecord {
        class_sizes: classes.iter().map(ResidueClass::len).collect(),
        probabilities: table,
        z_expectations: z,
        order,
        audit: summary,
        scaling_key: scaling_key(params),
        params: params.clone(),
    }))
}

/// Nondecreasing sequences of length `n` over `[1, m−1]`, lexicographic.
fn nondecreasing(n: usize, m: u32) -> impl Iterator<Item = Vec<u32>> {
    let mut next = (m >= 2).then(|| vec![1u32; n]);
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        if let Some(i) = (0..n).rev().find(|&i| succ[i] < m - 1) {
            let v = succ[i] + 1;
            succ[i..].iter_mut().for_each(|x| *x = v);
            next = Some(succ);
        }
        Some(current)
    })
}

/// Strictly increasing `(0, S₁, …, S_{K−1})` with entries below `m`, lexicographic.
fn residue_tuples(k: usize, m: u32) -> impl Iterator<Item = Vec<u32>> {
    let mut next = if k as u64 <= u64::from(m) {
        Some((0..k as u32).collect::<Vec<u32>>())
    } else {
        None
    };
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut succ = current.clone();
        // position i may go up to m − (k − i)
        if let Some(i) = (1..k).rev().find(|&i| succ[i] < m - (k - i) as u32) {
            succ[i] += 1;
            for j in i + 1..k {
                succ[j] = succ[j - 1] + 1;
            }
            next = Some(succ);
        }
        Some(current)
    })
}

fn coprime(m: u32, residues: &[u32]) -> bool {
    residues.iter().fold(m, |g, &s| g.gcd(&s)) == 1
}

/// Residue tuples for one weight vector that pass the screen and filters.
fn residues_for(config: &SweepConfig, m: u32, w: &[u32]) -> Vec<Vec<u32>> {
    residue_tuples(config.k, m)
        .filter(|s| !config.coprime_filter || coprime(m, s))
        .filter(|s| {
            let p = SearchParams::new(m, w.to_vec(), s.clone()).expect("canonical by construction");
            shift_screen(&p).is_ok()
        })
        .collect()
}

/// All canonical candidates passing the shift screen (and the coprime filter
/// when enabled), ordered by `m`, then `w`, then `S`.
pub fn enumerate_candidates(config: &SweepConfig) -> impl Iterator<Item = SearchParams> + '_ {
    (config.m_min..=config.m_max).flat_map(move |m| {
        nondecreasing(config.n, m).flat_map(move |w| {
            residues_for(config, m, &w)
                .into_iter()
                .map(move |s| SearchParams::new(m, w.clone(), s).expect("canonical by construction"))
        })
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepStats {
    pub weight_vectors: usize,
    pub candidates: usize,
    pub empty_class: usize,
    pub distance_rejected: usize,
    pub infeasible: usize,
    pub hits: usize,
    pub flagged: usize,
}

impl SweepStats {
    fn absorb(&mut self, other: &SweepStats) {
        self.weight_vectors += other.weight_vectors;
        self.candidates += other.candidates;
        self.empty_class += other.empty_class;
        self.distance_rejected += other.distance_rejected;
        self.infeasible += other.infeasible;
        self.hits += other.hits;
        self.flagged += other.flagged;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepOutcome {
    pub hits: Vec<HitRecord>,
    pub flagged: Vec<FlaggedRecord>,
    pub stats: SweepStats,
}

/// One unit of work: every residue tuple for one `(m, w)`.
fn sweep_weight(config: &SweepConfig, m: u32, w: Vec<u32>) -> SweepOutcome {
    let mut out = SweepOutcome::default();
    out.stats.weight_vectors = 1;
    let tuples = residues_for(config, m, &w);
    if tuples.is_empty() {
        return out;
    }
    let mut buckets: Vec<Vec<BitString>> = vec![Vec::new(); m as usize];
    let probe = SearchParams::new(m, w.clone(), vec![0]).expect("canonical by construction");
    for x in BitString::all(config.n) {
        buckets[probe.residue_of(&x) as usize].push(x);
    }
    let options = config.pipeline();
    for s in tuples {
        out.stats.candidates += 1;
        let classes: Vec<ResidueClass> = s
            .iter()
            .map(|&r| ResidueClass {
                residue: r,
                members: buckets[r as usize].clone(),
            })
            .collect();
        let params = SearchParams::new(m, w.clone(), s).expect("canonical by construction");
        match evaluate(&params, classes, &options) {
            PipelineOutcome::Hit(hit) => {
                out.stats.hits += 1;
                out.hits.push(*hit);
            }
            PipelineOutcome::Flagged(f) => {
                log::warn!("flagged {}: {} ({})", f.params, f.stage, f.reason);
                out.stats.flagged += 1;
                out.flagged.push(f);
            }
            PipelineOutcome::Rejected(Rejection::EmptyClass(_)) => out.stats.empty_class += 1,
            PipelineOutcome::Rejected(Rejection::Distance(_)) => out.stats.distance_rejected += 1,
            PipelineOutcome::Rejected(Rejection::Infeasible) => out.stats.infeasible += 1,
            PipelineOutcome::Rejected(Rejection::Screen) => unreachable!("screened during enumeration"),
        }
    }
    out
}

/// Runs the whole search on `config.jobs` worker threads.
///
/// Work is split by weight vector; partial results are concatenated in
/// enumeration order and then sorted by `(order, m, w, S)`, so the output
/// does not depend on the degree of parallelism.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutcome, SweepError> {
    config.validate()?;
    let units: Vec<(u32, Vec<u32>)> = (config.m_min..=config.m_max)
        .flat_map(|m| nondecreasing(config.n, m).map(move |w| (m, w)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let parts: Vec<SweepOutcome> = pool.install(|| {
        units
            .into_par_iter()
            .map(|(m, w)| sweep_weight(config, m, w))
            .collect()
    });
    let mut out = SweepOutcome::default();
    for part in parts {
        out.stats.absorb(&part.stats);
        out.hits.extend(part.hits);
        out.flagged.extend(part.flagged);
    }
    out.hits.sort_by(|a, b| (a.order, &a.params).cmp(&(b.order, &b.params)));
    out.flagged.sort_by(|a, b| a.params.cmp(&b.params));
    Ok(out)
}

/// Maximum order per `(n, K)`.
pub fn max_order_summary(hits: &[HitRecord]) -> BTreeMap<(usize, usize), u32> {
    let mut out = BTreeMap::new();
    for h in hits {
        let slot = out.entry((h.params.n(), h.params.k())).or_insert(0);
        *slot = (*slot).max(h.order);
    }
    out
}

/// Hit counts per `(n, K, order)`.
pub fn order_counts(hits: &[HitRecord]) -> BTreeMap<(usize, usize, u32), usize> {
    let mut out = BTreeMap::new();
    for h in hits {
        *out.entry((h.params.n(), h.params.k(), h.order)).or_insert(0) += 1;
    }
    out
}
