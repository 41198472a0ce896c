//! Oracle suites for the axioms and lemmas that h satisfies.
//!
//! Every check runs on finite fragments grown from a seed and reports each
//! violated instance with enough detail to replay it. Suites parallelize over
//! independent fragments and merge their reports in a fixed order, so results
//! do not depend on scheduling.

mod cms;
mod laws;
mod library;
mod ms;
mod nic;
mod oracle;

use std::collections::{BTreeSet, VecDeque};
use std::fmt::{Debug, Display};
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cms::{check_cms1, check_cms2_cms3, check_cms4};
pub use laws::{check_main_formulas, check_permutation_invariance, check_well_definedness};
pub use library::{formula_library, LibraryEntry};
pub use ms::{check_ms1_ms3, check_ms2, check_ms4_fubini, check_ms4_library, fubini, FubiniOutcome};
pub use nic::{check_back_and_forth, check_nic_axioms, check_round_trip};
pub use oracle::{check_normalization, sampling_oracle_component};

use crate::fragment::Fragment;
use crate::tree::{GammaNode, NodeSet, TreePlan};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub instance: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub instances: usize,
    pub failures: Vec<Failure>,
    pub seed: u64,
    pub elapsed_ms: u64,
}

impl CheckReport {
    pub fn new(suite: &str, seed: u64) -> Self {
        CheckReport { suite: suite.to_owned(), instances: 0, failures: Vec::new(), seed, elapsed_ms: 0 }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Counts one instance and records a failure unless `expected == actual`.
    pub fn expect_eq<T: PartialEq + Debug>(&mut self, instance: impl FnOnce() -> String, expected: &T, actual: &T) {
        self.instances += 1;
        if expected != actual {
            self.fail(instance(), format!("{expected:?}"), format!("{actual:?}"));
        }
    }

    /// Counts one instance and records a failure unless `ok`.
    pub fn expect(&mut self, ok: bool, instance: impl FnOnce() -> String, expected: &str, actual: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.fail(instance(), expected, actual());
        }
    }

    pub fn fail(&mut self, instance: String, expected: impl Display, actual: impl Display) {
        self.failures.push(Failure { instance, expected: expected.to_string(), actual: actual.to_string() });
    }

    /// Associative merge; the suite name and seed of `self` are kept.
    pub fn merge(mut self, other: CheckReport) -> CheckReport {
        self.instances += other.instances;
        self.failures.extend(other.failures);
        self.elapsed_ms += other.elapsed_ms;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Cms,
    Ms,
    Nic,
    Oracle,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Suite> {
        match s {
            "cms" => Some(Suite::Cms),
            "ms" => Some(Suite::Ms),
            "nic" => Some(Suite::Nic),
            "oracle" => Some(Suite::Oracle),
            "all" => Some(Suite::All),
            _ => None,
        }
    }
}

/// Bounds for a suite run. The defaults keep a full run well under a minute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Size bound of the grown fragments.
    pub max_nodes: usize,
    /// Number of grown fragments per check.
    pub fragments: usize,
    /// Sampled instances per fragment for the randomized checks.
    pub trials: usize,
    /// Size bound for closed parameter sets.
    pub max_closed: usize,
    /// Samples for the component sampling oracle.
    pub samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, max_nodes: 10, fragments: 12, trials: 20, max_closed: 8, samples: 100_000 }
    }
}

/// Per-instance seed derived from a run seed (SplitMix64 step).
pub fn instance_seed(seed: u64, i: u64) -> u64 {
    let mut z = seed.wrapping_add(i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The fragments a suite run works on.
pub fn sample_fragments(plan: &Arc<TreePlan>, cfg: &SuiteConfig) -> Vec<(u64, Fragment)> {
    (0..cfg.fragments as u64)
        .map(|i| {
            let s = instance_seed(cfg.seed, i);
            (s, Fragment::grow_random(plan.clone(), s, cfg.max_nodes))
        })
        .collect()
}

/// Runs `check` on every fragment in parallel and merges the reports in order.
pub fn run_on_fragments<F>(name: &str, plan: &Arc<TreePlan>, cfg: &SuiteConfig, check: F) -> CheckReport
where
    F: Fn(&Fragment, u64) -> CheckReport + Sync,
{
    let start = Instant::now();
    let frags = sample_fragments(plan, cfg);
    let reports: Vec<CheckReport> = frags.par_iter().map(|(s, f)| check(f, *s)).collect();
    let mut out = reports.into_iter().fold(CheckReport::new(name, cfg.seed), CheckReport::merge);
    out.elapsed_ms = start.elapsed().as_millis() as u64;
    out
}

/// Runs the selected suite group over `plan`.
pub fn run_suite(plan: &Arc<TreePlan>, suite: Suite, cfg: &SuiteConfig) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let c = cfg.clone();
    if matches!(suite, Suite::Cms | Suite::All) {
        out.push(run_on_fragments("cms1", plan, cfg, |f, s| check_cms1(f, c.trials, s, c.max_closed)));
        out.push(run_on_fragments("cms2_cms3", plan, cfg, |f, s| check_cms2_cms3(f, s, c.max_closed.min(4))));
        out.push(run_on_fragments("cms4", plan, cfg, |f, s| check_cms4(f, c.trials, s, c.max_closed)));
    }
    if matches!(suite, Suite::Ms | Suite::All) {
        out.push(run_on_fragments("ms1_ms3", plan, cfg, check_ms1_ms3_library));
        out.push(run_on_fragments("ms2", plan, cfg, check_ms2));
        out.push(run_on_fragments("ms4", plan, cfg, check_ms4_library));
        out.push(run_on_fragments("main_formulas", plan, cfg, |f, _| check_main_formulas(f, c.max_closed)));
        out.push(run_on_fragments("permutation", plan, cfg, |f, _| {
            check_permutation_invariance(f, 3, c.max_closed.min(6), 24)
        }));
        out.push(run_on_fragments("well_definedness", plan, cfg, |f, s| {
            check_well_definedness(f, c.trials, s, c.max_closed)
        }));
    }
    if matches!(suite, Suite::Nic | Suite::All) {
        out.push(run_on_fragments("nic", plan, cfg, |f, s| check_nic_axioms(f, 5, s, c.max_closed.min(6))));
        out.push(run_on_fragments("back_and_forth", plan, cfg, |f, s| {
            let other = Fragment::grow_random(f.plan_arc().clone(), s ^ 0x5bd1_e995, c.max_nodes);
            check_back_and_forth(f, &other, s)
        }));
        out.push(run_on_fragments("round_trip", plan, cfg, |f, _| check_round_trip(f)));
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        let start = Instant::now();
        let mut norm = CheckReport::new("normalization", cfg.seed);
        for th in crate::components::THEORY_IDS.iter().filter_map(|id| crate::components::theory(id)) {
            norm = norm.merge(check_normalization(th, 4));
        }
        norm.elapsed_ms = start.elapsed().as_millis() as u64;
        out.push(norm);
        let start = Instant::now();
        let mut samp = CheckReport::new("oracle", cfg.seed);
        for id in ["random_graph", "random_tournament", "random_3hypergraph"] {
            let th = crate::components::theory(id).expect("registered theory");
            for k in 0..=2 {
                samp = samp.merge(sampling_oracle_component(th, k, cfg.samples, instance_seed(cfg.seed, k as u64)));
            }
        }
        samp.elapsed_ms = start.elapsed().as_millis() as u64;
        out.push(samp);
    }
    out
}

/// MS1 and MS3 for every formula of the library.
pub fn check_ms1_ms3_library(frag: &Fragment, seed: u64) -> CheckReport {
    let mut report = CheckReport::new("ms1_ms3", seed);
    for entry in formula_library(frag.plan()) {
        let budget = crate::fragment::min_budget(frag.plan(), entry.param_paths.len());
        match check_ms1_ms3(frag, &entry.formula, entry.arity, entry.param_paths.len(), budget) {
            Ok(r) => report = report.merge(r),
            Err(e) => report.fail(format!("{} {}", entry.name, seed), "a report", e),
        }
    }
    report
}

/// Every tree-closed subset of the fragment with at most `max_size` nodes,
/// in breadth-first discovery order from `tcl(∅)`, stopping after `cap` sets.
pub fn closed_subsets(frag: &Fragment, max_size: usize, cap: usize) -> Vec<NodeSet> {
    let start = frag.tcl(std::iter::empty());
    if start.len() > max_size || cap == 0 {
        return Vec::new();
    }
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    order.push(start.clone());
    queue.push_back(start);
    while let Some(s) = queue.pop_front() {
        for n in frag.nodes() {
            if s.contains(n) {
                continue;
            }
            let t = frag.tcl(s.iter().chain(std::iter::once(n)));
            if t.len() <= max_size && seen.insert(t.clone()) {
                order.push(t.clone());
                if order.len() >= cap {
                    return order;
                }
                queue.push_back(t);
            }
        }
    }
    order
}

/// A random closed subset generated by at most `gens` random nodes, or
/// `tcl(∅)` if the closure would exceed `max_size`.
pub fn random_closed(frag: &Fragment, rng: &mut impl Rng, gens: usize, max_size: usize) -> NodeSet {
    let nodes: Vec<&GammaNode> = frag.nodes().iter().collect();
    let k = rng.gen_range(0..=gens);
    let picked: Vec<&GammaNode> = nodes.choose_multiple(rng, k).copied().collect();
    let mut c = frag.tcl(std::iter::empty());
    for n in picked {
        let t = frag.tcl(c.iter().chain(std::iter::once(n)));
        if t.len() <= max_size {
            c = t;
        }
    }
    c
}

pub fn random_tuple(frag: &Fragment, rng: &mut impl Rng, len: usize) -> Vec<GammaNode> {
    let nodes: Vec<&GammaNode> = frag.nodes().iter().collect();
    (0..len).map(|_| nodes[rng.gen_range(0..nodes.len())].clone()).collect()
}

/// All tuples of length `len` over `items`, in lexicographic index order.
pub fn all_tuples<T: Clone>(items: &[T], len: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                items.iter().map(move |x| {
                    let mut t = t.clone();
                    t.push(x.clone());
                    t
                })
            })
            .collect();
    }
    out
}

pub(crate) fn show_set(s: &NodeSet) -> String {
    show_nodes(s.iter())
}

pub(crate) fn show_nodes<'a>(it: impl IntoIterator<Item = &'a GammaNode>) -> String {
    let parts: Vec<String> = it.into_iter().map(ToString::to_string).collect();
    format!("{{{}}}", parts.join(" "))
}
