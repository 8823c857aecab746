use serde::{Deserialize, Serialize};

use crate::frame::MacAddr;
use crate::par::{self, Execution};
use crate::policy::PolicyKind;

use super::radio::Radio;
use super::{simulate_clients, ScenarioSpec, SimError};

const HOUR_US: u64 = 3_600_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientComparison {
    pub client: MacAddr,
    pub policy: PolicyKind,
    /// Probe requests sent in each hour of the scenario.
    pub preqs_per_hour: Vec<u64>,
    /// Seconds from losing the link involuntarily to reassociating.
    pub ttc: Vec<f64>,
    /// Seconds between consecutive successful connection establishments.
    pub persistence: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: PolicyKind,
    pub clients: usize,
    pub total_preqs: u64,
    /// Summed over the policy's clients.
    pub preqs_per_hour: Vec<u64>,
    pub ttc: Vec<f64>,
    pub persistence: Vec<f64>,
    pub median_ttc: Option<f64>,
    pub median_persistence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub seed: u64,
    pub duration: f64,
    pub clients: Vec<ClientComparison>,
    pub modified: PolicySummary,
    pub baseline: PolicySummary,
    /// Probe requests per modified client over probe requests per baseline
    /// client. Absent when baseline clients sent none.
    pub preq_ratio: Option<f64>,
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

fn summarize(policy: PolicyKind, clients: &[ClientComparison], hours: usize) -> PolicySummary {
    let mine: Vec<&ClientComparison> = clients.iter().filter(|c| c.policy == policy).collect();
    let mut per_hour = vec![0u64; hours];
    for c in &mine {
        for (h, n) in c.preqs_per_hour.iter().enumerate() {
            per_hour[h] += n;
        }
    }
    let ttc: Vec<f64> = mine.iter().flat_map(|c| c.ttc.iter().copied()).collect();
    let persistence: Vec<f64> = mine.iter().flat_map(|c| c.persistence.iter().copied()).collect();
    PolicySummary {
        policy,
        clients: mine.len(),
        total_preqs: per_hour.iter().sum(),
        preqs_per_hour: per_hour,
        median_ttc: median(&ttc),
        median_persistence: median(&persistence),
        ttc,
        persistence,
    }
}

/// Replays `spec` and tallies probe requests, time-to-connect and
/// connection persistence per client and per policy.
pub fn run_comparison(spec: &ScenarioSpec) -> Result<ComparisonReport, SimError> {
    run_comparison_with(spec, Execution::default())
}

pub fn run_comparison_with(spec: &ScenarioSpec, exec: Execution) -> Result<ComparisonReport, SimError> {
    spec.validate_for_comparison()?;
    let radio = Radio::new(spec);
    let runs = simulate_clients(spec, &radio, exec);
    let hours = ((spec.duration / 3600.0).ceil() as usize).max(1);

    let clients: Vec<ClientComparison> = spec
        .clients
        .iter()
        .zip(runs)
        .map(|(c, run)| {
            let mut preqs_per_hour = vec![0u64; hours];
            for t in &run.preq_times {
                preqs_per_hour[((t / HOUR_US) as usize).min(hours - 1)] += 1;
            }
            let secs = |us: u64| us as f64 / 1e6;
            ClientComparison {
                client: c.mac,
                policy: c.policy,
                preqs_per_hour,
                ttc: run.ttc.iter().map(|&t| secs(t)).collect(),
                persistence: run.establishments.windows(2).map(|w| secs(w[1] - w[0])).collect(),
            }
        })
        .collect();

    let modified = summarize(PolicyKind::Modified, &clients, hours);
    let baseline = summarize(PolicyKind::Baseline, &clients, hours);
    let per_client = |s: &PolicySummary| s.total_preqs as f64 / s.clients as f64;
    let preq_ratio = (baseline.total_preqs > 0).then(|| per_client(&modified) / per_client(&baseline));
    Ok(ComparisonReport { seed: spec.seed, duration: spec.duration, clients, modified, baseline, preq_ratio })
}

/// Runs the comparison once per seed, in parallel when `exec` allows.
pub fn sweep(spec: &ScenarioSpec, seeds: &[u64], exec: Execution) -> Result<Vec<ComparisonReport>, SimError> {
    spec.validate_for_comparison()?;
    par::map(exec, seeds, |&seed| {
        let mut s = spec.clone();
        s.seed = seed;
        run_comparison_with(&s, Execution::Sequential)
    })
    .into_iter()
    .collect()
}
