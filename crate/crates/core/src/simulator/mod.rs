//! Deterministic synthetic traces with ground-truth cause labels, and the
//! harness that replays a scenario under both scan policies.

mod client;
mod comparison;
mod radio;
pub mod reference;
mod scenario;

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::capture::{encode_capture, CaptureError};
use crate::causes::CauseLabel;
use crate::frame::{Frame, MacAddr, PhyRate, Timestamp};
use crate::par::{self, Execution};

use client::{ClientRun, ClientSim};
use radio::{Radio, OUTAGE_BEACON_US};

pub use comparison::{median, run_comparison, run_comparison_with, sweep, ClientComparison, ComparisonReport, PolicySummary};
pub use scenario::{
    ApSpec, ClientSpec, Injection, InjectionKind, Mobility, RssiPoint, ScenarioSpec, SimError, Traffic,
};

/// The cause behind one generated scanning episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthEpisode {
    pub client: MacAddr,
    pub start: Timestamp,
    pub end: Timestamp,
    pub cause: CauseLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Sorted by client, then start time.
    pub episodes: Vec<TruthEpisode>,
}

impl GroundTruth {
    pub fn labels(&self) -> Vec<CauseLabel> {
        self.episodes.iter().map(|e| e.cause).collect()
    }

    pub fn of(&self, client: MacAddr) -> impl Iterator<Item = &TruthEpisode> {
        self.episodes.iter().filter(move |e| e.client == client)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    /// Time-sorted, starting at zero.
    pub trace: Vec<Frame>,
    pub truth: GroundTruth,
    /// Frames emitted per PHY rate, before sniffer loss.
    pub rate_mix: BTreeMap<PhyRate, usize>,
}

fn simulate_clients(spec: &ScenarioSpec, radio: &Radio<'_>, exec: Execution) -> Vec<ClientRun> {
    let indices: Vec<usize> = (0..spec.clients.len()).collect();
    par::map(exec, &indices, |&i| ClientSim::new(radio, i).run())
}

fn beacons(radio: &Radio<'_>, ap: usize, outages: &[radio::Outage], end: u64) -> Vec<Frame> {
    let interval = radio.ap(ap).beacon_interval_us();
    // Stagger APs so the first AP's first beacon anchors the trace at zero.
    let mut t = (ap as u64 * 7_919) % interval.max(1);
    let mut out = Vec::with_capacity((end / interval.max(1)) as usize + 1);
    while t <= end {
        out.push(radio.beacon(t, ap));
        let stretched = outages.iter().any(|o| o.ap == ap && (o.start..o.end).contains(&t));
        t += if stretched { OUTAGE_BEACON_US } else { interval };
    }
    out
}

/// Generates the trace and its ground truth. Pure in `spec`.
pub fn generate(spec: &ScenarioSpec) -> Result<Generated, SimError> {
    generate_with(spec, Execution::default())
}

pub fn generate_with(spec: &ScenarioSpec, exec: Execution) -> Result<Generated, SimError> {
    spec.validate()?;
    let radio = Radio::new(spec);
    let runs = simulate_clients(spec, &radio, exec);
    let end = radio::us(spec.duration);

    let mut trace = Vec::new();
    let mut truth = Vec::new();
    let mut outages = Vec::new();
    for run in runs {
        trace.extend(run.frames);
        truth.extend(run.truth);
        outages.extend(run.outages);
    }
    for ap in 0..spec.aps.len() {
        trace.extend(beacons(&radio, ap, &outages, end));
    }
    trace.sort_by_key(|f| f.timestamp);
    truth.sort_by_key(|e| (e.client, e.start));

    let mut rate_mix = BTreeMap::new();
    for f in &trace {
        *rate_mix.entry(f.phy_rate).or_insert(0) += 1;
    }

    if spec.sniffer_drop > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(0);
        let first = trace.first().map(|f| f.timestamp);
        // The earliest frame is kept so that the trace still starts at zero.
        trace.retain(|f| Some(f.timestamp) == first || !rng.gen_bool(spec.sniffer_drop));
    }

    Ok(Generated { trace, truth: GroundTruth { episodes: truth }, rate_mix })
}

#[derive(Debug, thiserror::Error)]
pub enum WriteError {
    #[error(transparent)]
    Capture(#[from] CaptureError),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Writes `trace` as a radiotap pcap file.
pub fn write_capture(trace: &[Frame], path: &Path) -> Result<(), WriteError> {
    let bytes = encode_capture(trace)?;
    std::fs::write(path, bytes).map_err(|source| WriteError::Io { path: path.display().to_string(), source })
}
