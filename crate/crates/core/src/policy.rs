//! Scan-decision state machines.
//!
//! [`PolicyKind::Baseline`] follows a supplicant-style periodic scheme: an
//! active scan whenever the periodic timer fires, with the interval growing
//! threefold from 3 s up to 300 s, plus an active scan for every connection
//! or maintenance trigger.
//!
//! [`PolicyKind::Modified`] keeps active scans for connection establishment
//! (explicit connect requests and RSSI handover). Maintenance triggers get a
//! passive scan, discovery while unassociated is passive, and periodic
//! scanning stops while associated.
//!
//! Both engines are pure: `decide` maps `(state, event)` to a new state and a
//! decision. Maintenance causes are supplied by the caller.

use serde::{Deserialize, Serialize};

use crate::causes::CauseLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum EventKind {
    RssiSample { dbm: f64 },
    AssociationChange { associated: bool },
    MaintenanceCause { cause: CauseLabel },
    TimerTick,
    ConnectRequest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyEvent {
    /// Seconds since the start of the run.
    pub at: f64,
    pub kind: EventKind,
}

impl PolicyEvent {
    pub fn new(at: f64, kind: EventKind) -> Self {
        PolicyEvent { at, kind }
    }
}

/// Ordered so that merging simultaneous decisions with `max` keeps the
/// strongest scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanDecision {
    None,
    PassiveScan,
    ActiveScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyState {
    pub associated: bool,
    pub last_rssi: Option<f64>,
    /// When the periodic timer next fires, in seconds.
    pub next_periodic_at: Option<f64>,
    /// Seconds to wait before the scan at `next_periodic_at`.
    pub periodic_interval: f64,
    /// Whether a drop below the handover threshold will trigger a scan.
    pub handover_armed: bool,
    pub last_event_at: Option<f64>,
}

impl PolicyState {
    /// An unassociated client whose periodic timer starts at `at`.
    pub fn new(at: f64, cfg: &PolicyConfig) -> Self {
        PolicyState {
            associated: false,
            last_rssi: None,
            next_periodic_at: Some(at + cfg.min_interval_s),
            periodic_interval: cfg.min_interval_s,
            handover_armed: true,
            last_event_at: None,
        }
    }

    pub fn periodic_due(&self, at: f64) -> bool {
        self.next_periodic_at.is_some_and(|n| at >= n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub handover_dbm: f64,
    /// The handover trigger re-arms once RSSI climbs back to this level.
    pub rearm_dbm: f64,
    pub min_interval_s: f64,
    pub max_interval_s: f64,
    pub growth: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            handover_dbm: -70.0,
            rearm_dbm: -65.0,
            min_interval_s: 3.0,
            max_interval_s: 300.0,
            growth: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("event at {got} s precedes the previous event at {last} s")]
    OutOfOrderEvent { last: f64, got: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Modified,
    Baseline,
}

impl PolicyKind {
    pub const BOTH: [PolicyKind; 2] = [PolicyKind::Modified, PolicyKind::Baseline];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Modified => "modified",
            PolicyKind::Baseline => "baseline",
        }
    }

    pub fn decide(
        self,
        cfg: &PolicyConfig,
        state: PolicyState,
        event: PolicyEvent,
    ) -> Result<(PolicyState, ScanDecision), PolicyError> {
        match self {
            PolicyKind::Modified => modified_decide_with(cfg, state, event),
            PolicyKind::Baseline => baseline_decide_with(cfg, state, event),
        }
    }

    /// Whether the client asks to reconnect as soon as it loses its link,
    /// instead of waiting for the periodic timer to find a network.
    pub fn immediate_reconnect(self) -> bool {
        matches!(self, PolicyKind::Modified)
    }
}

fn check_order(state: &mut PolicyState, at: f64) -> Result<(), PolicyError> {
    if let Some(last) = state.last_event_at {
        if at < last {
            return Err(PolicyError::OutOfOrderEvent { last, got: at });
        }
    }
    state.last_event_at = Some(at);
    Ok(())
}

/// Updates the stored RSSI and the hysteresis latch. Returns whether this
/// sample fires the handover trigger.
fn handover_fires(cfg: &PolicyConfig, s: &mut PolicyState, dbm: f64) -> bool {
    s.last_rssi = Some(dbm);
    if dbm >= cfg.rearm_dbm {
        s.handover_armed = true;
    }
    if s.associated && s.handover_armed && dbm < cfg.handover_dbm {
        s.handover_armed = false;
        return true;
    }
    false
}

fn advance_timer(cfg: &PolicyConfig, s: &mut PolicyState, at: f64) {
    s.periodic_interval = (s.periodic_interval * cfg.growth).min(cfg.max_interval_s);
    s.next_periodic_at = Some(at + s.periodic_interval);
}

fn reset_timer(cfg: &PolicyConfig, s: &mut PolicyState, at: f64) {
    s.periodic_interval = cfg.min_interval_s;
    s.next_periodic_at = Some(at + cfg.min_interval_s);
}

pub fn modified_decide_with(
    cfg: &PolicyConfig,
    mut s: PolicyState,
    e: PolicyEvent,
) -> Result<(PolicyState, ScanDecision), PolicyError> {
    check_order(&mut s, e.at)?;
    let decision = match e.kind {
        EventKind::ConnectRequest => ScanDecision::ActiveScan,
        EventKind::RssiSample { dbm } => {
            if handover_fires(cfg, &mut s, dbm) {
                ScanDecision::ActiveScan
            } else {
                ScanDecision::None
            }
        }
        EventKind::MaintenanceCause { .. } if s.associated => ScanDecision::PassiveScan,
        EventKind::MaintenanceCause { .. } => ScanDecision::None,
        EventKind::TimerTick if !s.associated && s.periodic_due(e.at) => {
            advance_timer(cfg, &mut s, e.at);
            ScanDecision::PassiveScan
        }
        EventKind::TimerTick => ScanDecision::None,
        EventKind::AssociationChange { associated } => {
            s.associated = associated;
            if associated {
                s.next_periodic_at = None;
            } else {
                reset_timer(cfg, &mut s, e.at);
            }
            ScanDecision::None
        }
    };
    Ok((s, decision))
}

pub fn baseline_decide_with(
    cfg: &PolicyConfig,
    mut s: PolicyState,
    e: PolicyEvent,
) -> Result<(PolicyState, ScanDecision), PolicyError> {
    check_order(&mut s, e.at)?;
    let decision = match e.kind {
        EventKind::ConnectRequest | EventKind::MaintenanceCause { .. } => ScanDecision::ActiveScan,
        EventKind::RssiSample { dbm } => {
            if handover_fires(cfg, &mut s, dbm) {
                ScanDecision::ActiveScan
            } else {
                ScanDecision::None
            }
        }
        EventKind::TimerTick if s.periodic_due(e.at) => {
            advance_timer(cfg, &mut s, e.at);
            ScanDecision::ActiveScan
        }
        EventKind::TimerTick => ScanDecision::None,
        EventKind::AssociationChange { associated } => {
            s.associated = associated;
            reset_timer(cfg, &mut s, e.at);
            ScanDecision::None
        }
    };
    Ok((s, decision))
}

pub fn modified_decide(
    state: PolicyState,
    event: PolicyEvent,
) -> Result<(PolicyState, ScanDecision), PolicyError> {
    modified_decide_with(&PolicyConfig::default(), state, event)
}

pub fn baseline_decide(
    state: PolicyState,
    event: PolicyEvent,
) -> Result<(PolicyState, ScanDecision), PolicyError> {
    baseline_decide_with(&PolicyConfig::default(), state, event)
}
