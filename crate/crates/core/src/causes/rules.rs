//! The per-episode rule engine.

use super::association::{update_association, AssociationState};
use super::thresholds::{Rule, Thresholds};
use super::CauseLabel;
use crate::capture::BeaconIndex;
use crate::frame::{Frame, MacAddr, Subtype, Timestamp};
use crate::segmentation::{ScanEpisode, Window};

/// Everything the rules may look at for one episode.
#[derive(Debug, Clone, Copy)]
pub struct Evidence<'a> {
    pub episode: &'a ScanEpisode,
    pub window: &'a Window,
    /// Association state when the window opens.
    pub state_at_window_start: AssociationState,
    pub beacons: &'a BeaconIndex,
}

/// What folding the window through the association tracker revealed.
struct WindowWalk {
    state_at_end: AssociationState,
    /// A (re)association completed inside the window after setup frames.
    established: bool,
    /// The associated AP deauthenticated the client.
    deauth_from_ap: bool,
    /// BSSID whose beacons the client was tracking.
    tracked_bssid: Option<MacAddr>,
}

fn walk_window(client: MacAddr, frames: &[Frame], start: AssociationState) -> WindowWalk {
    let mut state = start;
    let mut saw_setup = false;
    let mut established = false;
    let mut deauth_from_ap = false;
    let mut tracked = start.current_bssid();
    for f in frames {
        if f.subtype.is_connection_setup() {
            saw_setup = true;
        }
        if f.is(Subtype::Deauthentication)
            && f.receiver == client
            && f.transmitter.is_some()
            && f.transmitter == state.current_bssid()
        {
            deauth_from_ap = true;
        }
        let next = update_association(state, f, client);
        if let Some(b) = next.current_bssid() {
            if saw_setup && next.current_bssid() != state.current_bssid() {
                established = true;
            }
            tracked = Some(b);
        }
        state = next;
    }
    WindowWalk { state_at_end: state, established, deauth_from_ap, tracked_bssid: tracked }
}

/// Labels one episode. The first rule in `thresholds.precedence` whose
/// condition holds wins; otherwise the episode is a periodic scan split by
/// association status at the episode start.
pub fn infer_cause(ev: &Evidence<'_>, thresholds: &Thresholds) -> CauseLabel {
    let client = ev.window.client;
    let frames = &ev.window.frames;
    let walk = walk_window(client, frames, ev.state_at_window_start);
    let associated = walk.state_at_end.is_associated();

    for rule in &thresholds.precedence {
        let hit = match rule {
            Rule::ConnectionEstablishment => walk.established,
            Rule::ApSideProcedures => walk.deauth_from_ap,
            Rule::LossOfBeacons => {
                associated
                    && walk.tracked_bssid.is_some_and(|b| {
                        let beacons = ev.beacons.between(b, ev.window.start, ev.window.end);
                        loss_of_beacons(client, frames, beacons, thresholds)
                    })
            }
            Rule::DataFrameLosses => associated && data_frame_losses(client, frames, thresholds),
            Rule::LowRssi => associated && low_rssi(client, frames, thresholds),
            Rule::PowerStateLowToHigh => {
                associated && power_state_rise(client, frames, ev.window, thresholds)
            }
        };
        if hit {
            return rule.label();
        }
    }
    CauseLabel::periodic(associated)
}

impl Rule {
    pub fn label(self) -> CauseLabel {
        match self {
            Rule::ConnectionEstablishment => CauseLabel::ConnectionEstablishment,
            Rule::ApSideProcedures => CauseLabel::ApSideProcedures,
            Rule::LossOfBeacons => CauseLabel::LossOfBeacons,
            Rule::DataFrameLosses => CauseLabel::DataFrameLosses,
            Rule::LowRssi => CauseLabel::LowRssi,
            Rule::PowerStateLowToHigh => CauseLabel::PowerStateLowToHigh,
        }
    }
}

/// At least two consecutive awake null frames from the client, and a run of
/// `beacon_count` consecutive beacon gaps longer than the nominal interval.
pub(crate) fn loss_of_beacons(
    client: MacAddr,
    frames: &[Frame],
    beacons: &[Timestamp],
    th: &Thresholds,
) -> bool {
    let mut run = 0;
    let mut awake = false;
    for f in frames.iter().filter(|f| f.sent_by(client)) {
        if f.subtype.is_null() && !f.power_mgmt {
            run += 1;
            if run >= 2 {
                awake = true;
                break;
            }
        } else {
            run = 0;
        }
    }
    if !awake {
        return false;
    }
    let nominal_us = th.nominal_beacon_interval_ms * 1000.0;
    let mut late = 0u32;
    for pair in beacons.windows(2) {
        if pair[1].saturating_sub(pair[0]) as f64 > nominal_us {
            late += 1;
            if late >= th.beacon_count {
                return true;
            }
        } else {
            late = 0;
        }
    }
    false
}

/// Retries, unacknowledged frames or a PHY-rate drop on the client's own
/// data frames beyond `loss_fraction`.
pub(crate) fn data_frame_losses(client: MacAddr, frames: &[Frame], th: &Thresholds) -> bool {
    let data: Vec<&Frame> =
        frames.iter().filter(|f| f.sent_by(client) && f.subtype.is_payload_data()).collect();
    if data.is_empty() {
        return false;
    }
    let n = data.len() as f64;
    let retries = data.iter().filter(|f| f.retry).count() as f64;
    if retries / n > th.loss_fraction {
        return true;
    }

    let ack_times: Vec<Timestamp> = frames
        .iter()
        .filter(|f| f.is(Subtype::Ack) && f.receiver == client)
        .map(|f| f.timestamp)
        .collect();
    let timeout_us = (th.ack_timeout_ms * 1000.0).round() as u64;
    let unacked = data.iter().filter(|d| !acked(&ack_times, d.timestamp, timeout_us)).count() as f64;
    if unacked / n > th.loss_fraction {
        return true;
    }

    rate_drop(&data).is_some_and(|drop| drop > th.loss_fraction)
}

/// True when an ACK lies in `(t, t + timeout]`.
pub(crate) fn acked(ack_times: &[Timestamp], t: Timestamp, timeout_us: u64) -> bool {
    let i = ack_times.partition_point(|&a| a <= t);
    ack_times.get(i).is_some_and(|&a| a.saturating_sub(t) <= timeout_us)
}

/// Relative drop from the mean rate of the first second of client data to
/// the mean rate of the last second. `None` when the data spans less than
/// two seconds, so the two bins would overlap.
fn rate_drop(data: &[&Frame]) -> Option<f64> {
    let first = data.first()?.timestamp;
    let last = data.last()?.timestamp;
    if last.saturating_sub(first) < 2_000_000 {
        return None;
    }
    let mean = |it: &mut dyn Iterator<Item = &&Frame>| {
        let (sum, n) = it.fold((0.0, 0usize), |(s, n), f| (s + f.phy_rate.mbps(), n + 1));
        sum / n as f64
    };
    let opening = mean(&mut data.iter().filter(|f| f.timestamp.saturating_sub(first) < 1_000_000));
    let closing = mean(&mut data.iter().filter(|f| last.saturating_sub(f.timestamp) < 1_000_000));
    Some((opening - closing) / opening)
}

/// Mean below and population standard deviation above the thresholds.
pub(crate) fn low_rssi(client: MacAddr, frames: &[Frame], th: &Thresholds) -> bool {
    let samples: Vec<f64> =
        frames.iter().filter(|f| f.sent_by(client)).filter_map(|f| f.rssi).map(f64::from).collect();
    if samples.len() < 2 {
        return false;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    mean < th.rssi_mean_dbm && var.sqrt() > th.rssi_std_db
}

/// Client frames counted in whole one-second bins from window start; a bin
/// below `low_rate_fps` followed later by a bin at least at `low_rate_fps`
/// and at least twice the earlier count.
pub(crate) fn power_state_rise(
    client: MacAddr,
    frames: &[Frame],
    window: &Window,
    th: &Thresholds,
) -> bool {
    let span = window.end.saturating_sub(window.start);
    let bins = (span / 1_000_000) as usize;
    if bins < 2 {
        return false;
    }
    let mut counts = vec![0u32; bins];
    for f in frames.iter().filter(|f| f.sent_by(client)) {
        let idx = (f.timestamp.saturating_sub(window.start) / 1_000_000) as usize;
        if let Some(c) = counts.get_mut(idx) {
            *c += 1;
        }
    }
    let mut lowest: Option<u32> = None;
    for &c in &counts {
        if let Some(low) = lowest {
            if c as f64 >= th.low_rate_fps && c >= 2 * low {
                return true;
            }
        }
        if (c as f64) < th.low_rate_fps {
            lowest = Some(lowest.map_or(c, |l| l.min(c)));
        }
    }
    false
}
