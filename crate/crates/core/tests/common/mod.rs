//! Frame builders shared by the integration tests.
#![allow(dead_code)]

use scanlens::capture::BeaconIndex;
use scanlens::causes::{infer_cause, AssociationState, CauseLabel, Evidence, Thresholds};
use scanlens::segmentation::{ScanEpisode, Window};
use scanlens::capture::dot11::min_encoded_len;
use scanlens::{Frame, MacAddr, PhyRate, QbssLoad, Subtype, Timestamp};

pub const STA: MacAddr = MacAddr([0x02, 0, 0, 0, 0, 0x01]);
pub const AP: MacAddr = MacAddr([0x02, 0, 0, 0, 0, 0xa1]);

pub fn ts(secs: f64) -> Timestamp {
    Timestamp::from_secs_f64(secs)
}

pub fn uplink(secs: f64, subtype: Subtype) -> Frame {
    let mut f = Frame::new(ts(secs), subtype, AP);
    f.transmitter = Some(STA);
    f.bssid = Some(AP);
    f.channel = 6;
    f.phy_rate = PhyRate::from_mbps(54.0);
    f.rssi = Some(-50);
    f.frame_bytes = f.header_len() + if subtype.is_payload_data() { 500 } else { 0 };
    f
}

pub fn downlink(secs: f64, subtype: Subtype) -> Frame {
    let mut f = Frame::new(ts(secs), subtype, STA);
    f.transmitter = Some(AP);
    f.bssid = Some(AP);
    f.channel = 6;
    f.phy_rate = PhyRate::from_mbps(24.0);
    f.rssi = Some(-40);
    f.frame_bytes = f.header_len() + 40;
    f
}

pub fn ack_to(secs: f64, to: MacAddr) -> Frame {
    let mut f = Frame::new(ts(secs), Subtype::Ack, to);
    f.channel = 6;
    f.phy_rate = PhyRate::from_mbps(24.0);
    f.frame_bytes = 10;
    f
}

/// An uplink data frame and the ACK for it 100 µs later.
pub fn acked_data(secs: f64) -> [Frame; 2] {
    [uplink(secs, Subtype::QosData), ack_to(secs + 100e-6, STA)]
}

pub fn beacon(secs: f64) -> Frame {
    let mut f = Frame::new(ts(secs), Subtype::Beacon, MacAddr::BROADCAST);
    f.transmitter = Some(AP);
    f.bssid = Some(AP);
    f.channel = 6;
    f.ssid = Some("net".into());
    f.beacon_interval = Some(100);
    f.frame_bytes = 120;
    f
}

pub fn preq(secs: f64) -> Frame {
    let mut f = Frame::new(ts(secs), Subtype::ProbeRequest, MacAddr::BROADCAST);
    f.transmitter = Some(STA);
    f.bssid = Some(MacAddr::BROADCAST);
    f.channel = 6;
    f.ssid = Some(String::new());
    f.frame_bytes = 60;
    f
}

/// Labels a single-probe episode at `episode_at` whose window holds
/// `frames` and starts at capture start.
pub fn label_with(frames: Vec<Frame>, episode_at: f64, associated: bool, th: &Thresholds) -> CauseLabel {
    let mut frames = frames;
    frames.sort_by_key(|f| f.timestamp);
    let p = preq(episode_at);
    let episode = ScanEpisode { client: STA, preqs: vec![p.clone()], start: p.timestamp, end: p.timestamp, presps: vec![] };
    let beacons = BeaconIndex::build(&frames);
    let window = Window { client: STA, start: Timestamp(0), end: p.timestamp, frames };
    let state = if associated { AssociationState::associated(AP) } else { AssociationState::unassociated() };
    let ev = Evidence { episode: &episode, window: &window, state_at_window_start: state, beacons: &beacons };
    infer_cause(&ev, th)
}

pub fn label(frames: Vec<Frame>, episode_at: f64, associated: bool) -> CauseLabel {
    label_with(frames, episode_at, associated, &Thresholds::default())
}

/// Ten uplink frames per second over `secs` seconds, all acknowledged, with
/// RSSI alternating between `mean + swing` and `mean - swing`.
pub fn rssi_window(mean: i32, swing: i32, secs: u32) -> Vec<Frame> {
    let mut out = Vec::new();
    for k in 0..secs * 10 {
        let t = k as f64 * 0.1 + 0.05;
        let [mut d, a] = acked_data(t);
        d.rssi = Some((mean + if k % 2 == 0 { swing } else { -swing }) as i8);
        out.extend([d, a]);
    }
    out
}

/// `n` acknowledged uplink frames within one second, `retries` of them
/// flagged as retransmissions.
pub fn retry_window(n: usize, retries: usize) -> Vec<Frame> {
    let mut out = Vec::new();
    for k in 0..n {
        let [mut d, a] = acked_data(0.05 + k as f64 * 0.08);
        d.retry = k < retries;
        out.extend([d, a]);
    }
    out
}

pub fn unacked_window(n: usize, unacked: usize) -> Vec<Frame> {
    let mut out = Vec::new();
    for k in 0..n {
        let [d, a] = acked_data(0.05 + k as f64 * 0.08);
        out.push(d);
        if k >= unacked {
            out.push(a);
        }
    }
    out
}

/// Three seconds of acked data; the last second is sent at `closing` Mbps.
pub fn rate_window(closing: f64) -> Vec<Frame> {
    let mut out = Vec::new();
    for k in 0..30 {
        let t = 0.05 + k as f64 * 0.1;
        let [mut d, a] = acked_data(t);
        if t > 2.0 {
            d.phy_rate = PhyRate::from_mbps(closing);
        }
        out.extend([d, a]);
    }
    out
}

/// Two awake nulls and beacons whose last `late` gaps are `late_ms` long.
pub fn beacon_window(late: usize, late_ms: f64) -> Vec<Frame> {
    let mut out = vec![uplink(0.5, Subtype::NullData), uplink(0.6, Subtype::NullData)];
    let mut t = 0.0;
    for _ in 0..10 {
        out.push(beacon(t));
        t += 0.1024;
    }
    for _ in 0..late {
        t += late_ms / 1000.0 - 0.1024;
        out.push(beacon(t));
        t += 0.1024;
    }
    out
}

/// `low` frames in each of the first `quiet` seconds, then `high` frames per
/// second for three seconds.
pub fn power_window(quiet: u32, low: u32, high: u32) -> (Vec<Frame>, f64) {
    let mut out = Vec::new();
    let mut second = 0;
    for (count, secs) in [(low, quiet), (high, 3)] {
        for _ in 0..secs {
            for k in 0..count {
                let t = second as f64 + (k as f64 + 0.5) / count as f64;
                out.extend(acked_data(t));
            }
            second += 1;
        }
    }
    (out, second as f64 + 0.01)
}

/// Groups probe times by the transitive closure of "closer than `gap`",
/// comparing every pair until nothing changes.
pub fn closure_oracle(times: &[u64], gap: u64) -> Vec<Vec<u64>> {
    let n = times.len();
    let mut group: Vec<usize> = (0..n).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            for j in 0..n {
                if times[i].abs_diff(times[j]) < gap && group[j] > group[i] {
                    group[j] = group[i];
                    changed = true;
                }
            }
        }
    }
    let mut ids: Vec<usize> = group.clone();
    ids.sort_unstable();
    ids.dedup();
    ids.iter()
        .map(|&g| {
            let mut members: Vec<u64> = (0..n).filter(|&i| group[i] == g).map(|i| times[i]).collect();
            members.sort_unstable();
            members
        })
        .collect()
}

pub const RATES: [f64; 12] = [1.0, 2.0, 5.5, 11.0, 6.0, 9.0, 12.0, 18.0, 24.0, 36.0, 48.0, 54.0];
pub const CHANNELS: [u8; 5] = [1, 6, 11, 36, 149];
pub const SUBTYPES: [Subtype; 12] = [
    Subtype::Beacon,
    Subtype::ProbeRequest,
    Subtype::ProbeResponse,
    Subtype::Authentication,
    Subtype::AssociationRequest,
    Subtype::AssociationResponse,
    Subtype::Deauthentication,
    Subtype::Ack,
    Subtype::Data,
    Subtype::QosData,
    Subtype::NullData,
    Subtype::QosNull,
];

#[derive(Debug, Clone)]
pub struct Raw {
    pub gap_us: u32,
    pub subtype: usize,
    pub a: u8,
    pub b: u8,
    pub rssi: Option<i8>,
    pub rate: usize,
    pub channel: usize,
    pub retry: bool,
    pub pm: bool,
    pub pad: u16,
    pub ssid: String,
    pub qbss: Option<(u16, u8)>,
    pub status: u16,
}

pub fn build(t: u64, r: &Raw) -> Frame {
    let st = SUBTYPES[r.subtype];
    let sta = MacAddr([0x02, 0, 0, 0, 1, r.a]);
    let ap = MacAddr([0x02, 0, 0, 0, 2, r.b]);
    let (rx, tx, bssid) = match st {
        Subtype::Beacon => (MacAddr::BROADCAST, Some(ap), Some(ap)),
        Subtype::ProbeRequest => (MacAddr::BROADCAST, Some(sta), Some(MacAddr::BROADCAST)),
        Subtype::Ack => (sta, None, None),
        Subtype::ProbeResponse | Subtype::AssociationResponse | Subtype::Deauthentication => (sta, Some(ap), Some(ap)),
        _ => (ap, Some(sta), Some(ap)),
    };
    let mut f = Frame::new(Timestamp(t), st, rx);
    f.transmitter = tx;
    f.bssid = bssid;
    f.rssi = r.rssi;
    f.phy_rate = PhyRate::from_mbps(RATES[r.rate]);
    f.channel = CHANNELS[r.channel];
    f.retry = r.retry;
    f.power_mgmt = r.pm;
    if st.may_carry_ssid() {
        f.ssid = Some(r.ssid.clone());
    }
    if st.has_fixed_beacon_fields() {
        f.beacon_interval = Some(100);
        f.qbss = r.qbss.map(|(s, c)| QbssLoad { station_count: s, channel_utilization: c });
    }
    if st.carries_status() {
        f.status_code = Some(r.status);
    }
    f.frame_bytes = min_encoded_len(&f) + r.pad as u32;
    f
}

pub fn trace(raws: &[Raw]) -> Vec<Frame> {
    let mut t = 0u64;
    raws.iter()
        .enumerate()
        .map(|(i, r)| {
            if i > 0 {
                t += r.gap_us as u64;
            }
            build(t, r)
        })
        .collect()
}
