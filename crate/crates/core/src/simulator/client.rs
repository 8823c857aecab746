//! One client's life: policy decisions, injected events and the frames they
//! leave on the air.
//!
//! The client does one thing at a time. Every emitted scan is followed by a
//! guard interval longer than the segmentation gap, so each scan is exactly
//! one episode for the analyser. Evidence of an injected cause is emitted
//! before the scan it provokes and is remembered as pending; the next scan
//! episode is labelled with the highest-precedence pending cause, which is
//! what the rule engine sees in that episode's window.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::causes::{CauseLabel, Rule};
use crate::frame::{Frame, PhyRate, Subtype, Timestamp};
use crate::policy::{EventKind, PolicyConfig, PolicyState, ScanDecision};

use super::radio::{us, Outage, Radio};
use super::scenario::{ClientSpec, InjectionKind, Mobility};
use super::TruthEpisode;

pub(crate) const GUARD_US: u64 = 1_500_000;
const PROBE_SPACING_US: u64 = 30_000;
const MAX_RETRIES: u32 = 7;
const DATA_RATES_MBPS: [f64; 4] = [24.0, 36.0, 48.0, 54.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Trigger {
    Periodic,
    Connect,
    Handover,
    Maintenance,
    /// Scans outside the policy's control.
    Uncontrolled,
}

#[derive(Debug, Clone)]
enum Action {
    Inject(InjectionKind),
    Rssi(f64),
}

/// What one client simulation produced.
#[derive(Debug, Clone, Default)]
pub(crate) struct ClientRun {
    pub frames: Vec<Frame>,
    pub truth: Vec<TruthEpisode>,
    pub outages: Vec<Outage>,
    pub preq_times: Vec<u64>,
    /// Completed (re)associations.
    pub establishments: Vec<u64>,
    /// Link loss to reassociation, for involuntary disconnections.
    pub ttc: Vec<u64>,
}

pub(crate) struct ClientSim<'r, 'a> {
    radio: &'r Radio<'a>,
    me: &'a ClientSpec,
    cfg: PolicyConfig,
    rng: ChaCha8Rng,
    queue: Vec<(u64, Action)>,
    end_us: u64,

    policy: PolicyState,
    clock: f64,
    now: u64,
    busy_until: u64,
    next_background: Option<u64>,

    ap: Option<usize>,
    home: usize,
    intent: bool,
    base_rssi: f64,
    data_rate: PhyRate,
    pending: BTreeSet<CauseLabel>,
    disconnected_at: Option<u64>,
    associated_since: Option<u64>,
    intervals: Vec<(u64, u64, usize)>,

    out: ClientRun,
}

impl<'r, 'a> ClientSim<'r, 'a> {
    pub fn new(radio: &'r Radio<'a>, index: usize) -> Self {
        let spec = radio.spec;
        let me = &spec.clients[index];
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(index as u64 + 1);

        let mut queue: Vec<(u64, Action)> = spec
            .injections
            .iter()
            .filter(|i| i.client == me.mac)
            .map(|i| (us(i.at), Action::Inject(i.kind.clone())))
            .collect();
        if let Mobility::RssiTrajectory { points } = &me.mobility {
            queue.extend(points.iter().map(|p| (us(p.at), Action::Rssi(p.dbm))));
        }
        queue.sort_by_key(|(t, _)| *t);

        let cfg = PolicyConfig::default();
        let data_rate = PhyRate::from_mbps(DATA_RATES_MBPS[rng.gen_range(0..DATA_RATES_MBPS.len())]);
        let home = me.associated_with.and_then(|b| spec.ap_index(b)).unwrap_or(0);
        ClientSim {
            radio,
            me,
            cfg,
            rng,
            queue,
            end_us: us(spec.duration),
            policy: PolicyState::new(0.0, &cfg),
            clock: 0.0,
            now: 0,
            busy_until: 0,
            next_background: None,
            ap: None,
            home,
            intent: false,
            base_rssi: me.rssi_dbm,
            data_rate,
            pending: BTreeSet::new(),
            disconnected_at: None,
            associated_since: None,
            intervals: Vec::new(),
            out: ClientRun::default(),
        }
    }

    pub fn run(mut self) -> ClientRun {
        if self.me.associated_with.is_some() {
            self.start_associated();
        }
        let mut next_action = 0;
        loop {
            let queued = self.queue.get(next_action).map(|(t, _)| *t);
            let tick = self.tick_time();
            let background = self.ap.and(self.next_background);
            let mut best: Option<(u64, u8)> = None;
            for (candidate, tag) in [(queued, 0u8), (tick, 1), (background, 2)] {
                if let Some(c) = candidate {
                    if best.is_none_or(|(b, _)| c < b) {
                        best = Some((c, tag));
                    }
                }
            }
            let Some((due, tag)) = best else { break };
            let t = due.max(self.busy_until).max(self.now);
            if t > self.end_us {
                break;
            }
            self.now = t;
            match tag {
                0 => {
                    let action = self.queue[next_action].1.clone();
                    next_action += 1;
                    self.handle(t, action);
                }
                1 => {
                    let d = self.feed(t, EventKind::TimerTick);
                    self.act(t, d, Trigger::Periodic);
                }
                _ => {
                    let interval = us(self.radio.spec.background_scan_s.unwrap_or(f64::INFINITY));
                    self.next_background = Some(t.saturating_add(interval));
                    self.active_scan(t, Trigger::Uncontrolled);
                }
            }
        }
        if let (Some(ap), Some(since)) = (self.ap, self.associated_since) {
            self.intervals.push((since, self.end_us, ap));
        }
        self.emit_traffic();
        self.out
    }

    fn tick_time(&self) -> Option<u64> {
        let next = self.policy.next_periodic_at?;
        let mut t = (next * 1e6).ceil() as u64;
        while (t as f64 / 1e6) < next {
            t += 1;
        }
        Some(t)
    }

    fn feed(&mut self, t: u64, kind: EventKind) -> ScanDecision {
        let at = (t as f64 / 1e6).max(self.clock);
        self.clock = at;
        let event = crate::policy::PolicyEvent::new(at, kind);
        let (state, decision) =
            self.me.policy.decide(&self.cfg, self.policy, event).expect("events are fed in time order");
        self.policy = state;
        decision
    }

    fn act(&mut self, t: u64, decision: ScanDecision, trigger: Trigger) {
        if decision == ScanDecision::ActiveScan {
            self.active_scan(t, trigger);
        }
    }

    fn jitter(&mut self, max_us: u64) -> u64 {
        self.rng.gen_range(0..=max_us)
    }

    fn rssi_i8(dbm: f64) -> i8 {
        dbm.round().clamp(-127.0, -1.0) as i8
    }

    fn my_rssi(&self) -> Option<i8> {
        Some(Self::rssi_i8(self.base_rssi))
    }

    // ---- scans -------------------------------------------------------------

    fn resolve(&self) -> CauseLabel {
        let associated = self.ap.is_some();
        Rule::DEFAULT_ORDER
            .iter()
            .map(|r| r.label())
            .find(|l| self.pending.contains(l) && (associated || !l.requires_association()))
            .unwrap_or(CauseLabel::periodic(associated))
    }

    fn emit_probe_round(&mut self, t: u64, channel: u8, ssid: &str) {
        let mac = self.me.mac;
        let mut preq = self.radio.probe_request(t, mac, channel, ssid);
        preq.rssi = self.my_rssi();
        self.out.frames.push(preq);
        self.out.preq_times.push(t);
        let responders: Vec<usize> = self.radio.aps_on(channel).collect();
        for (j, ap) in responders.into_iter().enumerate() {
            let at = t + 1_500 + 1_200 * j as u64 + self.jitter(300);
            self.out.frames.push(self.radio.probe_response(at, ap, mac));
        }
    }

    /// Emits one scanning episode starting at `t` and returns its last
    /// probe time.
    fn emit_scan(&mut self, t: u64) -> u64 {
        let channels = self.radio.channels.clone();
        let directed = self.radio.ap(self.home).ssid.clone();
        let mut at = t;
        let mut last = t;
        for ssid in ["", directed.as_str()] {
            for &ch in &channels {
                self.emit_probe_round(at, ch, ssid);
                last = at;
                at += PROBE_SPACING_US + self.jitter(5_000);
            }
        }
        self.record_episode(t, last);
        last
    }

    fn record_episode(&mut self, start: u64, end: u64) {
        let cause = self.resolve();
        self.pending.clear();
        self.out.truth.push(TruthEpisode {
            client: self.me.mac,
            start: Timestamp(start),
            end: Timestamp(end),
            cause,
        });
        self.busy_until = end + GUARD_US;
        self.now = self.now.max(end);
    }

    fn active_scan(&mut self, t: u64, trigger: Trigger) {
        if t > self.end_us {
            return;
        }
        let end = self.emit_scan(t);
        let follow = end + 50_000;
        match self.ap {
            None if self.intent => self.handshake(follow, self.home),
            Some(_) if matches!(trigger, Trigger::Handover | Trigger::Maintenance) => self.roam(follow),
            _ => {}
        }
    }

    // ---- association -------------------------------------------------------

    fn start_associated(&mut self) {
        let t = 200_000 + self.jitter(100_000);
        let ap = self.home;
        let mac = self.me.mac;
        let mut up = self.radio.data(t, Subtype::QosData, ap, mac, true, self.data_rate, 64);
        up.rssi = self.my_rssi();
        let ack = self.radio.ack_for(&up, ap, Some(self.radio.ap_rssi(ap)));
        let down_t = ack.timestamp.as_micros() + 2_000;
        let down = self.radio.data(down_t, Subtype::QosData, ap, mac, false, self.data_rate, 64);
        let ack2 = self.radio.ack_for(&down, ap, self.my_rssi());
        self.out.frames.extend([up, ack, down, ack2]);
        self.intent = true;
        self.link_up(down_t, ap, false);
    }

    fn link_up(&mut self, t: u64, ap: usize, establishment: bool) {
        self.ap = Some(ap);
        self.associated_since = Some(t);
        if establishment {
            self.pending.insert(CauseLabel::ConnectionEstablishment);
            self.out.establishments.push(t);
            if let Some(lost) = self.disconnected_at.take() {
                self.out.ttc.push(t - lost);
            }
        }
        self.feed(t, EventKind::AssociationChange { associated: true });
        let rssi = self.base_rssi;
        self.feed(t, EventKind::RssiSample { dbm: rssi });
        self.next_background = self.radio.spec.background_scan_s.map(|b| t + us(b));
    }

    fn link_down(&mut self, t: u64) {
        if let (Some(ap), Some(since)) = (self.ap.take(), self.associated_since.take()) {
            self.intervals.push((since, t, ap));
        }
        self.next_background = None;
        self.feed(t, EventKind::AssociationChange { associated: false });
    }

    /// Authentication and association with `ap`, then the scan a freshly
    /// connected client runs.
    fn handshake(&mut self, t: u64, ap: usize) {
        let mac = self.me.mac;
        let steps = [
            (Subtype::Authentication, true),
            (Subtype::Authentication, false),
            (Subtype::AssociationRequest, true),
            (Subtype::AssociationResponse, false),
        ];
        let mut at = t;
        for (st, uplink) in steps {
            let mut f = self.radio.mgmt(at, st, ap, mac, uplink);
            if uplink {
                f.rssi = self.my_rssi();
            }
            self.out.frames.push(f);
            at += 2_000;
        }
        let done = at - 2_000;
        self.link_up(done, ap, true);
        self.after_establishment(done);
    }

    fn roam(&mut self, t: u64) {
        let Some(cur) = self.ap else { return };
        let n = self.radio.spec.aps.len();
        if n < 2 {
            return;
        }
        let target = (cur + 1) % n;
        let mac = self.me.mac;
        let mut req = self.radio.mgmt(t, Subtype::ReassociationRequest, target, mac, true);
        req.rssi = self.my_rssi();
        let resp = self.radio.mgmt(t + 2_000, Subtype::ReassociationResponse, target, mac, false);
        self.out.frames.extend([req, resp]);
        self.link_down(t + 2_000);
        self.link_up(t + 2_000, target, true);
        self.after_establishment(t + 2_000);
    }

    fn after_establishment(&mut self, t: u64) {
        self.now = self.now.max(t);
        self.active_scan(t + GUARD_US, Trigger::Uncontrolled);
    }

    // ---- injections --------------------------------------------------------

    fn handle(&mut self, t: u64, action: Action) {
        match action {
            Action::Rssi(dbm) => {
                self.base_rssi = dbm;
                let d = self.feed(t, EventKind::RssiSample { dbm });
                self.act(t, d, Trigger::Handover);
            }
            Action::Inject(kind) => self.inject(t, kind),
        }
    }

    fn inject(&mut self, t: u64, kind: InjectionKind) {
        match kind {
            InjectionKind::Connect { ap } => {
                self.intent = true;
                if let Some(i) = ap.and_then(|b| self.radio.spec.ap_index(b)) {
                    self.home = i;
                }
                if self.ap.is_none() {
                    let d = self.feed(t, EventKind::ConnectRequest);
                    self.act(t, d, Trigger::Connect);
                }
            }
            InjectionKind::Disconnect => {
                self.intent = false;
                self.disconnected_at = None;
                if let Some(ap) = self.ap {
                    let mut f = self.radio.mgmt(t, Subtype::Disassociation, ap, self.me.mac, true);
                    f.rssi = self.my_rssi();
                    self.out.frames.push(f);
                    self.link_down(t);
                }
            }
            InjectionKind::Deauth => {
                let Some(ap) = self.ap else { return };
                let f = self.radio.mgmt(t, Subtype::Deauthentication, ap, self.me.mac, false);
                self.out.frames.push(f);
                self.pending.insert(CauseLabel::ApSideProcedures);
                self.link_down(t);
                if self.intent {
                    self.disconnected_at = Some(t);
                    if self.me.policy.immediate_reconnect() {
                        let at = t + 100_000;
                        let d = self.feed(at, EventKind::ConnectRequest);
                        self.act(at, d, Trigger::Connect);
                    }
                }
            }
            InjectionKind::RssiDrop { target_dbm, slope_db_per_s } => {
                let Some(ap) = self.ap else { return };
                let ramp = (self.base_rssi - target_dbm).abs() / slope_db_per_s;
                let span = us(ramp + ramp.max(3.0));
                let mut k = 0u64;
                let end = t + span;
                let mut at = t;
                while at < end {
                    let swing = if k.is_multiple_of(2) { 16.0 } else { -16.0 };
                    let payload = self.rng.gen_range(200..=1400);
                    let mut f = self.radio.data(at, Subtype::QosData, ap, self.me.mac, true, self.data_rate, payload);
                    f.rssi = Some(Self::rssi_i8(target_dbm + swing));
                    let ack = self.radio.ack_for(&f, ap, Some(self.radio.ap_rssi(ap)));
                    self.out.frames.extend([f, ack]);
                    k += 1;
                    at += 100_000;
                }
                self.pending.insert(CauseLabel::LowRssi);
                let te = end;
                self.now = te;
                let handover = self.feed(te, EventKind::RssiSample { dbm: target_dbm });
                let maint = self.feed(te, EventKind::MaintenanceCause { cause: CauseLabel::LowRssi });
                let trigger =
                    if handover == ScanDecision::ActiveScan { Trigger::Handover } else { Trigger::Maintenance };
                self.act(te, handover.max(maint), trigger);
                let base = self.base_rssi;
                let now = self.now;
                self.feed(now, EventKind::RssiSample { dbm: base });
            }
            InjectionKind::BeaconOutage { duration } => {
                let Some(ap) = self.ap else { return };
                let end = t + us(duration);
                self.out.outages.push(Outage { ap, start: t, end });
                let mut at = t + 200_000;
                while at < end {
                    let mut f = self.radio.data(at, Subtype::NullData, ap, self.me.mac, true, self.data_rate, 0);
                    f.rssi = self.my_rssi();
                    self.out.frames.push(f);
                    at += 400_000;
                }
                self.pending.insert(CauseLabel::LossOfBeacons);
                self.now = end;
                let d = self.feed(end, EventKind::MaintenanceCause { cause: CauseLabel::LossOfBeacons });
                self.act(end, d, Trigger::Maintenance);
            }
            InjectionKind::FrameLossBurst { fraction, duration } => {
                let Some(ap) = self.ap else { return };
                let end = t + us(duration);
                let mut at = t;
                let mut k = 0u64;
                let mut retry = false;
                while at < end {
                    // Evenly spread losses: attempt k fails when the running
                    // loss count steps up.
                    let lost = ((k + 1) as f64 * fraction).floor() > (k as f64 * fraction).floor();
                    let payload = self.rng.gen_range(200..=1400);
                    let mut f = self.radio.data(at, Subtype::QosData, ap, self.me.mac, true, self.data_rate, payload);
                    f.rssi = self.my_rssi();
                    f.retry = retry;
                    if !lost {
                        let ack = self.radio.ack_for(&f, ap, Some(self.radio.ap_rssi(ap)));
                        self.out.frames.push(f);
                        self.out.frames.push(ack);
                    } else {
                        self.out.frames.push(f);
                    }
                    retry = lost;
                    k += 1;
                    at += 50_000;
                }
                self.pending.insert(CauseLabel::DataFrameLosses);
                self.now = end;
                let d = self.feed(end, EventKind::MaintenanceCause { cause: CauseLabel::DataFrameLosses });
                self.act(end, d, Trigger::Maintenance);
            }
            InjectionKind::PowerWake => {
                let Some(ap) = self.ap else { return };
                let end = t + 2_000_000;
                let mut at = t;
                while at < end {
                    let payload = self.rng.gen_range(200..=1400);
                    let mut f = self.radio.data(at, Subtype::QosData, ap, self.me.mac, true, self.data_rate, payload);
                    f.rssi = self.my_rssi();
                    let ack = self.radio.ack_for(&f, ap, Some(self.radio.ap_rssi(ap)));
                    self.out.frames.extend([f, ack]);
                    at += 100_000;
                }
                self.pending.insert(CauseLabel::PowerStateLowToHigh);
                self.now = end;
                self.active_scan(end, Trigger::Uncontrolled);
            }
            InjectionKind::ProbeFlood { rate, duration } => {
                let step = (1e6 / rate).max(1.0);
                let count = (duration * rate).floor() as u64;
                let channels = self.radio.channels.clone();
                let mut last = t;
                for k in 0..count {
                    let at = t + (k as f64 * step).round() as u64;
                    let ch = channels[k as usize % channels.len()];
                    self.emit_probe_round(at, ch, "");
                    last = at;
                }
                if count > 0 {
                    self.record_episode(t, last);
                }
            }
        }
    }

    // ---- steady traffic ----------------------------------------------------

    fn emit_traffic(&mut self) {
        let Some(traffic) = self.me.traffic else { return };
        let period = us(1.0 / traffic.fps).max(1);
        let rate = PhyRate::from_mbps(traffic.phy_rate);
        let intervals = std::mem::take(&mut self.intervals);
        for (start, end, ap) in intervals {
            let mut at = start + 100_000;
            let mut retries = 0u32;
            while at < end {
                let p = self.radio.contention(at);
                let lost = p > 0.0 && self.rng.gen_bool(p);
                let mut f =
                    self.radio.data(at, Subtype::QosData, ap, self.me.mac, true, rate, traffic.payload_bytes);
                f.rssi = self.my_rssi();
                f.retry = retries > 0;
                if lost {
                    self.out.frames.push(f);
                    retries = if retries >= MAX_RETRIES { 0 } else { retries + 1 };
                } else {
                    let ack = self.radio.ack_for(&f, ap, Some(self.radio.ap_rssi(ap)));
                    self.out.frames.push(f);
                    self.out.frames.push(ack);
                    retries = 0;
                }
                at += period;
            }
        }
    }
}
