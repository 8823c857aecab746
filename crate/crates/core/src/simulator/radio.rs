//! Frame builders and shared radio environment for the generator.

use crate::capture::dot11::min_encoded_len;
use crate::frame::{Frame, MacAddr, PhyRate, QbssLoad, Subtype, Timestamp};
use crate::metrics::AirtimeModel;

use super::scenario::{ApSpec, InjectionKind, ScenarioSpec};

pub(crate) const SIFS_US: u64 = 16;
pub(crate) const PROBE_RATE_MBPS: f64 = 1.0;
pub(crate) const PREQ_PAD: u32 = 24;
pub(crate) const PRES_PAD: u32 = 64;
pub(crate) const BEACON_PAD: u32 = 48;

pub(crate) fn us(secs: f64) -> u64 {
    (secs * 1e6).round().max(0.0) as u64
}

/// Interval during which a probe flood degrades everyone's data delivery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Flood {
    pub start: u64,
    pub end: u64,
    pub loss: f64,
}

/// An AP's beacons are stretched while an outage is active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Outage {
    pub ap: usize,
    pub start: u64,
    pub end: u64,
}

pub(crate) const OUTAGE_BEACON_US: u64 = 250_000;

/// Read-only view of the scenario shared by every client simulation.
pub(crate) struct Radio<'a> {
    pub spec: &'a ScenarioSpec,
    pub channels: Vec<u8>,
    pub floods: Vec<Flood>,
    pub airtime: AirtimeModel,
}

impl<'a> Radio<'a> {
    pub fn new(spec: &'a ScenarioSpec) -> Self {
        let mut channels: Vec<u8> = spec.aps.iter().map(|a| a.channel).collect();
        channels.sort_unstable();
        channels.dedup();
        let mut radio = Radio { spec, channels, floods: Vec::new(), airtime: AirtimeModel::default() };
        radio.floods = radio.compute_floods();
        radio
    }

    pub fn ap(&self, i: usize) -> &ApSpec {
        &self.spec.aps[i]
    }

    pub fn ap_rssi(&self, i: usize) -> i8 {
        (-40 - 3 * (i as i32 % 10)) as i8
    }

    pub fn aps_on(&self, channel: u8) -> impl Iterator<Item = usize> + '_ {
        self.spec.aps.iter().enumerate().filter(move |(_, a)| a.channel == channel).map(|(i, _)| i)
    }

    /// Share of airtime a flood at `rate` probes per second occupies,
    /// counting every response it draws. Used as the loss probability of
    /// concurrent data attempts.
    fn compute_floods(&self) -> Vec<Flood> {
        let probe_us = |ch: u8| {
            let preq = self.probe_request(0, MacAddr([2, 0, 0, 0, 0, 0]), ch, "");
            let mut total = self.airtime.duration_us(&preq).unwrap_or(0.0);
            for ap in self.aps_on(ch) {
                let pres = self.probe_response(0, ap, MacAddr([2, 0, 0, 0, 0, 0]));
                total += self.airtime.duration_us(&pres).unwrap_or(0.0);
            }
            total
        };
        let mean_us = self.channels.iter().map(|&c| probe_us(c)).sum::<f64>() / self.channels.len() as f64;
        self.spec
            .injections
            .iter()
            .filter_map(|inj| match inj.kind {
                InjectionKind::ProbeFlood { rate, duration } => Some(Flood {
                    start: us(inj.at),
                    end: us(inj.at + duration),
                    loss: (rate * mean_us / 1e6).min(0.95),
                }),
                _ => None,
            })
            .collect()
    }

    pub fn contention(&self, t: u64) -> f64 {
        self.floods
            .iter()
            .filter(|f| (f.start..f.end).contains(&t))
            .map(|f| f.loss)
            .fold(0.0, f64::max)
    }

    fn qbss(&self, ap: usize, t: u64) -> QbssLoad {
        let a = self.ap(ap);
        let cu = (a.channel_utilization + self.contention(t)).min(1.0);
        QbssLoad { station_count: a.station_count, channel_utilization: (cu * 255.0).round() as u8 }
    }

    pub fn beacon(&self, t: u64, ap: usize) -> Frame {
        let a = self.ap(ap);
        let mut f = Frame::new(Timestamp(t), Subtype::Beacon, MacAddr::BROADCAST);
        f.transmitter = Some(a.bssid);
        f.bssid = Some(a.bssid);
        f.channel = a.channel;
        f.phy_rate = PhyRate::from_mbps(a.phy_rate);
        f.rssi = Some(self.ap_rssi(ap));
        f.ssid = Some(a.ssid.clone());
        f.qbss = Some(self.qbss(ap, t));
        f.beacon_interval = Some(a.beacon_interval_tu());
        f.frame_bytes = min_encoded_len(&f) + BEACON_PAD;
        f
    }

    pub fn probe_request(&self, t: u64, client: MacAddr, channel: u8, ssid: &str) -> Frame {
        let mut f = Frame::new(Timestamp(t), Subtype::ProbeRequest, MacAddr::BROADCAST);
        f.transmitter = Some(client);
        f.bssid = Some(MacAddr::BROADCAST);
        f.channel = channel;
        f.phy_rate = PhyRate::from_mbps(PROBE_RATE_MBPS);
        f.ssid = Some(ssid.to_owned());
        f.frame_bytes = min_encoded_len(&f) + PREQ_PAD;
        f
    }

    pub fn probe_response(&self, t: u64, ap: usize, client: MacAddr) -> Frame {
        let a = self.ap(ap);
        let mut f = Frame::new(Timestamp(t), Subtype::ProbeResponse, client);
        f.transmitter = Some(a.bssid);
        f.bssid = Some(a.bssid);
        f.channel = a.channel;
        f.phy_rate = PhyRate::from_mbps(a.phy_rate);
        f.rssi = Some(self.ap_rssi(ap));
        f.ssid = Some(a.ssid.clone());
        f.qbss = Some(self.qbss(ap, t));
        f.beacon_interval = Some(a.beacon_interval_tu());
        f.frame_bytes = min_encoded_len(&f) + PRES_PAD;
        f
    }

    /// A management frame between a client and an AP.
    pub fn mgmt(&self, t: u64, subtype: Subtype, ap: usize, client: MacAddr, uplink: bool) -> Frame {
        let a = self.ap(ap);
        let (tx, rx) = if uplink { (client, a.bssid) } else { (a.bssid, client) };
        let mut f = Frame::new(Timestamp(t), subtype, rx);
        f.transmitter = Some(tx);
        f.bssid = Some(a.bssid);
        f.channel = a.channel;
        f.phy_rate = PhyRate::from_mbps(a.phy_rate);
        if !uplink {
            f.rssi = Some(self.ap_rssi(ap));
        }
        if subtype.carries_status() {
            f.status_code = Some(0);
        }
        if matches!(subtype, Subtype::AssociationRequest | Subtype::ReassociationRequest) {
            f.ssid = Some(a.ssid.clone());
        }
        f.frame_bytes = min_encoded_len(&f) + 8;
        f
    }

    /// A data frame between a client and an AP.
    #[allow(clippy::too_many_arguments)]
    pub fn data(
        &self,
        t: u64,
        subtype: Subtype,
        ap: usize,
        client: MacAddr,
        uplink: bool,
        rate: PhyRate,
        payload: u32,
    ) -> Frame {
        let a = self.ap(ap);
        let (tx, rx) = if uplink { (client, a.bssid) } else { (a.bssid, client) };
        let mut f = Frame::new(Timestamp(t), subtype, rx);
        f.transmitter = Some(tx);
        f.bssid = Some(a.bssid);
        f.channel = a.channel;
        f.phy_rate = rate;
        if !uplink {
            f.rssi = Some(self.ap_rssi(ap));
        }
        f.frame_bytes = f.header_len() + payload;
        f
    }

    /// The ACK answering `frame`, sent a SIFS after it ends.
    pub fn ack_for(&self, frame: &Frame, ap: usize, rssi: Option<i8>) -> Frame {
        let end = frame.timestamp.as_micros()
            + self.airtime.duration_us(frame).map_or(0, |d| d.ceil() as u64)
            + SIFS_US;
        let a = self.ap(ap);
        let to = frame.transmitter.expect("data frames have a transmitter");
        let mut f = Frame::new(Timestamp(end), Subtype::Ack, to);
        f.channel = a.channel;
        f.phy_rate = PhyRate::from_mbps(a.phy_rate);
        f.rssi = rssi;
        f.frame_bytes = 10;
        f
    }
}
