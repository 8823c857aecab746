use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::frame::{MacAddr, PhyRate};
use crate::policy::PolicyKind;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
}

fn invalid(msg: impl Into<String>) -> SimError {
    SimError::InvalidSpec(msg.into())
}

/// A declarative synthetic-trace description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    /// Seconds.
    pub duration: f64,
    pub seed: u64,
    /// Probability that the sniffer misses any given frame.
    #[serde(default)]
    pub sniffer_drop: f64,
    /// Interval of scans the operating system issues on its own while a
    /// client is associated, outside the control of either scan policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background_scan_s: Option<f64>,
    pub aps: Vec<ApSpec>,
    pub clients: Vec<ClientSpec>,
    #[serde(default)]
    pub injections: Vec<Injection>,
}

fn default_beacon_interval() -> f64 {
    102.4
}

fn default_ap_rate() -> f64 {
    1.0
}

fn default_utilization() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApSpec {
    pub bssid: MacAddr,
    pub ssid: String,
    pub channel: u8,
    #[serde(default = "default_beacon_interval")]
    pub beacon_interval_ms: f64,
    /// Mbps used for beacons and probe responses.
    #[serde(default = "default_ap_rate")]
    pub phy_rate: f64,
    /// Station count announced in the QBSS Load element.
    #[serde(default)]
    pub station_count: u16,
    /// Background channel utilization in `[0, 1]`.
    #[serde(default = "default_utilization")]
    pub channel_utilization: f64,
}

impl ApSpec {
    pub fn beacon_interval_us(&self) -> u64 {
        (self.beacon_interval_ms * 1000.0).round() as u64
    }

    /// The beacon interval field in time units of 1024 µs.
    pub fn beacon_interval_tu(&self) -> u16 {
        (self.beacon_interval_ms / 1.024).round() as u16
    }
}

fn default_rssi() -> f64 {
    -55.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientSpec {
    pub mac: MacAddr,
    pub policy: PolicyKind,
    #[serde(default)]
    pub mobility: Mobility,
    /// AP the client is already associated with when the trace begins.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub associated_with: Option<MacAddr>,
    #[serde(default = "default_rssi")]
    pub rssi_dbm: f64,
    /// Steady uplink traffic while associated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traffic: Option<Traffic>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Mobility {
    #[default]
    Stationary,
    /// RSSI steps to `dbm` at each point's time.
    RssiTrajectory { points: Vec<RssiPoint> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RssiPoint {
    pub at: f64,
    pub dbm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Traffic {
    pub fps: f64,
    pub payload_bytes: u32,
    /// Mbps.
    pub phy_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    pub at: f64,
    pub client: MacAddr,
    #[serde(flatten)]
    pub kind: InjectionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InjectionKind {
    RssiDrop { target_dbm: f64, slope_db_per_s: f64 },
    BeaconOutage { duration: f64 },
    FrameLossBurst { fraction: f64, duration: f64 },
    Deauth,
    PowerWake,
    ProbeFlood { rate: f64, duration: f64 },
    Connect {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ap: Option<MacAddr>,
    },
    Disconnect,
}

fn positive(name: &str, v: f64) -> Result<(), SimError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

fn writable_rate(name: &str, mbps: f64) -> Result<(), SimError> {
    positive(name, mbps)?;
    let r = PhyRate::from_mbps(mbps);
    if !r.kbps().is_multiple_of(500) || r.kbps() / 500 > 127 {
        return Err(invalid(format!("{name} {mbps} Mbps cannot be written to a capture")));
    }
    Ok(())
}

impl ScenarioSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let spec: ScenarioSpec = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn ap_index(&self, bssid: MacAddr) -> Option<usize> {
        self.aps.iter().position(|a| a.bssid == bssid)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        positive("duration", self.duration)?;
        if !(0.0..1.0).contains(&self.sniffer_drop) {
            return Err(invalid("sniffer_drop must lie in [0, 1)"));
        }
        if let Some(bg) = self.background_scan_s {
            positive("background_scan_s", bg)?;
        }
        if self.aps.is_empty() {
            return Err(invalid("at least one AP is required"));
        }
        let mut macs = BTreeSet::new();
        for ap in &self.aps {
            if !macs.insert(ap.bssid) || !ap.bssid.is_unicast() {
                return Err(invalid(format!("BSSID {} is duplicated or not unicast", ap.bssid)));
            }
            if ap.ssid.len() > 32 {
                return Err(invalid(format!("SSID of {} exceeds 32 bytes", ap.bssid)));
            }
            if crate::capture::radiotap::channel_to_freq(ap.channel).is_none() {
                return Err(invalid(format!("channel {} of {} is unknown", ap.channel, ap.bssid)));
            }
            positive("beacon_interval_ms", ap.beacon_interval_ms)?;
            writable_rate("AP phy_rate", ap.phy_rate)?;
            if !(0.0..=1.0).contains(&ap.channel_utilization) {
                return Err(invalid("channel_utilization must lie in [0, 1]"));
            }
        }
        if self.clients.is_empty() {
            return Err(invalid("at least one client is required"));
        }
        for c in &self.clients {
            if !macs.insert(c.mac) || !c.mac.is_unicast() {
                return Err(invalid(format!("MAC {} is duplicated or not unicast", c.mac)));
            }
            if let Some(ap) = c.associated_with {
                if self.ap_index(ap).is_none() {
                    return Err(invalid(format!("client {} names unknown AP {ap}", c.mac)));
                }
            }
            if let Some(t) = &c.traffic {
                positive("traffic fps", t.fps)?;
                writable_rate("traffic phy_rate", t.phy_rate)?;
                if !(1..=2304).contains(&t.payload_bytes) {
                    return Err(invalid("traffic payload_bytes must lie in 1..=2304"));
                }
            }
            if let Mobility::RssiTrajectory { points } = &c.mobility {
                if points.windows(2).any(|w| w[1].at < w[0].at) {
                    return Err(invalid(format!("RSSI trajectory of {} is not time-ordered", c.mac)));
                }
            }
        }
        let mut last = 0.0;
        for inj in &self.injections {
            if !(0.0..=self.duration).contains(&inj.at) {
                return Err(invalid(format!("injection at {} s lies outside the scenario", inj.at)));
            }
            if inj.at < last {
                return Err(invalid("injections must be time-ordered"));
            }
            last = inj.at;
            if !self.clients.iter().any(|c| c.mac == inj.client) {
                return Err(invalid(format!("injection names unknown client {}", inj.client)));
            }
            match &inj.kind {
                InjectionKind::RssiDrop { target_dbm, slope_db_per_s } => {
                    positive("slope_db_per_s", *slope_db_per_s)?;
                    if !(-110.0..=0.0).contains(target_dbm) {
                        return Err(invalid("target_dbm must lie in [-110, 0]"));
                    }
                }
                InjectionKind::BeaconOutage { duration } => positive("outage duration", *duration)?,
                InjectionKind::FrameLossBurst { fraction, duration } => {
                    positive("loss burst duration", *duration)?;
                    if !(0.0..=1.0).contains(fraction) {
                        return Err(invalid("loss fraction must lie in [0, 1]"));
                    }
                }
                InjectionKind::ProbeFlood { rate, duration } => {
                    positive("flood rate", *rate)?;
                    positive("flood duration", *duration)?;
                }
                InjectionKind::Connect { ap: Some(ap) } if self.ap_index(*ap).is_none() => {
                    return Err(invalid(format!("connect names unknown AP {ap}")));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Comparison runs need clients under both policies.
    pub fn validate_for_comparison(&self) -> Result<(), SimError> {
        self.validate()?;
        for p in PolicyKind::BOTH {
            if !self.clients.iter().any(|c| c.policy == p) {
                return Err(invalid(format!("comparison needs at least one {} client", p.name())));
            }
        }
        Ok(())
    }
}
