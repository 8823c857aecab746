//! Typed view of one captured 802.11 frame.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// 48-bit IEEE MAC address.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MacAddr(pub [u8; 6]);

impl MacAddr {
    pub const BROADCAST: MacAddr = MacAddr([0xff; 6]);

    pub fn is_broadcast(&self) -> bool {
        *self == Self::BROADCAST
    }

    /// Group bit set (broadcast or multicast).
    pub fn is_group(&self) -> bool {
        self.0[0] & 0x01 != 0
    }

    pub fn is_unicast(&self) -> bool {
        !self.is_group()
    }

    pub fn from_slice(b: &[u8]) -> MacAddr {
        let mut out = [0u8; 6];
        out.copy_from_slice(&b[..6]);
        MacAddr(out)
    }
}

impl fmt::Display for MacAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.0;
        write!(
            f,
            "{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}",
            b[0], b[1], b[2], b[3], b[4], b[5]
        )
    }
}

impl fmt::Debug for MacAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid MAC address: {0:?}")]
pub struct ParseMacError(String);

impl FromStr for MacAddr {
    type Err = ParseMacError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = [0u8; 6];
        let mut parts = s.split([':', '-']);
        for byte in out.iter_mut() {
            let part = parts.next().ok_or_else(|| ParseMacError(s.to_owned()))?;
            if part.len() != 2 {
                return Err(ParseMacError(s.to_owned()));
            }
            *byte = u8::from_str_radix(part, 16).map_err(|_| ParseMacError(s.to_owned()))?;
        }
        if parts.next().is_some() {
            return Err(ParseMacError(s.to_owned()));
        }
        Ok(MacAddr(out))
    }
}

impl Serialize for MacAddr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MacAddr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Microseconds since capture start.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Debug, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub const ZERO: Timestamp = Timestamp(0);

    pub fn from_micros(us: u64) -> Self {
        Timestamp(us)
    }

    /// Rounds to the nearest microsecond; negative inputs clamp to zero.
    pub fn from_secs_f64(secs: f64) -> Self {
        Timestamp((secs * 1e6).round().max(0.0) as u64)
    }

    pub fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e6
    }

    pub fn saturating_sub(self, other: Timestamp) -> u64 {
        self.0.saturating_sub(other.0)
    }

    pub fn add_micros(self, us: u64) -> Timestamp {
        Timestamp(self.0 + us)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:06}", self.0 / 1_000_000, self.0 % 1_000_000)
    }
}

/// PHY data rate in kbit/s, so 5.5 Mbps is exactly representable.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct PhyRate(pub u32);

impl PhyRate {
    pub fn from_kbps(kbps: u32) -> Self {
        PhyRate(kbps)
    }

    pub fn from_mbps(mbps: f64) -> Self {
        PhyRate((mbps * 1000.0).round() as u32)
    }

    pub fn kbps(self) -> u32 {
        self.0
    }

    pub fn mbps(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    /// DSSS/CCK rates of 802.11b.
    pub fn is_dsss(self) -> bool {
        matches!(self.0, 1000 | 2000 | 5500 | 11000)
    }
}

impl fmt::Display for PhyRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(1000) {
            write!(f, "{}", self.0 / 1000)
        } else {
            write!(f, "{}", self.mbps())
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameKind {
    Management,
    Control,
    Data,
}

impl FrameKind {
    pub fn type_bits(self) -> u8 {
        match self {
            FrameKind::Management => 0,
            FrameKind::Control => 1,
            FrameKind::Data => 2,
        }
    }
}

/// MAC frame subtype. Subtypes no rule consumes are kept as `Other*` with
/// their raw 4-bit code so they survive a write/read cycle.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subtype {
    AssociationRequest,
    AssociationResponse,
    ReassociationRequest,
    ReassociationResponse,
    ProbeRequest,
    ProbeResponse,
    Beacon,
    Disassociation,
    Authentication,
    Deauthentication,
    OtherManagement(u8),
    Ack,
    OtherControl(u8),
    Data,
    NullData,
    QosData,
    QosNull,
    OtherData(u8),
}

impl Subtype {
    pub fn kind(self) -> FrameKind {
        use Subtype::*;
        match self {
            AssociationRequest | AssociationResponse | ReassociationRequest
            | ReassociationResponse | ProbeRequest | ProbeResponse | Beacon | Disassociation
            | Authentication | Deauthentication | OtherManagement(_) => FrameKind::Management,
            Ack | OtherControl(_) => FrameKind::Control,
            Data | NullData | QosData | QosNull | OtherData(_) => FrameKind::Data,
        }
    }

    pub fn from_bits(kind: FrameKind, code: u8) -> Subtype {
        use Subtype::*;
        let code = code & 0x0f;
        match (kind, code) {
            (FrameKind::Management, 0) => AssociationRequest,
            (FrameKind::Management, 1) => AssociationResponse,
            (FrameKind::Management, 2) => ReassociationRequest,
            (FrameKind::Management, 3) => ReassociationResponse,
            (FrameKind::Management, 4) => ProbeRequest,
            (FrameKind::Management, 5) => ProbeResponse,
            (FrameKind::Management, 8) => Beacon,
            (FrameKind::Management, 10) => Disassociation,
            (FrameKind::Management, 11) => Authentication,
            (FrameKind::Management, 12) => Deauthentication,
            (FrameKind::Management, c) => OtherManagement(c),
            (FrameKind::Control, 13) => Ack,
            (FrameKind::Control, c) => OtherControl(c),
            (FrameKind::Data, 0) => Data,
            (FrameKind::Data, 4) => NullData,
            (FrameKind::Data, 8) => QosData,
            (FrameKind::Data, 12) => QosNull,
            (FrameKind::Data, c) => OtherData(c),
        }
    }

    pub fn code(self) -> u8 {
        use Subtype::*;
        match self {
            AssociationRequest => 0,
            AssociationResponse => 1,
            ReassociationRequest => 2,
            ReassociationResponse => 3,
            ProbeRequest => 4,
            ProbeResponse => 5,
            Beacon => 8,
            Disassociation => 10,
            Authentication => 11,
            Deauthentication => 12,
            Ack => 13,
            Data => 0,
            NullData => 4,
            QosData => 8,
            QosNull => 12,
            OtherManagement(c) | OtherControl(c) | OtherData(c) => c & 0x0f,
        }
    }

    pub fn is_probe(self) -> bool {
        matches!(self, Subtype::ProbeRequest | Subtype::ProbeResponse)
    }

    /// Frames carrying MSDU payload (not null-function frames).
    pub fn is_payload_data(self) -> bool {
        matches!(self, Subtype::Data | Subtype::QosData)
    }

    pub fn is_null(self) -> bool {
        matches!(self, Subtype::NullData | Subtype::QosNull)
    }

    pub fn is_qos(self) -> bool {
        matches!(self, Subtype::QosData | Subtype::QosNull)
    }

    /// Authentication and (re)association handshake frames.
    pub fn is_connection_setup(self) -> bool {
        matches!(
            self,
            Subtype::Authentication
                | Subtype::AssociationRequest
                | Subtype::AssociationResponse
                | Subtype::ReassociationRequest
                | Subtype::ReassociationResponse
        )
    }

    pub fn may_carry_ssid(self) -> bool {
        matches!(
            self,
            Subtype::ProbeRequest
                | Subtype::ProbeResponse
                | Subtype::Beacon
                | Subtype::AssociationRequest
                | Subtype::ReassociationRequest
        )
    }

    pub fn has_fixed_beacon_fields(self) -> bool {
        matches!(self, Subtype::Beacon | Subtype::ProbeResponse)
    }

    pub fn carries_status(self) -> bool {
        matches!(
            self,
            Subtype::AssociationResponse | Subtype::ReassociationResponse | Subtype::Authentication
        )
    }
}

/// Contents of the QBSS Load information element.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct QbssLoad {
    pub station_count: u16,
    /// Busy fraction on a 0..=255 scale.
    pub channel_utilization: u8,
}

impl QbssLoad {
    pub fn utilization_percent(&self) -> f64 {
        self.channel_utilization as f64 / 255.0 * 100.0
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Frame {
    pub timestamp: Timestamp,
    /// dBm; `None` when the PHY header carries no signal field.
    pub rssi: Option<i8>,
    pub phy_rate: PhyRate,
    pub channel: u8,
    pub subtype: Subtype,
    /// Absent for control frames that carry only a receiver address (ACK, CTS).
    pub transmitter: Option<MacAddr>,
    pub receiver: MacAddr,
    pub bssid: Option<MacAddr>,
    pub retry: bool,
    pub power_mgmt: bool,
    /// On-air MPDU length in bytes.
    pub frame_bytes: u32,
    /// Empty string is a wildcard (null) probe.
    pub ssid: Option<String>,
    pub qbss: Option<QbssLoad>,
    /// Time units (1024 us).
    pub beacon_interval: Option<u16>,
    /// Status code of authentication and (re)association responses.
    pub status_code: Option<u16>,
}

impl Frame {
    /// A frame with every optional field empty. Callers fill in the rest.
    pub fn new(timestamp: Timestamp, subtype: Subtype, receiver: MacAddr) -> Frame {
        Frame {
            timestamp,
            rssi: None,
            phy_rate: PhyRate::from_kbps(1000),
            channel: 1,
            subtype,
            transmitter: None,
            receiver,
            bssid: None,
            retry: false,
            power_mgmt: false,
            frame_bytes: 0,
            ssid: None,
            qbss: None,
            beacon_interval: None,
            status_code: None,
        }
    }

    pub fn kind(&self) -> FrameKind {
        self.subtype.kind()
    }

    pub fn is(&self, subtype: Subtype) -> bool {
        self.subtype == subtype
    }

    pub fn station_count(&self) -> Option<u16> {
        self.qbss.map(|q| q.station_count)
    }

    pub fn channel_utilization_raw(&self) -> Option<u8> {
        self.qbss.map(|q| q.channel_utilization)
    }

    pub fn involves(&self, mac: MacAddr) -> bool {
        self.transmitter == Some(mac) || self.receiver == mac
    }

    pub fn sent_by(&self, mac: MacAddr) -> bool {
        self.transmitter == Some(mac)
    }

    /// MAC header length implied by the subtype.
    pub fn header_len(&self) -> u32 {
        crate::capture::dot11::header_len(self.subtype, false)
    }

    /// MSDU payload bytes of a data frame (frame length minus MAC header).
    pub fn payload_bytes(&self) -> u32 {
        self.frame_bytes.saturating_sub(self.header_len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mac_round_trips_through_text() {
        let m: MacAddr = "00:1a:2B:3c:4d:5e".parse().unwrap();
        assert_eq!(m.to_string(), "00:1a:2b:3c:4d:5e");
        assert!("00:1a:2b".parse::<MacAddr>().is_err());
        assert!("00:1a:2b:3c:4d:5e:66".parse::<MacAddr>().is_err());
        assert!(MacAddr::BROADCAST.is_group());
        assert!(m.is_unicast());
    }

    #[test]
    fn subtype_bits_are_consistent_with_kind() {
        for kind in [FrameKind::Management, FrameKind::Control, FrameKind::Data] {
            for code in 0..16u8 {
                let st = Subtype::from_bits(kind, code);
                assert_eq!(st.kind(), kind);
                assert_eq!(st.code(), code);
            }
        }
    }

    #[test]
    fn rate_representation() {
        assert_eq!(PhyRate::from_mbps(5.5).kbps(), 5500);
        assert!(PhyRate::from_mbps(11.0).is_dsss());
        assert!(!PhyRate::from_mbps(6.0).is_dsss());
        assert_eq!(PhyRate::from_mbps(5.5).to_string(), "5.5");
        assert_eq!(PhyRate::from_mbps(24.0).to_string(), "24");
    }

    #[test]
    fn timestamp_conversions() {
        let t = Timestamp::from_secs_f64(1.5);
        assert_eq!(t.as_micros(), 1_500_000);
        assert_eq!(t.to_string(), "1.500000");
        assert_eq!(Timestamp::from_secs_f64(-3.0), Timestamp::ZERO);
    }
}
