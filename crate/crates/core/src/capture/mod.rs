//! Sniffer capture ingestion: pcap files with radiotap or prism PHY headers
//! become [`Frame`]s, which are then split into per-client timelines.

pub mod dot11;
pub mod pcap;
pub mod prism;
pub mod radiotap;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::frame::{Frame, MacAddr, Subtype, Timestamp};
use dot11::{DecodeError, PhyMeta};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CaptureError {
    #[error("malformed capture: {0}")]
    MalformedCapture(String),
    #[error("unsupported link type {0} (expected radiotap 127 or prism 119)")]
    UnsupportedLinkType(u32),
    #[error("capture declares link type {declared}, caller asked for {requested}")]
    LinkTypeMismatch { declared: u32, requested: u32 },
    #[error("frame at {timestamp} cannot be written: {reason}")]
    Unwritable { timestamp: Timestamp, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkType {
    Radiotap,
    Prism,
}

impl LinkType {
    pub const fn code(self) -> u32 {
        match self {
            LinkType::Radiotap => 127,
            LinkType::Prism => 119,
        }
    }

    pub fn from_code(code: u32) -> Result<LinkType, CaptureError> {
        match code {
            127 => Ok(LinkType::Radiotap),
            119 => Ok(LinkType::Prism),
            other => Err(CaptureError::UnsupportedLinkType(other)),
        }
    }
}

/// Per-file ingestion counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptureStats {
    pub records: usize,
    pub frames: usize,
    /// Records whose PHY or MAC header is cut short.
    pub skipped_truncated: usize,
    /// Records with a bad FCS, no usable data rate, or an unsupported frame type.
    pub skipped_other: usize,
    /// Set when the file ends inside a record.
    pub truncated_tail: bool,
}

impl CaptureStats {
    pub fn skipped(&self) -> usize {
        self.skipped_truncated + self.skipped_other
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCapture {
    pub link_type: LinkType,
    pub frames: Vec<Frame>,
    pub stats: CaptureStats,
}

/// Reads the link type declared in a pcap global header.
pub fn detect_link_type(raw: &[u8]) -> Result<LinkType, CaptureError> {
    let header = pcap::read_global_header(raw)
        .ok_or_else(|| CaptureError::MalformedCapture("bad pcap magic or global header".into()))?;
    LinkType::from_code(header.network)
}

/// Parses a pcap file whose link layer must be `link_type`.
///
/// Timestamps are rebased so the earliest record sits at zero. Frames are
/// returned in file order.
pub fn parse_capture(raw: &[u8], link_type: LinkType) -> Result<ParsedCapture, CaptureError> {
    let header = pcap::read_global_header(raw)
        .ok_or_else(|| CaptureError::MalformedCapture("bad pcap magic or global header".into()))?;
    let declared = LinkType::from_code(header.network)?;
    if declared != link_type {
        return Err(CaptureError::LinkTypeMismatch {
            declared: header.network,
            requested: link_type.code(),
        });
    }

    let mut records = pcap::Records::new(raw, header);
    let recs: Vec<pcap::Record<'_>> = records.by_ref().collect();
    let mut stats = CaptureStats {
        records: recs.len(),
        truncated_tail: records.truncated_tail(),
        ..Default::default()
    };
    let origin = recs.iter().map(|r| r.ts_micros).min().unwrap_or(0);

    let mut frames = Vec::with_capacity(recs.len());
    for rec in &recs {
        let ts = Timestamp(rec.ts_micros - origin);
        match decode_record(rec, ts, link_type) {
            Ok(f) => frames.push(f),
            Err(DecodeError::Truncated) => stats.skipped_truncated += 1,
            Err(DecodeError::Unsupported) => stats.skipped_other += 1,
        }
    }
    stats.frames = frames.len();
    Ok(ParsedCapture { link_type, frames, stats })
}

/// Parses a pcap file using whichever supported link type it declares.
pub fn parse_capture_auto(raw: &[u8]) -> Result<ParsedCapture, CaptureError> {
    parse_capture(raw, detect_link_type(raw)?)
}

fn decode_record(
    rec: &pcap::Record<'_>,
    timestamp: Timestamp,
    link_type: LinkType,
) -> Result<Frame, DecodeError> {
    let (phy, hdr_len) = match link_type {
        LinkType::Radiotap => {
            let rt = radiotap::parse(rec.data).map_err(|e| match e {
                radiotap::RadiotapError::Truncated => DecodeError::Truncated,
                radiotap::RadiotapError::BadVersion => DecodeError::Unsupported,
            })?;
            if rt.bad_fcs() {
                return Err(DecodeError::Unsupported);
            }
            let rate = rt.rate.ok_or(DecodeError::Unsupported)?;
            let channel = rt.freq_mhz.and_then(radiotap::freq_to_channel).unwrap_or(0);
            let phy = PhyMeta {
                timestamp,
                rssi: rt.dbm_signal,
                rate,
                channel,
                fcs_len: rt.fcs_len(),
            };
            (phy, rt.header_len)
        }
        LinkType::Prism => {
            let p = prism::parse(rec.data).ok_or(DecodeError::Truncated)?;
            let phy = PhyMeta {
                timestamp,
                rssi: p.dbm_signal,
                rate: p.rate.ok_or(DecodeError::Unsupported)?,
                channel: p.channel.unwrap_or(0),
                fcs_len: 0,
            };
            (phy, p.header_len)
        }
    };
    let orig_mpdu = (rec.orig_len as usize).saturating_sub(hdr_len);
    dot11::decode(&rec.data[hdr_len..], orig_mpdu, phy)
}

/// Serializes frames as a radiotap pcap. Every frame must carry a data rate
/// that fits the radiotap Rate field and a `frame_bytes` large enough for
/// its fields.
pub fn encode_capture(frames: &[Frame]) -> Result<Vec<u8>, CaptureError> {
    let mut out = Vec::with_capacity(pcap::GLOBAL_HEADER_LEN + frames.len() * 140);
    pcap::write_global_header(&mut out, LinkType::Radiotap.code());
    let mut record = Vec::with_capacity(2048);
    for f in frames {
        let unwritable = |reason: String| CaptureError::Unwritable { timestamp: f.timestamp, reason };
        record.clear();
        radiotap::write(&mut record, f.timestamp.as_micros(), f.phy_rate, f.channel, f.rssi)
            .map_err(|e| unwritable(e.to_string()))?;
        record.extend(dot11::encode(f).map_err(|e| unwritable(e.to_string()))?);
        pcap::write_record(&mut out, f.timestamp.as_micros(), &record);
    }
    Ok(out)
}

/// One client's frames, in timestamp order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientTimeline {
    pub client: MacAddr,
    pub frames: Vec<Frame>,
}

impl ClientTimeline {
    pub fn new(client: MacAddr) -> Self {
        ClientTimeline { client, frames: Vec::new() }
    }

    pub fn probe_requests(&self) -> impl Iterator<Item = &Frame> {
        self.frames.iter().filter(|f| f.is(Subtype::ProbeRequest) && f.sent_by(self.client))
    }
}

/// MACs that behave like access points: they transmit beacons or probe
/// responses, or transmit frames whose BSSID is their own address.
pub fn access_points(frames: &[Frame]) -> HashSet<MacAddr> {
    frames
        .iter()
        .filter_map(|f| {
            let tx = f.transmitter?;
            let ap_like = matches!(f.subtype, Subtype::Beacon | Subtype::ProbeResponse)
                || f.bssid == Some(tx);
            ap_like.then_some(tx)
        })
        .collect()
}

/// Splits a capture into per-client timelines.
///
/// A frame goes to its transmitter's timeline when the transmitter is a
/// unicast non-AP address. Frames sent by an AP (or without a transmitter,
/// such as ACKs) go to the timeline of the unicast non-AP receiver they are
/// addressed to.
pub fn client_streams(frames: &[Frame]) -> BTreeMap<MacAddr, ClientTimeline> {
    let aps = access_points(frames);
    let is_client = |m: MacAddr| m.is_unicast() && !aps.contains(&m);
    let mut out: BTreeMap<MacAddr, ClientTimeline> = BTreeMap::new();
    for f in frames {
        let owner = match f.transmitter {
            Some(tx) if is_client(tx) => Some(tx),
            Some(tx) if aps.contains(&tx) && is_client(f.receiver) => Some(f.receiver),
            None if is_client(f.receiver) => Some(f.receiver),
            _ => None,
        };
        if let Some(mac) = owner {
            out.entry(mac).or_insert_with(|| ClientTimeline::new(mac)).frames.push(f.clone());
        }
    }
    out
}

/// Beacon arrival times per BSSID, sorted.
#[derive(Debug, Clone, Default)]
pub struct BeaconIndex {
    by_bssid: BTreeMap<MacAddr, Vec<Timestamp>>,
}

impl BeaconIndex {
    pub fn build(frames: &[Frame]) -> Self {
        let mut by_bssid: BTreeMap<MacAddr, Vec<Timestamp>> = BTreeMap::new();
        for f in frames.iter().filter(|f| f.is(Subtype::Beacon)) {
            if let Some(b) = f.bssid.or(f.transmitter) {
                by_bssid.entry(b).or_default().push(f.timestamp);
            }
        }
        for v in by_bssid.values_mut() {
            v.sort_unstable();
        }
        BeaconIndex { by_bssid }
    }

    /// Beacons of `bssid` with `from <= t < to`.
    pub fn between(&self, bssid: MacAddr, from: Timestamp, to: Timestamp) -> &[Timestamp] {
        let Some(v) = self.by_bssid.get(&bssid) else {
            return &[];
        };
        let lo = v.partition_point(|&t| t < from);
        let hi = v.partition_point(|&t| t < to);
        &v[lo..hi.max(lo)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{PhyRate, QbssLoad};

    fn mac(n: u8) -> MacAddr {
        MacAddr([2, 0, 0, 0, 0, n])
    }

    fn beacon(t: u64, ap: MacAddr) -> Frame {
        let mut f = Frame::new(Timestamp(t), Subtype::Beacon, MacAddr::BROADCAST);
        f.transmitter = Some(ap);
        f.bssid = Some(ap);
        f.ssid = Some("net".into());
        f.beacon_interval = Some(100);
        f.qbss = Some(QbssLoad { station_count: 1, channel_utilization: 10 });
        f.rssi = Some(-40);
        f.channel = 6;
        f.frame_bytes = 120;
        f
    }

    fn preq(t: u64, sta: MacAddr) -> Frame {
        let mut f = Frame::new(Timestamp(t), Subtype::ProbeRequest, MacAddr::BROADCAST);
        f.transmitter = Some(sta);
        f.bssid = Some(MacAddr::BROADCAST);
        f.ssid = Some(String::new());
        f.channel = 6;
        f.frame_bytes = 60;
        f
    }

    fn presp(t: u64, ap: MacAddr, sta: MacAddr) -> Frame {
        let mut f = beacon(t, ap);
        f.subtype = Subtype::ProbeResponse;
        f.receiver = sta;
        f
    }

    #[test]
    fn single_beacon_capture() {
        let bytes = encode_capture(&[beacon(0, mac(1))]).unwrap();
        let parsed = parse_capture(&bytes, LinkType::Radiotap).unwrap();
        assert_eq!(parsed.frames.len(), 1);
        assert_eq!(parsed.frames[0].kind(), crate::frame::FrameKind::Management);
        assert_eq!(parsed.frames[0].subtype, Subtype::Beacon);
    }

    #[test]
    fn record_shorter_than_mac_header_is_skipped() {
        let mut bytes = Vec::new();
        pcap::write_global_header(&mut bytes, 127);
        let mut rec = Vec::new();
        radiotap::write(&mut rec, 0, PhyRate::from_mbps(1.0), 1, Some(-50)).unwrap();
        rec.extend_from_slice(&[0x80, 0x00, 0, 0, 0xff, 0xff, 0xff]);
        pcap::write_record(&mut bytes, 0, &rec);
        let parsed = parse_capture(&bytes, LinkType::Radiotap).unwrap();
        assert!(parsed.frames.is_empty());
        assert_eq!(parsed.stats.skipped(), 1);
        assert_eq!(parsed.stats.skipped_truncated, 1);
    }

    #[test]
    fn bad_magic_and_link_type_errors() {
        assert!(matches!(
            parse_capture(&[0u8; 40], LinkType::Radiotap),
            Err(CaptureError::MalformedCapture(_))
        ));
        let mut bytes = Vec::new();
        pcap::write_global_header(&mut bytes, 1);
        assert_eq!(
            parse_capture(&bytes, LinkType::Radiotap),
            Err(CaptureError::UnsupportedLinkType(1))
        );
        let mut bytes = Vec::new();
        pcap::write_global_header(&mut bytes, 127);
        assert!(matches!(
            parse_capture(&bytes, LinkType::Prism),
            Err(CaptureError::LinkTypeMismatch { .. })
        ));
    }

    #[test]
    fn prism_records_decode() {
        let ap = mac(1);
        let f = beacon(0, ap);
        let mut bytes = Vec::new();
        pcap::write_global_header(&mut bytes, 119);
        for (i, t) in [2_000_000u64, 2_500_000].iter().enumerate() {
            let mut rec = Vec::new();
            prism::write(&mut rec, i as u32, 6, Some(-70), PhyRate::from_mbps(1.0));
            rec.extend(dot11::encode(&f).unwrap());
            pcap::write_record(&mut bytes, *t, &rec);
        }
        let parsed = parse_capture_auto(&bytes).unwrap();
        assert_eq!(parsed.link_type, LinkType::Prism);
        assert_eq!(parsed.frames.len(), 2);
        assert_eq!(parsed.frames[0].timestamp, Timestamp(0));
        assert_eq!(parsed.frames[1].timestamp, Timestamp(500_000));
        assert_eq!(parsed.frames[1].rssi, Some(-70));
        assert_eq!(parsed.frames[1].channel, 6);
    }

    #[test]
    fn streams_follow_addressed_frame_rule() {
        let ap = mac(1);
        let (x, y) = (mac(10), mac(11));
        let frames = vec![
            beacon(0, ap),
            preq(10, x),
            preq(20, y),
            presp(30, ap, x),
            preq(40, x),
        ];
        let streams = client_streams(&frames);
        assert_eq!(streams.len(), 2);
        let xs: Vec<u64> = streams[&x].frames.iter().map(|f| f.timestamp.0).collect();
        assert_eq!(xs, vec![10, 30, 40]);
        assert_eq!(streams[&y].frames.len(), 1);
        assert!(client_streams(&[]).is_empty());
    }

    #[test]
    fn beacon_index_range() {
        let ap = mac(1);
        let frames: Vec<Frame> = (0..10).map(|i| beacon(i * 100, ap)).collect();
        let idx = BeaconIndex::build(&frames);
        assert_eq!(idx.between(ap, Timestamp(150), Timestamp(450)).len(), 3);
        assert!(idx.between(mac(9), Timestamp(0), Timestamp(1000)).is_empty());
    }
}
