//! Network-wide measurements: traffic rates, frame size and rate mixes,
//! inter-frame arrival times, airtime and channel utilization, goodput and
//! redundant probe traffic.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::causes::rules::acked;
use crate::frame::{Frame, FrameKind, MacAddr, PhyRate, Subtype, Timestamp};
use crate::segmentation::ScanEpisode;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("bin width must be positive, got {0}")]
    NonPositiveBin(f64),
    #[error("no frames of class {0:?}")]
    EmptyClass(FrameClass),
    #[error("need at least two frames of class {0:?}")]
    TooFewFrames(FrameClass),
    #[error("airtime model has no entry for {0} Mbps")]
    UnknownRate(PhyRate),
    #[error("no beacon carries a QBSS Load element")]
    MissingQbss,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameClass {
    All,
    Management,
    Control,
    Data,
    /// Probe requests and probe responses.
    Probe,
    ProbeRequest,
    ProbeResponse,
    Beacon,
    /// Anything that is neither data nor probe traffic.
    Other,
}

impl FrameClass {
    pub fn contains(self, f: &Frame) -> bool {
        match self {
            FrameClass::All => true,
            FrameClass::Management => f.kind() == FrameKind::Management,
            FrameClass::Control => f.kind() == FrameKind::Control,
            FrameClass::Data => f.kind() == FrameKind::Data,
            FrameClass::Probe => f.subtype.is_probe(),
            FrameClass::ProbeRequest => f.is(Subtype::ProbeRequest),
            FrameClass::ProbeResponse => f.is(Subtype::ProbeResponse),
            FrameClass::Beacon => f.is(Subtype::Beacon),
            FrameClass::Other => f.kind() != FrameKind::Data && !f.subtype.is_probe(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FrameClass::All => "all",
            FrameClass::Management => "management",
            FrameClass::Control => "control",
            FrameClass::Data => "data",
            FrameClass::Probe => "probe",
            FrameClass::ProbeRequest => "probe-request",
            FrameClass::ProbeResponse => "probe-response",
            FrameClass::Beacon => "beacon",
            FrameClass::Other => "other",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    /// Seconds since capture start.
    pub start: f64,
    pub value: f64,
}

/// Contiguous fixed-width bins starting at capture start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub metric: String,
    pub bin_width: f64,
    pub bins: Vec<Bin>,
}

impl MetricSeries {
    fn from_values(metric: impl Into<String>, bin_width: f64, values: Vec<f64>) -> Self {
        let bins = values
            .into_iter()
            .enumerate()
            .map(|(i, value)| Bin { start: i as f64 * bin_width, value })
            .collect();
        MetricSeries { metric: metric.into(), bin_width, bins }
    }

    pub fn values(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.value).collect()
    }
}

/// Bin layout covering `[0, last frame]`; a single bin when there are no frames.
struct Binning {
    width_us: u64,
    width_s: f64,
    count: usize,
}

impl Binning {
    fn new(frames: &[Frame], width_s: f64) -> Result<Self, MetricsError> {
        Self::for_times(frames.iter().map(|f| f.timestamp), width_s)
    }

    fn for_times(times: impl Iterator<Item = Timestamp>, width_s: f64) -> Result<Self, MetricsError> {
        if !(width_s.is_finite() && width_s > 0.0) {
            return Err(MetricsError::NonPositiveBin(width_s));
        }
        let width_us = ((width_s * 1e6).round() as u64).max(1);
        let last = times.max().map_or(0, |t| t.as_micros());
        Ok(Binning { width_us, width_s, count: (last / width_us) as usize + 1 })
    }

    fn index(&self, t: Timestamp) -> usize {
        ((t.as_micros() / self.width_us) as usize).min(self.count - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficRates {
    pub total: MetricSeries,
    pub management: MetricSeries,
    pub probe: MetricSeries,
    pub data: MetricSeries,
}

/// Frames per minute in each bin for the total, management, probe and data
/// classes.
pub fn traffic_rates(frames: &[Frame], bin_s: f64) -> Result<TrafficRates, MetricsError> {
    let binning = Binning::new(frames, bin_s)?;
    let per_minute = 60.0 / binning.width_s;
    let series = |class: FrameClass| {
        let mut counts = vec![0.0; binning.count];
        for f in frames.iter().filter(|f| class.contains(f)) {
            counts[binning.index(f.timestamp)] += 1.0;
        }
        let values = counts.into_iter().map(|c| c * per_minute).collect();
        MetricSeries::from_values(format!("{}-frames-per-minute", class.name()), bin_s, values)
    };
    Ok(TrafficRates {
        total: series(FrameClass::All),
        management: series(FrameClass::Management),
        probe: series(FrameClass::Probe),
        data: series(FrameClass::Data),
    })
}

fn percentages<K: Ord + Copy>(keys: impl Iterator<Item = K>) -> BTreeMap<K, f64> {
    let mut counts: BTreeMap<K, usize> = BTreeMap::new();
    let mut n = 0usize;
    for k in keys {
        *counts.entry(k).or_default() += 1;
        n += 1;
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 * 100.0 / n as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distributions {
    /// Percentage of frames per unique frame size in bytes.
    pub sizes: BTreeMap<u32, f64>,
    /// Percentage of frames per unique PHY rate.
    pub rates: BTreeMap<PhyRate, f64>,
}

pub fn size_and_rate_distributions(
    frames: &[Frame],
    class: FrameClass,
) -> Result<Distributions, MetricsError> {
    let members: Vec<&Frame> = frames.iter().filter(|f| class.contains(f)).collect();
    if members.is_empty() {
        return Err(MetricsError::EmptyClass(class));
    }
    Ok(Distributions {
        sizes: percentages(members.iter().map(|f| f.frame_bytes)),
        rates: percentages(members.iter().map(|f| f.phy_rate)),
    })
}

/// Gaps in seconds between consecutive frames of `class`.
pub fn ifat(frames: &[Frame], class: FrameClass) -> Result<Vec<f64>, MetricsError> {
    let times: Vec<Timestamp> =
        frames.iter().filter(|f| class.contains(f)).map(|f| f.timestamp).collect();
    if times.len() < 2 {
        return Err(MetricsError::TooFewFrames(class));
    }
    Ok(times.windows(2).map(|w| w[1].saturating_sub(w[0]) as f64 / 1e6).collect())
}

/// Frame duration model: a PHY preamble that depends on the modulation
/// family plus the payload bits at the PHY rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirtimeModel {
    pub dsss_preamble_us: f64,
    pub ofdm_preamble_us: f64,
    pub dsss_rates: BTreeSet<PhyRate>,
    pub ofdm_rates: BTreeSet<PhyRate>,
}

impl Default for AirtimeModel {
    fn default() -> Self {
        AirtimeModel {
            dsss_preamble_us: 192.0,
            ofdm_preamble_us: 20.0,
            dsss_rates: [1.0, 2.0, 5.5, 11.0].into_iter().map(PhyRate::from_mbps).collect(),
            ofdm_rates: [6.0, 9.0, 12.0, 18.0, 24.0, 36.0, 48.0, 54.0]
                .into_iter()
                .map(PhyRate::from_mbps)
                .collect(),
        }
    }
}

impl AirtimeModel {
    pub fn preamble_us(&self, rate: PhyRate) -> Result<f64, MetricsError> {
        if self.dsss_rates.contains(&rate) {
            Ok(self.dsss_preamble_us)
        } else if self.ofdm_rates.contains(&rate) {
            Ok(self.ofdm_preamble_us)
        } else {
            Err(MetricsError::UnknownRate(rate))
        }
    }

    pub fn duration_us(&self, f: &Frame) -> Result<f64, MetricsError> {
        let preamble = self.preamble_us(f.phy_rate)?;
        Ok(preamble + f.frame_bytes as f64 * 8.0 / f.phy_rate.mbps())
    }
}

/// Percentage of each bin occupied by frames of `class`. A frame's whole
/// duration is charged to the bin holding its timestamp.
pub fn airtime_utilization(
    frames: &[Frame],
    class: FrameClass,
    bin_s: f64,
    model: &AirtimeModel,
) -> Result<MetricSeries, MetricsError> {
    let binning = Binning::new(frames, bin_s)?;
    let mut busy_us = vec![0.0; binning.count];
    for f in frames.iter().filter(|f| class.contains(f)) {
        busy_us[binning.index(f.timestamp)] += model.duration_us(f)?;
    }
    let bin_us = binning.width_s * 1e6;
    let values = busy_us.into_iter().map(|b| b / bin_us * 100.0).collect();
    Ok(MetricSeries::from_values(format!("{}-airtime-percent", class.name()), bin_s, values))
}

/// Mean announced QBSS channel utilization per bin, in percent. Bins without
/// a beacon hold the previous bin's value (zero before the first beacon).
pub fn channel_utilization(frames: &[Frame], bin_s: f64) -> Result<MetricSeries, MetricsError> {
    let beacons: Vec<&Frame> =
        frames.iter().filter(|f| f.is(Subtype::Beacon) && f.qbss.is_some()).collect();
    if beacons.is_empty() {
        return Err(MetricsError::MissingQbss);
    }
    let binning = Binning::for_times(beacons.iter().map(|f| f.timestamp), bin_s)?;
    let mut sums = vec![(0.0, 0usize); binning.count];
    for b in &beacons {
        let slot = &mut sums[binning.index(b.timestamp)];
        slot.0 += b.qbss.unwrap().utilization_percent();
        slot.1 += 1;
    }
    let mut last = 0.0;
    let values = sums
        .into_iter()
        .map(|(s, n)| {
            if n > 0 {
                last = s / n as f64;
            }
            last
        })
        .collect();
    Ok(MetricSeries::from_values("channel-utilization-percent", bin_s, values))
}

/// Delivered MAC payload bytes per second.
///
/// A data frame counts when an ACK addressed to its transmitter follows
/// within `ack_timeout_ms`. A retransmission counts only when the previous
/// attempt on the same link went unacknowledged, so each delivered MSDU is
/// counted once.
pub fn goodput(frames: &[Frame], bin_s: f64, ack_timeout_ms: f64) -> Result<MetricSeries, MetricsError> {
    let binning = Binning::new(frames, bin_s)?;
    let timeout_us = (ack_timeout_ms * 1000.0).round() as u64;
    let mut acks: HashMap<MacAddr, Vec<Timestamp>> = HashMap::new();
    for f in frames.iter().filter(|f| f.is(Subtype::Ack)) {
        acks.entry(f.receiver).or_default().push(f.timestamp);
    }
    let mut last_delivered: HashMap<(MacAddr, MacAddr), bool> = HashMap::new();
    let mut bytes = vec![0.0; binning.count];
    for f in frames.iter().filter(|f| f.subtype.is_payload_data()) {
        let Some(tx) = f.transmitter else { continue };
        let ok = acks.get(&tx).is_some_and(|a| acked(a, f.timestamp, timeout_us));
        let prev = last_delivered.insert((tx, f.receiver), ok);
        let duplicate = f.retry && prev == Some(true);
        if ok && !duplicate {
            bytes[binning.index(f.timestamp)] += f.payload_bytes() as f64;
        }
    }
    let values = bytes.into_iter().map(|b| b / binning.width_s).collect();
    Ok(MetricSeries::from_values("goodput-bytes-per-second", bin_s, values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RedundantProbeTraffic {
    pub redundant: usize,
    pub total: usize,
}

impl RedundantProbeTraffic {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.redundant as f64 / self.total as f64
        }
    }
}

impl std::ops::Add for RedundantProbeTraffic {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        RedundantProbeTraffic { redundant: self.redundant + o.redundant, total: self.total + o.total }
    }
}

/// What a probe response tells the client about one BSS.
type BssTuple<'a> = (Option<&'a str>, Option<MacAddr>, u8, Option<u16>);

fn bss_tuple(f: &Frame) -> BssTuple<'_> {
    (f.ssid.as_deref(), f.bssid.or(f.transmitter), f.channel, f.station_count())
}

/// Counts probe responses that repeat information from the predecessor
/// episode of the same client. `episodes` must be one client's, in order.
pub fn redundant_probe_traffic(episodes: &[ScanEpisode]) -> RedundantProbeTraffic {
    let mut rpt = RedundantProbeTraffic::default();
    let mut previous: HashSet<BssTuple<'_>> = HashSet::new();
    for ep in episodes {
        let current: HashSet<BssTuple<'_>> = ep.presps.iter().map(bss_tuple).collect();
        rpt.total += ep.presps.len();
        rpt.redundant += ep.presps.iter().filter(|f| previous.contains(&bss_tuple(f))).count();
        previous = current;
    }
    rpt
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::QbssLoad;

    const STA: MacAddr = MacAddr([2, 0, 0, 0, 0, 1]);
    const AP: MacAddr = MacAddr([2, 0, 0, 0, 0, 9]);

    fn at(secs: f64, subtype: Subtype, bytes: u32, mbps: f64) -> Frame {
        let mut f = Frame::new(Timestamp::from_secs_f64(secs), subtype, AP);
        f.transmitter = Some(STA);
        f.bssid = Some(AP);
        f.frame_bytes = bytes;
        f.phy_rate = PhyRate::from_mbps(mbps);
        f
    }

    fn ack(secs: f64, to: MacAddr) -> Frame {
        let mut f = Frame::new(Timestamp::from_secs_f64(secs), Subtype::Ack, to);
        f.frame_bytes = 14;
        f
    }

    #[test]
    fn probe_rate_per_minute() {
        let frames: Vec<Frame> =
            (0..120).map(|i| at(i as f64, Subtype::ProbeRequest, 60, 1.0)).collect();
        let r = traffic_rates(&frames, 60.0).unwrap();
        assert_eq!(r.probe.values(), vec![60.0, 60.0]);
        assert_eq!(r.management.values(), vec![60.0, 60.0]);
        assert_eq!(r.data.values(), vec![0.0, 0.0]);
    }

    #[test]
    fn empty_capture_gives_zero_series_and_bad_bin_errors() {
        let r = traffic_rates(&[], 60.0).unwrap();
        assert!(r.total.values().iter().all(|&v| v == 0.0));
        assert_eq!(traffic_rates(&[], 0.0), Err(MetricsError::NonPositiveBin(0.0)));
        assert!(matches!(goodput(&[], -1.0, 1.0), Err(MetricsError::NonPositiveBin(_))));
    }

    #[test]
    fn size_histogram() {
        let frames: Vec<Frame> = [50, 50, 110]
            .iter()
            .map(|&b| at(0.0, Subtype::ProbeRequest, b, 1.0))
            .collect();
        let d = size_and_rate_distributions(&frames, FrameClass::ProbeRequest).unwrap();
        assert!((d.sizes[&50] - 66.666_666).abs() < 1e-3);
        assert!((d.sizes[&110] - 33.333_333).abs() < 1e-3);
        assert_eq!(d.rates[&PhyRate::from_mbps(1.0)], 100.0);
        assert_eq!(
            size_and_rate_distributions(&frames, FrameClass::Beacon),
            Err(MetricsError::EmptyClass(FrameClass::Beacon))
        );
    }

    #[test]
    fn ifat_gaps() {
        let frames = vec![at(0.0, Subtype::ProbeRequest, 60, 1.0), at(0.010, Subtype::ProbeRequest, 60, 1.0)];
        assert_eq!(ifat(&frames, FrameClass::ProbeRequest).unwrap(), vec![0.010]);
        assert_eq!(
            ifat(&frames[..1], FrameClass::ProbeRequest),
            Err(MetricsError::TooFewFrames(FrameClass::ProbeRequest))
        );
    }

    #[test]
    fn airtime_unknown_rate() {
        let frames = vec![at(0.0, Subtype::QosData, 100, 6.5)];
        assert_eq!(
            airtime_utilization(&frames, FrameClass::All, 1.0, &AirtimeModel::default()),
            Err(MetricsError::UnknownRate(PhyRate::from_mbps(6.5)))
        );
    }

    #[test]
    fn channel_utilization_scale() {
        let mut frames = Vec::new();
        for (i, raw) in [255u8, 0, 128].into_iter().enumerate() {
            let mut b = at(i as f64, Subtype::Beacon, 100, 1.0);
            b.qbss = Some(QbssLoad { station_count: 0, channel_utilization: raw });
            frames.push(b);
        }
        let cu = channel_utilization(&frames, 1.0).unwrap().values();
        assert_eq!(cu[0], 100.0);
        assert_eq!(cu[1], 0.0);
        assert!((cu[2] - 50.196).abs() < 1e-3);
        assert_eq!(channel_utilization(&frames[..0], 1.0), Err(MetricsError::MissingQbss));
    }

    #[test]
    fn goodput_counts_each_delivery_once() {
        let data = at(0.1, Subtype::QosData, 1526, 54.0);
        let frames = vec![data.clone(), ack(0.1002, STA)];
        assert_eq!(goodput(&frames, 1.0, 1.0).unwrap().values(), vec![1500.0]);

        let mut retry = at(0.2, Subtype::QosData, 1526, 54.0);
        retry.retry = true;
        let frames = vec![data.clone(), retry.clone(), ack(0.2002, STA)];
        assert_eq!(goodput(&frames, 1.0, 1.0).unwrap().values(), vec![1500.0]);

        // A spurious retransmission of an already acknowledged frame.
        let frames = vec![data, ack(0.1002, STA), retry, ack(0.2002, STA)];
        assert_eq!(goodput(&frames, 1.0, 1.0).unwrap().values(), vec![1500.0]);
    }

    fn episode(presps: Vec<Frame>) -> ScanEpisode {
        ScanEpisode { client: STA, preqs: Vec::new(), start: Timestamp(0), end: Timestamp(0), presps }
    }

    fn presp(count: u16) -> Frame {
        let mut f = at(0.0, Subtype::ProbeResponse, 100, 1.0);
        f.transmitter = Some(AP);
        f.receiver = STA;
        f.ssid = Some("net".into());
        f.qbss = Some(QbssLoad { station_count: count, channel_utilization: 0 });
        f
    }

    #[test]
    fn rpt_tuple_rules() {
        let same = redundant_probe_traffic(&[episode(vec![presp(3)]), episode(vec![presp(3)])]);
        assert_eq!((same.redundant, same.total), (1, 2));
        let changed = redundant_probe_traffic(&[episode(vec![presp(3)]), episode(vec![presp(4)])]);
        assert_eq!((changed.redundant, changed.total), (0, 2));
        let single = redundant_probe_traffic(&[episode(vec![presp(3), presp(3)])]);
        assert_eq!((single.redundant, single.total), (0, 2));
    }
}
