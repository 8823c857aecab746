use std::collections::BTreeMap;
use std::path::Path;

use scanlens::analysis::{analyze_frames, LabeledEpisode};
use scanlens::capture::{parse_capture_auto, LinkType, ParsedCapture};
use scanlens::causes::{CauseLabel, Thresholds};
use scanlens::metrics::{
    airtime_utilization, channel_utilization, goodput, ifat, redundant_probe_traffic, size_and_rate_distributions,
    traffic_rates, AirtimeModel, Distributions, FrameClass, MetricSeries, MetricsError, RedundantProbeTraffic,
};
use scanlens::par::Execution;
use scanlens::simulator::median;
use scanlens::{Frame, MacAddr};
use serde::Serialize;

use crate::output::{self, Table};
use crate::{CliError, Common, Format};

#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub tool: &'static str,
    pub version: &'static str,
    pub input: InputInfo,
    pub thresholds: Thresholds,
    pub causes: CauseSection,
    pub metrics: MetricsSection,
    pub rpt: RptSection,
}

#[derive(Debug, Serialize)]
pub struct InputInfo {
    pub sha256: String,
    pub bytes: usize,
    pub link_type: LinkType,
    pub frames: usize,
    pub skipped_records: usize,
}

#[derive(Debug, Serialize)]
pub struct CauseRow {
    pub label: CauseLabel,
    pub title: &'static str,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Serialize)]
pub struct CauseSection {
    /// "ok", or "no episodes" when the capture holds no probe requests.
    pub status: &'static str,
    pub total: usize,
    pub distribution: Vec<CauseRow>,
    pub episodes: Vec<LabeledEpisode>,
}

#[derive(Debug, Serialize)]
pub struct IfatSummary {
    pub class: &'static str,
    pub gaps: usize,
    pub min_s: f64,
    pub median_s: f64,
    pub max_s: f64,
}

#[derive(Debug, Serialize)]
pub struct MetricsSection {
    pub bin_s: f64,
    pub series: Vec<MetricSeries>,
    pub distributions: BTreeMap<&'static str, Distributions>,
    pub ifat: Vec<IfatSummary>,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ClientRpt {
    pub client: MacAddr,
    pub redundant: usize,
    pub total: usize,
}

#[derive(Debug, Serialize)]
pub struct RptSection {
    pub redundant: usize,
    pub total: usize,
    pub fraction: f64,
    pub per_client: Vec<ClientRpt>,
}

fn load_thresholds(common: &Common) -> Result<Thresholds, CliError> {
    let mut th = match &common.thresholds {
        Some(path) => Thresholds::from_toml_str(&output::read_config(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => Thresholds::default(),
    };
    if let Some(gap) = common.gap {
        th.gap_threshold_s = gap;
    }
    th.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(th)
}

fn metrics(frames: &[Frame], bin: f64, ack_timeout_ms: f64) -> MetricsSection {
    let mut series = Vec::new();
    let mut notes = Vec::new();
    let rates = traffic_rates(frames, bin).expect("bin width validated");
    series.extend([rates.total, rates.management, rates.probe, rates.data]);

    let model = AirtimeModel::default();
    let modelled: Vec<Frame> = frames.iter().filter(|f| model.preamble_us(f.phy_rate).is_ok()).cloned().collect();
    if modelled.len() < frames.len() {
        notes.push(format!(
            "{} frames with PHY rates outside the airtime model are excluded from airtime",
            frames.len() - modelled.len()
        ));
    }
    for class in [FrameClass::All, FrameClass::Data, FrameClass::Probe, FrameClass::Other] {
        series.push(airtime_utilization(&modelled, class, bin, &model).expect("rates filtered"));
    }
    match channel_utilization(frames, bin) {
        Ok(s) => series.push(s),
        Err(MetricsError::MissingQbss) => notes.push("no beacon carries a QBSS Load element".into()),
        Err(e) => notes.push(e.to_string()),
    }
    series.push(goodput(frames, bin, ack_timeout_ms).expect("bin width validated"));

    let mut distributions = BTreeMap::new();
    let mut ifats = Vec::new();
    for class in [FrameClass::ProbeRequest, FrameClass::ProbeResponse] {
        if let Ok(d) = size_and_rate_distributions(frames, class) {
            distributions.insert(class.name(), d);
        }
        if let Ok(gaps) = ifat(frames, class) {
            ifats.push(IfatSummary {
                class: class.name(),
                gaps: gaps.len(),
                min_s: gaps.iter().copied().fold(f64::INFINITY, f64::min),
                median_s: median(&gaps).unwrap_or(0.0),
                max_s: gaps.iter().copied().fold(0.0, f64::max),
            });
        }
    }
    MetricsSection { bin_s: bin, series, distributions, ifat: ifats, notes }
}

pub fn build_report(raw: &[u8], parsed: &ParsedCapture, th: Thresholds, bin: f64) -> ReportDocument {
    let frames = &parsed.frames;
    let analysis = analyze_frames(frames, &th, Execution::default());
    let episodes = analysis.labeled();

    let total = episodes.len();
    let distribution = CauseLabel::ALL
        .iter()
        .map(|&label| {
            let count = episodes.iter().filter(|e| e.label == label).count();
            let percent = if total == 0 { 0.0 } else { count as f64 * 100.0 / total as f64 };
            CauseRow { label, title: label.title(), count, percent }
        })
        .collect();

    let mut sum = RedundantProbeTraffic::default();
    let per_client = analysis
        .clients
        .iter()
        .filter(|c| !c.episodes.is_empty())
        .map(|c| {
            let r = redundant_probe_traffic(&c.episodes);
            sum = sum + r;
            ClientRpt { client: c.client, redundant: r.redundant, total: r.total }
        })
        .collect();

    ReportDocument {
        tool: output::TOOL,
        version: output::VERSION,
        input: InputInfo {
            sha256: output::sha256_hex(raw),
            bytes: raw.len(),
            link_type: parsed.link_type,
            frames: frames.len(),
            skipped_records: parsed.stats.skipped(),
        },
        causes: CauseSection { status: if total == 0 { "no episodes" } else { "ok" }, total, distribution, episodes },
        metrics: metrics(frames, bin, th.ack_timeout_ms),
        rpt: RptSection { redundant: sum.redundant, total: sum.total, fraction: sum.fraction(), per_client },
        thresholds: th,
    }
}

fn tables(doc: &ReportDocument) -> Vec<Table> {
    let mut out = Vec::new();

    let mut info = Table::new("report", vec!["key", "value"]);
    info.push(vec!["tool".into(), doc.tool.into()]);
    info.push(vec!["version".into(), doc.version.into()]);
    info.push(vec!["sha256".into(), doc.input.sha256.clone()]);
    info.push(vec!["frames".into(), doc.input.frames.to_string()]);
    info.push(vec!["skipped_records".into(), doc.input.skipped_records.to_string()]);
    info.push(vec!["causes".into(), doc.causes.status.into()]);
    for line in doc.thresholds.to_toml_string().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            info.push(vec![format!("thresholds.{k}"), v.to_owned()]);
        }
    }
    out.push(info);

    let mut causes = Table::new("causes", vec!["label", "title", "count", "percent"]);
    for r in &doc.causes.distribution {
        causes.push(vec![r.label.slug().into(), r.title.into(), r.count.to_string(), r.percent.to_string()]);
    }
    out.push(causes);

    let mut episodes = Table::new("episodes", vec!["client", "start_s", "end_s", "preqs", "presps", "label"]);
    for e in &doc.causes.episodes {
        episodes.push(vec![
            e.client.to_string(),
            e.start.as_secs_f64().to_string(),
            e.end.as_secs_f64().to_string(),
            e.preqs.to_string(),
            e.presps.to_string(),
            e.label.slug().into(),
        ]);
    }
    out.push(episodes);

    for s in &doc.metrics.series {
        let mut t = Table::new(s.metric.clone(), vec!["bin_start", "value"]);
        for b in &s.bins {
            t.push(vec![b.start.to_string(), b.value.to_string()]);
        }
        out.push(t);
    }

    let mut rpt = Table::new("rpt", vec!["client", "redundant", "total"]);
    for c in &doc.rpt.per_client {
        rpt.push(vec![c.client.to_string(), c.redundant.to_string(), c.total.to_string()]);
    }
    rpt.push(vec!["all".into(), doc.rpt.redundant.to_string(), doc.rpt.total.to_string()]);
    out.push(rpt);
    out
}

pub fn run(capture: &Path, common: &Common) -> Result<(), CliError> {
    let th = load_thresholds(common)?;
    if !(common.bin.is_finite() && common.bin > 0.0) {
        return Err(CliError::Config(format!("--bin must be a positive number of seconds, got {}", common.bin)));
    }
    let raw = output::read_input(capture)?;
    let parsed =
        parse_capture_auto(&raw).map_err(|e| CliError::Input(format!("{}: {e}", capture.display())))?;
    let doc = build_report(&raw, &parsed, th, common.bin);
    match common.format {
        Format::Json => output::emit_json(&output::json(&doc), "report.json", common.out.as_deref()),
        Format::Csv => output::emit_tables(&tables(&doc), common.out.as_deref()),
    }
}
