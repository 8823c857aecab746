use std::path::Path;

use scanlens::policy::PolicyKind;
use scanlens::simulator::{run_comparison, ComparisonReport};
use serde::Serialize;

use crate::output::{self, cdf, Table};
use crate::simulate::load_scenario;
use crate::{CliError, Common, Format};

#[derive(Serialize)]
struct HourRow {
    hour: usize,
    modified: u64,
    baseline: u64,
}

#[derive(Serialize)]
struct Cdfs {
    modified: Vec<(f64, f64)>,
    baseline: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct CompareDocument {
    tool: &'static str,
    version: &'static str,
    scenario_sha256: String,
    preqs_per_hour: Vec<HourRow>,
    ttc_cdf: Cdfs,
    persistence_cdf: Cdfs,
    report: ComparisonReport,
}

fn cdf_table(name: &str, column: &'static str, report: &ComparisonReport, pick: fn(&scanlens::simulator::PolicySummary) -> &Vec<f64>) -> Table {
    let mut t = Table::new(name, vec!["policy", column, "fraction"]);
    for s in [&report.modified, &report.baseline] {
        for (x, f) in cdf(pick(s)) {
            t.push(vec![s.policy.name().into(), x.to_string(), f.to_string()]);
        }
    }
    t
}

pub fn run(scenario: &Path, common: &Common) -> Result<(), CliError> {
    let (spec, digest) = load_scenario(scenario, common.seed)?;
    let report = run_comparison(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    match common.format {
        Format::Json => {
            let doc = CompareDocument {
                tool: output::TOOL,
                version: output::VERSION,
                scenario_sha256: digest,
                preqs_per_hour: report
                    .modified
                    .preqs_per_hour
                    .iter()
                    .zip(&report.baseline.preqs_per_hour)
                    .enumerate()
                    .map(|(hour, (&modified, &baseline))| HourRow { hour, modified, baseline })
                    .collect(),
                ttc_cdf: Cdfs { modified: cdf(&report.modified.ttc), baseline: cdf(&report.baseline.ttc) },
                persistence_cdf: Cdfs {
                    modified: cdf(&report.modified.persistence),
                    baseline: cdf(&report.baseline.persistence),
                },
                report,
            };
            output::emit_json(&output::json(&doc), "comparison.json", common.out.as_deref())
        }
        Format::Csv => {
            let mut summary = Table::new("summary", vec!["key", "value"]);
            summary.push(vec!["scenario_sha256".into(), digest]);
            summary.push(vec!["seed".into(), report.seed.to_string()]);
            for s in [&report.modified, &report.baseline] {
                let p = s.policy.name();
                let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
                summary.push(vec![format!("{p}.clients"), s.clients.to_string()]);
                summary.push(vec![format!("{p}.total_preqs"), s.total_preqs.to_string()]);
                summary.push(vec![format!("{p}.median_ttc_s"), opt(s.median_ttc)]);
                summary.push(vec![format!("{p}.median_persistence_s"), opt(s.median_persistence)]);
            }
            summary.push(vec!["preq_ratio".into(), report.preq_ratio.map_or(String::new(), |r| r.to_string())]);

            let mut hours = Table::new("preqs_per_hour", vec!["hour", PolicyKind::Modified.name(), PolicyKind::Baseline.name()]);
            for (h, (m, b)) in report.modified.preqs_per_hour.iter().zip(&report.baseline.preqs_per_hour).enumerate() {
                hours.push(vec![h.to_string(), m.to_string(), b.to_string()]);
            }
            let tables = [
                summary,
                hours,
                cdf_table("ttc_cdf", "seconds", &report, |s| &s.ttc),
                cdf_table("persistence_cdf", "seconds", &report, |s| &s.persistence),
            ];
            output::emit_tables(&tables, common.out.as_deref())
        }
    }
}
