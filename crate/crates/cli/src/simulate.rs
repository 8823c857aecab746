use std::path::Path;

use scanlens::simulator::{generate, write_capture, GroundTruth, ScenarioSpec};
use serde::Serialize;

use crate::output;
use crate::{CliError, Common};

#[derive(Serialize)]
struct TruthSidecar<'a> {
    tool: &'static str,
    version: &'static str,
    scenario_sha256: String,
    seed: u64,
    capture: String,
    truth: &'a GroundTruth,
}

pub fn load_scenario(path: &Path, seed: Option<u64>) -> Result<(ScenarioSpec, String), CliError> {
    let text = output::read_config(path)?;
    let mut spec =
        ScenarioSpec::from_toml_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    Ok((spec, output::sha256_hex(text.as_bytes())))
}

/// Writes `<stem>.pcap` and `<stem>.truth.json` into the output directory.
pub fn run(scenario: &Path, common: &Common) -> Result<(), CliError> {
    let (spec, digest) = load_scenario(scenario, common.seed)?;
    let generated = generate(&spec).map_err(|e| CliError::Config(e.to_string()))?;

    let dir = common.out.clone().unwrap_or_else(|| ".".into());
    let stem = scenario.file_stem().map_or("trace".into(), |s| s.to_string_lossy().into_owned());
    let pcap_name = format!("{stem}.pcap");
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    write_capture(&generated.trace, &dir.join(&pcap_name)).map_err(|e| CliError::Input(e.to_string()))?;

    let sidecar = TruthSidecar {
        tool: output::TOOL,
        version: output::VERSION,
        scenario_sha256: digest,
        seed: spec.seed,
        capture: pcap_name.clone(),
        truth: &generated.truth,
    };
    output::write_file(&dir, &format!("{stem}.truth.json"), &output::json(&sidecar))?;
    println!(
        "wrote {} frames and {} labelled episodes to {}",
        generated.trace.len(),
        generated.truth.episodes.len(),
        dir.join(&pcap_name).display()
    );
    Ok(())
}
