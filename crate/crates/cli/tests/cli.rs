use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scanlens::capture::encode_capture;
use scanlens::{Frame, MacAddr, PhyRate, Subtype, Timestamp};
use serde_json::Value;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scanlens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scanlens"))
        .args(args)
        .env_remove("SCANLENS_FORMAT")
        .env_remove("SCANLENS_OUT")
        .env_remove("SCANLENS_SEED")
        .env_remove("SCANLENS_GAP")
        .env_remove("SCANLENS_BIN")
        .env_remove("SCANLENS_THRESHOLDS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn simulate_fixture(dir: &Path) -> PathBuf {
    let scenario = scenarios().join("fixture.toml");
    let o = scanlens(&["simulate", scenario.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    dir.join("fixture.pcap")
}

fn json(o: &Output) -> Value {
    assert_eq!(code(o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("valid json")
}

#[test]
fn closed_loop_matches_truth_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let pcap = simulate_fixture(dir.path());
    let truth: Value = serde_json::from_slice(&std::fs::read(dir.path().join("fixture.truth.json")).unwrap()).unwrap();
    let report = json(&scanlens(&["analyze", pcap.to_str().unwrap()]));

    let key = |e: &Value, label: &str| (e["client"].as_str().unwrap().to_owned(), e["start"].as_u64().unwrap(), e[label].as_str().unwrap().to_owned());
    let expected: Vec<_> = truth["truth"]["episodes"].as_array().unwrap().iter().map(|e| key(e, "cause")).collect();
    let got: Vec<_> = report["causes"]["episodes"].as_array().unwrap().iter().map(|e| key(e, "label")).collect();
    assert!(!expected.is_empty());
    assert_eq!(got, expected);
    assert_eq!(report["causes"]["status"], "ok");
    assert_eq!(report["thresholds"]["rssi_mean_dbm"], -72.0);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let pa = simulate_fixture(a.path());
    let pb = simulate_fixture(b.path());
    assert_eq!(std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap());
    assert_eq!(
        std::fs::read(a.path().join("fixture.truth.json")).unwrap(),
        std::fs::read(b.path().join("fixture.truth.json")).unwrap()
    );
    for format in ["json", "csv"] {
        let x = scanlens(&["analyze", pa.to_str().unwrap(), "--format", format]);
        let y = scanlens(&["analyze", pb.to_str().unwrap(), "--format", format]);
        assert_eq!(code(&x), 0);
        assert_eq!(x.stdout, y.stdout);
    }
    let scenario = scenarios().join("reference.toml");
    let x = scanlens(&["compare", scenario.to_str().unwrap()]);
    let y = scanlens(&["compare", scenario.to_str().unwrap()]);
    assert_eq!(code(&x), 0);
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn seed_flag_changes_the_trace() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let scenario = scenarios().join("fixture.toml");
    let pa = simulate_fixture(a.path());
    let o = scanlens(&["simulate", scenario.to_str().unwrap(), "--out", b.path().to_str().unwrap(), "--seed", "99"]);
    assert_eq!(code(&o), 0);
    assert_ne!(std::fs::read(pa).unwrap(), std::fs::read(b.path().join("fixture.pcap")).unwrap());
}

#[test]
fn reference_comparison_ratio() {
    let scenario = scenarios().join("reference.toml");
    let doc = json(&scanlens(&["compare", scenario.to_str().unwrap()]));
    let ratio = doc["report"]["preq_ratio"].as_f64().unwrap();
    assert!((0.45..=0.80).contains(&ratio), "{ratio}");
    assert_eq!(doc["preqs_per_hour"][0]["modified"], 0);
    assert!(doc["preqs_per_hour"][0]["baseline"].as_u64().unwrap() > 0);
}

#[test]
fn capture_without_probes_reports_no_episodes() {
    let dir = tempfile::tempdir().unwrap();
    let ap = MacAddr([2, 0, 0, 0, 0, 9]);
    let frames: Vec<Frame> = (0..50)
        .map(|k| {
            let mut f = Frame::new(Timestamp(k * 102_400), Subtype::Beacon, MacAddr::BROADCAST);
            f.transmitter = Some(ap);
            f.bssid = Some(ap);
            f.channel = 6;
            f.phy_rate = PhyRate::from_mbps(1.0);
            f.ssid = Some("quiet".into());
            f.beacon_interval = Some(100);
            f.frame_bytes = 80;
            f
        })
        .collect();
    let path = dir.path().join("beacons.pcap");
    std::fs::write(&path, encode_capture(&frames).unwrap()).unwrap();
    let report = json(&scanlens(&["analyze", path.to_str().unwrap(), "--bin", "1"]));
    assert_eq!(report["causes"]["status"], "no episodes");
    assert_eq!(report["causes"]["total"], 0);
    assert!(!report["metrics"]["series"].as_array().unwrap().is_empty());
}

#[test]
fn csv_goes_to_files_when_out_is_given() {
    let dir = tempfile::tempdir().unwrap();
    let pcap = simulate_fixture(dir.path());
    let out = dir.path().join("report");
    let o = Command::new(env!("CARGO_BIN_EXE_scanlens"))
        .args(["analyze", pcap.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("SCANLENS_FORMAT", "csv")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let causes = std::fs::read_to_string(out.join("causes.csv")).unwrap();
    assert!(causes.starts_with("label,title,count,percent"));
    let goodput = std::fs::read_to_string(out.join("goodput-bytes-per-second.csv")).unwrap();
    assert!(goodput.starts_with("bin_start,value"));
}

#[test]
fn thresholds_file_is_applied_and_embedded() {
    let dir = tempfile::tempdir().unwrap();
    let pcap = simulate_fixture(dir.path());
    let th = dir.path().join("th.toml");
    std::fs::write(&th, "rssi_mean_dbm = -60.0\n").unwrap();
    let report = json(&scanlens(&["analyze", pcap.to_str().unwrap(), "--thresholds", th.to_str().unwrap(), "--gap", "2"]));
    assert_eq!(report["thresholds"]["rssi_mean_dbm"], -60.0);
    assert_eq!(report["thresholds"]["gap_threshold_s"], 2.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();

    // Input errors.
    assert_eq!(code(&scanlens(&["analyze", &p("missing.pcap")])), 1);
    std::fs::write(p("junk.pcap"), b"definitely not a pcap file").unwrap();
    assert_eq!(code(&scanlens(&["analyze", &p("junk.pcap")])), 1);

    // Configuration errors.
    let pcap = simulate_fixture(dir.path());
    let pcap = pcap.to_str().unwrap();
    std::fs::write(p("bad-th.toml"), "rssi_std_db = -1.0\n").unwrap();
    assert_eq!(code(&scanlens(&["analyze", pcap, "--thresholds", &p("bad-th.toml")])), 2);
    std::fs::write(p("unknown-th.toml"), "no_such_knob = 1\n").unwrap();
    assert_eq!(code(&scanlens(&["analyze", pcap, "--thresholds", &p("unknown-th.toml")])), 2);
    assert_eq!(code(&scanlens(&["analyze", pcap, "--gap", "0"])), 2);
    assert_eq!(code(&scanlens(&["analyze", pcap, "--bin", "-5"])), 2);
    assert_eq!(code(&scanlens(&["analyze", pcap, "--format", "xml"])), 2);

    let fixture = std::fs::read_to_string(scenarios().join("fixture.toml")).unwrap();
    std::fs::write(p("zero.toml"), fixture.replace("duration = 900.0", "duration = 0.0")).unwrap();
    assert_eq!(code(&scanlens(&["simulate", &p("zero.toml"), "--out", &p("sim")])), 2);

    let flood = scenarios().join("probe-flood.toml");
    assert_eq!(code(&scanlens(&["compare", flood.to_str().unwrap()])), 2);
}
