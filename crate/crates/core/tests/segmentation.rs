mod common;

use common::*;
use proptest::prelude::*;
use scanlens::capture::ClientTimeline;
use scanlens::segmentation::{segment_episodes, windows};
use scanlens::{Frame, Subtype, Timestamp};

fn timeline(frames: Vec<Frame>) -> ClientTimeline {
    let mut frames = frames;
    frames.sort_by_key(|f| f.timestamp);
    ClientTimeline { client: STA, frames }
}

fn probes_at(secs: &[f64]) -> ClientTimeline {
    timeline(secs.iter().map(|&s| preq(s)).collect())
}

fn starts(tl: &ClientTimeline, gap: f64) -> Vec<Vec<f64>> {
    segment_episodes(tl, gap)
        .iter()
        .map(|e| e.preqs.iter().map(|f| f.timestamp.as_secs_f64()).collect())
        .collect()
}

#[test]
fn splits_on_a_long_gap() {
    assert_eq!(starts(&probes_at(&[0.0, 0.4, 0.8, 2.0]), 1.0), vec![vec![0.0, 0.4, 0.8], vec![2.0]]);
}

#[test]
fn exact_gap_splits() {
    assert_eq!(starts(&probes_at(&[0.0, 1.0]), 1.0).len(), 2);
    assert_eq!(starts(&probes_at(&[0.0, 0.999_999]), 1.0).len(), 1);
}

#[test]
fn no_probes_no_episodes() {
    let tl = timeline(vec![uplink(0.5, Subtype::QosData)]);
    assert!(segment_episodes(&tl, 1.0).is_empty());
    assert!(windows(&[], &tl).is_empty());
}

#[test]
fn responses_after_the_last_probe_join_the_episode() {
    let tl = timeline(vec![preq(1.0), preq(1.2), downlink(1.25, Subtype::ProbeResponse), downlink(1.9, Subtype::ProbeResponse)]);
    let eps = segment_episodes(&tl, 1.0);
    assert_eq!(eps.len(), 1);
    assert_eq!(eps[0].presps.len(), 2);
    assert_eq!(eps[0].start, ts(1.0));
}

#[test]
fn first_window_starts_at_capture_start() {
    let tl = timeline(vec![uplink(2.0, Subtype::QosData), uplink(5.0, Subtype::QosData), preq(10.0)]);
    let eps = segment_episodes(&tl, 1.0);
    let w = windows(&eps, &tl);
    assert_eq!(w.len(), 1);
    assert_eq!(w[0].start, Timestamp(0));
    assert_eq!(w[0].frames.len(), 2);
}

#[test]
fn later_windows_hold_frames_strictly_between_episodes() {
    let tl = timeline(vec![
        preq(1.0),
        uplink(1.5, Subtype::QosData),
        uplink(4.0, Subtype::QosData),
        preq(5.0),
        uplink(6.0, Subtype::QosData),
    ]);
    let eps = segment_episodes(&tl, 1.0);
    let w = windows(&eps, &tl);
    assert_eq!(w.len(), 2);
    assert_eq!(w[1].start, eps[0].end);
    assert_eq!(w[1].end, eps[1].start);
    let times: Vec<f64> = w[1].frames.iter().map(|f| f.timestamp.as_secs_f64()).collect();
    assert_eq!(times, vec![1.5, 4.0]);
}

proptest! {
    #[test]
    fn matches_closure_oracle(
        mut times in prop::collection::vec(0u64..30_000_000, 0..80),
        gap_ms in 1u64..3000,
    ) {
        times.sort_unstable();
        let gap_us = gap_ms * 1000;
        let tl = timeline(times.iter().map(|&t| preq(t as f64 / 1e6)).collect());
        let got: Vec<Vec<u64>> = segment_episodes(&tl, gap_ms as f64 / 1000.0)
            .iter()
            .map(|e| e.preqs.iter().map(|f| f.timestamp.as_micros()).collect())
            .collect();
        prop_assert_eq!(got, closure_oracle(&times, gap_us));
    }

    #[test]
    fn windows_partition_non_probe_frames(
        mut probes in prop::collection::vec(0u64..20_000, 1..30),
        mut data in prop::collection::vec(0u64..20_000, 0..60),
    ) {
        probes.sort_unstable();
        data.sort_unstable();
        let mut frames: Vec<Frame> = probes.iter().map(|&t| preq(t as f64 / 1000.0)).collect();
        frames.extend(data.iter().map(|&t| uplink(t as f64 / 1000.0 + 0.0005, Subtype::QosData)));
        let tl = timeline(frames);
        let eps = segment_episodes(&tl, 1.0);
        let w = windows(&eps, &tl);
        prop_assert_eq!(w.len(), eps.len());
        for (win, ep) in w.iter().zip(&eps) {
            for f in &win.frames {
                prop_assert!(f.timestamp >= win.start && f.timestamp < ep.start);
            }
        }
        let last_end = eps.last().unwrap().end;
        let inside: usize = w.iter().map(|w| w.frames.len()).sum();
        let expected = data
            .iter()
            .map(|&t| Timestamp::from_secs_f64(t as f64 / 1000.0 + 0.0005))
            .filter(|&t| t < last_end && !eps.iter().any(|e| e.start <= t && t <= e.end))
            .count();
        prop_assert_eq!(inside, expected);
    }
}
