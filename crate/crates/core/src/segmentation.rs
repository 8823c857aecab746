//! Active-scanning episodes and the evidence windows between them.
//!
//! An episode is a maximal run of one client's probe requests in which
//! consecutive requests are less than the gap threshold apart. The window of
//! episode `i` holds the client's frames strictly between the end of episode
//! `i - 1` and the start of episode `i`; window 0 reaches back to capture
//! start.

use serde::{Deserialize, Serialize};

use crate::capture::ClientTimeline;
use crate::frame::{Frame, MacAddr, Subtype, Timestamp};

pub const DEFAULT_GAP_SECS: f64 = 1.0;

/// Gap threshold in microseconds.
pub fn gap_micros(gap_secs: f64) -> u64 {
    (gap_secs * 1e6).round() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEpisode {
    pub client: MacAddr,
    pub preqs: Vec<Frame>,
    pub start: Timestamp,
    pub end: Timestamp,
    /// Probe responses addressed to the client from `start` until one gap
    /// threshold after `end`.
    pub presps: Vec<Frame>,
}

impl ScanEpisode {
    pub fn len(&self) -> usize {
        self.preqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preqs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub client: MacAddr,
    /// End of the previous episode, or capture start for the first window.
    pub start: Timestamp,
    /// Start of the episode this window precedes.
    pub end: Timestamp,
    pub frames: Vec<Frame>,
}

/// Groups timestamps (sorted ascending) into maximal runs whose consecutive
/// gaps are strictly below `gap_us`. Returns `(first, last)` index pairs.
pub fn group_runs(times: &[Timestamp], gap_us: u64) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut first = 0;
    for i in 1..=times.len() {
        let split = i == times.len() || times[i].saturating_sub(times[i - 1]) >= gap_us;
        if split && i > first {
            runs.push((first, i - 1));
            first = i;
        }
    }
    runs
}

fn is_presp_for(f: &Frame, client: MacAddr) -> bool {
    f.is(Subtype::ProbeResponse) && f.receiver == client
}

pub fn segment_episodes(timeline: &ClientTimeline, gap_secs: f64) -> Vec<ScanEpisode> {
    assert!(gap_secs > 0.0, "gap threshold must be positive");
    let gap_us = gap_micros(gap_secs);
    let client = timeline.client;
    let preqs: Vec<&Frame> = timeline.probe_requests().collect();
    let times: Vec<Timestamp> = preqs.iter().map(|f| f.timestamp).collect();
    let runs = group_runs(&times, gap_us);

    let frames = &timeline.frames;
    let mut episodes = Vec::with_capacity(runs.len());
    for (k, &(a, b)) in runs.iter().enumerate() {
        let start = times[a];
        let end = times[b];
        let limit = end.add_micros(gap_us);
        let next_start = runs.get(k + 1).map(|&(n, _)| times[n]);
        let lo = frames.partition_point(|f| f.timestamp < start);
        let presps = frames[lo..]
            .iter()
            .take_while(|f| f.timestamp < limit && next_start.is_none_or(|n| f.timestamp < n))
            .filter(|f| is_presp_for(f, client))
            .cloned()
            .collect();
        episodes.push(ScanEpisode {
            client,
            preqs: preqs[a..=b].iter().map(|&f| f.clone()).collect(),
            start,
            end,
            presps,
        });
    }
    episodes
}

/// One window per episode. Probe responses already attached to the previous
/// episode are not repeated in the window.
pub fn windows(episodes: &[ScanEpisode], timeline: &ClientTimeline) -> Vec<Window> {
    let client = timeline.client;
    let frames = &timeline.frames;
    let mut out = Vec::with_capacity(episodes.len());
    for (i, ep) in episodes.iter().enumerate() {
        let (lo, start, attached_until) = match i.checked_sub(1).map(|p| &episodes[p]) {
            None => (0, Timestamp::ZERO, None),
            Some(prev) => {
                let lo = frames.partition_point(|f| f.timestamp <= prev.end);
                let last_attached = prev.presps.last().map(|f| f.timestamp);
                (lo, prev.end, last_attached)
            }
        };
        let hi = frames.partition_point(|f| f.timestamp < ep.start);
        let window_frames = frames[lo..hi.max(lo)]
            .iter()
            .filter(|f| {
                !(is_presp_for(f, client) && attached_until.is_some_and(|t| f.timestamp <= t))
            })
            .cloned()
            .collect();
        out.push(Window { client, start, end: ep.start, frames: window_frames });
    }
    out
}
