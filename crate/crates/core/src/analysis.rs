//! Capture-to-labels pipeline: per-client segmentation and cause inference.

use serde::{Deserialize, Serialize};

use crate::capture::{client_streams, BeaconIndex, ClientTimeline};
use crate::causes::{infer_cause, update_association, AssociationState, CauseLabel, Evidence, Thresholds};
use crate::frame::{Frame, MacAddr, Timestamp};
use crate::par::{self, Execution};
use crate::segmentation::{segment_episodes, windows, ScanEpisode};

/// Summary of one labelled episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledEpisode {
    pub client: MacAddr,
    pub start: Timestamp,
    pub end: Timestamp,
    pub preqs: usize,
    pub presps: usize,
    pub label: CauseLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientAnalysis {
    pub client: MacAddr,
    pub episodes: Vec<ScanEpisode>,
    pub labels: Vec<CauseLabel>,
}

impl ClientAnalysis {
    pub fn labeled(&self) -> impl Iterator<Item = LabeledEpisode> + '_ {
        self.episodes.iter().zip(&self.labels).map(|(e, &label)| LabeledEpisode {
            client: e.client,
            start: e.start,
            end: e.end,
            preqs: e.preqs.len(),
            presps: e.presps.len(),
            label,
        })
    }
}

/// Segments one timeline and labels each episode.
pub fn analyze_client(
    timeline: &ClientTimeline,
    beacons: &BeaconIndex,
    thresholds: &Thresholds,
) -> ClientAnalysis {
    let episodes = segment_episodes(timeline, thresholds.gap_threshold_s);
    let wins = windows(&episodes, timeline);
    let client = timeline.client;

    let mut state = AssociationState::unassociated();
    let mut cursor = 0;
    let mut labels = Vec::with_capacity(episodes.len());
    for (i, (ep, win)) in episodes.iter().zip(&wins).enumerate() {
        if i > 0 {
            // Fold everything up to and including the previous episode.
            let bound = episodes[i - 1].end;
            while cursor < timeline.frames.len() && timeline.frames[cursor].timestamp <= bound {
                state = update_association(state, &timeline.frames[cursor], client);
                cursor += 1;
            }
        }
        let ev = Evidence { episode: ep, window: win, state_at_window_start: state, beacons };
        labels.push(infer_cause(&ev, thresholds));
    }
    ClientAnalysis { client, episodes, labels }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub clients: Vec<ClientAnalysis>,
}

impl Analysis {
    pub fn labels(&self) -> Vec<CauseLabel> {
        self.clients.iter().flat_map(|c| c.labels.iter().copied()).collect()
    }

    pub fn labeled(&self) -> Vec<LabeledEpisode> {
        self.clients.iter().flat_map(|c| c.labeled()).collect()
    }

    pub fn episodes_of(&self, client: MacAddr) -> &[ScanEpisode] {
        self.clients
            .iter()
            .find(|c| c.client == client)
            .map(|c| c.episodes.as_slice())
            .unwrap_or(&[])
    }
}

/// Runs the whole pipeline over a time-sorted capture. Clients are analysed
/// independently; results are ordered by client MAC.
pub fn analyze_frames(frames: &[Frame], thresholds: &Thresholds, exec: Execution) -> Analysis {
    let beacons = BeaconIndex::build(frames);
    let timelines: Vec<ClientTimeline> = client_streams(frames).into_values().collect();
    let clients = par::map(exec, &timelines, |tl| analyze_client(tl, &beacons, thresholds));
    Analysis { clients }
}
