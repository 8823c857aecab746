use serde::{Deserialize, Serialize};

use crate::frame::{Frame, FrameKind, MacAddr, Subtype};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssociationStatus {
    Associated,
    Unassociated,
}

/// Association status of one client as seen from the sniffer.
///
/// Besides the link itself the state remembers which BSSIDs the client was
/// seen exchanging data with, so that a connection set up before the
/// capture began is still detected once traffic flows both ways.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct AssociationState {
    bssid: Option<MacAddr>,
    uplink: Option<MacAddr>,
    downlink: Option<MacAddr>,
}

impl AssociationState {
    pub fn unassociated() -> Self {
        Self::default()
    }

    pub fn associated(bssid: MacAddr) -> Self {
        AssociationState { bssid: Some(bssid), ..Self::default() }
    }

    pub fn status(&self) -> AssociationStatus {
        if self.bssid.is_some() {
            AssociationStatus::Associated
        } else {
            AssociationStatus::Unassociated
        }
    }

    pub fn is_associated(&self) -> bool {
        self.bssid.is_some()
    }

    pub fn current_bssid(&self) -> Option<MacAddr> {
        self.bssid
    }
}

/// Advances `state` by one frame of `client`'s timeline.
///
/// * a successful (re)association response addressed to the client links it
///   to the responding BSSID;
/// * data frames seen in both directions with one BSSID link the client to
///   that BSSID when it is not yet associated;
/// * deauthentication or disassociation from either side drops the link.
pub fn update_association(state: AssociationState, frame: &Frame, client: MacAddr) -> AssociationState {
    match frame.subtype {
        Subtype::Deauthentication | Subtype::Disassociation if frame.involves(client) => {
            AssociationState::unassociated()
        }
        Subtype::AssociationResponse | Subtype::ReassociationResponse
            if frame.receiver == client && frame.status_code == Some(0) =>
        {
            match frame.transmitter.or(frame.bssid) {
                Some(ap) => AssociationState::associated(ap),
                None => state,
            }
        }
        _ if frame.kind() == FrameKind::Data => {
            let Some(bssid) = frame.bssid else { return state };
            let mut next = state;
            if frame.sent_by(client) && frame.receiver == bssid {
                next.uplink = Some(bssid);
            } else if frame.receiver == client && frame.transmitter == Some(bssid) {
                next.downlink = Some(bssid);
            } else {
                return state;
            }
            if next.bssid.is_none() && next.uplink == Some(bssid) && next.downlink == Some(bssid) {
                next.bssid = Some(bssid);
            }
            next
        }
        _ => state,
    }
}
