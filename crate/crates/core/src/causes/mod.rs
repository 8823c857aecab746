//! Association tracking and cause inference for scanning episodes.

mod association;
pub(crate) mod rules;
mod thresholds;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use association::{update_association, AssociationState, AssociationStatus};
pub use rules::{infer_cause, Evidence};
pub use thresholds::{Rule, Thresholds, ThresholdsError};

/// The eight outcomes of cause inference, in report-row order.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum CauseLabel {
    PeriodicScanUnassociated,
    PeriodicScanAssociated,
    ConnectionEstablishment,
    PowerStateLowToHigh,
    LossOfBeacons,
    ApSideProcedures,
    LowRssi,
    DataFrameLosses,
}

impl CauseLabel {
    pub const ALL: [CauseLabel; 8] = [
        CauseLabel::PeriodicScanUnassociated,
        CauseLabel::PeriodicScanAssociated,
        CauseLabel::ConnectionEstablishment,
        CauseLabel::PowerStateLowToHigh,
        CauseLabel::LossOfBeacons,
        CauseLabel::ApSideProcedures,
        CauseLabel::LowRssi,
        CauseLabel::DataFrameLosses,
    ];

    pub fn title(self) -> &'static str {
        match self {
            CauseLabel::PeriodicScanUnassociated => "Periodic Scan (Unassociated)",
            CauseLabel::PeriodicScanAssociated => "Periodic Scan (Associated)",
            CauseLabel::ConnectionEstablishment => "Connection Establishment",
            CauseLabel::PowerStateLowToHigh => "Power State: Low to High",
            CauseLabel::LossOfBeacons => "Loss of Beacons",
            CauseLabel::ApSideProcedures => "AP-side Procedures",
            CauseLabel::LowRssi => "Low RSSI",
            CauseLabel::DataFrameLosses => "Data Frame Losses",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            CauseLabel::PeriodicScanUnassociated => "periodic-scan-unassociated",
            CauseLabel::PeriodicScanAssociated => "periodic-scan-associated",
            CauseLabel::ConnectionEstablishment => "connection-establishment",
            CauseLabel::PowerStateLowToHigh => "power-state-low-to-high",
            CauseLabel::LossOfBeacons => "loss-of-beacons",
            CauseLabel::ApSideProcedures => "ap-side-procedures",
            CauseLabel::LowRssi => "low-rssi",
            CauseLabel::DataFrameLosses => "data-frame-losses",
        }
    }

    /// Causes that can only occur while the client holds a connection.
    pub fn requires_association(self) -> bool {
        matches!(
            self,
            CauseLabel::PowerStateLowToHigh
                | CauseLabel::LossOfBeacons
                | CauseLabel::LowRssi
                | CauseLabel::DataFrameLosses
        )
    }

    pub fn periodic(associated: bool) -> CauseLabel {
        if associated {
            CauseLabel::PeriodicScanAssociated
        } else {
            CauseLabel::PeriodicScanUnassociated
        }
    }
}

impl fmt::Display for CauseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.title())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DistributionError {
    #[error("cannot build a distribution from zero labels")]
    EmptyInput,
}

/// Share of each label in percent. Every label appears as a key.
pub fn cause_distribution(
    labels: &[CauseLabel],
) -> Result<BTreeMap<CauseLabel, f64>, DistributionError> {
    if labels.is_empty() {
        return Err(DistributionError::EmptyInput);
    }
    let mut counts: BTreeMap<CauseLabel, usize> = CauseLabel::ALL.iter().map(|&c| (c, 0)).collect();
    for &l in labels {
        *counts.get_mut(&l).unwrap() += 1;
    }
    let n = labels.len() as f64;
    Ok(counts.into_iter().map(|(c, k)| (c, k as f64 * 100.0 / n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_arithmetic() {
        use CauseLabel::*;
        let d = cause_distribution(&[
            PeriodicScanAssociated,
            PeriodicScanAssociated,
            LowRssi,
            PowerStateLowToHigh,
        ])
        .unwrap();
        assert_eq!(d[&PeriodicScanAssociated], 50.0);
        assert_eq!(d[&LowRssi], 25.0);
        assert_eq!(d[&PowerStateLowToHigh], 25.0);
        assert_eq!(d[&DataFrameLosses], 0.0);
        assert_eq!(d.len(), 8);
        let total: f64 = d.values().sum();
        assert!((total - 100.0).abs() < 0.01);
    }

    #[test]
    fn single_label_distribution_and_empty_input() {
        let d = cause_distribution(&[CauseLabel::LossOfBeacons; 7]).unwrap();
        assert_eq!(d[&CauseLabel::LossOfBeacons], 100.0);
        assert_eq!(cause_distribution(&[]), Err(DistributionError::EmptyInput));
    }

    #[test]
    fn thirds_sum_to_hundred() {
        use CauseLabel::*;
        let d = cause_distribution(&[LowRssi, LossOfBeacons, ApSideProcedures]).unwrap();
        let total: f64 = d.values().sum();
        assert!((total - 100.0).abs() < 0.01);
    }
}
