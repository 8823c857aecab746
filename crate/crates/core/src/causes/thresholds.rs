use serde::{Deserialize, Serialize};

/// Inference rules other than the periodic fallback.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    ConnectionEstablishment,
    ApSideProcedures,
    LossOfBeacons,
    DataFrameLosses,
    LowRssi,
    PowerStateLowToHigh,
}

impl Rule {
    pub const DEFAULT_ORDER: [Rule; 6] = [
        Rule::ConnectionEstablishment,
        Rule::ApSideProcedures,
        Rule::LossOfBeacons,
        Rule::DataFrameLosses,
        Rule::LowRssi,
        Rule::PowerStateLowToHigh,
    ];
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThresholdsError {
    #[error("invalid thresholds file: {0}")]
    Parse(String),
    #[error("threshold `{0}` must be positive and finite")]
    NotPositive(&'static str),
    #[error("loss_fraction must lie in (0, 1], got {0}")]
    LossFraction(f64),
    #[error("precedence must list each of the six rules exactly once")]
    Precedence,
}

/// Numeric knobs of the inference rules. Defaults are the empirically
/// derived values the rule set was designed around.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub rssi_mean_dbm: f64,
    pub rssi_std_db: f64,
    /// Retry, unacknowledged-data and rate-reduction fraction.
    pub loss_fraction: f64,
    pub beacon_count: u32,
    pub nominal_beacon_interval_ms: f64,
    /// Frames per second below which a client counts as low power.
    pub low_rate_fps: f64,
    pub gap_threshold_s: f64,
    /// Longest delay after a data frame at which an ACK still counts.
    pub ack_timeout_ms: f64,
    pub precedence: Vec<Rule>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            rssi_mean_dbm: -72.0,
            rssi_std_db: 12.0,
            loss_fraction: 0.50,
            beacon_count: 7,
            nominal_beacon_interval_ms: 103.0,
            low_rate_fps: 2.0,
            gap_threshold_s: 1.0,
            ack_timeout_ms: 1.0,
            precedence: Rule::DEFAULT_ORDER.to_vec(),
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), ThresholdsError> {
        let positive = [
            ("rssi_std_db", self.rssi_std_db),
            ("loss_fraction", self.loss_fraction),
            ("beacon_count", self.beacon_count as f64),
            ("nominal_beacon_interval_ms", self.nominal_beacon_interval_ms),
            ("low_rate_fps", self.low_rate_fps),
            ("gap_threshold_s", self.gap_threshold_s),
            ("ack_timeout_ms", self.ack_timeout_ms),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ThresholdsError::NotPositive(name));
            }
        }
        // A signal level is negative in dBm; only finiteness is required.
        if !self.rssi_mean_dbm.is_finite() {
            return Err(ThresholdsError::NotPositive("rssi_mean_dbm"));
        }
        if self.loss_fraction > 1.0 {
            return Err(ThresholdsError::LossFraction(self.loss_fraction));
        }
        let mut seen = self.precedence.clone();
        seen.sort_by_key(|r| Rule::DEFAULT_ORDER.iter().position(|d| d == r));
        seen.dedup();
        if seen.len() != 6 || self.precedence.len() != 6 {
            return Err(ThresholdsError::Precedence);
        }
        Ok(())
    }

    /// Parses `key = value` TOML; missing keys keep their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self, ThresholdsError> {
        let t: Thresholds = toml::from_str(text).map_err(|e| ThresholdsError::Parse(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("thresholds serialize")
    }
}
