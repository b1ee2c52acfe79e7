use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::book::ReplayConfig;
use crate::dfa::{Band, DailyAlphaConfig, DfaOptions, FitBand, FitRange};
use crate::durations::{DurationConfig, Variable};
use crate::econ::RvConfig;
use crate::ingest::{parse_clock, SessionWindow, Side};

/// Full pipeline configuration, read from TOML.
///
/// ```toml
/// seed = 7
///
/// [input]
/// paths = ["data"]
/// stocks = []
///
/// [sessions.default]
/// open = "07:00"
/// close = "15:30"
/// trim_minutes = 30
///
/// [durations]
/// variables = ["or-or", "tr-tr", "ca-ca", "or-tr", "or-ca"]
/// sides = ["bid", "ask"]
/// best_only = ["ca-ca"]
/// drop_zeros = false
/// deletes_are_cancels = true
///
/// [dfa]
/// order = 1
/// fit_band = "full"
///
/// [econ]
/// grid_seconds = 300
/// n_offsets = 30
///
/// [output]
/// dir = "out"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub input: InputConfig,
    /// Session windows by exchange name. A stock uses the first window that
    /// lists it, otherwise the window named `default`.
    pub sessions: BTreeMap<String, SessionConfig>,
    pub durations: DurationsSection,
    pub dfa: DfaSection,
    pub econ: RvConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            input: InputConfig::default(),
            sessions: [("default".to_string(), SessionConfig::default())]
                .into_iter()
                .collect(),
            durations: DurationsSection::default(),
            dfa: DfaSection::default(),
            econ: RvConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InputConfig {
    /// Log files, or directories scanned for `<stock>_<yyyymmdd>.(csv|lob)`.
    pub paths: Vec<PathBuf>,
    /// Restrict to these stocks; empty means all.
    pub stocks: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionConfig {
    pub open: String,
    pub close: String,
    pub trim_minutes: u32,
    pub stocks: Vec<String>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            open: "07:00".into(),
            close: "15:30".into(),
            trim_minutes: 30,
            stocks: Vec::new(),
        }
    }
}

impl SessionConfig {
    pub fn window(&self) -> Result<SessionWindow, String> {
        SessionWindow::new(
            parse_clock(&self.open)?,
            parse_clock(&self.close)?,
            self.trim_minutes * 60_000,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DurationsSection {
    pub variables: Vec<Variable>,
    pub sides: Vec<Side>,
    pub best_only: BTreeSet<Variable>,
    pub drop_zeros: bool,
    pub deletes_are_cancels: bool,
}

impl Default for DurationsSection {
    fn default() -> Self {
        let d = DurationConfig::default();
        Self {
            variables: Variable::ALL.to_vec(),
            sides: Side::BOTH.to_vec(),
            best_only: d.best_only,
            drop_zeros: d.drop_zeros,
            deletes_are_cancels: ReplayConfig::default().deletes_are_cancels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DfaSection {
    pub order: usize,
    pub both_ends: bool,
    pub min_scale: usize,
    pub scales_per_decade: usize,
    /// Shortest daily series given a daily exponent.
    pub min_length: usize,
    pub fit_band: FitBand,
    /// `[lo, hi]` normalized-scale bands for the three local exponents.
    pub bands: BandsSection,
}

impl Default for DfaSection {
    fn default() -> Self {
        let d = DailyAlphaConfig::default();
        Self {
            order: d.dfa.order,
            both_ends: d.dfa.both_ends,
            min_scale: d.min_scale,
            scales_per_decade: d.scales_per_decade,
            min_length: d.min_length,
            fit_band: d.fit_band,
            bands: BandsSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandsSection {
    pub alpha1: [f64; 2],
    pub alpha2: [f64; 2],
    pub alpha3: [f64; 2],
}

impl Default for BandsSection {
    fn default() -> Self {
        let r = |b: Band| [b.range().lo, b.range().hi];
        Self {
            alpha1: r(Band::Intraday),
            alpha2: r(Band::Day),
            alpha3: r(Band::Month),
        }
    }
}

impl BandsSection {
    pub fn ranges(&self) -> [FitRange; 3] {
        [self.alpha1, self.alpha2, self.alpha3].map(|[lo, hi]| FitRange::new(lo, hi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Cache replays and duration series under `<dir>/cache`.
    pub cache: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            cache: true,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ReportError> {
        toml::from_str(text).map_err(|e| ReportError::Config(e.to_string()))
    }

    /// Load a config file; relative input and output paths resolve against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ReportError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in &mut cfg.input.paths {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if cfg.output.dir.is_relative() {
            cfg.output.dir = base.join(&cfg.output.dir);
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn replay_config(&self) -> ReplayConfig {
        ReplayConfig {
            deletes_are_cancels: self.durations.deletes_are_cancels,
        }
    }

    pub fn duration_config(&self) -> DurationConfig {
        DurationConfig {
            best_only: self.durations.best_only.clone(),
            drop_zeros: self.durations.drop_zeros,
        }
    }

    pub fn daily_alpha_config(&self) -> DailyAlphaConfig {
        DailyAlphaConfig {
            min_length: self.dfa.min_length,
            min_scale: self.dfa.min_scale,
            scales_per_decade: self.dfa.scales_per_decade,
            dfa: DfaOptions {
                order: self.dfa.order,
                both_ends: self.dfa.both_ends,
            },
            fit_band: self.dfa.fit_band,
        }
    }

    pub fn session_for(&self, stock: &str) -> Result<SessionWindow, ReportError> {
        let chosen = self
            .sessions
            .values()
            .find(|s| s.stocks.iter().any(|x| x == stock))
            .or_else(|| self.sessions.get("default"))
            .ok_or_else(|| {
                ReportError::Config(format!("no session window for stock `{stock}` and no `default`"))
            })?;
        chosen.window().map_err(ReportError::Config)
    }

    /// Structural checks that do not touch the filesystem.
    pub fn validate(&self) -> Result<(), ReportError> {
        let err = |m: String| Err(ReportError::Config(m));
        for (name, s) in &self.sessions {
            if let Err(e) = s.window() {
                return err(format!("session `{name}`: {e}"));
            }
        }
        if self.durations.variables.is_empty() || self.durations.sides.is_empty() {
            return err("at least one variable and one side are required".into());
        }
        self.daily_alpha_config()
            .dfa
            .validate()
            .map_err(|e| ReportError::Config(e.to_string()))?;
        if self.dfa.min_scale < self.daily_alpha_config().dfa.min_scale() {
            return err(format!(
                "min_scale {} is too small for order {}",
                self.dfa.min_scale, self.dfa.order
            ));
        }
        if self.dfa.scales_per_decade == 0 {
            return err("scales_per_decade must be positive".into());
        }
        for (i, r) in self.dfa.bands.ranges().iter().enumerate() {
            if !(r.lo.is_finite() && r.hi.is_finite() && 0.0 <= r.lo && r.lo < r.hi) {
                return err(format!("band alpha{} must satisfy 0 <= lo < hi", i + 1));
            }
        }
        self.econ
            .validate()
            .map_err(|e| ReportError::Config(e.to_string()))?;
        if self.input.paths.is_empty() {
            return err("input.paths is empty".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = RunConfig::from_toml_str(
            "[input]\npaths = [\"d\"]\n[durations]\nvariables = [\"tr-tr\"]\ndrop_zeros = true\n[dfa]\nfit_band = \"intra\"\n",
        )
        .unwrap();
        assert_eq!(cfg.durations.variables, vec![Variable::TrTr]);
        assert!(cfg.durations.drop_zeros);
        assert!(cfg.durations.deletes_are_cancels);
        assert_eq!(cfg.dfa.fit_band, FitBand::Intra);
        assert_eq!(cfg.econ, RvConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_toml_str("[dfa]\nordr = 2\n").is_err());
        let mut cfg = RunConfig {
            input: InputConfig {
                paths: vec!["x".into()],
                stocks: vec![],
            },
            ..RunConfig::default()
        };
        cfg.dfa.bands.alpha2 = [3.0, 0.3];
        assert!(cfg.validate().is_err());
        cfg.dfa.bands = BandsSection::default();
        cfg.dfa.order = 4;
        assert!(cfg.validate().is_err());
        cfg.dfa.order = 1;
        cfg.sessions.get_mut("default").unwrap().trim_minutes = 500;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn per_exchange_sessions() {
        let cfg = RunConfig::from_toml_str(
            "[sessions.default]\nopen = \"07:00\"\nclose = \"15:30\"\n\
             [sessions.stockholm]\nopen = \"08:00\"\nclose = \"16:30\"\nstocks = [\"ERIC\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.session_for("ERIC").unwrap().start(), 8 * 3_600_000 + 1_800_000);
        assert_eq!(cfg.session_for("NOK").unwrap().start(), 7 * 3_600_000 + 1_800_000);
    }
}
