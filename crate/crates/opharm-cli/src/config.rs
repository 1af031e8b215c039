//! Experiment configuration, mirrored one-to-one by the JSON config files.

use opharm_core::error::{Error, Result};
use opharm_core::scale::ScaleGrid;
use opharm_core::symbols::RadialSymbol;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    HardyEquiv,
    HardyEquivDiscrete,
    Carleson,
    BmoPoisson,
    RadialConic,
    QtHardy,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Domain(format!("unknown experiment kind `{s}`")))
    }

    pub fn label(&self) -> &'static str {
        match self {
            ExperimentKind::HardyEquiv => "hardy_equiv",
            ExperimentKind::HardyEquivDiscrete => "hardy_equiv_discrete",
            ExperimentKind::Carleson => "carleson",
            ExperimentKind::BmoPoisson => "bmo_poisson",
            ExperimentKind::RadialConic => "radial_conic",
            ExperimentKind::QtHardy => "qt_hardy",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScaleParams {
    /// Defaults to 1e-3 / band_m when absent.
    pub eps_min: Option<f64>,
    pub eps_max: f64,
    pub k: usize,
}

impl Default for ScaleParams {
    fn default() -> Self {
        ScaleParams {
            eps_min: None,
            eps_max: 8.0,
            k: 128,
        }
    }
}

fn default_p_list() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}

fn default_symbols() -> Vec<RadialSymbol> {
    vec![RadialSymbol::DPoisson]
}

fn default_corpus() -> usize {
    50
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub d: usize,
    pub n_axis: usize,
    pub n: usize,
    pub band_m: usize,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    #[serde(default = "default_symbols")]
    pub symbols: Vec<RadialSymbol>,
    #[serde(default)]
    pub scale: ScaleParams,
    /// Rational twist θ_21 = p/q for quantum runs.
    #[serde(default)]
    pub theta: Option<(i64, i64)>,
    #[serde(default = "default_corpus")]
    pub corpus_size: usize,
    #[serde(default)]
    pub zero_mean: bool,
    #[serde(default)]
    pub hermitian: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.band_m >= self.n_axis / 2 {
            return Err(Error::Domain(format!(
                "band_m = {} must stay below n_axis/2 = {}",
                self.band_m,
                self.n_axis / 2
            )));
        }
        if self.corpus_size < 1 {
            return Err(Error::Domain("corpus_size must be at least 1".into()));
        }
        if self.p_list.iter().any(|&p| p < 1.0) {
            return Err(Error::Domain("p_list entries must be >= 1".into()));
        }
        if self.kind == ExperimentKind::QtHardy && self.theta.is_none() {
            return Err(Error::Domain("qt_hardy experiments need a theta".into()));
        }
        Ok(())
    }

    pub fn scale_grid(&self) -> Result<ScaleGrid> {
        let eps_min = self
            .scale
            .eps_min
            .unwrap_or(1e-3 / self.band_m.max(1) as f64);
        ScaleGrid::new(eps_min, self.scale.eps_max, self.scale.k)
    }

    /// Desk-scale default for a given kind.
    pub fn desk_default(kind: ExperimentKind, seed: u64) -> Self {
        let (d, n_axis, n, band_m) = match kind {
            ExperimentKind::QtHardy => (2, 16, 1, 5),
            ExperimentKind::BmoPoisson => (1, 32, 2, 7),
            _ => (1, 32, 2, 10),
        };
        ExperimentConfig {
            kind,
            seed,
            d,
            n_axis,
            n,
            band_m,
            p_list: default_p_list(),
            symbols: default_symbols(),
            scale: ScaleParams::default(),
            theta: if kind == ExperimentKind::QtHardy {
                Some((1, 3))
            } else {
                None
            },
            corpus_size: default_corpus(),
            zero_mean: true,
            hermitian: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_field_names_round_trip() {
        let cfg = ExperimentConfig::desk_default(ExperimentKind::HardyEquiv, 7);
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(s.contains("\"band_m\""));
        assert!(s.contains("\"corpus_size\""));
        let back: ExperimentConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back.seed, 7);
        assert_eq!(back.kind, ExperimentKind::HardyEquiv);
    }

    #[test]
    fn validation_catches_bad_band() {
        let mut cfg = ExperimentConfig::desk_default(ExperimentKind::HardyEquiv, 0);
        cfg.band_m = 16;
        assert!(cfg.validate().is_err());
        cfg.band_m = 10;
        cfg.corpus_size = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(
            ExperimentKind::parse("hardy_equiv").unwrap(),
            ExperimentKind::HardyEquiv
        );
        assert_eq!(
            ExperimentKind::parse("qt_hardy").unwrap(),
            ExperimentKind::QtHardy
        );
        assert!(ExperimentKind::parse("nope").is_err());
    }
}
