//! Run configuration: a JSON document selecting the game, tolerances, seed
//! and per-command options. See `docs/config.md` for the schema.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cournot::{build_game, CournotParams};
use crate::dsl::parse_expression;
use crate::error::{Error, Result};
use crate::game::{
    validate_group1_symmetry, validate_zero_sum, ExprPayoff, GameDefinition, Payoff,
    StrategyInterval, SYMMETRY_TOL, ZERO_SUM_TOL,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomGame {
    pub n: usize,
    pub group1_interval: [f64; 2],
    pub alien_interval: [f64; 2],
    /// One expression per player, player 1 first; the alien is last.
    pub payoffs: Vec<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameSource {
    Cournot4(CournotParams),
    Custom(CustomGame),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Inner golden-section tolerance; also used for best responses.
    pub xtol: f64,
    /// Outer tolerance of nested optimizations.
    pub outer_xtol: f64,
    pub value_tol: f64,
    pub nash_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            xtol: 1e-9,
            outer_xtol: 1e-7,
            value_tol: 1e-6,
            nash_tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommandOptions {
    /// Common group-1 pinning for `maximin`; the Nash group-1 strategy when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pinning: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_group1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_alien: Option<f64>,
    pub damping: f64,
    pub max_iter: usize,
    pub validation_samples: usize,
}

impl Default for CommandOptions {
    fn default() -> Self {
        Self {
            pinning: None,
            init_group1: None,
            init_alien: None,
            damping: 0.5,
            max_iter: 2000,
            validation_samples: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub game: GameSource,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub options: CommandOptions,
    /// Non-fatal findings from validation (division nodes, ...).
    #[serde(skip)]
    pub warnings: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    #[serde(default)]
    cournot4: Option<CournotParams>,
    #[serde(default)]
    custom: Option<CustomGame>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    game: RawGame,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    options: CommandOptions,
}

pub const DEFAULT_SEED: u64 = 42;

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Config(format!("at `{path}`: {}", e.into_inner()))
    })?;
    let game = match (raw.game.cournot4, raw.game.custom) {
        (Some(p), None) => GameSource::Cournot4(p),
        (None, Some(c)) => GameSource::Custom(c),
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "at `game`: exactly one of `cournot4` or `custom` must be given, found both".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Config(
                "at `game`: exactly one of `cournot4` or `custom` must be given".into(),
            ))
        }
    };
    let mut cfg = RunConfig {
        game,
        tolerances: raw.tolerances,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        options: raw.options,
        warnings: Vec::new(),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&mut self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [
            ("xtol", t.xtol),
            ("outer_xtol", t.outer_xtol),
            ("value_tol", t.value_tol),
            ("nash_tol", t.nash_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("at `tolerances.{name}`: must be positive, got {v}")));
            }
        }
        if t.xtol > t.outer_xtol / 100.0 * (1.0 + 1e-9) {
            return Err(Error::Config(format!(
                "at `tolerances.xtol`: must be at least 100x tighter than outer_xtol ({} vs {})",
                t.xtol, t.outer_xtol
            )));
        }
        let o = &self.options;
        if !(o.damping > 0.0 && o.damping <= 1.0) {
            return Err(Error::Config(format!("at `options.damping`: must lie in (0, 1], got {}", o.damping)));
        }
        if o.max_iter == 0 || o.validation_samples == 0 {
            return Err(Error::Config("at `options`: max_iter and validation_samples must be at least 1".into()));
        }
        self.warnings.clear();
        let game = self.build_game()?;
        if let GameSource::Custom(_) = self.game {
            self.check_structure(&game)?;
        }
        Ok(())
    }

    fn check_structure(&self, game: &GameDefinition) -> Result<()> {
        let samples = self.options.validation_samples;
        let zs = validate_zero_sum(game, samples, self.seed).map_err(|e| Error::Config(format!("at `game.custom`: {e}")))?;
        if zs.max_deviation > ZERO_SUM_TOL {
            return Err(Error::Config(format!(
                "at `game.custom`: payoffs are not zero-sum; |sum| = {:e} at profile {:?}",
                zs.max_deviation,
                zs.worst_profile.as_slice()
            )));
        }
        let sym = validate_group1_symmetry(game, samples, self.seed)
            .map_err(|e| Error::Config(format!("at `game.custom`: {e}")))?;
        if sym.max_deviation > SYMMETRY_TOL {
            return Err(Error::Config(format!(
                "at `game.custom`: group 1 is not symmetric; deviation {:e} at profile {:?}",
                sym.max_deviation,
                sym.worst_profile.as_slice()
            )));
        }
        Ok(())
    }

    /// Builds the game; for custom games this parses every payoff.
    pub fn build_game(&mut self) -> Result<GameDefinition> {
        match &self.game {
            GameSource::Cournot4(p) => {
                build_game(p).map_err(|e| Error::Config(format!("at `game.cournot4`: {e}")))
            }
            GameSource::Custom(c) => {
                let (game, warnings) = build_custom(c)?;
                self.warnings.extend(warnings);
                Ok(game)
            }
        }
    }

    pub fn is_cournot(&self) -> Option<&CournotParams> {
        match &self.game {
            GameSource::Cournot4(p) => Some(p),
            GameSource::Custom(_) => None,
        }
    }
}

fn build_custom(c: &CustomGame) -> Result<(GameDefinition, Vec<String>)> {
    if c.n < 3 {
        return Err(Error::Config(format!("at `game.custom.n`: need at least 3 players, got {}", c.n)));
    }
    if c.payoffs.len() != c.n {
        return Err(Error::Config(format!(
            "at `game.custom.payoffs`: expected {} expressions, got {}",
            c.n,
            c.payoffs.len()
        )));
    }
    let interval = |name: &str, iv: [f64; 2]| {
        StrategyInterval::new(iv[0], iv[1]).map_err(|e| Error::Config(format!("at `game.custom.{name}`: {e}")))
    };
    let group1 = interval("group1_interval", c.group1_interval)?;
    let alien = interval("alien_interval", c.alien_interval)?;
    let names: BTreeSet<String> = c.params.keys().cloned().collect();
    let mut warnings = Vec::new();
    let mut payoffs: Vec<Arc<dyn Payoff>> = Vec::with_capacity(c.n);
    for (k, src) in c.payoffs.iter().enumerate() {
        let expr = parse_expression(src, c.n, &names)
            .map_err(|e| Error::Config(format!("at `game.custom.payoffs[{k}]`: {e}")))?;
        if expr.contains_division() {
            warnings.push(format!("payoff {} contains a division; evaluation may fault", k + 1));
        }
        let payoff = ExprPayoff::new(expr, &c.params)
            .map_err(|e| Error::Config(format!("at `game.custom.payoffs[{k}]`: {e}")))?;
        payoffs.push(Arc::new(payoff));
    }
    let label = c.label.clone().unwrap_or_else(|| format!("custom{}", c.n));
    Ok((GameDefinition::new(label, group1, alien, payoffs, true)?, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    const COURNOT: &str = r#"{"game": {"cournot4": {"a": 10, "c": [1, 1, 1, 2]}}}"#;

    #[test]
    fn minimal_cournot_with_defaults() {
        let cfg = parse_config(COURNOT).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.tolerances.value_tol, 1e-6);
        assert_eq!(cfg.tolerances.nash_tol, 1e-5);
        assert!(matches!(cfg.game, GameSource::Cournot4(p) if p.c == [1.0, 1.0, 1.0, 2.0]));
    }

    #[test]
    fn both_sources_rejected() {
        let text = r#"{"game": {"cournot4": {"a": 10, "c": [1,1,1,2]},
            "custom": {"n": 3, "group1_interval": [0,1], "alien_interval": [0,1], "payoffs": ["s1","s2","s3"]}}}"#;
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("found both"), "{err}");
        assert!(parse_config(r#"{"game": {}}"#).is_err());
    }

    #[test]
    fn schema_errors_carry_paths() {
        let err = parse_config(r#"{"game": {"cournot4": {"a": "ten", "c": [1,1,1,2]}}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("game.cournot4.a"), "{err}");
        let err = parse_config(r#"{"game": {"cournot4": {"a": 10, "c": [1,1,1,2]}}, "bogus": 1}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("bogus"), "{err}");
        let err = parse_config(r#"{"game": {"cournot4": {"a": 10, "c": [1,1,1,20]}}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("cournot4"), "{err}");
    }

    #[test]
    fn custom_zero_sum_failure_names_profile() {
        let text = r#"{"game": {"custom": {"n": 3, "group1_interval": [0,1], "alien_interval": [0,1],
            "payoffs": ["s1", "s2", "0"]}}}"#;
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("not zero-sum") && err.contains("profile ["), "{err}");
    }

    #[test]
    fn custom_payoff_parse_error_has_position() {
        let text = r#"{"game": {"custom": {"n": 3, "group1_interval": [0,1], "alien_interval": [0,1],
            "payoffs": ["s1 - s3", "s2 - (s3", "s3"]}}}"#;
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("payoffs[1]") && err.contains("offset 8"), "{err}");
    }

    #[test]
    fn custom_symmetric_game_loads() {
        let text = r#"{"game": {"custom": {"n": 3, "group1_interval": [0, 4], "alien_interval": [0, 4],
            "params": {"k": 2},
            "payoffs": ["s1*s3 - k*s1^2/2 - s2*s3 + k*s2^2/2",
                        "s2*s3 - k*s2^2/2 - s1*s3 + k*s1^2/2",
                        "0*s3"]}}}"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.warnings.len(), 2);
    }
}
