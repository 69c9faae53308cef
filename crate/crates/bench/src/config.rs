//! `key = value` solver settings files.
//!
//! ```text
//! # tighter tolerances
//! eps_opt = 1e-8
//! mode = alm
//! epsilon0 = auto
//! ```

use std::str::FromStr;

use pdalm::{Mode, SolverConfig};

use crate::error::{BenchError, Result};

/// One recognised setting with its parsed value.
#[derive(Debug, Clone, PartialEq)]
pub enum Setting {
    Mode(Mode),
    MuBarMin(f64),
    MuBarMax(f64),
    Beta(f64),
    Eta(f64),
    Theta(f64),
    Delta0(f64),
    /// `None` is `auto`.
    Epsilon0(Option<f64>),
    Tau0(f64),
    TauShrink(f64),
    TauFloor(f64),
    EpsOpt(f64),
    EpsFeas(f64),
    MaxOuter(usize),
    TimeLimit(f64),
    StrictFeasibilityCheck(bool),
    /// `None` is `auto`.
    Nu(Option<f64>),
    MaxInner(usize),
}

pub const KEYS: &[&str] = &[
    "mode",
    "mu_bar_min",
    "mu_bar_max",
    "beta",
    "eta",
    "theta",
    "delta0",
    "epsilon0",
    "tau0",
    "tau_shrink",
    "tau_floor",
    "eps_opt",
    "eps_feas",
    "max_outer",
    "time_limit_s",
    "strict_feasibility_check",
    "nu",
    "max_inner",
];

impl Setting {
    pub fn key(&self) -> &'static str {
        match self {
            Setting::Mode(_) => "mode",
            Setting::MuBarMin(_) => "mu_bar_min",
            Setting::MuBarMax(_) => "mu_bar_max",
            Setting::Beta(_) => "beta",
            Setting::Eta(_) => "eta",
            Setting::Theta(_) => "theta",
            Setting::Delta0(_) => "delta0",
            Setting::Epsilon0(_) => "epsilon0",
            Setting::Tau0(_) => "tau0",
            Setting::TauShrink(_) => "tau_shrink",
            Setting::TauFloor(_) => "tau_floor",
            Setting::EpsOpt(_) => "eps_opt",
            Setting::EpsFeas(_) => "eps_feas",
            Setting::MaxOuter(_) => "max_outer",
            Setting::TimeLimit(_) => "time_limit_s",
            Setting::StrictFeasibilityCheck(_) => "strict_feasibility_check",
            Setting::Nu(_) => "nu",
            Setting::MaxInner(_) => "max_inner",
        }
    }

    fn apply(&self, c: &mut SolverConfig) {
        match *self {
            Setting::Mode(v) => c.mode = v,
            Setting::MuBarMin(v) => c.mu_bar_min = v,
            Setting::MuBarMax(v) => c.mu_bar_max = v,
            Setting::Beta(v) => c.beta = v,
            Setting::Eta(v) => c.eta = v,
            Setting::Theta(v) => c.theta = v,
            Setting::Delta0(v) => c.delta0 = v,
            Setting::Epsilon0(v) => c.epsilon0 = v,
            Setting::Tau0(v) => c.tau0 = v,
            Setting::TauShrink(v) => c.tau_shrink = v,
            Setting::TauFloor(v) => c.tau_floor = v,
            Setting::EpsOpt(v) => c.eps_opt = v,
            Setting::EpsFeas(v) => c.eps_feas = v,
            Setting::MaxOuter(v) => c.max_outer = v,
            Setting::TimeLimit(v) => c.time_limit_s = v,
            Setting::StrictFeasibilityCheck(v) => c.strict_feasibility_check = v,
            Setting::Nu(v) => c.nu = v,
            Setting::MaxInner(v) => c.max_inner = v,
        }
    }

    /// Checks the value on its own. The `mu_bar` interval is only checked
    /// for finiteness here; its ordering is checked once all settings are
    /// known.
    fn check_domain(&self) -> std::result::Result<(), String> {
        match *self {
            Setting::MuBarMin(v) | Setting::MuBarMax(v) => {
                if v.is_finite() {
                    Ok(())
                } else {
                    Err(format!("{} must be finite, got {v}", self.key()))
                }
            }
            _ => {
                let mut probe = SolverConfig::default();
                self.apply(&mut probe);
                probe.validate().map_err(|e| match e {
                    pdalm::Error::InvalidParameter(msg) => msg,
                    other => other.to_string(),
                })
            }
        }
    }
}

fn parse_value<T: FromStr>(raw: &str, what: &str) -> std::result::Result<T, String> {
    raw.parse()
        .map_err(|_| format!("expected {what}, got `{raw}`"))
}

fn parse_auto(raw: &str) -> std::result::Result<Option<f64>, String> {
    if raw == "auto" {
        Ok(None)
    } else {
        parse_value(raw, "a number or `auto`").map(Some)
    }
}

fn parse_setting(key: &str, raw: &str) -> Option<std::result::Result<Setting, String>> {
    let real = |f: fn(f64) -> Setting| parse_value::<f64>(raw, "a number").map(f);
    let count = |f: fn(usize) -> Setting| parse_value::<usize>(raw, "a non-negative integer").map(f);
    let parsed = match key {
        "mode" => Mode::from_str(raw)
            .map(Setting::Mode)
            .map_err(|_| format!("expected `pdalm` or `alm`, got `{raw}`")),
        "mu_bar_min" => real(Setting::MuBarMin),
        "mu_bar_max" => real(Setting::MuBarMax),
        "beta" => real(Setting::Beta),
        "eta" => real(Setting::Eta),
        "theta" => real(Setting::Theta),
        "delta0" => real(Setting::Delta0),
        "epsilon0" => parse_auto(raw).map(Setting::Epsilon0),
        "tau0" => real(Setting::Tau0),
        "tau_shrink" => real(Setting::TauShrink),
        "tau_floor" => real(Setting::TauFloor),
        "eps_opt" => real(Setting::EpsOpt),
        "eps_feas" => real(Setting::EpsFeas),
        "max_outer" => count(Setting::MaxOuter),
        "time_limit_s" => real(Setting::TimeLimit),
        "strict_feasibility_check" => parse_value::<bool>(raw, "`true` or `false`").map(Setting::StrictFeasibilityCheck),
        "nu" => parse_auto(raw).map(Setting::Nu),
        "max_inner" => count(Setting::MaxInner),
        _ => return None,
    };
    Some(parsed)
}

/// Settings read from a config file, in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub settings: Vec<Setting>,
}

impl ConfigOverrides {
    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&Setting> {
        self.settings.iter().find(|s| s.key() == key)
    }

    /// `base` with every setting applied, validated as a whole.
    pub fn apply(&self, base: &SolverConfig) -> Result<SolverConfig> {
        let mut config = base.clone();
        for s in &self.settings {
            s.apply(&mut config);
        }
        config.validate().map_err(|e| match e {
            pdalm::Error::InvalidParameter(msg) => BenchError::Config(msg),
            other => BenchError::Config(other.to_string()),
        })?;
        Ok(config)
    }
}

/// Parses a settings file. Blank lines and `#` comments are ignored; each
/// remaining line must be `key = value` with a known key, given at most
/// once.
pub fn parse_config(text: &str) -> Result<ConfigOverrides> {
    let mut out = ConfigOverrides::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let Some(eq) = content.find('=') else {
            return Err(BenchError::Parse {
                line,
                column: indent + 1,
                message: "expected `key = value`".into(),
            });
        };
        let key = content[..eq].trim();
        if key.is_empty() {
            return Err(BenchError::Parse {
                line,
                column: indent + 1,
                message: "missing key before `=`".into(),
            });
        }
        let after = &content[eq + 1..];
        let value = after.trim();
        let value_column = eq + 2 + (after.len() - after.trim_start().len());
        if value.is_empty() {
            return Err(BenchError::Parse {
                line,
                column: value_column,
                message: format!("missing value for `{key}`"),
            });
        }
        let setting = match parse_setting(key, value) {
            None => {
                return Err(BenchError::Parse {
                    line,
                    column: indent + 1,
                    message: format!("unknown key `{key}`"),
                })
            }
            Some(Err(message)) => {
                return Err(BenchError::Parse {
                    line,
                    column: value_column,
                    message: format!("{key}: {message}"),
                })
            }
            Some(Ok(s)) => s,
        };
        if out.get(setting.key()).is_some() {
            return Err(BenchError::Parse {
                line,
                column: indent + 1,
                message: format!("`{key}` is set more than once"),
            });
        }
        setting
            .check_domain()
            .map_err(|message| BenchError::Domain { line, message })?;
        out.settings.push(setting);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_override() {
        let o = parse_config("beta = 0.25").unwrap();
        assert_eq!(o.settings, vec![Setting::Beta(0.25)]);
        assert_eq!(o.apply(&SolverConfig::default()).unwrap().beta, 0.25);
    }

    #[test]
    fn beta_out_of_range_is_named() {
        let err = parse_config("beta = 1.5").unwrap_err();
        assert!(matches!(err, BenchError::Domain { line: 1, .. }));
        assert!(err.to_string().contains("beta must lie in (0,1)"), "{err}");
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let err = parse_config("# header\n\nunknown_key = 3\n").unwrap_err();
        match &err {
            BenchError::Parse { line, column, message } => {
                assert_eq!((*line, *column), (3, 1));
                assert!(message.contains("unknown_key"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn comments_blanks_and_auto() {
        let text = "\
# solver settings
mode = alm          # baseline
  epsilon0 = auto
nu = 1e-7
strict_feasibility_check = false
max_outer = 50
";
        let o = parse_config(text).unwrap();
        let c = o.apply(&SolverConfig::default()).unwrap();
        assert_eq!(c.mode, Mode::Alm);
        assert_eq!(c.epsilon0, None);
        assert_eq!(c.nu, Some(1e-7));
        assert!(!c.strict_feasibility_check);
        assert_eq!(c.max_outer, 50);
    }

    #[test]
    fn bad_value_points_at_value_column() {
        let err = parse_config("eta =  abc").unwrap_err();
        match err {
            BenchError::Parse { line, column, message } => {
                assert_eq!((line, column), (1, 8));
                assert!(message.contains("eta"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_equals_and_duplicates() {
        assert!(matches!(
            parse_config("beta 0.5").unwrap_err(),
            BenchError::Parse { line: 1, column: 1, .. }
        ));
        assert!(matches!(
            parse_config("beta = 0.5\nbeta = 0.6").unwrap_err(),
            BenchError::Parse { line: 2, .. }
        ));
        assert!(matches!(
            parse_config("max_outer = -3").unwrap_err(),
            BenchError::Parse { line: 1, .. }
        ));
    }

    #[test]
    fn multiplier_interval_checked_as_a_whole() {
        let o = parse_config("mu_bar_min = 5\nmu_bar_max = 1").unwrap();
        let err = o.apply(&SolverConfig::default()).unwrap_err();
        assert!(err.to_string().contains("mu_bar_min"));
        assert!(parse_config("mu_bar_max = inf").is_err());
    }

    #[test]
    fn every_key_is_recognised() {
        for key in KEYS {
            let value = match *key {
                "mode" => "pdalm",
                "strict_feasibility_check" => "true",
                "max_outer" | "max_inner" => "10",
                "mu_bar_min" => "-1",
                "epsilon0" | "nu" => "auto",
                _ => "0.5",
            };
            let o = parse_config(&format!("{key} = {value}")).unwrap();
            assert_eq!(o.settings[0].key(), *key);
        }
    }
}
