//! Flat `key = value` configuration files.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' any*
//! entry   := key ws* '=' ws* value ws* ('#' any*)?
//! key     := [A-Za-z_][A-Za-z0-9_]*
//! value   := bare | '"' any-but-quote* '"'
//! ```
//!
//! Keys are case-sensitive and may appear at most once. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::CliError;

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "FTQC_CONFIG";

pub const KNOWN_KEYS: &[&str] = &[
    // problem
    "N",
    "M",
    "tau",
    "r",
    "p_ratio",
    "p_th",
    "t_phys",
    "p_inject",
    "strict_sk_budget",
    "trotter_mode",
    "k0_cap",
    "d_cap",
    "cycle_formula",
    // concatenated code
    "p_phys",
    "eps_threshold",
    "q_logical",
    "level_overhead_base",
    // net
    "net_cache_path",
    "net_max_len",
    "net_dedup_tol",
    "net_entry_budget",
    "build_net",
    // output and execution
    "out",
    "format",
    "jobs",
    // sweeps
    "sweep_M",
    "sweep_r",
    // compile
    "angle",
    "eps",
    "show_seq",
    // simulate
    "mode",
    "seed",
    "seeds",
    "k0",
    "overlap",
    "sk_eps",
];

/// Values loaded from a config file; command-line flags take precedence.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub source: Option<PathBuf>,
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str, source: Option<PathBuf>) -> Result<Self, CliError> {
        let origin = source
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "<config>".into());
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let bad = |msg: String| CliError::Usage(format!("{origin}:{lineno}: {msg}"));
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected `key = value`, found `{line}`")))?;
            let key = key.trim();
            let valid_key = key
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid_key {
                return Err(bad(format!("invalid key `{key}`")));
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(bad(format!("unknown key `{key}`")));
            }
            let rest = rest.trim();
            let value = if let Some(quoted) = rest.strip_prefix('"') {
                let end = quoted
                    .find('"')
                    .ok_or_else(|| bad("unterminated quoted value".into()))?;
                let tail = quoted[end + 1..].trim();
                if !(tail.is_empty() || tail.starts_with('#')) {
                    return Err(bad(format!("trailing text after quoted value: `{tail}`")));
                }
                quoted[..end].to_string()
            } else {
                let bare = match rest.find('#') {
                    Some(i) => &rest[..i],
                    None => rest,
                };
                bare.trim().to_string()
            };
            if values.insert(key.to_string(), value).is_some() {
                return Err(bad(format!("duplicate key `{key}`")));
            }
        }
        Ok(RunConfig { source, values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        Self::parse(&text, Some(path.to_path_buf()))
    }

    /// `--config` if given, else `$FTQC_CONFIG` if set, else empty.
    pub fn discover(flag: Option<&Path>) -> Result<Self, CliError> {
        if let Some(p) = flag {
            return Self::load(p);
        }
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| {
                CliError::Usage(format!("config key `{key}`: cannot parse `{v}`: {e}"))
            }),
        }
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.values.get(key).map(|v| v.to_ascii_lowercase()) {
            None => Ok(None),
            Some(v) => match v.as_str() {
                "true" | "yes" | "1" | "on" => Ok(Some(true)),
                "false" | "no" | "0" | "off" => Ok(Some(false)),
                _ => Err(CliError::Usage(format!(
                    "config key `{key}`: expected a boolean, found `{v}`"
                ))),
            },
        }
    }

    /// Flag value, else config value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }

    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(match flag {
            Some(v) => Some(v),
            None => self.get(key)?,
        })
    }

    pub fn pick_bool(
        &self,
        flag: Option<bool>,
        key: &str,
        default: bool,
    ) -> Result<bool, CliError> {
        Ok(match flag {
            Some(v) => v,
            None => self.get_bool(key)?.unwrap_or(default),
        })
    }
}

/// `a..b` (inclusive), `a,b,c`, or a single value.
pub fn parse_m_range(s: &str) -> Result<Vec<u32>, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "invalid M range `{s}` (use `4..14`, `4,6,8` or `10`)"
        ))
    };
    let s = s.trim();
    let values: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b
            .trim_start_matches('=')
            .trim()
            .parse()
            .map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(CliError::Usage(format!("empty M range `{s}`")));
    }
    Ok(values)
}

/// Comma-separated list of reals.
pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = s
        .split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid {what} list `{s}`")))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err(CliError::Usage(format!("empty {what} list")));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        let text = "# header\n\nN = 100\nM=10   # trailing\nnet_cache_path = \"/tmp/a b.cache\" # q\nstrict_sk_budget = yes\n";
        let c = RunConfig::parse(text, None).unwrap();
        assert_eq!(c.get::<usize>("N").unwrap(), Some(100));
        assert_eq!(c.get::<u32>("M").unwrap(), Some(10));
        assert_eq!(c.raw("net_cache_path"), Some("/tmp/a b.cache"));
        assert_eq!(c.get_bool("strict_sk_budget").unwrap(), Some(true));
        assert_eq!(c.get::<f64>("r").unwrap(), None);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(RunConfig::parse("N 100", None).is_err());
        assert!(RunConfig::parse("bogus = 1", None).is_err());
        assert!(RunConfig::parse("N = 1\nN = 2", None).is_err());
        assert!(RunConfig::parse("out = \"abc", None).is_err());
        assert!(RunConfig::parse("N = abc", None)
            .unwrap()
            .get::<usize>("N")
            .is_err());
    }

    #[test]
    fn flags_override_file() {
        let c = RunConfig::parse("r = 0.5", None).unwrap();
        assert_eq!(c.pick(Some(1.0), "r", 0.1).unwrap(), 1.0);
        assert_eq!(c.pick(None, "r", 0.1).unwrap(), 0.5);
        assert_eq!(c.pick(None, "p_ratio", 0.1).unwrap(), 0.1);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_m_range("4..7").unwrap(), vec![4, 5, 6, 7]);
        assert_eq!(parse_m_range("4..=5").unwrap(), vec![4, 5]);
        assert_eq!(parse_m_range("3,9").unwrap(), vec![3, 9]);
        assert_eq!(parse_m_range("10").unwrap(), vec![10]);
        assert!(parse_m_range("7..4").is_err());
        assert!(parse_m_range("x").is_err());
        assert_eq!(parse_list("0.1, 0.5,1", "r").unwrap(), vec![0.1, 0.5, 1.0]);
        assert!(parse_list("", "r").is_err());
    }
}
