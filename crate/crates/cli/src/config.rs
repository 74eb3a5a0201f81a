//! Flat `key = value` run configuration.
//!
//! Values come from three layers, later ones winning: built-in defaults,
//! the `--config` file, command-line flags. Every command consumes the
//! keys it understands and rejects the rest, then records the fully
//! resolved set so the run can be replayed with `--config`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nhaas_core::Window;

use crate::error::CliError;

/// Pending overrides, keyed by config name.
#[derive(Debug, Default)]
pub struct Overrides {
    values: BTreeMap<String, String>,
    origin: BTreeMap<String, &'static str>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config `{}`: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut o = Overrides::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", n + 1))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(format!("line {}: empty key", n + 1));
            }
            if o.values.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(format!("line {}: duplicate key `{k}`", n + 1));
            }
            o.origin.insert(k.to_string(), "config file");
        }
        Ok(o)
    }

    /// Command-line value for `key`, replacing any file value.
    pub fn flag<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.to_string());
            self.origin.insert(key.to_string(), "flag");
        }
    }

    pub fn set(&mut self, key: &str, on: bool) {
        if on {
            self.flag(key, Some(true));
        }
    }

    /// Parse and remove `key`.
    pub fn take<T>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let Some(raw) = self.values.remove(key) else {
            return Ok(None);
        };
        let origin = self.origin.remove(key).unwrap_or("config");
        raw.parse()
            .map(Some)
            .map_err(|e| CliError::Usage(format!("invalid value `{raw}` for `{key}` ({origin}): {e}")))
    }

    /// Fails on any key nobody consumed.
    pub fn finish(self, command: &str) -> Result<(), CliError> {
        if self.values.is_empty() {
            return Ok(());
        }
        let keys: Vec<&str> = self.values.keys().map(String::as_str).collect();
        Err(CliError::Usage(format!("unknown key(s) for `{command}`: {}", keys.join(", "))))
    }
}

/// Resolved configuration in the order it was filled.
#[derive(Debug, Default, Clone)]
pub struct Resolved(Vec<(String, String)>);

impl Resolved {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_string(), value.to_string()));
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.0
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect::<serde_json::Map<_, _>>()
            .into()
    }
}

/// Comma-separated list.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T> FromStr for List<T>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let items = s
            .split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| x.parse::<T>().map_err(|e| format!("`{x}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if items.is_empty() {
            return Err("empty list".into());
        }
        Ok(List(items))
    }
}

impl<T: fmt::Display> fmt::Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// `lo,hi,n` log-spaced grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn new((lo, hi, n): (f64, f64, usize)) -> Self {
        Grid { lo, hi, n }
    }

    pub fn tuple(self) -> (f64, f64, usize) {
        (self.lo, self.hi, self.n)
    }

    pub fn values(self) -> Vec<f64> {
        nhaas_core::log_grid(self.lo, self.hi, self.n)
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [lo, hi, n] = parts[..] else {
            return Err("expected `lo,hi,n`".into());
        };
        let num = |x: &str| x.parse::<f64>().map_err(|_| format!("`{x}` is not a number"));
        let g = Grid {
            lo: num(lo)?,
            hi: num(hi)?,
            n: n.parse().map_err(|_| format!("`{n}` is not a point count"))?,
        };
        if !(g.lo > 0.0 && g.hi > g.lo && g.hi.is_finite()) || g.n < 2 {
            return Err("need 0 < lo < hi and n ≥ 2".into());
        }
        Ok(g)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.lo, self.hi, self.n)
    }
}

/// Fit window spelled `full`, `range:LO:HI`, `stable:TOL` or `right-of-peak:HI`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowArg(pub Window);

impl FromStr for WindowArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut it = s.trim().split(':');
        let kind = it.next().unwrap_or("");
        let args = it
            .map(|x| x.parse::<f64>().map_err(|_| format!("`{x}` is not a number")))
            .collect::<Result<Vec<_>, _>>()?;
        let w = match (kind, &args[..]) {
            ("full", []) => Window::Full,
            ("range", &[lo, hi]) => Window::Range { lo, hi },
            ("stable", &[tol]) => Window::StableSlope { tol },
            ("right-of-peak", &[hi]) => Window::RightOfPeak { hi },
            _ => return Err("expected full, range:LO:HI, stable:TOL or right-of-peak:HI".into()),
        };
        Ok(WindowArg(w))
    }
}

impl fmt::Display for WindowArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Window::Full => f.write_str("full"),
            Window::Range { lo, hi } => write!(f, "range:{lo}:{hi}"),
            Window::StableSlope { tol } => write!(f, "stable:{tol}"),
            Window::RightOfPeak { hi } => write!(f, "right-of-peak:{hi}"),
        }
    }
}
