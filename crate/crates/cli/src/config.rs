//! Flat key=value run configuration. Later layers override earlier ones:
//! defaults, then the config file, then command-line values.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use spinning_zeta::expansion::MassSign;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Geometry,
    Verify,
    Kernel,
    Zeta,
    Report,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Geometry => "geometry",
            Subcommand::Verify => "verify",
            Subcommand::Kernel => "kernel",
            Subcommand::Zeta => "zeta",
            Subcommand::Report => "report",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(ConfigError::value("format", s, "expected json or csv")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl ConfigError {
    fn value(key: &str, raw: &str, why: &str) -> Self {
        ConfigError(format!("invalid value {raw:?} for {key}: {why}"))
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Verification suites run by `verify`, in ledger order.
pub const SUITES: [&str; 10] = [
    "h_diag", "h_pr", "j_sum", "bracket", "d2", "trace2", "zeta_flat", "k1", "i_dual", "k_terms",
];

/// Suites run when `suites` is not given; `k_terms` is opt-in.
pub const DEFAULT_SUITES: [&str; 9] =
    ["h_diag", "h_pr", "j_sum", "bracket", "d2", "trace2", "zeta_flat", "k1", "i_dual"];

/// A list of values given as `a`, `a,b,c` or `start:stop:count`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [a, b, n] = parts[..] else {
                return Err("range must be start:stop:count".into());
            };
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|e| format!("{n:?}: {e}"))?;
            return match n {
                0 => Err("range count must be positive".into()),
                1 => Ok(Grid(vec![a])),
                _ => Ok(Grid((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())),
            };
        }
        let v = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        if v.is_empty() {
            return Err("empty list".into());
        }
        Ok(Grid(v))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Subcommand,
    pub lambda: f64,
    pub mass: f64,
    pub mass_sign: MassSign,
    /// Vierbein set for `geometry`; both when unset.
    pub set: Option<u8>,
    pub order: u8,
    pub s: Grid,
    pub t: Grid,
    pub p1: Grid,
    pub p2: Grid,
    pub points: usize,
    pub r_min: f64,
    pub point: Option<[f64; 2]>,
    pub tol_rel: Option<f64>,
    pub tol_abs: Option<f64>,
    pub k_tol: f64,
    pub order3_tol: f64,
    pub t_max: Option<f64>,
    pub seed: u64,
    pub suites: Vec<String>,
    pub strict: bool,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub input: Option<PathBuf>,
}

impl RunConfig {
    pub fn defaults(command: Subcommand) -> Self {
        Self {
            command,
            lambda: 1.0,
            mass: 1.0,
            mass_sign: MassSign::Plus,
            set: None,
            order: 2,
            s: Grid(vec![2.0]),
            t: Grid(vec![1.0]),
            p1: Grid(vec![1.0]),
            p2: Grid(vec![0.0]),
            points: 1000,
            r_min: 0.1,
            point: None,
            tol_rel: None,
            tol_abs: None,
            k_tol: 1e-4,
            order3_tol: 1e-2,
            t_max: None,
            seed: 0,
            suites: DEFAULT_SUITES.iter().map(|s| s.to_string()).collect(),
            strict: false,
            format: Format::Json,
            output: None,
            input: None,
        }
    }

    /// Applies one key=value pair. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        let raw = raw.trim();
        fn parse<T: FromStr>(key: &str, raw: &str) -> Result<T, ConfigError>
        where
            T::Err: fmt::Display,
        {
            raw.parse().map_err(|e: T::Err| ConfigError::value(key, raw, &e.to_string()))
        }
        match key {
            "lambda" => self.lambda = parse(key, raw)?,
            "mass" => self.mass = parse(key, raw)?,
            "mass_sign" => self.mass_sign = parse(key, raw)?,
            "set" => self.set = Some(parse(key, raw)?),
            "order" => self.order = parse(key, raw)?,
            "s" => self.s = parse(key, raw)?,
            "t" => self.t = parse(key, raw)?,
            "p1" => self.p1 = parse(key, raw)?,
            "p2" => self.p2 = parse(key, raw)?,
            "points" => self.points = parse(key, raw)?,
            "r_min" => self.r_min = parse(key, raw)?,
            "point" => {
                let g: Grid = parse(key, raw)?;
                let [x, y] = g.0[..] else {
                    return Err(ConfigError::value(key, raw, "expected x,y"));
                };
                self.point = Some([x, y]);
            }
            "tol_rel" => self.tol_rel = Some(parse(key, raw)?),
            "tol_abs" => self.tol_abs = Some(parse(key, raw)?),
            "k_tol" => self.k_tol = parse(key, raw)?,
            "order3_tol" => self.order3_tol = parse(key, raw)?,
            "t_max" => self.t_max = Some(parse(key, raw)?),
            "seed" => self.seed = parse(key, raw)?,
            "suites" => {
                let list: Vec<String> = if raw == "all" {
                    SUITES.iter().map(|s| s.to_string()).collect()
                } else {
                    raw.split(',').map(|s| s.trim().to_string()).collect()
                };
                if let Some(bad) = list.iter().find(|s| !SUITES.contains(&s.as_str())) {
                    return Err(ConfigError::value(key, raw, &format!("unknown suite {bad:?}")));
                }
                self.suites = list;
            }
            "strict" => self.strict = parse(key, raw)?,
            "format" => self.format = parse(key, raw)?,
            "output" => self.output = Some(PathBuf::from(raw)),
            "input" => self.input = Some(PathBuf::from(raw)),
            _ => return Err(ConfigError(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config file; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            if k == "config" {
                return Err(ConfigError(format!("line {}: config files cannot nest", n + 1)));
            }
            self.set(k, v).map_err(|e| ConfigError(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Builds a config from layered sources: defaults, an optional file, then
    /// command-line pairs in order.
    pub fn layered(
        command: Subcommand,
        file: Option<&Path>,
        cli: &[(String, String)],
    ) -> Result<Self, ConfigError> {
        let mut cfg = Self::defaults(command);
        if let Some(f) = file {
            cfg.apply_file(f)?;
        }
        for (k, v) in cli {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every numeric parameter against the preconditions of the
    /// selected subcommand.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError(m));
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !self.lambda.is_finite() {
            return fail(format!("lambda must be finite, got {}", self.lambda));
        }
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return fail(format!("mass must be ≥ 0, got {}", self.mass));
        }
        if let Some(set) = self.set.filter(|s| !matches!(s, 1 | 2)) {
            return fail(format!("set must be 1 or 2, got {set}"));
        }
        if self.order > 3 {
            return fail(format!("order must be 0..=3, got {}", self.order));
        }
        for (name, v) in [("tol_rel", self.tol_rel), ("tol_abs", self.tol_abs), ("t_max", self.t_max)] {
            if let Some(v) = v {
                if !positive(v) {
                    return fail(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if !positive(self.k_tol) || !positive(self.order3_tol) {
            return fail("k_tol and order3_tol must be positive".into());
        }
        if !(self.r_min >= 0.0 && self.r_min.is_finite()) {
            return fail(format!("r_min must be ≥ 0, got {}", self.r_min));
        }
        let finite = |g: &Grid| g.0.iter().all(|v| v.is_finite());
        if !finite(&self.p1) || !finite(&self.p2) {
            return fail("momentum grids must be finite".into());
        }
        match self.command {
            Subcommand::Geometry => {
                if self.points == 0 && self.point.is_none() {
                    return fail("points must be positive".into());
                }
                if let Some([x, y]) = self.point {
                    let r = x.hypot(y);
                    if r.is_nan() || r <= self.r_min {
                        return fail(format!("point ({x}, {y}) has r = {r}, not above r_min = {}", self.r_min));
                    }
                }
                if self.r_min >= 10.0 {
                    return fail(format!("r_min = {} leaves no sampling range below r = 10", self.r_min));
                }
            }
            Subcommand::Kernel => {
                if let Some(t) = self.t.0.iter().find(|t| !positive(**t)) {
                    return fail(format!("t must be positive, got {t}"));
                }
            }
            Subcommand::Zeta => {
                if let Some(s) = self.s.0.iter().find(|s| !(**s > 1.5 && s.is_finite())) {
                    return fail(format!("zeta needs s > 3/2, got {s}"));
                }
                if !positive(self.mass) {
                    return fail(format!("zeta needs m > 0, got {}", self.mass));
                }
                if self.mass_sign == MassSign::Minus && self.t_max.is_none() {
                    return fail("mass_sign = minus needs an explicit t_max".into());
                }
            }
            Subcommand::Report => {
                if self.input.is_none() {
                    return fail("report needs input = <ledger path>".into());
                }
            }
            Subcommand::Verify => {
                if self.suites.is_empty() {
                    return fail("suites must not be empty".into());
                }
            }
        }
        Ok(())
    }
}
