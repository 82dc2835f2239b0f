//! Key-value experiment configuration.

use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}` (nearest valid key: `{nearest}`)")]
    UnknownKey { line: usize, key: String, nearest: String },
    #[error("line {line}: `{key}` expects {expected}, got `{value}`")]
    Type { line: usize, key: String, expected: &'static str, value: String },
    #[error("line {line}: `{key}` {msg}")]
    Value { line: usize, key: String, msg: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    Chacon,
    Katok,
    Spec,
    Iet,
    Random,
}

impl SystemKind {
    const NAMES: [(&'static str, SystemKind); 5] = [
        ("chacon", SystemKind::Chacon),
        ("katok", SystemKind::Katok),
        ("spec", SystemKind::Spec),
        ("iet", SystemKind::Iet),
        ("random", SystemKind::Random),
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(_, k)| *k == self).unwrap().0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    Moebius,
    Bilinear,
    Pnt,
    Residue,
    Integral,
    Arcs,
}

impl Statistic {
    const NAMES: [(&'static str, Statistic); 6] = [
        ("moebius", Statistic::Moebius),
        ("bilinear", Statistic::Bilinear),
        ("pnt", Statistic::Pnt),
        ("residue", Statistic::Residue),
        ("integral", Statistic::Integral),
        ("arcs", Statistic::Arcs),
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(_, k)| *k == self).unwrap().0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    const NAMES: [(&'static str, Format); 3] = [("csv", Format::Csv), ("json", Format::Json), ("svg", Format::Svg)];

    pub fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(_, k)| *k == self).unwrap().0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub system: SystemKind,
    pub chacon_p: u32,
    pub chacon_q: u32,
    pub katok_p: u32,
    pub spec_file: String,
    pub iet_alpha: String,
    pub iet_beta: String,
    pub iet_x0: String,
    pub iet_letter: u8,
    pub random_density: f64,
    pub schedule: Vec<u64>,
    pub primes: Vec<(u64, u64)>,
    pub statistics: Vec<Statistic>,
    pub tau: f64,
    pub q0: u64,
    pub pnt_modulus: u64,
    pub pnt_offset: u64,
    pub residue_modulus: u64,
    pub residue_class: u64,
    pub seed: u64,
    pub out_dir: String,
    pub formats: Vec<Format>,
    pub assert_decay: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "run".into(),
            system: SystemKind::Chacon,
            chacon_p: 2,
            chacon_q: 1,
            katok_p: 2,
            spec_file: String::new(),
            iet_alpha: "(sqrt(2)-1)/2".into(),
            iet_beta: "(sqrt(3)-1)/2".into(),
            iet_x0: "0".into(),
            iet_letter: 1,
            random_density: 0.5,
            schedule: vec![10_000, 100_000, 1_000_000],
            primes: vec![(7, 13)],
            statistics: vec![Statistic::Moebius, Statistic::Bilinear, Statistic::Pnt, Statistic::Residue],
            tau: 0.25,
            q0: 0,
            pnt_modulus: 1,
            pnt_offset: 0,
            residue_modulus: 5,
            residue_class: 0,
            seed: 1,
            out_dir: "out".into(),
            formats: vec![Format::Csv],
            assert_decay: false,
        }
    }
}

pub const KEYS: [&str; 24] = [
    "name",
    "system",
    "chacon_p",
    "chacon_q",
    "katok_p",
    "spec_file",
    "iet_alpha",
    "iet_beta",
    "iet_x0",
    "iet_letter",
    "random_density",
    "schedule",
    "primes",
    "statistics",
    "tau",
    "q0",
    "pnt_modulus",
    "pnt_offset",
    "residue_modulus",
    "residue_class",
    "seed",
    "out_dir",
    "formats",
    "assert_decay",
];

fn nearest_key(key: &str) -> String {
    KEYS.iter().min_by_key(|k| strsim::levenshtein(key, k)).unwrap().to_string()
}

fn unquote(v: &str) -> &str {
    if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn named<T: Copy>(names: &[(&'static str, T)], v: &str) -> Option<T> {
    names.iter().find(|(n, _)| *n == v).map(|&(_, t)| t)
}

struct Field<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Field<'_> {
    fn type_err(&self, expected: &'static str) -> ConfigError {
        ConfigError::Type { line: self.line, key: self.key.into(), expected, value: self.value.into() }
    }

    fn value_err(&self, msg: impl Into<String>) -> ConfigError {
        ConfigError::Value { line: self.line, key: self.key.into(), msg: msg.into() }
    }

    fn u64(&self) -> Result<u64, ConfigError> {
        self.value.parse().map_err(|_| self.type_err("a non-negative integer"))
    }

    fn u32(&self) -> Result<u32, ConfigError> {
        self.value.parse().map_err(|_| self.type_err("a non-negative 32-bit integer"))
    }

    fn f64(&self) -> Result<f64, ConfigError> {
        self.value.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| self.type_err("a finite number"))
    }

    fn bool(&self) -> Result<bool, ConfigError> {
        self.value.parse().map_err(|_| self.type_err("true or false"))
    }
}

/// Parses configuration text; absent keys take their defaults.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen = std::collections::HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let key = key.trim();
        let f = Field { line, key, value: unquote(value.trim()) };
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.into(), nearest: nearest_key(key) });
        }
        if !seen.insert(key) {
            return Err(ConfigError::Duplicate { line, key: key.into() });
        }
        match key {
            "name" => cfg.name = f.value.into(),
            "system" => {
                cfg.system = named(&SystemKind::NAMES, f.value).ok_or_else(|| f.type_err("one of chacon, katok, spec, iet, random"))?
            }
            "chacon_p" => cfg.chacon_p = f.u32()?,
            "chacon_q" => cfg.chacon_q = f.u32()?,
            "katok_p" => cfg.katok_p = f.u32()?,
            "spec_file" => cfg.spec_file = f.value.into(),
            "iet_alpha" => cfg.iet_alpha = f.value.into(),
            "iet_beta" => cfg.iet_beta = f.value.into(),
            "iet_x0" => cfg.iet_x0 = f.value.into(),
            "iet_letter" => {
                let l = f.u32()?;
                if !(1..=3).contains(&l) {
                    return Err(f.value_err("must be 1, 2 or 3"));
                }
                cfg.iet_letter = l as u8;
            }
            "random_density" => {
                let d = f.f64()?;
                if !(0.0..=1.0).contains(&d) {
                    return Err(f.value_err("must lie in [0, 1]"));
                }
                cfg.random_density = d;
            }
            "schedule" => {
                let s: Vec<u64> = list(f.value)
                    .map(|x| x.parse().map_err(|_| f.type_err("a comma-separated list of integers")))
                    .collect::<Result<_, _>>()?;
                if s.is_empty() || s[0] == 0 || s.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(f.value_err("must be a non-empty strictly increasing list of positive lengths"));
                }
                cfg.schedule = s;
            }
            "primes" => {
                cfg.primes = list(f.value)
                    .map(|x| {
                        let (p, q) = x.split_once(':').ok_or_else(|| f.type_err("a list of p:q pairs"))?;
                        let p: u64 = p.trim().parse().map_err(|_| f.type_err("a list of p:q pairs"))?;
                        let q: u64 = q.trim().parse().map_err(|_| f.type_err("a list of p:q pairs"))?;
                        if p == 0 || q == 0 {
                            return Err(f.value_err("pairs must be positive"));
                        }
                        Ok((p, q))
                    })
                    .collect::<Result<_, _>>()?;
            }
            "statistics" => {
                cfg.statistics = list(f.value)
                    .map(|x| {
                        named(&Statistic::NAMES, x).ok_or_else(|| f.type_err("a list of moebius, bilinear, pnt, residue, integral, arcs"))
                    })
                    .collect::<Result<_, _>>()?;
            }
            "tau" => {
                let t = f.f64()?;
                if !(t > 0.0 && t < 1.0 / 3.0) {
                    return Err(f.value_err("must satisfy 0 < tau < 1/3"));
                }
                cfg.tau = t;
            }
            "q0" => cfg.q0 = f.u64()?,
            "pnt_modulus" => {
                cfg.pnt_modulus = f.u64()?;
                if cfg.pnt_modulus == 0 {
                    return Err(f.value_err("must be positive"));
                }
            }
            "pnt_offset" => cfg.pnt_offset = f.u64()?,
            "residue_modulus" => {
                cfg.residue_modulus = f.u64()?;
                if cfg.residue_modulus == 0 {
                    return Err(f.value_err("must be positive"));
                }
            }
            "residue_class" => cfg.residue_class = f.u64()?,
            "seed" => cfg.seed = f.u64()?,
            "out_dir" => cfg.out_dir = f.value.into(),
            "formats" => {
                cfg.formats = list(f.value)
                    .map(|x| named(&Format::NAMES, x).ok_or_else(|| f.type_err("a list of csv, json, svg")))
                    .collect::<Result<_, _>>()?;
            }
            "assert_decay" => cfg.assert_decay = f.bool()?,
            _ => unreachable!(),
        }
    }
    if cfg.residue_class >= cfg.residue_modulus {
        return Err(ConfigError::Invalid(format!(
            "residue_class {} must be below residue_modulus {}",
            cfg.residue_class, cfg.residue_modulus
        )));
    }
    if cfg.system == SystemKind::Spec && cfg.spec_file.is_empty() {
        return Err(ConfigError::Invalid("system = spec needs spec_file".into()));
    }
    Ok(cfg)
}

/// Reads and parses a configuration file, checking that referenced files exist.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    let cfg = parse_config_str(&text)?;
    if cfg.system == SystemKind::Spec {
        let spec = resolve(path, &cfg.spec_file);
        if !spec.exists() {
            return Err(ConfigError::Invalid(format!("spec_file {} does not exist", spec.display())));
        }
    }
    Ok(cfg)
}

/// `file` relative to the directory of `config`.
pub fn resolve(config: &Path, file: &str) -> std::path::PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config.parent().unwrap_or(Path::new(".")).join(p)
    }
}

impl ExperimentConfig {
    /// `(key, value)` pairs in canonical order, values as written to file.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let join = |v: Vec<String>| v.join(",");
        let q = |s: &str| format!("\"{s}\"");
        vec![
            ("name", q(&self.name)),
            ("system", self.system.name().into()),
            ("chacon_p", self.chacon_p.to_string()),
            ("chacon_q", self.chacon_q.to_string()),
            ("katok_p", self.katok_p.to_string()),
            ("spec_file", q(&self.spec_file)),
            ("iet_alpha", q(&self.iet_alpha)),
            ("iet_beta", q(&self.iet_beta)),
            ("iet_x0", q(&self.iet_x0)),
            ("iet_letter", self.iet_letter.to_string()),
            ("random_density", self.random_density.to_string()),
            ("schedule", join(self.schedule.iter().map(u64::to_string).collect())),
            ("primes", join(self.primes.iter().map(|(p, q)| format!("{p}:{q}")).collect())),
            ("statistics", join(self.statistics.iter().map(|s| s.name().to_string()).collect())),
            ("tau", self.tau.to_string()),
            ("q0", self.q0.to_string()),
            ("pnt_modulus", self.pnt_modulus.to_string()),
            ("pnt_offset", self.pnt_offset.to_string()),
            ("residue_modulus", self.residue_modulus.to_string()),
            ("residue_class", self.residue_class.to_string()),
            ("seed", self.seed.to_string()),
            ("out_dir", q(&self.out_dir)),
            ("formats", join(self.formats.iter().map(|f| f.name().to_string()).collect())),
            ("assert_decay", self.assert_decay.to_string()),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            writeln!(s, "{k} = {v}").unwrap();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(parse_config_str("").unwrap(), ExperimentConfig::default());
        assert_eq!(parse_config_str("# only a comment\n\n").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn tau_range() {
        let err = parse_config_str("seed = 3\ntau = 0.5\n").unwrap_err();
        assert_eq!(err, ConfigError::Value { line: 2, key: "tau".into(), msg: "must satisfy 0 < tau < 1/3".into() });
        assert_eq!(parse_config_str("tau = 0.3").unwrap().tau, 0.3);
    }

    #[test]
    fn error_messages() {
        let err = parse_config_str("\nshcedule = 1,2\n").unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey { line: 2, key: "shcedule".into(), nearest: "schedule".into() });
        let err = parse_config_str("seed = x").unwrap_err();
        assert!(matches!(err, ConfigError::Type { line: 1, expected: "a non-negative integer", .. }));
        assert_eq!(parse_config_str("seed").unwrap_err(), ConfigError::Syntax { line: 1 });
        assert!(matches!(parse_config_str("schedule = 5,3").unwrap_err(), ConfigError::Value { line: 1, .. }));
        assert!(matches!(parse_config_str("seed = 1\nseed = 2").unwrap_err(), ConfigError::Duplicate { line: 2, .. }));
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.system = SystemKind::Iet;
        cfg.primes = vec![(3, 5), (7, 13)];
        cfg.formats = vec![Format::Csv, Format::Svg];
        cfg.tau = 0.1;
        assert_eq!(parse_config_str(&cfg.to_text()).unwrap(), cfg);
    }
}
