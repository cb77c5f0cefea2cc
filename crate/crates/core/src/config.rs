//! Flat `key = value` experiment files.
//!
//! ```text
//! # Fig. 3 style sweep
//! families = dftc, hc, dc, ghc-real, ghc-complex
//! b = 4
//! snr_db = 0:2:30
//! feedback = perfect
//! seed = 7
//! ```
//!
//! Blank lines and `#` comments are ignored. Every key is optional; unknown
//! keys are an error.

use std::fmt::Write as _;
use std::path::Path;

use crate::channel::{FeedbackMode, FeedbackModel};
use crate::codebook::{CodebookFamily, CodebookSpec};
use crate::error::{Error, Result};
use crate::sim::{SimConfig, DEFAULT_MAX_TRIALS, DEFAULT_MIN_BIT_ERRORS};

pub const KEYS: [&str; 17] = [
    "families",
    "n_t",
    "m",
    "l",
    "u",
    "l_rot",
    "n",
    "b",
    "snr_db",
    "feedback",
    "fd_tc",
    "delta",
    "min_trials",
    "min_bit_errors",
    "max_trials",
    "seed",
    "renormalize",
];

/// Partially specified experiment; `None` means "use the default".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CliConfig {
    pub families: Option<Vec<CodebookFamily>>,
    pub n_t: Option<usize>,
    pub m: Option<usize>,
    pub l: Option<usize>,
    pub u: Option<Vec<i64>>,
    pub l_rot: Option<u64>,
    pub n: Option<f64>,
    pub b: Option<u32>,
    pub snr_db: Option<Vec<f64>>,
    pub feedback: Option<FeedbackMode>,
    pub fd_tc: Option<f64>,
    pub delta: Option<f64>,
    pub min_trials: Option<u64>,
    pub min_bit_errors: Option<u64>,
    pub max_trials: Option<u64>,
    pub seed: Option<u64>,
    pub renormalize: Option<bool>,
}

fn cfg_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("`{key}`: cannot parse `{v}`"))
}

/// `a:step:b` (inclusive) or a comma-separated list.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("bad SNR grid `{text}`"));
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let grid = match parts.as_slice() {
        [start, step, stop] => {
            let (a, s, b): (f64, f64, f64) = (
                start.parse().map_err(|_| bad())?,
                step.parse().map_err(|_| bad())?,
                stop.parse().map_err(|_| bad())?,
            );
            if s.is_nan() || s <= 0.0 || b < a || !a.is_finite() || !b.is_finite() {
                return Err(bad());
            }
            let count = ((b - a) / s + 1e-9).floor() as usize + 1;
            (0..count).map(|k| a + s * k as f64).collect()
        }
        [_] => text
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?,
        _ => return Err(bad()),
    };
    Ok(grid)
}

pub fn parse_families(text: &str) -> Result<Vec<CodebookFamily>> {
    text.split(',')
        .map(|f| f.trim().parse::<CodebookFamily>())
        .collect()
}

pub fn parse_feedback(text: &str) -> Result<FeedbackMode> {
    match text.to_ascii_lowercase().as_str() {
        "perfect" => Ok(FeedbackMode::Perfect),
        "delayed" => Ok(FeedbackMode::Delayed),
        _ => Err(Error::Config(format!("feedback must be `perfect` or `delayed`, got `{text}`"))),
    }
}

fn parse_bool(key: &str, v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{key}`: expected true or false, got `{v}`")),
    }
}

impl CliConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| cfg_err(line, format!("expected key = value, got `{body}`")))?;
            let (k, v) = (k.trim(), v.trim());
            let key = KEYS
                .iter()
                .find(|&&known| known == k)
                .ok_or_else(|| cfg_err(line, format!("unknown key `{k}`")))?;
            if seen.contains(key) {
                return Err(cfg_err(line, format!("duplicate key `{k}`")));
            }
            seen.push(key);
            cfg.set(k, v).map_err(|msg| cfg_err(line, msg))?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn set(&mut self, k: &str, v: &str) -> std::result::Result<(), String> {
        let text_err = |e: Error| e.to_string();
        match k {
            "families" => self.families = Some(parse_families(v).map_err(text_err)?),
            "n_t" => self.n_t = Some(num(k, v)?),
            "m" => self.m = Some(num(k, v)?),
            "l" => self.l = Some(num(k, v)?),
            "u" => {
                self.u = Some(
                    v.split(',')
                        .map(|x| num::<i64>(k, x.trim()))
                        .collect::<std::result::Result<_, _>>()?,
                )
            }
            "l_rot" => self.l_rot = Some(num(k, v)?),
            "n" => self.n = Some(num(k, v)?),
            "b" => self.b = Some(num(k, v)?),
            "snr_db" => self.snr_db = Some(parse_snr_grid(v).map_err(text_err)?),
            "feedback" => self.feedback = Some(parse_feedback(v).map_err(text_err)?),
            "fd_tc" => self.fd_tc = Some(num(k, v)?),
            "delta" => self.delta = Some(num(k, v)?),
            "min_trials" => self.min_trials = Some(num(k, v)?),
            "min_bit_errors" => self.min_bit_errors = Some(num(k, v)?),
            "max_trials" => self.max_trials = Some(num(k, v)?),
            "seed" => self.seed = Some(num(k, v)?),
            "renormalize" => self.renormalize = Some(parse_bool(k, v)?),
            _ => unreachable!("key list checked by caller"),
        }
        Ok(())
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overridden_by(self, over: CliConfig) -> CliConfig {
        CliConfig {
            families: over.families.or(self.families),
            n_t: over.n_t.or(self.n_t),
            m: over.m.or(self.m),
            l: over.l.or(self.l),
            u: over.u.or(self.u),
            l_rot: over.l_rot.or(self.l_rot),
            n: over.n.or(self.n),
            b: over.b.or(self.b),
            snr_db: over.snr_db.or(self.snr_db),
            feedback: over.feedback.or(self.feedback),
            fd_tc: over.fd_tc.or(self.fd_tc),
            delta: over.delta.or(self.delta),
            min_trials: over.min_trials.or(self.min_trials),
            min_bit_errors: over.min_bit_errors.or(self.min_bit_errors),
            max_trials: over.max_trials.or(self.max_trials),
            seed: over.seed.or(self.seed),
            renormalize: over.renormalize.or(self.renormalize),
        }
    }

    /// Codebook spec for one family with defaults filled in.
    pub fn codebook_spec(&self, family: CodebookFamily) -> Result<CodebookSpec> {
        let mut spec = CodebookSpec::new(family, self.n_t.unwrap_or(4), self.m.unwrap_or(2), self.l.unwrap_or(64));
        if let Some(u) = &self.u {
            if family == CodebookFamily::Dftc {
                spec = spec.with_rotation(u.clone(), self.l_rot);
            }
        } else if let Some(base) = self.l_rot {
            if family == CodebookFamily::Dftc {
                spec.rotation_base = Some(base);
            }
        }
        if let (Some(n), Some(_)) = (self.n, family.golden_case()) {
            spec.golden_case_n = Some(n);
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn feedback_model(&self) -> FeedbackModel {
        match self.feedback.unwrap_or(FeedbackMode::Perfect) {
            FeedbackMode::Perfect => FeedbackModel::perfect(),
            FeedbackMode::Delayed => {
                FeedbackModel::delayed(self.fd_tc.unwrap_or(0.01), self.delta.unwrap_or(12.0))
            }
        }
    }

    pub fn families_or_all(&self) -> Vec<CodebookFamily> {
        self.families
            .clone()
            .unwrap_or_else(|| CodebookFamily::ALL.to_vec())
    }

    /// One validated [`SimConfig`] per family.
    pub fn sim_configs(&self) -> Result<Vec<SimConfig>> {
        self.families_or_all()
            .into_iter()
            .map(|family| {
                let mut cfg = SimConfig::default_for(self.codebook_spec(family)?);
                if let Some(b) = self.b {
                    cfg.b = b;
                }
                if let Some(grid) = &self.snr_db {
                    cfg.snr_grid_db = grid.clone();
                }
                cfg.feedback = self.feedback_model();
                cfg.min_trials = self.min_trials.unwrap_or(cfg.min_trials);
                cfg.min_bit_errors = self.min_bit_errors.unwrap_or(DEFAULT_MIN_BIT_ERRORS);
                cfg.max_trials = self.max_trials.unwrap_or(DEFAULT_MAX_TRIALS);
                cfg.seed = self.seed.unwrap_or(cfg.seed);
                cfg.renormalize_precoders = self.renormalize.unwrap_or(false);
                cfg.validate()?;
                Ok(cfg)
            })
            .collect()
    }

    /// Fully resolved configuration as `key = value` text; parses back to
    /// the same experiment.
    pub fn resolved_text(&self) -> Result<String> {
        let cfgs = self.sim_configs()?;
        let first = &cfgs[0];
        let spec = &first.codebook_spec;
        let mut s = String::new();
        let families: Vec<&str> = cfgs.iter().map(|c| c.codebook_spec.family.slug()).collect();
        let _ = writeln!(s, "families = {}", families.join(", "));
        let _ = writeln!(s, "n_t = {}", spec.n_t);
        let _ = writeln!(s, "m = {}", spec.m);
        let _ = writeln!(s, "l = {}", spec.l);
        if let Some(dftc) = cfgs.iter().find(|c| c.codebook_spec.family == CodebookFamily::Dftc) {
            if let Some(u) = &dftc.codebook_spec.rotation_u {
                let u: Vec<String> = u.iter().map(i64::to_string).collect();
                let _ = writeln!(s, "u = {}", u.join(","));
            }
            let _ = writeln!(s, "l_rot = {}", dftc.codebook_spec.effective_rotation_base());
        }
        if let Some(n) = self.n {
            let _ = writeln!(s, "n = {n}");
        }
        let _ = writeln!(s, "b = {}", first.b);
        let grid: Vec<String> = first.snr_grid_db.iter().map(f64::to_string).collect();
        let _ = writeln!(s, "snr_db = {}", grid.join(","));
        let fb = &first.feedback;
        let mode = match fb.mode {
            FeedbackMode::Perfect => "perfect",
            FeedbackMode::Delayed => "delayed",
        };
        let _ = writeln!(s, "feedback = {mode}");
        if fb.mode == FeedbackMode::Delayed {
            let _ = writeln!(s, "fd_tc = {}", fb.fd_tc);
            let _ = writeln!(s, "delta = {}", fb.delta);
        }
        let _ = writeln!(s, "min_trials = {}", first.min_trials);
        let _ = writeln!(s, "min_bit_errors = {}", first.min_bit_errors);
        let _ = writeln!(s, "max_trials = {}", first.max_trials);
        let _ = writeln!(s, "seed = {}", first.seed);
        let _ = writeln!(s, "renormalize = {}", first.renormalize_precoders);
        Ok(s)
    }
}
