//! Monte-Carlo BER engine for precoded Alamouti over Rayleigh block fading.
//!
//! Every trial draws from its own random stream keyed by
//! `(seed, snr_db, trial)`. Trials run in fixed-size batches and the stopping
//! rule is only evaluated between batches, so a point's outcome is a pure
//! function of the configuration regardless of how many worker threads run
//! the batches.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{mix64, noise_variance, FeedbackMode, FeedbackModel, Rng};
use crate::codebook::{build_codebook, write_codebook, Codebook, CodebookSpec};
use crate::error::{Error, Result};
use crate::matrix::{c, ComplexMatrix, ComplexScalar};
use crate::stbc::{decode_pair, make_constellation, QamConstellation};

/// Default cap on trials per point.
pub const DEFAULT_MAX_TRIALS: u64 = 10_000_000;
/// Default minimum number of bit errors per point.
pub const DEFAULT_MIN_BIT_ERRORS: u64 = 200;

const BATCH_TRIALS: u64 = 16_384;
const CHUNK_TRIALS: u64 = 512;

/// Full description of one BER curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub codebook_spec: CodebookSpec,
    /// Bits per QAM symbol.
    pub b: u32,
    pub snr_grid_db: Vec<f64>,
    pub feedback: FeedbackModel,
    pub min_trials: u64,
    pub min_bit_errors: u64,
    pub max_trials: u64,
    pub seed: u64,
    /// Scale every precoder column to unit norm before simulating.
    pub renormalize_precoders: bool,
}

impl SimConfig {
    /// Four antennas, two-column precoders, 64 entries, 16-QAM, 0..30 dB in
    /// 2 dB steps, perfect feedback.
    pub fn default_for(spec: CodebookSpec) -> Self {
        Self {
            codebook_spec: spec,
            b: 4,
            snr_grid_db: (0..=15).map(|k| 2.0 * k as f64).collect(),
            feedback: FeedbackModel::perfect(),
            min_trials: 10_000,
            min_bit_errors: DEFAULT_MIN_BIT_ERRORS,
            max_trials: DEFAULT_MAX_TRIALS,
            seed: 1,
            renormalize_precoders: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.codebook_spec.validate()?;
        if self.codebook_spec.m != 2 {
            return Err(Error::Config(format!(
                "Alamouti precoding needs m = 2, got {}",
                self.codebook_spec.m
            )));
        }
        if !matches!(self.b, 2 | 4 | 6) {
            return Err(Error::Config(format!("unsupported bits per symbol {}", self.b)));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::Config("SNR grid is empty".into()));
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR grid has non-finite values".into()));
        }
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("SNR grid must be strictly increasing".into()));
        }
        if self.min_trials < 1 {
            return Err(Error::Config("min_trials must be >= 1".into()));
        }
        if self.max_trials < self.min_trials {
            return Err(Error::Config(format!(
                "max_trials ({}) is below min_trials ({})",
                self.max_trials, self.min_trials
            )));
        }
        self.feedback.validate()
    }

    /// Codebook as used by the simulation (renormalized if requested).
    pub fn build_codebook(&self) -> Result<Codebook> {
        let cb = build_codebook(&self.codebook_spec)?;
        Ok(if self.renormalize_precoders {
            cb.renormalized()
        } else {
            cb
        })
    }
}

/// One measured point of a BER curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ber: f64,
    pub bit_errors: u64,
    pub bits_simulated: u64,
    pub trials: u64,
    /// Sum over trials of squared per-trial bit-error counts.
    pub sum_sq_errors: u64,
    /// The trial cap was hit before `min_bit_errors` accumulated.
    pub low_confidence: bool,
}

impl BerPoint {
    /// Standard error of `ber`, estimated from the spread of per-trial
    /// error counts (errors within one fading block are not independent).
    pub fn std_error(&self) -> f64 {
        if self.trials < 2 || self.bits_simulated == 0 {
            return 0.0;
        }
        let n = self.trials as f64;
        let mean = self.bit_errors as f64 / n;
        let var = (self.sum_sq_errors as f64 / n - mean * mean).max(0.0) * n / (n - 1.0);
        let bits_per_trial = self.bits_simulated as f64 / n;
        (var / n).sqrt() / bits_per_trial
    }
}

/// A full BER curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SimConfig,
    pub points: Vec<BerPoint>,
    /// SHA-256 of the `GHCB v1` text of the codebook used.
    pub codebook_digest: String,
    /// Mean squared column norm of the precoders used.
    pub precoder_column_gain: f64,
    /// Elapsed seconds; the only field that varies between identical runs.
    pub wallclock: f64,
}

impl SweepResult {
    /// Equality on everything except `wallclock`.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.config == other.config
            && self.points == other.points
            && self.codebook_digest == other.codebook_digest
            && self.precoder_column_gain.to_bits() == other.precoder_column_gain.to_bits()
    }

    /// `snr_db,ber,bit_errors,bits,trials` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("snr_db,ber,bit_errors,bits,trials\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                p.snr_db, p.ber, p.bit_errors, p.bits_simulated, p.trials
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep result serializes")
    }
}

/// SHA-256 hex digest of a codebook's serialized form.
pub fn codebook_digest(cb: &Codebook) -> String {
    hex::encode(Sha256::digest(write_codebook(cb).as_bytes()))
}

/// Energy-maximizing precoder for the channel `h_fb`.
///
/// Returns the 1-based index of `argmax_i ‖h_fbᵀ·W_i‖²`, lowest index on
/// ties.
pub fn select_precoder(h_fb: &ComplexMatrix, cb: &Codebook) -> Result<(usize, ComplexMatrix)> {
    if cb.is_empty() {
        return Err(Error::Config("empty codebook".into()));
    }
    if h_fb.cols() != 1 || h_fb.rows() != cb.spec().n_t {
        return Err(Error::DimensionMismatch {
            op: "select_precoder",
            left: h_fb.shape(),
            right: (cb.spec().n_t, cb.spec().m),
        });
    }
    let prepared = Prepared::new(cb);
    let idx = prepared.select(h_fb.data());
    Ok((idx + 1, cb.matrices()[idx].clone()))
}

/// Codebook flattened for the trial loop.
struct Prepared {
    n_t: usize,
    /// Per precoder, `n_t` rows of two entries.
    rows: Vec<Vec<[ComplexScalar; 2]>>,
}

impl Prepared {
    fn new(cb: &Codebook) -> Self {
        let rows = cb
            .matrices()
            .iter()
            .map(|w| (0..w.rows()).map(|r| [w[(r, 0)], w[(r, 1)]]).collect())
            .collect();
        Self {
            n_t: cb.spec().n_t,
            rows,
        }
    }

    #[inline]
    fn effective(&self, idx: usize, h: &[ComplexScalar]) -> [ComplexScalar; 2] {
        let mut g = [c(0.0, 0.0); 2];
        for (hr, w) in h.iter().zip(&self.rows[idx]) {
            g[0] += hr * w[0];
            g[1] += hr * w[1];
        }
        g
    }

    #[inline]
    fn select(&self, h: &[ComplexScalar]) -> usize {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for i in 0..self.rows.len() {
            let g = self.effective(i, h);
            let score = g[0].norm_sqr() + g[1].norm_sqr();
            if score > best_score {
                best = i;
                best_score = score;
            }
        }
        best
    }
}

/// Everything a trial needs, shared read-only across workers.
struct TrialContext<'a> {
    prepared: Prepared,
    constellation: &'a QamConstellation,
    sigma: f64,
    alpha: f64,
    beta: f64,
    delayed: bool,
    point_seed: u64,
}

impl TrialContext<'_> {
    /// Bit errors of one trial.
    fn run(&self, trial: u64, h: &mut Vec<ComplexScalar>, h_fb: &mut Vec<ComplexScalar>) -> u64 {
        let mut rng = Rng::new(self.point_seed, trial);
        let n_t = self.prepared.n_t;
        h.clear();
        h.extend((0..n_t).map(|_| rng.complex_gaussian()));
        let selected = if self.delayed {
            h_fb.clear();
            for &hk in h.iter() {
                let e = rng.complex_gaussian();
                h_fb.push(hk * self.alpha + e * self.beta);
            }
            self.prepared.select(h_fb)
        } else {
            self.prepared.select(h)
        };

        let b = self.constellation.b;
        let mask = (1u32 << b) - 1;
        let word = rng.next_u64();
        let l1 = (word as u32) & mask;
        let l2 = ((word >> b) as u32) & mask;
        let s1 = self.constellation.point(l1);
        let s2 = self.constellation.point(l2);

        let g = self.prepared.effective(selected, h);
        let y1 = g[0] * s1 + g[1] * s2 + rng.complex_gaussian() * self.sigma;
        let y2 = -g[0] * s2.conj() + g[1] * s1.conj() + rng.complex_gaussian() * self.sigma;

        match decode_pair([y1, y2], g, self.constellation) {
            Some((i1, i2)) => {
                let d1 = self.constellation.labels[i1];
                let d2 = self.constellation.labels[i2];
                ((l1 ^ d1).count_ones() + (l2 ^ d2).count_ones()) as u64
            }
            // Erasure: count half of the 2b bits as wrong.
            None => b as u64,
        }
    }
}

/// Progress callback: `(snr_db, trials, bit_errors)` after each batch.
pub type Progress<'a> = &'a (dyn Fn(f64, u64, u64) + Sync);

fn point_seed(seed: u64, snr_db: f64) -> u64 {
    mix64(seed ^ mix64(snr_db.to_bits()))
}

/// Simulates one SNR point.
pub fn run_ber_point(cfg: &SimConfig, cb: &Codebook, snr_db: f64) -> Result<BerPoint> {
    run_ber_point_with(cfg, cb, snr_db, None)
}

pub fn run_ber_point_with(
    cfg: &SimConfig,
    cb: &Codebook,
    snr_db: f64,
    progress: Option<Progress<'_>>,
) -> Result<BerPoint> {
    cfg.validate()?;
    if cb.spec().n_t != cfg.codebook_spec.n_t || cb.spec().m != 2 {
        return Err(Error::Config("codebook does not match the configuration".into()));
    }
    if !snr_db.is_finite() {
        return Err(Error::Config(format!("invalid SNR {snr_db}")));
    }
    let constellation = make_constellation(cfg.b, true)?;
    let alpha = cfg.feedback.alpha()?;
    let ctx = TrialContext {
        prepared: Prepared::new(cb),
        constellation: &constellation,
        sigma: noise_variance(snr_db).sqrt(),
        alpha,
        beta: (1.0 - alpha * alpha).max(0.0).sqrt(),
        delayed: cfg.feedback.mode == FeedbackMode::Delayed,
        point_seed: point_seed(cfg.seed, snr_db),
    };

    let mut trials = 0u64;
    let mut errors = 0u64;
    let mut sum_sq = 0u64;
    loop {
        let done_min = trials >= cfg.min_trials && errors >= cfg.min_bit_errors;
        if done_min || trials >= cfg.max_trials {
            break;
        }
        let batch = if trials < cfg.min_trials {
            (cfg.min_trials - trials).min(BATCH_TRIALS)
        } else {
            BATCH_TRIALS
        }
        .min(cfg.max_trials - trials);
        let start = trials;
        let chunks = batch.div_ceil(CHUNK_TRIALS);
        let (e, sq) = (0..chunks)
            .into_par_iter()
            .map(|k| {
                let lo = start + k * CHUNK_TRIALS;
                let hi = (lo + CHUNK_TRIALS).min(start + batch);
                let mut h = Vec::with_capacity(ctx.prepared.n_t);
                let mut h_fb = Vec::with_capacity(ctx.prepared.n_t);
                let mut e = 0u64;
                let mut sq = 0u64;
                for t in lo..hi {
                    let n = ctx.run(t, &mut h, &mut h_fb);
                    e += n;
                    sq += n * n;
                }
                (e, sq)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        trials += batch;
        errors += e;
        sum_sq += sq;
        if let Some(report) = progress {
            report(snr_db, trials, errors);
        }
    }
    let bits = trials * 2 * cfg.b as u64;
    Ok(BerPoint {
        snr_db,
        ber: errors as f64 / bits as f64,
        bit_errors: errors,
        bits_simulated: bits,
        trials,
        sum_sq_errors: sum_sq,
        low_confidence: errors < cfg.min_bit_errors,
    })
}

/// Runs the whole SNR grid on the global thread pool.
pub fn run_sweep(cfg: &SimConfig) -> Result<SweepResult> {
    run_sweep_with(cfg, None, None)
}

/// Runs the grid, optionally on a dedicated pool of `threads` workers.
pub fn run_sweep_with(
    cfg: &SimConfig,
    threads: Option<usize>,
    progress: Option<Progress<'_>>,
) -> Result<SweepResult> {
    cfg.validate()?;
    let work = || -> Result<SweepResult> {
        let started = Instant::now();
        let cb = cfg.build_codebook()?;
        let gain = cb
            .matrices()
            .iter()
            .map(|w| w.frobenius_norm_sq() / w.cols() as f64)
            .sum::<f64>()
            / cb.len() as f64;
        let points = cfg
            .snr_grid_db
            .iter()
            .map(|&snr| run_ber_point_with(cfg, &cb, snr, progress))
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepResult {
            config: cfg.clone(),
            points,
            codebook_digest: codebook_digest(&cb),
            precoder_column_gain: gain,
            wallclock: started.elapsed().as_secs_f64(),
        })
    };
    match threads {
        None => work(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?
            .install(work),
    }
}

/// SNR (dB) at which a curve crosses `target`, by linear interpolation of
/// `log10(ber)` between grid points.
fn crossing(points: &[BerPoint], target: f64) -> Option<f64> {
    let lt = target.log10();
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.ber == target {
            return Some(a.snr_db);
        }
        if a.ber > target && b.ber <= target {
            if b.ber == 0.0 {
                return None;
            }
            let (la, lb) = (a.ber.log10(), b.ber.log10());
            return Some(a.snr_db + (lt - la) * (b.snr_db - a.snr_db) / (lb - la));
        }
    }
    points.last().filter(|p| p.ber == target).map(|p| p.snr_db)
}

/// Horizontal gap in dB at `target_ber`; positive when `a` needs less SNR.
pub fn array_gain(a: &SweepResult, b: &SweepResult, target_ber: f64) -> Result<f64> {
    if !(target_ber > 0.0 && target_ber < 1.0) {
        return Err(Error::Range(format!("target BER {target_ber} not in (0, 1)")));
    }
    if a.config.b != b.config.b {
        return Err(Error::Config(format!(
            "curves use different constellations (b = {} vs {})",
            a.config.b, b.config.b
        )));
    }
    let grid = |r: &SweepResult| r.points.iter().map(|p| p.snr_db).collect::<Vec<_>>();
    if grid(a) != grid(b) {
        return Err(Error::Config("curves use different SNR grids".into()));
    }
    let sa = crossing(&a.points, target_ber)
        .ok_or_else(|| Error::Range(format!("first curve never crosses BER {target_ber}")))?;
    let sb = crossing(&b.points, target_ber)
        .ok_or_else(|| Error::Range(format!("second curve never crosses BER {target_ber}")))?;
    Ok(sb - sa)
}
