//! Rayleigh block fading, receiver noise and delayed-feedback degradation.

use std::f64::consts::PI;

use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{c, ComplexMatrix, ComplexScalar};
use crate::special::bessel_j0;

/// Name of the generator behind [`Rng`].
pub const RNG_ALGORITHM: &str = "chacha8";

/// Deterministic random source identified by `(seed, stream)`.
///
/// Backed by ChaCha8, a counter-based generator whose output is fixed
/// across platforms for a given key and stream.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

/// SplitMix64 finalizer; used to derive keys.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        for (k, chunk) in key.chunks_exact_mut(8).enumerate() {
            chunk.copy_from_slice(&mix64(seed ^ (k as u64).wrapping_mul(0xA076_1D64_78BD_642F)).to_le_bytes());
        }
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.random()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Circularly-symmetric `CN(0, 1)`.
    #[inline]
    pub fn complex_gaussian(&mut self) -> ComplexScalar {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        c(self.standard_normal() * s, self.standard_normal() * s)
    }

    /// `n` random bits as `0`/`1` bytes.
    pub fn bits(&mut self, n: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let word = self.inner.next_u64();
            let take = (n - out.len()).min(64);
            out.extend((0..take).map(|k| ((word >> k) & 1) as u8));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeedbackMode {
    Perfect,
    Delayed,
}

/// How the transmitter's copy of the channel relates to the true one.
///
/// The correlation `alpha` is always derived from `fd_tc` and `delta`, never
/// stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackModel {
    pub mode: FeedbackMode,
    /// Normalized Doppler `f_d·T_c`.
    pub fd_tc: f64,
    /// Feedback delay in feedback intervals.
    pub delta: f64,
}

impl FeedbackModel {
    pub fn perfect() -> Self {
        Self {
            mode: FeedbackMode::Perfect,
            fd_tc: 0.0,
            delta: 0.0,
        }
    }

    pub fn delayed(fd_tc: f64, delta: f64) -> Self {
        Self {
            mode: FeedbackMode::Delayed,
            fd_tc,
            delta,
        }
    }

    /// `J₀(2π·f_dT_c·Δ)`, or 1 for perfect feedback.
    pub fn alpha(&self) -> Result<f64> {
        match self.mode {
            FeedbackMode::Perfect => Ok(1.0),
            FeedbackMode::Delayed => bessel_j0(2.0 * PI * self.fd_tc * self.delta),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fd_tc.is_finite() && self.fd_tc >= 0.0) {
            return Err(Error::Config(format!("fd_tc must be >= 0, got {}", self.fd_tc)));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::Config(format!("delta must be >= 0, got {}", self.delta)));
        }
        let alpha = self.alpha().map_err(|e| Error::Config(e.to_string()))?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Config(format!(
                "feedback correlation {alpha} lies outside [0, 1]; choose a smaller fd_tc·delta"
            )));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct FeedbackRepr {
    mode: FeedbackMode,
    fd_tc: f64,
    delta: f64,
    #[serde(default, skip_deserializing)]
    alpha: Option<f64>,
}

impl Serialize for FeedbackModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FeedbackRepr {
            mode: self.mode,
            fd_tc: self.fd_tc,
            delta: self.delta,
            alpha: self.alpha().ok(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FeedbackModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = FeedbackRepr::deserialize(d)?;
        Ok(Self {
            mode: r.mode,
            fd_tc: r.fd_tc,
            delta: r.delta,
        })
    }
}

/// `n_t × 1` vector of i.i.d. `CN(0, 1)` gains.
pub fn sample_channel(rng: &mut Rng, n_t: usize) -> ComplexMatrix {
    let entries: Vec<ComplexScalar> = (0..n_t).map(|_| rng.complex_gaussian()).collect();
    ComplexMatrix::column_vector(&entries)
}

/// Noise variance for a given SNR in dB with unit-energy symbols.
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// `y = hᵀX + z`, `z ~ CN(0, σ²)` with `σ² = 10^(−snr_db/10)`.
pub fn apply_channel(
    h: &ComplexMatrix,
    x: &ComplexMatrix,
    snr_db: f64,
    rng: &mut Rng,
) -> Result<ComplexMatrix> {
    if h.cols() != 1 || h.rows() != x.rows() {
        return Err(Error::DimensionMismatch {
            op: "apply_channel",
            left: h.shape(),
            right: x.shape(),
        });
    }
    let sigma = noise_variance(snr_db).sqrt();
    let clean = h.transpose().matmul(x)?;
    let noisy: Vec<ComplexScalar> = clean
        .data()
        .iter()
        .map(|&v| v + rng.complex_gaussian() * sigma)
        .collect();
    ComplexMatrix::new(1, x.cols(), noisy)
}

/// Channel estimate seen by the transmitter: `αh + √(1−α²)·e`.
pub fn degrade_feedback(h: &ComplexMatrix, fm: &FeedbackModel, rng: &mut Rng) -> Result<ComplexMatrix> {
    if fm.mode == FeedbackMode::Perfect {
        return Ok(h.clone());
    }
    let alpha = fm.alpha()?;
    let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
    let err = sample_channel(rng, h.rows() * h.cols());
    let data: Vec<ComplexScalar> = h
        .data()
        .iter()
        .zip(err.data())
        .map(|(&v, &e)| v * alpha + e * beta)
        .collect();
    ComplexMatrix::new(h.rows(), h.cols(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rng_is_reproducible() {
        let mut a = Rng::new(42, 3);
        let mut b = Rng::new(42, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut d = Rng::new(42, 4);
        assert_ne!(Rng::new(42, 3).next_u64(), d.next_u64());
        assert_eq!(a.algorithm(), "chacha8");
    }

    #[test]
    fn sample_channel_is_reproducible() {
        let h1 = sample_channel(&mut Rng::new(9, 0), 4);
        let h2 = sample_channel(&mut Rng::new(9, 0), 4);
        assert_eq!(h1, h2);
        assert_eq!(h1.shape(), (4, 1));
    }

    #[test]
    fn bits_are_binary() {
        let bits = Rng::new(1, 1).bits(130);
        assert_eq!(bits.len(), 130);
        assert!(bits.iter().all(|&b| b <= 1));
        let ones = bits.iter().filter(|&&b| b == 1).count();
        assert!((40..90).contains(&ones));
    }

    #[test]
    fn perfect_feedback_is_identity() {
        let mut rng = Rng::new(3, 0);
        let h = sample_channel(&mut rng, 4);
        let fm = FeedbackModel::perfect();
        assert_eq!(fm.alpha().unwrap(), 1.0);
        assert_eq!(degrade_feedback(&h, &fm, &mut rng).unwrap(), h);
    }

    #[test]
    fn delayed_alpha() {
        let fm = FeedbackModel::delayed(0.01, 12.0);
        assert!((fm.alpha().unwrap() - 0.86).abs() <= 0.005);
        assert!(fm.validate().is_ok());
        assert!(FeedbackModel::delayed(-0.1, 1.0).validate().is_err());
    }

    #[test]
    fn feedback_json_reports_alpha() {
        let json = serde_json::to_value(FeedbackModel::delayed(0.01, 12.0)).unwrap();
        assert_eq!(json["mode"], "DELAYED");
        assert!((json["alpha"].as_f64().unwrap() - 0.8625).abs() < 1e-3);
        let back: FeedbackModel = serde_json::from_value(json).unwrap();
        assert_eq!(back, FeedbackModel::delayed(0.01, 12.0));
    }

    #[test]
    fn noiseless_limit() {
        let mut rng = Rng::new(4, 0);
        let h = sample_channel(&mut rng, 4);
        let x = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0], &[-1.0, 2.0]]);
        let y = apply_channel(&h, &x, 300.0, &mut rng).unwrap();
        let clean = h.transpose().matmul(&x).unwrap();
        assert!(y.max_abs_diff(&clean).unwrap() < 1e-10);
        assert!(apply_channel(&h, &ComplexMatrix::zeros(3, 2), 10.0, &mut rng).is_err());
    }

    #[test]
    fn noise_is_additive() {
        let h = sample_channel(&mut Rng::new(5, 0), 2);
        let x1 = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let x2 = ComplexMatrix::from_real_rows(&[&[-1.0, 0.5], &[0.0, 1.0]]);
        let sum = apply_channel(&h, &x1.add(&x2).unwrap(), 5.0, &mut Rng::new(6, 1)).unwrap();
        let z = apply_channel(&h, &ComplexMatrix::zeros(2, 2), 5.0, &mut Rng::new(6, 1)).unwrap();
        let parts = h
            .transpose()
            .matmul(&x1)
            .unwrap()
            .add(&h.transpose().matmul(&x2).unwrap())
            .unwrap()
            .add(&z)
            .unwrap();
        assert!(sum.max_abs_diff(&parts).unwrap() < 1e-12);
    }
}
