//! Codebook and codeword quality measures and analytic error bounds.
//!
//! * Subspace packing: chordal distance and minimum chordal distance (MCD).
//! * Minimum determinant (MD) of precoded Alamouti codeword differences.
//! * Codeword distortion: non-zero diagonals inside the stacked 2×2 blocks
//!   of a precoded codeword.
//! * Chernoff pairwise error bound, effective channel norms under correct
//!   and incorrect feedback, and the BER union bound.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::matrix::{c, ComplexMatrix, ComplexScalar};
use crate::stbc::{alamouti_encode, make_constellation, precode, QamConstellation};

/// Threshold on block-diagonal magnitudes for a codeword to count as
/// distortion-free.
pub const DISTORTION_FREE_TOL: f64 = 1e-12;

/// Bits per symbol at which the MD lattice constant is anchored.
pub const MD_REFERENCE_BITS: u32 = 4;

/// The constant used in the Chernoff exponent for the real golden case.
pub const THETA_SQ_LITERAL: f64 = 1.6180;

/// `|θ|²` for the real golden number, `((1+√5)/2)² ≈ 2.618`.
pub fn theta_sq_corrected() -> f64 {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    t * t
}

/// `|θ|²` for the complex golden number `(√3+j)/2`, which has unit modulus.
pub const THETA_SQ_COMPLEX: f64 = 1.0;

/// Subspace chordal distance `√(m − ‖Q₁ᴴQ₂‖²_F)` between column spans.
pub fn chordal_distance(w1: &ComplexMatrix, w2: &ComplexMatrix) -> Result<f64> {
    if w1.shape() != w2.shape() {
        return Err(Error::DimensionMismatch {
            op: "chordal_distance",
            left: w1.shape(),
            right: w2.shape(),
        });
    }
    let q1 = w1.orthonormalize_columns()?;
    let q2 = w2.orthonormalize_columns()?;
    orthonormal_chordal(&q1, &q2)
}

/// Evaluated as `‖P₁ − P₂‖_F/√2` with `Pₖ = QₖQₖᴴ`, which equals the
/// overlap form but keeps full relative accuracy near zero distance.
fn orthonormal_chordal(q1: &ComplexMatrix, q2: &ComplexMatrix) -> Result<f64> {
    let p1 = q1.matmul(&q1.hermitian())?;
    let p2 = q2.matmul(&q2.hermitian())?;
    Ok((p1.sub(&p2)?.frobenius_norm_sq() / 2.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    /// 1-based codebook indices, `i < j`.
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

/// Minimum chordal distance of a codebook.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McdReport {
    /// Minimum over all unordered pairs.
    pub value: f64,
    /// Lexicographically first minimizing pair (1-based).
    pub argmin_pair: (usize, usize),
    pub pairwise: Vec<PairDistance>,
    /// Minimum of `d(W₁, W_i)` over `i ≥ 2` only.
    pub first_matrix_value: f64,
    pub first_matrix_argmin: usize,
}

impl McdReport {
    pub fn to_kv(&self) -> String {
        format!(
            "value={:.6}\nargmin_pair={},{}\nfirst_matrix_value={:.6}\nfirst_matrix_argmin={}\npairs={}\n",
            self.value,
            self.argmin_pair.0,
            self.argmin_pair.1,
            self.first_matrix_value,
            self.first_matrix_argmin,
            self.pairwise.len()
        )
    }
}

pub fn min_chordal_distance(cb: &Codebook) -> Result<McdReport> {
    if cb.len() < 2 {
        return Err(Error::Config(format!(
            "minimum chordal distance needs at least two precoders, got {}",
            cb.len()
        )));
    }
    let bases = cb
        .matrices()
        .iter()
        .map(ComplexMatrix::orthonormalize_columns)
        .collect::<Result<Vec<_>>>()?;
    let mut pairwise = Vec::with_capacity(cb.len() * (cb.len() - 1) / 2);
    for i in 0..bases.len() {
        for j in (i + 1)..bases.len() {
            pairwise.push(PairDistance {
                i: i + 1,
                j: j + 1,
                distance: orthonormal_chordal(&bases[i], &bases[j])?,
            });
        }
    }
    // Strict comparison keeps the lexicographically first minimizer.
    let best = pairwise
        .iter()
        .fold(None::<&PairDistance>, |acc, p| match acc {
            Some(b) if b.distance <= p.distance => Some(b),
            _ => Some(p),
        })
        .expect("at least one pair");
    let first = pairwise
        .iter()
        .filter(|p| p.i == 1)
        .fold(None::<&PairDistance>, |acc, p| match acc {
            Some(b) if b.distance <= p.distance => Some(b),
            _ => Some(p),
        })
        .expect("at least one pair with the first matrix");
    Ok(McdReport {
        value: best.distance,
        argmin_pair: (best.i, best.j),
        first_matrix_value: first.distance,
        first_matrix_argmin: first.j,
        pairwise,
    })
}

/// Diagonal vs. anti-diagonal content of the stacked 2×2 blocks of a codeword.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionProfile {
    /// `|x[2k,0]|, |x[2k+1,1]|` for each block `k`.
    pub diag_magnitudes: Vec<f64>,
    /// `|x[2k,1]|, |x[2k+1,0]|` for each block `k`.
    pub anti_diag_magnitudes: Vec<f64>,
    /// `√(|x[2k,0]|·|x[2k+1,1]|)` per block.
    pub block_geometric_means: Vec<f64>,
    pub is_distortion_free: bool,
}

impl DistortionProfile {
    pub fn max_diag(&self) -> f64 {
        self.diag_magnitudes.iter().copied().fold(0.0, f64::max)
    }
}

pub fn codeword_distortion(x: &ComplexMatrix) -> Result<DistortionProfile> {
    if !x.rows().is_multiple_of(2) || x.cols() != 2 {
        return Err(Error::Shape(format!(
            "codeword must be (2k)x2, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    let blocks = x.rows() / 2;
    let mut diag = Vec::with_capacity(2 * blocks);
    let mut anti = Vec::with_capacity(2 * blocks);
    let mut gm = Vec::with_capacity(blocks);
    for k in 0..blocks {
        let (d0, d1) = (x[(2 * k, 0)].norm(), x[(2 * k + 1, 1)].norm());
        diag.extend([d0, d1]);
        anti.extend([x[(2 * k, 1)].norm(), x[(2 * k + 1, 0)].norm()]);
        gm.push((d0 * d1).sqrt());
    }
    let is_distortion_free = diag.iter().all(|&d| d <= DISTORTION_FREE_TOL);
    Ok(DistortionProfile {
        diag_magnitudes: diag,
        anti_diag_magnitudes: anti,
        block_geometric_means: gm,
        is_distortion_free,
    })
}

/// Distortion of `W·S(s₁, s₂)` over every symbol pair of a constellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionSurvey {
    pub pairs: usize,
    pub distortion_free_pairs: usize,
    pub max_diag_magnitude: f64,
    pub mean_block_geometric_mean: f64,
}

pub fn distortion_over_pairs(w: &ComplexMatrix, c: &QamConstellation) -> Result<DistortionSurvey> {
    let mut free = 0;
    let mut max_diag: f64 = 0.0;
    let mut gm_sum = 0.0;
    let mut gm_count = 0usize;
    for &a in &c.points {
        for &b in &c.points {
            let p = codeword_distortion(&precode(w, &alamouti_encode(a, b))?)?;
            if p.is_distortion_free {
                free += 1;
            }
            max_diag = max_diag.max(p.max_diag());
            gm_sum += p.block_geometric_means.iter().sum::<f64>();
            gm_count += p.block_geometric_means.len();
        }
    }
    Ok(DistortionSurvey {
        pairs: c.size() * c.size(),
        distortion_free_pairs: free,
        max_diag_magnitude: max_diag,
        mean_block_geometric_mean: gm_sum / gm_count as f64,
    })
}

/// Where the minimum determinant is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdArgmin {
    /// 1-based precoder index.
    pub precoder_index: usize,
    pub delta1: ComplexScalar,
    pub delta2: ComplexScalar,
}

/// Minimum determinant of precoded Alamouti codeword differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdReport {
    pub b: u32,
    pub delta_inf: f64,
    /// `√(2^b · delta_inf)`.
    pub reported: f64,
    pub argmin: MdArgmin,
    /// `min √det(ΞᴴΞ)` over precoders and nonzero differences.
    pub min_gram_root: f64,
    pub reference_bits: u32,
    /// Differences are taken on the unnormalized odd-integer lattice.
    pub lattice: String,
    pub determinant: String,
}

impl MdReport {
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "b={}", self.b);
        let _ = writeln!(s, "delta_inf={:.9}", self.delta_inf);
        let _ = writeln!(s, "reported={:.6}", self.reported);
        let _ = writeln!(s, "argmin.precoder_index={}", self.argmin.precoder_index);
        let _ = writeln!(s, "argmin.delta1={}", self.argmin.delta1);
        let _ = writeln!(s, "argmin.delta2={}", self.argmin.delta2);
        let _ = writeln!(s, "min_gram_root={:.9}", self.min_gram_root);
        let _ = writeln!(s, "reference_bits={}", self.reference_bits);
        let _ = writeln!(s, "lattice={}", self.lattice);
        let _ = writeln!(s, "determinant={}", self.determinant);
        s
    }
}

/// Distinct differences between points of the unnormalized lattice,
/// sorted by (re, im).
fn lattice_differences(c: &QamConstellation) -> Vec<ComplexScalar> {
    let mut diffs: Vec<(i64, i64)> = Vec::new();
    for a in &c.points {
        for b in &c.points {
            let d = a - b;
            diffs.push((d.re.round() as i64, d.im.round() as i64));
        }
    }
    diffs.sort_unstable();
    diffs.dedup();
    diffs.into_iter().map(|(re, im)| c_from(re, im)).collect()
}

fn c_from(re: i64, im: i64) -> ComplexScalar {
    c(re as f64, im as f64)
}

/// Brute-force MD over every precoder and nonzero symbol-pair difference.
pub fn min_determinant(cb: &Codebook, b: u32) -> Result<MdReport> {
    if !matches!(b, 4 | 6) {
        return Err(Error::Config(format!("MD supports b = 4 or 6, got {b}")));
    }
    if cb.spec().m != 2 {
        return Err(Error::Config(format!(
            "MD needs two-column precoders, got m = {}",
            cb.spec().m
        )));
    }
    let lattice = make_constellation(b, false)?;
    let diffs = lattice_differences(&lattice);
    let zero = c(0.0, 0.0);

    let per_precoder = cb
        .matrices()
        .par_iter()
        .enumerate()
        .map(|(idx, w)| -> Result<(f64, MdArgmin)> {
            let mut best = (
                f64::INFINITY,
                MdArgmin {
                    precoder_index: idx + 1,
                    delta1: zero,
                    delta2: zero,
                },
            );
            for &d1 in &diffs {
                for &d2 in &diffs {
                    if d1 == zero && d2 == zero {
                        continue;
                    }
                    let xi = precode(w, &alamouti_encode(d1, d2))?;
                    let root = xi.gram_determinant()?.sqrt();
                    if root < best.0 {
                        best = (
                            root,
                            MdArgmin {
                                precoder_index: idx + 1,
                                delta1: d1,
                                delta2: d2,
                            },
                        );
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;

    let (min_root, argmin) = per_precoder
        .into_iter()
        .reduce(|acc, x| if x.0 < acc.0 { x } else { acc })
        .expect("non-empty codebook");
    let delta_inf = min_root / 2f64.powi(MD_REFERENCE_BITS as i32);
    Ok(MdReport {
        b,
        delta_inf,
        reported: (2f64.powi(b as i32) * delta_inf).sqrt(),
        argmin,
        min_gram_root: min_root,
        reference_bits: MD_REFERENCE_BITS,
        lattice: "odd-integer".into(),
        determinant: "sqrt(det(Xi^H Xi))".into(),
    })
}

/// Chernoff bound `exp(−θ²·γ·‖h‖² / (2·2^q))`.
pub fn pep_chernoff(h: &ComplexMatrix, snr_linear: f64, q: u32, theta_sq: f64) -> Result<f64> {
    if !(snr_linear.is_finite() && snr_linear >= 0.0) {
        return Err(Error::Domain(format!("SNR must be >= 0, got {snr_linear}")));
    }
    let denom = 2.0 * 2f64.powi(q as i32);
    Ok((-theta_sq * snr_linear * h.frobenius_norm_sq() / denom).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeedbackBit {
    Correct,
    Incorrect,
}

/// Effective channel energy when the feedback bit is received correctly or
/// flipped: `2|θ|²|h_a|² + (1 + |θ|² − |θ|⁴)|h_b|²` with `(a, b)` the
/// strongest/weakest entries (swapped when incorrect).
pub fn effective_norm(h: &ComplexMatrix, theta: ComplexScalar, feedback: FeedbackBit) -> Result<f64> {
    if h.data().len() < 2 {
        return Err(Error::Shape(format!(
            "effective norm needs at least two channel entries, got {}",
            h.data().len()
        )));
    }
    let mags = h.data().iter().map(|z| z.norm_sqr());
    let max = mags.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = mags.fold(f64::INFINITY, f64::min);
    let t2 = theta.norm_sqr();
    let (strong, weak) = match feedback {
        FeedbackBit::Correct => (max, min),
        FeedbackBit::Incorrect => (min, max),
    };
    Ok(2.0 * t2 * strong + (1.0 + t2 - t2 * t2) * weak)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnionBound {
    /// `raw` clipped to [0, 1].
    pub value: f64,
    pub raw: f64,
}

/// `Σ_{l≠k} e(S_k,S_l)` averaged over `k`, for Alamouti pairs of `c`.
///
/// A pair label is the concatenation of two symbol labels, so the total
/// reduces to twice the all-pairs symbol Hamming sum.
pub fn average_pair_hamming_weight(c: &QamConstellation) -> f64 {
    let s: u64 = c
        .labels
        .iter()
        .flat_map(|&a| c.labels.iter().map(move |&b| (a ^ b).count_ones() as u64))
        .sum();
    2.0 * s as f64
}

/// Union bound on BER with every pairwise term bounded by [`pep_chernoff`].
pub fn ber_union_bound(
    c: &QamConstellation,
    h: &ComplexMatrix,
    snr_linear: f64,
    q: u32,
    theta_sq: f64,
) -> Result<UnionBound> {
    let pep = pep_chernoff(h, snr_linear, q, theta_sq)?;
    let raw = average_pair_hamming_weight(c) / c.b as f64 * pep;
    Ok(UnionBound {
        value: raw.clamp(0.0, 1.0),
        raw,
    })
}
