//! Precoder families and codebook construction.
//!
//! Five families are supported:
//!
//! * `Dftc`: rotated DFT precoders `Θ^{i-1}·W₁`, where `W₁` holds the first
//!   `m` columns of the unitary DFT matrix and `Θ` is a diagonal phase
//!   rotation.
//! * `Hc`: column subsets of the normalized Sylvester Hadamard matrix.
//! * `Dc`: phase-scaled standard-basis column selections.
//! * `GhcReal` / `GhcComplex`: column subsets of the Golden-Hadamard matrix
//!   built on the real golden number `(1+√5)/2` or the complex one
//!   `(√3+j)/2`.
//!
//! Subset families list all `C(n_t, m)` column subsets in lexicographic
//! order first; later entries repeat the subsets multiplied by a scalar
//! phase `ρ^r`, where `r` counts completed passes over the subset list and
//! `ρ` is `-1` (HC, real GHC) or `-j` (complex GHC). Entry indices are
//! 1-based.

mod format;

pub(crate) use format::parse_complex;
pub use format::{load_codebook, parse_codebook, save_codebook, write_codebook, FORMAT_HEADER};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c, ComplexMatrix, ComplexScalar};

/// Largest Sylvester order accepted by [`sylvester_hadamard`].
pub const MAX_HADAMARD_ORDER: u32 = 8;

/// 802.16e-style rotation indices used for the 4-antenna DFT codebook.
pub const DEFAULT_DFT_ROTATION_4: [i64; 4] = [1, 7, 52, 56];
/// Phase base paired with [`DEFAULT_DFT_ROTATION_4`].
pub const DEFAULT_DFT_ROTATION_BASE_4: u64 = 64;
/// Rotation indices for the 2-antenna DFT codebook.
pub const DEFAULT_DFT_ROTATION_2: [i64; 2] = [1, 7];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CodebookFamily {
    Dftc,
    Hc,
    Dc,
    GhcReal,
    GhcComplex,
}

impl CodebookFamily {
    pub const ALL: [CodebookFamily; 5] = [
        CodebookFamily::Dftc,
        CodebookFamily::Dc,
        CodebookFamily::Hc,
        CodebookFamily::GhcReal,
        CodebookFamily::GhcComplex,
    ];

    /// Name used in codebook files.
    pub fn as_str(self) -> &'static str {
        match self {
            CodebookFamily::Dftc => "DFTC",
            CodebookFamily::Hc => "HC",
            CodebookFamily::Dc => "DC",
            CodebookFamily::GhcReal => "GHC_REAL",
            CodebookFamily::GhcComplex => "GHC_COMPLEX",
        }
    }

    /// Lower-case, dash-separated name used on the command line.
    pub fn slug(self) -> &'static str {
        match self {
            CodebookFamily::Dftc => "dftc",
            CodebookFamily::Hc => "hc",
            CodebookFamily::Dc => "dc",
            CodebookFamily::GhcReal => "ghc-real",
            CodebookFamily::GhcComplex => "ghc-complex",
        }
    }

    pub fn golden_case(self) -> Option<GoldenCase> {
        match self {
            CodebookFamily::GhcReal => Some(GoldenCase::Real),
            CodebookFamily::GhcComplex => Some(GoldenCase::Complex),
            _ => None,
        }
    }
}

impl fmt::Display for CodebookFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CodebookFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        match norm.as_str() {
            "DFTC" | "DFT" => Ok(CodebookFamily::Dftc),
            "HC" | "HADAMARD" => Ok(CodebookFamily::Hc),
            "DC" | "DIAGONAL" => Ok(CodebookFamily::Dc),
            "GHC_REAL" | "GHC_R" | "GHC1" => Ok(CodebookFamily::GhcReal),
            "GHC_COMPLEX" | "GHC_C" | "GHC2" => Ok(CodebookFamily::GhcComplex),
            _ => Err(Error::Config(format!("unknown codebook family `{s}`"))),
        }
    }
}

/// Which golden number drives a Golden-Hadamard matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoldenCase {
    Real,
    Complex,
}

impl GoldenCase {
    /// Root `n` entering the scale `ξ`: √5 for the real case, √3 for the
    /// complex one.
    pub fn default_root(self) -> f64 {
        match self {
            GoldenCase::Real => 5f64.sqrt(),
            GoldenCase::Complex => 3f64.sqrt(),
        }
    }
}

/// Everything needed to regenerate a codebook.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookSpec {
    pub family: CodebookFamily,
    /// Transmit antennas, a power of two.
    pub n_t: usize,
    /// Columns per precoder (rows of the space-time block).
    pub m: usize,
    /// Codebook size.
    pub l: usize,
    /// DFTC per-antenna rotation indices.
    pub rotation_u: Option<Vec<i64>>,
    /// DFTC phase base: `Θ_kk = exp(j2π·u_k / rotation_base)`. `None` means `l`.
    pub rotation_base: Option<u64>,
    /// GHC root `n` (√5 or √3 by default).
    pub golden_case_n: Option<f64>,
}

impl CodebookSpec {
    /// Spec with the family's default parameters filled in.
    pub fn new(family: CodebookFamily, n_t: usize, m: usize, l: usize) -> Self {
        let mut spec = Self {
            family,
            n_t,
            m,
            l,
            rotation_u: None,
            rotation_base: None,
            golden_case_n: None,
        };
        match family {
            CodebookFamily::Dftc => match n_t {
                2 => spec.rotation_u = Some(DEFAULT_DFT_ROTATION_2.to_vec()),
                4 => {
                    spec.rotation_u = Some(DEFAULT_DFT_ROTATION_4.to_vec());
                    spec.rotation_base = Some(DEFAULT_DFT_ROTATION_BASE_4);
                }
                _ => {}
            },
            CodebookFamily::GhcReal | CodebookFamily::GhcComplex => {
                spec.golden_case_n = family.golden_case().map(GoldenCase::default_root);
            }
            CodebookFamily::Hc | CodebookFamily::Dc => {}
        }
        spec
    }

    pub fn with_rotation(mut self, u: Vec<i64>, base: Option<u64>) -> Self {
        self.rotation_u = Some(u);
        self.rotation_base = base;
        self
    }

    /// `log2(n_t)`.
    pub fn q(&self) -> u32 {
        self.n_t.trailing_zeros()
    }

    /// Effective DFTC phase base.
    pub fn effective_rotation_base(&self) -> u64 {
        self.rotation_base.unwrap_or(self.l as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t < 2 || !self.n_t.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_t must be a power of two >= 2, got {}",
                self.n_t
            )));
        }
        if self.q() > MAX_HADAMARD_ORDER {
            return Err(Error::Config(format!("n_t = {} is too large", self.n_t)));
        }
        if self.m < 1 || self.m > self.n_t {
            return Err(Error::Config(format!(
                "m must satisfy 1 <= m <= n_t = {}, got {}",
                self.n_t, self.m
            )));
        }
        if self.l < 1 {
            return Err(Error::Config("codebook size l must be >= 1".into()));
        }
        if self.family == CodebookFamily::Dftc {
            match &self.rotation_u {
                None => {
                    return Err(Error::Config(format!(
                        "DFTC with n_t = {} needs an explicit rotation vector u",
                        self.n_t
                    )))
                }
                Some(u) if u.len() != self.n_t => {
                    return Err(Error::Config(format!(
                        "rotation vector has {} entries, expected n_t = {}",
                        u.len(),
                        self.n_t
                    )))
                }
                Some(_) => {}
            }
            if self.effective_rotation_base() == 0 {
                return Err(Error::Config("rotation base must be positive".into()));
            }
        }
        if let Some(n) = self.golden_case_n {
            if !(n.is_finite() && n > 1.0) {
                return Err(Error::Config(format!("golden root n must be > 1, got {n}")));
            }
        }
        Ok(())
    }
}

/// An ordered list of `l` precoders of shape `n_t × m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    spec: CodebookSpec,
    matrices: Vec<ComplexMatrix>,
}

impl Codebook {
    /// Assembles a codebook, checking entry count and shapes against `spec`.
    pub fn from_parts(spec: CodebookSpec, matrices: Vec<ComplexMatrix>) -> Result<Self> {
        spec.validate()?;
        if matrices.len() != spec.l {
            return Err(Error::Validation(format!(
                "spec declares l = {} but {} matrices were given",
                spec.l,
                matrices.len()
            )));
        }
        if let Some((i, w)) = matrices
            .iter()
            .enumerate()
            .find(|(_, w)| w.shape() != (spec.n_t, spec.m))
        {
            return Err(Error::Validation(format!(
                "matrix {} has shape {:?}, expected {:?}",
                i + 1,
                w.shape(),
                (spec.n_t, spec.m)
            )));
        }
        Ok(Self { spec, matrices })
    }

    pub fn spec(&self) -> &CodebookSpec {
        &self.spec
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// Entry by 1-based index.
    pub fn get(&self, index: usize) -> Option<&ComplexMatrix> {
        index.checked_sub(1).and_then(|i| self.matrices.get(i))
    }

    /// Copy with every column scaled to unit norm.
    pub fn renormalized(&self) -> Self {
        let matrices = self
            .matrices
            .iter()
            .map(|w| {
                let mut out = w.clone();
                for j in 0..w.cols() {
                    let norm = w.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        for i in 0..w.rows() {
                            out[(i, j)] = w[(i, j)] / norm;
                        }
                    }
                }
                out
            })
            .collect();
        Self {
            spec: self.spec.clone(),
            matrices,
        }
    }
}

/// `2^q × 2^q` Sylvester Hadamard matrix.
pub fn sylvester_hadamard(q: u32) -> Result<ComplexMatrix> {
    if q > MAX_HADAMARD_ORDER {
        return Err(Error::Config(format!(
            "Hadamard order q = {q} exceeds {MAX_HADAMARD_ORDER}"
        )));
    }
    let n = 1usize << q;
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // H[i][j] = (-1)^{popcount(i & j)}
            let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            out[(i, j)] = c(sign, 0.0);
        }
    }
    Ok(out)
}

/// `(1+√5)/2` or `(√3+j)/2`.
pub fn golden_number(case: GoldenCase) -> ComplexScalar {
    match case {
        GoldenCase::Real => c((1.0 + 5f64.sqrt()) / 2.0, 0.0),
        GoldenCase::Complex => c(3f64.sqrt() / 2.0, 0.5),
    }
}

/// `ξ = n·((1+n)^q − (1−n)^q) / 2^q`.
pub fn gh_scale(q: u32, n: f64) -> f64 {
    let q = q as i32;
    n * ((1.0 + n).powi(q) - (1.0 - n).powi(q)) / 2f64.powi(q)
}

/// Full `2^q × 2^q` Golden-Hadamard matrix with the default root.
pub fn gh_matrix(q: u32, case: GoldenCase) -> Result<ComplexMatrix> {
    gh_matrix_with_root(q, case, case.default_root())
}

/// `(θ/√ξ)·[[H, H], [H, (θ⁻¹−θ)·H]]` with `H` the order `q−1` Sylvester
/// matrix.
pub fn gh_matrix_with_root(q: u32, case: GoldenCase, n: f64) -> Result<ComplexMatrix> {
    if q < 1 {
        return Err(Error::Config("Golden-Hadamard order q must be >= 1".into()));
    }
    let h = sylvester_hadamard(q - 1)?;
    let theta = golden_number(case);
    let corner = theta.inv() - theta;
    // Snap the corner factor to its exact value (-1 or -j); the closed forms
    // are exact in the algebra and only rounding separates them.
    let corner = c(corner.re.round(), corner.im.round());
    let scale = theta / gh_scale(q, n).sqrt();
    let half = h.rows();
    let mut out = ComplexMatrix::zeros(2 * half, 2 * half);
    for i in 0..half {
        for j in 0..half {
            let v = h[(i, j)];
            out[(i, j)] = scale * v;
            out[(i, j + half)] = scale * v;
            out[(i + half, j)] = scale * v;
            out[(i + half, j + half)] = scale * (corner * v);
        }
    }
    Ok(out)
}

/// Unitary DFT matrix, entry `(k, l) = exp(j2π·k·l/n)/√n` (0-based).
pub fn dft_matrix(n: usize) -> Result<ComplexMatrix> {
    if n < 1 {
        return Err(Error::Config("DFT size must be >= 1".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            out[(k, l)] = unit_phase(((k * l) % n) as f64 / n as f64) * scale;
        }
    }
    Ok(out)
}

/// `exp(j2π·frac)`, exact at multiples of a quarter turn.
fn unit_phase(frac: f64) -> ComplexScalar {
    let frac = frac.rem_euclid(1.0);
    let quarter = frac * 4.0;
    if quarter.fract() == 0.0 {
        return match quarter as u32 {
            0 => c(1.0, 0.0),
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        };
    }
    let angle = 2.0 * PI * frac;
    c(angle.cos(), angle.sin())
}

/// Diagonal DFTC rotation `Θ` raised to `power`.
fn dft_rotation_power(spec: &CodebookSpec, power: u64) -> Result<ComplexMatrix> {
    if spec.family != CodebookFamily::Dftc {
        return Err(Error::Config(format!(
            "rotation is only defined for DFTC, not {}",
            spec.family
        )));
    }
    let u = spec
        .rotation_u
        .as_ref()
        .ok_or_else(|| Error::Config("DFTC needs a rotation vector u".into()))?;
    if u.len() != spec.n_t {
        return Err(Error::Config(format!(
            "rotation vector has {} entries, expected {}",
            u.len(),
            spec.n_t
        )));
    }
    let base = spec.effective_rotation_base() as i128;
    if base == 0 {
        return Err(Error::Config("rotation base must be positive".into()));
    }
    let phases: Vec<ComplexScalar> = u
        .iter()
        .map(|&uk| {
            let turns = (uk as i128 * power as i128).rem_euclid(base);
            unit_phase(turns as f64 / base as f64)
        })
        .collect();
    Ok(ComplexMatrix::diagonal(&phases))
}

/// Diagonal rotation `Θ` with entries `exp(j2π·u_k / L_rot)`.
pub fn dft_rotation(spec: &CodebookSpec) -> Result<ComplexMatrix> {
    dft_rotation_power(spec, 1)
}

/// Lexicographically ordered `m`-subsets of `0..n`.
pub fn column_subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < m - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m <= n {
        rec(0, n, m, &mut Vec::with_capacity(m), &mut out);
    }
    out
}

/// Number of distinct column subsets for the spec, `C(n_t, m)`.
pub fn subset_count(n_t: usize, m: usize) -> usize {
    column_subsets(n_t, m).len()
}

/// Generates every entry of the codebook described by `spec`.
pub fn build_codebook(spec: &CodebookSpec) -> Result<Codebook> {
    spec.validate()?;
    let q = spec.q();
    let matrices = match spec.family {
        CodebookFamily::Dftc => {
            let first = dft_matrix(spec.n_t)?.select_columns(&(0..spec.m).collect::<Vec<_>>())?;
            (0..spec.l)
                .map(|i| dft_rotation_power(spec, i as u64)?.matmul(&first))
                .collect::<Result<Vec<_>>>()?
        }
        CodebookFamily::Hc => {
            let base = sylvester_hadamard(q)?.scale(c(1.0 / (spec.n_t as f64).sqrt(), 0.0));
            subset_entries(&base, spec, sign_power)?
        }
        CodebookFamily::GhcReal | CodebookFamily::GhcComplex => {
            let case = spec.family.golden_case().expect("golden family");
            let n = spec.golden_case_n.unwrap_or_else(|| case.default_root());
            let base = gh_matrix_with_root(q, case, n)?;
            match case {
                GoldenCase::Real => subset_entries(&base, spec, sign_power)?,
                GoldenCase::Complex => subset_entries(&base, spec, minus_j_power)?,
            }
        }
        CodebookFamily::Dc => {
            let subsets = column_subsets(spec.n_t, spec.m);
            (0..spec.l)
                .map(|i| {
                    let cols = &subsets[i % subsets.len()];
                    let p = (i / subsets.len()) as f64;
                    let phase = unit_phase(p / spec.l as f64);
                    let mut w = ComplexMatrix::zeros(spec.n_t, spec.m);
                    for (k, &row) in cols.iter().enumerate() {
                        w[(row, k)] = phase;
                    }
                    w
                })
                .collect()
        }
    };
    Codebook::from_parts(spec.clone(), matrices)
}

fn subset_entries(
    base: &ComplexMatrix,
    spec: &CodebookSpec,
    phase: impl Fn(usize) -> ComplexScalar,
) -> Result<Vec<ComplexMatrix>> {
    let subsets = column_subsets(spec.n_t, spec.m);
    let picked = subsets
        .iter()
        .map(|cols| base.select_columns(cols))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..spec.l)
        .map(|i| {
            let w = &picked[i % picked.len()];
            match i / picked.len() {
                0 => w.clone(),
                r => w.scale(phase(r)),
            }
        })
        .collect())
}

/// `(-1)^r`, exact.
fn sign_power(r: usize) -> ComplexScalar {
    if r.is_multiple_of(2) {
        c(1.0, 0.0)
    } else {
        c(-1.0, 0.0)
    }
}

/// `(-j)^r`, exact.
fn minus_j_power(r: usize) -> ComplexScalar {
    [c(1.0, 0.0), c(0.0, -1.0), c(-1.0, 0.0), c(0.0, 1.0)][r % 4]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fro_dev_from_identity(w: &ComplexMatrix) -> f64 {
        let g = w.hermitian().matmul(w).unwrap();
        g.sub(&ComplexMatrix::identity(w.cols()))
            .unwrap()
            .frobenius_norm_sq()
            .sqrt()
    }

    #[test]
    fn hadamard_small_orders() {
        assert_eq!(sylvester_hadamard(0).unwrap(), ComplexMatrix::from_real_rows(&[&[1.0]]));
        assert_eq!(
            sylvester_hadamard(1).unwrap(),
            ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]])
        );
        assert_eq!(
            sylvester_hadamard(2).unwrap(),
            ComplexMatrix::from_real_rows(&[
                &[1.0, 1.0, 1.0, 1.0],
                &[1.0, -1.0, 1.0, -1.0],
                &[1.0, 1.0, -1.0, -1.0],
                &[1.0, -1.0, -1.0, 1.0],
            ])
        );
        assert!(sylvester_hadamard(9).is_err());
    }

    #[test]
    fn hadamard_is_orthogonal_exactly() {
        for q in 0..=6 {
            let h = sylvester_hadamard(q).unwrap();
            let n = h.rows();
            // Entries are ±1 so the products are exact integers.
            let g = h.transpose().matmul(&h).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { n as f64 } else { 0.0 };
                    assert_eq!(g[(i, j)], c(want, 0.0));
                }
            }
        }
    }

    #[test]
    fn golden_numbers() {
        let real = golden_number(GoldenCase::Real);
        assert!((real.re - 1.6180339887).abs() < 1e-10);
        assert_eq!(real.im, 0.0);
        let cplx = golden_number(GoldenCase::Complex);
        assert!((cplx.re - 0.8660254).abs() < 1e-7);
        assert_eq!(cplx.im, 0.5);

        for (case, want) in [(GoldenCase::Real, c(-1.0, 0.0)), (GoldenCase::Complex, c(0.0, -1.0))] {
            let t = golden_number(case);
            assert!((t * t.inv() - c(1.0, 0.0)).norm() < 1e-15);
            assert!((t.inv() - t - want).norm() < 1e-15);
        }
    }

    #[test]
    fn gh_scale_values() {
        assert!((gh_scale(2, 5f64.sqrt()) - 5.0).abs() < 1e-12);
        assert!((gh_scale(2, 3f64.sqrt()) - 3.0).abs() < 1e-12);
        assert!((gh_scale(1, 5f64.sqrt()) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn gh_real_q2_matches_closed_form() {
        let w = gh_matrix(2, GoldenCase::Real).unwrap();
        let s = (1.0 + 5f64.sqrt()) / (2.0 * 5f64.sqrt());
        let h = sylvester_hadamard(2).unwrap().scale(c(s, 0.0));
        assert!(w.max_abs_diff(&h).unwrap() < 1e-15);
    }

    #[test]
    fn gh_complex_q2_matches_closed_form() {
        let w = gh_matrix(2, GoldenCase::Complex).unwrap();
        let s = c(3f64.sqrt(), 1.0) / (2.0 * 3f64.sqrt());
        let j = c(0.0, 1.0);
        let one = c(1.0, 0.0);
        let pattern = ComplexMatrix::from_rows(&[
            vec![one, one, one, one],
            vec![one, -one, one, -one],
            vec![one, one, -j, -j],
            vec![one, -one, -j, j],
        ]);
        assert!(w.max_abs_diff(&pattern.scale(s)).unwrap() < 1e-15);
    }

    #[test]
    fn gh_q1_is_scaled_hadamard() {
        let w = gh_matrix(1, GoldenCase::Real).unwrap();
        let theta = golden_number(GoldenCase::Real);
        let want = sylvester_hadamard(1).unwrap().scale(theta / 5f64.sqrt());
        assert!(w.max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn gh_real_columns_orthogonal_with_common_norm() {
        let theta = golden_number(GoldenCase::Real).re;
        for q in 1..=4 {
            let w = gh_matrix(q, GoldenCase::Real).unwrap();
            let n = w.rows();
            let xi = gh_scale(q, 5f64.sqrt());
            let want = n as f64 * theta * theta / xi;
            let g = w.hermitian().matmul(&w).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let target = if i == j { want } else { 0.0 };
                    assert!((g[(i, j)] - c(target, 0.0)).norm() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn dft_values() {
        assert_eq!(dft_matrix(1).unwrap(), ComplexMatrix::from_real_rows(&[&[1.0]]));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]]);
        assert!(dft_matrix(2).unwrap().max_abs_diff(&want).unwrap() < 1e-15);
        let f4 = dft_matrix(4).unwrap();
        assert!((f4[(1, 1)] - c(0.0, 0.5)).norm() < 1e-15);
        for n in 1..=16 {
            assert!(fro_dev_from_identity(&dft_matrix(n).unwrap()) <= 1e-10);
        }
    }

    #[test]
    fn rotation_two_antenna_example() {
        let spec = CodebookSpec::new(CodebookFamily::Dftc, 2, 2, 4);
        let theta = dft_rotation(&spec).unwrap();
        let half = c((PI / 2.0).cos(), (PI / 2.0).sin());
        let seven = c((7.0 * PI / 2.0).cos(), (7.0 * PI / 2.0).sin());
        assert!(theta.max_abs_diff(&ComplexMatrix::diagonal(&[half, seven])).unwrap() < 1e-12);
    }

    #[test]
    fn rotation_zero_vector_is_identity() {
        let spec = CodebookSpec::new(CodebookFamily::Dftc, 4, 2, 16).with_rotation(vec![0; 4], None);
        assert_eq!(dft_rotation(&spec).unwrap(), ComplexMatrix::identity(4));
    }

    #[test]
    fn rotation_full_turn() {
        for (u, base) in [(vec![1, 7, 52, 56], 64u64), (vec![3, 5, 11, 13], 17)] {
            let spec = CodebookSpec::new(CodebookFamily::Dftc, 4, 2, 64).with_rotation(u, Some(base));
            let theta = dft_rotation(&spec).unwrap();
            let mut acc = ComplexMatrix::identity(4);
            for _ in 0..base {
                acc = theta.matmul(&acc).unwrap();
            }
            assert!(acc.max_abs_diff(&ComplexMatrix::identity(4)).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn rotation_needs_u() {
        let spec = CodebookSpec::new(CodebookFamily::Dftc, 8, 2, 16);
        assert!(matches!(dft_rotation(&spec), Err(Error::Config(_))));
        assert!(matches!(build_codebook(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn ghc_full_matrix_rotations() {
        let real = build_codebook(&CodebookSpec::new(CodebookFamily::GhcReal, 4, 4, 8)).unwrap();
        let w1 = real.get(1).unwrap();
        assert_eq!(real.get(3).unwrap(), w1);
        for i in 1..8 {
            assert_eq!(real.get(i + 1).unwrap(), &real.get(i).unwrap().scale(c(-1.0, 0.0)));
        }

        let cplx = build_codebook(&CodebookSpec::new(CodebookFamily::GhcComplex, 4, 4, 8)).unwrap();
        let w1 = cplx.get(1).unwrap();
        assert_eq!(cplx.get(3).unwrap(), &w1.scale(c(-1.0, 0.0)));
        for i in 1..8 {
            assert_eq!(cplx.get(i + 1).unwrap(), &cplx.get(i).unwrap().scale(c(0.0, -1.0)));
        }
    }

    #[test]
    fn dftc_two_antenna_third_entry() {
        let cb = build_codebook(&CodebookSpec::new(CodebookFamily::Dftc, 2, 2, 4)).unwrap();
        let theta = dft_rotation(cb.spec()).unwrap();
        let want = theta.matmul(&theta).unwrap().matmul(&dft_matrix(2).unwrap()).unwrap();
        assert!(cb.get(3).unwrap().max_abs_diff(&want).unwrap() < 1e-15);
    }

    #[test]
    fn dftc_columns_orthonormal() {
        let cb = build_codebook(&CodebookSpec::new(CodebookFamily::Dftc, 4, 2, 64)).unwrap();
        for w in cb.matrices() {
            assert!(fro_dev_from_identity(w) <= 1e-10);
        }
    }

    #[test]
    fn subset_enumeration_order() {
        assert_eq!(
            column_subsets(4, 2),
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(subset_count(4, 4), 1);
        assert_eq!(subset_count(8, 2), 28);
    }

    #[test]
    fn hc_entries_and_extension() {
        let cb = build_codebook(&CodebookSpec::new(CodebookFamily::Hc, 4, 2, 64)).unwrap();
        assert_eq!(cb.len(), 64);
        let h = sylvester_hadamard(2).unwrap().scale(c(0.5, 0.0));
        assert_eq!(cb.get(1).unwrap(), &h.select_columns(&[0, 1]).unwrap());
        assert_eq!(cb.get(6).unwrap(), &h.select_columns(&[2, 3]).unwrap());
        assert_eq!(cb.get(7).unwrap(), &cb.get(1).unwrap().scale(c(-1.0, 0.0)));
        assert_eq!(cb.get(13).unwrap(), cb.get(1).unwrap());
        for w in cb.matrices() {
            assert!(fro_dev_from_identity(w) <= 1e-12);
        }
    }

    #[test]
    fn dc_entries_are_phased_basis_columns() {
        let cb = build_codebook(&CodebookSpec::new(CodebookFamily::Dc, 4, 2, 64)).unwrap();
        for w in cb.matrices() {
            assert!(fro_dev_from_identity(w) <= 1e-12);
            for j in 0..2 {
                assert_eq!(w.column(j).iter().filter(|z| z.norm() > 0.0).count(), 1);
            }
        }
        let w8 = cb.get(8).unwrap();
        let phase = unit_phase(1.0 / 64.0);
        assert_eq!(w8[(0, 0)], phase);
        assert_eq!(w8[(2, 1)], phase);
    }

    #[test]
    fn build_rejects_bad_specs() {
        let mut spec = CodebookSpec::new(CodebookFamily::Hc, 4, 2, 0);
        assert!(matches!(build_codebook(&spec), Err(Error::Config(_))));
        spec.l = 4;
        spec.m = 5;
        assert!(matches!(build_codebook(&spec), Err(Error::Config(_))));
        spec.m = 2;
        spec.n_t = 6;
        assert!(matches!(build_codebook(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn build_is_deterministic() {
        for family in CodebookFamily::ALL {
            let spec = CodebookSpec::new(family, 4, 2, 64);
            assert_eq!(build_codebook(&spec).unwrap(), build_codebook(&spec).unwrap());
        }
    }

    #[test]
    fn family_names_round_trip() {
        for family in CodebookFamily::ALL {
            assert_eq!(family.as_str().parse::<CodebookFamily>().unwrap(), family);
            assert_eq!(family.slug().parse::<CodebookFamily>().unwrap(), family);
        }
        assert!("qam".parse::<CodebookFamily>().is_err());
    }
}
