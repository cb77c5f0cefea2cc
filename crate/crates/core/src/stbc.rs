//! Square Gray-coded QAM, the Alamouti block, precoding and the
//! single-antenna Alamouti receiver.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{c, ComplexMatrix, ComplexScalar};

/// Square QAM on the odd-integer lattice with per-axis reflected-binary
/// Gray labels.
///
/// `points[i]` carries label `labels[i]`. The high `b/2` label bits select
/// the in-phase level, the low bits the quadrature level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QamConstellation {
    pub b: u32,
    pub points: Vec<ComplexScalar>,
    pub labels: Vec<u32>,
    pub normalized: bool,
    /// Lattice scale: a point is `scale·(odd_i + j·odd_q)`.
    pub(crate) scale: f64,
    /// Point index for each label.
    #[serde(skip)]
    pub(crate) by_label: Vec<usize>,
}

fn gray(k: u32) -> u32 {
    k ^ (k >> 1)
}

/// Builds the `2^b`-point square QAM (`b` ∈ {2, 4, 6}).
pub fn make_constellation(b: u32, normalized: bool) -> Result<QamConstellation> {
    if !matches!(b, 2 | 4 | 6) {
        return Err(Error::Config(format!(
            "unsupported bits per symbol {b}; expected 2, 4 or 6"
        )));
    }
    let half = b / 2;
    let side = 1u32 << half;
    // Mean energy of the odd-integer square lattice: 2·(side² − 1)/3.
    let energy = 2.0 * (side * side - 1) as f64 / 3.0;
    let scale = if normalized { 1.0 / energy.sqrt() } else { 1.0 };
    let mut points = Vec::with_capacity((side * side) as usize);
    let mut labels = Vec::with_capacity(points.capacity());
    for i in 0..side {
        for q in 0..side {
            let level = |k: u32| (2 * k as i64 - (side as i64 - 1)) as f64;
            points.push(c(level(i) * scale, level(q) * scale));
            labels.push((gray(i) << half) | gray(q));
        }
    }
    let mut by_label = vec![0; labels.len()];
    for (idx, &label) in labels.iter().enumerate() {
        by_label[label as usize] = idx;
    }
    Ok(QamConstellation {
        b,
        points,
        labels,
        normalized,
        scale,
        by_label,
    })
}

impl QamConstellation {
    pub fn size(&self) -> usize {
        self.points.len()
    }

    fn side(&self) -> u32 {
        1 << (self.b / 2)
    }

    /// Distance between adjacent lattice points.
    pub fn min_distance(&self) -> f64 {
        2.0 * self.scale
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.size() as f64
    }

    /// Point carrying `label`.
    pub fn point(&self, label: u32) -> ComplexScalar {
        self.points[self.by_label[label as usize]]
    }

    /// Nearest lattice point, returned as its index into `points`.
    pub fn slice(&self, z: ComplexScalar) -> usize {
        let side = self.side();
        let axis = |x: f64| -> u32 {
            let k = ((x / self.scale + (side as f64 - 1.0)) / 2.0).round();
            k.clamp(0.0, (side - 1) as f64) as u32
        };
        (axis(z.re) * side + axis(z.im)) as usize
    }

    /// Label of the nearest lattice point.
    pub fn slice_label(&self, z: ComplexScalar) -> u32 {
        self.labels[self.slice(z)]
    }
}

/// Maps bits (one `0`/`1` per byte, MSB first within each symbol) to symbols.
pub fn modulate(bits: &[u8], c: &QamConstellation) -> Result<Vec<ComplexScalar>> {
    let b = c.b as usize;
    if !bits.len().is_multiple_of(b) {
        return Err(Error::Shape(format!(
            "{} bits do not divide into {b}-bit symbols",
            bits.len()
        )));
    }
    bits.chunks(b)
        .map(|chunk| {
            let mut label = 0u32;
            for &bit in chunk {
                if bit > 1 {
                    return Err(Error::Domain(format!("bit value {bit} is not 0 or 1")));
                }
                label = (label << 1) | bit as u32;
            }
            Ok(c.point(label))
        })
        .collect()
}

/// Hard-decision demapping back to bits.
pub fn demodulate(symbols: &[ComplexScalar], c: &QamConstellation) -> Vec<u8> {
    let mut out = Vec::with_capacity(symbols.len() * c.b as usize);
    for &z in symbols {
        push_label_bits(c.slice_label(z), c.b, &mut out);
    }
    out
}

fn push_label_bits(label: u32, b: u32, out: &mut Vec<u8>) {
    for k in (0..b).rev() {
        out.push(((label >> k) & 1) as u8);
    }
}

/// The 2×2 Alamouti block `[[s11, −s21*], [s21, s11*]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlamoutiBlock {
    pub s11: ComplexScalar,
    pub s21: ComplexScalar,
    pub matrix: ComplexMatrix,
}

pub fn alamouti_encode(s11: ComplexScalar, s21: ComplexScalar) -> AlamoutiBlock {
    let matrix = ComplexMatrix::from_rows(&[vec![s11, -s21.conj()], vec![s21, s11.conj()]]);
    AlamoutiBlock { s11, s21, matrix }
}

/// `X = W·S`.
pub fn precode(w: &ComplexMatrix, s: &AlamoutiBlock) -> Result<ComplexMatrix> {
    if w.cols() != 2 {
        return Err(Error::DimensionMismatch {
            op: "precode",
            left: w.shape(),
            right: s.matrix.shape(),
        });
    }
    w.matmul(&s.matrix)
}

/// Output of [`ml_decode`].
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub s11: ComplexScalar,
    pub s21: ComplexScalar,
    /// `2b` bits, first symbol first.
    pub bits: Vec<u8>,
}

/// Alamouti combining of two received samples, before slicing.
///
/// Returns `(ŝ₁, ŝ₂, ‖g‖²)` with `ŝ₁ = g₁*y₁ + g₂y₂*` and
/// `ŝ₂ = g₂*y₁ − g₁y₂*`.
#[inline]
pub fn alamouti_combine(
    y: [ComplexScalar; 2],
    g: [ComplexScalar; 2],
) -> (ComplexScalar, ComplexScalar, f64) {
    let s1 = g[0].conj() * y[0] + g[1] * y[1].conj();
    let s2 = g[1].conj() * y[0] - g[0] * y[1].conj();
    (s1, s2, g[0].norm_sqr() + g[1].norm_sqr())
}

/// Combine-and-slice on plain arrays. Returns the two point indices.
#[inline]
pub(crate) fn decode_pair(
    y: [ComplexScalar; 2],
    g: [ComplexScalar; 2],
    c: &QamConstellation,
) -> Option<(usize, usize)> {
    let (s1, s2, energy) = alamouti_combine(y, g);
    if energy.is_nan() || energy <= 0.0 {
        return None;
    }
    Some((c.slice(s1 / energy), c.slice(s2 / energy)))
}

/// Linear ML decoding of a precoded Alamouti block at a single antenna.
///
/// `y` is the 1×2 received row, `h_eff = hᵀW` the 1×2 effective channel.
pub fn ml_decode(
    y: &ComplexMatrix,
    h_eff: &ComplexMatrix,
    c: &QamConstellation,
) -> Result<Decoded> {
    if y.shape() != (1, 2) || h_eff.shape() != (1, 2) {
        return Err(Error::DimensionMismatch {
            op: "ml_decode",
            left: y.shape(),
            right: h_eff.shape(),
        });
    }
    let (i1, i2) = decode_pair([y[(0, 0)], y[(0, 1)]], [h_eff[(0, 0)], h_eff[(0, 1)]], c)
        .ok_or_else(|| Error::Decode("effective channel is zero".into()))?;
    let mut bits = Vec::with_capacity(2 * c.b as usize);
    push_label_bits(c.labels[i1], c.b, &mut bits);
    push_label_bits(c.labels[i2], c.b, &mut bits);
    Ok(Decoded {
        s11: c.points[i1],
        s21: c.points[i2],
        bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn qpsk_normalized() {
        let q = make_constellation(2, true).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for p in &q.points {
            assert!((p.re.abs() - s).abs() < 1e-15 && (p.im.abs() - s).abs() < 1e-15);
        }
        assert!((q.mean_energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qam16_normalization_and_distance() {
        let n = make_constellation(4, true).unwrap();
        assert!((n.mean_energy() - 1.0).abs() < 1e-12);
        let peak = n.points.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((peak - (18.0f64 / 10.0).sqrt()).abs() < 1e-12);
        assert!(n.points.contains(&c(3.0 / 10f64.sqrt(), 3.0 / 10f64.sqrt())));

        let u = make_constellation(4, false).unwrap();
        let mut dmin = f64::INFINITY;
        for (i, a) in u.points.iter().enumerate() {
            for b in &u.points[i + 1..] {
                dmin = dmin.min((a - b).norm());
            }
        }
        assert_eq!(dmin, 2.0);
        assert_eq!(u.min_distance(), 2.0);

        let q64 = make_constellation(6, true).unwrap();
        assert!((q64.mean_energy() - 1.0).abs() < 1e-12);
        assert!((q64.min_distance() - 2.0 / 42f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_unsupported_order() {
        assert!(matches!(make_constellation(3, true), Err(Error::Config(_))));
        assert!(make_constellation(8, false).is_err());
    }

    #[test]
    fn labels_are_a_bijection() {
        for b in [2, 4, 6] {
            let q = make_constellation(b, false).unwrap();
            let mut seen = q.labels.clone();
            seen.sort_unstable();
            assert_eq!(seen, (0..1u32 << b).collect::<Vec<_>>());
        }
    }

    #[test]
    fn gray_neighbors_differ_in_one_bit() {
        for b in [4, 6] {
            let q = make_constellation(b, false).unwrap();
            for (i, p) in q.points.iter().enumerate() {
                for (j, r) in q.points.iter().enumerate() {
                    if (p - r).norm() == 2.0 {
                        assert_eq!((q.labels[i] ^ q.labels[j]).count_ones(), 1);
                    }
                }
            }
            // Flipping one label bit lands on a lattice point in the same row
            // or column.
            for label in 0..1u32 << b {
                for k in 0..b {
                    let p = q.point(label);
                    let r = q.point(label ^ (1 << k));
                    assert!(p.re == r.re || p.im == r.im);
                }
            }
        }
    }

    #[test]
    fn modulate_cases() {
        let q = make_constellation(4, true).unwrap();
        assert!(modulate(&[], &q).unwrap().is_empty());
        assert!(matches!(modulate(&[1, 0, 1], &q), Err(Error::Shape(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bits: Vec<u8> = (0..400).map(|_| rng.random_range(0..2)).collect();
        let syms = modulate(&bits, &q).unwrap();
        assert_eq!(syms.len(), 100);
        assert_eq!(demodulate(&syms, &q), bits);
    }

    #[test]
    fn alamouti_cases() {
        let blk = alamouti_encode(c(1.0, 1.0), c(1.0, -1.0));
        let want = ComplexMatrix::from_rows(&[
            vec![c(1.0, 1.0), c(-1.0, -1.0)],
            vec![c(1.0, -1.0), c(1.0, -1.0)],
        ]);
        assert_eq!(blk.matrix, want);
        assert_eq!(alamouti_encode(c(0.0, 0.0), c(0.0, 0.0)).matrix, ComplexMatrix::zeros(2, 2));

        // (s, −s) under [[1,1],[1,−1]] leaves only the anti-diagonal.
        let s = c(0.3, -1.1);
        let h2 = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]]);
        let x = precode(&h2, &alamouti_encode(s, -s)).unwrap();
        assert_eq!(x[(0, 0)], c(0.0, 0.0));
        assert_eq!(x[(1, 1)], c(0.0, 0.0));
        assert_eq!(x[(0, 1)], 2.0 * s.conj());
        assert_eq!(x[(1, 0)], 2.0 * s);
    }

    #[test]
    fn alamouti_is_orthogonal() {
        let q = make_constellation(4, false).unwrap();
        for &a in &q.points {
            for &b in &q.points {
                let m = alamouti_encode(a, b).matrix;
                let g = m.hermitian().matmul(&m).unwrap();
                let e = a.norm_sqr() + b.norm_sqr();
                assert_eq!(g, ComplexMatrix::diagonal(&[c(e, 0.0), c(e, 0.0)]));
            }
        }
    }

    #[test]
    fn precode_identity_and_energy() {
        let blk = alamouti_encode(c(0.5, 0.2), c(-0.1, 0.7));
        assert_eq!(precode(&ComplexMatrix::identity(2), &blk).unwrap(), blk.matrix);
        // Orthogonal columns of squared norm 4.
        let w = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0], &[1.0, 1.0], &[1.0, -1.0]]);
        let x = precode(&w, &blk).unwrap();
        assert!((x.frobenius_norm_sq() - 4.0 * blk.matrix.frobenius_norm_sq()).abs() < 1e-12);
        assert!(precode(&ComplexMatrix::identity(3), &blk).is_err());
    }

    fn receive(g: [ComplexScalar; 2], blk: &AlamoutiBlock) -> ComplexMatrix {
        let g = ComplexMatrix::new(1, 2, g.to_vec()).unwrap();
        g.matmul(&blk.matrix).unwrap()
    }

    #[test]
    fn noiseless_decode_all_pairs() {
        let q = make_constellation(4, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = [c(rng.random(), rng.random()), c(rng.random(), -rng.random::<f64>())];
        let h = ComplexMatrix::new(1, 2, g.to_vec()).unwrap();
        for &a in &q.points {
            for &b in &q.points {
                let blk = alamouti_encode(a, b);
                let d = ml_decode(&receive(g, &blk), &h, &q).unwrap();
                assert_eq!((d.s11, d.s21), (a, b));
            }
        }
    }

    #[test]
    fn degenerate_channel() {
        let q = make_constellation(4, true).unwrap();
        let g = [c(1.0, 0.0), c(0.0, 0.0)];
        let blk = alamouti_encode(q.points[3], q.points[9]);
        let y = receive(g, &blk);
        let (s1, s2, e) = alamouti_combine([y[(0, 0)], y[(0, 1)]], g);
        assert_eq!(e, 1.0);
        assert_eq!(s1, y[(0, 0)]);
        assert_eq!(s2, -y[(0, 1)].conj());
        let d = ml_decode(&y, &ComplexMatrix::new(1, 2, g.to_vec()).unwrap(), &q).unwrap();
        assert_eq!((d.s11, d.s21), (q.points[3], q.points[9]));
    }

    #[test]
    fn zero_channel_is_decode_error() {
        let q = make_constellation(4, true).unwrap();
        let z = ComplexMatrix::zeros(1, 2);
        assert!(matches!(ml_decode(&z, &z, &q), Err(Error::Decode(_))));
    }

    #[test]
    fn matches_exhaustive_joint_ml() {
        let q = make_constellation(4, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut gauss = || c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        for _ in 0..1000 {
            let g = [gauss(), gauss()];
            let a = q.points[(gauss().re.abs() * 1e6) as usize % 16];
            let b = q.points[(gauss().im.abs() * 1e6) as usize % 16];
            let blk = alamouti_encode(a, b);
            let clean = receive(g, &blk);
            let y = [clean[(0, 0)] + 0.3 * gauss(), clean[(0, 1)] + 0.3 * gauss()];
            let ym = ComplexMatrix::new(1, 2, y.to_vec()).unwrap();
            let hm = ComplexMatrix::new(1, 2, g.to_vec()).unwrap();
            let fast = ml_decode(&ym, &hm, &q).unwrap();

            let mut best = (f64::INFINITY, c(0.0, 0.0), c(0.0, 0.0));
            for &u in &q.points {
                for &v in &q.points {
                    let r = receive(g, &alamouti_encode(u, v));
                    let d = (y[0] - r[(0, 0)]).norm_sqr() + (y[1] - r[(0, 1)]).norm_sqr();
                    if d < best.0 {
                        best = (d, u, v);
                    }
                }
            }
            assert_eq!((fast.s11, fast.s21), (best.1, best.2));
        }
    }

    #[test]
    fn decode_is_phase_invariant() {
        let q = make_constellation(4, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let g = [c(rng.random(), rng.random()), c(rng.random(), rng.random())];
            let y = [c(rng.random(), rng.random()), c(rng.random(), rng.random())];
            let rot = c(0.0, rng.random::<f64>() * 6.0).exp();
            let mk = |v: [ComplexScalar; 2]| ComplexMatrix::new(1, 2, v.to_vec()).unwrap();
            let a = ml_decode(&mk(y), &mk(g), &q).unwrap();
            let b = ml_decode(&mk([y[0] * rot, y[1] * rot]), &mk([g[0] * rot, g[1] * rot]), &q).unwrap();
            assert_eq!(a.bits, b.bits);
        }
    }
}
