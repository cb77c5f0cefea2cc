//! `GHCB v1` codebook files.
//!
//! ```text
//! GHCB v1
//! family=GHC_REAL n_t=4 m=2 l=6 q=2 u=- n=2.2360679774997898e0 l_rot=-
//! matrix i=1
//! 6.0925403446056225e-1+0.0000000000000000e0j 6.0925403446056225e-1+0.0000000000000000e0j
//! ...
//! ```
//!
//! Entries carry 17 significant digits, which round-trips every `f64`.

use std::fs;
use std::path::Path;

use super::{Codebook, CodebookFamily, CodebookSpec};
use crate::error::{Error, Result};
use crate::matrix::{c, ComplexMatrix, ComplexScalar};

pub const FORMAT_HEADER: &str = "GHCB v1";

const META_KEYS: [&str; 8] = ["family", "n_t", "m", "l", "q", "u", "n", "l_rot"];

fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_entry(z: ComplexScalar) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", format_real(z.re), sign, format_real(z.im.abs()))
}

/// Serializes a codebook to `GHCB v1` text.
pub fn write_codebook(cb: &Codebook) -> String {
    let spec = cb.spec();
    let u = spec.rotation_u.as_ref().map_or_else(
        || "-".to_string(),
        |u| u.iter().map(i64::to_string).collect::<Vec<_>>().join(","),
    );
    let n = spec.golden_case_n.map_or_else(|| "-".to_string(), format_real);
    let l_rot = spec.rotation_base.map_or_else(|| "-".to_string(), |b| b.to_string());
    let mut out = String::new();
    out.push_str(FORMAT_HEADER);
    out.push('\n');
    out.push_str(&format!(
        "family={} n_t={} m={} l={} q={} u={} n={} l_rot={}\n",
        spec.family,
        spec.n_t,
        spec.m,
        spec.l,
        spec.q(),
        u,
        n,
        l_rot
    ));
    for (idx, w) in cb.matrices().iter().enumerate() {
        out.push_str(&format!("matrix i={}\n", idx + 1));
        for r in 0..w.rows() {
            let row: Vec<String> = (0..w.cols()).map(|k| format_entry(w[(r, k)])).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn save_codebook(cb: &Codebook, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_codebook(cb))?;
    Ok(())
}

pub fn load_codebook(path: impl AsRef<Path>) -> Result<Codebook> {
    parse_codebook(&fs::read_to_string(path)?)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_real(tok: &str, line: usize) -> Result<f64> {
    let x: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("bad number `{tok}`")))?;
    if !x.is_finite() {
        return Err(parse_err(line, format!("non-finite number `{tok}`")));
    }
    Ok(x)
}

fn parse_entry(tok: &str, line: usize) -> Result<ComplexScalar> {
    let body = tok
        .strip_suffix('j')
        .ok_or_else(|| parse_err(line, format!("entry `{tok}` lacks trailing `j`")))?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
        .ok_or_else(|| parse_err(line, format!("entry `{tok}` has no imaginary part")))?;
    let re = parse_real(&body[..split], line)?;
    let im_abs = parse_real(&body[split + 1..], line)?;
    let im = if bytes[split] == b'-' { -im_abs } else { im_abs };
    Ok(c(re, im))
}

/// A real number or an `a±bj` entry.
pub(crate) fn parse_complex(tok: &str) -> Result<ComplexScalar> {
    if tok.ends_with('j') {
        parse_entry(tok, 1)
    } else {
        parse_real(tok, 1).map(|x| c(x, 0.0))
    }
    .map_err(|_| Error::Config(format!("bad complex number `{tok}`")))
}

fn parse_meta(text: &str, line: usize) -> Result<CodebookSpec> {
    let mut fields: Vec<(&str, &str)> = Vec::new();
    for pair in text.split_whitespace() {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected key=value, got `{pair}`")))?;
        if !META_KEYS.contains(&k) {
            return Err(parse_err(line, format!("unknown key `{k}`")));
        }
        if fields.iter().any(|(seen, _)| *seen == k) {
            return Err(parse_err(line, format!("duplicate key `{k}`")));
        }
        fields.push((k, v));
    }
    let get = |k: &str| -> Result<&str> {
        fields
            .iter()
            .find(|(key, _)| *key == k)
            .map(|(_, v)| *v)
            .ok_or_else(|| parse_err(line, format!("missing key `{k}`")))
    };
    let int = |k: &str| -> Result<usize> {
        get(k)?
            .parse()
            .map_err(|_| parse_err(line, format!("`{k}` is not a non-negative integer")))
    };
    let family: CodebookFamily = get("family")?
        .parse()
        .map_err(|e: Error| parse_err(line, e.to_string()))?;
    let n_t = int("n_t")?;
    let m = int("m")?;
    let l = int("l")?;
    let q = int("q")?;
    let rotation_u = match get("u")? {
        "-" => None,
        u => Some(
            u.split(',')
                .map(|x| {
                    x.parse::<i64>()
                        .map_err(|_| parse_err(line, format!("bad rotation index `{x}`")))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };
    let golden_case_n = match get("n")? {
        "-" => None,
        n => Some(parse_real(n, line)?),
    };
    let rotation_base = match fields.iter().find(|(k, _)| *k == "l_rot") {
        None | Some((_, "-")) => None,
        Some((_, b)) => Some(
            b.parse::<u64>()
                .map_err(|_| parse_err(line, format!("bad l_rot `{b}`")))?,
        ),
    };
    let spec = CodebookSpec {
        family,
        n_t,
        m,
        l,
        rotation_u,
        rotation_base,
        golden_case_n,
    };
    if !n_t.is_power_of_two() || spec.q() as usize != q {
        return Err(Error::Validation(format!("q = {q} does not match n_t = {n_t}")));
    }
    spec.validate()
        .map_err(|e| Error::Validation(e.to_string()))?;
    Ok(spec)
}

/// Parses `GHCB v1` text.
pub fn parse_codebook(text: &str) -> Result<Codebook> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if header != FORMAT_HEADER {
        if let Some(version) = header.strip_prefix("GHCB ") {
            return Err(parse_err(ln, format!("unsupported format version `{version}`")));
        }
        return Err(parse_err(ln, format!("expected `{FORMAT_HEADER}` header")));
    }
    let (ln, meta) = lines
        .next()
        .ok_or_else(|| parse_err(ln + 1, "missing metadata line"))?;
    let spec = parse_meta(meta, ln)?;

    let mut matrices = Vec::with_capacity(spec.l);
    while let Some((ln, line)) = lines.next() {
        let idx = line
            .strip_prefix("matrix i=")
            .ok_or_else(|| parse_err(ln, format!("expected `matrix i=<idx>`, got `{line}`")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| parse_err(ln, format!("bad matrix index `{idx}`")))?;
        if idx != matrices.len() + 1 {
            return Err(parse_err(
                ln,
                format!("matrix index {idx} out of sequence (expected {})", matrices.len() + 1),
            ));
        }
        let mut data = Vec::with_capacity(spec.n_t * spec.m);
        let mut last_line = ln;
        for _ in 0..spec.n_t {
            let (rl, row) = lines
                .next()
                .ok_or_else(|| parse_err(last_line + 1, format!("matrix {idx} is truncated")))?;
            last_line = rl;
            let entries = row
                .split_whitespace()
                .map(|tok| parse_entry(tok, rl))
                .collect::<Result<Vec<_>>>()?;
            if entries.len() != spec.m {
                return Err(parse_err(
                    rl,
                    format!("expected {} entries, found {}", spec.m, entries.len()),
                ));
            }
            data.extend(entries);
        }
        matrices.push(ComplexMatrix::new(spec.n_t, spec.m, data)?);
    }
    Codebook::from_parts(spec, matrices)
}
