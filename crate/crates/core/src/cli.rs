//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 I/O error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::channel::{sample_channel, FeedbackMode, Rng};
use crate::codebook::{build_codebook, parse_complex, save_codebook, subset_count, CodebookFamily};
use crate::config::{parse_families, parse_feedback, parse_snr_grid, CliConfig};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::metrics::{ber_union_bound, min_chordal_distance, min_determinant, pep_chernoff, THETA_SQ_LITERAL};
use crate::sim::{run_sweep_with, select_precoder};
use crate::stbc::make_constellation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ghcb", version, about = "Golden-Hadamard precoding codebooks for MISO Alamouti")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// key = value experiment file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file or directory.
    #[arg(short = 'o', long = "out", global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpecArgs {
    #[arg(long)]
    family: Option<String>,
    /// Hadamard order; `n_t = 2^q`.
    #[arg(long, conflicts_with = "n_t")]
    q: Option<u32>,
    #[arg(long = "n-t")]
    n_t: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    /// DFTC rotation indices, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
    /// DFTC phase base.
    #[arg(long = "l-rot")]
    l_rot: Option<u64>,
    /// Golden root `n`.
    #[arg(long)]
    n: Option<f64>,
}

impl SpecArgs {
    fn n_t(&self) -> Result<Option<usize>> {
        match (self.q, self.n_t) {
            (Some(q), _) if q == 0 || q > 8 => Err(Error::Config(format!("q must be in 1..=8, got {q}"))),
            (Some(q), _) => Ok(Some(1usize << q)),
            (None, n_t) => Ok(n_t),
        }
    }

    fn overrides(&self) -> Result<CliConfig> {
        Ok(CliConfig {
            families: self.family.as_deref().map(parse_families).transpose()?,
            n_t: self.n_t()?,
            m: self.m,
            l: self.l,
            u: self
                .u
                .as_deref()
                .map(|u| {
                    u.split(',')
                        .map(|x| {
                            x.trim()
                                .parse::<i64>()
                                .map_err(|_| Error::Config(format!("bad rotation index `{x}`")))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?,
            l_rot: self.l_rot,
            n: self.n,
            ..Default::default()
        })
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Table {
    Mcd,
    Md,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a codebook and write it as a GHCB v1 file.
    Codebook {
        #[command(flatten)]
        spec: SpecArgs,
        /// Scale every column to unit norm.
        #[arg(long)]
        renormalize: bool,
    },
    /// Print the MCD or MD table over codebook families.
    Tables {
        which: Table,
        #[arg(long)]
        families: Option<String>,
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Run BER sweeps, one CSV and JSON per family.
    Ber {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        families: Option<String>,
        /// Bits per symbol (2, 4 or 6).
        #[arg(long)]
        b: Option<u32>,
        /// `start:step:stop` or a comma list, in dB.
        #[arg(long = "snr-db", allow_hyphen_values = true)]
        snr_db: Option<String>,
        /// `perfect` or `delayed`.
        #[arg(long)]
        feedback: Option<String>,
        #[arg(long = "fd-tc")]
        fd_tc: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long = "min-trials")]
        min_trials: Option<u64>,
        #[arg(long = "min-bit-errors")]
        min_bit_errors: Option<u64>,
        #[arg(long = "max-trials")]
        max_trials: Option<u64>,
        #[arg(long)]
        renormalize: bool,
        /// Print the resolved configuration and exit.
        #[arg(long = "dry-run")]
        dry_run: bool,
    },
    /// Chernoff pairwise bound and BER union bound over an SNR grid.
    Bound {
        /// Channel entries, comma separated (`1`, `0.5-2j`, ...).
        #[arg(long, allow_hyphen_values = true)]
        h: Option<String>,
        #[arg(long = "snr-db", allow_hyphen_values = true, default_value = "0:2:30")]
        snr_db: String,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long = "theta-sq", default_value_t = THETA_SQ_LITERAL)]
        theta_sq: f64,
        #[arg(long, default_value_t = 4)]
        b: u32,
        /// Channels to average over when `--h` is absent.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Codebook used to form the effective channel for sampled `h`.
        #[arg(long, default_value = "ghc-real")]
        family: String,
        #[arg(long, default_value_t = 64)]
        l: usize,
    },
}

/// Parses `args` (including the program name) and runs the command.
///
/// Sweep progress goes straight to the process's stderr; `err` receives
/// diagnostics.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_progress(args, out, err, true)
}

pub fn run_with_progress<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, progress: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let quiet = !progress;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return if code == 0 { EXIT_OK } else { EXIT_VALIDATION };
        }
    };
    let result = match cli.common.threads {
        Some(0) => Err(Error::Config("--threads must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))
            .and_then(|pool| {
                let mut buf = Vec::new();
                let r = pool.install(|| dispatch(&cli, &mut buf, quiet));
                io(out.write_all(&buf)).and(r)
            }),
        None => dispatch(&cli, out, quiet),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn io<T>(r: std::io::Result<T>) -> Result<T> {
    r.map_err(Error::from)
}

fn dispatch(cli: &Cli, out: &mut dyn Write, quiet: bool) -> Result<()> {
    let file = match &cli.common.config {
        Some(p) => CliConfig::load(p)?,
        None => CliConfig::default(),
    };
    match &cli.command {
        Command::Codebook { spec, renormalize } => cmd_codebook(cli, file, spec, *renormalize, out),
        Command::Tables {
            which,
            families,
            spec,
        } => cmd_tables(cli, file, *which, families.as_deref(), spec, out),
        Command::Ber { .. } => cmd_ber(cli, file, out, !quiet),
        Command::Bound { .. } => cmd_bound(cli, out),
    }
}

fn cmd_codebook(
    cli: &Cli,
    file: CliConfig,
    args: &SpecArgs,
    renormalize: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let cfg = file.overridden_by(args.overrides()?);
    let families = cfg.families.clone().unwrap_or_else(|| vec![CodebookFamily::GhcReal]);
    let [family] = families[..] else {
        return Err(Error::Config("`codebook` takes exactly one family".into()));
    };
    let spec = cfg.codebook_spec(family)?;
    let mut cb = build_codebook(&spec)?;
    if renormalize || cfg.renormalize == Some(true) {
        cb = cb.renormalized();
    }
    let path = cli
        .common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.ghcb", family.slug())));
    save_codebook(&cb, &path)?;
    let mcd = if cb.len() >= 2 {
        Some(min_chordal_distance(&cb)?)
    } else {
        None
    };
    if cli.common.json {
        let v = json!({
            "family": family.as_str(),
            "n_t": spec.n_t,
            "m": spec.m,
            "l": cb.len(),
            "u": spec.rotation_u,
            "l_rot": (family == CodebookFamily::Dftc).then(|| spec.effective_rotation_base()),
            "mcd": mcd.as_ref().map(|r| r.value),
            "mcd_first_matrix": mcd.as_ref().map(|r| r.first_matrix_value),
            "path": path.display().to_string(),
        });
        io(writeln!(out, "{v}"))?;
    } else {
        if let Some(u) = &spec.rotation_u {
            let u: Vec<String> = u.iter().map(i64::to_string).collect();
            io(writeln!(
                out,
                "rotation u={} l_rot={}",
                u.join(","),
                spec.effective_rotation_base()
            ))?;
        }
        match &mcd {
            Some(r) => io(writeln!(
                out,
                "{} L={} MCD={:.4} (pair {},{}) MCD_first={:.4} -> {}",
                family,
                cb.len(),
                r.value,
                r.argmin_pair.0,
                r.argmin_pair.1,
                r.first_matrix_value,
                path.display()
            ))?,
            None => io(writeln!(out, "{} L={} MCD=- -> {}", family, cb.len(), path.display()))?,
        }
    }
    Ok(())
}

fn cmd_tables(
    cli: &Cli,
    file: CliConfig,
    which: Table,
    families: Option<&str>,
    args: &SpecArgs,
    out: &mut dyn Write,
) -> Result<()> {
    let mut over = args.overrides()?;
    if let Some(f) = families {
        over.families = Some(parse_families(f)?);
    }
    let mut cfg = file.overridden_by(over);
    let n_t = cfg.n_t.unwrap_or(4);
    let m = cfg.m.unwrap_or(2);
    // One entry per column subset unless asked otherwise.
    cfg.l = Some(cfg.l.unwrap_or_else(|| subset_count(n_t, m).max(2)));
    let mut rows = Vec::new();
    let mut text = String::new();
    match which {
        Table::Mcd => {
            let _ = writeln!(text, "{:<12} {:>4} {:>8} {:>10}", "family", "L", "MCD", "MCD_first");
            for family in cfg.families_or_all() {
                let cb = build_codebook(&cfg.codebook_spec(family)?)?;
                let r = min_chordal_distance(&cb)?;
                let _ = writeln!(
                    text,
                    "{:<12} {:>4} {:>8.4} {:>10.4}",
                    family.as_str(),
                    cb.len(),
                    r.value,
                    r.first_matrix_value
                );
                rows.push(json!({
                    "family": family.as_str(),
                    "l": cb.len(),
                    "mcd": r.value,
                    "argmin_pair": [r.argmin_pair.0, r.argmin_pair.1],
                    "mcd_first_matrix": r.first_matrix_value,
                }));
            }
        }
        Table::Md => {
            let _ = writeln!(text, "{:<12} {:>4} {:>3} {:>9} {:>12}", "family", "L", "b", "MD", "delta_inf");
            for family in cfg.families_or_all() {
                let cb = build_codebook(&cfg.codebook_spec(family)?)?;
                for b in [4, 6] {
                    let r = min_determinant(&cb, b)?;
                    let _ = writeln!(
                        text,
                        "{:<12} {:>4} {:>3} {:>9.4} {:>12.6}",
                        family.as_str(),
                        cb.len(),
                        b,
                        r.reported,
                        r.delta_inf
                    );
                    rows.push(json!({
                        "family": family.as_str(),
                        "l": cb.len(),
                        "b": b,
                        "md": r.reported,
                        "delta_inf": r.delta_inf,
                        "argmin_precoder": r.argmin.precoder_index,
                    }));
                }
            }
        }
    }
    if cli.common.json {
        io(writeln!(out, "{}", serde_json::Value::Array(rows)))
    } else {
        io(write!(out, "{text}"))
    }
}

fn ber_overrides(cli: &Cli) -> Result<CliConfig> {
    let Command::Ber {
        spec,
        families,
        b,
        snr_db,
        feedback,
        fd_tc,
        delta,
        min_trials,
        min_bit_errors,
        max_trials,
        renormalize,
        ..
    } = &cli.command
    else {
        unreachable!("called for the ber command only");
    };
    let mut over = spec.overrides()?;
    if let Some(f) = families {
        over.families = Some(parse_families(f)?);
    }
    over.b = *b;
    over.snr_db = snr_db.as_deref().map(parse_snr_grid).transpose()?;
    over.feedback = feedback.as_deref().map(parse_feedback).transpose()?;
    over.fd_tc = *fd_tc;
    over.delta = *delta;
    over.min_trials = *min_trials;
    over.min_bit_errors = *min_bit_errors;
    over.max_trials = *max_trials;
    over.seed = cli.common.seed;
    over.renormalize = renormalize.then_some(true);
    Ok(over)
}

fn gnuplot_stub(files: &[(CodebookFamily, String)]) -> String {
    let mut s = String::from(
        "set logscale y\nset xlabel 'SNR (dB)'\nset ylabel 'BER'\nset grid\nset datafile separator ','\nplot \\\n",
    );
    let lines: Vec<String> = files
        .iter()
        .map(|(f, csv)| format!("  '{csv}' every ::1 using 1:2 with linespoints title '{}'", f.as_str()))
        .collect();
    s.push_str(&lines.join(", \\\n"));
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(Error::from)
}

fn cmd_ber(cli: &Cli, file: CliConfig, out: &mut dyn Write, show_progress: bool) -> Result<()> {
    let Command::Ber { dry_run, .. } = &cli.command else {
        unreachable!("called for the ber command only");
    };
    let cfg = file.overridden_by(ber_overrides(cli)?);
    let sims = cfg.sim_configs()?;
    if *dry_run {
        return io(write!(out, "{}", cfg.resolved_text()?));
    }
    let alpha = sims[0].feedback.alpha()?;
    let dir = cli.common.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    std::fs::create_dir_all(&dir)?;
    if !cli.common.json {
        io(writeln!(out, "alpha={alpha:.4}"))?;
    }
    let mut written = Vec::new();
    let mut summary = Vec::new();
    for sim in &sims {
        let family = sim.codebook_spec.family;
        let progress = |snr: f64, trials: u64, errors: u64| {
            if show_progress {
                eprintln!("[{}] snr={snr} dB trials={trials} errors={errors}", family.slug());
            }
        };
        let result = run_sweep_with(sim, None, Some(&progress))?;
        let csv_name = format!("{}.csv", family.slug());
        write_file(&dir.join(&csv_name), &result.to_csv())?;
        write_file(&dir.join(format!("{}.json", family.slug())), &result.to_json())?;
        let low: Vec<f64> = result
            .points
            .iter()
            .filter(|p| p.low_confidence)
            .map(|p| p.snr_db)
            .collect();
        if !cli.common.json {
            for p in &result.points {
                io(writeln!(
                    out,
                    "{:<12} {:>6.1} dB  ber={:.4e}  errors={}  trials={}{}",
                    family.as_str(),
                    p.snr_db,
                    p.ber,
                    p.bit_errors,
                    p.trials,
                    if p.low_confidence { "  (low confidence)" } else { "" }
                ))?;
            }
        }
        summary.push(json!({
            "family": family.as_str(),
            "csv": dir.join(&csv_name).display().to_string(),
            "codebook_digest": result.codebook_digest,
            "low_confidence_snr_db": low,
            "points": result.points,
        }));
        written.push((family, csv_name));
    }
    write_file(&dir.join("plot.gp"), &gnuplot_stub(&written))?;
    if cli.common.json {
        let mode = match sims[0].feedback.mode {
            FeedbackMode::Perfect => "PERFECT",
            FeedbackMode::Delayed => "DELAYED",
        };
        io(writeln!(
            out,
            "{}",
            json!({ "alpha": alpha, "feedback": mode, "results": summary })
        ))?;
    }
    Ok(())
}

fn cmd_bound(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let Command::Bound {
        h,
        snr_db,
        q,
        theta_sq,
        b,
        samples,
        family,
        l,
    } = &cli.command
    else {
        unreachable!("called for the bound command only");
    };
    let grid = parse_snr_grid(snr_db)?;
    if let Some(bad) = grid.iter().find(|s| **s < 0.0) {
        return Err(Error::Config(format!("SNR must be >= 0 dB, got {bad}")));
    }
    if !(theta_sq.is_finite() && *theta_sq > 0.0) {
        return Err(Error::Config(format!("--theta-sq must be positive, got {theta_sq}")));
    }
    let constellation = make_constellation(*b, true)?;
    let channels: Vec<ComplexMatrix> = match h {
        Some(h) => {
            let entries = h
                .split(',')
                .map(|t| parse_complex(t.trim()))
                .collect::<Result<Vec<_>>>()?;
            vec![ComplexMatrix::column_vector(&entries)]
        }
        None => {
            if *samples == 0 {
                return Err(Error::Config("--samples must be >= 1".into()));
            }
            let n_t = 1usize << q;
            let cfg = CliConfig {
                n_t: Some(n_t),
                l: Some(*l),
                ..Default::default()
            };
            let cb = build_codebook(&cfg.codebook_spec(family.parse()?)?)?;
            let seed = cli.common.seed.unwrap_or(1);
            (0..*samples as u64)
                .map(|t| {
                    let ch = sample_channel(&mut Rng::new(seed, t), n_t);
                    let (_, w) = select_precoder(&ch, &cb)?;
                    Ok(ch.transpose().matmul(&w)?.transpose())
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let n = channels.len() as f64;
    let mut rows = Vec::new();
    let mut text = format!("{:>7} {:>12} {:>12} {:>12}\n", "snr_db", "pep", "bound", "bound_raw");
    for &snr in &grid {
        let lin = 10f64.powf(snr / 10.0);
        let (mut pep, mut value, mut raw) = (0.0, 0.0, 0.0);
        for ch in &channels {
            pep += pep_chernoff(ch, lin, *q, *theta_sq)?;
            let ub = ber_union_bound(&constellation, ch, lin, *q, *theta_sq)?;
            value += ub.value;
            raw += ub.raw;
        }
        let (pep, value, raw) = (pep / n, value / n, raw / n);
        let _ = writeln!(text, "{snr:>7.1} {pep:>12.6} {value:>12.6e} {raw:>12.6e}");
        rows.push(json!({ "snr_db": snr, "pep": pep, "bound": value, "bound_raw": raw }));
    }
    if cli.common.json {
        io(writeln!(
            out,
            "{}",
            json!({ "theta_sq": theta_sq, "q": q, "b": b, "channels": channels.len(), "points": rows })
        ))
    } else {
        io(write!(out, "{text}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("ghcb").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn bound_formula_example() {
        let (code, out, _) = run_capture(&["bound", "--snr-db", "0", "--h", "1,0,0,0"]);
        assert_eq!(code, 0);
        assert!(out.contains("0.816"), "{out}");
    }

    #[test]
    fn negative_snr_is_rejected() {
        let (code, _, err) = run_capture(&["bound", "--snr-db", "-5", "--h", "1,0,0,0"]);
        assert_eq!(code, EXIT_VALIDATION);
        assert!(err.contains("SNR"));
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_VALIDATION);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn gnuplot_stub_lists_every_file() {
        let s = gnuplot_stub(&[(CodebookFamily::Dftc, "dftc.csv".into()), (CodebookFamily::Hc, "hc.csv".into())]);
        assert!(s.contains("'dftc.csv'") && s.contains("'hc.csv'"));
    }
}
