//! Drive sweeps from a `key = value` experiment file, the same format the
//! `ghcb ber --config` command reads.

use ghcb::config::CliConfig;
use ghcb::sim::run_sweep;

const EXPERIMENT: &str = "\
# short delayed-feedback run
families = ghc-real, hc
b = 4
snr_db = 6:6:18
feedback = delayed
fd_tc = 0.01
delta = 12
min_bit_errors = 50
max_trials = 200000
seed = 11
";

fn main() -> ghcb::Result<()> {
    let cfg = CliConfig::parse(EXPERIMENT)?;
    print!("resolved:\n{}", cfg.resolved_text()?);
    for sim in cfg.sim_configs()? {
        let r = run_sweep(&sim)?;
        println!("\n{} digest {}", sim.codebook_spec.family, &r.codebook_digest[..16]);
        print!("{}", r.to_csv());
    }
    Ok(())
}
