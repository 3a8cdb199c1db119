//! Command-line front end. Every command is deterministic given its config
//! and seed; CSV files start with a `# config_hash=<sha256> seed=<n>` line.

use crate::ber::simulate_ber;
use crate::config::{Built, LabConfig, WarpDesign};
use crate::measure::{papr_stats, psd_welch, time_profile};
use crate::{presets, LabError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;
use warpwave::rolloff::{solve_profile, Case, LobeGrid, RolloffError};
use warpwave::spectral::{OpCount, PruneSpec, PrunedDif, PrunedDit};
use warpwave::warpdesign::{
    fit_spline, fit_spline_windowed, leakage_per_pulse, optimize_warp, LeakageGrid, SimplexOptions, WarpError,
};
use warpwave::wavecore::{to_config_text, LinkScenario, RolloffProfile, WaveformConfig};

#[derive(Debug, Parser)]
#[command(name = "warplab", version, about = "Design and simulate time-frequency warped single-carrier waveforms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment config file (defaults apply to anything it omits).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file (directory for design-warp); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Psd,
    Timeprofile,
    Papr,
    Leakage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    Snr,
    OffsetMap,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Roll-off profile for one utility/cost case, mirrored over the symbol.
    DesignProfile {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        case: Option<u8>,
    },
    /// Most compact warp under a leakage bound, and its fitted sample map.
    DesignWarp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        xi: Option<f64>,
    },
    /// Spectral, envelope, PAPR or leakage measurements of each waveform.
    Measure {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        metric: Metric,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Monte Carlo bit error rates over an SNR sweep or an offset map.
    Ber {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Sweep::Snr)]
        sweep: Sweep,
        #[arg(long)]
        bits: Option<u64>,
    },
    /// Operation counts of the pruned kernels against full transforms.
    Bench {
        #[command(flatten)]
        common: Common,
    },
}

/// Smallest Monte Carlo budget accepted per sweep point.
pub const MIN_BITS: u64 = 10_000;

fn config_hash(command: &str, config: &LabConfig, extra: &str) -> Result<String, LabError> {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update(b"\n");
    h.update(config.to_text()?.as_bytes());
    h.update(extra.as_bytes());
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn render(&self, comments: &[String]) -> Result<Vec<u8>, LabError> {
        let mut buf = Vec::new();
        for c in comments {
            writeln!(buf, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(buf);
        let csv_err = |e: csv::Error| LabError::Io(std::io::Error::other(e));
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| LabError::Io(std::io::Error::other(e.to_string())))
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), LabError> {
    match out {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn stamp(hash: &str, seed: u64) -> String {
    format!("config_hash={hash} seed={seed}")
}

fn base_dir(config: Option<&Path>) -> PathBuf {
    config.and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default()
}

/// Runs one command; the caller maps errors to exit codes.
pub fn run(cli: Cli) -> Result<(), LabError> {
    match cli.command {
        Command::DesignProfile { common, case } => design_profile(&common, case),
        Command::DesignWarp { common, xi } => design_warp(&common, xi),
        Command::Measure { common, metric, trials } => measure(&common, metric, trials),
        Command::Ber { common, sweep, bits } => ber(&common, sweep, bits),
        Command::Bench { common } => bench(&common),
    }
}

/// Mirrors edge-facing roll-offs (outermost first) over `n` symmetric pulses.
pub fn mirror_outer(outer: &[f64], n: usize) -> Vec<(f64, f64)> {
    (0..n).map(|k| outer[k.min(n - 1 - k)]).map(|a| (a, a)).collect()
}

fn design_profile(common: &Common, case: Option<u8>) -> Result<(), LabError> {
    let mut config = LabConfig::load(common.config.as_deref())?;
    if let Some(c) = case {
        config.profile.case = c;
    }
    let s = &config.profile;
    let hash = config_hash("design-profile", &config, "")?;
    let half = s.n_pulses.div_ceil(2);
    let case = Case::try_from(s.case)?;
    let (outer, failure) = match solve_profile(case, half, s.alpha1, &LobeGrid::default()) {
        Ok(a) => (a, None),
        Err(RolloffError::NonConvergence { iterations, last }) => {
            let e = RolloffError::NonConvergence { iterations, last: last.clone() };
            (last, Some(e))
        }
        Err(e) => return Err(e.into()),
    };
    let mut comments = vec![stamp(&hash, common.seed)];
    if let Some(e) = &failure {
        comments.push(format!("warning: partial result, {e}"));
    }
    let mut t = Table::new(&["pulse", "alpha_left", "alpha_right"]);
    for (k, (l, r)) in mirror_outer(&outer, s.n_pulses).into_iter().enumerate() {
        t.push(vec![k.to_string(), l.to_string(), r.to_string()]);
    }
    emit(common.out.as_deref(), &t.render(&comments)?)?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

/// Reads `pulse,alpha_left,alpha_right` rows, skipping `#` comment lines.
pub fn read_profile_csv(path: &Path) -> Result<RolloffProfile, LabError> {
    let bad = |e: csv::Error| LabError::Validation(format!("{}: {e}", path.display()));
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).map_err(bad)?;
    let mut pairs = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(bad)?;
        let field = |i: usize| -> Result<f64, LabError> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| LabError::Validation(format!("{}: bad row {:?}", path.display(), rec)))
        };
        pairs.push((field(1)?, field(2)?));
    }
    Ok(RolloffProfile::new(pairs)?)
}

fn design_warp(common: &Common, xi: Option<f64>) -> Result<(), LabError> {
    let mut config = LabConfig::load(common.config.as_deref())?;
    if let Some(x) = xi {
        config.warp.xi = x;
    }
    let out = common
        .out
        .clone()
        .ok_or_else(|| LabError::Validation("design-warp needs --out DIR for its three files".into()))?;
    let hash = config_hash("design-warp", &config, "")?;
    let w = &config.warp;
    let profile = match (&w.profile_csv, &w.outer) {
        (Some(p), _) => read_profile_csv(&base_dir(common.config.as_deref()).join(p))?,
        (None, Some(outer)) => RolloffProfile::mirrored(outer, w.inner.as_deref())?,
        (None, None) => RolloffProfile::reference_twelve(None),
    };
    let init = w.init.unwrap_or_else(presets::reference_start);
    let grid = LeakageGrid::default();
    let opt = match optimize_warp(&profile, w.xi, &init, &grid, &SimplexOptions::default()) {
        Ok(o) => o,
        Err(e @ WarpError::Infeasible { .. }) => {
            if let WarpError::Infeasible { best, .. } = &e {
                eprintln!("best point found: {best:?}");
            }
            return Err(e.into());
        }
        Err(e) => return Err(e.into()),
    };
    let n = profile.len();
    let map = match w.window {
        Some(win) => fit_spline_windowed(&opt.params, w.v, n, w.z_h, w.z_t, win)?,
        None => fit_spline(&opt.params, w.v, n, w.z_h, w.z_t)?,
    };
    let waveform = WaveformConfig::new(n, w.z_h, w.z_t, w.v, w.qam_order, profile, map)?;
    std::fs::create_dir_all(&out)?;
    let comment = format!("# {}\n", stamp(&hash, common.seed));
    let design = WarpDesign { xi: w.xi, d: opt.d, max_leakage: opt.max_leakage, params: opt.params, waveform };
    std::fs::write(out.join("params.toml"), comment + &to_config_text(&design)?)?;

    let mut anchors = Table::new(&["slot", "sample"]);
    for (k, a) in design.waveform.warp().anchors().iter().enumerate() {
        anchors.push(vec![k.to_string(), a.to_string()]);
    }
    std::fs::write(out.join("anchors.csv"), anchors.render(&[stamp(&hash, common.seed)])?)?;
    let mut leak = Table::new(&["pulse", "leakage"]);
    for (k, l) in opt.leakages.iter().enumerate() {
        leak.push(vec![k.to_string(), l.to_string()]);
    }
    std::fs::write(out.join("leakage.csv"), leak.render(&[stamp(&hash, common.seed)])?)?;
    println!("D = {:.4} pulse periods, max leakage = {:.5}", opt.d, opt.max_leakage);
    Ok(())
}

fn build_all(config: &LabConfig, path: Option<&Path>) -> Result<Vec<Built>, LabError> {
    let base = base_dir(path);
    config.waveforms.iter().map(|w| w.build(&base)).collect()
}

fn measure(common: &Common, metric: Metric, trials: usize) -> Result<(), LabError> {
    let config = LabConfig::load(common.config.as_deref())?;
    if trials == 0 {
        return Err(LabError::Validation("--trials must be positive".into()));
    }
    let name = metric.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let hash = config_hash("measure", &config, &format!("metric={name} trials={trials}"))?;
    let built = build_all(&config, common.config.as_deref())?;
    let seed = common.seed;
    let table = match metric {
        Metric::Psd => {
            let mut t = Table::new(&["waveform", "bin", "offset_bins", "psd_db"]);
            for b in &built {
                let p = psd_welch(b.modem.as_ref(), trials, seed, 8)?;
                for (k, d) in p.db.iter().enumerate() {
                    t.push(vec![b.modem.label(), k.to_string(), p.offset_of(k).to_string(), d.to_string()]);
                }
            }
            t
        }
        Metric::Timeprofile => {
            let mut t = Table::new(&["waveform", "sample", "rms_db"]);
            for b in &built {
                for (k, d) in time_profile(b.modem.as_ref(), trials, seed)?.iter().enumerate() {
                    t.push(vec![b.modem.label(), k.to_string(), d.to_string()]);
                }
            }
            t
        }
        Metric::Papr => {
            let mut t = Table::new(&["waveform", "median_db", "p99_db"]);
            for b in &built {
                let (m, p) = papr_stats(b.modem.as_ref(), trials, seed)?;
                t.push(vec![b.modem.label(), m.to_string(), p.to_string()]);
            }
            t
        }
        Metric::Leakage => {
            let mut t = Table::new(&["waveform", "pulse", "leakage"]);
            for b in &built {
                match &b.warp {
                    Some((profile, params)) => {
                        for (k, l) in leakage_per_pulse(profile, params, &LeakageGrid::default())?.iter().enumerate() {
                            t.push(vec![b.modem.label(), k.to_string(), l.to_string()]);
                        }
                    }
                    None => eprintln!("{}: no per-pulse leakage for a baseline waveform", b.modem.label()),
                }
            }
            t
        }
    };
    emit(common.out.as_deref(), &table.render(&[stamp(&hash, seed)])?)
}

fn ber(common: &Common, sweep: Sweep, bits: Option<u64>) -> Result<(), LabError> {
    let mut config = LabConfig::load(common.config.as_deref())?;
    config.scenario.seed = common.seed;
    if let Some(b) = bits {
        config.scenario.n_bits = b;
    }
    if config.scenario.n_bits < MIN_BITS {
        return Err(LabError::Validation(format!("at least {MIN_BITS} bits per point are required")));
    }
    let sweep_name = match sweep {
        Sweep::Snr => "snr",
        Sweep::OffsetMap => "offset-map",
    };
    let hash = config_hash("ber", &config, &format!("sweep={sweep_name}"))?;
    let built = build_all(&config, common.config.as_deref())?;
    let base = config.scenario;
    let points: Vec<(String, LinkScenario)> = match sweep {
        Sweep::Snr => {
            config.sweep.snr_db.iter().map(|&s| (format!("snr_db={s}"), LinkScenario { snr_db: s, ..base })).collect()
        }
        Sweep::OffsetMap => config
            .sweep
            .tau_rms
            .iter()
            .flat_map(|&tau| {
                config.sweep.time_offsets.iter().map(move |&off| {
                    let sc = LinkScenario { tau_rms: tau, time_offset: off, snr_db: config.sweep.map_snr_db, ..base };
                    (format!("time_offset={off};tau_rms={tau}"), sc)
                })
            })
            .collect(),
    };
    let mut results = Vec::with_capacity(built.len());
    for b in &built {
        let mut row = Vec::with_capacity(points.len());
        let mut warned = std::collections::BTreeSet::new();
        for (_, sc) in &points {
            let p = simulate_ber(b.modem.as_ref(), sc)?;
            warned.extend(p.warnings.iter().cloned());
            row.push(p);
        }
        for w in warned {
            eprintln!("{}: {w}", b.modem.label());
        }
        results.push(row);
    }
    let mut t = Table::new(&["config", "sweep_point", "ber", "errors", "bits", "gain_of_first"]);
    for (b, row) in built.iter().zip(&results) {
        for ((label, _), p) in points.iter().zip(row) {
            let reference = &results[0][t.rows.len() % points.len()];
            let gain = p.ber() / reference.ber();
            t.push(vec![
                b.modem.label(),
                label.clone(),
                p.ber().to_string(),
                p.errors.to_string(),
                p.bits.to_string(),
                gain.to_string(),
            ]);
        }
    }
    emit(common.out.as_deref(), &t.render(&[stamp(&hash, common.seed)])?)
}

/// Band-keeping receiver plans: `band` bins per side of an `n`-point window,
/// data at every `step`-th sample.
fn receiver_specs(n: usize, band: usize, outputs: usize, step: usize) -> Result<(PruneSpec, PruneSpec), LabError> {
    let bins: Vec<usize> = (0..band).chain(n - band..n).collect();
    let dif = PruneSpec::keep_outputs(n, bins.iter().copied()).map_err(warpwave::phy::PhyError::from)?;
    let dit = PruneSpec::new(n, bins, (0..outputs).map(|k| k * step)).map_err(warpwave::phy::PhyError::from)?;
    Ok((dif, dit))
}

fn bench(common: &Common) -> Result<(), LabError> {
    let config = LabConfig::load(common.config.as_deref())?;
    let hash = config_hash("bench", &config, "")?;
    let cases = [("split-symbol receiver", 768, 128, 128, 6), ("12-pulse receiver", 128, 21, 12, 6)];
    let mut t = Table::new(&["case", "kernel", "size", "inputs", "outputs", "butterflies", "complex_mults"]);
    let row = |t: &mut Table, case: &str, kernel: &str, spec: &PruneSpec, c: OpCount| {
        t.push(vec![
            case.to_string(),
            kernel.to_string(),
            spec.size().to_string(),
            spec.input_nonzero().len().to_string(),
            spec.output_keep().len().to_string(),
            c.butterflies.to_string(),
            c.complex_mults.to_string(),
        ]);
    };
    for (case, n, band, outputs, step) in cases {
        let (dif, dit) = receiver_specs(n, band, outputs, step)?;
        let full = PruneSpec::full(n).map_err(warpwave::phy::PhyError::from)?;
        let plans = [
            ("dif-pruned", &dif, PrunedDif::new(&dif).count()),
            ("dif-full", &full, PrunedDif::new(&full).count()),
            ("dit-pruned", &dit, PrunedDit::new(&dit).count()),
            ("dit-full", &full, PrunedDit::new(&full).count()),
        ];
        for (kernel, spec, count) in plans {
            row(&mut t, case, kernel, spec, count);
        }
        // timings are machine-dependent, so they go to stderr only
        let x = vec![num_complex::Complex64::new(1.0, 0.5); n];
        for (kernel, spec) in [("dif-pruned", &dif), ("dif-full", &full)] {
            let plan = PrunedDif::new(spec);
            let start = Instant::now();
            for _ in 0..200 {
                plan.run(&x).map_err(warpwave::phy::PhyError::from)?;
            }
            eprintln!("{case} {kernel}: {:?} per call", start.elapsed() / 200);
        }
    }
    emit(common.out.as_deref(), &t.render(&[stamp(&hash, common.seed)])?)
}
