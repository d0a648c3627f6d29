//! Command-line front end: simulation runs with CSV output, plus golden
//! record export/check.
//!
//! Exit codes: 0 success, 1 usage error (bad flags or configuration),
//! 2 runtime error, 3 golden-record mismatch.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::detector::EnumMode;
use crate::golden;
use crate::sim::{
    least_effort_schedule, run, QrdMode, SimConfig, SimStats, EARLY_STOP_ERRORS,
};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_GOLDEN_MISMATCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sisosd",
    about = "Soft-input soft-output single tree-search sphere decoder: \
             iterative MIMO receiver simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulates the iterative receiver over an SNR grid and writes one
    /// CSV row per (SNR, iteration).
    Run(RunArgs),
    /// Regenerates the golden detection records and writes them out.
    GoldenExport(GoldenExportArgs),
    /// Re-runs the detector on stored golden records; exits 3 on any
    /// mismatch.
    GoldenCheck(GoldenCheckArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Transmit antennas.
    #[arg(long, default_value_t = 4)]
    pub mt: usize,
    /// Receive antennas.
    #[arg(long, default_value_t = 4)]
    pub mr: usize,
    /// Modulation: qpsk, 16qam or 64qam.
    #[arg(long = "mod", default_value = "16qam")]
    pub modulation: String,
    /// SNR grid in dB, comma separated (SNR = mt·Es/N0).
    #[arg(long, value_delimiter = ',', default_value = "14")]
    pub snr: Vec<f64>,
    /// Demapper/decoder iterations.
    #[arg(long, default_value_t = 4)]
    pub iters: usize,
    /// Frame budget per SNR point.
    #[arg(long, default_value_t = 1000)]
    pub frames: usize,
    /// Normalized extrinsic clipping level N0·LEmax ("inf" to disable).
    #[arg(long, default_value_t = f64::INFINITY)]
    pub lemax: f64,
    /// Enumeration mode: hybrid, se-sort or channel-only.
    #[arg(long = "enum", default_value = "hybrid")]
    pub enum_mode: EnumMode,
    /// Channel preprocessing: qrd or sqrd.
    #[arg(long, default_value = "sqrd")]
    pub qrd: QrdMode,
    /// Information bits per frame.
    #[arg(long, default_value_t = 512)]
    pub kinfo: usize,
    /// Base seed for all random streams.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Detector clock frequency for the throughput model, in Hz.
    #[arg(long, default_value_t = 250.0e6)]
    pub fclk: f64,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional FER target; prints the least-effort iteration schedule.
    #[arg(long)]
    pub target_fer: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GoldenExportArgs {
    /// Output path for the record file.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed of the generated suite.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GoldenCheckArgs {
    /// Record file to check.
    #[arg(long)]
    pub path: PathBuf,
}

fn modulation_bits(name: &str) -> Result<usize, Error> {
    match name {
        "qpsk" => Ok(2),
        "16qam" => Ok(4),
        "64qam" => Ok(6),
        other => Err(Error::Parse(format!(
            "unknown modulation `{other}` (expected qpsk, 16qam or 64qam)"
        ))),
    }
}

impl RunArgs {
    pub fn to_config(&self) -> Result<SimConfig, Error> {
        let cfg = SimConfig {
            mt: self.mt,
            mr: self.mr,
            q: modulation_bits(&self.modulation)?,
            snr_db_list: self.snr.clone(),
            iterations: self.iters,
            frames: self.frames,
            l_e_max_normalized: self.lemax,
            enum_mode: self.enum_mode,
            qrd_mode: self.qrd,
            k_info: self.kinfo,
            seed: self.seed,
            f_clk: self.fclk,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Renders the CSV document for a finished run. Pure function of the
/// configuration, the statistics and the timestamp, so identical runs
/// produce identical bytes apart from the `# generated:` line.
pub fn csv_string(cfg: &SimConfig, stats: &SimStats, unix_timestamp: u64) -> String {
    use std::fmt::Write as _;

    let modulation = match cfg.q {
        2 => "qpsk",
        4 => "16qam",
        _ => "64qam",
    };
    // ≥9 significant decimal digits on every float column.
    let num = |x: f64| format!("{x:.12e}");
    let mut out = String::new();
    out.push_str("# iterative MIMO receiver simulation\n");
    out.push_str("# csv_version: 1\n");
    writeln!(out, "# generated: unix:{unix_timestamp}").unwrap();
    writeln!(
        out,
        "# mt={} mr={} modulation={} enum={} qrd={}",
        cfg.mt, cfg.mr, modulation, cfg.enum_mode, cfg.qrd_mode
    )
    .unwrap();
    writeln!(
        out,
        "# k_info={} coded_len={} code_rate={} interleaver_spread={} pad_bits={}",
        cfg.k_info,
        cfg.coded_len(),
        cfg.code_rate(),
        cfg.interleaver_spread(),
        cfg.framing().pad_bits()
    )
    .unwrap();
    writeln!(
        out,
        "# iterations={} frames={} l_e_max_normalized={} f_clk={} seed={}",
        cfg.iterations, cfg.frames, cfg.l_e_max_normalized, cfg.f_clk, cfg.seed
    )
    .unwrap();
    writeln!(out, "# early_stop_frame_errors={EARLY_STOP_ERRORS}").unwrap();
    out.push_str(
        "snr_db,iteration,frames,frame_errors,fer,ber,mean_n_en,cumulative_n_en,\
         theta_bps,l_e_max_normalized,enum_mode,seed\n",
    );
    for p in &stats.points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            num(p.snr_db),
            p.iteration,
            p.frames,
            p.frame_errors,
            num(p.fer),
            num(p.ber),
            num(p.mean_n_en),
            num(p.cumulative_n_en),
            num(p.theta_bps),
            num(cfg.l_e_max_normalized),
            cfg.enum_mode,
            cfg.seed
        )
        .unwrap();
    }
    out
}

fn schedule_report(stats: &SimStats, target_fer: f64) -> String {
    use std::fmt::Write as _;

    let schedule = least_effort_schedule(stats, target_fer);
    let mut out = String::new();
    writeln!(out, "least-effort schedule at target FER {target_fer}:").unwrap();
    for (idx, min_snr) in schedule.min_snr_per_iteration.iter().enumerate() {
        match min_snr {
            Some(s) => writeln!(out, "  iteration {}: reaches target at {s} dB", idx + 1),
            None => writeln!(out, "  iteration {}: target not reached", idx + 1),
        }
        .unwrap();
    }
    for p in &schedule.points {
        writeln!(
            out,
            "  {} dB -> {} iteration(s), cumulative nodes {:.2}, {:.2} Mbit/s",
            p.snr_db,
            p.chosen_iterations,
            p.cumulative_n_en,
            p.theta_bps / 1.0e6
        )
        .unwrap();
    }
    if schedule.crossover_snrs.is_empty() {
        writeln!(out, "  no crossover in the simulated grid").unwrap();
    } else {
        let list: Vec<String> =
            schedule.crossover_snrs.iter().map(|s| format!("{s} dB")).collect();
        writeln!(out, "  crossovers at: {}", list.join(", ")).unwrap();
    }
    out
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run(args) => {
            let cfg = args.to_config()?;
            let stats = run(&cfg)?;
            let now = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            std::fs::write(&args.out, csv_string(&cfg, &stats, now))?;
            for p in &stats.points {
                if p.iteration == cfg.iterations {
                    println!(
                        "snr {} dB: frames={} fer={:.4} mean_n_en={:.2} (final iteration)",
                        p.snr_db, p.frames, p.fer, p.mean_n_en
                    );
                }
            }
            if let Some(target) = args.target_fer {
                print!("{}", schedule_report(&stats, target));
            }
            println!("wrote {}", args.out.display());
            Ok(())
        }
        Command::GoldenExport(args) => {
            let records = golden::generate_records(args.seed);
            golden::write_records(&records, &args.out)?;
            println!("wrote {} records to {}", records.len(), args.out.display());
            Ok(())
        }
        Command::GoldenCheck(args) => {
            let records = golden::read_records(&args.path)?;
            golden::check_records(&records)?;
            println!("{} records match", records.len());
            Ok(())
        }
    }
}

fn exit_code_of(err: &Error) -> i32 {
    match err {
        Error::GoldenMismatch { .. } => EXIT_GOLDEN_MISMATCH,
        Error::InvalidConfig(_)
        | Error::Parse(_)
        | Error::UnsupportedModulation(_)
        | Error::InvalidMapping(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Parses the argument list and executes the command; returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_of(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::run_point;

    fn parse_run(extra: &[&str]) -> RunArgs {
        let mut argv = vec!["sisosd", "run", "--snr", "6", "--out", "/tmp/x.csv"];
        argv.extend_from_slice(extra);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Run(args) => args,
            other => panic!("expected run command, got {other:?}"),
        }
    }

    #[test]
    fn defaults_match_the_reference_setup() {
        let cfg = parse_run(&[]).to_config().unwrap();
        assert_eq!((cfg.mt, cfg.mr, cfg.q), (4, 4, 4));
        assert_eq!(cfg.qrd_mode, QrdMode::Sqrd);
        assert_eq!(cfg.enum_mode, EnumMode::Hybrid);
        assert_eq!(cfg.k_info, 512);
        assert_eq!(cfg.f_clk, 250.0e6);
        assert!(cfg.l_e_max_normalized.is_infinite());
    }

    #[test]
    fn snr_list_and_lemax_parse() {
        let args = parse_run(&["--snr", "10,11.5,13", "--lemax", "0.2"]);
        assert_eq!(args.snr, vec![6.0, 10.0, 11.5, 13.0]);
        assert_eq!(args.lemax, 0.2);
        assert!(parse_run(&["--lemax", "inf"]).lemax.is_infinite());
    }

    #[test]
    fn bad_flags_are_usage_errors() {
        assert_eq!(main_with_args(["sisosd", "run"]), EXIT_USAGE);
        assert_eq!(
            main_with_args([
                "sisosd", "run", "--snr", "6", "--out", "/tmp/x.csv", "--mod", "8psk"
            ]),
            EXIT_USAGE
        );
        assert_eq!(
            main_with_args([
                "sisosd", "run", "--snr", "6", "--out", "/tmp/x.csv", "--mt", "4", "--mr",
                "2"
            ]),
            EXIT_USAGE
        );
    }

    #[test]
    fn csv_is_deterministic_apart_from_timestamp() {
        let cfg = SimConfig {
            mt: 2,
            mr: 2,
            q: 2,
            snr_db_list: vec![6.0],
            iterations: 2,
            frames: 4,
            k_info: 32,
            seed: 9,
            ..Default::default()
        };
        let stats = SimStats { points: run_point(&cfg, 6.0).unwrap() };
        let a = csv_string(&cfg, &stats, 100);
        let b = csv_string(&cfg, &stats, 200);
        let strip = |s: &str| {
            s.lines()
                .filter(|l| !l.starts_with("# generated:"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_ne!(a, b);
        assert_eq!(strip(&a), strip(&b));
        assert_eq!(a.lines().count(), 8 + stats.points.len());
        let header = a.lines().nth(7).unwrap();
        assert!(header.starts_with("snr_db,iteration,"));
        // Every float column carries at least 9 significant digits.
        let first_row = a.lines().nth(8).unwrap();
        assert!(first_row.starts_with("6.000000000000e0,1,"));
    }

    #[test]
    fn one_csv_row_per_snr_and_iteration() {
        let cfg = SimConfig {
            mt: 2,
            mr: 2,
            q: 2,
            snr_db_list: vec![6.0, 40.0],
            iterations: 3,
            frames: 2,
            k_info: 32,
            ..Default::default()
        };
        let stats = crate::sim::run(&cfg).unwrap();
        let csv = csv_string(&cfg, &stats, 0);
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 2 * 3);
    }

    #[test]
    fn schedule_report_mentions_crossovers() {
        let cfg = SimConfig {
            mt: 2,
            mr: 2,
            q: 2,
            snr_db_list: vec![6.0],
            iterations: 2,
            frames: 4,
            k_info: 32,
            ..Default::default()
        };
        let stats = SimStats { points: run_point(&cfg, 6.0).unwrap() };
        let report = schedule_report(&stats, 1.0);
        assert!(report.contains("least-effort schedule"));
        assert!(report.contains("iteration 1"));
    }
}
