//! Command-line front end: configuration parsing, experiment dispatch, and
//! deterministic CSV output.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::{parse_config, parse_symbol, RunConfig};
use freqbin::experiments::{bundled_reference, parse_reference_csv};
use freqbin::{
    compare_measured, monte_carlo_counts, mutual_information, phase_scan, spectrum_trace,
    truth_table,
};

#[derive(Parser)]
#[command(
    name = "freqbin",
    version,
    about = "Simulator of a frequency-bin qutrit channel on phase-modulated single photons"
)]
struct Cli {
    #[command(subcommand)]
    experiment: Experiment,
    /// Configuration file (sectioned `key = value`); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path (default: `<experiment>.csv`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override for Monte Carlo runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Point-count override for scans.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Print the effective configuration document and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Experiment {
    /// 5×5 relative projection-probability matrix.
    TruthTable,
    /// Coherence fringe over the transmitter–receiver drive phase.
    PhaseScan,
    /// Demodulated spectrum before the detection filter.
    Spectrum,
    /// Poisson coincidence counts with propagated uncertainties.
    MonteCarlo,
    /// Mutual information of the induced discrete channel.
    Capacity,
    /// Entry-level comparison against the bundled reference table.
    Compare,
}

impl Experiment {
    fn name(&self) -> &'static str {
        match self {
            Experiment::TruthTable => "truth-table",
            Experiment::PhaseScan => "phase-scan",
            Experiment::Spectrum => "spectrum",
            Experiment::MonteCarlo => "monte-carlo",
            Experiment::Capacity => "capacity",
            Experiment::Compare => "compare",
        }
    }
}

fn run(cli: &Cli) -> Result<(), String> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?,
        None => String::new(),
    };
    let mut run_config: RunConfig = parse_config(&text).map_err(|e| e.to_string())?;
    if let Some(seed) = cli.seed {
        run_config.seed = seed;
    }
    if let Some(points) = cli.points {
        run_config.points = points;
    }
    let document = run_config.to_document();
    if cli.print_config {
        print!("{document}");
        return Ok(());
    }
    let channel = run_config.to_channel_config().map_err(|e| e.to_string())?;
    let experiment = cli.experiment;
    let header = output::provenance(experiment.name(), &document, run_config.seed, &channel);
    let map = |e: freqbin::Error| e.to_string();
    let content = match experiment {
        Experiment::TruthTable => {
            let table = truth_table(&channel).map_err(map)?;
            output::truth_table_csv(&header, &table)
        }
        Experiment::PhaseScan => {
            let prep = parse_symbol(&run_config.prep).map_err(|e| e.to_string())?;
            let proj = parse_symbol(&run_config.proj).map_err(|e| e.to_string())?;
            let curve = phase_scan(&channel, run_config.points, &prep, &proj).map_err(map)?;
            output::fringe_csv(&header, &curve)
        }
        Experiment::Spectrum => {
            let prep = parse_symbol(&run_config.prep).map_err(|e| e.to_string())?;
            let proj = parse_symbol(&run_config.proj).map_err(|e| e.to_string())?;
            let spectrum = spectrum_trace(&channel, &prep, &proj).map_err(map)?;
            output::spectrum_csv(&header, &spectrum, run_config.window_mhz)
        }
        Experiment::MonteCarlo => {
            let record = monte_carlo_counts(&channel, run_config.pairs_per_setting, run_config.seed)
                .map_err(map)?;
            let matrix = record.to_projection_matrix().map_err(map)?;
            output::counts_csv(&header, &record, &matrix)
        }
        Experiment::Capacity => {
            let table = truth_table(&channel).map_err(map)?;
            let subset = run_config.subset.indices();
            let prior = vec![1.0; subset.len()];
            let bits = mutual_information(&table, &prior, &subset).map_err(map)?;
            output::capacity_csv(&header, run_config.subset.name(), &subset, bits)
        }
        Experiment::Compare => {
            let reference = match &run_config.reference {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| format!("cannot read {path}: {e}"))?;
                    parse_reference_csv(&text).map_err(map)?
                }
                None => bundled_reference(),
            };
            let table = truth_table(&channel).map_err(map)?;
            let report = compare_measured(&table, &reference).map_err(map)?;
            output::compare_csv(&header, &table, &reference, &report)
        }
    };
    let out_path = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", experiment.name())));
    std::fs::write(&out_path, content)
        .map_err(|e| format!("cannot write {}: {e}", out_path.display()))?;
    eprintln!(
        "{}: wrote {} (config {:016x})",
        experiment.name(),
        out_path.display(),
        output::config_hash(&document)
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
