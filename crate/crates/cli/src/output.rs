//! Deterministic CSV output: `#`-prefixed provenance comments, a header
//! row, fixed column order and fixed-precision numbers, so identical runs
//! produce byte-identical files.

use std::fmt::Write as _;

use freqbin::experiments::STANDARD_LABELS;
use freqbin::{ChannelConfig, CompareReport, CountRecord, FringeCurve, ProjectionMatrix, Spectrum};

/// Nine decimal places: enough to distinguish every tolerance the project
/// tests (≥ 1e-6 relative on O(1) quantities) while keeping diffs stable.
pub fn fmt9(value: f64) -> String {
    format!("{value:.9}")
}

/// FNV-1a hash of the effective configuration document.
pub fn config_hash(document: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in document.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Provenance header written at the top of every output file.
pub fn provenance(experiment: &str, document: &str, seed: u64, channel: &ChannelConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# freqbin {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# experiment = {experiment}");
    let _ = writeln!(out, "# config_hash = {:016x}", config_hash(document));
    let _ = writeln!(out, "# seed = {seed}");
    let _ = writeln!(
        out,
        "# grid: n_samples = {}, dt_s = {}, span_s = {}",
        channel.grid().n_samples(),
        channel.grid().dt(),
        channel.grid().span()
    );
    let _ = writeln!(
        out,
        "# delta_bin = {}, grid_dt_snap_rel = {}, delta_snap_rel = {}",
        channel.delta_bin(),
        channel.grid_snap_rel(),
        channel.delta_snap_rel()
    );
    out
}

pub fn truth_table_csv(header: &str, table: &ProjectionMatrix) -> String {
    let mut out = String::from(header);
    if let Some(rate) = table.reference_rate() {
        let _ = writeln!(out, "# reference_rate = {}", fmt9(rate));
    }
    let _ = writeln!(out, "prep,proj,value");
    for k in 0..table.dim() {
        for j in 0..table.dim() {
            let _ = writeln!(
                out,
                "{},{},{}",
                table.labels()[k],
                table.labels()[j],
                fmt9(table.value(k, j))
            );
        }
    }
    out
}

pub fn fringe_csv(header: &str, curve: &FringeCurve) -> String {
    let mut out = String::from(header);
    let _ = writeln!(out, "delta_theta_deg,simulated,analytic,baseline");
    for i in 0..curve.delta_theta.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt9(curve.delta_theta[i].to_degrees()),
            fmt9(curve.simulated[i]),
            fmt9(curve.analytic[i]),
            fmt9(curve.classical_baseline)
        );
    }
    out
}

pub fn spectrum_csv(header: &str, spectrum: &Spectrum, window_mhz: f64) -> String {
    let mut out = String::from(header);
    let _ = writeln!(out, "detuning_mhz,power");
    let dt = spectrum.grid().dt();
    let window = window_mhz * 1e6;
    for (omega, amplitude) in spectrum.iter_bins() {
        let mhz = omega / std::f64::consts::TAU / 1e6;
        if mhz.abs() <= window / 1e6 {
            let _ = writeln!(out, "{},{}", fmt9(mhz), fmt9(amplitude.norm_sqr() * dt));
        }
    }
    out
}

pub fn counts_csv(header: &str, record: &CountRecord, matrix: &ProjectionMatrix) -> String {
    let mut out = String::from(header);
    let _ = writeln!(out, "# pairs_per_setting = {}", record.total_pairs());
    if let Some(rate) = matrix.reference_rate() {
        let _ = writeln!(out, "# reference_rate = {}", fmt9(rate));
    }
    let _ = writeln!(out, "prep,proj,count,value,sigma");
    for k in 0..matrix.dim() {
        for j in 0..matrix.dim() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                matrix.labels()[k],
                matrix.labels()[j],
                record.count(k, j),
                fmt9(matrix.value(k, j)),
                fmt9(matrix.sigma(k, j).unwrap_or(0.0))
            );
        }
    }
    out
}

pub fn capacity_csv(header: &str, subset_name: &str, symbols: &[usize], bits: f64) -> String {
    let mut out = String::from(header);
    let _ = writeln!(out, "# prior = uniform; outcomes include no-detection");
    let _ = writeln!(out, "subset,symbols,bits");
    let names: Vec<&str> = symbols.iter().map(|&i| STANDARD_LABELS[i]).collect();
    let _ = writeln!(out, "{},{},{}", subset_name, names.join("|"), fmt9(bits));
    out
}

pub fn compare_csv(
    header: &str,
    sim: &ProjectionMatrix,
    reference: &ProjectionMatrix,
    report: &CompareReport,
) -> String {
    let mut out = String::from(header);
    let _ = writeln!(out, "# max_abs_deviation = {}", fmt9(report.max_abs_deviation));
    let crosstalk = |values: &[f64]| -> String {
        values.iter().map(|v| fmt9(*v)).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(
        out,
        "# sim_column_crosstalk = {}",
        crosstalk(&report.sim_column_crosstalk)
    );
    let _ = writeln!(
        out,
        "# ref_column_crosstalk = {}",
        crosstalk(&report.ref_column_crosstalk)
    );
    let _ = writeln!(out, "prep,proj,simulated,reference,deviation,z");
    let n = sim.dim();
    for k in 0..n {
        for j in 0..n {
            let z = report.z_scores.as_ref().map(|z| z[k * n + j]).unwrap_or(0.0);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                sim.labels()[k],
                sim.labels()[j],
                fmt9(sim.value(k, j)),
                fmt9(reference.value(k, j)),
                fmt9(report.deviations[k * n + j]),
                fmt9(z)
            );
        }
    }
    out
}
