//! Plain-text sectioned configuration: `[section]` headers, `key = value`
//! lines, `#` comments. Units are fixed per key (the suffix names them) and
//! every key has a reference-experiment default, so an empty document is a
//! complete configuration. Unknown sections or keys are rejected.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use freqbin::{
    carrier_suppression_index, CavityFilter, ChannelConfig, ChannelParams, DriveElectronics,
    SourceModel, Symbol, TimeGrid,
};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // [source]
    pub ring_down_time_ns: f64,
    pub source_detuning_mhz: f64,
    // [modulation]
    pub delta_mhz: f64,
    pub beta: Option<f64>,
    pub drive_phase_offset_deg: f64,
    pub emission_delay_ns: f64,
    // [filter]
    pub filter_linewidth_mhz: f64,
    pub filter_fsr_ghz: f64,
    pub filter_peak_transmission: f64,
    pub filter_detuning_mhz: f64,
    // [electronics]
    pub tx_bandwidth_mhz: Option<f64>,
    pub tx_filter_order: u32,
    pub rx_bandwidth_mhz: Option<f64>,
    pub rx_filter_order: u32,
    // [grid]
    pub n_samples: usize,
    pub span_ns: f64,
    pub t0_ns: f64,
    // [experiment]
    pub seed: u64,
    pub points: usize,
    pub pairs_per_setting: u64,
    pub prep: String,
    pub proj: String,
    pub subset: Subset,
    pub window_mhz: f64,
    pub reference: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subset {
    Computational,
    Superposition,
    All,
}

impl Subset {
    pub fn name(&self) -> &'static str {
        match self {
            Subset::Computational => "computational",
            Subset::Superposition => "superposition",
            Subset::All => "all",
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        match self {
            Subset::Computational => vec![0, 1, 2],
            Subset::Superposition => vec![3, 4],
            Subset::All => vec![0, 1, 2, 3, 4],
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ring_down_time_ns: 21.0,
            source_detuning_mhz: 0.0,
            delta_mhz: 30.0,
            beta: None,
            drive_phase_offset_deg: 180.0,
            emission_delay_ns: 0.0,
            filter_linewidth_mhz: 7.0,
            filter_fsr_ghz: 1.5,
            filter_peak_transmission: 1.0,
            filter_detuning_mhz: 0.0,
            tx_bandwidth_mhz: None,
            tx_filter_order: 1,
            rx_bandwidth_mhz: None,
            rx_filter_order: 1,
            n_samples: 1 << 16,
            span_ns: 1024.0,
            t0_ns: 0.0,
            seed: 0,
            points: 73,
            pairs_per_setting: 100_000,
            prep: "S+".into(),
            proj: "S+".into(),
            subset: Subset::Computational,
            window_mhz: 100.0,
            reference: None,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn parse_f64(section: &str, key: &str, value: &str) -> Result<f64, ConfigError> {
    value.parse().map_err(|_| {
        ConfigError(format!("[{section}] {key}: expected a number, got '{value}'"))
    })
}

fn parse_usize(section: &str, key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| {
        ConfigError(format!("[{section}] {key}: expected a positive integer, got '{value}'"))
    })
}

fn parse_u64(section: &str, key: &str, value: &str) -> Result<u64, ConfigError> {
    value.parse().map_err(|_| {
        ConfigError(format!("[{section}] {key}: expected a non-negative integer, got '{value}'"))
    })
}

fn parse_u32(section: &str, key: &str, value: &str) -> Result<u32, ConfigError> {
    value.parse().map_err(|_| {
        ConfigError(format!("[{section}] {key}: expected a positive integer, got '{value}'"))
    })
}

fn parse_bandwidth(section: &str, key: &str, value: &str) -> Result<Option<f64>, ConfigError> {
    if value == "unlimited" {
        return Ok(None);
    }
    parse_f64(section, key, value).map(Some)
}

pub fn parse_symbol(name: &str) -> Result<Symbol, ConfigError> {
    match name {
        "0" => Ok(Symbol::Zero),
        "1" => Ok(Symbol::One),
        "2" => Ok(Symbol::Two),
        "S+" | "s+" => Ok(Symbol::SPlus),
        "S-" | "s-" => Ok(Symbol::SMinus),
        other => Err(ConfigError(format!(
            "unknown symbol '{other}' (expected 0, 1, 2, S+ or S-)"
        ))),
    }
}

/// Parses a configuration document, filling omitted keys with the
/// reference-experiment defaults and rejecting anything it does not know.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut section = String::new();
    let mut seen: Vec<(String, String)> = Vec::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| {
                ConfigError(format!("line {}: malformed section header '{line}'", line_no + 1))
            })?;
            match name {
                "source" | "modulation" | "filter" | "electronics" | "grid" | "experiment" => {
                    section = name.to_string();
                }
                other => {
                    return Err(ConfigError(format!(
                        "line {}: unknown section [{other}]",
                        line_no + 1
                    )));
                }
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError(format!("line {}: expected 'key = value', got '{line}'", line_no + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        if section.is_empty() {
            return Err(ConfigError(format!(
                "line {}: key '{key}' appears before any [section] header",
                line_no + 1
            )));
        }
        let ident = (section.clone(), key.to_string());
        if seen.contains(&ident) {
            return Err(ConfigError(format!(
                "line {}: duplicate key '{key}' in [{section}]",
                line_no + 1
            )));
        }
        seen.push(ident);
        match (section.as_str(), key) {
            ("source", "ring_down_time_ns") => {
                cfg.ring_down_time_ns = parse_f64(&section, key, value)?;
            }
            ("source", "center_detuning_mhz") => {
                cfg.source_detuning_mhz = parse_f64(&section, key, value)?;
            }
            ("modulation", "delta_mhz") => cfg.delta_mhz = parse_f64(&section, key, value)?,
            ("modulation", "beta") => cfg.beta = Some(parse_f64(&section, key, value)?),
            ("modulation", "drive_phase_offset_deg") => {
                cfg.drive_phase_offset_deg = parse_f64(&section, key, value)?;
            }
            ("modulation", "emission_delay_ns") => {
                cfg.emission_delay_ns = parse_f64(&section, key, value)?;
            }
            ("filter", "linewidth_mhz") => {
                cfg.filter_linewidth_mhz = parse_f64(&section, key, value)?;
            }
            ("filter", "fsr_ghz") => cfg.filter_fsr_ghz = parse_f64(&section, key, value)?,
            ("filter", "peak_transmission") => {
                cfg.filter_peak_transmission = parse_f64(&section, key, value)?;
            }
            ("filter", "center_detuning_mhz") => {
                cfg.filter_detuning_mhz = parse_f64(&section, key, value)?;
            }
            ("electronics", "tx_bandwidth_mhz") => {
                cfg.tx_bandwidth_mhz = parse_bandwidth(&section, key, value)?;
            }
            ("electronics", "tx_filter_order") => {
                cfg.tx_filter_order = parse_u32(&section, key, value)?;
            }
            ("electronics", "rx_bandwidth_mhz") => {
                cfg.rx_bandwidth_mhz = parse_bandwidth(&section, key, value)?;
            }
            ("electronics", "rx_filter_order") => {
                cfg.rx_filter_order = parse_u32(&section, key, value)?;
            }
            ("grid", "n_samples") => cfg.n_samples = parse_usize(&section, key, value)?,
            ("grid", "span_ns") => cfg.span_ns = parse_f64(&section, key, value)?,
            ("grid", "t0_ns") => cfg.t0_ns = parse_f64(&section, key, value)?,
            ("experiment", "seed") => cfg.seed = parse_u64(&section, key, value)?,
            ("experiment", "points") => cfg.points = parse_usize(&section, key, value)?,
            ("experiment", "pairs_per_setting") => {
                cfg.pairs_per_setting = parse_u64(&section, key, value)?;
            }
            ("experiment", "prep") => {
                parse_symbol(value)?;
                cfg.prep = value.to_string();
            }
            ("experiment", "proj") => {
                parse_symbol(value)?;
                cfg.proj = value.to_string();
            }
            ("experiment", "subset") => {
                cfg.subset = match value {
                    "computational" => Subset::Computational,
                    "superposition" => Subset::Superposition,
                    "all" => Subset::All,
                    other => {
                        return Err(ConfigError(format!(
                            "[experiment] subset: expected computational, superposition or all, \
                             got '{other}'"
                        )));
                    }
                };
            }
            ("experiment", "window_mhz") => cfg.window_mhz = parse_f64(&section, key, value)?,
            ("experiment", "reference") => cfg.reference = Some(value.to_string()),
            (_, _) => {
                return Err(ConfigError(format!(
                    "line {}: unknown key '{key}' in [{section}]",
                    line_no + 1
                )));
            }
        }
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    let positive = [
        ("ring_down_time_ns", cfg.ring_down_time_ns),
        ("delta_mhz", cfg.delta_mhz),
        ("linewidth_mhz", cfg.filter_linewidth_mhz),
        ("fsr_ghz", cfg.filter_fsr_ghz),
        ("span_ns", cfg.span_ns),
        ("window_mhz", cfg.window_mhz),
    ];
    for (key, value) in positive {
        if !(value > 0.0) || !value.is_finite() {
            return Err(ConfigError(format!("{key} must be positive, got {value}")));
        }
    }
    if !(cfg.filter_peak_transmission > 0.0 && cfg.filter_peak_transmission <= 1.0) {
        return Err(ConfigError(format!(
            "peak_transmission must be in (0, 1], got {}",
            cfg.filter_peak_transmission
        )));
    }
    if let Some(beta) = cfg.beta {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(ConfigError(format!("beta must be non-negative, got {beta}")));
        }
    }
    for (key, value) in [
        ("tx_bandwidth_mhz", cfg.tx_bandwidth_mhz),
        ("rx_bandwidth_mhz", cfg.rx_bandwidth_mhz),
    ] {
        if let Some(bw) = value {
            if !(bw > 0.0) || !bw.is_finite() {
                return Err(ConfigError(format!("{key} must be positive, got {bw}")));
            }
        }
    }
    if cfg.tx_filter_order == 0 || cfg.rx_filter_order == 0 {
        return Err(ConfigError("filter orders must be at least 1".into()));
    }
    if cfg.n_samples < 2 {
        return Err(ConfigError(format!("n_samples must be at least 2, got {}", cfg.n_samples)));
    }
    if cfg.points < 2 {
        return Err(ConfigError(format!("points must be at least 2, got {}", cfg.points)));
    }
    if cfg.pairs_per_setting == 0 {
        return Err(ConfigError("pairs_per_setting must be positive".into()));
    }
    if !(cfg.emission_delay_ns >= 0.0) {
        return Err(ConfigError(format!(
            "emission_delay_ns must be non-negative, got {}",
            cfg.emission_delay_ns
        )));
    }
    Ok(())
}

impl RunConfig {
    /// Resolved modulation index (the carrier-suppression value by default).
    pub fn effective_beta(&self) -> f64 {
        self.beta.unwrap_or_else(carrier_suppression_index)
    }

    /// Builds the validated channel configuration from the physical-unit
    /// fields. Grid-level feasibility is checked by the channel itself.
    pub fn to_channel_config(&self) -> Result<ChannelConfig, ConfigError> {
        let map = |e: freqbin::Error| ConfigError(e.to_string());
        let source = SourceModel::new(
            self.ring_down_time_ns * 1e-9,
            TAU * self.source_detuning_mhz * 1e6,
        )
        .map_err(map)?;
        let detection_filter = CavityFilter::new(
            TAU * self.filter_linewidth_mhz * 1e6,
            TAU * self.filter_fsr_ghz * 1e9,
            self.filter_peak_transmission,
            TAU * self.filter_detuning_mhz * 1e6,
        )
        .map_err(map)?;
        let tx_electronics =
            DriveElectronics::new(self.tx_bandwidth_mhz.map(|b| b * 1e6), self.tx_filter_order)
                .map_err(map)?;
        let rx_electronics =
            DriveElectronics::new(self.rx_bandwidth_mhz.map(|b| b * 1e6), self.rx_filter_order)
                .map_err(map)?;
        let grid =
            TimeGrid::from_span(self.n_samples, self.span_ns * 1e-9, self.t0_ns * 1e-9)
                .map_err(map)?;
        ChannelConfig::new(ChannelParams {
            source,
            delta: TAU * self.delta_mhz * 1e6,
            beta: Some(self.effective_beta()),
            detection_filter,
            tx_electronics,
            rx_electronics,
            grid,
            drive_phase_offset: self.drive_phase_offset_deg.to_radians(),
            emission_delay: self.emission_delay_ns * 1e-9,
        })
        .map_err(map)
    }

    /// Effective configuration as a document that re-parses to the same
    /// configuration. Floats print with round-trip precision.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        let bw = |b: Option<f64>| match b {
            None => "unlimited".to_string(),
            Some(v) => format!("{v}"),
        };
        let _ = write!(
            out,
            "[source]\n\
             ring_down_time_ns = {}\n\
             center_detuning_mhz = {}\n\
             \n\
             [modulation]\n\
             delta_mhz = {}\n\
             beta = {}\n\
             drive_phase_offset_deg = {}\n\
             emission_delay_ns = {}\n\
             \n\
             [filter]\n\
             linewidth_mhz = {}\n\
             fsr_ghz = {}\n\
             peak_transmission = {}\n\
             center_detuning_mhz = {}\n\
             \n\
             [electronics]\n\
             tx_bandwidth_mhz = {}\n\
             tx_filter_order = {}\n\
             rx_bandwidth_mhz = {}\n\
             rx_filter_order = {}\n\
             \n\
             [grid]\n\
             n_samples = {}\n\
             span_ns = {}\n\
             t0_ns = {}\n\
             \n\
             [experiment]\n\
             seed = {}\n\
             points = {}\n\
             pairs_per_setting = {}\n\
             prep = {}\n\
             proj = {}\n\
             subset = {}\n\
             window_mhz = {}\n",
            self.ring_down_time_ns,
            self.source_detuning_mhz,
            self.delta_mhz,
            self.effective_beta(),
            self.drive_phase_offset_deg,
            self.emission_delay_ns,
            self.filter_linewidth_mhz,
            self.filter_fsr_ghz,
            self.filter_peak_transmission,
            self.filter_detuning_mhz,
            bw(self.tx_bandwidth_mhz),
            self.tx_filter_order,
            bw(self.rx_bandwidth_mhz),
            self.rx_filter_order,
            self.n_samples,
            self.span_ns,
            self.t0_ns,
            self.seed,
            self.points,
            self.pairs_per_setting,
            self.prep,
            self.proj,
            self.subset.name(),
            self.window_mhz,
        );
        if let Some(reference) = &self.reference {
            let _ = write!(out, "reference = {reference}\n");
        }
        out
    }
}
