//! Models of the physical elements in the channel: the narrowband photon
//! source, Lorentzian cavity filters, EOM phase application, drive-waveform
//! synthesis with finite electronics bandwidth, and Bessel utilities.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::wavepacket::{fft_forward_raw, fft_inverse_raw, ComplexEnvelope, Spectrum, TimeGrid};

/// Narrowband single-photon source with an exponential ring-down envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    ring_down_time: f64,
    center_detuning: f64,
}

impl SourceModel {
    /// `ring_down_time` is the intensity 1/e decay time in seconds;
    /// `center_detuning` offsets the emitted line from the carrier (rad/s).
    pub fn new(ring_down_time: f64, center_detuning: f64) -> Result<Self> {
        if !(ring_down_time > 0.0) || !ring_down_time.is_finite() {
            return Err(Error::Config(format!(
                "ring_down_time must be positive, got {ring_down_time}"
            )));
        }
        if !center_detuning.is_finite() {
            return Err(Error::Config("source center_detuning must be finite".into()));
        }
        Ok(SourceModel { ring_down_time, center_detuning })
    }

    pub fn ring_down_time(&self) -> f64 {
        self.ring_down_time
    }

    pub fn center_detuning(&self) -> f64 {
        self.center_detuning
    }

    /// Implied Lorentzian FWHM in rad/s: `1/ring_down_time`.
    pub fn linewidth_fwhm(&self) -> f64 {
        1.0 / self.ring_down_time
    }

    /// Implied linewidth in Hz: `1/(2π·ring_down_time)` (7.58 MHz for 21 ns).
    pub fn linewidth_fwhm_hz(&self) -> f64 {
        self.linewidth_fwhm() / TAU
    }

    /// Normalized one-sided exponential wavepacket starting at the grid origin.
    pub fn emit_photon(&self, grid: &TimeGrid) -> Result<ComplexEnvelope> {
        self.emit_photon_from(grid, grid.t0())
    }

    /// Wavepacket starting at `start`; zero amplitude before it. The field
    /// amplitude decays as `e^{-t/(2τ)}` so the intensity lifetime is τ.
    pub fn emit_photon_from(&self, grid: &TimeGrid, start: f64) -> Result<ComplexEnvelope> {
        let usable = grid.t0() + grid.span() - start;
        if usable < 8.0 * self.ring_down_time {
            return Err(Error::Config(format!(
                "grid span after emission start covers {:.2} lifetimes, need ≥ 8",
                usable / self.ring_down_time
            )));
        }
        let rate = 1.0 / (2.0 * self.ring_down_time);
        let detuning = self.center_detuning;
        let env = ComplexEnvelope::from_fn(*grid, |t| {
            if t < start {
                C64::new(0.0, 0.0)
            } else {
                C64::from_polar((-(t - start) * rate).exp(), detuning * (t - start))
            }
        });
        env.normalized()
    }
}

/// Single-resonance Lorentzian cavity filter.
///
/// The free spectral range is kept only for validity checks; periodic
/// resonances are not modeled because the detection cavity FSR is far
/// beyond the encoded frequency range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityFilter {
    linewidth_fwhm: f64,
    fsr: f64,
    peak_power_transmission: f64,
    center_detuning: f64,
}

impl CavityFilter {
    pub fn new(
        linewidth_fwhm: f64,
        fsr: f64,
        peak_power_transmission: f64,
        center_detuning: f64,
    ) -> Result<Self> {
        if !(linewidth_fwhm > 0.0) || !(linewidth_fwhm < fsr) {
            return Err(Error::Config(format!(
                "filter needs 0 < linewidth ({linewidth_fwhm:.3e}) < FSR ({fsr:.3e})"
            )));
        }
        if !(peak_power_transmission > 0.0 && peak_power_transmission <= 1.0) {
            return Err(Error::Config(format!(
                "peak power transmission must be in (0, 1], got {peak_power_transmission}"
            )));
        }
        if !center_detuning.is_finite() {
            return Err(Error::Config("filter center_detuning must be finite".into()));
        }
        Ok(CavityFilter { linewidth_fwhm, fsr, peak_power_transmission, center_detuning })
    }

    pub fn linewidth_fwhm(&self) -> f64 {
        self.linewidth_fwhm
    }

    pub fn fsr(&self) -> f64 {
        self.fsr
    }

    pub fn peak_power_transmission(&self) -> f64 {
        self.peak_power_transmission
    }

    pub fn center_detuning(&self) -> f64 {
        self.center_detuning
    }

    /// Single-pole amplitude response
    /// `√T0 · (γ/2) / ((γ/2) + i(detuning − center))`, so the power
    /// transmission is `T0 / (1 + (2(detuning − center)/γ)²)`.
    pub fn transmission(&self, detuning: f64) -> C64 {
        let hw = self.linewidth_fwhm / 2.0;
        let num = C64::new(self.peak_power_transmission.sqrt() * hw, 0.0);
        num / C64::new(hw, detuning - self.center_detuning)
    }

    /// Per-bin multiplication of a spectrum by the amplitude response.
    pub fn apply(&self, spec: &Spectrum) -> Spectrum {
        let mut out = spec.clone();
        let grid = *spec.grid();
        for (i, v) in out.samples_mut().iter_mut().enumerate() {
            *v *= self.transmission(grid.angular_frequency(grid.bin_of_index(i)));
        }
        out
    }
}

/// Time-sampled modulation phase written by an EOM, in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    grid: TimeGrid,
    phase: Vec<f64>,
}

impl PhaseProfile {
    pub fn new(grid: TimeGrid, phase: Vec<f64>) -> Result<Self> {
        if phase.len() != grid.n_samples() {
            return Err(Error::Usage(format!(
                "phase profile has {} samples but grid expects {}",
                phase.len(),
                grid.n_samples()
            )));
        }
        Ok(PhaseProfile { grid, phase })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let phase = (0..grid.n_samples()).map(|i| f(grid.time(i))).collect();
        PhaseProfile { grid, phase }
    }

    pub fn constant(grid: TimeGrid, value: f64) -> Self {
        PhaseProfile { grid, phase: vec![value; grid.n_samples()] }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    /// Adds a constant offset everywhere (a global phase on the field).
    pub fn offset_by(&self, offset: f64) -> PhaseProfile {
        PhaseProfile {
            grid: self.grid,
            phase: self.phase.iter().map(|p| p + offset).collect(),
        }
    }

    /// Pointwise difference `self − other`, used for incremental round trips.
    pub fn difference(&self, other: &PhaseProfile) -> Result<PhaseProfile> {
        if self.grid != other.grid {
            return Err(Error::Usage("phase profiles on different grids".into()));
        }
        Ok(PhaseProfile {
            grid: self.grid,
            phase: self.phase.iter().zip(&other.phase).map(|(a, b)| a - b).collect(),
        })
    }

    /// Per-sample multiplication of an envelope by `e^{i·phase}`.
    pub fn apply_to(&self, env: &ComplexEnvelope) -> Result<ComplexEnvelope> {
        if *env.grid() != self.grid {
            return Err(Error::Usage("phase profile and envelope on different grids".into()));
        }
        let mut out = env.clone();
        for (v, &p) in out.samples_mut().iter_mut().zip(&self.phase) {
            *v *= C64::from_polar(1.0, p);
        }
        Ok(out)
    }
}

/// Direction of a serrodyne frequency shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftSign {
    Up,
    Down,
}

impl ShiftSign {
    pub fn factor(&self) -> f64 {
        match self {
            ShiftSign::Up => 1.0,
            ShiftSign::Down => -1.0,
        }
    }
}

/// Ideal sawtooth drive `(±delta·t) mod 2π`: the modulo-2π ramp whose slope
/// matches the linear phase producing a frequency shift of `±delta`.
pub fn serrodyne_profile(delta: f64, sign: ShiftSign, grid: &TimeGrid) -> Result<PhaseProfile> {
    serrodyne_profile_with_phase(delta, sign, 0.0, grid)
}

/// Sawtooth with its ramp advanced by `drive_phase` radians:
/// `±((delta·t + drive_phase) mod 2π)`, equal to `(±(delta·t + ...)) mod 2π`
/// modulo 2π at every sample. The ideal optical effect is the same frequency
/// shift up to a global phase; the ramp edges move with `drive_phase`, which
/// matters once the waveform passes through band-limited electronics. The
/// sign is applied outside the wrap so that the up- and down-shifting drive
/// waveforms are exact mirrors of each other.
pub fn serrodyne_profile_with_phase(
    delta: f64,
    sign: ShiftSign,
    drive_phase: f64,
    grid: &TimeGrid,
) -> Result<PhaseProfile> {
    if !delta.is_finite() || delta.abs() >= grid.nyquist() {
        return Err(Error::Config(format!(
            "serrodyne shift {delta:.3e} rad/s exceeds the grid Nyquist {:.3e} rad/s",
            grid.nyquist()
        )));
    }
    let s = sign.factor();
    Ok(PhaseProfile::from_fn(*grid, |t| s * (delta * t + drive_phase).rem_euclid(TAU)))
}

/// Sinusoidal drive `offset + beta·sin(delta·t + theta)`.
pub fn sinusoid_profile(
    beta: f64,
    theta: f64,
    delta: f64,
    offset: f64,
    grid: &TimeGrid,
) -> PhaseProfile {
    assert!(beta >= 0.0, "modulation index must be non-negative, got {beta}");
    PhaseProfile::from_fn(*grid, |t| offset + beta * (delta * t + theta).sin())
}

/// Low-pass response of the EOM drive chain. The filter acts on the phase
/// waveform (the voltage analog), not on the optical field; this is what
/// turns a sawtooth's discontinuities into spectral leakage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveElectronics {
    bandwidth_hz: Option<f64>,
    filter_order: u32,
}

impl DriveElectronics {
    pub fn new(bandwidth_hz: Option<f64>, filter_order: u32) -> Result<Self> {
        if let Some(bw) = bandwidth_hz {
            if !(bw > 0.0) || !bw.is_finite() {
                return Err(Error::Config(format!("drive bandwidth must be positive, got {bw}")));
            }
        }
        if filter_order == 0 {
            return Err(Error::Config("drive filter order must be at least 1".into()));
        }
        Ok(DriveElectronics { bandwidth_hz, filter_order })
    }

    pub fn unlimited() -> Self {
        DriveElectronics { bandwidth_hz: None, filter_order: 1 }
    }

    pub fn single_pole(bandwidth_hz: f64) -> Result<Self> {
        Self::new(Some(bandwidth_hz), 1)
    }

    pub fn bandwidth_hz(&self) -> Option<f64> {
        self.bandwidth_hz
    }

    pub fn filter_order(&self) -> u32 {
        self.filter_order
    }

    pub fn is_unlimited(&self) -> bool {
        self.bandwidth_hz.is_none()
    }

    /// Complex response `1/(1 + iω/ω_c)^order` at angular frequency ω.
    pub fn response(&self, omega: f64) -> C64 {
        match self.bandwidth_hz {
            None => C64::new(1.0, 0.0),
            Some(bw) => {
                let pole = C64::new(1.0, omega / (TAU * bw));
                (C64::new(1.0, 0.0) / pole).powu(self.filter_order)
            }
        }
    }

    /// Low-pass filters a drive waveform. Unlimited bandwidth is the identity.
    pub fn bandlimit(&self, profile: &PhaseProfile) -> PhaseProfile {
        if self.is_unlimited() {
            return profile.clone();
        }
        let grid = *profile.grid();
        let n = grid.n_samples();
        let mut buf: Vec<C64> = profile.phase().iter().map(|&p| C64::new(p, 0.0)).collect();
        fft_forward_raw(&mut buf);
        for (k, v) in buf.iter_mut().enumerate() {
            // FFT-order index k corresponds to signed harmonic k or k−n.
            let m = if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
            *v *= self.response(grid.angular_frequency(m));
        }
        fft_inverse_raw(&mut buf);
        let scale = 1.0 / n as f64;
        let phase = buf.iter().map(|v| v.re * scale).collect();
        PhaseProfile { grid, phase }
    }
}

/// Bessel function of the first kind `J_n(β)`, by trapezoidal quadrature of
/// `(1/π)∫₀^π cos(nτ − β·sin τ) dτ`. The integrand is smooth, even and
/// 2π-periodic, so the rule converges exponentially; 1024 panels hold the
/// error well below 1e-12 for every argument used here.
pub fn bessel_coeff(n: i32, beta: f64) -> f64 {
    const PANELS: usize = 1024;
    let h = PI / PANELS as f64;
    let f = |tau: f64| (n as f64 * tau - beta * tau.sin()).cos();
    let mut acc = 0.5 * (f(0.0) + f(PI));
    for i in 1..PANELS {
        acc += f(i as f64 * h);
    }
    acc * h / PI
}

/// The modulation index β* at which modulation and demodulation combine to a
/// total index 2β* that fully suppresses the carrier: half the first zero of
/// `J_0`, found by bracketing and bisection.
pub fn carrier_suppression_index() -> f64 {
    let f = |beta: f64| bessel_coeff(0, 2.0 * beta);
    let (mut lo, mut hi) = (1.0_f64, 1.5_f64);
    debug_assert!(f(lo) > 0.0 && f(hi) < 0.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
