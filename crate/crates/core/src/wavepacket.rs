//! Discrete time/frequency representation of single-photon amplitude
//! functions, plus the unitary transforms and inner products everything
//! else is built on.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * All frequencies are angular detunings (rad/s) from the optical
//!   carrier; the absolute optical frequency never appears numerically.
//! * The forward transform uses the analysis kernel `e^{-iωt}` and is
//!   unitary: multiplying an envelope by `e^{+iΔt}` shifts its spectrum
//!   to `+Δ`. This is locked by the shift-theorem tests below.
//! * Spectra are stored in centered order: index `i` holds bin
//!   `m = i - n/2`, and bin `m` sits at angular frequency
//!   `ω_m = 2πm/(n·dt)`. Bin 0 is the photon carrier.
//! * The squared norm of both envelopes and spectra is `Σ|s|²·dt`, so
//!   Parseval holds with the same scale on both sides.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform sampling grid in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    n_samples: usize,
    dt: f64,
    t0: f64,
}

impl TimeGrid {
    /// Grid of `n_samples` points spaced `dt` seconds, starting at `t0`.
    pub fn new(n_samples: usize, dt: f64, t0: f64) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::Config(format!(
                "time grid needs at least 2 samples, got {n_samples}"
            )));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("sample spacing must be positive, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::Config(format!("grid start time must be finite, got {t0}")));
        }
        Ok(TimeGrid { n_samples, dt, t0 })
    }

    /// Grid covering `span` seconds with `n_samples` points.
    pub fn from_span(n_samples: usize, span: f64, t0: f64) -> Result<Self> {
        if !(span > 0.0) || !span.is_finite() {
            return Err(Error::Config(format!("grid span must be positive, got {span}")));
        }
        Self::new(n_samples, span / n_samples as f64, t0)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Total covered time `n_samples · dt`.
    pub fn span(&self) -> f64 {
        self.n_samples as f64 * self.dt
    }

    /// Time of sample `i`.
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Angular frequency resolution `2π/span`.
    pub fn freq_resolution(&self) -> f64 {
        std::f64::consts::TAU / self.span()
    }

    /// Nyquist angular frequency `π/dt`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.dt
    }

    /// Centered bin index of storage slot `i`: `m = i - n/2`.
    pub fn bin_of_index(&self, i: usize) -> i64 {
        i as i64 - (self.n_samples / 2) as i64
    }

    /// Storage slot of centered bin `m`.
    pub fn index_of_bin(&self, m: i64) -> Option<usize> {
        let i = m + (self.n_samples / 2) as i64;
        (0..self.n_samples as i64).contains(&i).then_some(i as usize)
    }

    /// Angular frequency of centered bin `m`.
    pub fn angular_frequency(&self, m: i64) -> f64 {
        m as f64 * self.freq_resolution()
    }

    /// Checks the grid against a channel run: the Nyquist frequency must
    /// resolve all modeled sidebands (`π/dt > 2Δ + 3γ_photon`) and the
    /// span must cover at least 8 photon intensity lifetimes.
    pub fn check_channel_validity(
        &self,
        delta: f64,
        photon_linewidth_fwhm: f64,
        ring_down_time: f64,
    ) -> Result<()> {
        let needed = 2.0 * delta.abs() + 3.0 * photon_linewidth_fwhm;
        if self.nyquist() <= needed {
            return Err(Error::Config(format!(
                "grid Nyquist {:.3e} rad/s does not resolve the modeled sidebands \
                 (requires > {:.3e} rad/s)",
                self.nyquist(),
                needed
            )));
        }
        let min_span = 8.0 * ring_down_time;
        if self.span() < min_span {
            return Err(Error::Config(format!(
                "grid span {:.3e} s covers fewer than 8 photon lifetimes ({:.3e} s)",
                self.span(),
                min_span
            )));
        }
        Ok(())
    }
}

/// Sampled complex field amplitude in time, one value per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexEnvelope {
    grid: TimeGrid,
    samples: Vec<C64>,
}

/// Sampled complex spectral amplitude, one value per centered frequency bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: TimeGrid,
    samples: Vec<C64>,
}

fn fft_plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut plans = plans.lock().unwrap();
    plans
        .entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

/// In-place unnormalized forward FFT, exposed for drive-waveform filtering.
pub(crate) fn fft_forward_raw(buf: &mut [C64]) {
    fft_plan(buf.len(), true).process(buf);
}

/// In-place unnormalized inverse FFT.
pub(crate) fn fft_inverse_raw(buf: &mut [C64]) {
    fft_plan(buf.len(), false).process(buf);
}

impl ComplexEnvelope {
    pub fn new(grid: TimeGrid, samples: Vec<C64>) -> Result<Self> {
        if samples.len() != grid.n_samples() {
            return Err(Error::Usage(format!(
                "envelope has {} samples but grid expects {}",
                samples.len(),
                grid.n_samples()
            )));
        }
        Ok(ComplexEnvelope { grid, samples })
    }

    /// Envelope built by evaluating `f` at each grid time.
    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> C64) -> Self {
        let samples = (0..grid.n_samples()).map(|i| f(grid.time(i))).collect();
        ComplexEnvelope { grid, samples }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [C64] {
        &mut self.samples
    }

    /// Squared norm `Σ|s|²·dt`.
    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.grid.dt()
    }

    /// Rescales to unit squared norm.
    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Usage(format!("cannot normalize envelope with norm² {n}")));
        }
        let s = 1.0 / n.sqrt();
        for v in &mut self.samples {
            *v *= s;
        }
        Ok(self)
    }

    /// Discrete inner product `∫ self*(t)·other(t) dt`.
    pub fn inner_product(&self, other: &Self) -> Result<C64> {
        if self.grid != other.grid {
            return Err(Error::Usage("inner product of envelopes on different grids".into()));
        }
        let acc: C64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(acc * self.grid.dt())
    }

    /// Unitary transform to the frequency domain (analysis kernel `e^{-iωt}`).
    pub fn to_spectrum(&self) -> Spectrum {
        let n = self.grid.n_samples();
        let mut buf = self.samples.clone();
        fft_forward_raw(&mut buf);
        let scale = 1.0 / (n as f64).sqrt();
        let t0 = self.grid.t0();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, slot) in out.iter_mut().enumerate() {
            let m = self.grid.bin_of_index(i);
            let mut v = buf[m.rem_euclid(n as i64) as usize] * scale;
            if t0 != 0.0 {
                v *= C64::from_polar(1.0, -self.grid.angular_frequency(m) * t0);
            }
            *slot = v;
        }
        Spectrum { grid: self.grid, samples: out }
    }
}

impl Spectrum {
    pub fn new(grid: TimeGrid, samples: Vec<C64>) -> Result<Self> {
        if samples.len() != grid.n_samples() {
            return Err(Error::Usage(format!(
                "spectrum has {} samples but grid expects {}",
                samples.len(),
                grid.n_samples()
            )));
        }
        Ok(Spectrum { grid, samples })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [C64] {
        &mut self.samples
    }

    /// Squared norm `Σ|s|²·dt`; equals the time-domain norm by Parseval.
    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.grid.dt()
    }

    /// Amplitude at centered bin `m`.
    pub fn at_bin(&self, m: i64) -> Option<C64> {
        self.grid.index_of_bin(m).map(|i| self.samples[i])
    }

    /// Centered bin index with the largest |amplitude|².
    pub fn peak_bin(&self) -> i64 {
        let (i, _) = self
            .samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .expect("spectrum is never empty");
        self.grid.bin_of_index(i)
    }

    /// Iterator over `(angular detuning, amplitude)` pairs in bin order.
    pub fn iter_bins(&self) -> impl Iterator<Item = (f64, C64)> + '_ {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, &s)| (self.grid.angular_frequency(self.grid.bin_of_index(i)), s))
    }

    /// FWHM of |amplitude|² found by half-maximum bin search with linear
    /// interpolation at the two crossings, in rad/s.
    pub fn power_fwhm(&self) -> f64 {
        let powers: Vec<f64> = self.samples.iter().map(|s| s.norm_sqr()).collect();
        let (i_max, &p_max) = powers
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("spectrum is never empty");
        let half = p_max / 2.0;
        let mut lo = i_max;
        while lo > 0 && powers[lo - 1] >= half {
            lo -= 1;
        }
        let mut hi = i_max;
        while hi + 1 < powers.len() && powers[hi + 1] >= half {
            hi += 1;
        }
        let left = if lo > 0 {
            lo as f64 - (powers[lo] - half) / (powers[lo] - powers[lo - 1])
        } else {
            lo as f64
        };
        let right = if hi + 1 < powers.len() {
            hi as f64 + (powers[hi] - half) / (powers[hi] - powers[hi + 1])
        } else {
            hi as f64
        };
        (right - left) * self.grid.freq_resolution()
    }

    /// Unitary transform back to the time domain.
    pub fn to_time(&self) -> ComplexEnvelope {
        let n = self.grid.n_samples();
        let t0 = self.grid.t0();
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for (i, &s) in self.samples.iter().enumerate() {
            let m = self.grid.bin_of_index(i);
            let mut v = s;
            if t0 != 0.0 {
                v *= C64::from_polar(1.0, self.grid.angular_frequency(m) * t0);
            }
            buf[m.rem_euclid(n as i64) as usize] = v;
        }
        fft_inverse_raw(&mut buf);
        let scale = 1.0 / (n as f64).sqrt();
        for v in &mut buf {
            *v *= scale;
        }
        ComplexEnvelope { grid: self.grid, samples: buf }
    }
}
