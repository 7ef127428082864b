//! Shared helpers for unit and integration tests: a fast channel
//! configuration and continuous-spectrum quadrature oracles that are
//! independent of the FFT pipeline.

use num_complex::Complex64 as C64;

use crate::channel::{ChannelConfig, ChannelParams};
use crate::optics::bessel_coeff;
use crate::wavepacket::TimeGrid;

/// Default physics on a reduced grid (8192 samples, ~500 ns span).
pub fn fast_config() -> ChannelConfig {
    let params = ChannelParams {
        grid: TimeGrid::from_span(1 << 13, 512e-9, 0.0).unwrap(),
        ..ChannelParams::default()
    };
    ChannelConfig::new(params).unwrap()
}

/// Simpson-rule evaluation of the filtered carrier projection for a
/// combined sinusoidal drive of index `b` at drive phase `phi` acting on the
/// analytic one-sided-exponential line shape `1/(a + iω)`, normalized by the
/// matched-line transmission. Independent of the FFT path.
pub fn carrier_projection_oracle(cfg: &ChannelConfig, b: f64, phi: f64) -> f64 {
    let a = 1.0 / (2.0 * cfg.source().ring_down_time());
    let delta = cfg.delta();
    let orders: Vec<(i32, f64)> = (-12..=12).map(|n| (n, bessel_coeff(n, b))).collect();
    let amplitude = |w: f64| -> C64 {
        orders
            .iter()
            .map(|&(n, jn)| C64::from_polar(1.0, n as f64 * phi) * jn / C64::new(a, w - n as f64 * delta))
            .sum::<C64>()
    };
    let filter = cfg.detection_filter();
    let w_max = 8.0 * delta;
    let n_steps = 160_000;
    let h = 2.0 * w_max / n_steps as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..=n_steps {
        let w = -w_max + i as f64 * h;
        let weight = if i == 0 || i == n_steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let t = filter.transmission(w).norm_sqr();
        num += weight * amplitude(w).norm_sqr() * t;
        den += weight * (1.0 / C64::new(a, w).norm_sqr()) * t;
    }
    num / den
}
