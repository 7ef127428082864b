//! Physics-level simulator of a time-domain frequency-bin qutrit channel.
//!
//! Quantum symbols are written onto a long-coherence single-photon
//! wavepacket with electro-optic phase modulation — sawtooth drives for
//! frequency shifts, sinusoidal drives for superpositions — and read back
//! by demodulation followed by a narrowband cavity filter. The crate
//! provides the sampled wavepacket algebra ([`wavepacket`]), models of the
//! physical elements ([`optics`]), the end-to-end prepare/transmit/project
//! pipeline ([`channel`]), and drivers that regenerate truth tables,
//! spectra, coherence fringes, photon-counting statistics and channel
//! capacity scores ([`experiments`]).

pub mod channel;
pub mod error;
pub mod experiments;
pub mod optics;
pub mod wavepacket;

#[cfg(test)]
pub(crate) mod testutil;

pub use channel::{
    overlap_probability, prepare, project, state_vector, storage_loop_propagate, ChannelConfig,
    ChannelParams, StateVector3, Symbol,
};
pub use error::{Error, Result};
pub use experiments::{
    classical_baseline, compare_measured, monte_carlo_counts, monte_carlo_ensemble,
    mutual_information, phase_scan, spectrum_trace, truth_table, CompareReport, CountRecord,
    FringeCurve, ProjectionMatrix,
};
pub use optics::{
    bessel_coeff, carrier_suppression_index, serrodyne_profile, sinusoid_profile, CavityFilter,
    DriveElectronics, PhaseProfile, ShiftSign, SourceModel,
};
pub use wavepacket::{ComplexEnvelope, Spectrum, TimeGrid};
