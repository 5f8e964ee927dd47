//! Regularity measurements: the flatness of solutions against the
//! extension ansatz across dyadic scales, and the exponent experiments
//! built on it.

mod experiments;
mod flatness;

pub use experiments::{
    flatness_experiment, holder_estimate_experiment, smooth_data, synth_drift, theorem1_experiment,
    theorem2_experiment, theorem2_sweep, ExperimentConfig, ExponentReport,
};
pub use flatness::{
    clock_rate, extension_slices, flatness_profile, shift_field, FlatnessConfig, FlatnessReport, FlatnessScale,
    MIN_SAMPLES,
};

#[cfg(test)]
mod tests;
