//! Studies built on the model: bifurcation scans, Hopf diagnostics,
//! Lyapunov spectra, the dissipativity audit and basin sampling.

pub mod basin;
pub mod bifurcation;
pub mod dissipativity;
pub mod lyapunov;

pub use basin::{basin_sample, BasinLabel, BasinPoint, GridSpec};
pub use bifurcation::{
    bifurcation_scan, delta_rh, hopf_report, regime_record, HopfReport, Regime, RegimeRecord,
};
pub use dissipativity::{dissipativity_audit, DissipativityReport};
pub use lyapunov::{
    largest_exponent_two_trajectory, lyapunov_spectrum, ChaosLabel, LyapunovOptions, LyapunovResult,
};
