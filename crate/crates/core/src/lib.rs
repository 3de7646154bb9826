//! Comb-like SPDC spectra from bi-periodically poled lithium niobate superlattices.
//!
//! The crate evaluates the nonlinear-interference intensity of a signed
//! domain sequence over wavelength and wavelength–angle grids, smooths it with
//! a Gaussian instrument response, and extracts comb statistics: peak spacing,
//! Gaussian envelope width and Pearson correlation against a reference.
//!
//! ```
//! use spdc_core::{DesignSpec, DispersionModel, Simulation, UniformGrid};
//!
//! let model = DispersionModel::default();
//! let spec = DesignSpec::design_1();
//! let grid = UniformGrid::new(0.64, 0.65, 1e-4).unwrap().points();
//! let spectrum = Simulation::new(&model, &spec, 0.532, 22.0).spectrum(&grid, 0.0).unwrap();
//! assert!(spectrum.intensity().iter().all(|i| (0.0..=1.0).contains(i)));
//! ```

// `!(x > 0.0)` is used on purpose: it rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod dispersion;
pub mod error;
pub mod grid;
pub mod instrument;
pub mod interference;
pub mod io;
pub mod spectrum;
pub mod superlattice;

pub use analysis::{comb_stats, CombStats, EnvelopeFit, Peak, PeakThresholds};
pub use dispersion::{idler_wavelength, DispersionModel, PhotonTriplet};
pub use error::{Error, Result};
pub use grid::UniformGrid;
pub use instrument::InstrumentResponse;
pub use interference::{amplitude_fast, amplitude_naive, intensity, quadrature_oracle, FastEvaluator, PhaseMismatch, Simulation};
pub use spectrum::{AngularMap, Channel, ConvolutionState, Spectrum, SpectrumMeta};
pub use superlattice::{build_sequence, design_length, validate, DesignSpec, DomainSequence, Sign};
