//! Vertebra localization and identification from per-label 3-D activation maps.
//!
//! The pipeline combines the label channels, traces the spine centerline,
//! resamples every channel in the centerline's normal planes and sums each
//! plane into a 1-D signal, then labels the signal peaks jointly under a
//! consecutive-label constraint with a gap-regularity penalty.
//!
//! ```
//! use spine_rectify::{pipeline::Pipeline, synth, config::RunConfig, optimize::Mode};
//!
//! let phantom = synth::generate(&synth::PhantomSpec::default()).unwrap();
//! let pipeline = Pipeline::new(RunConfig::default());
//! let out = pipeline.run(&phantom.stack, Mode::Optim).unwrap();
//! println!("{} vertebrae, {} annotated", out.predictions.len(), phantom.truth.len());
//! ```

pub mod centerline;
pub mod heatmap;
pub mod labels;
pub mod optimize;
pub mod rectify;
pub mod volume;
pub mod synth;
pub mod metrics;
pub mod config;
pub mod pipeline;
pub mod plot;
pub mod cli;
