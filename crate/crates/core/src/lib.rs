//! Frequency-domain toolkit for diffusion sampling experiments.
//!
//! The crate covers four layers, each usable on its own:
//!
//! * centered 2D transforms, radial geometry and power spectra
//!   ([`spectrum`], [`radial`], [`psd`]);
//! * an analytic toy diffusion model with a power-law Gaussian prior, its exact
//!   Wiener denoiser and a deterministic DDIM sampler ([`schedule`], [`prior`],
//!   [`snr`], [`denoise`], [`sampler`]);
//! * frequency modulation between paired trajectories and staged high-pass
//!   filtering ([`fmm`], [`intervention`]);
//! * similarity metrics ([`metrics`]).

pub mod denoise;
pub mod error;
pub mod field;
pub mod fmm;
pub mod intervention;
pub mod metrics;
pub mod prior;
pub mod psd;
pub mod radial;
pub mod rng;
pub mod sampler;
pub mod schedule;
pub mod snr;
pub mod spectrum;

pub use denoise::{wiener_denoise, wiener_denoise_1d, wiener_gain, WienerDenoiser};
pub use error::{Error, Result};
pub use field::{RealField, Shape};
pub use fmm::{decay_factor, fuse_spectra, modulate, paired_sample, weight_field, ModulationHook, WeightField, WeightKind, WeightParams};
pub use intervention::{high_pass_intervention, FilterShape, FilterSpec, HighPassHook};
pub use metrics::{band_distance, ms_ssim, psnr, ssim, MetricReport};
pub use prior::{synthesize_prior_sample, ConditionSpec, ConditionStyle, PowerLawPrior};
pub use psd::{psd_slope, radially_averaged_psd, PsdAccumulator, PsdProfile};
pub use radial::{radial_distance_map, RadialMap};
pub use sampler::{ddim_step, sample, sample_from, LatentHook, StepContext, TrajectoryRecord, TrajectoryStep};
pub use schedule::{build_schedule, forward_diffuse, NoiseSchedule, ScheduleKind};
pub use snr::{empirical_snr, theoretical_snr, theoretical_snr_profile, EmpiricalSnr};
pub use spectrum::{brute_force_dft, forward_transform, inverse_transform, ComplexSpectrum};
