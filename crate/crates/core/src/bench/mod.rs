//! The two imaging benchmarks and the synthetic problems used for testing.

pub mod image;
pub mod operators;
pub mod power;
pub mod problems;
pub mod rng;

pub use image::{add_gaussian_noise, pgm_read, pgm_write, synth_test_image, DualField, ImageGray};
pub use operators::{DiscreteGradient, GaussianBlur, Haar2d};
pub use power::{estimate_operator_norm_sq, PowerEstimate};
pub use problems::*;
pub use rng::SplitMix64;
