//! Handwritten capital-letter recognition front end.
//!
//! The pipeline runs from a grayscale scan to a recognized letter:
//!
//! 1. [`imaging`] parses PGM scans and binarizes them (dark ink = 1).
//! 2. [`extraction`] trims a roughly cropped block to a 25x20 pattern by
//!    repeatedly dropping the lower-variance edge row or column.
//! 3. [`network`] is a from-scratch 3-layer sigmoid network trained by online
//!    backpropagation with momentum.
//! 4. [`models`] builds three recognizers on top of it: a single 26-way
//!    network, a one-network-per-letter ensemble and a two-stage
//!    group/position recognizer.
//! 5. [`dataset`] and [`reporting`] supply synthetic corpora and accuracy
//!    reports.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the usual double-precision instantiation.

pub mod dataset;
pub mod extraction;
pub mod imaging;
pub mod models;
pub mod network;
pub mod reporting;
pub mod scalar;
pub mod seed;

pub use scalar::Scalar;

pub type Net = network::FeedForwardNet<f64>;
pub type Net32 = network::FeedForwardNet<f32>;
pub type Config = network::TrainingConfig<f64>;
pub type Config32 = network::TrainingConfig<f32>;
pub type Direct = models::DirectModel<f64>;
pub type Correlation = models::CorrelationModel<f64>;
pub type Hierarchical = models::HierarchicalModel<f64>;
pub type AnyModel = models::Model<f64>;
pub type Recognition = models::RecognitionResult<f64>;
