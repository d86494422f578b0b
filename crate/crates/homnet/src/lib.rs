//! # homnet
//!
//! Classical simulation and training of shallow networks whose forward pass
//! is the coincidence rate of a Hong-Ou-Mandel interferometer.
//!
//! One photon carries the input image in its spatial spectrum, the other a
//! mixture (or superposition) of `M` hidden patterns. The coincidence
//! probability at a balanced beam splitter gives the network response
//! `f = Σᵢ wᵢ ⟨x, Wᵢ⟩²`, post-processed through a bias and a sigmoid.
//!
//! This crate provides:
//! - dataset loaders (IDX, CIFAR-10 binary) and preprocessing ([`dataio`])
//! - single-photon state algebra and the density-matrix coincidence oracle
//!   ([`statevec`])
//! - the mixture, superposition and classical-baseline forward passes
//!   ([`models`])
//! - analytic gradients, Adam, constraint handling and the training loop
//!   ([`learn`])
//! - photon shot-noise emulation and sample-complexity tooling
//!   ([`photonics`])
//! - on-disk formats: split container ([`split`]), checkpoint JSON
//!   ([`checkpoint`]), history CSV ([`history`]) and SVG history plots
//!   ([`svgplot`])

pub mod checkpoint;
pub mod dataio;
pub mod history;
pub mod learn;
pub mod models;
pub mod photonics;
pub mod split;
pub mod statevec;
pub mod svgplot;

pub use models::{ClassicalModel, MixtureModel, Model, PositivityMap, SuperpositionModel};
pub use statevec::{DensityMatrix, FeatureVector};
