//! # facegen
//!
//! A fully parametric synthetic face-image generator for studying how
//! dataset bias affects face recognition.
//!
//! The pipeline has four stages:
//!
//! 1. **Faces** ([`model`], [`container`]): a PCA morphable model of shape,
//!    per-vertex color and expression. Identities are drawn from the model
//!    prior and instantiated into triangle meshes. A procedural toy model
//!    stands in for licensed scan-based models.
//! 2. **Images** ([`illumination`], [`camera`], [`raster`], [`background`],
//!    [`render`]): a deterministic software rasterizer with a pinhole camera,
//!    yaw pose, 3-band spherical-harmonics Lambertian shading and textured
//!    backgrounds.
//! 3. **Datasets** ([`protocol`], [`seed`], [`dataset`]): bias protocols
//!    restrict the nuisance parameters of the training split while the test
//!    split covers the full grid. Every image gets a manifest row with its
//!    ground-truth identity and nuisance values.
//! 4. **Evaluation** ([`classifier`], [`eval`]): a nearest-class-mean
//!    baseline and a harness that decomposes the total recognition rate
//!    along the nuisance axes.
//!
//! ## Conventions
//!
//! World frame: `+y` up, the face looks along `+z` toward the camera, and
//! `+x` points to the subject's left (image right). Positive yaw turns the
//! face toward `+x`. A light azimuth of 0 is frontal and positive azimuths
//! place the light on the subject's right (`-x`, image left). Angles are
//! radians in the API and degrees in files.
//!
//! ```no_run
//! use facegen::dataset::{generate_dataset, ExperimentConfig};
//!
//! let config = ExperimentConfig::from_file("experiment.toml").unwrap();
//! let manifest = generate_dataset(&config).unwrap();
//! println!("{} images", manifest.records.len());
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod background;
pub mod camera;
pub mod classifier;
pub mod container;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod illumination;
pub mod model;
pub mod protocol;
pub mod raster;
pub mod render;
pub mod seed;

pub use error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;
