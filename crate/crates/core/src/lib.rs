//! Evaluation engine for synthetic volumetric medical images.
//!
//! The crate covers the numerical side of a synthetic-data pipeline that does
//! not need network training:
//!
//! * [`volume`]: voxel grids, intensity normalization, morphology, blurring
//!   and the 3D Haar transform.
//! * [`radiomics`]: fixed-bin-width discretization and the shape, first-order,
//!   GLCM, GLRLM, GLDM and NGTDM feature families on original, LoG and wavelet
//!   images.
//! * [`fidelity`]: MAE, 3D MS-SSIM, Dice, concordance correlation and PCA
//!   centroid distance.
//! * [`diffusion`]: noise schedules, DPM++ 2M samplers, the ancestral
//!   baseline, known-region replacement and inpainting masks.
//! * [`adversarial`]: conditional GAN and diffusion training objectives and
//!   the adaptive augmentation controller.
//! * [`vtt`]: Visual Turing Test sessions, rating journal and agreement
//!   statistics.

// `!(x > 0.0)` is the NaN-rejecting form used throughout; index loops mirror
// the matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod adversarial;
pub mod diffusion;
pub mod error;
pub mod fidelity;
pub mod io;
pub mod radiomics;
pub mod volume;
pub mod vtt;

pub use error::{Error, ErrorCategory, Result};
pub use volume::{Dims, Geometry, IntensityKind, LabelMask, Spacing, Volume};
