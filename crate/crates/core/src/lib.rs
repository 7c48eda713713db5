//! Block vector-quantization segmentation of grayscale images.
//!
//! The main route trains an LBG codebook on fixed-size image blocks, groups
//! the codevectors into a handful of texture classes, renders one image per
//! class and outlines each class with Canny edges laid over the original.
//! GLCM texture maps and an immersion watershed are provided as baselines.

pub mod edges;
pub mod error;
pub mod glcm;
pub mod imaging;
pub mod pipeline;
pub mod vq;
pub mod watershed;

mod filter;

pub use error::{Error, Result};
pub use imaging::{FeatureMap, GrayImage, MapKind};
