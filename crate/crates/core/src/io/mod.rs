//! File formats: NIfTI-1 volumes and masks, raw float32 fixtures, and a PNG
//! slice renderer used to serve 2D review payloads.

pub mod nifti;
pub mod raw;
mod render;

pub use nifti::{read_mask, read_volume, write_mask, write_volume, write_volume_as, Precision};
pub use raw::{read_raw, write_raw, RawSidecar};
pub use render::{render_slice_png, Window};
