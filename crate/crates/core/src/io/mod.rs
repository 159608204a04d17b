//! Persistence: matrix formats, netpbm frames, dataset directories, and
//! frame-manifest ingestion.

pub mod dataset;
pub mod matrix;
pub mod netpbm;

pub use dataset::{
    ingest_frames, ingest_manifest, load_labels, load_set, read_frame_manifest, save_labels,
    save_set, IngestOptions, LabeledGrassmannSet, ManifestEntry, SetMeta,
};
pub use matrix::{
    load_matrix, load_matrix_csv, load_matrix_gmx, save_matrix, save_matrix_csv, save_matrix_gmx,
};
pub use netpbm::{load_gray_frame, parse_gray_frame};
