//! Hand-crafted texture descriptors and named feature vectors.

mod edge;
mod extract;
pub(crate) mod filter;
mod fractal;
mod gabor;
mod glcm;
mod laws;
mod lbp;
mod spectral;
mod stats;
mod table;
mod wavelet;

pub use edge::{edge_histogram, EdgeHistogram};
pub use extract::{extract_all, FeatureVector, TextureConfig};
pub use filter::Boundary;
pub use fractal::{
    box_count_dimension, fractal_features, multi_otsu, BinaryMask, BoxCountFit, FractalFeatures, MultiOtsu,
};
pub use gabor::{gabor_bank, gabor_kernel, GaborConfig, GaborParams, GaborResponse};
pub use glcm::{glcm, glcm_stats, Glcm, GlcmConfig, GlcmOffset, GlcmStats};
pub use laws::{laws_features, LawsComponent};
pub use lbp::{lbp_code, lbp_histogram};
pub use spectral::{dct_features, dft2, dft_features};
pub use stats::{subband_stats, SubbandStats, ENTROPY_BINS};
pub use table::FeatureTable;
pub use wavelet::{wavelet_frames, FrameLevel, WaveletConfig, WaveletFrames};
