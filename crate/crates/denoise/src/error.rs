use thiserror::Error;

pub type Result<T> = std::result::Result<T, DenoiseError>;

#[derive(Debug, Error)]
pub enum DenoiseError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image codec error: {0}")]
    Codec(#[from] image::ImageError),

    #[error("unsupported image format '{0}' (expected pgm or png)")]
    UnsupportedFormat(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed reference cache: {0}")]
    Cache(String),

    #[error("patch {patch}: {source}")]
    Solver {
        patch: usize,
        #[source]
        source: flips_core::LipError,
    },
}
