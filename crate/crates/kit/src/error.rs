use std::path::{Path, PathBuf};

use hannay_core::RefusalCode;

#[derive(Debug, thiserror::Error)]
pub enum KitError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] hannay_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl KitError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        KitError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn refusal_code(&self) -> Option<RefusalCode> {
        match self {
            KitError::Config(_) => Some(RefusalCode::ConfigInvalid),
            KitError::Core(e) => e.refusal_code(),
            KitError::Io { .. } => None,
        }
    }

    /// 2 for a failed existence condition or rejected config, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.refusal_code().is_some() {
            2
        } else {
            1
        }
    }
}
