use std::path::PathBuf;

use thiserror::Error;

use crate::config::Violation;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}{message}", path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Parse {
        path: Option<PathBuf>,
        message: String,
    },

    #[error("invalid configuration:\n{}", list(.0))]
    Invalid(Vec<Violation>),

    #[error("{context}: {source}")]
    Engine {
        context: String,
        #[source]
        source: elva_core::ElvaError,
    },

    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|x| format!("  {x}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn engine(context: impl Into<String>) -> impl FnOnce(elva_core::ElvaError) -> Self {
        let context = context.into();
        move |source| Self::Engine { context, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse { .. } | Self::Invalid(_) => 2,
            Self::Engine { .. } | Self::Output { .. } => 3,
        }
    }
}
