use std::path::PathBuf;

use nelson_core::Error as CoreError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitCode {
    Usage = 1,
    Io = 2,
    Infeasible = 3,
    CapExceeded = 4,
    Exhausted = 5,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Args(#[from] clap::Error),

    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// A module error raised while reading a specific input file.
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: CoreError },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{exhausted} of {rows} rows hit the tryout limit")]
    Exhausted { exhausted: usize, rows: usize },
}

#[derive(Serialize)]
struct ErrorFile<'a> {
    error: &'a str,
    exit_code: i32,
    message: String,
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Args(_) | Self::Usage(_) => ExitCode::Usage,
            Self::Io { .. } => ExitCode::Io,
            Self::Input { source, .. } => match core_code(source) {
                ExitCode::Usage => ExitCode::Io,
                c => c,
            },
            Self::Core(e) => core_code(e),
            Self::Exhausted { .. } => ExitCode::Exhausted,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            ExitCode::Usage => "usage",
            ExitCode::Io => "io",
            ExitCode::Infeasible => "infeasible",
            ExitCode::CapExceeded => "cap_exceeded",
            ExitCode::Exhausted => "sampler_exhausted",
        }
    }

    /// Single-line JSON for stderr.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorFile {
            error: self.kind(),
            exit_code: self.exit_code() as i32,
            message: self.to_string(),
        })
        .expect("error serializes")
    }

    /// `--help` and `--version` surface as clap errors but are not failures.
    pub fn is_informational(&self) -> bool {
        matches!(self, Self::Args(e) if !e.use_stderr())
    }
}

fn core_code(e: &CoreError) -> ExitCode {
    match e {
        CoreError::CapExceeded { .. } => ExitCode::CapExceeded,
        CoreError::Unsatisfiable | CoreError::Generation(_) => ExitCode::Infeasible,
        CoreError::SamplerExhausted { .. } | CoreError::NoValidInit => ExitCode::Exhausted,
        CoreError::InvalidConfig(_) => ExitCode::Usage,
        _ => ExitCode::Io,
    }
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn input_err(path: &std::path::Path) -> impl FnOnce(CoreError) -> CliError + '_ {
    move |source| CliError::Input {
        path: path.to_path_buf(),
        source,
    }
}
