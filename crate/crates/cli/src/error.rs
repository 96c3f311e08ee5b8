use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    ConfigParse {
        line: usize,
        column: usize,
        message: String,
    },
    Validation {
        key: String,
        message: String,
    },
    WindowTooLarge {
        key: String,
        leaves: usize,
        cap: usize,
    },
    Tolerance(String),
    Io {
        path: String,
        message: String,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ConfigParse { .. } | CliError::Validation { .. } | CliError::WindowTooLarge { .. } => 2,
            CliError::Tolerance(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn validation(key: &str, message: impl Into<String>) -> Self {
        CliError::Validation {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: impl fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

/// Maps a library error raised while handling the block at `key`.
pub fn lib(key: &'static str) -> impl Fn(hilap::Error) -> CliError {
    move |e| match e {
        hilap::Error::WindowTooLarge { leaves, cap } => CliError::WindowTooLarge {
            key: key.to_string(),
            leaves,
            cap,
        },
        e => CliError::validation(key, e.to_string()),
    }
}

/// One machine-readable line: `error=<kind> key=value ... message="..."`.
impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::ConfigParse { line, column, message } => {
                write!(f, "error=ConfigParse line={line} column={column} message={message:?}")
            }
            CliError::Validation { key, message } => {
                write!(f, "error=Validation key={key} message={message:?}")
            }
            CliError::WindowTooLarge { key, leaves, cap } => {
                write!(f, "error=WindowTooLarge key={key} leaves={leaves} cap={cap}")
            }
            CliError::Tolerance(message) => write!(f, "error=Tolerance message={message:?}"),
            CliError::Io { path, message } => write!(f, "error=Io path={path:?} message={message:?}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
