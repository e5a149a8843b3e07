//! Error type shared across the crate.

use std::fmt;
use std::io;
use std::path::PathBuf;

#[derive(Debug)]
pub enum Error {
    /// Tensor or descriptor shapes do not line up. The message names the
    /// offending axis or quantity.
    Shape(String),
    /// An argument or model state is invalid for the requested operation.
    Invalid(String),
    /// A file did not parse. `offset` is a byte offset for binary formats,
    /// `line` a line number for text formats.
    Format {
        message: String,
        offset: Option<u64>,
        line: Option<usize>,
    },
    Io {
        path: Option<PathBuf>,
        source: io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format {
            message: msg.into(),
            offset: None,
            line: None,
        }
    }

    pub fn format_at(msg: impl Into<String>, offset: u64) -> Self {
        Error::Format {
            message: msg.into(),
            offset: Some(offset),
            line: None,
        }
    }

    pub fn format_line(msg: impl Into<String>, line: usize) -> Self {
        Error::Format {
            message: msg.into(),
            offset: None,
            line: Some(line),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: Some(path.into()),
            source,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape(m) => write!(f, "shape error: {m}"),
            Error::Invalid(m) => write!(f, "invalid: {m}"),
            Error::Format {
                message,
                offset,
                line,
            } => {
                write!(f, "format error: {message}")?;
                if let Some(o) = offset {
                    write!(f, " (at byte offset {o})")?;
                }
                if let Some(l) = line {
                    write!(f, " (at line {l})")?;
                }
                Ok(())
            }
            Error::Io { path, source } => match path {
                Some(p) => write!(f, "io error on {}: {source}", p.display()),
                None => write!(f, "io error: {source}"),
            },
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(source: io::Error) -> Self {
        Error::Io { path: None, source }
    }
}
