use std::fmt;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category. The CLI maps these onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad caller-supplied argument (threshold out of range, unknown mode).
    Usage,
    /// Malformed or inconsistent input data.
    Data,
    /// Model configuration, weight file or execution failure.
    Model,
}

/// Where in an input file a problem was found.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Location {
    pub path: Option<PathBuf>,
    pub line: Option<usize>,
    pub byte_offset: Option<u64>,
}

impl Location {
    pub fn line(path: Option<PathBuf>, line: usize) -> Self {
        Location { path, line: Some(line), byte_offset: None }
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_none() && self.line.is_none() && self.byte_offset.is_none()
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut sep = "";
        if let Some(path) = &self.path {
            write!(f, "{}", path.display())?;
            sep = ":";
        }
        if let Some(line) = self.line {
            if self.path.is_some() {
                write!(f, ":{line}")?;
            } else {
                write!(f, "line {line}")?;
            }
            sep = ":";
        }
        if let Some(offset) = self.byte_offset {
            write!(f, "{sep}byte {offset}")?;
        }
        Ok(())
    }
}

fn prefix(loc: &Location) -> String {
    if loc.is_empty() {
        String::new()
    } else {
        format!("{loc}: ")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    Argument { name: &'static str, reason: String },

    #[error("{}{message}", prefix(.location))]
    Data { location: Location, message: String },

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{}line {line}: {message}", .path.as_ref().map(|p| format!("{}:", p.display())).unwrap_or_default())]
    Parse { path: Option<PathBuf>, line: usize, message: String },

    #[error("weights: {}byte {byte_offset}: {message}", .layer.map(|l| format!("layer {l}, ")).unwrap_or_default())]
    Load { layer: Option<usize>, byte_offset: u64, message: String },

    #[error("layer {layer}: {message}")]
    Runtime { layer: usize, message: String },

    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: {source}", .path.display())]
    Image { path: PathBuf, source: image::ImageError },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Argument { .. } => ErrorKind::Usage,
            Error::Data { .. } | Error::InvalidBox(_) | Error::Io { .. } | Error::Image { .. } => {
                ErrorKind::Data
            }
            Error::Shape(_) | Error::Parse { .. } | Error::Load { .. } | Error::Runtime { .. } => {
                ErrorKind::Model
            }
        }
    }

    pub(crate) fn argument(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Argument { name, reason: reason.into() }
    }

    pub(crate) fn data(message: impl Into<String>) -> Self {
        Error::Data { location: Location::default(), message: message.into() }
    }

    pub(crate) fn data_at(location: Location, message: impl Into<String>) -> Self {
        Error::Data { location, message: message.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Attaches a file path to errors that carry a location but no path yet.
    pub fn with_path(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::Data { mut location, message } => {
                if location.path.is_none() {
                    location.path = Some(path.into());
                }
                Error::Data { location, message }
            }
            Error::Parse { path: None, line, message } => {
                Error::Parse { path: Some(path.into()), line, message }
            }
            other => other,
        }
    }
}
