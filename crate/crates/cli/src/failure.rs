use std::fmt;
use std::process::ExitCode;

use fibar::calib::CalibError;
use fibar::event_io::EventIoError;
use fibar::pipeline::{EngineError, RunError};

/// Command failure with the exit status it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Invalid flags, values or paths (exit 2).
    Usage(anyhow::Error),
    /// Malformed input data (exit 3).
    Format(anyhow::Error),
    /// Internal invariant violated or output could not be written (exit 4).
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure::Usage(e.into())
    }

    pub fn runtime(e: impl Into<anyhow::Error>) -> Self {
        Failure::Runtime(e.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Usage(_) => 2,
            Failure::Format(_) => 3,
            Failure::Runtime(_) => 4,
        })
    }

    fn inner(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Format(e) | Failure::Runtime(e) => e,
        }
    }

    pub fn context(self, msg: impl fmt::Display + Send + Sync + 'static) -> Self {
        match self {
            Failure::Usage(e) => Failure::Usage(e.context(msg)),
            Failure::Format(e) => Failure::Format(e.context(msg)),
            Failure::Runtime(e) => Failure::Runtime(e.context(msg)),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.inner())
    }
}

impl From<EventIoError> for Failure {
    fn from(e: EventIoError) -> Self {
        if e.is_format_error() {
            Failure::Format(e.into())
        } else {
            Failure::Runtime(e.into())
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::OutOfBounds { .. } | EngineError::TimeRegression { .. } => Failure::Format(e.into()),
            EngineError::ThresholdMapSize { .. } | EngineError::ThresholdMapValue { .. } => Failure::Usage(e.into()),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Input { index, source } => match source.downcast::<EventIoError>() {
                Ok(io) => Failure::from(*io).context(format!("reading event {index}")),
                Err(other) => Failure::Format(anyhow::anyhow!("reading event {index}: {other}")),
            },
            RunError::Engine(e) => e.into(),
            RunError::Sink { .. } => Failure::Runtime(e.into()),
            RunError::Schedule(_) => Failure::Usage(e.into()),
        }
    }
}

impl From<CalibError> for Failure {
    fn from(e: CalibError) -> Self {
        match e {
            CalibError::Io(_) => Failure::Runtime(e.into()),
            CalibError::BadQuantile(_) | CalibError::BadBins | CalibError::BadWhich(_) => Failure::Usage(e.into()),
            CalibError::NoPixels | CalibError::Empty | CalibError::Parse { .. } | CalibError::Geometry(_) => {
                Failure::Format(e.into())
            }
        }
    }
}

pub type CmdResult = Result<(), Failure>;
