use std::io::Write;

use serde_json::Value;
use siegel_lab::Error;

use crate::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::Parse(_)
                | Error::Range { .. }
                | Error::InvalidParameter(_)
                | Error::Domain(_)
                | Error::RationalInput(_)
                | Error::NotCoprime { .. } => 2,
                Error::Precision(_)
                | Error::DivisorUnderflow { .. }
                | Error::NewtonDivergence { .. }
                | Error::CollisionWithZero { .. }
                | Error::CollisionRadiusExceeded { .. }
                | Error::RootFinder(_)
                | Error::ResultantDegenerate(_) => 3,
            },
            CliError::Io(_) | CliError::Json(_) => 3,
        }
    }
}

/// Everything a command produced, in each output format.
#[derive(Debug)]
pub struct Report {
    pub json: Value,
    pub csv: Option<String>,
    pub text: Vec<String>,
    pub ok: bool,
}

impl Report {
    /// Writes the report to stdout and returns whether every check held.
    pub fn emit(self, format: Format) -> Result<bool, CliError> {
        let ok = self.ok;
        match self.write(format) {
            // a closed pipe (e.g. `| head`) is not a failure of the computation
            Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(ok),
            other => other,
        }
    }

    fn write(self, format: Format) -> Result<bool, CliError> {
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        match format {
            Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&self.json)?)?,
            Format::Csv => match &self.csv {
                Some(csv) => write!(out, "{csv}")?,
                None => return Err(CliError::Usage("this command has no CSV output".into())),
            },
            Format::Text => {
                for line in &self.text {
                    writeln!(out, "{line}")?;
                }
            }
        }
        Ok(self.ok)
    }
}

pub fn status(ok: bool) -> &'static str {
    if ok {
        "OK"
    } else {
        "FAIL"
    }
}

pub fn c64_pair(z: &siegel_lab::mp::Cx) -> [f64; 2] {
    let c = z.to_c64();
    [c.re, c.im]
}
