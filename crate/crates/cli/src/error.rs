use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rydmag::Error),

    #[error("cannot parse config {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind_name(),
            CliError::ConfigParse { .. } => "config",
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::VerifyFailed(_) => "verify",
        }
    }

    /// 2 for configuration and usage problems, 3 for numerical failures,
    /// 4 for estimation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => e.exit_code(),
            CliError::ConfigParse { .. } | CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::VerifyFailed(_) => 3,
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            message: String,
            exit_code: i32,
        }
        #[derive(Serialize)]
        struct Envelope<'a> {
            error: Body<'a>,
        }
        let env = Envelope {
            error: Body {
                kind: self.kind_name(),
                message: self.to_string(),
                exit_code: self.exit_code(),
            },
        };
        serde_json::to_string(&env).expect("error envelope serialises")
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(rydmag::Error::Estimation("e".into())).exit_code(), 4);
        assert_eq!(CliError::Core(rydmag::Error::Integration("e".into())).exit_code(), 3);
        assert_eq!(CliError::Core(rydmag::Error::Config("e".into())).exit_code(), 2);
    }

    #[test]
    fn error_json_is_machine_readable() {
        let v: serde_json::Value = serde_json::from_str(&CliError::Usage("bad".into()).to_json()).unwrap();
        assert_eq!(v["error"]["kind"], "usage");
        assert_eq!(v["error"]["exit_code"], 2);
    }
}
