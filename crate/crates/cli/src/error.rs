use thiserror::Error;

/// Failures mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or arguments: exit 2.
    #[error("{0}")]
    Validation(String),
    /// Singular systems, divergence and failed checks: exit 3.
    #[error("{message}")]
    Numerical {
        message: String,
        payload: serde_json::Value,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io(_) => 2,
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError::Numerical {
            message: message.into(),
            payload: serde_json::Value::Null,
        }
    }
}

impl From<fraclab_core::Error> for CliError {
    fn from(e: fraclab_core::Error) -> Self {
        use fraclab_core::Error as E;
        let message = e.to_string();
        match e {
            E::InvalidParameter(_) | E::Domain(_) | E::Unsupported(_) | E::MissingDerivative(_) => {
                CliError::Validation(message)
            }
            E::Singular { condition } => CliError::Numerical {
                message,
                payload: serde_json::json!({ "kind": "singular", "condition": condition }),
            },
            E::NoConvergence {
                iterations,
                residual_history,
            } => CliError::Numerical {
                message,
                payload: serde_json::json!({
                    "kind": "no_convergence",
                    "iterations": iterations,
                    "residual_history": residual_history,
                }),
            },
            E::Invariant(_) => CliError::Numerical {
                message,
                payload: serde_json::json!({ "kind": "invariant" }),
            },
        }
    }
}
