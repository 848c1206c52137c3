use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid {path}: {message}")]
    Validation { path: String, message: String },
    #[error("link {0}: every Monte-Carlo sample was an outage")]
    AllSamplesOutage(String),
    #[error("optimizer found no feasible allocation")]
    NoFeasiblePoint,
    #[error("optimizer: {0}")]
    Optimizer(#[from] trslink::optimizer::OptError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl ScenarioError {
    /// 1 for bad input, 2 for runtime infeasibility.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::AllSamplesOutage(_) | ScenarioError::NoFeasiblePoint => 2,
            ScenarioError::Optimizer(trslink::optimizer::OptError::NoFeasiblePoint) => 2,
            _ => 1,
        }
    }
}
