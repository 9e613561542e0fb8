use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("point {x} outside field domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("invalid coefficient data: {0}")]
    Coefficient(String),

    #[error("invalid problem: {0}")]
    Problem(String),

    #[error("goursat iteration did not converge after {iterations} sweeps (last change {last_change:e})")]
    NotConverged {
        iterations: usize,
        last_change: f64,
        history: Vec<f64>,
    },

    #[error("non-finite value in {stage} at step {step}")]
    NonFinite { stage: &'static str, step: usize },

    #[error("state violates {0}")]
    State(String),

    #[error("simulation setup: {0}")]
    Simulation(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
