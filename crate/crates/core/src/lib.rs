pub mod channel;
pub mod checks;
pub mod ci;
pub mod experiment;
pub mod jcj;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod problem;
pub mod sdp;
pub mod units;
