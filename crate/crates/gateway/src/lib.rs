//! HTTP service and command-line front end for the review-bias pipeline.

pub mod api;
pub mod config;
pub mod sessions;

pub use api::{router, ApiError, AppState};
pub use config::{ConditionMode, StudyConfig};
pub use sessions::{Clock, ManualClock, SessionStore, SystemClock};
