//! Front ends for the simulator core: a JSON-over-HTTP session service with
//! an educator dashboard view, a command-line tool, and the optional
//! external dialogue backend.

pub mod api;
pub mod backend;
pub mod cli;
pub mod dashboard;
pub mod store;
pub mod wire;
