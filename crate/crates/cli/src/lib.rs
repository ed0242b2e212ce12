//! Command-line tools and the HTTP experiment service.
//!
//! - [`config`]: service settings and dataset selection.
//! - [`store`]: append-only JSON-lines session logs with replay.
//! - [`api`]: axum routes for the browser trial runner.
//! - [`commands`]: `xshuffle` subcommands.

pub mod api;
pub mod commands;
pub mod config;
pub mod store;

pub use api::{router, AppState};
pub use config::{SeedPolicy, ServiceConfig};
pub use store::{SessionStore, StoreError};
