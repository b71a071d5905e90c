//! HTTP service and command-line front end for the consultation engine.

pub mod api;
pub mod cli;
