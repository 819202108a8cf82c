//! File formats, numeric utilities and the command pipelines on top of
//! [`exactdr_core`].

pub mod commands;
pub mod immersion;
pub mod problem;
pub mod selftest;
pub mod serial;
pub mod twist;

pub use exactdr_core as core_api;
