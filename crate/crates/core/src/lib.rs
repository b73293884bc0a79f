//! Staged static analyzer for MiniObj programs.

pub mod bench;
pub mod checkers;
pub mod driver;
pub mod engine;
pub mod fixtures;
pub mod frontend;
pub mod ir;
pub mod reports;
pub mod wpa;
