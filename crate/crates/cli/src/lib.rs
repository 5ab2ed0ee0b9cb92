//! Command-line front end for the de Sitter curvature flow simulator.

pub mod commands;
pub mod config;
pub mod expr;
