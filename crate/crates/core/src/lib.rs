//! National power as network flow.
//!
//! Countries hold power as a stock (national wealth) and move it to one
//! another as flows: trade is constructive, military conflict destructive.
//! This crate builds the column-stochastic tactic matrices from country-year
//! panel data, calibrates the three constants of the law of motion, and runs
//! naive, dynamic and scenario simulations.

pub mod calibration;
pub mod cli;
pub mod error;
pub mod export;
pub mod ingestion;
pub mod model;
pub mod registry;
pub mod simulation;
pub mod synthetic;
pub mod warning;

pub use error::{Error, Result};
pub use ingestion::PanelData;
pub use model::{Parameters, PowerStructure, SizeVector, TacticMatrix};
pub use registry::CountryRegistry;
pub use warning::Warning;

/// Calendar year.
pub type Year = i32;
