//! Weight optimization of planar steel frames whose beam-column connections
//! may be rigid, pinned, or semi-rigid rotational springs.
//!
//! The crate covers the full pipeline:
//!
//! * [`sections`]: a wide-flange section catalog in SI units.
//! * [`model`]: frame topology, design groups, and sized designs.
//! * [`solver`]: direct stiffness analysis with spring end connections,
//!   including the independently derived condensation oracle.
//! * [`loading`]: gravity line loads and equivalent static seismic forces.
//! * [`constraints`]: allowable-stress and drift checks.
//! * [`fuzzy`]: membership functions that grade near-limit designs instead
//!   of rejecting them outright.
//! * [`optimizer`]: a seeded genetic algorithm over catalog indices.
//! * [`config`] and [`bench`]: JSON problem configs and built-in benchmark
//!   frames.
//! * [`cli`]: the `semirigid` command-line tool.

pub mod bench;
pub mod cli;
pub mod config;
pub mod constraints;
pub mod error;
pub mod fuzzy;
pub mod loading;
pub mod model;
pub mod optimizer;
pub mod problem;
pub mod sections;
pub mod solver;

pub use config::{build_frame, into_problem, ProblemBundle, ProblemConfig};
pub use error::{Error, Result};
pub use model::{Frame, SizedFrame};
pub use problem::Problem;
pub use sections::SectionCatalog;
