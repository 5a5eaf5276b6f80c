//! Modal discontinuous Galerkin solver for conservation laws on structured
//! planar and latitude-longitude meshes.

pub mod basis;
pub mod bench;
pub mod cases;
pub mod config;
pub mod dg;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod mesh;
pub mod models;
pub mod sim;
pub mod study;
pub mod time;

pub use error::{Error, Result};
