//! Exact computation with spreads of finite projective spaces.

pub mod error;
pub mod fieldreduction;
pub mod gf;
pub mod linalg;
pub mod projgeom;
pub mod scenarios;
pub mod closure;
pub mod sperner;
pub mod spreads;
pub mod spreadsets;

pub use error::{Error, Result};
