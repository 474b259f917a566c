//! Chen δ-invariants of pointwise Lagrangian data in complex space forms,
//! the family of sharp inequalities relating them to mean curvature, and
//! explicit immersions that attain equality.
//!
//! The numeric core is generic over [`scalar::Real`] (`f32`, `f64`);
//! inequality coefficients are exact rationals. Conventions live in
//! [`conventions`].

pub mod audit;
pub mod conventions;
pub mod delta;
pub mod error;
pub mod frame;
pub mod gallery;
pub mod inequality;
pub mod lagrangian;
pub mod random;
pub mod report;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};

pub type CurvatureTensor64 = frame::CurvatureTensor<f64>;
pub type CurvatureTensor32 = frame::CurvatureTensor<f32>;
pub type CubicForm64 = lagrangian::CubicForm<f64>;
pub type PointData64 = lagrangian::LagrangianPointData<f64>;
