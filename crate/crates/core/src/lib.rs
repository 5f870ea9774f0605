//! Units of product systems over finite-dimensional C*-algebras, handled
//! through their generator kernels.

pub mod algebra;
pub mod error;
pub mod examples;
pub mod index;
pub mod kernels;
pub mod random;
pub mod schema;
pub mod tensor;
pub mod units;

pub use algebra::{AlgebraDescriptor, AlgebraElement, SuperOperator, C64};
pub use error::{Error, Result};
pub use kernels::{KernelSystem, KernelTable, UnitLabel};
pub use units::UnitExpr;
