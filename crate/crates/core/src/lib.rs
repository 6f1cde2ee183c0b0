pub mod arith_data;
pub mod conductors;
pub mod constructible;
pub mod docs;
pub mod error;
pub mod groups;
pub mod l_series;
pub mod lattices;
pub mod local_factors;
pub mod poly;
pub mod qlinalg;
pub mod real;
pub mod special_values;
pub mod testkit;

pub use error::{Error, Result};
