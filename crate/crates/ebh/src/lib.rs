// SPDX-License-Identifier: Apache-2.0

pub mod approx;
pub mod arnoldi;
pub mod dense;
pub mod error;
pub mod harness;
pub mod matfun;
pub mod operators;
pub mod process;
pub mod random;
pub mod shifted;

pub use dense::Dense;
pub use error::{Error, Result};
