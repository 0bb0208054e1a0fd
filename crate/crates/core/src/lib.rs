// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Non-uniform geometric graphs sampled from latent metric-probability
//! spaces, density-corrected graph shift operators, and the numerical checks
//! that tie them to their continuous limits.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convergence;
pub mod density;
pub mod error;
pub mod estimate;
pub mod geometry;
pub mod graphgen;
pub mod gso;
pub mod io;
pub mod neighborhood;
pub mod quadrature;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
