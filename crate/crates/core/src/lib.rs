// Copyright 2026 The cfpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Exact state-vector simulation of a counterfactual photoelectric-effect
//! protocol in a modified Mach-Zehnder interferometer.
//!
//! - [`hilbert`]: labeled tensor-product spaces, states and operators.
//! - [`protocol`]: pre/post-selected states, projectors, Hamiltonians, optics.
//! - [`weakvalues`]: weak values, von Neumann pointer, arm-I phase evolution.
//! - [`cavity`]: photon and electron interaction Hamiltonians in the cavity.
//! - [`zeno`]: N-cycle photon recycling and Monte Carlo statistics.
//! - [`cli`]: the `cfpe` experiment runner.

pub mod cavity;
pub mod cli;
pub mod error;
pub mod hilbert;
pub mod protocol;
pub mod weakvalues;
pub mod zeno;

pub use error::{Error, Result};
