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

use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Operands do not fit together: basis mismatch, duplicate or missing
    /// factor, wrong vector length.
    #[error("structural error: {0}")]
    Structural(String),

    /// A parameter is out of its allowed range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The input is degenerate for the requested operation (e.g. normalizing
    /// a zero vector).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Pre- and post-selected states are orthogonal within tolerance, so the
    /// weak value or the post-selected pointer is undefined.
    #[error("orthogonal ensemble: overlap magnitude {overlap:e} is not above {tol:e}")]
    OrthogonalEnsemble { overlap: f64, tol: f64 },

    /// An operation was called on an input that violates its precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A numerical sanity check failed (aliasing, wrap-around, lost unitarity).
    #[error("numerical quality check failed: {0}")]
    NumericQuality(String),
}

pub type Result<T> = std::result::Result<T, Error>;
