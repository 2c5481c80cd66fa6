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

//! Dense linear algebra over labeled tensor-product Hilbert spaces.
//!
//! A [`BasisSpec`] is an ordered list of named factors. Basis indices are
//! row-major in factor order: the first factor is the most significant digit,
//! so a state on `[("path", 2), ("photon", 2)]` is laid out as
//! `|I,0⟩, |I,1⟩, |II,0⟩, |II,1⟩`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance used by approximate predicates unless a caller overrides it.
pub const DEFAULT_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Builds a real complex number.
#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    pub name: String,
    pub dim: usize,
}

/// Ordered list of named tensor factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisSpec {
    factors: Vec<Factor>,
}

impl BasisSpec {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut out: Vec<Factor> = Vec::new();
        for (name, dim) in factors {
            let name = name.into();
            if dim == 0 {
                return Err(Error::Structural(format!("factor '{name}' has dimension 0")));
            }
            if out.iter().any(|f| f.name == name) {
                return Err(Error::Structural(format!("duplicate factor name '{name}'")));
            }
            out.push(Factor { name, dim });
        }
        if out.is_empty() {
            return Err(Error::Structural("basis needs at least one factor".into()));
        }
        Ok(BasisSpec { factors: out })
    }

    pub fn single(name: &str, dim: usize) -> Result<Self> {
        Self::new([(name, dim)])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Total dimension, the product of the factor dimensions.
    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn factor_dim(&self, name: &str) -> Option<usize> {
        self.position(name).map(|i| self.factors[i].dim)
    }

    /// Position of a factor that must be present.
    pub fn require(&self, name: &str) -> Result<usize> {
        self.position(name).ok_or_else(|| Error::Structural(format!("basis {self} has no '{name}' factor")))
    }

    /// Concatenates two bases; factor names must be disjoint.
    pub fn concat(&self, other: &BasisSpec) -> Result<BasisSpec> {
        Self::new(self.factors.iter().chain(other.factors.iter()).map(|f| (f.name.clone(), f.dim)))
    }

    /// Flat index of a multi-index given in factor order.
    pub fn index_of(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.factors.len() {
            return Err(Error::Structural(format!(
                "expected {} digits for basis {self}, got {}",
                self.factors.len(),
                digits.len()
            )));
        }
        let mut idx = 0;
        for (d, f) in digits.iter().zip(&self.factors) {
            if *d >= f.dim {
                return Err(Error::Parameter(format!(
                    "level {d} out of range for factor '{}' of dimension {}",
                    f.name, f.dim
                )));
            }
            idx = idx * f.dim + d;
        }
        Ok(idx)
    }

    /// Multi-index of a flat index, in factor order.
    pub fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, f) in out.iter_mut().zip(&self.factors).rev() {
            *slot = idx % f.dim;
            idx /= f.dim;
        }
        out
    }

    /// Permutation `perm` such that new flat index `i` reads old index
    /// `perm[i]`, for reordering factors into `names`.
    fn permutation_to(&self, names: &[&str]) -> Result<(BasisSpec, Vec<usize>)> {
        if names.len() != self.factors.len() {
            return Err(Error::Structural(format!("reorder needs all {} factors, got {names:?}", self.factors.len())));
        }
        let mut src = Vec::with_capacity(names.len());
        for n in names {
            src.push(self.require(n)?);
        }
        let target = BasisSpec::new(src.iter().map(|&i| (self.factors[i].name.clone(), self.factors[i].dim)))?;
        let mut perm = Vec::with_capacity(self.dim());
        let mut old = vec![0; names.len()];
        for i in 0..target.dim() {
            let new_digits = target.digits(i);
            for (k, &s) in src.iter().enumerate() {
                old[s] = new_digits[k];
            }
            perm.push(self.index_of(&old)?);
        }
        Ok((target, perm))
    }
}

impl fmt::Display for BasisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, fac) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:{}", fac.name, fac.dim)?;
        }
        write!(f, "]")
    }
}

fn check_same(a: &BasisSpec, b: &BasisSpec, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Structural(format!("{what}: basis mismatch {a} vs {b}")));
    }
    Ok(())
}

/// Pure state as a complex amplitude vector over a labeled basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    basis: BasisSpec,
    amps: DVector<C64>,
}

impl StateVector {
    pub fn new(basis: BasisSpec, amps: Vec<C64>) -> Result<Self> {
        Self::from_dvector(basis, DVector::from_vec(amps))
    }

    pub fn from_dvector(basis: BasisSpec, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::Structural(format!(
                "amplitude vector of length {} does not match basis {basis} of dimension {}",
                amps.len(),
                basis.dim()
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parameter("state amplitudes must be finite".into()));
        }
        Ok(StateVector { basis, amps })
    }

    pub fn zeros(basis: BasisSpec) -> Self {
        let n = basis.dim();
        StateVector { basis, amps: DVector::zeros(n) }
    }

    /// Product basis state with the given level on each factor.
    pub fn basis_state(basis: BasisSpec, digits: &[usize]) -> Result<Self> {
        let idx = basis.index_of(digits)?;
        let mut s = Self::zeros(basis);
        s.amps[idx] = ONE;
        Ok(s)
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitude(&self, digits: &[usize]) -> Result<C64> {
        Ok(self.amps[self.basis.index_of(digits)?])
    }

    pub fn set_amplitude(&mut self, digits: &[usize], value: C64) -> Result<()> {
        let idx = self.basis.index_of(digits)?;
        self.amps[idx] = value;
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Unit-norm state on the same ray.
    pub fn normalize(&self) -> Result<StateVector> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Degenerate("cannot normalize a zero vector".into()));
        }
        Ok(self.scale(re(1.0 / n)))
    }

    pub fn scale(&self, c: C64) -> StateVector {
        StateVector { basis: self.basis.clone(), amps: &self.amps * c }
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        check_same(&self.basis, &other.basis, "add")?;
        Ok(StateVector { basis: self.basis.clone(), amps: &self.amps + &other.amps })
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_same(&self.basis, &other.basis, "inner")?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Largest componentwise distance to `other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        check_same(&self.basis, &other.basis, "compare")?;
        Ok(self.amps.iter().zip(other.amps.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &StateVector, tol: f64) -> bool {
        self.max_abs_diff(other).map(|d| d <= tol).unwrap_or(false)
    }

    /// Same state with its factors permuted into `names`.
    pub fn reorder(&self, names: &[&str]) -> Result<StateVector> {
        let (basis, perm) = self.basis.permutation_to(names)?;
        let amps = DVector::from_iterator(perm.len(), perm.iter().map(|&j| self.amps[j]));
        Ok(StateVector { basis, amps })
    }

    /// Probability of each level of `factor`, tracing out the rest.
    pub fn marginal(&self, factor: &str) -> Result<Vec<f64>> {
        let pos = self.basis.require(factor)?;
        let mut out = vec![0.0; self.basis.factors()[pos].dim];
        for (i, z) in self.amps.iter().enumerate() {
            out[self.basis.digits(i)[pos]] += z.norm_sqr();
        }
        Ok(out)
    }
}

/// Dense operator on a labeled basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    basis: BasisSpec,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(basis: BasisSpec, matrix: DMatrix<C64>) -> Result<Self> {
        let n = basis.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Structural(format!(
                "matrix of shape {}x{} does not match basis {basis} of dimension {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Operator { basis, matrix })
    }

    pub fn identity(basis: BasisSpec) -> Self {
        let n = basis.dim();
        Operator { basis, matrix: DMatrix::identity(n, n) }
    }

    pub fn zeros(basis: BasisSpec) -> Self {
        let n = basis.dim();
        Operator { basis, matrix: DMatrix::zeros(n, n) }
    }

    /// Embeds `local` acting on `factor`, identity on every other factor.
    pub fn local(basis: &BasisSpec, factor: &str, local: &DMatrix<C64>) -> Result<Self> {
        let pos = basis.require(factor)?;
        let d = basis.factors()[pos].dim;
        if local.nrows() != d || local.ncols() != d {
            return Err(Error::Structural(format!(
                "local operator of shape {}x{} does not fit factor '{factor}' of dimension {d}",
                local.nrows(),
                local.ncols()
            )));
        }
        let mut m = DMatrix::<C64>::identity(1, 1);
        for (i, f) in basis.factors().iter().enumerate() {
            m = if i == pos { m.kronecker(local) } else { m.kronecker(&DMatrix::<C64>::identity(f.dim, f.dim)) };
        }
        Operator::new(basis.clone(), m)
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        check_same(&self.basis, s.basis(), "apply")?;
        Ok(StateVector { basis: self.basis.clone(), amps: &self.matrix * s.amplitudes() })
    }

    /// `⟨bra|self|ket⟩`.
    pub fn sandwich(&self, bra: &StateVector, ket: &StateVector) -> Result<C64> {
        bra.inner(&self.apply(ket)?)
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        check_same(&self.basis, &other.basis, "compose")?;
        Ok(Operator { basis: self.basis.clone(), matrix: &self.matrix * &other.matrix })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        check_same(&self.basis, &other.basis, "add")?;
        Ok(Operator { basis: self.basis.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        check_same(&self.basis, &other.basis, "sub")?;
        Ok(Operator { basis: self.basis.clone(), matrix: &self.matrix - &other.matrix })
    }

    pub fn scale(&self, c: C64) -> Operator {
        Operator { basis: self.basis.clone(), matrix: &self.matrix * c }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Operator {
        Operator { basis: self.basis.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        check_same(&self.basis, &other.basis, "compare")?;
        Ok(self.matrix.iter().zip(other.matrix.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.max_abs_diff(other).map(|d| d <= tol).unwrap_or(false)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.approx_eq(&self.adjoint(), tol)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let id = Operator::identity(self.basis.clone());
        self.adjoint().compose(self).map(|p| p.approx_eq(&id, tol)).unwrap_or(false)
    }

    /// Eigenvalues (ascending order not guaranteed) and eigenvector columns of
    /// a Hermitian operator.
    pub fn spectral_decomposition(&self, tol: f64) -> Result<(Vec<f64>, DMatrix<C64>)> {
        if !self.is_hermitian(tol) {
            return Err(Error::Parameter("spectral decomposition needs a Hermitian operator".into()));
        }
        // Symmetrize so round-off in the input cannot leak into the solver.
        let h = (&self.matrix + self.matrix.adjoint()) * re(0.5);
        let eig = h.symmetric_eigen();
        Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
    }

    /// `exp(-i·t·H)` for Hermitian `H = self`.
    pub fn evolution(&self, t: f64) -> Result<Operator> {
        if t == 0.0 {
            return Ok(Operator::identity(self.basis.clone()));
        }
        let (vals, vecs) = self.spectral_decomposition(DEFAULT_TOL)?;
        let phases = DVector::from_iterator(vals.len(), vals.iter().map(|l| C64::from_polar(1.0, -l * t)));
        let m = &vecs * DMatrix::from_diagonal(&phases) * vecs.adjoint();
        Operator::new(self.basis.clone(), m)
    }

    pub fn reorder(&self, names: &[&str]) -> Result<Operator> {
        let (basis, perm) = self.basis.permutation_to(names)?;
        let n = perm.len();
        let m = DMatrix::from_fn(n, n, |i, j| self.matrix[(perm[i], perm[j])]);
        Ok(Operator { basis, matrix: m })
    }
}

/// Kronecker product over disjoint factor sets.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let basis = self.basis.concat(&other.basis)?;
        let amps = self.amps.kronecker(&other.amps);
        StateVector::from_dvector(basis, amps)
    }
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let basis = self.basis.concat(&other.basis)?;
        Operator::new(basis, self.matrix.kronecker(&other.matrix))
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

/// Fock-space annihilation operator truncated to `d` levels.
pub fn annihilation(d: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = re((n as f64).sqrt());
    }
    m
}

pub fn creation(d: usize) -> DMatrix<C64> {
    annihilation(d).transpose()
}

/// `a†a`, diagonal with entries `0..d`.
pub fn number(d: usize) -> DMatrix<C64> {
    DMatrix::from_diagonal(&DVector::from_iterator(d, (0..d).map(|n| re(n as f64))))
}

/// `|n⟩⟨n|` on a `d`-level factor.
pub fn level_projector(d: usize, n: usize) -> Result<DMatrix<C64>> {
    if n >= d {
        return Err(Error::Parameter(format!("level {n} out of range for dimension {d}")));
    }
    let mut m = DMatrix::zeros(d, d);
    m[(n, n)] = ONE;
    Ok(m)
}
