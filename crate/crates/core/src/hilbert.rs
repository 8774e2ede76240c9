//! The two-atom, three-level state space.
//!
//! Each atom has levels `|0⟩`, `|1⟩`, `|r⟩` with fixed indices 0, 1, 2. A
//! two-atom basis state `|mn⟩` (atom 1 in `m`, atom 2 in `n`) sits at linear
//! index `3·m + n`, so `|11⟩ ↦ 4` and `|rr⟩ ↦ 8`. Every operator and state in
//! the crate uses this ordering.

use std::fmt;

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dimension of the two-atom space.
pub const DIM: usize = 9;

pub type StateVector = SVector<C64, DIM>;
pub type TwoAtomOperator = SMatrix<C64, DIM, DIM>;
pub type SingleAtomOperator = SMatrix<C64, 3, 3>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Tolerances a [`DensityMatrix`] must satisfy on construction.
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomLevel {
    G0 = 0,
    G1 = 1,
    Ryd = 2,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 3] = [AtomLevel::G0, AtomLevel::G1, AtomLevel::Ryd];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    fn label(self) -> char {
        match self {
            AtomLevel::G0 => '0',
            AtomLevel::G1 => '1',
            AtomLevel::Ryd => 'r',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    First,
    Second,
}

/// A two-atom basis label `|mn⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TwoAtomIndex {
    pub first: AtomLevel,
    pub second: AtomLevel,
}

impl TwoAtomIndex {
    pub const fn new(first: AtomLevel, second: AtomLevel) -> Self {
        Self { first, second }
    }

    #[inline]
    pub fn index(self) -> usize {
        3 * self.first.index() + self.second.index()
    }

    pub fn from_index(i: usize) -> Option<Self> {
        if i >= DIM {
            return None;
        }
        Some(Self::new(AtomLevel::from_index(i / 3)?, AtomLevel::from_index(i % 3)?))
    }

    /// Number of atoms in the Rydberg level.
    pub fn excitations(self) -> usize {
        usize::from(self.first == AtomLevel::Ryd) + usize::from(self.second == AtomLevel::Ryd)
    }

    pub fn all() -> impl Iterator<Item = TwoAtomIndex> {
        (0..DIM).filter_map(TwoAtomIndex::from_index)
    }
}

impl fmt::Display for TwoAtomIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}{}⟩", self.first.label(), self.second.label())
    }
}

pub mod basis {
    use super::{AtomLevel::*, TwoAtomIndex};

    pub const S00: TwoAtomIndex = TwoAtomIndex::new(G0, G0);
    pub const S01: TwoAtomIndex = TwoAtomIndex::new(G0, G1);
    pub const S0R: TwoAtomIndex = TwoAtomIndex::new(G0, Ryd);
    pub const S10: TwoAtomIndex = TwoAtomIndex::new(G1, G0);
    pub const S11: TwoAtomIndex = TwoAtomIndex::new(G1, G1);
    pub const S1R: TwoAtomIndex = TwoAtomIndex::new(G1, Ryd);
    pub const SR0: TwoAtomIndex = TwoAtomIndex::new(Ryd, G0);
    pub const SR1: TwoAtomIndex = TwoAtomIndex::new(Ryd, G1);
    pub const SRR: TwoAtomIndex = TwoAtomIndex::new(Ryd, Ryd);

    /// The computational (qubit) subspace in basis order.
    pub const QUBIT: [TwoAtomIndex; 4] = [S00, S01, S10, S11];
}

/// Linear indices of the qubit subspace `|00⟩, |01⟩, |10⟩, |11⟩`.
pub const QUBIT_INDICES: [usize; 4] = [0, 1, 3, 4];

pub fn ket(m: AtomLevel, n: AtomLevel) -> StateVector {
    basis_vector(TwoAtomIndex::new(m, n))
}

pub fn basis_vector(s: TwoAtomIndex) -> StateVector {
    let mut v = StateVector::zeros();
    v[s.index()] = ONE;
    v
}

/// `|to⟩⟨from|` on a single atom.
pub fn transition(to: AtomLevel, from: AtomLevel) -> SingleAtomOperator {
    let mut m = SingleAtomOperator::zeros();
    m[(to.index(), from.index())] = ONE;
    m
}

/// `op ⊗ I₃` for atom 1, `I₃ ⊗ op` for atom 2.
pub fn embed_single_atom(op: &SingleAtomOperator, atom: Atom) -> TwoAtomOperator {
    let id = SingleAtomOperator::identity();
    match atom {
        Atom::First => op.kronecker(&id),
        Atom::Second => id.kronecker(op),
    }
}

pub fn commutator(a: &TwoAtomOperator, b: &TwoAtomOperator) -> TwoAtomOperator {
    a * b - b * a
}

/// `|ψ⟩⟨φ|`
pub fn outer(psi: &StateVector, phi: &StateVector) -> TwoAtomOperator {
    psi * phi.adjoint()
}

pub fn projector(psi: &StateVector) -> TwoAtomOperator {
    outer(psi, psi)
}

/// Largest entry modulus.
pub fn max_abs(m: &TwoAtomOperator) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `|m − m†|`.
pub fn hermiticity_error(m: &TwoAtomOperator) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// `(m + m†)/2`
pub fn hermitian_part(m: &TwoAtomOperator) -> TwoAtomOperator {
    (m + m.adjoint()).scale(0.5)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &TwoAtomOperator) -> f64 {
    hermitian_part(m).symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// A validated two-atom density operator: Hermitian, unit trace and
/// positive semidefinite, each to the module tolerances.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(TwoAtomOperator);

impl DensityMatrix {
    pub fn new(rho: TwoAtomOperator) -> Result<Self> {
        let herm = hermiticity_error(&rho);
        if !(herm <= HERMITICITY_TOL) {
            return Err(Error::InvalidState(format!("density matrix not Hermitian (max |ρ−ρ†| = {herm:e})")));
        }
        let tr = rho.trace();
        if !((tr - ONE).norm() <= TRACE_TOL) {
            return Err(Error::InvalidState(format!("density matrix trace {tr} ≠ 1")));
        }
        let lmin = min_eigenvalue(&rho);
        if !(lmin >= -POSITIVITY_TOL) {
            return Err(Error::InvalidState(format!("density matrix not positive semidefinite (λ_min = {lmin:e})")));
        }
        Ok(Self(rho))
    }

    /// Wraps a propagated matrix whose health is tracked by the integrator.
    pub(crate) fn new_unchecked(rho: TwoAtomOperator) -> Self {
        Self(rho)
    }

    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("state norm {norm} ≠ 1")));
        }
        Ok(Self(projector(psi)))
    }

    pub fn basis_state(s: TwoAtomIndex) -> Self {
        Self(projector(&basis_vector(s)))
    }

    pub fn maximally_mixed() -> Self {
        Self(TwoAtomOperator::identity().scale(1.0 / DIM as f64))
    }

    pub fn matrix(&self) -> &TwoAtomOperator {
        &self.0
    }

    pub fn into_inner(self) -> TwoAtomOperator {
        self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.0)
    }

    /// Diagonal populations in basis order.
    pub fn populations(&self) -> [f64; DIM] {
        std::array::from_fn(|i| self.0[(i, i)].re)
    }
}

impl AsRef<TwoAtomOperator> for DensityMatrix {
    fn as_ref(&self) -> &TwoAtomOperator {
        &self.0
    }
}
