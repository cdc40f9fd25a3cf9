//! Uniform pass/fail results with concrete counterexamples.

use std::collections::BTreeMap;

use crate::diffop::DiffOpEntry;
use crate::scalar::Scalar;
use crate::superpoly::{Family, SuperPoly};

/// Which of the three brackets of a pair a Schouten witness belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PairSlot {
    First,
    Second,
    Mixed,
}

/// The violated constraint instance. Conformal and Lie constraints refer to
/// basis elements by position in their basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    SkewEntry {
        row: Family,
        col: Family,
    },
    Closedness {
        family: Family,
    },
    Schouten {
        slot: PairSlot,
        family: Family,
    },
    LieSkew {
        b1: usize,
        b2: usize,
        b3: usize,
    },
    LieJacobi {
        b1: usize,
        b2: usize,
        b3: usize,
    },
    Cocycle {
        b1: usize,
        b2: usize,
        b3: usize,
    },
    Conjugation {
        b1: usize,
        b2: usize,
        b3: usize,
        n: u32,
        m: u32,
    },
    CentralConjugation {
        b1: usize,
        b2: usize,
        m: u32,
    },
    Jacobi {
        b1: usize,
        b2: usize,
        b3: usize,
        j5: usize,
        m1: u32,
        m2: u32,
        n2: u32,
    },
}

/// A nonzero residual.
#[derive(Clone, Debug, PartialEq)]
pub enum Residual {
    Poly(SuperPoly),
    Entry(DiffOpEntry),
    Scalar(Scalar),
    /// A linear combination of basis elements, keyed by basis position.
    Combination(BTreeMap<usize, Scalar>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub constraint: Constraint,
    pub residual: Residual,
}

/// Role of an auxiliary family adjoined for a closedness test: slot `1..=3`
/// of the test covector attached to `origin`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TestSlot {
    pub slot: u8,
    pub origin: Family,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Verdict {
    pub witnesses: Vec<Witness>,
    /// Test families referenced by closedness or Schouten residuals.
    pub test_families: BTreeMap<Family, TestSlot>,
}

impl Verdict {
    pub fn pass() -> Verdict {
        Verdict::default()
    }

    pub fn from_witnesses(witnesses: Vec<Witness>) -> Verdict {
        Verdict {
            witnesses,
            test_families: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.witnesses.is_empty()
    }

    pub fn push(&mut self, constraint: Constraint, residual: Residual) {
        self.witnesses.push(Witness {
            constraint,
            residual,
        });
    }

    /// Appends the witnesses (and test families) of another verdict.
    pub fn absorb(&mut self, other: Verdict) {
        self.witnesses.extend(other.witnesses);
        self.test_families.extend(other.test_families);
    }
}
