//! Exact linear programming over the rationals and the Shannon-type entropy
//! LP built on top of it.

mod entropy;
mod simplex;

pub use entropy::{
    build_lp, cds_constraints, dual_certificate, elemental_inequalities, shannon_bound, shannon_bound_for, CertificateTerm,
    DualCertificate, EntropyConstraint, EntropyLp, ShannonBound, DEFAULT_GROUND_LIMIT,
};
pub use simplex::simplex_solve;

use std::fmt;

/// Arbitrary-precision rational in canonical form.
pub type Rational = num_rational::BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// `Σ coeffs · x  (relation)  rhs`, with sparse coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Maximize `objective · x` subject to `constraints` and `x ≥ 0`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<(usize, Rational)>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { num_vars, ..Default::default() }
    }

    pub fn maximize(mut self, objective: Vec<(usize, Rational)>) -> Self {
        self.objective = objective;
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal objective value; `None` unless optimal.
    pub value: Option<Rational>,
    /// One value per variable; empty unless optimal.
    pub primal: Vec<Rational>,
    /// One multiplier per constraint, signed so that `Σ dual·rhs` equals the
    /// optimum: nonnegative on `<=` rows, nonpositive on `>=` rows.
    pub dual: Vec<Rational>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}
