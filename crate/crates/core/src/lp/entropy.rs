//! Shannon-type converse bounds for CDS instances.
//!
//! One LP variable per nonempty subset of the ground set `{S} ∪ V` stands for
//! that subset's joint entropy. The elemental inequalities cut the LP down to
//! the Shannon outer bound of the entropy region, the CDS requirements add one
//! equality per edge, and every signal entropy is normalized to at most 1.
//! Maximizing `H(S)` then bounds the rate by `H(S) / 2`.

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use super::{rat, simplex_solve, LinearProgram, LpSolution, LpStatus, Rational, Relation};
use crate::error::{CdsError, Result};
use crate::instance::{CdsInstance, EdgeKind, VertexId};

pub const DEFAULT_GROUND_LIMIT: usize = 12;

/// `Σ coeff · H(mask)  (relation)  rhs`; masks index the ground set.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyConstraint {
    pub terms: Vec<(u32, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyLp {
    pub names: Vec<String>,
    pub constraints: Vec<EntropyConstraint>,
    /// Maximized.
    pub objective: Vec<(u32, Rational)>,
}

fn subset_name(names: &[String], mask: u32) -> String {
    let parts: Vec<&str> = names
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, n)| n.as_str())
        .collect();
    parts.join(",")
}

fn format_terms(names: &[String], terms: &[(u32, Rational)]) -> String {
    let mut out = String::new();
    for (k, (mask, c)) in terms.iter().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if !mag.is_one() {
            let _ = write!(out, "{mag} ");
        }
        let _ = write!(out, "H({})", subset_name(names, *mask));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl EntropyLp {
    pub fn new(names: Vec<String>) -> Self {
        EntropyLp { names, constraints: Vec::new(), objective: Vec::new() }
    }

    pub fn ground_size(&self) -> usize {
        self.names.len()
    }

    pub fn var_count(&self) -> usize {
        (1usize << self.names.len()) - 1
    }

    pub fn mask_of(&self, members: &[&str]) -> Option<u32> {
        members.iter().try_fold(0u32, |acc, m| {
            self.names.iter().position(|n| n == m).map(|i| acc | 1 << i)
        })
    }

    pub fn subset_name(&self, mask: u32) -> String {
        subset_name(&self.names, mask)
    }

    /// One constraint per line: `H(S,A1,B1) - H(A1,B1) = 0`.
    pub fn constraint_text(&self, c: &EntropyConstraint) -> String {
        format!("{} {} {}", format_terms(&self.names, &c.terms), c.relation, c.rhs)
    }

    /// The LP in the plain-text exchange format: an objective line, then one
    /// constraint per line.
    pub fn dump(&self) -> String {
        let mut out = format!("maximize {}\n", format_terms(&self.names, &self.objective));
        for c in &self.constraints {
            out.push_str(&self.constraint_text(c));
            out.push('\n');
        }
        out
    }

    pub fn to_linear_program(&self) -> Result<LinearProgram> {
        let limit = self.var_count() as u32;
        let conv = |terms: &[(u32, Rational)]| -> Result<Vec<(usize, Rational)>> {
            terms
                .iter()
                .map(|(m, c)| {
                    if *m == 0 || *m > limit {
                        Err(CdsError::InvalidLp(format!("subset mask {m} out of range")))
                    } else {
                        Ok((*m as usize - 1, c.clone()))
                    }
                })
                .collect()
        };
        let mut lp = LinearProgram::new(self.var_count()).maximize(conv(&self.objective)?);
        for c in &self.constraints {
            lp.constrain(conv(&c.terms)?, c.relation, c.rhs.clone());
        }
        Ok(lp)
    }

    pub fn solve(&self) -> Result<LpSolution> {
        simplex_solve(&self.to_linear_program()?)
    }

    /// Value of `Σ coeff · H` at an entropy assignment indexed by `mask - 1`.
    pub fn evaluate(terms: &[(u32, Rational)], h: &[Rational]) -> Rational {
        terms.iter().map(|(m, c)| c * &h[*m as usize - 1]).sum()
    }

    pub fn is_feasible_point(&self, h: &[Rational]) -> bool {
        h.len() == self.var_count()
            && h.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| {
                let lhs = Self::evaluate(&c.terms, h);
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                }
            })
    }
}

fn push_terms(terms: &mut Vec<(u32, Rational)>, mask: u32, c: i64) {
    if mask != 0 {
        terms.push((mask, rat(c, 1)));
    }
}

/// Elemental Shannon inequalities on `n` variables with generic names
/// `X1..Xn`: `H(X_i | rest) ≥ 0` for each `i` and `I(X_i; X_j | X_K) ≥ 0` for
/// each `i < j` and `K` within the other variables.
pub fn elemental_inequalities(n: usize) -> Result<Vec<EntropyConstraint>> {
    let names: Vec<String> = (1..=n).map(|i| format!("X{i}")).collect();
    elemental_for(&names, DEFAULT_GROUND_LIMIT)
}

fn elemental_for(names: &[String], limit: usize) -> Result<Vec<EntropyConstraint>> {
    let n = names.len();
    if !(2..=limit).contains(&n) {
        return Err(CdsError::GroundSetTooLarge(n, limit));
    }
    let full = (1u32 << n) - 1;
    let mut out = Vec::with_capacity(n + n * (n - 1) / 2 * (1 << (n - 2)));
    for (i, name) in names.iter().enumerate() {
        let mut terms = Vec::new();
        push_terms(&mut terms, full, 1);
        push_terms(&mut terms, full & !(1 << i), -1);
        out.push(EntropyConstraint {
            terms,
            relation: Relation::Ge,
            rhs: Rational::zero(),
            label: format!("H({name} | rest) >= 0"),
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            let rest: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
            for sub in 0u32..(1 << rest.len()) {
                let k: u32 = rest.iter().enumerate().filter(|(b, _)| sub >> b & 1 == 1).map(|(_, &v)| 1 << v).sum();
                let (bi, bj) = (1u32 << i, 1u32 << j);
                let mut terms = Vec::new();
                push_terms(&mut terms, k | bi, 1);
                push_terms(&mut terms, k | bj, 1);
                push_terms(&mut terms, k | bi | bj, -1);
                push_terms(&mut terms, k, -1);
                let cond = if k == 0 { String::new() } else { format!(" | {}", subset_name(names, k)) };
                out.push(EntropyConstraint {
                    terms,
                    relation: Relation::Ge,
                    rhs: Rational::zero(),
                    label: format!("I({}; {}{}) >= 0", names[i], names[j], cond),
                });
            }
        }
    }
    Ok(out)
}

/// Ground set `S` followed by the vertices in name order.
fn ground_names(inst: &CdsInstance) -> Vec<String> {
    let mut names = vec!["S".to_string()];
    names.extend(inst.vertex_ids().map(|v| inst.name(v).to_string()));
    names
}

/// Decodability and zero leakage per edge, plus `H(v) ≤ 1` per vertex.
pub fn cds_constraints(inst: &CdsInstance) -> Result<Vec<EntropyConstraint>> {
    cds_constraints_limited(inst, DEFAULT_GROUND_LIMIT)
}

fn cds_constraints_limited(inst: &CdsInstance, limit: usize) -> Result<Vec<EntropyConstraint>> {
    let n = inst.vertex_count() + 1;
    if n > limit {
        return Err(CdsError::GroundSetTooLarge(n, limit));
    }
    let bit = |v: VertexId| 1u32 << (v.0 + 1);
    let s = 1u32;
    let mut out = Vec::new();
    for e in inst.edges() {
        let pair = bit(e.a) | bit(e.b);
        let (v, u) = (inst.name(e.a), inst.name(e.b));
        let mut terms = vec![(s | pair, rat(1, 1)), (pair, rat(-1, 1))];
        let label = match e.kind {
            EdgeKind::Qualified => format!("H(S | {v},{u}) = 0  [qualified {{{v},{u}}}]"),
            EdgeKind::Unqualified => {
                terms.push((s, rat(-1, 1)));
                format!("I(S; {v},{u}) = 0  [unqualified {{{v},{u}}}]")
            }
        };
        out.push(EntropyConstraint { terms, relation: Relation::Eq, rhs: Rational::zero(), label });
    }
    for v in inst.vertex_ids() {
        out.push(EntropyConstraint {
            terms: vec![(bit(v), rat(1, 1))],
            relation: Relation::Le,
            rhs: Rational::one(),
            label: format!("H({}) <= 1  [normalization]", inst.name(v)),
        });
    }
    Ok(out)
}

/// Result of the Shannon LP for an instance.
#[derive(Clone, Debug)]
pub struct ShannonBound {
    /// Upper bound on the symmetric rate: `max H(S) / 2`.
    pub rate_bound: Rational,
    pub secret_entropy: Rational,
    /// Set when `H(S)` was unbounded and had to be capped at the ground-set
    /// size: nothing ties the secret to the bounded signals.
    pub degenerate: bool,
    pub lp: EntropyLp,
    pub solution: LpSolution,
}

/// Builds the entropy LP of an instance: maximize `H(S)`.
pub fn build_lp(inst: &CdsInstance, limit: usize) -> Result<EntropyLp> {
    let names = ground_names(inst);
    if names.len() > limit {
        return Err(CdsError::GroundSetTooLarge(names.len(), limit));
    }
    let mut lp = EntropyLp::new(names.clone());
    if names.len() >= 2 {
        lp.constraints.extend(elemental_for(&names, limit)?);
    }
    lp.constraints.extend(cds_constraints_limited(inst, limit)?);
    lp.objective = vec![(1, Rational::one())];
    Ok(lp)
}

pub fn shannon_bound(inst: &CdsInstance) -> Result<ShannonBound> {
    shannon_bound_for(inst, DEFAULT_GROUND_LIMIT)
}

pub fn shannon_bound_for(inst: &CdsInstance, limit: usize) -> Result<ShannonBound> {
    let mut lp = build_lp(inst, limit)?;
    let mut solution = lp.solve()?;
    let mut degenerate = false;
    if solution.status == LpStatus::Unbounded {
        degenerate = true;
        let cap = rat(lp.ground_size() as i64, 1);
        lp.constraints.push(EntropyConstraint {
            terms: vec![(1, Rational::one())],
            relation: Relation::Le,
            rhs: cap,
            label: "H(S) <= n  [cap: objective otherwise unbounded]".into(),
        });
        solution = lp.solve()?;
    }
    let Some(value) = solution.value.clone() else {
        return Err(CdsError::NotOptimal);
    };
    Ok(ShannonBound { rate_bound: &value / rat(2, 1), secret_entropy: value, degenerate, lp, solution })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateTerm {
    pub weight: Rational,
    pub text: String,
    pub label: String,
}

/// A converse proof: a weighted sum of constraints (and entropy
/// nonnegativity) whose combination bounds the objective by `bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate {
    pub bound: Rational,
    pub terms: Vec<CertificateTerm>,
}

impl DualCertificate {
    pub fn render(&self) -> String {
        let mut out = format!("objective <= {} from {} weighted terms:\n", self.bound, self.terms.len());
        for t in &self.terms {
            let _ = writeln!(out, "  {:>6} x  {}    # {}", t.weight.to_string(), t.text, t.label);
        }
        out
    }
}

/// Extracts the dual multipliers of an optimal solution as a proof listing,
/// after checking exactly that they certify the optimum:
/// the weighted rows dominate the objective coefficient-wise (the slack being
/// entropy nonnegativity), the weights have the right signs, and the weighted
/// right-hand sides sum to the optimal value.
pub fn dual_certificate(sol: &LpSolution, lp: &EntropyLp) -> Result<DualCertificate> {
    let Some(value) = sol.value.as_ref().filter(|_| sol.is_optimal()) else {
        return Err(CdsError::NotOptimal);
    };
    if sol.dual.len() != lp.constraints.len() {
        return Err(CdsError::CertificateMismatch("dual length differs from constraint count".into()));
    }
    let nvars = lp.var_count();
    let mut combo = vec![Rational::zero(); nvars];
    let mut rhs_sum = Rational::zero();
    let mut terms = Vec::new();
    for (y, c) in sol.dual.iter().zip(&lp.constraints) {
        if y.is_zero() {
            continue;
        }
        let sign_ok = match c.relation {
            Relation::Le => y.is_positive(),
            Relation::Ge => y.is_negative(),
            Relation::Eq => true,
        };
        if !sign_ok {
            return Err(CdsError::CertificateMismatch(format!("weight {y} has the wrong sign for `{}`", c.label)));
        }
        for (m, a) in &c.terms {
            combo[*m as usize - 1] += y * a;
        }
        rhs_sum += y * &c.rhs;
        terms.push(CertificateTerm { weight: y.clone(), text: lp.constraint_text(c), label: c.label.clone() });
    }
    let mut objective = vec![Rational::zero(); nvars];
    for (m, c) in &lp.objective {
        objective[*m as usize - 1] += c;
    }
    for (j, (got, want)) in combo.iter().zip(&objective).enumerate() {
        let slack = got - want;
        if slack.is_negative() {
            return Err(CdsError::CertificateMismatch(format!(
                "combination falls short on H({})",
                lp.subset_name(j as u32 + 1)
            )));
        }
        if slack.is_positive() {
            let mask = j as u32 + 1;
            terms.push(CertificateTerm {
                weight: -slack,
                text: format!("H({}) >= 0", lp.subset_name(mask)),
                label: "nonnegativity".into(),
            });
        }
    }
    if rhs_sum != *value {
        return Err(CdsError::CertificateMismatch(format!("weighted bounds sum to {rhs_sum}, optimum is {value}")));
    }
    Ok(DualCertificate { bound: rhs_sum, terms })
}
