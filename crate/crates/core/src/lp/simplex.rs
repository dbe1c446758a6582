//! Dense two-phase tableau simplex in exact rational arithmetic.
//!
//! Entering columns are priced by most negative reduced cost, with Bland's
//! rule (lowest-index entering column, lowest-index basic variable among tied
//! ratios) taking over whenever the objective stalls; entropy polytopes are
//! highly degenerate and cycle without it.
//!
//! Entropy LPs keep tableau entries tiny, so the solve first runs on
//! overflow-checked `i64` fractions and only falls back to big rationals
//! when an operation would overflow. Both paths are exact.

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

use super::{LinearProgram, LpSolution, LpStatus, Rational, Relation};
use crate::error::{CdsError, Result};

/// Tableau entry type; arithmetic returns `None` on overflow.
trait Entry: Clone + Ord + Signed + CheckedAdd + CheckedSub + CheckedMul + CheckedDiv {
    fn from_rational(r: &Rational) -> Option<Self>;
    fn to_rational(&self) -> Rational;
}

impl Entry for Rational {
    fn from_rational(r: &Rational) -> Option<Self> {
        Some(r.clone())
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }
}

impl Entry for Ratio<i64> {
    fn from_rational(r: &Rational) -> Option<Self> {
        let n = r.numer().to_i64().filter(|&n| n != i64::MIN)?;
        let d = r.denom().to_i64()?;
        Some(Ratio::new_raw(n, d))
    }

    fn to_rational(&self) -> Rational {
        Rational::new((*self.numer()).into(), (*self.denom()).into())
    }
}

/// `t - f·v`.
fn sub_mul<T: Entry>(t: &T, f: &T, v: &T) -> Option<T> {
    t.checked_sub(&f.checked_mul(v)?)
}

struct Tableau<T> {
    /// `m` rows of `ncols + 1` entries; the last entry is the right-hand side.
    rows: Vec<Vec<T>>,
    /// Reduced costs `c_B B⁻¹ a_j − c_j` and, last, the objective value.
    obj: Vec<T>,
    basis: Vec<usize>,
    ncols: usize,
}

impl<T: Entry> Tableau<T> {
    fn pivot(&mut self, r: usize, col: usize) -> Option<()> {
        let piv = self.rows[r][col].clone();
        if !piv.is_one() {
            let inv = T::one().checked_div(&piv)?;
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v = v.checked_mul(&inv)?;
                }
            }
        }
        let prow: Vec<(usize, T)> =
            self.rows[r].iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (j, v.clone())).collect();
        let eliminate = |target: &mut Vec<T>| -> Option<()> {
            let f = target[col].clone();
            if f.is_zero() {
                return Some(());
            }
            for (j, v) in &prow {
                target[*j] = sub_mul(&target[*j], &f, v)?;
            }
            Some(())
        };
        for i in 0..self.rows.len() {
            if i != r {
                eliminate(&mut self.rows[i])?;
            }
        }
        eliminate(&mut self.obj)?;
        self.basis[r] = col;
        Some(())
    }

    /// Sets the objective row for maximizing `c · x` over the current basis.
    fn load_objective(&mut self, c: &[T]) -> Option<()> {
        let mut obj: Vec<T> = (0..=self.ncols).map(|j| if j < self.ncols { -c[j].clone() } else { T::zero() }).collect();
        for (r, &b) in self.basis.iter().enumerate() {
            if c[b].is_zero() {
                continue;
            }
            for (j, v) in self.rows[r].iter().enumerate() {
                if !v.is_zero() {
                    obj[j] = obj[j].checked_add(&c[b].checked_mul(v)?)?;
                }
            }
        }
        self.obj = obj;
        Some(())
    }

    /// Pivots until optimal or unbounded; `allowed` filters entering columns.
    /// Returns `Some(false)` on unboundedness.
    ///
    /// After `STALL_LIMIT` degenerate pivots in a row the rule drops to
    /// Bland's until the objective moves again, so cycling is impossible.
    fn optimize(&mut self, allowed: &dyn Fn(usize) -> bool) -> Option<bool> {
        const STALL_LIMIT: usize = 20;
        let mut stalled = 0;
        loop {
            let candidates = (0..self.ncols).filter(|&j| allowed(j) && self.obj[j].is_negative());
            let col = if stalled >= STALL_LIMIT {
                candidates.min()
            } else {
                candidates.min_by(|&a, &b| self.obj[a].cmp(&self.obj[b]).then(a.cmp(&b)))
            };
            let Some(col) = col else {
                return Some(true);
            };
            let mut best: Option<(usize, T)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = &row[col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = row[self.ncols].checked_div(a)?;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = best else {
                return Some(false);
            };
            stalled = if ratio.is_zero() { stalled + 1 } else { 0 };
            self.pivot(r, col)?;
        }
    }
}

/// Solves `max c·x s.t. constraints, x ≥ 0` exactly.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.num_vars;
    for (i, c) in lp.constraints.iter().enumerate() {
        if let Some((j, _)) = c.coeffs.iter().find(|(j, _)| *j >= n) {
            return Err(CdsError::InvalidLp(format!("constraint {i} references variable {j} of {n}")));
        }
    }
    if let Some((j, _)) = lp.objective.iter().find(|(j, _)| *j >= n) {
        return Err(CdsError::InvalidLp(format!("objective references variable {j} of {n}")));
    }
    if let Some(sol) = solve_with::<Ratio<i64>>(lp) {
        return Ok(sol);
    }
    Ok(solve_with::<Rational>(lp).expect("big rationals do not overflow"))
}

fn infeasible(status: LpStatus) -> LpSolution {
    LpSolution { status, value: None, primal: vec![], dual: vec![] }
}

fn solve_with<T: Entry>(lp: &LinearProgram) -> Option<LpSolution> {
    let n = lp.num_vars;
    let m = lp.constraints.len();
    // Normalize to nonnegative right-hand sides, and turn `>= 0` rows into
    // `<= 0` rows so their slack can start in the basis.
    let mut flipped = vec![false; m];
    let mut eff = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        let flip = c.rhs.is_negative() || (c.relation == Relation::Ge && c.rhs.is_zero());
        flipped[i] = flip;
        eff.push(match (flip, c.relation) {
            (true, Relation::Le) => Relation::Ge,
            (true, Relation::Ge) => Relation::Le,
            (_, rel) => rel,
        });
    }

    // Column layout: structural, then per row a slack / surplus, then artificials.
    let mut ncols = n;
    let mut aux_col = vec![usize::MAX; m];
    for (i, rel) in eff.iter().enumerate() {
        if *rel != Relation::Eq {
            aux_col[i] = ncols;
            ncols += 1;
        }
    }
    let first_artificial = ncols;
    let mut init_col = vec![usize::MAX; m];
    for (i, rel) in eff.iter().enumerate() {
        match rel {
            Relation::Le => init_col[i] = aux_col[i],
            _ => {
                init_col[i] = ncols;
                ncols += 1;
            }
        }
    }
    let is_artificial = |j: usize| j >= first_artificial;

    let mut rows = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        let sign = if flipped[i] { -Rational::one() } else { Rational::one() };
        let mut acc = vec![Rational::zero(); n];
        for (j, a) in &c.coeffs {
            acc[*j] += a * &sign;
        }
        let mut row = vec![T::zero(); ncols + 1];
        for (j, a) in acc.iter().enumerate() {
            if !a.is_zero() {
                row[j] = T::from_rational(a)?;
            }
        }
        match eff[i] {
            Relation::Le => row[aux_col[i]] = T::one(),
            Relation::Ge => {
                row[aux_col[i]] = -T::one();
                row[init_col[i]] = T::one();
            }
            Relation::Eq => row[init_col[i]] = T::one(),
        }
        row[ncols] = T::from_rational(&(&c.rhs * &sign))?;
        rows.push(row);
    }
    let mut t = Tableau { rows, obj: Vec::new(), basis: init_col.clone(), ncols };

    // Phase 1: maximize −Σ artificials.
    if ncols > first_artificial {
        let c1: Vec<T> = (0..ncols).map(|j| if is_artificial(j) { -T::one() } else { T::zero() }).collect();
        t.load_objective(&c1)?;
        t.optimize(&|_| true)?;
        if t.obj[ncols].is_negative() {
            return Some(infeasible(LpStatus::Infeasible));
        }
        // Drive zero-level artificials out of the basis where possible.
        for r in 0..m {
            if !is_artificial(t.basis[r]) {
                continue;
            }
            if let Some(j) = (0..first_artificial).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, j)?;
            }
        }
    }

    // Phase 2.
    let mut c2 = vec![Rational::zero(); ncols];
    for (j, v) in &lp.objective {
        c2[*j] += v;
    }
    let c2: Vec<T> = c2.iter().map(T::from_rational).collect::<Option<_>>()?;
    t.load_objective(&c2)?;
    if !t.optimize(&|j| !is_artificial(j))? {
        return Some(infeasible(LpStatus::Unbounded));
    }

    let mut primal = vec![Rational::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            primal[b] = t.rows[r][ncols].to_rational();
        }
    }
    // y = c_B B⁻¹, read off the columns that started as the identity.
    let c2: Vec<Rational> = c2.iter().map(T::to_rational).collect();
    let dual: Vec<Rational> = (0..m)
        .map(|i| {
            let mut y = Rational::zero();
            for (r, &b) in t.basis.iter().enumerate() {
                let a = &t.rows[r][init_col[i]];
                if !c2[b].is_zero() && !a.is_zero() {
                    y += &c2[b] * a.to_rational();
                }
            }
            if flipped[i] {
                -y
            } else {
                y
            }
        })
        .collect();
    let value = t.obj[ncols].to_rational();
    Some(LpSolution { status: LpStatus::Optimal, value: Some(value), primal, dual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{rat, Constraint};

    fn r(n: i64) -> Rational {
        rat(n, 1)
    }

    #[test]
    fn single_bound() {
        let mut lp = LinearProgram::new(1).maximize(vec![(0, r(1))]);
        lp.constrain(vec![(0, r(1))], Relation::Le, r(1));
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.value, Some(r(1)));
        assert_eq!(sol.dual, vec![r(1)]);
    }

    #[test]
    fn two_variable_box() {
        let mut lp = LinearProgram::new(2).maximize(vec![(0, r(1)), (1, r(1))]);
        lp.constrain(vec![(0, r(1)), (1, r(1))], Relation::Le, rat(3, 2));
        lp.constrain(vec![(0, r(1))], Relation::Le, r(1));
        lp.constrain(vec![(1, r(1))], Relation::Le, r(1));
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.value, Some(rat(3, 2)));
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x + 2y  s.t.  x + y = 3, x >= 1, y <= 5/2  ->  x = 1, y = 2, value 5.
        let mut lp = LinearProgram::new(2).maximize(vec![(0, r(1)), (1, r(2))]);
        lp.constrain(vec![(0, r(1)), (1, r(1))], Relation::Eq, r(3));
        lp.constrain(vec![(0, r(1))], Relation::Ge, r(1));
        lp.constrain(vec![(1, r(1))], Relation::Le, rat(5, 2));
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.value, Some(r(5)));
        assert_eq!(sol.primal, vec![r(1), r(2)]);
        // y·b = value, with y_ge <= 0
        let yb: Rational = sol.dual.iter().zip([r(3), r(1), rat(5, 2)]).map(|(y, b)| y * b).sum();
        assert_eq!(yb, r(5));
        assert!(!sol.dual[1].is_positive());
    }

    #[test]
    fn negative_rhs_is_flipped() {
        // max -x  s.t.  -x <= -2   ->  x = 2, value -2.
        let mut lp = LinearProgram::new(1).maximize(vec![(0, r(-1))]);
        lp.constrain(vec![(0, r(-1))], Relation::Le, r(-2));
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.value, Some(r(-2)));
        assert_eq!(sol.dual, vec![r(1)]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1).maximize(vec![(0, r(1))]);
        lp.constrain(vec![(0, r(1))], Relation::Le, r(1));
        lp.constrain(vec![(0, r(1))], Relation::Ge, r(2));
        assert_eq!(simplex_solve(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new(2).maximize(vec![(0, r(1))]);
        lp.constrain(vec![(0, r(1)), (1, r(-1))], Relation::Le, r(1));
        assert_eq!(simplex_solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        // x + y = 1 twice; max x.
        let mut lp = LinearProgram::new(2).maximize(vec![(0, r(1))]);
        lp.constrain(vec![(0, r(1)), (1, r(1))], Relation::Eq, r(1));
        lp.constrain(vec![(0, r(2)), (1, r(2))], Relation::Eq, r(2));
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.value, Some(r(1)));
    }

    #[test]
    fn out_of_range_variable() {
        let mut lp = LinearProgram::new(1);
        lp.constrain(vec![(3, r(1))], Relation::Le, r(1));
        assert!(matches!(simplex_solve(&lp), Err(CdsError::InvalidLp(_))));
    }

    #[test]
    fn falls_back_on_overflow() {
        // Coefficients near i64::MAX force the big-rational path.
        let big = Rational::from_integer(i64::MAX.into()) * r(4);
        let mut lp = LinearProgram::new(2).maximize(vec![(0, r(1)), (1, r(1))]);
        lp.constrain(vec![(0, big.clone()), (1, r(1))], Relation::Le, big.clone());
        lp.constrain(vec![(1, r(3))], Relation::Le, r(1));
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.value, Some(r(1) + rat(1, 3) - rat(1, 3) / &big));
        let mut small = lp.clone();
        small.constraints[0] = Constraint { coeffs: vec![(0, r(3)), (1, r(1))], relation: Relation::Le, rhs: r(3) };
        assert_eq!(solve_with::<Ratio<i64>>(&small).unwrap().value, solve_with::<Rational>(&small).unwrap().value);
        assert!(solve_with::<Ratio<i64>>(&lp).is_none());
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under the largest-coefficient rule.
        // max 3/4 x1 - 20 x2 + 1/2 x3 - 6 x4
        let mut lp = LinearProgram::new(4).maximize(vec![(0, rat(3, 4)), (1, r(-20)), (2, rat(1, 2)), (3, r(-6))]);
        lp.constrain(vec![(0, rat(1, 4)), (1, r(-8)), (2, r(-1)), (3, r(9))], Relation::Le, r(0));
        lp.constrain(vec![(0, rat(1, 2)), (1, r(-12)), (2, rat(-1, 2)), (3, r(3))], Relation::Le, r(0));
        lp.constrain(vec![(2, r(1))], Relation::Le, r(1));
        let sol = simplex_solve(&lp).unwrap();
        assert_eq!(sol.value, Some(rat(5, 4)));
    }
}
