//! Exact rational linear programming over equality constraints.
//!
//! A small two-phase simplex with Bland's rule on `BigRational` arithmetic:
//! no tolerances, no cycling, deterministic pivots. Problems here are tiny
//! (probability vectors tied together by marginal equalities), so a dense
//! tableau is the right tool.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("row has {got} coefficients, expected {want}")]
    RowLength { got: usize, want: usize },
    #[error("objective has {got} coefficients, expected {want}")]
    ObjectiveLength { got: usize, want: usize },
}

/// Outcome of an optimization run.
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { value: Rat, point: Vec<Rat> },
}

/// `A x = b`, `x >= 0`.
#[derive(Debug, Clone)]
pub struct ExactLp {
    ncols: usize,
    rows: Vec<(Vec<Rat>, Rat)>,
}

struct Tableau {
    /// rows x (cols + 1); last column is the right-hand side.
    data: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rat {
        &self.data[r][self.ncols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let factor = self.data[row][col].clone();
        for x in self.data[row].iter_mut() {
            *x /= factor.clone();
        }
        for r in 0..self.data.len() {
            if r != row && !self.data[r][col].is_zero() {
                let scale = self.data[r][col].clone();
                for c in 0..=self.ncols {
                    let delta = scale.clone() * self.data[row][c].clone();
                    self.data[r][c] -= delta;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimizes `obj . x` from the current feasible basis with Bland's rule.
    /// `allowed` marks the columns that may enter.
    fn optimize(&mut self, obj: &[Rat], allowed: &[bool]) -> Option<Rat> {
        loop {
            // Reduced costs: c_j - c_B . B^{-1} A_j.
            let mut entering = None;
            for j in 0..self.ncols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = obj[j].clone();
                for (r, &b) in self.basis.iter().enumerate() {
                    reduced -= obj[b].clone() * self.data[r][j].clone();
                }
                if reduced.is_negative() {
                    entering = Some(j);
                    break; // Bland: least index
                }
            }
            let Some(col) = entering else {
                let mut value = Rat::zero();
                for (r, &b) in self.basis.iter().enumerate() {
                    value += obj[b].clone() * self.rhs(r).clone();
                }
                return Some(value);
            };
            // Ratio test, ties broken by least basis index (Bland).
            let mut leaving: Option<(usize, Rat)> = None;
            for r in 0..self.data.len() {
                if self.data[r][col].is_positive() {
                    let ratio = self.rhs(r).clone() / self.data[r][col].clone();
                    let better = match &leaving {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < *lratio
                                || (ratio == *lratio && self.basis[r] < self.basis[*lr])
                        }
                    };
                    if better {
                        leaving = Some((r, ratio));
                    }
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return None, // unbounded
            }
        }
    }

    fn solution(&self) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); self.ncols];
        for (r, &b) in self.basis.iter().enumerate() {
            x[b] = self.rhs(r).clone();
        }
        x
    }
}

impl ExactLp {
    pub fn new(ncols: usize) -> ExactLp {
        ExactLp { ncols, rows: Vec::new() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Adds an equality `coeffs . x = rhs`.
    pub fn add_eq(&mut self, coeffs: Vec<Rat>, rhs: Rat) -> Result<(), LpError> {
        if coeffs.len() != self.ncols {
            return Err(LpError::RowLength { got: coeffs.len(), want: self.ncols });
        }
        self.rows.push((coeffs, rhs));
        Ok(())
    }

    /// Phase 1: a feasible basic tableau, or `None` when infeasible.
    fn phase1(&self) -> Option<Tableau> {
        let m = self.rows.len();
        let total = self.ncols + m; // artificial variable per row
        let mut data = Vec::with_capacity(m);
        for (i, (coeffs, rhs)) in self.rows.iter().enumerate() {
            let flip = rhs.is_negative();
            let mut row: Vec<Rat> = coeffs
                .iter()
                .map(|c| if flip { -c.clone() } else { c.clone() })
                .collect();
            row.resize(total, Rat::zero());
            row[self.ncols + i] = Rat::one();
            row.push(if flip { -rhs.clone() } else { rhs.clone() });
            data.push(row);
        }
        let mut t = Tableau { data, basis: (self.ncols..total).collect(), ncols: total };
        let mut obj = vec![Rat::zero(); total];
        for j in self.ncols..total {
            obj[j] = Rat::one();
        }
        let allowed = vec![true; total];
        let value = t.optimize(&obj, &allowed).expect("phase 1 is bounded below by 0");
        if !value.is_zero() {
            return None;
        }
        // Drive leftover artificial variables out of the basis.
        for r in 0..t.basis.len() {
            if t.basis[r] >= self.ncols {
                if let Some(col) = (0..self.ncols).find(|&c| !t.data[r][c].is_zero()) {
                    t.pivot(r, col);
                }
                // A row with no real pivot is redundant; its artificial stays
                // basic at value zero, which is harmless for phase 2 as long
                // as it can never re-enter (enforced via `allowed`).
            }
        }
        Some(t)
    }

    /// A feasible point, if any.
    pub fn feasible_point(&self) -> Option<Vec<Rat>> {
        let t = self.phase1()?;
        Some(t.solution()[..self.ncols].to_vec())
    }

    /// Minimizes `obj . x` over the feasible region.
    pub fn minimize(&self, obj: &[Rat]) -> Result<LpOutcome, LpError> {
        if obj.len() != self.ncols {
            return Err(LpError::ObjectiveLength { got: obj.len(), want: self.ncols });
        }
        let Some(mut t) = self.phase1() else {
            return Ok(LpOutcome::Infeasible);
        };
        let total = t.ncols;
        let mut full_obj = obj.to_vec();
        full_obj.resize(total, Rat::zero());
        let mut allowed = vec![true; total];
        for a in allowed.iter_mut().skip(self.ncols) {
            *a = false;
        }
        match t.optimize(&full_obj, &allowed) {
            None => Ok(LpOutcome::Unbounded),
            Some(value) => {
                Ok(LpOutcome::Optimal { value, point: t.solution()[..self.ncols].to_vec() })
            }
        }
    }

    pub fn maximize(&self, obj: &[Rat]) -> Result<LpOutcome, LpError> {
        let neg: Vec<Rat> = obj.iter().map(|c| -c.clone()).collect();
        Ok(match self.minimize(&neg)? {
            LpOutcome::Optimal { value, point } => LpOutcome::Optimal { value: -value, point },
            other => other,
        })
    }

    /// Exact range `[min, max]` of coordinate `j` over the feasible region.
    pub fn coordinate_range(&self, j: usize) -> Result<Option<(Rat, Rat)>, LpError> {
        let mut obj = vec![Rat::zero(); self.ncols];
        obj[j] = Rat::one();
        let lo = match self.minimize(&obj)? {
            LpOutcome::Optimal { value, .. } => value,
            _ => return Ok(None),
        };
        let hi = match self.maximize(&obj)? {
            LpOutcome::Optimal { value, .. } => value,
            _ => return Ok(None),
        };
        Ok(Some((lo, hi)))
    }
}
