//! Dense two-phase simplex used by the bounded-Lipschitz seminorm, the
//! geometric feasibility oracles, and the conditional-gradient subproblems.
//!
//! Minimizes `c . x` subject to rows `a . x <= b` or `a . x = b` with
//! `x >= 0`. Bland's rule on both the entering and leaving choices keeps the
//! pivot sequence deterministic and cycle-free.

use crate::error::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct Lp {
    /// Objective coefficients, one per structural variable.
    pub cost: Vec<f64>,
    pub rows: Vec<LpRow>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// One multiplier per input row (sign convention: value = duals . rhs at
    /// the optimum).
    pub duals: Vec<f64>,
    /// max(0, -min reduced cost): dual feasibility residual.
    pub dual_residual: f64,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

const EPS: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-11;
const MAX_ITERS: usize = 50_000;

struct Tableau {
    /// rows x (ncols + 1); last column is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Column index where artificials start (slack/surplus in between).
    art_start: usize,
    ncols: usize,
    /// For each input row: signed slack column (col, sign) if any.
    row_slack: Vec<Option<(usize, f64)>>,
    /// For each input row: artificial column if any.
    row_art: Vec<Option<usize>>,
    /// Whether the input row was negated during normalization.
    flipped: Vec<bool>,
    active: Vec<bool>,
}

impl Tableau {
    fn build(lp: &Lp) -> Tableau {
        let m = lp.rows.len();
        let n = lp.cost.len();
        let mut flipped = vec![false; m];
        // Column layout pass: count slacks/surpluses, then artificials.
        let mut slack_cols = 0usize;
        for (i, row) in lp.rows.iter().enumerate() {
            let neg = row.rhs < 0.0;
            flipped[i] = neg;
            if row.sense == Sense::Le {
                slack_cols += 1; // slack if not flipped, surplus if flipped
            }
        }
        let art_start = n + slack_cols;
        let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut basis = vec![usize::MAX; m];
        let mut row_slack = vec![None; m];
        let mut row_art = vec![None; m];
        let mut next_slack = n;
        let mut next_art = art_start;
        for (i, row) in lp.rows.iter().enumerate() {
            let sign = if flipped[i] { -1.0 } else { 1.0 };
            let mut r = vec![0.0; art_start]; // resized after artificial count known
            for (j, &a) in row.coeffs.iter().enumerate() {
                r[j] = sign * a;
            }
            match (row.sense, flipped[i]) {
                (Sense::Le, false) => {
                    // a x + s = b, s basic
                    r[next_slack] = 1.0;
                    row_slack[i] = Some((next_slack, 1.0));
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                (Sense::Le, true) => {
                    // -a x - s' ... after negation: (-a) x >= -b>0 -> surplus + artificial
                    r[next_slack] = -1.0;
                    row_slack[i] = Some((next_slack, -1.0));
                    next_slack += 1;
                    row_art[i] = Some(next_art);
                    next_art += 1;
                }
                (Sense::Eq, _) => {
                    row_art[i] = Some(next_art);
                    next_art += 1;
                }
            }
            r.push(sign * row.rhs);
            t.push(r);
        }
        let ncols = next_art;
        // Widen rows to ncols + 1 and place artificial ones.
        for (i, r) in t.iter_mut().enumerate() {
            let rhs = r.pop().unwrap();
            r.resize(ncols, 0.0);
            if let Some(a) = row_art[i] {
                r[a] = 1.0;
                basis[i] = a;
            }
            r.push(rhs);
        }
        Tableau {
            t,
            basis,
            art_start,
            ncols,
            row_slack,
            row_art,
            flipped,
            active: vec![true; m],
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let scale = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= scale;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row || !self.active[i] {
                continue;
            }
            let factor = r[col];
            if factor == 0.0 {
                continue;
            }
            for (v, p) in r.iter_mut().zip(pivot_row.iter()) {
                *v -= factor * p;
            }
            r[col] = 0.0; // kill residual rounding in the pivot column
        }
        self.basis[row] = col;
    }

    /// Runs simplex for the given column costs. Returns false on unbounded.
    fn run(&mut self, costs: &[f64], allow: impl Fn(usize) -> bool) -> Result<bool> {
        for _ in 0..MAX_ITERS {
            // Reduced costs r_j = c_j - c_B . T_j; Bland entering rule.
            let mut entering = None;
            for j in 0..self.ncols {
                if !allow(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut cb_tj = 0.0;
                for (i, r) in self.t.iter().enumerate() {
                    if self.active[i] {
                        cb_tj += costs[self.basis[i]] * r[j];
                    }
                }
                if costs[j] - cb_tj < -EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(e) = entering else {
                return Ok(true);
            };
            // Ratio test with Bland tie-break on the leaving basis index.
            let mut leave: Option<(usize, f64)> = None;
            for (i, r) in self.t.iter().enumerate() {
                if !self.active[i] || r[e] <= PIVOT_EPS {
                    continue;
                }
                let ratio = r[self.ncols] / r[e];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - PIVOT_EPS
                            || (ratio < br + PIVOT_EPS && self.basis[i] < self.basis[bi])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
            let Some((leave_row, _)) = leave else {
                return Ok(false);
            };
            self.pivot(leave_row, e);
        }
        Err(Error::Numerical("simplex iteration limit".into()))
    }

    fn objective(&self, costs: &[f64]) -> f64 {
        let mut v = 0.0;
        for (i, r) in self.t.iter().enumerate() {
            if self.active[i] {
                v += costs[self.basis[i]] * r[self.ncols];
            }
        }
        v
    }
}

/// Solves the LP. Deterministic for identical input.
pub fn solve(lp: &Lp) -> Result<LpOutcome> {
    let n = lp.cost.len();
    for row in &lp.rows {
        if row.coeffs.len() != n {
            return Err(Error::InvalidArgument("LP row width mismatch".into()));
        }
    }
    let mut tab = Tableau::build(lp);
    let has_art = tab.ncols > tab.art_start;
    if has_art {
        let mut phase1 = vec![0.0; tab.ncols];
        for c in phase1.iter_mut().skip(tab.art_start) {
            *c = 1.0;
        }
        let bounded = tab.run(&phase1, |_| true)?;
        debug_assert!(bounded, "phase 1 is bounded below by 0");
        if tab.objective(&phase1) > 1e-7 {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining artificials out of the basis; drop dependent rows.
        for i in 0..tab.t.len() {
            if !tab.active[i] || tab.basis[i] < tab.art_start {
                continue;
            }
            let mut pivot_col = None;
            for j in 0..tab.art_start {
                if tab.t[i][j].abs() > 1e-8 {
                    pivot_col = Some(j);
                    break;
                }
            }
            match pivot_col {
                Some(j) => tab.pivot(i, j),
                None => tab.active[i] = false,
            }
        }
    }
    let mut phase2 = vec![0.0; tab.ncols];
    phase2[..n].copy_from_slice(&lp.cost);
    let art_start = tab.art_start;
    let bounded = tab.run(&phase2, |j| j < art_start)?;
    if !bounded {
        return Ok(LpOutcome::Unbounded);
    }
    // Extract primal solution.
    let mut x = vec![0.0; n];
    for (i, r) in tab.t.iter().enumerate() {
        if tab.active[i] && tab.basis[i] < n {
            x[tab.basis[i]] = r[tab.ncols];
        }
    }
    // Duals from the reduced costs of slack / artificial columns, and the
    // overall dual-feasibility residual.
    let reduced = |j: usize| -> f64 {
        let mut cb_tj = 0.0;
        for (i, r) in tab.t.iter().enumerate() {
            if tab.active[i] {
                cb_tj += phase2[tab.basis[i]] * r[j];
            }
        }
        phase2[j] - cb_tj
    };
    let mut duals = vec![0.0; lp.rows.len()];
    for i in 0..lp.rows.len() {
        let y = if let Some((col, sign)) = tab.row_slack[i] {
            -reduced(col) * sign
        } else if let Some(col) = tab.row_art[i] {
            -reduced(col)
        } else {
            0.0
        };
        duals[i] = if tab.flipped[i] { -y } else { y };
    }
    let mut dual_residual = 0.0f64;
    for j in 0..art_start {
        let r = reduced(j);
        if -r > dual_residual {
            dual_residual = -r;
        }
    }
    let value = tab.objective(&phase2);
    Ok(LpOutcome::Optimal(LpSolution {
        x,
        value,
        duals,
        dual_residual,
    }))
}
