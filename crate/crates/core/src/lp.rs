//! Dense two-phase primal simplex for `max c·x  s.t.  E x = b, x >= 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_dense;

pub const FEASIBILITY_TOL: f64 = 1e-8;
pub const PIVOT_TOL: f64 = 1e-12;
pub const REDUCED_COST_TOL: f64 = 1e-10;
/// Rows whose entries all fall below this after phase 1 are dropped as redundant.
pub const REDUNDANT_ROW_TOL: f64 = 1e-10;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule for good.
const DEGENERATE_STREAK: usize = 50;

#[derive(Clone, Debug)]
pub struct StandardFormLP {
    c: Vec<f64>,
    /// Row-major `rows x cols`.
    e: Vec<f64>,
    rows: usize,
    cols: usize,
    b: Vec<f64>,
}

impl StandardFormLP {
    pub fn new(c: Vec<f64>, rows: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let cols = c.len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(
                "constraint row length differs from objective length".into(),
            ));
        }
        let r = rows.len();
        Self::from_dense(c, rows.concat(), r, b)
    }

    pub fn from_dense(c: Vec<f64>, e: Vec<f64>, rows: usize, b: Vec<f64>) -> Result<Self> {
        let cols = c.len();
        if e.len() != rows * cols || b.len() != rows {
            return Err(Error::DimensionMismatch(format!(
                "LP with {rows} rows and {cols} columns got {} matrix entries and {} right-hand sides",
                e.len(),
                b.len()
            )));
        }
        if c.iter().chain(&e).chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("LP coefficients must be finite".into()));
        }
        Ok(Self {
            c,
            e,
            rows,
            cols,
            b,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn objective(&self) -> &[f64] {
        &self.c
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.e[i * self.cols + j]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    /// `‖E x − b‖∞`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        (0..self.rows)
            .map(|i| {
                let lhs: f64 = (0..self.cols).map(|j| self.entry(i, j) * x[j]).sum();
                (lhs - self.b[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; NaN unless optimal.
    pub value: f64,
    /// Variable values; empty unless optimal.
    pub x: Vec<f64>,
    /// Basic variable indices; empty unless optimal.
    pub basis: Vec<usize>,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        Self {
            status,
            value: f64::NAN,
            x: Vec::new(),
            basis: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotRule {
    /// Bland's smallest-index rule throughout.
    Bland,
    /// Most-negative reduced cost, falling back to Bland permanently after a
    /// long run of degenerate pivots.
    DantzigThenBland,
}

struct Tableau {
    /// Columns: real variables, then artificials, then the right-hand side.
    t: Vec<f64>,
    width: usize,
    rows: usize,
    basis: Vec<usize>,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn obj_row(&self) -> usize {
        self.rows
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let w = self.width;
        let d = self.t[p * w + q];
        for k in 0..w {
            self.t[p * w + k] /= d;
        }
        self.t[p * w + q] = 1.0;
        let (before, rest) = self.t.split_at_mut(p * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[q];
            if f == 0.0 {
                continue;
            }
            for (x, &y) in row.iter_mut().zip(prow.iter()) {
                *x -= f * y;
            }
            row[q] = 0.0;
        }
        self.basis[p] = q;
    }

    fn run(&mut self, allowed: usize, rule: PivotRule, max_iter: usize) -> Result<Phase> {
        let mut bland = rule == PivotRule::Bland;
        let mut streak = 0;
        let obj = self.obj_row();
        let rhs = self.rhs_col();
        for _ in 0..max_iter {
            let d = &self.t[obj * self.width..obj * self.width + allowed];
            let entering = if bland {
                d.iter().position(|&v| v < -REDUCED_COST_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for (j, &v) in d.iter().enumerate() {
                    if v < -REDUCED_COST_TOL && best.is_none_or(|(_, b)| v < b) {
                        best = Some((j, v));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(q) = entering else {
                return Ok(Phase::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, q);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.at(i, rhs).max(0.0) / a;
                let take = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - 1e-12
                            || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li])
                    }
                };
                if take {
                    leave = Some((i, ratio));
                }
            }
            let Some((p, ratio)) = leave else {
                return Ok(Phase::Unbounded);
            };
            if ratio <= 1e-12 {
                streak += 1;
                if streak > DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            self.pivot(p, q);
        }
        Err(Error::NumericalFailure(format!(
            "simplex did not terminate within {max_iter} pivots"
        )))
    }

    fn remove_row(&mut self, i: usize) {
        let w = self.width;
        self.t.drain(i * w..(i + 1) * w);
        self.basis.remove(i);
        self.rows -= 1;
    }
}

pub fn solve_lp(p: &StandardFormLP) -> Result<LpSolution> {
    solve_lp_with(p, PivotRule::DantzigThenBland)
}

pub fn solve_lp_with(p: &StandardFormLP, rule: PivotRule) -> Result<LpSolution> {
    let (r, m) = (p.rows, p.cols);
    let width = m + r + 1;
    let mut t = vec![0.0; (r + 1) * width];
    for i in 0..r {
        // Flip rows so every right-hand side is nonnegative.
        let sign = if p.b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..m {
            t[i * width + j] = sign * p.entry(i, j);
        }
        t[i * width + m + i] = 1.0;
        t[i * width + width - 1] = sign * p.b[i];
    }
    let mut tab = Tableau {
        t,
        width,
        rows: r,
        basis: (m..m + r).collect(),
    };
    // Row ids track which original constraint each tableau row came from.
    let mut row_ids: Vec<usize> = (0..r).collect();
    let max_iter = 50 * (m + r) + 10_000;

    // Phase 1: maximize minus the sum of artificials.
    let obj = tab.obj_row();
    for j in 0..width {
        if (m..m + r).contains(&j) {
            continue;
        }
        let s: f64 = (0..r).map(|i| tab.at(i, j)).sum();
        tab.t[obj * width + j] = -s;
    }
    tab.run(m + r, rule, max_iter)?;
    if tab.at(tab.obj_row(), tab.rhs_col()) < -FEASIBILITY_TOL {
        return Ok(LpSolution::without_point(LpStatus::Infeasible));
    }

    // Pivot remaining artificials out; rows where that is impossible are redundant.
    let mut i = 0;
    while i < tab.rows {
        if tab.basis[i] >= m {
            match (0..m).find(|&j| tab.at(i, j).abs() > REDUNDANT_ROW_TOL) {
                Some(j) => tab.pivot(i, j),
                None => {
                    tab.remove_row(i);
                    row_ids.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase 2.
    let obj = tab.obj_row();
    let rhs = tab.rhs_col();
    for j in (0..m).chain(std::iter::once(rhs)) {
        let z: f64 = (0..tab.rows)
            .map(|i| p.c[tab.basis[i]] * tab.at(i, j))
            .sum();
        tab.t[obj * width + j] = if j == rhs { z } else { z - p.c[j] };
    }
    for j in m..m + r {
        tab.t[obj * width + j] = 0.0;
    }
    if let Phase::Unbounded = tab.run(m, rule, max_iter)? {
        return Ok(LpSolution::without_point(LpStatus::Unbounded));
    }

    let k = tab.rows;
    let basis = tab.basis.clone();
    let mut x = vec![0.0; m];
    for (i, &j) in basis.iter().enumerate() {
        x[j] = tab.at(i, rhs);
    }
    // Recompute basic values from the original columns to shed pivot drift.
    let mut bmat = vec![0.0; k * k];
    for (a, &orig) in row_ids.iter().enumerate() {
        for (col, &j) in basis.iter().enumerate() {
            bmat[a * k + col] = p.entry(orig, j);
        }
    }
    let brhs: Vec<f64> = row_ids.iter().map(|&o| p.b[o]).collect();
    if let Some(xb) = solve_dense(bmat, brhs, k, PIVOT_TOL) {
        if xb.iter().all(|&v| v >= -REDUCED_COST_TOL) {
            for (col, &j) in basis.iter().enumerate() {
                x[j] = xb[col];
            }
        }
    }
    for v in &mut x {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let res = p.residual(&x);
    if res > FEASIBILITY_TOL {
        return Err(Error::NumericalFailure(format!(
            "optimal basis violates constraints by {res:e}"
        )));
    }
    let value = p.c.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value,
        x,
        basis,
    })
}
