//! Exact two-phase simplex over [`Scalar`].
//!
//! Solves `maximize c·x subject to A x ≤ b` with `x` free. Pivoting uses
//! Bland's rule, so degenerate problems terminate. Sizes here are small
//! (a few dozen constraints in at most a handful of variables), so a dense
//! tableau is enough.

use crate::scalar::Scalar;

/// One inequality `coeffs · x ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Scalar>,
    pub rhs: Scalar,
}

impl Constraint {
    pub fn le(coeffs: Vec<Scalar>, rhs: Scalar) -> Self {
        Constraint { coeffs, rhs }
    }

    /// `coeffs · x ≥ rhs`, stored as `-coeffs · x ≤ -rhs`.
    pub fn ge(coeffs: Vec<Scalar>, rhs: Scalar) -> Self {
        Constraint {
            coeffs: coeffs.iter().map(|c| -c).collect(),
            rhs: -rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { point: Vec<Scalar>, value: Scalar },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Scalar>>,
    rhs: Vec<Scalar>,
    basis: Vec<usize>,
    /// Reduced costs `c_j - c_B B^-1 A_j` for the current objective.
    reduced: Vec<Scalar>,
    value: Scalar,
    /// Columns barred from entering (retired artificials).
    barred: Vec<bool>,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn set_objective(&mut self, cost: &[Scalar]) {
        let width = cost.len();
        let mut reduced = cost.to_vec();
        let mut value = Scalar::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for j in 0..width {
                if !self.rows[i][j].is_zero() {
                    reduced[j] -= &(cb * &self.rows[i][j]);
                }
            }
            value += &(cb * &self.rhs[i]);
        }
        self.reduced = reduced;
        self.value = value;
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        if p != Scalar::one() {
            for x in self.rows[row].iter_mut() {
                if !x.is_zero() {
                    *x = &*x / &p;
                }
            }
            self.rhs[row] = &self.rhs[row] / &p;
        }
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        let nonzero: Vec<usize> = (0..pivot_row.len())
            .filter(|&j| !pivot_row[j].is_zero())
            .collect();
        for i in 0..self.rows.len() {
            if i == row || self.rows[i][col].is_zero() {
                continue;
            }
            let factor = self.rows[i][col].clone();
            for &j in &nonzero {
                self.rows[i][j] -= &(&factor * &pivot_row[j]);
            }
            self.rhs[i] -= &(&factor * &pivot_rhs);
        }
        let factor = self.reduced[col].clone();
        if !factor.is_zero() {
            for &j in &nonzero {
                self.reduced[j] -= &(&factor * &pivot_row[j]);
            }
            // value tracks c_B · rhs
            self.value += &(&factor * &pivot_rhs);
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations to optimality for the current objective.
    fn optimize(&mut self) -> Step {
        loop {
            let entering = (0..self.reduced.len())
                .find(|&j| !self.barred[j] && self.reduced[j].is_positive());
            let Some(col) = entering else {
                return Step::Optimal;
            };
            let mut best: Option<(usize, Scalar)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((row, _)) = best else {
                return Step::Unbounded;
            };
            self.pivot(row, col);
        }
    }
}

/// Maximizes `objective · x` over `{x : A x ≤ b}`.
pub fn maximize(objective: &[Scalar], constraints: &[Constraint]) -> LpOutcome {
    let n = objective.len();
    let m = constraints.len();
    debug_assert!(constraints.iter().all(|c| c.coeffs.len() == n));

    // Columns: u (n), v (n), slacks (m), artificials (one per negative rhs).
    let needs_artificial: Vec<bool> = constraints.iter().map(|c| c.rhs.is_negative()).collect();
    let artificials = needs_artificial.iter().filter(|&&b| b).count();
    let width = 2 * n + m + artificials;
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut next_art = 2 * n + m;
    for (i, c) in constraints.iter().enumerate() {
        let mut row = vec![Scalar::zero(); width];
        let flip = needs_artificial[i];
        for (k, a) in c.coeffs.iter().enumerate() {
            let a = if flip { -a } else { a.clone() };
            row[n + k] = -&a;
            row[k] = a;
        }
        row[2 * n + i] = if flip { -Scalar::one() } else { Scalar::one() };
        if flip {
            row[next_art] = Scalar::one();
            basis.push(next_art);
            next_art += 1;
            rhs.push(-&c.rhs);
        } else {
            basis.push(2 * n + i);
            rhs.push(c.rhs.clone());
        }
        rows.push(row);
    }

    let mut tab = Tableau {
        rows,
        rhs,
        basis,
        reduced: Vec::new(),
        value: Scalar::zero(),
        barred: vec![false; width],
    };

    if artificials > 0 {
        let mut phase1 = vec![Scalar::zero(); width];
        for c in phase1.iter_mut().skip(2 * n + m) {
            *c = -Scalar::one();
        }
        tab.set_objective(&phase1);
        match tab.optimize() {
            Step::Optimal => {}
            Step::Unbounded => unreachable!("phase one is bounded by zero"),
        }
        if tab.value.is_negative() {
            return LpOutcome::Infeasible;
        }
        // Retire artificials: pivot them out of the basis, or drop their
        // rows when the row is redundant.
        let first_art = 2 * n + m;
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= first_art {
                match (0..first_art).find(|&j| !tab.rows[i][j].is_zero()) {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.rows.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for j in first_art..width {
            tab.barred[j] = true;
        }
    }

    let mut cost = vec![Scalar::zero(); width];
    for (k, c) in objective.iter().enumerate() {
        cost[k] = c.clone();
        cost[n + k] = -c;
    }
    tab.set_objective(&cost);
    match tab.optimize() {
        Step::Unbounded => LpOutcome::Unbounded,
        Step::Optimal => {
            let mut values = vec![Scalar::zero(); width];
            for (i, &b) in tab.basis.iter().enumerate() {
                values[b] = tab.rhs[i].clone();
            }
            let point: Vec<Scalar> = (0..n).map(|k| &values[k] - &values[n + k]).collect();
            let value = objective
                .iter()
                .zip(&point)
                .map(|(c, x)| c * x)
                .sum();
            LpOutcome::Optimal { point, value }
        }
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
fn row_reduce(rows: &mut [Vec<Scalar>], width: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        let Some(found) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, found);
        let p = rows[r][col].clone();
        for x in rows[r].iter_mut() {
            *x = &*x / &p;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &(&factor * p);
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

/// Rank of the row set and, when it is below `width`, a nonzero vector
/// annihilated by every row.
pub fn rank_and_kernel(rows: &[Vec<Scalar>], width: usize) -> (usize, Option<Vec<Scalar>>) {
    let mut m: Vec<Vec<Scalar>> = rows.to_vec();
    let pivots = row_reduce(&mut m, width);
    let rank = pivots.len();
    if rank == width {
        return (rank, None);
    }
    let free = (0..width)
        .find(|c| !pivots.contains(c))
        .expect("rank below width leaves a free column");
    let mut x = vec![Scalar::zero(); width];
    x[free] = Scalar::one();
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = -&m[r][free];
    }
    (rank, Some(x))
}

/// Unique solution of the square system `a x = b`, if `a` is invertible.
pub fn solve_square(a: &[Vec<Scalar>], b: &[Scalar]) -> Option<Vec<Scalar>> {
    let n = b.len();
    let mut m: Vec<Vec<Scalar>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = row_reduce(&mut m, n);
    if pivots.len() < n {
        return None;
    }
    Some(m.iter().map(|row| row[n].clone()).collect())
}
