//! Minimum-cost assignment on square cost matrices.
//!
//! Shortest augmenting path formulation with row/column potentials, O(n^3).
//! Among all optimal assignments the lexicographically smallest one (by the
//! column chosen for row 0, then row 1, ...) is returned: after solving, the
//! assignment is rerouted through the zero-reduced-cost edges of the final
//! potentials, which are exactly the edges usable by some optimal solution.

use num_traits::One;

use crate::scalar::Cost;

use super::MatchingError;

/// Dense row-major cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Cost> CostMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, MatchingError> {
        if data.len() != rows * cols {
            return Err(MatchingError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, MatchingError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(MatchingError::Shape(format!(
                "row {bad} has {} entries, expected {n_cols}",
                rows[bad].len()
            )));
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.cols + col]
    }

    /// Sum of `cost[i][perm[i]]`, accumulated in row order.
    pub fn total(&self, perm: &[usize]) -> T {
        perm.iter()
            .enumerate()
            .fold(T::zero(), |acc, (i, &j)| acc + self.get(i, j).clone())
    }
}

/// Result of [`hungarian_assign`]: `row_to_col[i]` is the column given to row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<T> {
    pub row_to_col: Vec<usize>,
    pub total: T,
}

/// Minimum total cost assignment of rows to columns.
pub fn hungarian_assign<T: Cost>(cost: &CostMatrix<T>) -> Result<Assignment<T>, MatchingError> {
    if cost.rows != cost.cols {
        return Err(MatchingError::NonSquare {
            rows: cost.rows,
            cols: cost.cols,
        });
    }
    let n = cost.rows;
    for i in 0..n {
        for j in 0..n {
            let c = cost.get(i, j);
            if !c.is_finite_cost() || *c < T::zero() {
                return Err(MatchingError::InvalidCost { row: i, col: j });
            }
        }
    }
    if n == 0 {
        return Ok(Assignment {
            row_to_col: Vec::new(),
            total: T::zero(),
        });
    }

    let (row_to_col, u, v) = solve(cost);
    let hungarian_total = cost.total(&row_to_col);

    let scale = cost
        .data
        .iter()
        .fold(T::zero(), |m, c| if *c > m { c.clone() } else { m });
    let tight: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    row_to_col[i] == j
                        || (cost.get(i, j).clone() - u[i].clone() - v[j].clone()).is_tight(&scale)
                })
                .collect()
        })
        .collect();
    let refined = lexicographic_min(&tight, row_to_col.clone());
    let refined_total = cost.total(&refined);
    // float tolerance could admit an edge that is not quite optimal
    if refined_total > hungarian_total {
        return Ok(Assignment {
            row_to_col,
            total: hungarian_total,
        });
    }
    Ok(Assignment {
        row_to_col: refined,
        total: refined_total,
    })
}

/// Minimum `primary` cost assignment; among all primary optima the one with
/// the smallest `secondary` total is returned. `total` is the primary cost.
///
/// Primary optima are exactly the perfect matchings on zero reduced-cost
/// edges of the final potentials, so the secondary problem is solved on that
/// subgraph with every other edge priced out of reach.
pub fn hungarian_assign_tiebreak<T: Cost + One>(
    primary: &CostMatrix<T>,
    secondary: &CostMatrix<T>,
) -> Result<Assignment<T>, MatchingError> {
    let first = hungarian_assign(primary)?;
    if (secondary.rows, secondary.cols) != (primary.rows, primary.cols) {
        return Err(MatchingError::Shape(format!(
            "secondary cost is {}x{}, primary is {}x{}",
            secondary.rows, secondary.cols, primary.rows, primary.cols
        )));
    }
    let n = primary.rows;
    for i in 0..n {
        for j in 0..n {
            let c = secondary.get(i, j);
            if !c.is_finite_cost() || *c < T::zero() {
                return Err(MatchingError::InvalidCost { row: i, col: j });
            }
        }
    }
    if n == 0 {
        return Ok(first);
    }
    let (_, u, v) = solve(primary);
    let scale = primary
        .data
        .iter()
        .fold(T::zero(), |m, c| if *c > m { c.clone() } else { m });
    let tight = |i: usize, j: usize| {
        first.row_to_col[i] == j || (primary.get(i, j).clone() - u[i].clone() - v[j].clone()).is_tight(&scale)
    };
    // any matching leaving the tight graph costs more than every matching inside it
    let out_of_reach = secondary.data.iter().fold(T::one(), |acc, c| acc + c.clone());
    let restricted = CostMatrix::from_fn(n, n, |i, j| {
        if tight(i, j) {
            secondary.get(i, j).clone()
        } else {
            out_of_reach.clone()
        }
    });
    let second = hungarian_assign(&restricted)?;
    let total = primary.total(&second.row_to_col);
    let stays_tight = second.row_to_col.iter().enumerate().all(|(i, &j)| tight(i, j));
    if !stays_tight || total > first.total {
        return Ok(first);
    }
    Ok(Assignment {
        row_to_col: second.row_to_col,
        total,
    })
}

/// Potentials-based shortest augmenting path solver. Returns the assignment
/// and the final row and column potentials.
fn solve<T: Cost>(cost: &CostMatrix<T>) -> (Vec<usize>, Vec<T>, Vec<T>) {
    let n = cost.rows;
    // 1-based indices; index 0 is a sentinel
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0usize;
        let mut min_slack: Vec<Option<T>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta: Option<T> = None;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost.get(i0 - 1, j - 1).clone() - u[i0].clone() - v[j].clone();
                if min_slack[j].as_ref().is_none_or(|m| reduced < *m) {
                    min_slack[j] = Some(reduced);
                    way[j] = j0;
                }
                let slack = min_slack[j].as_ref().unwrap();
                if delta.as_ref().is_none_or(|d| *slack < *d) {
                    delta = Some(slack.clone());
                    j1 = j;
                }
            }
            let delta = delta.expect("an unused column remains while a row is unmatched");
            for j in 0..=n {
                if used[j] {
                    let r = owner[j];
                    u[r] = u[r].clone() + delta.clone();
                    v[j] = v[j].clone() - delta.clone();
                } else if let Some(m) = min_slack[j].as_mut() {
                    *m = m.clone() - delta.clone();
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[owner[j] - 1] = j - 1;
    }
    (row_to_col, u[1..].to_vec(), v[1..].to_vec())
}

/// Lexicographically smallest perfect matching inside `tight`, starting from
/// the perfect matching `current`.
fn lexicographic_min(tight: &[Vec<bool>], mut current: Vec<usize>) -> Vec<usize> {
    let n = current.len();
    let mut owner = vec![0usize; n];
    for (i, &j) in current.iter().enumerate() {
        owner[j] = i;
    }
    let mut fixed_col = vec![false; n];
    for row in 0..n {
        for col in 0..n {
            if fixed_col[col] || !tight[row][col] {
                continue;
            }
            if current[row] == col {
                break;
            }
            // give `col` to `row`; its previous owner must reach the column
            // `row` releases through an alternating path over later rows
            let displaced = owner[col];
            let released = current[row];
            let mut visited = vec![false; n];
            visited[col] = true;
            let mut trial_current = current.clone();
            let mut trial_owner = owner.clone();
            trial_current[row] = col;
            trial_owner[col] = row;
            if reroute(
                displaced,
                released,
                tight,
                &fixed_col,
                &mut visited,
                &mut trial_current,
                &mut trial_owner,
            ) {
                current = trial_current;
                owner = trial_owner;
                break;
            }
        }
        fixed_col[current[row]] = true;
    }
    current
}

fn reroute(
    row: usize,
    target: usize,
    tight: &[Vec<bool>],
    fixed_col: &[bool],
    visited: &mut [bool],
    current: &mut [usize],
    owner: &mut [usize],
) -> bool {
    for col in 0..tight.len() {
        if visited[col] || fixed_col[col] || !tight[row][col] {
            continue;
        }
        visited[col] = true;
        if col == target || reroute(owner[col], target, tight, fixed_col, visited, current, owner) {
            current[row] = col;
            owner[col] = row;
            return true;
        }
    }
    false
}
