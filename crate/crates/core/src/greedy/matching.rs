//! Maximum-weight bipartite matching of cellular links to channels
//! (Kuhn-Munkres / Hungarian method with potentials).

use crate::model::{sinr, tx_rx_nodes, ChannelId, LinkId, Scenario, Score};

/// `t[i][j]`: weighted rate of cellular link `j` alone on channel `i`, or
/// `Infeasible`. Rows are channels, columns are cellular links (0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeWeightTable {
    rows: usize,
    cols: usize,
    t: Vec<Score>,
}

impl EdgeWeightTable {
    /// Builds a table from rows of equal length.
    pub fn new(rows: Vec<Vec<Score>>) -> Self {
        let n_rows = rows.len();
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged edge weight table");
        EdgeWeightTable { rows: n_rows, cols, t: rows.into_iter().flatten().collect() }
    }

    /// Convenience for finite tables; `None` entries are infeasible edges.
    pub fn from_options(rows: Vec<Vec<Option<f64>>>) -> Self {
        EdgeWeightTable::new(
            rows.into_iter()
                .map(|r| r.into_iter().map(|v| v.map_or(Score::Infeasible, Score::Finite)).collect())
                .collect(),
        )
    }

    pub fn for_scenario(scenario: &Scenario) -> Self {
        EdgeWeightTable::new(
            scenario
                .channels()
                .map(|i| scenario.cellular_links().map(|j| cellular_edge_weight(scenario, i, j)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Score {
        self.t[row * self.cols + col]
    }
}

/// Weighted rate gain of cellular link `j` on an otherwise empty channel
/// `i`; `Infeasible` on a direction mismatch or when the interference-free
/// SNR misses the link's floor.
pub fn cellular_edge_weight(scenario: &Scenario, i: ChannelId, j: LinkId) -> Score {
    if tx_rx_nodes(scenario, j, true, i).is_err() {
        return Score::Infeasible;
    }
    let link = scenario.link(j);
    match sinr(scenario, i, &[j], &[], j, true) {
        Ok(snr) if snr >= link.sinr_min => Score::Finite(link.weight * (1.0 + snr).log2()),
        _ => Score::Infeasible,
    }
}

/// A matching as `(row, col)` pairs sorted by column, with its total weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
    pub total: f64,
}

/// Maximum-weight matching that covers every column through a finite edge.
/// Returns `None` when no such matching exists. Among optimal matchings the
/// one whose row-per-column vector is lexicographically smallest is chosen.
pub fn km_match(weights: &EdgeWeightTable) -> Option<Matching> {
    let (m, n) = (weights.rows(), weights.cols());
    if n == 0 {
        return Some(Matching { pairs: Vec::new(), total: 0.0 });
    }
    if n > m {
        return None;
    }
    let scale: f64 = weights.t.iter().filter_map(|s| s.value()).map(f64::abs).sum();
    let forbidden = 2.0 * scale + 1.0;
    let cost = |col: usize, row: usize| match weights.get(row, col) {
        Score::Finite(v) => -v,
        Score::Infeasible => forbidden,
    };

    let cols: Vec<usize> = (0..n).collect();
    let rows: Vec<usize> = (0..m).collect();
    let (assigned, _) = hungarian(&cols, &rows, &cost);
    if cols.iter().zip(&assigned).any(|(&c, &r)| !weights.get(r, c).is_feasible()) {
        return None;
    }
    let optimum: f64 = cols.iter().zip(&assigned).map(|(&c, &r)| weights.get(r, c).value().unwrap()).sum();
    let tol = 1e-9 * optimum.abs().max(1.0);

    // Fix columns in order to the smallest row that still admits an optimum.
    let mut pairs = Vec::with_capacity(n);
    let mut fixed_total = 0.0;
    let mut free_rows = rows;
    for col in 0..n {
        let rest_cols: Vec<usize> = (col + 1..n).collect();
        let mut chosen = None;
        for (pos, &row) in free_rows.iter().enumerate() {
            let Score::Finite(w) = weights.get(row, col) else { continue };
            let others: Vec<usize> = free_rows.iter().copied().filter(|&r| r != row).collect();
            let rest = if rest_cols.is_empty() {
                Some(0.0)
            } else {
                let (asg, _) = hungarian(&rest_cols, &others, &cost);
                rest_cols.iter().zip(&asg).map(|(&c, &r)| weights.get(r, c).value()).sum::<Option<f64>>()
            };
            if let Some(rest) = rest {
                if fixed_total + w + rest >= optimum - tol {
                    chosen = Some((pos, row, w));
                    break;
                }
            }
        }
        let (pos, row, w) = chosen?;
        free_rows.remove(pos);
        pairs.push((row, col));
        fixed_total += w;
    }
    let total = pairs.iter().map(|&(r, c)| weights.get(r, c).value().unwrap()).sum();
    Some(Matching { pairs, total })
}

/// Minimum-cost assignment of every entry of `workers` to a distinct entry
/// of `jobs` (`workers.len() <= jobs.len()`). Returns the job per worker.
fn hungarian(workers: &[usize], jobs: &[usize], cost: &impl Fn(usize, usize) -> f64) -> (Vec<usize>, f64) {
    let n = workers.len();
    let m = jobs.len();
    let a = |i: usize, j: usize| cost(workers[i - 1], jobs[j - 1]);
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assigned = vec![0; n];
    let mut total = 0.0;
    for j in 1..=m {
        if p[j] != 0 {
            assigned[p[j] - 1] = jobs[j - 1];
            total += a(p[j], j);
        }
    }
    (assigned, total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_beats_anti_diagonal() {
        let t = EdgeWeightTable::from_options(vec![vec![Some(3.0), Some(1.0)], vec![Some(1.0), Some(3.0)]]);
        let m = km_match(&t).unwrap();
        assert_eq!(m.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(m.total, 6.0);
    }

    #[test]
    fn single_entry() {
        let t = EdgeWeightTable::from_options(vec![vec![Some(5.0)]]);
        assert_eq!(km_match(&t).unwrap().total, 5.0);
    }

    #[test]
    fn only_finite_completion_is_taken() {
        let t = EdgeWeightTable::from_options(vec![vec![None, Some(2.0)], vec![Some(4.0), None]]);
        let m = km_match(&t).unwrap();
        assert_eq!(m.pairs, vec![(1, 0), (0, 1)]);
        assert_eq!(m.total, 6.0);
    }

    #[test]
    fn column_without_finite_edge_is_unmatchable() {
        let t = EdgeWeightTable::from_options(vec![vec![Some(1.0), None], vec![Some(2.0), None]]);
        assert!(km_match(&t).is_none());
        let t = EdgeWeightTable::from_options(vec![vec![Some(1.0), None], vec![None, Some(2.0)], vec![None, None]]);
        assert_eq!(km_match(&t).unwrap().total, 3.0);
    }

    #[test]
    fn competing_columns_fall_back_to_the_other_row() {
        // Both columns prefer row 0, but only one finite alternative exists.
        let t = EdgeWeightTable::from_options(vec![vec![Some(9.0), Some(8.0)], vec![None, Some(1.0)]]);
        let m = km_match(&t).unwrap();
        assert_eq!(m.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(m.total, 10.0);
    }

    #[test]
    fn ties_pick_the_lexicographically_smallest_matching() {
        let t = EdgeWeightTable::from_options(vec![vec![Some(1.0); 2]; 3]);
        assert_eq!(km_match(&t).unwrap().pairs, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn empty_table_matches_trivially() {
        let t = EdgeWeightTable::new(vec![vec![]; 3]);
        assert_eq!(km_match(&t).unwrap().total, 0.0);
    }
}
