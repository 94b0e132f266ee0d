use serde::{Deserialize, Serialize};

use crate::mutation::Mutant;
use crate::par;
use crate::pta::to_pta;
use crate::Rational;

use super::{detect_mutant, execute_on, DetectionResult, TestError, TestSuite};

/// Detection outcome of every (test, live mutant) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KillMatrix {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    /// `cells[row][column]`.
    pub cells: Vec<Vec<DetectionResult>>,
}

impl KillMatrix {
    /// Matrix from plain kill flags (deviation 1 where killed, 0 elsewhere).
    pub fn from_kills(rows: Vec<String>, columns: Vec<String>, kills: &[Vec<bool>]) -> Self {
        let cells = kills
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&k| DetectionResult {
                        detected: k,
                        max_deviation: if k { Rational::from_int(1) } else { Rational::ZERO },
                        first_index: k.then_some(1),
                    })
                    .collect()
            })
            .collect();
        KillMatrix { rows, columns, cells }
    }

    /// Columns killed by at least one of `rows`.
    pub fn killed_by(&self, rows: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut killed = vec![false; self.columns.len()];
        for r in rows {
            for (k, cell) in killed.iter_mut().zip(&self.cells[r]) {
                *k |= cell.detected;
            }
        }
        killed
    }

    /// `(test, mutant, first index)` for every detecting cell, row-major.
    pub fn detected(&self) -> Vec<(String, String, usize)> {
        let mut out = Vec::new();
        for (r, row) in self.cells.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                if let Some(i) = cell.first_index {
                    out.push((self.rows[r].clone(), self.columns[c].clone(), i));
                }
            }
        }
        out
    }

    /// The matrix keeping only the rows at `rows` (ascending).
    pub fn select_rows(&self, rows: &[usize]) -> KillMatrix {
        KillMatrix {
            rows: rows.iter().map(|&r| self.rows[r].clone()).collect(),
            columns: self.columns.clone(),
            cells: rows.iter().map(|&r| self.cells[r].clone()).collect(),
        }
    }
}

/// Execute every test on every live mutant. Cells are computed in parallel
/// and assembled by index, so the result is independent of scheduling.
pub fn build_kill_matrix(suite: &TestSuite, live: &[&Mutant], threshold: Rational) -> Result<KillMatrix, TestError> {
    let nets = par::map(live, |m| to_pta(&m.model));
    let cols = live.len();
    let flat = par::map_range(suite.tests.len() * cols, |i| {
        let test = &suite.tests[i / cols];
        let observed = execute_on(&nets[i % cols], test)?;
        detect_mutant(&test.expected, &observed, threshold)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let cells =
        if cols == 0 { vec![Vec::new(); suite.tests.len()] } else { flat.chunks(cols).map(<[_]>::to_vec).collect() };
    Ok(KillMatrix { rows: suite.ids(), columns: live.iter().map(|m| m.id.clone()).collect(), cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub killed: usize,
    pub live: usize,
    pub value: f64,
}

impl Score {
    pub fn fraction(&self) -> Rational {
        if self.live == 0 {
            Rational::from_int(1)
        } else {
            Rational::new(self.killed as i64, self.live as i64)
        }
    }
}

/// Share of live mutants detected by some test; 1 when nothing is live.
pub fn mutation_score(matrix: &KillMatrix) -> Score {
    let live = matrix.columns.len();
    let killed = matrix.killed_by(0..matrix.rows.len()).into_iter().filter(|&k| k).count();
    let value = if live == 0 { 1.0 } else { killed as f64 / live as f64 };
    Score { killed, live, value }
}

/// Indices of the rows kept by greedy minimization. Later tests are
/// considered for removal first, so among tests with identical kill sets the
/// earliest survives.
pub(crate) fn minimize_rows(matrix: &KillMatrix) -> Vec<usize> {
    let mut kept: Vec<usize> = (0..matrix.rows.len()).collect();
    let target = matrix.killed_by(kept.iter().copied());
    for r in (0..matrix.rows.len()).rev() {
        let without: Vec<usize> = kept.iter().copied().filter(|&k| k != r).collect();
        if matrix.killed_by(without.iter().copied()) == target {
            kept = without;
        }
    }
    kept
}

/// Drop tests that do not contribute to the killed-mutant set. The result
/// kills exactly what `suite` kills, keeps suite order, and removing any
/// remaining test would lose a kill.
pub fn minimize_suite(suite: &TestSuite, matrix: &KillMatrix) -> TestSuite {
    let kept: Vec<String> = minimize_rows(matrix).into_iter().map(|r| matrix.rows[r].clone()).collect();
    suite.retain_ids(&kept)
}
