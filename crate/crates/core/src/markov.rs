//! Row-stochastic matrices and the steady state of the chains they define.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROW_TOLERANCE: f64 = 1e-9;
const PIVOT_EPSILON: f64 = 1e-13;

/// A square matrix whose rows are probability distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct TransitionMatrix(Vec<Vec<f64>>);

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::NotStochastic("empty matrix".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotStochastic(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            check_probability_row(i, row)?;
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::NotStochastic(format!("row {i} sums to {sum}")));
            }
        }
        Ok(TransitionMatrix(rows))
    }

    /// Parses whitespace-separated reals, one matrix row per non-blank line.
    pub fn parse(text: &str) -> Result<Self> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .enumerate()
            .map(|(i, line)| {
                line.split_whitespace()
                    .map(|tok| {
                        tok.parse::<f64>().map_err(|_| {
                            Error::NotStochastic(format!("row {i}: cannot parse {tok:?}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.0[i]
    }

    /// True when some power of the matrix is strictly positive.
    ///
    /// Checked on the zero pattern up to Wielandt's bound `(n-1)^2 + 1`.
    pub fn is_primitive(&self) -> bool {
        let n = self.size();
        let adjacency: Vec<Vec<bool>> = self
            .0
            .iter()
            .map(|row| row.iter().map(|&x| x > 0.0).collect())
            .collect();
        let mut power = adjacency.clone();
        let bound = (n - 1) * (n - 1) + 1;
        for _ in 1..bound {
            if power.iter().flatten().all(|&x| x) {
                return true;
            }
            power = bool_product(&power, &adjacency);
        }
        power.iter().flatten().all(|&x| x)
    }
}

impl TryFrom<Vec<Vec<f64>>> for TransitionMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<TransitionMatrix> for Vec<Vec<f64>> {
    fn from(m: TransitionMatrix) -> Self {
        m.0
    }
}

pub(crate) fn check_probability_row(i: usize, row: &[f64]) -> Result<()> {
    match row
        .iter()
        .find(|x| !x.is_finite() || **x < 0.0 || **x > 1.0)
    {
        Some(x) => Err(Error::NotStochastic(format!(
            "row {i} has entry {x} outside [0, 1]"
        ))),
        None => Ok(()),
    }
}

fn bool_product(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).any(|k| a[i][k] && b[k][j])).collect())
        .collect()
}

/// The stationary distribution `v` with `vT = v` and `Σv = 1`.
///
/// Solves `(Tᵀ − I)v = 0` with the last equation replaced by the
/// normalization, by Gaussian elimination with partial pivoting.
pub fn steady_state(t: &TransitionMatrix) -> Result<Vec<f64>> {
    if !t.is_primitive() {
        return Err(Error::NotErgodic);
    }
    let n = t.size();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| t.row(j)[i]).collect();
            row[i] -= 1.0;
            row.push(0.0);
            row
        })
        .collect();
    a[n - 1] = vec![1.0; n + 1];

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("nonempty range");
        if a[pivot][col].abs() < PIVOT_EPSILON {
            return Err(Error::Singular);
        }
        a.swap(col, pivot);
        for row in col + 1..n {
            let (upper, lower) = a.split_at_mut(row);
            let (pivot_row, target) = (&upper[col], &mut lower[0]);
            let factor = target[col] / pivot_row[col];
            if factor != 0.0 {
                for (t, p) in target[col..].iter_mut().zip(&pivot_row[col..]) {
                    *t -= factor * p;
                }
            }
        }
    }
    let mut v = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * v[k]).sum();
        v[row] = (a[row][n] - tail) / a[row][row];
    }
    // elimination round-off can leave tiny negatives
    for x in &mut v {
        *x = x.max(0.0);
    }
    let sum: f64 = v.iter().sum();
    Ok(v.into_iter().map(|x| x / sum).collect())
}

/// Per-action reward probabilities of the stationary environment that the
/// chain averages out to: `v · R`.
pub fn effective_stationary(t: &TransitionMatrix, reward: &[Vec<f64>]) -> Result<Vec<f64>> {
    if reward.len() != t.size() {
        return Err(Error::InvalidParameter(format!(
            "reward matrix has {} rows for {} states",
            reward.len(),
            t.size()
        )));
    }
    let v = steady_state(t)?;
    let actions = reward[0].len();
    Ok((0..actions)
        .map(|a| v.iter().zip(reward).map(|(vs, row)| vs * row[a]).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    fn tm(rows: &[&[f64]]) -> TransitionMatrix {
        TransitionMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    /// Independent oracle: repeated multiplication from the uniform vector.
    fn power_iteration(t: &TransitionMatrix) -> Vec<f64> {
        let n = t.size();
        let mut v = vec![1.0 / n as f64; n];
        for _ in 0..100_000 {
            let next: Vec<f64> = (0..n)
                .map(|j| (0..n).map(|i| v[i] * t.row(i)[j]).sum())
                .collect();
            let delta = next
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            v = next;
            if delta < 1e-14 {
                break;
            }
        }
        v
    }

    #[test]
    fn symmetric_two_state() {
        let v = steady_state(&tm(&[&[0.9, 0.1], &[0.1, 0.9]])).unwrap();
        assert_abs_diff_eq!(v[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(v[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn asymmetric_two_state_closed_form() {
        // two-state chain: v = (b, a) / (a + b) with a = T[0][1], b = T[1][0]
        let v = steady_state(&tm(&[&[0.2, 0.8], &[0.6, 0.4]])).unwrap();
        assert_abs_diff_eq!(v[0], 0.6 / 1.4, epsilon = 1e-12);
        assert_abs_diff_eq!(v[1], 0.8 / 1.4, epsilon = 1e-12);
    }

    #[test]
    fn four_state_matches_power_iteration() {
        let t = tm(&[
            &[0.3, 0.2, 0.1, 0.4],
            &[0.1, 0.2, 0.5, 0.2],
            &[0.2, 0.2, 0.2, 0.4],
            &[0.2, 0.5, 0.1, 0.2],
        ]);
        let v = steady_state(&t).unwrap();
        for (a, b) in v.iter().zip(power_iteration(&t)) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-10);
        }
        for (a, b) in v
            .iter()
            .zip([4.0 / 21.0, 6.0 / 21.0, 5.0 / 21.0, 6.0 / 21.0])
        {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn effective_environments() {
        let t1 = tm(&[&[0.9, 0.1], &[0.1, 0.9]]);
        let t2 = tm(&[&[0.2, 0.8], &[0.6, 0.4]]);
        let r_switch = vec![vec![0.8, 0.2], vec![0.2, 0.8]];
        let r_same = vec![vec![0.8, 0.2], vec![0.7, 0.3]];
        let e = effective_stationary(&t1, &r_switch).unwrap();
        assert_abs_diff_eq!(e[0], 0.5, epsilon = 1e-12);
        let e = effective_stationary(&t1, &r_same).unwrap();
        assert_abs_diff_eq!(e[0], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(e[1], 0.25, epsilon = 1e-12);
        let e = effective_stationary(&t2, &r_same).unwrap();
        assert_abs_diff_eq!(e[0], (0.6 * 0.8 + 0.8 * 0.7) / 1.4, epsilon = 1e-12);

        let single = tm(&[&[1.0]]);
        assert_eq!(
            effective_stationary(&single, &[vec![0.3, 0.6]]).unwrap(),
            vec![0.3, 0.6]
        );
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(TransitionMatrix::new(vec![]).is_err());
        assert!(TransitionMatrix::new(vec![vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
        assert!(TransitionMatrix::new(vec![vec![1.0, 0.0]]).is_err());
        assert!(TransitionMatrix::parse("0.5 0.5\n0.5 x").is_err());
        let reducible = tm(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(steady_state(&reducible), Err(Error::NotErgodic)));
        let periodic = tm(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(matches!(steady_state(&periodic), Err(Error::NotErgodic)));
    }

    #[test]
    fn parses_plain_text() {
        let t = TransitionMatrix::parse("# chain\n0.9 0.1\n\n 0.1   0.9 \n").unwrap();
        assert_eq!(t.rows(), &[vec![0.9, 0.1], vec![0.1, 0.9]]);
    }

    fn arb_positive_matrix() -> impl Strategy<Value = TransitionMatrix> {
        (1usize..7).prop_flat_map(|n| {
            prop::collection::vec(prop::collection::vec(0.01f64..1.0, n), n).prop_map(|raw| {
                let rows = raw
                    .into_iter()
                    .map(|r| {
                        let s: f64 = r.iter().sum();
                        let mut row: Vec<f64> = r.iter().map(|x| x / s).collect();
                        let drift: f64 = 1.0 - row.iter().sum::<f64>();
                        row[0] += drift;
                        row
                    })
                    .collect();
                TransitionMatrix::new(rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn solution_is_fixed_point(t in arb_positive_matrix()) {
            let v = steady_state(&t).unwrap();
            let n = t.size();
            prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for j in 0..n {
                let vt: f64 = (0..n).map(|i| v[i] * t.row(i)[j]).sum();
                prop_assert!((vt - v[j]).abs() < 1e-6);
            }
            for (a, b) in v.iter().zip(power_iteration(&t)) {
                prop_assert!((a - b).abs() < 1e-8);
            }
        }
    }
}
