//! Ordinary least squares for the four linear amplitudes at fixed `(tc, m, omega)`.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{LpplError, Result};

/// Condition-number cutoff (on the column-normalised design) above which a solve is rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Number of regressors in the linearised model.
pub const N_LINEAR: usize = 4;

/// Least-squares amplitudes and the resulting sum of squared residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSolution {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub ssr: f64,
    /// Condition number of the column-normalised design matrix.
    pub condition: f64,
}

impl LinearSolution {
    pub fn amplitude(&self) -> f64 {
        self.c1.hypot(self.c2)
    }
}

/// Solves for `(A, B, C1, C2)` on observations at indices `0..values.len()`.
///
/// The regressors are `1`, `f = (tc - t)^m`, `f cos(omega ln(tc - t))` and
/// `f sin(omega ln(tc - t))`. Columns are normalised to unit length before a Householder QR
/// so the condition check is independent of the price scale; the observations ride along
/// as a fifth column and the SSR is read off the rotated tail.
pub fn solve_linear(values: &[f64], tc: f64, m: f64, omega: f64) -> Result<LinearSolution> {
    let n = values.len();
    if n <= N_LINEAR {
        return Err(LpplError::Domain(format!(
            "need at least {} observations for the linear solve, got {n}",
            N_LINEAR + 1
        )));
    }
    let last = (n - 1) as f64;
    if !(tc > last) || !tc.is_finite() {
        return Err(LpplError::Domain(format!(
            "critical time {tc} must lie after the last index {last}"
        )));
    }
    if !m.is_finite() || !omega.is_finite() {
        return Err(LpplError::Domain(format!(
            "non-finite exponent or frequency (m = {m}, omega = {omega})"
        )));
    }

    // Column-major: four regressors followed by the observations.
    let mut cols = vec![0.0; (N_LINEAR + 1) * n];
    for (i, &y) in values.iter().enumerate() {
        let log_dt = (tc - i as f64).ln();
        let power = (m * log_dt).exp();
        let (sin, cos) = (omega * log_dt).sin_cos();
        cols[i] = 1.0;
        cols[n + i] = power;
        cols[2 * n + i] = power * cos;
        cols[3 * n + i] = power * sin;
        cols[4 * n + i] = y;
    }

    let mut scale = [0.0; N_LINEAR];
    for (j, s) in scale.iter_mut().enumerate() {
        let column = &mut cols[j * n..(j + 1) * n];
        let norm = column.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(LpplError::RankDeficient(f64::INFINITY));
        }
        column.iter_mut().for_each(|v| *v /= norm);
        *s = norm;
    }

    let mut r = Matrix4::<f64>::zeros();
    for k in 0..N_LINEAR {
        let (head, tail) = cols.split_at_mut((k + 1) * n);
        let v = &mut head[k * n + k..];
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(LpplError::RankDeficient(f64::INFINITY));
        }
        let alpha = if v[0] > 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let v_norm2 = v.iter().map(|x| x * x).sum::<f64>();
        r[(k, k)] = alpha;
        for j in k + 1..=N_LINEAR {
            let column = &mut tail[(j - k - 1) * n + k..(j - k) * n];
            let dot: f64 = v.iter().zip(column.iter()).map(|(a, b)| a * b).sum();
            let factor = 2.0 * dot / v_norm2;
            column.iter_mut().zip(v.iter()).for_each(|(c, a)| *c -= factor * a);
            if j < N_LINEAR {
                r[(k, j)] = column[0];
            }
        }
    }

    let singular = r.singular_values();
    let condition = singular.max() / singular.min();
    if !(condition < CONDITION_LIMIT) {
        return Err(LpplError::RankDeficient(condition));
    }

    let rotated = &cols[N_LINEAR * n..];
    let head = Vector4::from_column_slice(&rotated[..N_LINEAR]);
    let coef = r
        .solve_upper_triangular(&head)
        .ok_or(LpplError::RankDeficient(condition))?;
    let ssr = rotated[N_LINEAR..].iter().map(|x| x * x).sum::<f64>();

    Ok(LinearSolution {
        a: coef[0] / scale[0],
        b: coef[1] / scale[1],
        c1: coef[2] / scale[2],
        c2: coef[3] / scale[3],
        ssr,
        condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evaluate_lppl, LpplParams};

    #[test]
    fn constant_series() {
        let values = vec![7.0; 60];
        let sol = solve_linear(&values, 70.0, 0.5, 9.0).unwrap();
        assert!((sol.a - 7.0).abs() < 1e-10);
        assert!(sol.b.abs() < 1e-10 && sol.c1.abs() < 1e-10 && sol.c2.abs() < 1e-10);
        assert!(sol.ssr < 1e-20);
    }

    #[test]
    fn recovers_planted_amplitudes() {
        let truth = LpplParams {
            a: 50.0,
            b: -1.5,
            c1: 0.3,
            c2: -0.2,
            m: 0.6,
            omega: 8.0,
            tc: 215.0,
        };
        let values: Vec<f64> = (0..200)
            .map(|i| evaluate_lppl(&truth, i as f64).unwrap())
            .collect();
        let sol = solve_linear(&values, truth.tc, truth.m, truth.omega).unwrap();
        for (got, want) in [
            (sol.a, truth.a),
            (sol.b, truth.b),
            (sol.c1, truth.c1),
            (sol.c2, truth.c2),
        ] {
            assert!((got - want).abs() <= 1e-8 * want.abs(), "{got} vs {want}");
        }
        let norm2: f64 = values.iter().map(|v| v * v).sum();
        assert!(sol.ssr <= 1e-16 * norm2);
    }

    #[test]
    fn rejects_bad_domains() {
        let values = vec![1.0; 10];
        assert!(matches!(
            solve_linear(&values, 9.0, 0.5, 9.0),
            Err(LpplError::Domain(_))
        ));
        assert!(matches!(
            solve_linear(&values[..4], 20.0, 0.5, 9.0),
            Err(LpplError::Domain(_))
        ));
    }

    #[test]
    fn collinear_design_is_rank_deficient() {
        // m = 0 makes the power-law column identical to the constant column.
        let values: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        assert!(matches!(
            solve_linear(&values, 60.0, 0.0, 9.0),
            Err(LpplError::RankDeficient(_))
        ));
    }
}
