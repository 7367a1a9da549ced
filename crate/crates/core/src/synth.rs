//! Seeded synthetic LPPL series and a brute-force profiled-SSR grid.
//!
//! Noise is additive Gaussian on price, drawn from `ChaCha8` seeded with a `u64`, so a
//! given seed yields the same series on every platform.

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LpplError, Result};
use crate::fit::solve_linear;
use crate::model::{check_constraints, evaluate_lppl, ConstraintSet, LpplParams};
use crate::series::{PriceSeries, TradingCalendar};

/// Name of the pseudo-random generator recorded in ground-truth files.
pub const GENERATOR: &str = "chacha8";

/// Ground truth for a synthetic series. Serialized as the truth sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub params: LpplParams,
    pub n: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub start_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub generator: String,
    #[serde(flatten)]
    pub spec: SynthSpec,
    pub lambda: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
}

#[derive(Debug, Clone)]
pub struct Synthetic {
    pub series: PriceSeries,
    /// Noise-free model values.
    pub model: Vec<f64>,
    pub truth: GroundTruth,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(LpplError::Config(format!("need n >= 2, got {}", self.n)));
        }
        if !(self.params.tc > (self.n - 1) as f64) {
            return Err(LpplError::Config(format!(
                "critical time {} must lie beyond the last index {}",
                self.params.tc,
                self.n - 1
            )));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(LpplError::Config(format!(
                "noise sigma must be a finite non-negative number, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// Generates `series[i] = model(i) + noise_i` on weekday dates from `spec.start_date`.
pub fn generate(spec: &SynthSpec) -> Result<Synthetic> {
    spec.validate()?;
    let model = (0..spec.n)
        .map(|i| evaluate_lppl(&spec.params, i as f64))
        .collect::<Result<Vec<f64>>>()?;
    let mut values = model.clone();
    if spec.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| LpplError::Config(e.to_string()))?;
        for v in &mut values {
            *v += normal.sample(&mut rng);
        }
    }
    let dates = TradingCalendar::weekends_only().sequence(spec.start_date, spec.n);
    let truth = GroundTruth {
        generator: GENERATOR.to_string(),
        spec: spec.clone(),
        lambda: spec.params.lambda(),
        amplitude: spec.params.amplitude(),
        phase: spec.params.phase(),
        first_date: dates[0],
        last_date: dates[spec.n - 1],
    };
    let series = PriceSeries::new("synthetic", dates, values)?;
    Ok(Synthetic {
        series,
        model,
        truth,
    })
}

/// Inclusive, evenly spaced axis of `count` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    /// A one-node axis.
    pub fn point(value: f64) -> Self {
        Self::new(value, value, 1)
    }

    pub fn node(&self, i: usize) -> f64 {
        if self.count <= 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
        }
    }

    /// Node spacing; zero for a single node.
    pub fn cell(&self) -> f64 {
        if self.count <= 1 {
            0.0
        } else {
            (self.max - self.min) / (self.count - 1) as f64
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.count == 0 || !self.min.is_finite() || !self.max.is_finite() || self.max < self.min
        {
            return Err(LpplError::Config(format!("invalid {name} axis {self:?}")));
        }
        Ok(())
    }
}

/// Default cap on the number of nodes in [`brute_force_ssr_grid`].
pub const DEFAULT_GRID_CAP: usize = 2_000_000;

/// Profiled SSR on every node of a `(tc, m, omega)` grid.
#[derive(Debug, Clone)]
pub struct SsrGrid {
    pub tc: GridAxis,
    pub m: GridAxis,
    pub omega: GridAxis,
    /// Row-major values, `omega` fastest. Infeasible or singular nodes hold `+inf`.
    pub ssr: Vec<f64>,
    pub argmin: [usize; 3],
    pub min_ssr: f64,
}

impl SsrGrid {
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.ssr[(i * self.m.count + j) * self.omega.count + k]
    }

    /// `(tc, m, omega)` at the argmin node.
    pub fn argmin_point(&self) -> [f64; 3] {
        [
            self.tc.node(self.argmin[0]),
            self.m.node(self.argmin[1]),
            self.omega.node(self.argmin[2]),
        ]
    }
}

/// Evaluates the profiled SSR at every grid node.
///
/// With `constraints` set, nodes whose least-squares parameters violate them count as
/// `+inf`. Ties for the minimum resolve to the lowest linear index.
pub fn brute_force_ssr_grid(
    values: &[f64],
    tc: GridAxis,
    m: GridAxis,
    omega: GridAxis,
    constraints: Option<&ConstraintSet>,
    cap: usize,
) -> Result<SsrGrid> {
    tc.validate("tc")?;
    m.validate("m")?;
    omega.validate("omega")?;
    let nodes = tc
        .count
        .checked_mul(m.count)
        .and_then(|x| x.checked_mul(omega.count))
        .unwrap_or(usize::MAX);
    if nodes > cap {
        return Err(LpplError::GridTooLarge { nodes, cap });
    }
    let window_end = values.len().saturating_sub(1) as f64;
    let ssr: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|idx| {
            let k = idx % omega.count;
            let j = (idx / omega.count) % m.count;
            let i = idx / (omega.count * m.count);
            let (t, e, w) = (tc.node(i), m.node(j), omega.node(k));
            match solve_linear(values, t, e, w) {
                Ok(sol) => {
                    let feasible = constraints.map_or(true, |set| {
                        let params = LpplParams {
                            a: sol.a,
                            b: sol.b,
                            c1: sol.c1,
                            c2: sol.c2,
                            m: e,
                            omega: w,
                            tc: t,
                        };
                        check_constraints(&params, set, window_end).is_empty()
                    });
                    if feasible {
                        sol.ssr
                    } else {
                        f64::INFINITY
                    }
                }
                Err(_) => f64::INFINITY,
            }
        })
        .collect();
    let (best, min_ssr) = ssr
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| {
            if v < bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    let argmin = [
        best / (omega.count * m.count),
        (best / omega.count) % m.count,
        best % omega.count,
    ];
    Ok(SsrGrid {
        tc,
        m,
        omega,
        ssr,
        argmin,
        min_ssr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(sigma: f64, seed: u64) -> SynthSpec {
        SynthSpec {
            params: LpplParams::from_amplitude_phase(100.0, -1.0, 0.5, 0.4, 0.5, 9.0, 1020.0),
            n: 1000,
            noise_sigma: sigma,
            seed,
            start_date: NaiveDate::from_ymd_opt(2014, 6, 12).unwrap(),
        }
    }

    #[test]
    fn noiseless_matches_model() {
        let s = generate(&spec(0.0, 1)).unwrap();
        for (i, v) in s.series.values().iter().enumerate() {
            assert_eq!(*v, evaluate_lppl(&s.truth.spec.params, i as f64).unwrap());
        }
        // Weekdays only.
        assert_eq!(s.series.dates()[2], NaiveDate::from_ymd_opt(2014, 6, 16).unwrap());
    }

    #[test]
    fn same_seed_same_series() {
        let a = generate(&spec(1.0, 42)).unwrap();
        let b = generate(&spec(1.0, 42)).unwrap();
        let c = generate(&spec(1.0, 43)).unwrap();
        assert_eq!(a.series, b.series);
        assert_ne!(a.series, c.series);
    }

    #[test]
    fn noise_has_requested_scale_and_is_white() {
        let s = generate(&spec(1.0, 7)).unwrap();
        let eps: Vec<f64> = s
            .series
            .values()
            .iter()
            .zip(&s.model)
            .map(|(v, m)| v - m)
            .collect();
        let n = eps.len() as f64;
        let mean = eps.iter().sum::<f64>() / n;
        let var = eps.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((0.9..=1.1).contains(&var.sqrt()), "{}", var.sqrt());
        let lag1 = eps
            .windows(2)
            .map(|w| (w[0] - mean) * (w[1] - mean))
            .sum::<f64>()
            / (var * (n - 1.0));
        assert!(lag1.abs() < 0.1, "{lag1}");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = spec(0.0, 1);
        s.params.tc = 999.0;
        assert!(generate(&s).is_err());
        let mut s = spec(-1.0, 1);
        s.n = 10;
        assert!(generate(&s).is_err());
    }

    #[test]
    fn grid_finds_truth_node() {
        let mut sp = spec(0.0, 1);
        sp.n = 200;
        sp.params.tc = 215.0;
        let s = generate(&sp).unwrap();
        let grid = brute_force_ssr_grid(
            s.series.values(),
            GridAxis::new(211.0, 219.0, 9),
            GridAxis::new(0.3, 0.7, 9),
            GridAxis::new(8.0, 10.0, 9),
            Some(&ConstraintSet::default()),
            DEFAULT_GRID_CAP,
        )
        .unwrap();
        assert_eq!(grid.argmin, [4, 4, 4]);
        assert!(grid.min_ssr < 1e-16);
        assert_eq!(grid.argmin_point(), [215.0, 0.5, 9.0]);
    }

    #[test]
    fn single_node_grid_and_cap() {
        let s = generate(&SynthSpec {
            n: 60,
            ..spec(0.1, 3)
        })
        .unwrap();
        let values = s.series.values();
        let one = brute_force_ssr_grid(
            values,
            GridAxis::point(1020.0),
            GridAxis::point(0.5),
            GridAxis::point(9.0),
            None,
            1,
        )
        .unwrap();
        assert_eq!(one.argmin, [0, 0, 0]);
        assert_eq!(one.ssr.len(), 1);
        let err = brute_force_ssr_grid(
            values,
            GridAxis::new(70.0, 80.0, 10),
            GridAxis::new(0.1, 0.9, 10),
            GridAxis::new(6.0, 13.0, 10),
            None,
            999,
        );
        assert!(matches!(err, Err(LpplError::GridTooLarge { nodes: 1000, cap: 999 })));
    }
}
