//! Correlations, standardisation, equal-weight baskets and price inversion.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{LpplError, Result};
use crate::series::PriceSeries;

/// Target mean of [`standardize`].
pub const STANDARD_MEAN: f64 = 2.0;

/// Two series restricted to the dates they share.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    pub dates: Vec<NaiveDate>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl AlignedPair {
    /// Inner join on exact dates. Needs at least three common dates.
    pub fn align(x: &PriceSeries, y: &PriceSeries) -> Result<Self> {
        let (mut i, mut j) = (0, 0);
        let mut pair = AlignedPair {
            dates: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
        };
        let (dx, dy) = (x.dates(), y.dates());
        while i < dx.len() && j < dy.len() {
            match dx[i].cmp(&dy[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    pair.dates.push(dx[i]);
                    pair.x.push(x.values()[i]);
                    pair.y.push(y.values()[j]);
                    i += 1;
                    j += 1;
                }
            }
        }
        if pair.dates.len() < 3 {
            return Err(LpplError::Degenerate(format!(
                "{} and {} share {} dates, at least 3 required",
                x.label(),
                y.label(),
                pair.dates.len()
            )));
        }
        Ok(pair)
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

/// Pearson product-moment coefficient of two equal-length slices.
pub fn pearson_values(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(LpplError::Degenerate(format!(
            "need two equal-length sequences of at least 2 values, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0) || !(syy > 0.0) {
        return Err(LpplError::Degenerate(
            "correlation undefined for a constant sequence".into(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub fn pearson(pair: &AlignedPair) -> Result<f64> {
    pearson_values(&pair.x, &pair.y)
}

/// How returns are formed from levels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnKind {
    /// `p[i+1] - p[i]`.
    #[default]
    Difference,
    /// `ln(p[i+1] / p[i])`; levels must be positive.
    Log,
}

fn differences(values: &[f64], kind: ReturnKind) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(LpplError::Degenerate(format!(
            "returns need at least 2 observations, got {}",
            values.len()
        )));
    }
    match kind {
        ReturnKind::Difference => Ok(values.windows(2).map(|w| w[1] - w[0]).collect()),
        ReturnKind::Log => {
            if values.iter().any(|v| !(*v > 0.0)) {
                return Err(LpplError::Domain(
                    "log returns need strictly positive levels".into(),
                ));
            }
            Ok(values.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
        }
    }
}

/// First differences, dated by the later observation of each pair.
pub fn returns(series: &PriceSeries) -> Result<PriceSeries> {
    returns_of_kind(series, ReturnKind::Difference)
}

pub fn returns_of_kind(series: &PriceSeries, kind: ReturnKind) -> Result<PriceSeries> {
    let values = differences(series.values(), kind)?;
    PriceSeries::new(series.label(), series.dates()[1..].to_vec(), values)
}

fn standardize_values(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(LpplError::Degenerate(
            "standardisation needs at least 2 observations".into(),
        ));
    }
    let mu = mean(values);
    let sd = sample_std(values);
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(LpplError::Degenerate(
            "cannot standardise a constant series".into(),
        ));
    }
    Ok(values
        .iter()
        .map(|v| (v - mu) / sd + STANDARD_MEAN)
        .collect())
}

/// Rescales to sample mean 2 and sample standard deviation 1.
pub fn standardize(series: &PriceSeries) -> Result<PriceSeries> {
    Ok(series.map_values(standardize_values(series.values())?))
}

/// Element-wise reciprocal; turns a positive bubble into a negative one and back.
pub fn invert_price(series: &PriceSeries) -> Result<PriceSeries> {
    if let Some((i, v)) = series
        .values()
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0))
    {
        return Err(LpplError::Domain(format!(
            "cannot invert non-positive value {v} on {}",
            series.dates()[i]
        )));
    }
    Ok(series.map_values(series.values().iter().map(|v| 1.0 / v).collect()))
}

/// How basket components are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasketMode {
    /// Standardise each component, average, standardise the average.
    #[default]
    Standardized,
    /// Average the raw components, then standardise the average.
    RawSum,
}

/// Equal-weight basket on the dates every component shares.
///
/// Per-date values are summed in sorted order, so the result does not depend on the
/// order of `components`.
pub fn build_basket(components: &[PriceSeries], mode: BasketMode) -> Result<PriceSeries> {
    if components.len() < 2 {
        return Err(LpplError::Degenerate(format!(
            "a basket needs at least 2 components, got {}",
            components.len()
        )));
    }
    let mut common: BTreeMap<NaiveDate, usize> = BTreeMap::new();
    for c in components {
        for d in c.dates() {
            *common.entry(*d).or_default() += 1;
        }
    }
    let dates: Vec<NaiveDate> = common
        .into_iter()
        .filter_map(|(d, k)| (k == components.len()).then_some(d))
        .collect();
    if dates.len() < 3 {
        return Err(LpplError::Degenerate(format!(
            "basket components share {} dates, at least 3 required",
            dates.len()
        )));
    }

    let mut columns = Vec::with_capacity(components.len());
    for c in components {
        let values: Vec<f64> = dates
            .iter()
            .map(|d| c.values()[c.index_on_or_after(*d).expect("common date")])
            .collect();
        let column = match mode {
            BasketMode::Standardized => standardize_values(&values).map_err(|_| {
                LpplError::Degenerate(format!("component {} is constant", c.label()))
            })?,
            BasketMode::RawSum => values,
        };
        columns.push(column);
    }

    let k = columns.len() as f64;
    let averaged: Vec<f64> = (0..dates.len())
        .map(|i| {
            let mut row: Vec<f64> = columns.iter().map(|c| c[i]).collect();
            row.sort_by(f64::total_cmp);
            row.iter().sum::<f64>() / k
        })
        .collect();
    PriceSeries::new("basket", dates, standardize_values(&averaged)?)
}

/// Level and return correlation of one instrument against the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub name: String,
    pub level_corr: f64,
    pub return_corr: f64,
    pub n_obs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub reference: String,
    pub return_kind: ReturnKind,
    pub rows: Vec<CorrelationRow>,
}

/// Pearson correlations of each series against `reference`, on levels and on returns.
///
/// Each pair is aligned first; returns are then formed on the aligned levels.
pub fn correlation_report(
    reference: &PriceSeries,
    others: &[PriceSeries],
    kind: ReturnKind,
) -> Result<CorrelationReport> {
    let rows = others
        .iter()
        .map(|other| {
            let pair = AlignedPair::align(other, reference)?;
            let rx = differences(&pair.x, kind)?;
            let ry = differences(&pair.y, kind)?;
            Ok(CorrelationRow {
                name: other.label().to_string(),
                level_corr: pearson(&pair)?,
                return_corr: pearson_values(&rx, &ry)?,
                n_obs: pair.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrelationReport {
        reference: reference.label().to_string(),
        return_kind: kind,
        rows,
    })
}
