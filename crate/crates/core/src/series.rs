//! Date-indexed price series and the trading-day calendar.

use std::collections::BTreeSet;
use std::ops::Range;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{LpplError, Result};

/// Observations on strictly increasing trading dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    label: String,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl PriceSeries {
    pub fn new(label: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(LpplError::Degenerate(format!(
                "{} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        for pair in dates.windows(2) {
            if pair[0] == pair[1] {
                return Err(LpplError::DuplicateDate(pair[1]));
            }
            if pair[0] > pair[1] {
                return Err(LpplError::Degenerate(format!(
                    "dates must be strictly increasing ({} follows {})",
                    pair[1], pair[0]
                )));
            }
        }
        Ok(Self {
            label: label.into(),
            dates,
            values,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.dates.first().copied()
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.dates.last().copied()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Same dates and label, new values.
    pub(crate) fn map_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.dates.len());
        Self {
            label: self.label.clone(),
            dates: self.dates.clone(),
            values,
        }
    }

    /// Sub-series over an index range.
    pub fn slice(&self, range: Range<usize>) -> Self {
        Self {
            label: self.label.clone(),
            dates: self.dates[range.clone()].to_vec(),
            values: self.values[range].to_vec(),
        }
    }

    /// Observations with `from <= date <= to`; either bound may be open.
    pub fn between(&self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> Self {
        let start = from.map_or(0, |d| self.dates.partition_point(|&x| x < d));
        let end = to.map_or(self.len(), |d| self.dates.partition_point(|&x| x <= d));
        self.slice(start..end.max(start))
    }

    /// Index of the first observation on or after `date`.
    pub fn index_on_or_after(&self, date: NaiveDate) -> Option<usize> {
        let i = self.dates.partition_point(|&x| x < date);
        (i < self.len()).then_some(i)
    }

    /// Index of the last observation on or before `date`.
    pub fn index_on_or_before(&self, date: NaiveDate) -> Option<usize> {
        self.dates.partition_point(|&x| x <= date).checked_sub(1)
    }
}

/// Weekend-excluding calendar with an optional holiday list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradingCalendar {
    holidays: BTreeSet<NaiveDate>,
}

impl TradingCalendar {
    pub fn weekends_only() -> Self {
        Self::default()
    }

    pub fn with_holidays(holidays: impl IntoIterator<Item = NaiveDate>) -> Self {
        Self {
            holidays: holidays.into_iter().collect(),
        }
    }

    pub fn holidays(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.holidays.iter().copied()
    }

    pub fn is_trading_day(&self, date: NaiveDate) -> bool {
        !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) && !self.holidays.contains(&date)
    }

    /// First trading day on or after `date`.
    pub fn roll_forward(&self, date: NaiveDate) -> NaiveDate {
        let mut d = date;
        while !self.is_trading_day(d) {
            d = d + Days::new(1);
        }
        d
    }

    /// The `k`-th trading day after (`k > 0`) or before (`k < 0`) `date`.
    pub fn offset(&self, date: NaiveDate, k: i64) -> Result<NaiveDate> {
        if !self.is_trading_day(date) {
            return Err(LpplError::NotTradingDay(date));
        }
        let mut d = date;
        let mut remaining = k.unsigned_abs();
        while remaining > 0 {
            d = if k > 0 {
                d + Days::new(1)
            } else {
                d - Days::new(1)
            };
            if self.is_trading_day(d) {
                remaining -= 1;
            }
        }
        Ok(d)
    }

    /// Signed count of trading days from `from` to `to`; both must be trading days.
    pub fn count_between(&self, from: NaiveDate, to: NaiveDate) -> Result<i64> {
        for d in [from, to] {
            if !self.is_trading_day(d) {
                return Err(LpplError::NotTradingDay(d));
            }
        }
        let (lo, hi, sign) = if from <= to {
            (from, to, 1)
        } else {
            (to, from, -1)
        };
        let count = lo
            .iter_days()
            .skip(1)
            .take_while(|&d| d <= hi)
            .filter(|&d| self.is_trading_day(d))
            .count() as i64;
        Ok(sign * count)
    }

    /// `n` consecutive trading days starting at the first trading day on or after `start`.
    pub fn sequence(&self, start: NaiveDate, n: usize) -> Vec<NaiveDate> {
        let mut dates = Vec::with_capacity(n);
        let mut d = self.roll_forward(start);
        while dates.len() < n {
            if self.is_trading_day(d) {
                dates.push(d);
            }
            d = d + Days::new(1);
        }
        dates
    }
}

/// `calendar.offset(date, k)` as a free function.
pub fn trading_day_offset(calendar: &TradingCalendar, date: NaiveDate, k: i64) -> Result<NaiveDate> {
    calendar.offset(date, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn weekend_skip() {
        let cal = TradingCalendar::weekends_only();
        // 2014-06-12 is a Thursday.
        assert_eq!(cal.offset(ymd(2014, 6, 12), 1).unwrap(), ymd(2014, 6, 13));
        assert_eq!(cal.offset(ymd(2014, 6, 13), 1).unwrap(), ymd(2014, 6, 16));
        assert_eq!(cal.offset(ymd(2014, 6, 12), 5).unwrap(), ymd(2014, 6, 19));
        assert_eq!(cal.offset(ymd(2014, 6, 16), -1).unwrap(), ymd(2014, 6, 13));
    }

    #[test]
    fn holidays_are_skipped_and_rejected() {
        let cal = TradingCalendar::with_holidays([ymd(2014, 7, 4)]);
        assert_eq!(cal.offset(ymd(2014, 7, 3), 1).unwrap(), ymd(2014, 7, 7));
        assert!(matches!(
            cal.offset(ymd(2014, 7, 4), 1),
            Err(LpplError::NotTradingDay(_))
        ));
        assert!(cal.offset(ymd(2014, 7, 5), 0).is_err());
        assert_eq!(cal.count_between(ymd(2014, 7, 3), ymd(2014, 7, 7)).unwrap(), 1);
    }

    #[test]
    fn series_rejects_duplicates_and_disorder() {
        let d = vec![ymd(2014, 6, 12), ymd(2014, 6, 12)];
        assert!(matches!(
            PriceSeries::new("x", d, vec![1.0, 2.0]),
            Err(LpplError::DuplicateDate(_))
        ));
        let d = vec![ymd(2014, 6, 13), ymd(2014, 6, 12)];
        assert!(PriceSeries::new("x", d, vec![1.0, 2.0]).is_err());
        assert!(PriceSeries::new("x", vec![ymd(2014, 6, 12)], vec![]).is_err());
    }

    #[test]
    fn date_lookups() {
        let cal = TradingCalendar::weekends_only();
        let dates = cal.sequence(ymd(2014, 6, 12), 10);
        let s = PriceSeries::new("x", dates, (0..10).map(f64::from).collect()).unwrap();
        assert_eq!(s.index_on_or_after(ymd(2014, 6, 14)), Some(2));
        assert_eq!(s.index_on_or_before(ymd(2014, 6, 14)), Some(1));
        assert_eq!(s.index_on_or_before(ymd(2014, 6, 1)), None);
        assert_eq!(s.between(Some(ymd(2014, 6, 13)), Some(ymd(2014, 6, 17))).len(), 3);
    }

    proptest! {
        #[test]
        fn offset_round_trip(start in 0i64..3000, k in -400i64..400) {
            let cal = TradingCalendar::with_holidays([ymd(2015, 12, 25), ymd(2016, 1, 1)]);
            let date = cal.roll_forward(ymd(2012, 1, 2) + Days::new(start as u64));
            let there = cal.offset(date, k).unwrap();
            prop_assert_eq!(cal.offset(there, -k).unwrap(), date);
            prop_assert_eq!(cal.count_between(date, there).unwrap(), k);
        }
    }
}
