//! Observed and simulated datasets.
//!
//! Univariate families store plain values. Regression families store
//! `(covariate, response)` pairs; the response is the modelled quantity.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};

/// A single datapoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Scalar(f64),
    Pair { x: f64, y: f64 },
}

impl Point {
    /// The covariate of a pair, or the value itself for a scalar point.
    pub fn x(&self) -> f64 {
        match *self {
            Point::Scalar(v) => v,
            Point::Pair { x, .. } => x,
        }
    }

    /// The response of a pair; `None` for scalar points.
    pub fn y(&self) -> Option<f64> {
        match *self {
            Point::Scalar(_) => None,
            Point::Pair { y, .. } => Some(y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    points: Vec<Point>,
}

impl Dataset {
    pub fn scalars(values: Vec<f64>) -> Self {
        Self {
            points: values.into_iter().map(Point::Scalar).collect(),
        }
    }

    pub fn pairs(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(usage(format!(
                "covariate/response length mismatch: {} vs {}",
                xs.len(),
                ys.len()
            )));
        }
        Ok(Self {
            points: xs
                .iter()
                .zip(ys)
                .map(|(&x, &y)| Point::Pair { x, y })
                .collect(),
        })
    }

    pub fn from_points(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn is_regression(&self) -> bool {
        matches!(self.points.first(), Some(Point::Pair { .. }))
    }

    /// Covariates of a regression dataset, `None` for scalar data.
    pub fn covariates(&self) -> Option<Vec<f64>> {
        if !self.is_regression() {
            return None;
        }
        Some(self.points.iter().map(Point::x).collect())
    }

    /// Splits into the first `n` points and the remainder.
    pub fn split_at(&self, n: usize) -> (Dataset, Dataset) {
        let n = n.min(self.points.len());
        let (a, b) = self.points.split_at(n);
        (Dataset::from_points(a.to_vec()), Dataset::from_points(b.to_vec()))
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}
