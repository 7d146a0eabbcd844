use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated price series: at least 4 points, strictly increasing
/// timestamps (epoch seconds), finite positive values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    timestamps: Vec<f64>,
    values: Vec<f64>,
    label: String,
}

pub const MIN_LEN: usize = 4;

impl PriceSeries {
    pub fn new(timestamps: Vec<f64>, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::domain(format!(
                "{} timestamps but {} values",
                timestamps.len(),
                values.len()
            )));
        }
        if values.len() < MIN_LEN {
            return Err(Error::domain(format!(
                "price series needs at least {MIN_LEN} points, got {}",
                values.len()
            )));
        }
        for (i, w) in timestamps.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                return Err(Error::Row {
                    row: i + 2,
                    msg: format!("timestamps not strictly increasing ({} then {})", w[0], w[1]),
                });
            }
        }
        if let Some(i) = timestamps.iter().position(|t| !t.is_finite()) {
            return Err(Error::Row { row: i + 1, msg: "non-finite timestamp".into() });
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Row {
                row: i + 1,
                msg: format!("price must be finite and positive, got {}", values[i]),
            });
        }
        Ok(PriceSeries {
            timestamps,
            values,
            label: label.into(),
        })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_time(&self) -> f64 {
        self.timestamps[0]
    }

    pub fn last_time(&self) -> f64 {
        self.timestamps[self.timestamps.len() - 1]
    }
}
