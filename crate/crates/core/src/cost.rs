//! Monotone age-cost functions `g(a)` with a saturation cap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default saturation level for every cost function.
pub const DEFAULT_COST_CAP: f64 = 1e9;

/// Shape of an age-cost function, evaluated at an integer age `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostShape {
    /// `slope * a`
    Linear { slope: f64 },
    /// `scale * a^exponent`
    Power {
        exponent: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `scale * exp(rate * a)`
    Exponential {
        #[serde(default = "one")]
        rate: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `1` if `a >= threshold`, else `0`.
    Indicator { threshold: u64 },
    /// `values[a - 1]`; ages past the end take the last entry.
    Table { values: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl Default for CostShape {
    fn default() -> Self {
        CostShape::Linear { slope: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostFunction {
    shape: CostShape,
    cap: f64,
}

impl CostFunction {
    pub fn new(shape: CostShape, cap: f64) -> Result<Self> {
        if !(cap > 0.0) || cap.is_nan() {
            return Err(Error::Cost(format!("cap must be positive, got {cap}")));
        }
        match &shape {
            CostShape::Linear { slope } if !(*slope >= 0.0) || !slope.is_finite() => {
                return Err(Error::Cost(format!("linear slope must be >= 0, got {slope}")))
            }
            CostShape::Power { exponent, scale }
                if !(*exponent > 0.0 && *scale > 0.0) || !exponent.is_finite() =>
            {
                return Err(Error::Cost(format!(
                    "power needs exponent > 0 and scale > 0, got ({exponent}, {scale})"
                )))
            }
            CostShape::Exponential { rate, scale } if !(*rate >= 0.0 && *scale > 0.0) => {
                return Err(Error::Cost(format!(
                    "exponential needs rate >= 0 and scale > 0, got ({rate}, {scale})"
                )))
            }
            CostShape::Indicator { threshold } if *threshold == 0 => {
                return Err(Error::Cost("indicator threshold must be >= 1".into()))
            }
            CostShape::Table { values } => {
                if values.is_empty() {
                    return Err(Error::Cost("table must not be empty".into()));
                }
                if values[0] < 0.0 || values.windows(2).any(|w| !(w[1] >= w[0])) {
                    return Err(Error::Cost(
                        "table must be nonnegative and nondecreasing".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(CostFunction { shape, cap })
    }

    pub fn linear(slope: f64) -> Self {
        Self::new(CostShape::Linear { slope }, DEFAULT_COST_CAP).expect("valid slope")
    }

    pub fn shape(&self) -> &CostShape {
        &self.shape
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// `min(g(age), cap)`. `u64::MAX` stands for an unbounded age.
    pub fn eval(&self, age: u64) -> f64 {
        let a = age as f64;
        let raw = match &self.shape {
            CostShape::Linear { slope } => slope * a,
            CostShape::Power { exponent, scale } => scale * a.powf(*exponent),
            CostShape::Exponential { rate, scale } => scale * (rate * a).exp(),
            CostShape::Indicator { threshold } => {
                if age >= *threshold {
                    1.0
                } else {
                    0.0
                }
            }
            CostShape::Table { values } => {
                let idx = (age.max(1) as usize).min(values.len()) - 1;
                values[idx]
            }
        };
        if raw.is_nan() {
            self.cap
        } else {
            raw.min(self.cap)
        }
    }
}
