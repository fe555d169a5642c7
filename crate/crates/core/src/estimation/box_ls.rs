//! Exact solver for two-variable box-constrained linear least squares.
//!
//! The objective `‖A x − b‖²` is a convex quadratic in `x = (α, β)`. If the
//! unconstrained minimiser lies in the box it is the answer; otherwise the
//! constrained minimiser lies on the boundary, so it is one of the four edge
//! minimisers (one coordinate pinned, the other minimised in closed form and
//! clamped) or one of the four corners.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::unit_interval;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            alpha_min: 0.0,
            alpha_max: 1.0,
            beta_min: 0.0,
            beta_max: 1.0,
        }
    }
}

impl Bounds {
    pub fn new(alpha_min: f64, alpha_max: f64, beta_min: f64, beta_max: f64) -> Result<Self> {
        let bounds = Self {
            alpha_min,
            alpha_max,
            beta_min,
            beta_max,
        };
        bounds.validate()?;
        Ok(bounds)
    }

    pub fn validate(&self) -> Result<()> {
        unit_interval("alpha_min", self.alpha_min)?;
        unit_interval("alpha_max", self.alpha_max)?;
        unit_interval("beta_min", self.beta_min)?;
        unit_interval("beta_max", self.beta_max)?;
        if self.alpha_min > self.alpha_max {
            return Err(Error::invalid("bounds", "alpha_min exceeds alpha_max"));
        }
        if self.beta_min > self.beta_max {
            return Err(Error::invalid("bounds", "beta_min exceeds beta_max"));
        }
        Ok(())
    }

    pub fn contains(&self, alpha: f64, beta: f64) -> bool {
        (self.alpha_min..=self.alpha_max).contains(&alpha)
            && (self.beta_min..=self.beta_max).contains(&beta)
    }
}

/// Which sides of the bounds box the solution lies on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveBounds {
    pub alpha_min: bool,
    pub alpha_max: bool,
    pub beta_min: bool,
    pub beta_max: bool,
}

impl ActiveBounds {
    fn at(bounds: &Bounds, alpha: f64, beta: f64) -> Self {
        Self {
            alpha_min: alpha == bounds.alpha_min,
            alpha_max: alpha == bounds.alpha_max,
            beta_min: beta == bounds.beta_min,
            beta_max: beta == bounds.beta_max,
        }
    }

    pub fn any(&self) -> bool {
        self.alpha_min || self.alpha_max || self.beta_min || self.beta_max
    }
}

/// `none`, or the active sides joined with `|`, e.g. `alpha_min|beta_max`.
impl fmt::Display for ActiveBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [
            (self.alpha_min, "alpha_min"),
            (self.alpha_max, "alpha_max"),
            (self.beta_min, "beta_min"),
            (self.beta_max, "beta_max"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join("|"))
        }
    }
}

impl std::str::FromStr for ActiveBounds {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut active = ActiveBounds::default();
        if s == "none" {
            return Ok(active);
        }
        for name in s.split('|') {
            match name {
                "alpha_min" => active.alpha_min = true,
                "alpha_max" => active.alpha_max = true,
                "beta_min" => active.beta_min = true,
                "beta_max" => active.beta_max = true,
                other => {
                    return Err(Error::invalid(
                        "active_bounds",
                        format!("unknown bound name {other:?}"),
                    ))
                }
            }
        }
        Ok(active)
    }
}

/// Overdetermined system `A x ≈ b` in the two unknowns `x = (α, β)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSystem {
    /// Day the system estimates rates for.
    pub day: i64,
    /// Rows of `A`: coefficients of `(α, β)`.
    pub rows: Vec<[f64; 2]>,
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn residuals(&self, alpha: f64, beta: f64) -> impl Iterator<Item = f64> + '_ {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(move |(row, b)| row[0] * alpha + row[1] * beta - b)
    }

    /// `‖A x − b‖²`, summed row by row.
    pub fn objective(&self, alpha: f64, beta: f64) -> f64 {
        self.residuals(alpha, beta).map(|r| r * r).sum()
    }

    fn column(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |row| row[k])
    }

    pub(crate) fn check_columns(&self) -> Result<()> {
        for (k, column) in [(0, "alpha"), (1, "beta")] {
            if self.column(k).all(|v| v == 0.0) {
                return Err(Error::DegenerateSystem {
                    day: self.day,
                    column,
                });
            }
        }
        Ok(())
    }
}

/// Per-day rate estimate with fit diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub day: i64,
    pub alpha: f64,
    pub beta: f64,
    /// Sum of squared residuals at the solution.
    pub residual_norm: f64,
    pub active_bounds: ActiveBounds,
}

fn dot(x: impl Iterator<Item = f64>, y: impl Iterator<Item = f64>) -> f64 {
    x.zip(y).map(|(a, b)| a * b).sum()
}

/// Least-squares solution ignoring the bounds, via a two-column QR
/// factorisation (Gram–Schmidt with one reorthogonalisation pass).
///
/// Normal equations square the condition number, which matters here: the two
/// columns of a model window differ in scale by four or five orders of
/// magnitude.
pub fn unconstrained_ls(system: &LinearSystem) -> Result<[f64; 2]> {
    let n = system.len();
    let c1: Vec<f64> = system.column(0).collect();
    let c2: Vec<f64> = system.column(1).collect();
    let r11 = dot(c1.iter().copied(), c1.iter().copied()).sqrt();
    let c2_norm = dot(c2.iter().copied(), c2.iter().copied()).sqrt();
    if r11 == 0.0 || c2_norm == 0.0 || !r11.is_finite() || !c2_norm.is_finite() {
        return Err(Error::SingularNormalEquations);
    }
    let q1: Vec<f64> = c1.iter().map(|v| v / r11).collect();

    let mut w = c2;
    let mut r12 = 0.0;
    for _ in 0..2 {
        let proj = dot(q1.iter().copied(), w.iter().copied());
        for k in 0..n {
            w[k] -= proj * q1[k];
        }
        r12 += proj;
    }
    let r22 = dot(w.iter().copied(), w.iter().copied()).sqrt();
    if r22 <= 64.0 * f64::EPSILON * c2_norm {
        return Err(Error::SingularNormalEquations);
    }

    let y1 = dot(q1.iter().copied(), system.rhs.iter().copied());
    let y2 = dot(w.iter().copied(), system.rhs.iter().copied()) / r22;
    let beta = y2 / r22;
    let alpha = (y1 - r12 * beta) / r11;
    Ok([alpha, beta])
}

/// Minimises `‖A x − b‖²` over `bounds`.
///
/// Among minimisers with equal objective the one with the smaller `α`, then
/// the smaller `β`, is returned.
pub fn solve_box_ls(system: &LinearSystem, bounds: &Bounds) -> Result<RateEstimate> {
    system.check_columns()?;
    bounds.validate()?;

    let [alpha, beta] = match unconstrained_ls(system) {
        Ok([alpha, beta]) if bounds.contains(alpha, beta) => [alpha, beta],
        _ => boundary_minimum(system, bounds),
    };
    Ok(RateEstimate {
        day: system.day,
        alpha,
        beta,
        residual_norm: system.objective(alpha, beta),
        active_bounds: ActiveBounds::at(bounds, alpha, beta),
    })
}

fn boundary_minimum(system: &LinearSystem, bounds: &Bounds) -> [f64; 2] {
    let g11 = dot(system.column(0), system.column(0));
    let g12 = dot(system.column(0), system.column(1));
    let g22 = dot(system.column(1), system.column(1));
    let c1 = dot(system.column(0), system.rhs.iter().copied());
    let c2 = dot(system.column(1), system.rhs.iter().copied());

    // argmin over one coordinate with the other held fixed.
    let best_beta = |alpha: f64| ((c2 - g12 * alpha) / g22).clamp(bounds.beta_min, bounds.beta_max);
    let best_alpha =
        |beta: f64| ((c1 - g12 * beta) / g11).clamp(bounds.alpha_min, bounds.alpha_max);

    let candidates = [
        [bounds.alpha_min, best_beta(bounds.alpha_min)],
        [bounds.alpha_max, best_beta(bounds.alpha_max)],
        [best_alpha(bounds.beta_min), bounds.beta_min],
        [best_alpha(bounds.beta_max), bounds.beta_max],
        [bounds.alpha_min, bounds.beta_min],
        [bounds.alpha_min, bounds.beta_max],
        [bounds.alpha_max, bounds.beta_min],
        [bounds.alpha_max, bounds.beta_max],
    ];
    candidates
        .into_iter()
        .map(|x| (system.objective(x[0], x[1]), x))
        .min_by(|(fa, a), (fb, b)| {
            fa.total_cmp(fb)
                .then_with(|| a[0].total_cmp(&b[0]))
                .then_with(|| a[1].total_cmp(&b[1]))
        })
        .map(|(_, x)| x)
        .expect("candidate set is non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_system(b: [f64; 2]) -> LinearSystem {
        LinearSystem {
            day: 0,
            rows: vec![[1.0, 0.0], [0.0, 1.0]],
            rhs: b.to_vec(),
        }
    }

    #[test]
    fn interior_optimum() {
        let est = solve_box_ls(&identity_system([0.5, 0.5]), &Bounds::default()).unwrap();
        assert_eq!((est.alpha, est.beta), (0.5, 0.5));
        assert!(!est.active_bounds.any());
        assert_eq!(est.active_bounds.to_string(), "none");
        assert_eq!(est.residual_norm, 0.0);
    }

    #[test]
    fn separable_clamping() {
        let est = solve_box_ls(&identity_system([1.5, -0.2]), &Bounds::default()).unwrap();
        assert_eq!((est.alpha, est.beta), (1.0, 0.0));
        assert_eq!(est.active_bounds.to_string(), "alpha_max|beta_min");
        assert!((est.residual_norm - (0.25 + 0.04)).abs() < 1e-15);
    }

    #[test]
    fn zero_column_is_degenerate() {
        let sys = LinearSystem {
            day: 4,
            rows: vec![[0.0, 1.0], [0.0, 2.0]],
            rhs: vec![1.0, 1.0],
        };
        assert_eq!(
            solve_box_ls(&sys, &Bounds::default()).unwrap_err(),
            Error::DegenerateSystem {
                day: 4,
                column: "alpha"
            }
        );
    }

    #[test]
    fn collinear_columns_fall_through_to_boundary() {
        // Columns are parallel: every point on the line α + 2β = 1 is optimal.
        let sys = LinearSystem {
            day: 0,
            rows: vec![[1.0, 2.0], [2.0, 4.0]],
            rhs: vec![1.0, 2.0],
        };
        assert_eq!(unconstrained_ls(&sys), Err(Error::SingularNormalEquations));
        let est = solve_box_ls(&sys, &Bounds::default()).unwrap();
        assert!(est.residual_norm < 1e-24);
        // Smallest α among the boundary minimisers.
        assert_eq!(est.alpha, 0.0);
        assert_eq!(est.beta, 0.5);
    }

    #[test]
    fn point_box() {
        let bounds = Bounds::new(0.3, 0.3, 0.7, 0.7).unwrap();
        let est = solve_box_ls(&identity_system([0.0, 0.0]), &bounds).unwrap();
        assert_eq!((est.alpha, est.beta), (0.3, 0.7));
        assert!(est.active_bounds.alpha_min && est.active_bounds.alpha_max);
    }

    #[test]
    fn bounds_validation() {
        assert!(Bounds::new(0.5, 0.4, 0.0, 1.0).is_err());
        assert!(Bounds::new(0.0, 1.2, 0.0, 1.0).is_err());
        assert!(Bounds::new(f64::NAN, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn active_bounds_round_trip() {
        for s in [
            "none",
            "alpha_min",
            "alpha_max|beta_min",
            "alpha_min|alpha_max|beta_min|beta_max",
        ] {
            assert_eq!(s.parse::<ActiveBounds>().unwrap().to_string(), s);
        }
        assert!("gamma_min".parse::<ActiveBounds>().is_err());
    }

    #[test]
    fn badly_scaled_columns_are_solved_accurately() {
        // Columns five orders of magnitude apart, as in model windows.
        let rows: Vec<[f64; 2]> = (0..90)
            .map(|k| {
                let i = 12_000.0 * (0.02 * k as f64).exp();
                [i / (1.0 + 0.4 * i), -i / 0.35]
            })
            .collect();
        let rhs: Vec<f64> = rows.iter().map(|r| r[0] * 0.07 + r[1] * 0.028).collect();
        let sys = LinearSystem { day: 0, rows, rhs };
        let [alpha, beta] = unconstrained_ls(&sys).unwrap();
        assert!((alpha - 0.07).abs() < 1e-8, "{alpha}");
        assert!((beta - 0.028).abs() < 1e-12, "{beta}");
    }
}
