//! Tabulated datasets for the success-probability figures. Every closed-form
//! column is paired with the value produced by the generic protocol engine.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use rayon::prelude::*;
use thiserror::Error;

use crate::entangle::{maximally_entangled, BipartiteState};
use crate::protocol::{self, ProtocolError};
use crate::spin::{AxisSpec, RotationGenerator, SpinSystem};

/// Axis used for the dimension sweep; the success law does not depend on it.
pub const DIMENSION_THETA: f64 = 1.0;
pub const DEFAULT_GRID: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FigureError {
    #[error("m_max must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("xi2_sq must lie in (0, 1), got {0}")]
    BadXi2(f64),
    #[error("grid must be positive")]
    EmptyGrid,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    /// The first `integer_columns` columns hold integers.
    pub integer_columns: usize,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Largest `|a − b|` between two columns.
    pub fn max_deviation(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = (self.column(a)?, self.column(b)?);
        Some(x.iter().zip(&y).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max))
    }
}

/// Midpoints of `n` equal cells covering `(lo, hi)`.
pub fn midpoints(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / n as f64;
    (0..n).map(|k| lo + h * (k as f64 + 0.5)).collect()
}

fn insert_sorted(values: &mut Vec<f64>, x: f64) {
    if values.iter().any(|v| (v - x).abs() < 1e-15) {
        return;
    }
    let at = values.partition_point(|v| *v < x);
    values.insert(at, x);
}

fn spin1(theta: f64) -> Result<RotationGenerator, ProtocolError> {
    Ok(RotationGenerator::new(&SpinSystem::new(1.0)?, AxisSpec::new(theta)?)?)
}

/// Columns `m, p, mqfi, p_brute` for `m = 2..=m_max`.
pub fn dimension(m_max: usize) -> Result<Table, FigureError> {
    if m_max < 2 {
        return Err(FigureError::DimensionTooSmall(m_max));
    }
    let rows = (2..=m_max)
        .into_par_iter()
        .map(|m| {
            let sys = SpinSystem::from_twice_spin(m as u32 - 1).map_err(ProtocolError::from)?;
            let gen = RotationGenerator::new(&sys, AxisSpec::new(DIMENSION_THETA).map_err(ProtocolError::from)?)
                .map_err(ProtocolError::from)?;
            let state = maximally_entangled(m).map_err(ProtocolError::from)?;
            let report = protocol::orthogonal_protocol(&state, &gen, 0.0)?;
            let mqfi = (m as f64 - 1.0).powi(2);
            Ok(vec![m as f64, 2.0 / m as f64, mqfi, report.p_bruteforce])
        })
        .collect::<Result<_, FigureError>>()?;
    Ok(Table {
        columns: vec!["m", "p", "mqfi", "p_brute"],
        rows,
        integer_columns: 1,
    })
}

/// Columns `theta, xi1_sq, p, p_brute` over `θ ∈ (0, π)`,
/// `ξ1² ∈ (0, 1 − ξ2²)` at fixed `ξ2²`.
pub fn surface(xi2_sq: f64, grid: usize) -> Result<Table, FigureError> {
    if !(xi2_sq > 0.0 && xi2_sq < 1.0) {
        return Err(FigureError::BadXi2(xi2_sq));
    }
    if grid == 0 {
        return Err(FigureError::EmptyGrid);
    }
    let xi1_values = midpoints(0.0, 1.0 - xi2_sq, grid);
    let blocks: Vec<Vec<Vec<f64>>> = midpoints(0.0, PI, grid)
        .into_par_iter()
        .map(|theta| {
            let gen = spin1(theta)?;
            xi1_values
                .iter()
                .map(|&xi1_sq| {
                    let xi = [xi1_sq.sqrt(), xi2_sq.sqrt(), (1.0 - xi2_sq - xi1_sq).sqrt()];
                    let closed = protocol::spin1_closed_forms(xi, theta)?;
                    let state = BipartiteState::diagonal(&xi).map_err(ProtocolError::from)?;
                    let report = protocol::nonorthogonal_protocol(&state, &gen, 0.0)?;
                    Ok(vec![theta, xi1_sq, closed.p, report.p_bruteforce])
                })
                .collect::<Result<Vec<_>, FigureError>>()
        })
        .collect::<Result<_, FigureError>>()?;
    Ok(Table {
        columns: vec!["theta", "xi1_sq", "p", "p_brute"],
        rows: blocks.into_iter().flatten().collect(),
        integer_columns: 0,
    })
}

/// Columns `xi2_sq, theta, P, P_brute` for `ξ1 = ξ3`; the row set always
/// contains `ξ2² = 1/3`.
pub fn contour(grid: usize) -> Result<Table, FigureError> {
    if grid == 0 {
        return Err(FigureError::EmptyGrid);
    }
    let mut xi2_values = midpoints(0.0, 1.0, grid);
    insert_sorted(&mut xi2_values, 1.0 / 3.0);
    let thetas = midpoints(0.0, PI, grid);
    let gens = thetas
        .iter()
        .map(|&t| spin1(t))
        .collect::<Result<Vec<_>, _>>()?;
    let blocks: Vec<Vec<Vec<f64>>> = xi2_values
        .into_par_iter()
        .map(|xi2_sq| {
            let side = ((1.0 - xi2_sq) / 2.0).sqrt();
            let state = BipartiteState::diagonal(&[side, xi2_sq.sqrt(), side]).map_err(ProtocolError::from)?;
            thetas
                .iter()
                .zip(&gens)
                .map(|(&theta, gen)| {
                    let report = protocol::nonorthogonal_protocol(&state, gen, 0.0)?;
                    let brute = report.combined.map_or(f64::NAN, |c| c.p_total_bruteforce);
                    Ok(vec![xi2_sq, theta, protocol::spin1_p_total(xi2_sq, theta), brute])
                })
                .collect::<Result<Vec<_>, FigureError>>()
        })
        .collect::<Result<_, FigureError>>()?;
    Ok(Table {
        columns: vec!["xi2_sq", "theta", "P", "P_brute"],
        rows: blocks.into_iter().flatten().collect(),
        integer_columns: 0,
    })
}

/// Columns `xi3, p_a3, p_a3_brute, p_a4, p_a4_brute` over `ξ3 ∈ (0, 1)`,
/// with `ξ3 = 1/√2` always included.
///
/// `p_a3` has `ξ2 = 0` and the axis along z; `p_a4` has `ξ1 = 0` and the
/// axis along x.
pub fn appendix(grid: usize) -> Result<Table, FigureError> {
    if grid == 0 {
        return Err(FigureError::EmptyGrid);
    }
    let mut xi3_values = midpoints(0.0, 1.0, grid);
    insert_sorted(&mut xi3_values, FRAC_1_SQRT_2);
    let rows = xi3_values
        .into_par_iter()
        .map(|xi3| {
            let rest = (1.0 - xi3 * xi3).sqrt();
            let a3 = protocol::appendix_special_cases([rest, 0.0, xi3], 0.0)?;
            let a4 = protocol::appendix_special_cases([0.0, rest, xi3], FRAC_PI_2)?;
            Ok(vec![
                xi3,
                a3.report.p_closed,
                a3.report.p_bruteforce,
                a4.report.p_closed,
                a4.report.p_bruteforce,
            ])
        })
        .collect::<Result<_, FigureError>>()?;
    Ok(Table {
        columns: vec!["xi3", "p_a3", "p_a3_brute", "p_a4", "p_a4_brute"],
        rows,
        integer_columns: 0,
    })
}
