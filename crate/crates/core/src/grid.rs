//! One-dimensional meshes on `[-1, 1]`, nodal fields, and quadrature.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ions::{checked_exp, BoundaryData};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridKind {
    Uniform,
    BoundaryGraded { min_cell: f64, growth: f64 },
}

/// Sorted nodes spanning `[-1, 1]` with both endpoints exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    kind: GridKind,
}

impl Grid {
    /// `n_cells + 1` equally spaced nodes.
    pub fn uniform(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::InvalidParameter(format!(
                "a grid needs at least 2 cells, got {n_cells}"
            )));
        }
        let h = 2.0 / n_cells as f64;
        let mut nodes: Vec<f64> = (0..=n_cells).map(|i| -1.0 + h * i as f64).collect();
        nodes[n_cells] = 1.0;
        symmetrize(&mut nodes);
        Ok(Self {
            nodes,
            kind: GridKind::Uniform,
        })
    }

    /// Symmetric grid refined geometrically toward both endpoints.
    ///
    /// The cell touching each endpoint has width `min_cell`; widths grow by
    /// `growth` until they would reach `interior_h`, and the remaining middle
    /// section is split uniformly with spacing at most `interior_h`.
    pub fn graded(min_cell: f64, growth: f64, interior_h: f64) -> Result<Self> {
        if !(min_cell > 0.0) || !(interior_h > 0.0) || min_cell > interior_h {
            return Err(Error::InvalidParameter(format!(
                "graded grid needs 0 < min_cell <= interior_h, got {min_cell} and {interior_h}"
            )));
        }
        if !(growth > 1.0) || !growth.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "graded grid growth must exceed 1, got {growth}"
            )));
        }
        if interior_h >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "interior spacing {interior_h} leaves fewer than 2 cells"
            )));
        }
        let mut layer = Vec::new();
        let mut width = min_cell;
        while width < interior_h {
            layer.push(width);
            width *= growth;
        }
        let layer_len: f64 = layer.iter().sum();
        let middle = 2.0 - 2.0 * layer_len;
        if middle <= 0.0 {
            return Err(Error::InvalidParameter(
                "graded layers overlap; raise min_cell or growth".into(),
            ));
        }
        let n_mid = ((middle / interior_h).ceil() as usize).max(1);
        let h_mid = middle / n_mid as f64;

        let mut nodes = Vec::with_capacity(2 * layer.len() + n_mid + 1);
        let mut x = -1.0;
        nodes.push(x);
        for w in &layer {
            x += w;
            nodes.push(x);
        }
        let start = x;
        for i in 1..=n_mid {
            nodes.push(start + h_mid * i as f64);
        }
        let mut x = *nodes.last().unwrap();
        for w in layer.iter().rev() {
            x += w;
            nodes.push(x);
        }
        let n = nodes.len() - 1;
        nodes[0] = -1.0;
        nodes[n] = 1.0;
        symmetrize(&mut nodes);
        Ok(Self {
            nodes,
            kind: GridKind::BoundaryGraded { min_cell, growth },
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn cell_widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.windows(2).map(|w| w[1] - w[0])
    }

    /// Trapezoid weights: half the sum of the two neighbouring cells.
    pub fn lumped_weights(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut m = vec![0.0; n];
        for (i, h) in self.cell_widths().enumerate() {
            m[i] += 0.5 * h;
            m[i + 1] += 0.5 * h;
        }
        m
    }

    /// Index of the node closest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        match self.nodes.binary_search_by(|n| n.total_cmp(&x)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.nodes.len() => self.nodes.len() - 1,
            Err(i) => {
                if x - self.nodes[i - 1] <= self.nodes[i] - x {
                    i - 1
                } else {
                    i
                }
            }
        }
    }
}

// Mirrors the left half so that x_{n-i} = -x_i exactly.
fn symmetrize(nodes: &mut [f64]) {
    let n = nodes.len() - 1;
    for i in 0..=n / 2 {
        let v = 0.5 * (nodes[i] - nodes[n - i]);
        nodes[i] = v;
        nodes[n - i] = -v;
    }
}

pub fn make_uniform(n_cells: usize) -> Result<Grid> {
    Grid::uniform(n_cells)
}

pub fn make_graded(min_cell: f64, growth: f64, interior_h: f64) -> Result<Grid> {
    Grid::graded(min_cell, growth, interior_h)
}

/// Nodal values of a potential on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("field values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Arc<Grid>, value: f64) -> Self {
        let values = vec![value; grid.len()];
        Self { grid, values }
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Arc<Grid>, f: F) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    /// Straight line from `phi_minus` at -1 to `phi_plus` at 1.
    pub fn linear_interpolant(grid: Arc<Grid>, bd: &BoundaryData) -> Self {
        let (a, b) = (bd.phi_minus, bd.phi_plus);
        let values = grid
            .nodes()
            .iter()
            .map(|&x| 0.5 * (a + b) + 0.5 * (b - a) * x)
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn grid_arc(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Piecewise-linear interpolation at `x` in `[-1, 1]`.
    pub fn value_at(&self, x: f64) -> f64 {
        let nodes = self.grid.nodes();
        let x = x.clamp(-1.0, 1.0);
        match nodes.binary_search_by(|n| n.total_cmp(&x)) {
            Ok(i) => self.values[i],
            Err(i) => {
                let i = i.clamp(1, nodes.len() - 1);
                let (x0, x1) = (nodes[i - 1], nodes[i]);
                let w = (x - x0) / (x1 - x0);
                (1.0 - w) * self.values[i - 1] + w * self.values[i]
            }
        }
    }

    /// Nodal derivative: three-point central differences at interior nodes
    /// (exact for quadratics on any spacing), three-point one-sided
    /// differences at the two endpoints.
    pub fn derivative(&self) -> Vec<f64> {
        let x = self.grid.nodes();
        let u = &self.values;
        let n = x.len();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let hm = x[i] - x[i - 1];
            let hp = x[i + 1] - x[i];
            d[i] = (hm * hm * (u[i + 1] - u[i]) + hp * hp * (u[i] - u[i - 1]))
                / (hm * hp * (hm + hp));
        }
        let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
        d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * u[0] + (h1 + h2) / (h1 * h2) * u[1]
            - h1 / (h2 * (h1 + h2)) * u[2];
        let (h1, h2) = (x[n - 1] - x[n - 2], x[n - 2] - x[n - 3]);
        d[n - 1] = (2.0 * h1 + h2) / (h1 * (h1 + h2)) * u[n - 1]
            - (h1 + h2) / (h1 * h2) * u[n - 2]
            + h1 / (h2 * (h1 + h2)) * u[n - 3];
        d
    }

    /// Second differences at interior nodes (`n - 2` entries, node 1 first).
    pub fn second_differences(&self) -> Vec<f64> {
        let x = self.grid.nodes();
        let u = &self.values;
        (1..x.len() - 1)
            .map(|i| {
                let hm = x[i] - x[i - 1];
                let hp = x[i + 1] - x[i];
                2.0 * ((u[i + 1] - u[i]) / hp - (u[i] - u[i - 1]) / hm) / (hm + hp)
            })
            .collect()
    }
}

/// Trapezoid value of `int_{-1}^{1} e^{z phi(y)} dy`.
pub fn trapz_weighted_exp(field: &Field, z: f64) -> Result<f64> {
    let x = field.grid().nodes();
    let u = field.values();
    let mut acc = 0.0;
    let mut left = checked_exp(z * u[0])?;
    for i in 0..x.len() - 1 {
        let right = checked_exp(z * u[i + 1])?;
        acc += 0.5 * (x[i + 1] - x[i]) * (left + right);
        left = right;
    }
    Ok(acc)
}

/// Trapezoid integral of nodal values over the whole grid.
pub fn trapz(grid: &Grid, values: &[f64]) -> f64 {
    let x = grid.nodes();
    (0..x.len() - 1)
        .map(|i| 0.5 * (x[i + 1] - x[i]) * (values[i] + values[i + 1]))
        .sum()
}

/// Trapezoid integral of nodal values over `[a, b]`, splitting cells at the
/// interval ends with linear interpolation.
pub fn trapz_between(grid: &Grid, values: &[f64], a: f64, b: f64) -> f64 {
    let x = grid.nodes();
    let mut acc = 0.0;
    for i in 0..x.len() - 1 {
        let (x0, x1) = (x[i], x[i + 1]);
        let lo = x0.max(a);
        let hi = x1.min(b);
        if hi <= lo {
            continue;
        }
        let lerp = |t: f64| {
            let w = (t - x0) / (x1 - x0);
            (1.0 - w) * values[i] + w * values[i + 1]
        };
        acc += 0.5 * (hi - lo) * (lerp(lo) + lerp(hi));
    }
    acc
}
