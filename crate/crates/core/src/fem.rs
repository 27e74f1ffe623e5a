//! Piecewise-linear assembly of the linear step problem and tridiagonal
//! solves.
//!
//! The step problem is `eps^2 u'' = g` on `(-1, 1)` with the Robin data of a
//! [`BoundaryData`]. Testing against hat functions gives
//! `eps^2 K u + (eps^2/eta) (u_0 e_0 + u_n e_n) = (eps^2/eta) (phi_minus e_0 + phi_plus e_n) - M g`
//! with `K` the stiffness matrix and `M` the lumped mass.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::ions::BoundaryData;

#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || rhs.len() != n || sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::InvalidParameter(format!(
                "inconsistent tridiagonal sizes: sub {}, diag {n}, sup {}, rhs {}",
                sub.len(),
                sup.len(),
                rhs.len()
            )));
        }
        Ok(Self { sub, diag, sup, rhs })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        apply(&self.sub, &self.diag, &self.sup, x)
    }

    /// `rhs - A x`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.apply(x)
            .iter()
            .zip(&self.rhs)
            .map(|(ax, b)| b - ax)
            .collect()
    }
}

fn apply(sub: &[f64], diag: &[f64], sup: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut v = diag[i] * x[i];
        if i > 0 {
            v += sub[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            v += sup[i] * x[i + 1];
        }
        y[i] = v;
    }
    y
}

/// LU factors of a tridiagonal matrix, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    pivots: Vec<f64>,
    sup: Vec<f64>,
}

impl TridiagonalLu {
    pub fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut lower = vec![0.0; n.saturating_sub(1)];
        let mut pivots = vec![0.0; n];
        pivots[0] = diag[0];
        check_pivot(pivots[0], 0)?;
        for i in 1..n {
            lower[i - 1] = sub[i - 1] / pivots[i - 1];
            pivots[i] = diag[i] - lower[i - 1] * sup[i - 1];
            check_pivot(pivots[i], i)?;
        }
        Ok(Self {
            lower,
            pivots,
            sup: sup.to_vec(),
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.pivots.len();
        for i in 1..n {
            x[i] -= self.lower[i - 1] * x[i - 1];
        }
        x[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.sup[i] * x[i + 1]) / self.pivots[i];
        }
    }
}

fn check_pivot(p: f64, row: usize) -> Result<()> {
    if p == 0.0 || !p.is_finite() {
        Err(Error::ZeroPivot { row })
    } else {
        Ok(())
    }
}

/// Thomas algorithm.
pub fn solve_tridiagonal(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    let lu = TridiagonalLu::factor(&sys.sub, &sys.diag, &sys.sup)?;
    Ok(lu.solve(&sys.rhs))
}

/// The constant part of the step problem: the matrix, the lumped mass and
/// the boundary contribution to the load. Only `-M g` changes between
/// iterations, so the factorization is done once.
#[derive(Debug, Clone)]
pub struct StepOperator {
    sub: Vec<f64>,
    diag: Vec<f64>,
    sup: Vec<f64>,
    mass: Vec<f64>,
    boundary_load: Vec<f64>,
    dirichlet: Option<(f64, f64)>,
    lu: TridiagonalLu,
}

impl StepOperator {
    pub fn new(grid: &Grid, eps: f64, bd: &BoundaryData) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        let n = grid.len();
        let e2 = eps * eps;
        let mut sub = vec![0.0; n - 1];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n - 1];
        for (i, h) in grid.cell_widths().enumerate() {
            let k = e2 / h;
            diag[i] += k;
            diag[i + 1] += k;
            sup[i] -= k;
            sub[i] -= k;
        }
        let mut boundary_load = vec![0.0; n];
        let dirichlet = if bd.is_dirichlet() {
            diag[0] = 1.0;
            sup[0] = 0.0;
            diag[n - 1] = 1.0;
            sub[n - 2] = 0.0;
            Some((bd.phi_minus, bd.phi_plus))
        } else {
            let pen = e2 / bd.eta;
            diag[0] += pen;
            diag[n - 1] += pen;
            boundary_load[0] = pen * bd.phi_minus;
            boundary_load[n - 1] = pen * bd.phi_plus;
            None
        };
        let lu = TridiagonalLu::factor(&sub, &diag, &sup)?;
        Ok(Self {
            sub,
            diag,
            sup,
            mass: grid.lumped_weights(),
            boundary_load,
            dirichlet,
            lu,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Load vector for nodal source values `g`.
    pub fn load(&self, g: &[f64]) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .boundary_load
            .iter()
            .zip(&self.mass)
            .zip(g)
            .map(|((bl, m), gi)| bl - m * gi)
            .collect();
        if let Some((lo, hi)) = self.dirichlet {
            let n = b.len();
            b[0] = lo;
            b[n - 1] = hi;
        }
        b
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        apply(&self.sub, &self.diag, &self.sup, x)
    }

    pub fn solve(&self, load: &[f64]) -> Vec<f64> {
        self.lu.solve(load)
    }

    pub fn system(&self, g: &[f64]) -> TridiagonalSystem {
        TridiagonalSystem {
            sub: self.sub.clone(),
            diag: self.diag.clone(),
            sup: self.sup.clone(),
            rhs: self.load(g),
        }
    }
}

/// Assembles the P1 system for `eps^2 u'' = g` with the boundary data `bd`.
/// `eta = 0` gives hard Dirichlet rows.
pub fn assemble_step_problem(
    grid: &Grid,
    eps: f64,
    bd: &BoundaryData,
    g: &[f64],
) -> Result<TridiagonalSystem> {
    if g.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "source has {} values for {} nodes",
            g.len(),
            grid.len()
        )));
    }
    Ok(StepOperator::new(grid, eps, bd)?.system(g))
}
