//! Discrete energy functionals whose critical points are the CCPB and PB
//! solutions. Integrals use the trapezoid rule and `u'` is the per-cell
//! difference quotient.

use crate::error::{Error, Result};
use crate::grid::{trapz, trapz_weighted_exp, Field};
use crate::ions::{BoundaryData, IonSystem};

const DIRICHLET_TOL: f64 = 1e-12;

fn gradient_term(field: &Field, eps: f64) -> f64 {
    let x = field.grid().nodes();
    let u = field.values();
    let sq: f64 = (0..x.len() - 1)
        .map(|i| (u[i + 1] - u[i]).powi(2) / (x[i + 1] - x[i]))
        .sum();
    0.5 * eps * eps * sq
}

fn penalty_term(field: &Field, bd: &BoundaryData, eps: f64) -> Result<f64> {
    if bd.is_dirichlet() {
        return Err(Error::ZeroStern);
    }
    let lo = bd.phi_minus - field.first();
    let hi = bd.phi_plus - field.last();
    Ok(eps * eps / (2.0 * bd.eta) * (lo * lo + hi * hi))
}

fn check_dirichlet(field: &Field, bd: &BoundaryData) -> Result<()> {
    if (field.first() - bd.phi_minus).abs() > DIRICHLET_TOL
        || (field.last() - bd.phi_plus).abs() > DIRICHLET_TOL
    {
        return Err(Error::InvalidParameter(
            "field does not match the Dirichlet boundary values".into(),
        ));
    }
    Ok(())
}

fn ccpb_bulk(sys: &IonSystem, field: &Field) -> Result<f64> {
    let mut acc = 0.0;
    for sp in sys.anions() {
        acc += sp.concentration * trapz_weighted_exp(field, sp.valence)?.ln();
    }
    for sp in sys.cations() {
        acc += sp.concentration * trapz_weighted_exp(field, -sp.valence)?.ln();
    }
    Ok(acc)
}

fn pb_bulk(sys: &IonSystem, field: &Field) -> Result<f64> {
    let fu = field
        .values()
        .iter()
        .map(|&u| sys.f(u))
        .collect::<Result<Vec<_>>>()?;
    Ok(0.5 * trapz(field.grid(), &fu))
}

/// Robin-penalized CCPB energy. Requires `eta > 0`.
pub fn ccpb_energy(sys: &IonSystem, bd: &BoundaryData, eps: f64, field: &Field) -> Result<f64> {
    let pen = penalty_term(field, bd, eps)?;
    Ok(gradient_term(field, eps) + ccpb_bulk(sys, field)? + pen)
}

/// CCPB energy for Dirichlet data; the field must carry the boundary values.
pub fn ccpb_energy_dirichlet(
    sys: &IonSystem,
    bd: &BoundaryData,
    eps: f64,
    field: &Field,
) -> Result<f64> {
    check_dirichlet(field, bd)?;
    Ok(gradient_term(field, eps) + ccpb_bulk(sys, field)?)
}

/// Robin-penalized PB energy. Requires `eta > 0`.
pub fn pb_energy(sys: &IonSystem, bd: &BoundaryData, eps: f64, field: &Field) -> Result<f64> {
    let pen = penalty_term(field, bd, eps)?;
    Ok(gradient_term(field, eps) + pb_bulk(sys, field)? + pen)
}

pub fn pb_energy_dirichlet(
    sys: &IonSystem,
    bd: &BoundaryData,
    eps: f64,
    field: &Field,
) -> Result<f64> {
    check_dirichlet(field, bd)?;
    Ok(gradient_term(field, eps) + pb_bulk(sys, field)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::sync::Arc;

    fn preset_one() -> IonSystem {
        IonSystem::from_pairs(&[(1.0, 1.2)], &[(1.0, 0.4), (2.0, 0.4)]).unwrap()
    }

    fn grid() -> Arc<Grid> {
        Arc::new(Grid::uniform(64).unwrap())
    }

    #[test]
    fn constant_field_ccpb() {
        let a = 0.37;
        let bd = BoundaryData::new(a, a, 0.2).unwrap();
        let u = Field::constant(grid(), a);
        let e = ccpb_energy(&preset_one(), &bd, 0.1, &u).unwrap();
        assert!((e - 2.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_field_with_penalty() {
        let bd = BoundaryData::antisymmetric(1.0, 1.0).unwrap();
        let u = Field::constant(grid(), 0.0);
        let e = ccpb_energy(&preset_one(), &bd, 0.5, &u).unwrap();
        assert!((e - (2.0 * 2f64.ln() + 0.25)).abs() < 1e-12, "{e}");
        let e = pb_energy(&preset_one(), &bd, 0.5, &u).unwrap();
        assert!((e - 2.25).abs() < 1e-12, "{e}");
        let bd0 = BoundaryData::new(0.0, 0.0, 1.0).unwrap();
        let e = pb_energy(&preset_one(), &bd0, 0.5, &u).unwrap();
        assert!((e - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_stern_is_rejected() {
        let bd = BoundaryData::antisymmetric(1.0, 0.0).unwrap();
        let u = Field::linear_interpolant(grid(), &bd);
        assert_eq!(ccpb_energy(&preset_one(), &bd, 0.5, &u), Err(Error::ZeroStern));
        assert_eq!(pb_energy(&preset_one(), &bd, 0.5, &u), Err(Error::ZeroStern));
        assert!(ccpb_energy_dirichlet(&preset_one(), &bd, 0.5, &u).is_ok());
        let off = Field::constant(grid(), 0.0);
        assert!(pb_energy_dirichlet(&preset_one(), &bd, 0.5, &off).is_err());
    }

    #[test]
    fn ccpb_energy_is_shift_invariant() {
        let sys = preset_one();
        let g = grid();
        let bd = BoundaryData::antisymmetric(1.0, 0.3).unwrap();
        let u = Field::from_fn(g.clone(), |x| x.powi(3) - 0.2 * x).unwrap();
        let shift = 0.7;
        let bd2 = BoundaryData::new(bd.phi_plus + shift, bd.phi_minus + shift, bd.eta).unwrap();
        let u2 = Field::from_fn(g, |x| x.powi(3) - 0.2 * x + shift).unwrap();
        let e1 = ccpb_energy(&sys, &bd, 0.25, &u).unwrap();
        let e2 = ccpb_energy(&sys, &bd2, 0.25, &u2).unwrap();
        assert!((e1 - e2).abs() < 1e-12, "{e1} {e2}");
    }
}
