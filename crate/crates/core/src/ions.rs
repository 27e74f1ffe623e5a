//! Ionic species data and the algebra built on it.
//!
//! Anions carry valence `-a_k` and total concentration `alpha_k`; cations
//! carry valence `+b_l` and total concentration `beta_l`. In the scaled
//! equations anions enter with `e^{a phi}` and cations with `e^{-b phi}`.

use crate::error::{Error, Result};

/// Largest exponent magnitude accepted before reporting overflow.
pub const EXP_CAP: f64 = 700.0;

/// Absolute tolerance on the charge imbalance for a system to count as
/// electroneutral.
pub const NEUTRALITY_TOL: f64 = 1e-12;

/// `e^x`, refusing exponents beyond [`EXP_CAP`].
#[inline]
pub fn checked_exp(x: f64) -> Result<f64> {
    if x.abs() > EXP_CAP || x.is_nan() {
        return Err(Error::Overflow {
            exponent: x,
            cap: EXP_CAP,
        });
    }
    Ok(x.exp())
}

#[inline]
fn checked_exp_m1(x: f64) -> Result<f64> {
    checked_exp(x).map(|_| x.exp_m1())
}

/// One ionic species: magnitude of its valence and its total concentration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Species {
    pub valence: f64,
    pub concentration: f64,
}

impl Species {
    pub fn new(valence: f64, concentration: f64) -> Self {
        Self {
            valence,
            concentration,
        }
    }
}

impl From<(f64, f64)> for Species {
    fn from((valence, concentration): (f64, f64)) -> Self {
        Self::new(valence, concentration)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IonSystem {
    anions: Vec<Species>,
    cations: Vec<Species>,
}

impl IonSystem {
    /// Builds a system, checking that both lists are nonempty, valences are
    /// at least one and strictly increasing, and concentrations are positive.
    pub fn new(anions: Vec<Species>, cations: Vec<Species>) -> Result<Self> {
        validate_list("anion", &anions)?;
        validate_list("cation", &cations)?;
        Ok(Self { anions, cations })
    }

    /// Convenience constructor from `(valence, concentration)` pairs.
    pub fn from_pairs(anions: &[(f64, f64)], cations: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            anions.iter().copied().map(Species::from).collect(),
            cations.iter().copied().map(Species::from).collect(),
        )
    }

    pub fn anions(&self) -> &[Species] {
        &self.anions
    }

    pub fn cations(&self) -> &[Species] {
        &self.cations
    }

    /// `sum a_k alpha_k - sum b_l beta_l`.
    pub fn charge_imbalance(&self) -> f64 {
        let neg: f64 = self
            .anions
            .iter()
            .map(|s| s.valence * s.concentration)
            .sum();
        let pos: f64 = self
            .cations
            .iter()
            .map(|s| s.valence * s.concentration)
            .sum();
        neg - pos
    }

    pub fn is_electroneutral(&self) -> bool {
        self.charge_imbalance().abs() <= NEUTRALITY_TOL
    }

    pub fn require_electroneutral(&self) -> Result<()> {
        if self.is_electroneutral() {
            Ok(())
        } else {
            Err(Error::NotElectroneutral {
                imbalance: self.charge_imbalance(),
            })
        }
    }

    /// Sum of all concentrations, equal to `f(0)`.
    pub fn total_concentration(&self) -> f64 {
        self.anions
            .iter()
            .chain(&self.cations)
            .map(|s| s.concentration)
            .sum()
    }

    /// Equal species lists on both sides, which makes `f` even.
    pub fn is_symmetric(&self) -> bool {
        self.anions == self.cations
    }

    /// Same valences, all concentrations multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let scale = |list: &[Species]| {
            list.iter()
                .map(|s| Species::new(s.valence, s.concentration * factor))
                .collect()
        };
        Self::new(scale(&self.anions), scale(&self.cations))
    }

    /// `f(s) = sum alpha_k e^{a_k s} + sum beta_l e^{-b_l s}`.
    pub fn f(&self, s: f64) -> Result<f64> {
        let mut acc = 0.0;
        for sp in &self.anions {
            acc += sp.concentration * checked_exp(sp.valence * s)?;
        }
        for sp in &self.cations {
            acc += sp.concentration * checked_exp(-sp.valence * s)?;
        }
        Ok(acc)
    }

    /// `f'(s) = sum a_k alpha_k e^{a_k s} - sum b_l beta_l e^{-b_l s}`.
    pub fn f_prime(&self, s: f64) -> Result<f64> {
        let mut acc = 0.0;
        for sp in &self.anions {
            acc += sp.valence * sp.concentration * checked_exp(sp.valence * s)?;
        }
        for sp in &self.cations {
            acc -= sp.valence * sp.concentration * checked_exp(-sp.valence * s)?;
        }
        Ok(acc)
    }

    /// `f''(s)`, strictly positive for every system.
    pub fn f_second(&self, s: f64) -> Result<f64> {
        let mut acc = 0.0;
        for sp in self.anions.iter() {
            acc += sp.valence.powi(2) * sp.concentration * checked_exp(sp.valence * s)?;
        }
        for sp in self.cations.iter() {
            acc += sp.valence.powi(2) * sp.concentration * checked_exp(-sp.valence * s)?;
        }
        Ok(acc)
    }

    /// `f(s) - f(0)` evaluated term by term with `exp_m1`, accurate for
    /// small `|s|` where the direct difference cancels.
    pub fn f_excess(&self, s: f64) -> Result<f64> {
        let mut acc = 0.0;
        for sp in &self.anions {
            acc += sp.concentration * checked_exp_m1(sp.valence * s)?;
        }
        for sp in &self.cations {
            acc += sp.concentration * checked_exp_m1(-sp.valence * s)?;
        }
        Ok(acc)
    }
}

fn validate_list(kind: &str, list: &[Species]) -> Result<()> {
    if list.is_empty() {
        return Err(Error::InvalidIons(format!("{kind} list is empty")));
    }
    for sp in list {
        if !(sp.valence >= 1.0) || !sp.valence.is_finite() {
            return Err(Error::InvalidIons(format!(
                "{kind} valence {} is below 1",
                sp.valence
            )));
        }
        if !(sp.concentration > 0.0) || !sp.concentration.is_finite() {
            return Err(Error::InvalidIons(format!(
                "{kind} concentration {} is not positive",
                sp.concentration
            )));
        }
    }
    if list.windows(2).any(|w| w[1].valence <= w[0].valence) {
        return Err(Error::InvalidIons(format!(
            "{kind} valences must be strictly increasing"
        )));
    }
    Ok(())
}

/// Robin boundary data `phi(1) + eta phi'(1) = phi_plus`,
/// `phi(-1) - eta phi'(-1) = phi_minus`. `eta = 0` selects Dirichlet data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryData {
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub eta: f64,
}

impl BoundaryData {
    pub fn new(phi_plus: f64, phi_minus: f64, eta: f64) -> Result<Self> {
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Stern coefficient must be finite and nonnegative, got {eta}"
            )));
        }
        if !phi_plus.is_finite() || !phi_minus.is_finite() {
            return Err(Error::InvalidParameter("boundary potentials must be finite".into()));
        }
        Ok(Self {
            phi_plus,
            phi_minus,
            eta,
        })
    }

    /// `phi_plus = -phi_minus = phi`.
    pub fn antisymmetric(phi: f64, eta: f64) -> Result<Self> {
        Self::new(phi, -phi, eta)
    }

    pub fn is_dirichlet(&self) -> bool {
        self.eta == 0.0
    }
}
