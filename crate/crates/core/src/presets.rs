//! Named parameter sets used by the experiments and the acceptance runs.

use crate::error::{Error, Result};
use crate::ions::{BoundaryData, IonSystem};

/// Stern coefficient as a function of `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaRule {
    Zero,
    Const(f64),
    /// `coef * eps^power`
    Scaled { coef: f64, power: f64 },
}

impl EtaRule {
    pub fn eta(&self, eps: f64) -> f64 {
        match *self {
            EtaRule::Zero => 0.0,
            EtaRule::Const(v) => v,
            EtaRule::Scaled { coef, power } => coef * eps.powf(power),
        }
    }

    /// `lim eta / eps` as `eps -> 0`; `None` when it diverges.
    pub fn gamma(&self) -> Option<f64> {
        match *self {
            EtaRule::Zero | EtaRule::Const(0.0) => Some(0.0),
            EtaRule::Const(_) => None,
            EtaRule::Scaled { coef, power } => {
                if coef == 0.0 || power > 1.0 {
                    Some(0.0)
                } else if power == 1.0 {
                    Some(coef)
                } else {
                    None
                }
            }
        }
    }

    pub fn boundary(&self, phi_plus: f64, phi_minus: f64, eps: f64) -> Result<BoundaryData> {
        BoundaryData::new(phi_plus, phi_minus, self.eta(eps))
    }
}

pub const HALF_EPS_SQUARED: EtaRule = EtaRule::Scaled { coef: 0.5, power: 2.0 };
pub const HALF_EPS: EtaRule = EtaRule::Scaled { coef: 0.5, power: 1.0 };

/// Cells of the reference uniform grid on `[-1, 1]`, so `h = 2^-11`.
pub const REFERENCE_CELLS: usize = 1 << 12;

/// `eps = 2^-j` for the reference runs.
pub const REFERENCE_EPS_EXPONENTS: [i32; 3] = [1, 3, 5];

/// One monovalent anion at 1.2 against mono- and divalent cations at 0.4.
pub fn reference_species() -> IonSystem {
    IonSystem::from_pairs(&[(1.0, 1.2)], &[(1.0, 0.4), (2.0, 0.4)]).expect("neutral")
}

/// Monovalent cation fixed at 1, divalent cation at `k`, anion balancing.
pub fn ratio_species(k: f64) -> Result<IonSystem> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("divalent concentration must be positive, got {k}")));
    }
    IonSystem::from_pairs(&[(1.0, 1.0 + 2.0 * k)], &[(1.0, 1.0), (2.0, k)])
}

#[derive(Debug, Clone)]
pub struct SweepPreset {
    pub name: String,
    pub sys: IonSystem,
    pub phi_plus: f64,
}

fn sweep(name: String, anions: &[(f64, f64)], cations: &[(f64, f64)]) -> SweepPreset {
    SweepPreset {
        name,
        sys: IonSystem::from_pairs(anions, cations).expect("preset species are neutral"),
        phi_plus: 1.0,
    }
}

/// Three species with total anion charge 1.2 and anion valence 1, 2, 3.
/// `panel` 1 uses a trace of divalent cation, panel 2 a trace of monovalent.
pub fn three_species_panel(panel: u8) -> Result<Vec<SweepPreset>> {
    let cations: [(f64, f64); 2] = match panel {
        1 => [(1.0, 1.199), (2.0, 0.0005)],
        2 => [(1.0, 0.002), (2.0, 0.599)],
        _ => return Err(Error::InvalidParameter(format!("three-species panel {panel} does not exist"))),
    };
    Ok([(1.0, 1.2), (2.0, 0.6), (3.0, 0.4)]
        .iter()
        .enumerate()
        .map(|(i, &an)| sweep(format!("three-{panel}-{}", i + 1), &[an], &cations))
        .collect())
}

/// Four-species cases with total charge 1.5.
pub fn four_species_case(case: u8) -> Result<Vec<SweepPreset>> {
    if case == 1 {
        let cations = [(1.0, 0.25), (2.0, 0.25), (3.0, 0.25)];
        return Ok([(1.0, 1.5), (2.0, 0.75), (3.0, 0.5), (4.0, 0.375)]
            .iter()
            .enumerate()
            .map(|(i, &an)| sweep(format!("four-1-{}", i + 1), &[an], &cations))
            .collect());
    }
    let (b1, b2) = match case {
        2 => (0.75, 0.375),
        3 => (0.5, 0.5),
        4 => (0.3, 0.6),
        _ => return Err(Error::InvalidParameter(format!("four-species case {case} does not exist"))),
    };
    Ok([(0.3, 0.6), (0.5, 0.5), (0.75, 0.375)]
        .iter()
        .enumerate()
        .map(|(i, &(a1, a2))| {
            sweep(
                format!("four-{case}-{}", i + 1),
                &[(1.0, a1), (2.0, a2)],
                &[(1.0, b1), (2.0, b2)],
            )
        })
        .collect())
}

/// Parameter sets whose interior limit `c(gamma)` has a turning point.
pub fn nonmonotone_case(case: char) -> Result<SweepPreset> {
    let name = format!("nonmonotone-{}", case.to_ascii_uppercase());
    Ok(match case.to_ascii_uppercase() {
        'A' => sweep(name, &[(2.0, 0.75)], &[(1.0, 0.9), (2.0, 0.12), (3.0, 0.12)]),
        'B' => sweep(name, &[(2.0, 0.75)], &[(1.0, 1.23), (2.0, 0.03), (3.0, 0.03), (4.0, 0.03)]),
        'C' => sweep(name, &[(3.0, 0.5)], &[(1.0, 0.6), (2.0, 0.1), (3.0, 0.1), (4.0, 0.1)]),
        'D' => sweep(name, &[(3.0, 0.5)], &[(1.0, 0.1), (2.0, 0.35), (3.0, 0.1), (4.0, 0.1)]),
        _ => return Err(Error::InvalidParameter(format!("non-monotone case {case} does not exist"))),
    })
}

/// Non-neutral demo: monovalent anion 1, monovalent cation 2, grounded walls.
pub const NONNEUTRAL_ALPHA: f64 = 1.0;
pub const NONNEUTRAL_BETA: f64 = 2.0;

/// Graded-mesh parameters for a non-neutral run at `eps`.
pub fn nonneutral_grid_params(eps: f64) -> (f64, f64, f64) {
    (eps * eps / 20.0, 1.15, eps / 4.0)
}
