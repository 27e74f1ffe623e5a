use anyhow::{anyhow, Result};
use ccpb_core::presets as core;
use ccpb_core::IonSystem;

use crate::config::*;

/// Every preset name, in listing order.
pub const NAMES: &[&str] = &[
    "fig2-I",
    "fig2-II",
    "table2-eta0",
    "table2-eta-half-eps2",
    "table2-eta-half-eps",
    "fig3-I",
    "fig3-II",
    "fig4-1",
    "fig4-2",
    "fig4-3",
    "fig4-4",
    "fig5-A",
    "fig5-B",
    "fig5-C",
    "fig5-D",
    "nonneutral",
];

fn set_from(name: &str, sys: &IonSystem) -> SpeciesSet {
    let pairs = |v: &[ccpb_core::Species]| v.iter().map(|s| [s.valence, s.concentration]).collect();
    SpeciesSet {
        name: name.to_string(),
        anions: pairs(sys.anions()),
        cations: pairs(sys.cations()),
    }
}

fn reference_eps() -> Vec<f64> {
    core::REFERENCE_EPS_EXPONENTS.iter().map(|&j| 2f64.powi(-j)).collect()
}

fn base(name: &str, eta_rule: EtaRuleConfig, species: Vec<SpeciesSet>) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        models: vec![ModelName::Ccpb],
        phi_plus: 1.0,
        phi_minus: -1.0,
        eps: reference_eps(),
        gammas: Vec::new(),
        kappa: Vec::new(),
        eta_rule,
        grid: GridConfig::Uniform { cells: core::REFERENCE_CELLS },
        solver: SolverSection::default(),
        sweep: SweepSection::default(),
        outputs: OutputSection::default(),
        species,
    }
}

const HALF_EPS2: EtaRuleConfig = EtaRuleConfig::Scaled { coef: 0.5, power: 2.0 };
const HALF_EPS: EtaRuleConfig = EtaRuleConfig::Scaled { coef: 0.5, power: 1.0 };

fn sweep_preset(name: &str, sets: Vec<core::SweepPreset>) -> ExperimentConfig {
    let mut c = base(
        name,
        HALF_EPS,
        sets.iter().map(|p| set_from(&p.name, &p.sys)).collect(),
    );
    c.eps.clear();
    c
}

fn table2(name: &str, eta_rule: EtaRuleConfig) -> ExperimentConfig {
    let species = [(1.0, "ratio-1"), (2.0, "ratio-1_2"), (3.0, "ratio-1_3")]
        .iter()
        .map(|&(k, label)| set_from(label, &core::ratio_species(k).expect("positive")))
        .collect();
    let mut c = base(name, eta_rule, species);
    c.eps = vec![2f64.powi(-5)];
    c
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let reference = || vec![set_from("reference", &core::reference_species())];
    let cfg = match name {
        "fig2-I" | "fig2-II" => {
            let rule = if name == "fig2-I" { HALF_EPS2 } else { HALF_EPS };
            let mut c = base(name, rule, reference());
            c.models = vec![ModelName::Ccpb, ModelName::Pb];
            c
        }
        "table2-eta0" => table2(name, EtaRuleConfig::Zero),
        "table2-eta-half-eps2" => table2(name, HALF_EPS2),
        "table2-eta-half-eps" => table2(name, HALF_EPS),
        "fig3-I" => sweep_preset(name, core::three_species_panel(1)?),
        "fig3-II" => sweep_preset(name, core::three_species_panel(2)?),
        "fig4-1" | "fig4-2" | "fig4-3" | "fig4-4" => {
            let case = name.as_bytes()[5] - b'0';
            sweep_preset(name, core::four_species_case(case)?)
        }
        "fig5-A" | "fig5-B" | "fig5-C" | "fig5-D" => {
            let case = name.chars().last().unwrap();
            sweep_preset(name, vec![core::nonmonotone_case(case)?])
        }
        "nonneutral" => {
            let sys = IonSystem::from_pairs(
                &[(1.0, core::NONNEUTRAL_ALPHA)],
                &[(1.0, core::NONNEUTRAL_BETA)],
            )?;
            let mut c = base(name, EtaRuleConfig::Zero, vec![set_from("alpha1-beta2", &sys)]);
            c.phi_plus = 0.0;
            c.phi_minus = 0.0;
            c.eps = vec![2f64.powi(-3), 2f64.powi(-4), 2f64.powi(-5)];
            c.kappa = vec![0.5];
            let (m, g, h) = core::nonneutral_grid_params(1.0);
            c.grid = GridConfig::Graded { min_cell_eps2: m, growth: g, interior_eps: h };
            c
        }
        _ => {
            return Err(anyhow!(
                "unknown preset `{name}`; run with --list-presets to see the available names"
            ))
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_preset_builds_and_round_trips() {
        for name in NAMES {
            let c = preset(name).unwrap();
            c.validate().unwrap();
            let text = c.to_toml().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c, "{name}");
        }
        assert!(preset("fig6").is_err());
    }

    #[test]
    fn sweep_presets_have_expected_variants() {
        assert_eq!(preset("fig3-I").unwrap().species.len(), 3);
        assert_eq!(preset("fig4-1").unwrap().species.len(), 4);
        assert_eq!(preset("fig4-3").unwrap().species.len(), 3);
        assert_eq!(preset("fig5-C").unwrap().species.len(), 1);
        let t2 = preset("table2-eta-half-eps").unwrap();
        assert_eq!(t2.limit_gammas().unwrap(), vec![0.5]);
        assert_eq!(t2.species[2].anions, vec![[1.0, 7.0]]);
    }
}
