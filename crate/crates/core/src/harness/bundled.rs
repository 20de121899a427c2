//! Experiment configs shipped with the crate.

use crate::error::{invalid, Result};

use super::config::ExperimentConfig;

#[derive(Debug, Clone, Copy)]
pub struct Bundled {
    pub name: &'static str,
    pub text: &'static str,
}

impl Bundled {
    pub fn config(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(self.text)
    }
}

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(Bundled {
            name: $name,
            text: include_str!(concat!("../../configs/", $name, ".cfg")),
        }),*]
    };
}

/// Every shipped config, sorted by name. Names starting with `quick_`
/// form the `quick` suite; the rest form the `full` suite.
pub const ALL: &[Bundled] = bundled![
    "bandit_tau05_gd",
    "bandit_tau05_rm",
    "bandit_tau5_gd",
    "bandit_tau5_rm",
    "glm_leaky_relu_gd",
    "glm_leaky_relu_rm",
    "glm_relu_gd",
    "glm_relu_rm",
    "glm_sigmoid_gd",
    "glm_sigmoid_rm",
    "hard_gd",
    "hard_rm",
    "mass_spring_gd_armijo",
    "mass_spring_gd_large",
    "mass_spring_gd_small",
    "mass_spring_rm_armijo",
    "mass_spring_rm_fixed",
    "quick_bandit_rm",
    "quick_glm_gd",
    "quick_hard_rm",
    "quick_mass_spring_rm_armijo",
    "quick_quadratic_rm",
    "quick_radial_rm",
    "quick_svm_rm",
    "radial_gd",
    "radial_t10_mu1e-10",
    "radial_t1_mu1e-10",
    "radial_t1_mu1e-5",
    "svm_gd",
    "svm_rm",
];

pub const SUITES: [&str; 3] = ["quick", "full", "all"];

pub fn suite(name: &str) -> Result<Vec<&'static Bundled>> {
    let quick = |b: &&Bundled| b.name.starts_with("quick_");
    match name {
        "quick" => Ok(ALL.iter().filter(quick).collect()),
        "full" => Ok(ALL.iter().filter(|b| !quick(b)).collect()),
        "all" => Ok(ALL.iter().collect()),
        other => Err(invalid("suite", format!("unknown suite `{other}`; expected quick, full or all"))),
    }
}

pub fn find(name: &str) -> Option<&'static Bundled> {
    ALL.iter().find(|b| b.name == name)
}
