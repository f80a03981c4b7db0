use crate::config::ExperimentConfig;
use crate::error::{input, Result};
use crate::report::Outcome;
use crate::Context;

mod energy_identity;
mod flat_monotonicity;
mod heinz;
mod hns_blowup;
mod lattice;
mod psi;
mod tangent_cone;
mod twistor;

pub(crate) mod maps;

pub struct Experiment {
    pub name: &'static str,
    pub description: &'static str,
    /// Keys accepted in `[params]`.
    pub params: &'static [&'static str],
    pub run: fn(&Context) -> Result<Outcome>,
}

impl Experiment {
    pub fn check_params(&self, config: &ExperimentConfig) -> Result<()> {
        for key in config.params.keys() {
            if !self.params.contains(&key.as_str()) {
                let valid = if self.params.is_empty() { "none".to_string() } else { self.params.join(", ") };
                return input(format!("{} does not take params.{key} (valid: {valid})", self.name));
            }
        }
        Ok(())
    }
}

/// Sorted by name.
static EXPERIMENTS: &[Experiment] = &[
    energy_identity::EXPERIMENT,
    flat_monotonicity::EXPERIMENT,
    heinz::EXPERIMENT,
    hns_blowup::EXPERIMENT,
    lattice::EXPERIMENT,
    psi::EXPERIMENT,
    tangent_cone::EXPERIMENT,
    twistor::EXPERIMENT,
];

pub fn list_experiments() -> &'static [Experiment] {
    EXPERIMENTS
}

pub fn find_experiment(name: &str) -> Result<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name).map_or_else(
        || {
            let names: Vec<&str> = EXPERIMENTS.iter().map(|e| e.name).collect();
            input(format!("unknown experiment `{name}`; valid names: {}", names.join(", ")))
        },
        Ok,
    )
}

/// `log₂(e_k / e_{k+1})` for successive halvings.
pub(crate) fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_sorted_and_unique() {
        let names: Vec<&str> = EXPERIMENTS.iter().map(|e| e.name).collect();
        let mut sorted = names.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(names, sorted);
    }

    #[test]
    fn unknown_name_lists_valid_ones() {
        let err = find_experiment("nope").err().unwrap().to_string();
        for e in EXPERIMENTS {
            assert!(err.contains(e.name), "{err}");
        }
    }
}
