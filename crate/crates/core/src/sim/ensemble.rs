use rayon::prelude::*;

use crate::error::Result;
use crate::model::DischargeSpec;

use super::path::{CoupledSample, PathRecord};
use super::simulate::{
    simulate_coupled_first_jumps, simulate_discharge, simulate_hard_wall,
    simulate_killed_discharge, SimOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathKind {
    HardWall,
    Discharge,
    KilledDischarge,
}

impl PathKind {
    pub fn name(self) -> &'static str {
        match self {
            PathKind::HardWall => "hard-wall",
            PathKind::Discharge => "discharge",
            PathKind::KilledDischarge => "discharge-killed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            PathKind::HardWall,
            PathKind::Discharge,
            PathKind::KilledDischarge,
        ]
        .into_iter()
        .find(|k| k.name() == s.trim())
    }
}

pub fn simulate_path(
    kind: PathKind,
    spec: &DischargeSpec,
    opts: &SimOptions,
    seed: u64,
    index: u64,
) -> Result<PathRecord> {
    match kind {
        PathKind::HardWall => simulate_hard_wall(spec, opts, seed, index),
        PathKind::Discharge => simulate_discharge(spec, opts, seed, index),
        PathKind::KilledDischarge => simulate_killed_discharge(spec, opts, seed, index),
    }
}

/// Paths `0..n_paths` of experiment `seed`, in index order regardless of
/// how the work was scheduled.
pub fn simulate_ensemble(
    kind: PathKind,
    spec: &DischargeSpec,
    opts: &SimOptions,
    seed: u64,
    n_paths: usize,
) -> Result<Vec<PathRecord>> {
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_path(kind, spec, opts, seed, i))
        .collect()
}

pub fn coupled_ensemble(
    spec: &DischargeSpec,
    opts: &SimOptions,
    seed: u64,
    n_paths: usize,
) -> Result<Vec<CoupledSample>> {
    (0..n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_coupled_first_jumps(spec, opts, seed, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::simulate::StartState;

    #[test]
    fn ensembles_match_single_paths_in_order() {
        let spec = DischargeSpec::default();
        let opts = SimOptions::new(1e-3, 0.5).with_start(StartState::Point(0.0));
        for kind in [
            PathKind::HardWall,
            PathKind::Discharge,
            PathKind::KilledDischarge,
        ] {
            let ens = simulate_ensemble(kind, &spec, &opts, 42, 64).unwrap();
            for (i, p) in ens.iter().enumerate() {
                assert_eq!(*p, simulate_path(kind, &spec, &opts, 42, i as u64).unwrap());
            }
            assert_eq!(PathKind::parse(kind.name()), Some(kind));
        }
        let c = coupled_ensemble(&spec, &opts, 1, 16).unwrap();
        assert_eq!(c.len(), 16);
        assert_eq!(
            c[3],
            simulate_coupled_first_jumps(&spec, &opts, 1, 3).unwrap()
        );
    }
}
