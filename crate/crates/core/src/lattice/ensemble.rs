use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::operators::{apply, build_operators, Boundary, Observable, Operators};
use super::sse::Trajectory;
use super::{fock_state, LatticeError, LatticeParams};
use crate::gfp::C;
use crate::quad::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PuritySample {
    pub time: f64,
    pub purity: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelatorEntry {
    pub a: Observable,
    pub b: Observable,
    pub x: usize,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CorrelatorEstimate {
    pub entries: Vec<CorrelatorEntry>,
}

impl CorrelatorEstimate {
    pub fn get(&self, a: Observable, b: Observable, x: usize) -> Option<&CorrelatorEntry> {
        self.entries.iter().find(|e| e.a == a && e.b == b && e.x == x)
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub sector_dim: usize,
    pub purity: Vec<PuritySample>,
    /// Largest |tr(|ψ⟩⟨ψ|)² − 1| over all trajectories and sample times.
    pub max_trajectory_purity_defect: f64,
    /// Largest pre-renormalization norm deviation seen in any step.
    pub max_norm_deviation: f64,
    pub correlators: CorrelatorEstimate,
    pub rho1: DMatrix<C>,
    pub states: Vec<DVector<C>>,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    (mean, (pairwise_sum(&dev) / (n - 1.0) / n).sqrt())
}

/// Unbiased estimate of tr ρ₁² from distinct trajectory pairs, with a jackknife error.
pub fn ensemble_purity(states: &[DVector<C>]) -> (f64, f64) {
    let n = states.len();
    if n < 2 {
        return (1.0, f64::NAN);
    }
    let mut rows = vec![0.0; n];
    for i in 0..n {
        for j in i + 1..n {
            let g = states[i].dotc(&states[j]).norm_sqr();
            rows[i] += g;
            rows[j] += g;
        }
    }
    let total = pairwise_sum(&rows);
    let nf = n as f64;
    let purity = total / (nf * (nf - 1.0));
    if n < 3 {
        return (purity, f64::NAN);
    }
    let loo: Vec<f64> = rows
        .iter()
        .map(|r| (total - 2.0 * r) / ((nf - 1.0) * (nf - 2.0)))
        .collect();
    let mean = pairwise_sum(&loo) / nf;
    let spread: Vec<f64> = loo.iter().map(|v| (v - mean).powi(2)).collect();
    (purity, ((nf - 1.0) / nf * pairwise_sum(&spread)).sqrt())
}

/// Ring-averaged connected correlator of one pure state,
/// `c[a][b][x] = (1/L) Σ_r Re⟨A_{r+x} B_r⟩ − ⟨A_{r+x}⟩⟨B_r⟩`.
pub fn state_correlators(ops: &Operators, psi: &DVector<C>) -> [[Vec<f64>; 4]; 4] {
    reference_correlators(ops, psi, None)
}

/// As [`state_correlators`] but with the reference site fixed to `r` when given.
pub fn reference_correlators(ops: &Operators, psi: &DVector<C>, r: Option<usize>) -> [[Vec<f64>; 4]; 4] {
    let l = ops.basis.sites;
    let images: Vec<Vec<DVector<C>>> = ops
        .local
        .iter()
        .map(|ops_x| ops_x.iter().map(|a| apply(a, psi)).collect())
        .collect();
    let means: Vec<Vec<f64>> = images
        .iter()
        .map(|v| v.iter().map(|phi| psi.dotc(phi).re).collect())
        .collect();
    let refs: Vec<usize> = r.map_or_else(|| (0..l).collect(), |r| vec![r]);
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            (0..l)
                .map(|x| {
                    let terms: Vec<f64> = refs
                        .iter()
                        .map(|&r| {
                            let y = ops.basis.wrap(r, x as isize);
                            images[a][y].dotc(&images[b][r]).re - means[a][y] * means[b][r]
                        })
                        .collect();
                    pairwise_sum(&terms) / refs.len() as f64
                })
                .collect()
        })
    })
}

/// Trajectory average of [`reference_correlators`] with the trajectory-to-trajectory error.
pub fn correlator_estimate(ops: &Operators, states: &[DVector<C>], r: Option<usize>) -> CorrelatorEstimate {
    let per_state: Vec<[[Vec<f64>; 4]; 4]> = states.iter().map(|s| reference_correlators(ops, s, r)).collect();
    let mut entries = Vec::new();
    for a in Observable::ALL {
        for b in Observable::ALL {
            for x in 0..ops.basis.sites {
                let vals: Vec<f64> = per_state.iter().map(|c| c[a.index()][b.index()][x]).collect();
                let (value, stderr) = mean_and_stderr(&vals);
                entries.push(CorrelatorEntry { a, b, x, value, stderr });
            }
        }
    }
    CorrelatorEstimate { entries }
}

/// Two-replica form ½⟨(A⁽¹⁾ − A⁽²⁾)(B⁽¹⁾ − B⁽²⁾)⟩ on ρ₂ = avg |ψ⟩⟨ψ|⊗|ψ⟩⟨ψ|,
/// ring-averaged. The replica pair ψ⊗ψ is stored as the D×D matrix ψψᵀ,
/// on which A⊗1 acts from the left and 1⊗A from the right.
pub fn two_replica_correlator(ops: &Operators, states: &[DVector<C>], a: Observable, b: Observable, x: usize) -> f64 {
    let l = ops.basis.sites;
    let mut values = Vec::with_capacity(states.len());
    for psi in states {
        let pair = psi * psi.transpose();
        let relative = |obs: Observable, site: usize| {
            let op = super::operators::dense(&ops.local[obs.index()][site]);
            &op * &pair - &pair * op.transpose()
        };
        let terms: Vec<f64> = (0..l)
            .map(|r| {
                let y = ops.basis.wrap(r, x as isize);
                0.5 * relative(a, y).dotc(&relative(b, r)).re
            })
            .collect();
        values.push(pairwise_sum(&terms) / l as f64);
    }
    pairwise_sum(&values) / states.len() as f64
}

/// ρ₁ = trajectory average of |ψ⟩⟨ψ|.
pub fn average_state(states: &[DVector<C>]) -> DMatrix<C> {
    let d = states.first().map_or(0, |s| s.len());
    let mut rho = DMatrix::zeros(d, d);
    for s in states {
        rho += s * s.adjoint();
    }
    rho / C::new(states.len() as f64, 0.0)
}

pub fn run_ensemble(p: &LatticeParams) -> Result<EnsembleResult, LatticeError> {
    p.validate()?;
    if p.n_traj < 1 {
        return Err(LatticeError::InvalidParams("n_traj must be at least 1".into()));
    }
    let ops = build_operators(p, Boundary::Ring)?;
    let psi0 = fock_state(&ops.basis);
    let mut trajectories: Vec<Trajectory> = (0..p.n_traj)
        .map(|i| Trajectory::new(psi0.clone(), p.seed, i as u64))
        .collect();

    let total_steps = (p.t_final / p.dt).round() as usize;
    let samples = p.samples.clamp(1, total_steps.max(1));
    let mut marks: Vec<usize> = (0..=samples).map(|k| k * total_steps / samples).collect();
    marks.dedup();

    let mut purity = Vec::with_capacity(marks.len());
    let mut max_defect = 0.0f64;
    let mut max_dev = 0.0f64;
    let mut record = |trajs: &[Trajectory], step: usize| {
        let states: Vec<DVector<C>> = trajs.iter().map(|t| t.psi.clone()).collect();
        let (value, stderr) = ensemble_purity(&states);
        for s in &states {
            max_defect = max_defect.max((s.norm_squared().powi(2) - 1.0).abs());
        }
        purity.push(PuritySample {
            time: step as f64 * p.dt,
            purity: value,
            stderr,
        });
    };
    record(&trajectories, 0);
    for w in marks.windows(2) {
        let steps = w[1] - w[0];
        let devs = trajectories
            .par_iter_mut()
            .map(|t| {
                let mut worst = 0.0f64;
                for _ in 0..steps {
                    worst = worst.max(t.step(&ops, p.dt)?);
                }
                Ok(worst)
            })
            .collect::<Result<Vec<f64>, LatticeError>>()?;
        max_dev = devs.into_iter().fold(max_dev, f64::max);
        record(&trajectories, w[1]);
    }

    let states: Vec<DVector<C>> = trajectories.into_iter().map(|t| t.psi).collect();
    Ok(EnsembleResult {
        sector_dim: ops.basis.dim(),
        purity,
        max_trajectory_purity_defect: max_defect,
        max_norm_deviation: max_dev,
        correlators: correlator_estimate(&ops, &states, None),
        rho1: average_state(&states),
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Sector;

    fn small(n_traj: usize) -> LatticeParams {
        LatticeParams {
            sites: 3,
            sector: Sector::Spin { n_up: 1, n_dn: 1 },
            gamma: 0.8,
            dt: 0.01,
            t_final: 1.0,
            n_traj,
            samples: 5,
            ..LatticeParams::default()
        }
    }

    #[test]
    fn single_trajectory_reduces_to_its_connected_correlator() {
        let p = small(1);
        let res = run_ensemble(&p).unwrap();
        let ops = build_operators(&p, Boundary::Ring).unwrap();
        let direct = state_correlators(&ops, &res.states[0]);
        for e in &res.correlators.entries {
            assert_eq!(e.value, direct[e.a.index()][e.b.index()][e.x]);
            assert!(e.stderr.is_nan());
        }
    }

    #[test]
    fn replica_form_matches_connected_form() {
        let p = small(6);
        let res = run_ensemble(&p).unwrap();
        let ops = build_operators(&p, Boundary::Ring).unwrap();
        for a in Observable::ALL {
            for b in Observable::ALL {
                for x in 0..3 {
                    let lhs = res.correlators.get(a, b, x).unwrap().value;
                    let rhs = two_replica_correlator(&ops, &res.states, a, b, x);
                    assert!((lhs - rhs).abs() < 1e-12, "{a:?} {b:?} {x}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn identical_states_have_unit_purity() {
        let psi = fock_state(&crate::lattice::Basis::new(3, Sector::Total { n: 2 }).unwrap());
        let (p, err) = ensemble_purity(&vec![psi; 5]);
        assert!((p - 1.0).abs() < 1e-15);
        assert!(err.abs() < 1e-15);
    }

    #[test]
    fn orthogonal_states_have_zero_pair_overlap() {
        let states: Vec<DVector<C>> = (0..4)
            .map(|i| {
                let mut v = DVector::zeros(4);
                v[i] = C::new(1.0, 0.0);
                v
            })
            .collect();
        assert_eq!(ensemble_purity(&states).0, 0.0);
        let rho = average_state(&states);
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn result_is_independent_of_thread_count() {
        let p = small(8);
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let wide = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = serial.install(|| run_ensemble(&p).unwrap());
        let b = wide.install(|| run_ensemble(&p).unwrap());
        assert_eq!(a.states, b.states);
        assert_eq!(a.purity, b.purity);
        assert_eq!(a.correlators, b.correlators);
    }

    #[test]
    fn spin_numbers_are_conserved_per_trajectory() {
        let p = LatticeParams {
            sector: Sector::Total { n: 3 },
            ..small(4)
        };
        let res = run_ensemble(&p).unwrap();
        let ops = build_operators(&p, Boundary::Ring).unwrap();
        let psi0 = fock_state(&ops.basis);
        for s in 0..2 {
            let n0 = psi0.dotc(&apply(&ops.number[s], &psi0)).re;
            for psi in &res.states {
                assert!((psi.dotc(&apply(&ops.number[s], psi)).re - n0).abs() < 1e-12);
            }
        }
    }
}
