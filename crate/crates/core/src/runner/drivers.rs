//! Deterministic drivers producing per-kick observable series for the
//! quantum state and the classical ensemble.

use rayon::prelude::*;

use crate::classical::{
    bin_index, ClassicalParams, EnsembleSpec, PhasePoint,
};
use crate::quantum::{
    apply_floquet, build_floquet, coherent_state, dist_jz, dist_lz, expect_components,
    product_state, variance_l, Distribution, ModelParams, QuantumNumbers, SpinExpectations,
};
use crate::{Error, Result, Spin};

use super::MAX_QUANTUM_SPIN;

/// Rounds `l / r` to the nearest half-integer: the partner spin of a scan
/// member at fixed magnitude ratio.
pub fn partner_spin(l: f64, r: f64) -> Result<Spin> {
    let doubled = (2.0 * l / r).round();
    if doubled < 1.0 {
        return Err(Error::Config(format!(
            "l = {l} with r = {r} leaves no valid partner spin"
        )));
    }
    Spin::new(doubled / 2.0)
}

pub fn check_capacity(qn: &QuantumNumbers) -> Result<()> {
    for j in [qn.s, qn.l] {
        if j.value() > MAX_QUANTUM_SPIN {
            return Err(Error::Capacity(format!(
                "quantum spin j = {} exceeds the validated maximum {}",
                j, MAX_QUANTUM_SPIN
            )));
        }
    }
    Ok(())
}

/// Per-kick quantum observables, indices `0..=n_kicks`.
pub struct QuantumSeries {
    pub expect: Vec<SpinExpectations>,
    pub var_l: Vec<f64>,
    pub dist_lz: Vec<Distribution>,
    pub dist_jz: Vec<Distribution>,
    pub final_norm: f64,
}

/// Evolves a coherent product state for `n_kicks`, recording expectation
/// values, the normalized variance and (optionally) both marginal
/// distributions at every kick.
pub fn run_quantum_series(
    qn: &QuantumNumbers,
    params: &ModelParams,
    ic: [f64; 4],
    n_kicks: usize,
    keep_dists: bool,
) -> Result<QuantumSeries> {
    check_capacity(qn)?;
    let f = build_floquet(qn, params)?;
    let sv = coherent_state(qn.s, ic[0], ic[1])?;
    let lv = coherent_state(qn.l, ic[2], ic[3])?;
    let mut psi = product_state(qn, &sv, &lv)?;
    let mut out = QuantumSeries {
        expect: Vec::with_capacity(n_kicks + 1),
        var_l: Vec::with_capacity(n_kicks + 1),
        dist_lz: Vec::new(),
        dist_jz: Vec::new(),
        final_norm: 1.0,
    };
    for kick in 0..=n_kicks {
        out.expect.push(expect_components(&psi));
        out.var_l.push(variance_l(&psi));
        if keep_dists {
            out.dist_lz.push(dist_lz(&psi));
            out.dist_jz.push(dist_jz(&psi));
        }
        if kick < n_kicks {
            psi = apply_floquet(&f, &psi)?;
        }
    }
    out.final_norm = psi.norm();
    Ok(out)
}

/// Per-kick classical ensemble observables.
pub struct ClassicalSeries {
    /// Mean unit vector `<L~>` at each kick.
    pub mean_l_tilde: Vec<[f64; 3]>,
    /// Kicks at which histograms were recorded.
    pub hist_kicks: Vec<usize>,
    /// `L_z` counts per recorded kick, label order `m = l, ..., -l`.
    pub counts_lz: Vec<Vec<u64>>,
    /// `J_z` counts per recorded kick.
    pub counts_jz: Vec<Vec<u64>>,
    pub n_traj: u64,
}

impl ClassicalSeries {
    /// Normalized `L_z` distribution at a recorded kick.
    pub fn dist_lz(&self, kick: usize, l: Spin) -> Option<Distribution> {
        let slot = self.hist_kicks.iter().position(|&k| k == kick)?;
        let labels = l.m_values().collect();
        let probs = self.counts_lz[slot]
            .iter()
            .map(|&c| c as f64 / self.n_traj as f64)
            .collect();
        Some(Distribution::new(labels, probs).expect("counts are non-negative"))
    }

    /// Normalized `J_z` distribution at a recorded kick.
    pub fn dist_jz(&self, kick: usize, s: Spin, l: Spin) -> Option<Distribution> {
        let slot = self.hist_kicks.iter().position(|&k| k == kick)?;
        let top = s.value() + l.value();
        let n = s.dim() + l.dim() - 1;
        let labels = (0..n).map(|i| top - i as f64).collect();
        let probs = self.counts_jz[slot]
            .iter()
            .map(|&c| c as f64 / self.n_traj as f64)
            .collect();
        Some(Distribution::new(labels, probs).expect("counts are non-negative"))
    }
}

struct ChunkPartial {
    sum_l: Vec<[f64; 3]>,
    counts_lz: Vec<Vec<u64>>,
    counts_jz: Vec<Vec<u64>>,
}

/// Streams the ensemble through `n_kicks` in chunks of `chunk_size`
/// trajectories. Partial sums are accumulated sequentially inside each
/// chunk and merged in chunk order, so the output is bit-identical for
/// any worker count; histogram counts are integers and order-free.
pub fn run_classical_series(
    qn: &QuantumNumbers,
    params: &ClassicalParams,
    ic: [f64; 4],
    n_kicks: usize,
    n_traj: u64,
    master_seed: u64,
    chunk_size: usize,
    hist_kicks: &[usize],
) -> ClassicalSeries {
    let spec = EnsembleSpec::new(qn, ic, master_seed);
    let (sin_a, cos_a) = params.a.sin_cos();
    let (mag_s, mag_l) = (qn.s.magnitude(), qn.l.magnitude());
    let (top_l, top_j) = (qn.l.value(), qn.s.value() + qn.l.value());
    let (nb_l, nb_j) = (qn.l.dim(), qn.s.dim() + qn.l.dim() - 1);
    let hist_slot: Vec<Option<usize>> = (0..=n_kicks)
        .map(|k| hist_kicks.iter().position(|&h| h == k))
        .collect();

    let chunk_size = chunk_size.max(1);
    let n_chunks = n_traj.div_ceil(chunk_size as u64);
    let partials: Vec<ChunkPartial> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * chunk_size as u64;
            let hi = (lo + chunk_size as u64).min(n_traj);
            let mut points: Vec<PhasePoint> = (lo..hi).map(|i| spec.point(i)).collect();
            let mut partial = ChunkPartial {
                sum_l: vec![[0.0; 3]; n_kicks + 1],
                counts_lz: vec![vec![0u64; nb_l]; hist_kicks.len()],
                counts_jz: vec![vec![0u64; nb_j]; hist_kicks.len()],
            };
            for kick in 0..=n_kicks {
                let acc = &mut partial.sum_l[kick];
                for p in &points {
                    acc[0] += p.l[0];
                    acc[1] += p.l[1];
                    acc[2] += p.l[2];
                }
                if let Some(slot) = hist_slot[kick] {
                    let (clz, cjz) = (
                        &mut partial.counts_lz[slot],
                        &mut partial.counts_jz[slot],
                    );
                    for p in &points {
                        clz[bin_index(p.l[2] * mag_l, top_l, nb_l)] += 1;
                        cjz[bin_index(p.s[2] * mag_s + p.l[2] * mag_l, top_j, nb_j)] += 1;
                    }
                }
                if kick < n_kicks {
                    for p in &mut points {
                        *p = crate::classical::step_kernel(p, params.gamma, params.r, sin_a, cos_a);
                    }
                }
            }
            partial
        })
        .collect();

    let mut out = ClassicalSeries {
        mean_l_tilde: vec![[0.0; 3]; n_kicks + 1],
        hist_kicks: hist_kicks.to_vec(),
        counts_lz: vec![vec![0u64; nb_l]; hist_kicks.len()],
        counts_jz: vec![vec![0u64; nb_j]; hist_kicks.len()],
        n_traj,
    };
    for partial in partials {
        for (total, part) in out.mean_l_tilde.iter_mut().zip(&partial.sum_l) {
            for k in 0..3 {
                total[k] += part[k];
            }
        }
        for (total, part) in out.counts_lz.iter_mut().zip(&partial.counts_lz) {
            for (t, p) in total.iter_mut().zip(part) {
                *t += p;
            }
        }
        for (total, part) in out.counts_jz.iter_mut().zip(&partial.counts_jz) {
            for (t, p) in total.iter_mut().zip(part) {
                *t += p;
            }
        }
    }
    let n = n_traj.max(1) as f64;
    for m in &mut out.mean_l_tilde {
        for k in 0..3 {
            m[k] /= n;
        }
    }
    out
}

/// A single classical trajectory launched from the given angles, recorded
/// as unit vectors at every kick.
pub fn run_single_trajectory(
    params: &ClassicalParams,
    ic: [f64; 4],
    n_kicks: usize,
) -> Vec<PhasePoint> {
    let mut p = PhasePoint::from_angles(ic);
    let mut out = Vec::with_capacity(n_kicks + 1);
    out.push(p);
    for k in 1..=n_kicks {
        p = crate::classical::map_step(&p, params);
        if k % 1000 == 0 {
            p.renormalize();
        }
        out.push(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn qn(s: f64, l: f64) -> QuantumNumbers {
        QuantumNumbers::new(Spin::new(s).unwrap(), Spin::new(l).unwrap())
    }

    #[test]
    fn partner_spin_rounds_to_half_integers() {
        assert_eq!(partner_spin(11.0, 1.1).unwrap().value(), 10.0);
        assert_eq!(partner_spin(154.0, 1.1).unwrap().value(), 140.0);
        assert_eq!(partner_spin(22.0, 1.1).unwrap().value(), 20.0);
        // 23/1.1 = 20.909... rounds to 21 on the half-integer grid
        assert_eq!(partner_spin(23.0, 1.1).unwrap().value(), 21.0);
    }

    #[test]
    fn capacity_limit_enforced() {
        let big = qn(10.0, 251.0);
        assert!(matches!(check_capacity(&big), Err(Error::Capacity(_))));
        assert!(check_capacity(&qn(250.0, 250.0)).is_ok());
    }

    #[test]
    fn quantum_series_shapes_and_norm() {
        let q = qn(5.0, 6.0);
        let p = ModelParams::from_gamma(5.0, 2.835, &q);
        let ic = [0.7, 1.2, 2.4, 0.3];
        let s = run_quantum_series(&q, &p, ic, 10, true).unwrap();
        assert_eq!(s.expect.len(), 11);
        assert_eq!(s.dist_lz.len(), 11);
        assert!((s.final_norm - 1.0).abs() < 1e-12);
        // variance starts at the coherent-state floor 1/(l+1)
        assert_abs_diff_eq!(s.var_l[0], 1.0 / 7.0, epsilon = 1e-10);
    }

    #[test]
    fn classical_series_matches_materialized_path() {
        let q = qn(10.0, 11.0);
        let params = ClassicalParams::from_quantum(&q, 5.0, 2.835);
        let ic = [0.35, 0.70, 2.79, 2.27];
        let n_traj = 10_000u64;
        let series = run_classical_series(&q, &params, ic, 5, n_traj, 99, 1 << 10, &[0, 5]);
        // same numbers through the materialized ensemble API
        let e = crate::classical::make_ensemble(&q, ic, n_traj as usize, 99);
        let d0 = crate::classical::binned_marginal_lz(&e, q.l);
        let got0 = series.dist_lz(0, q.l).unwrap();
        for (a, b) in d0.probs().iter().zip(got0.probs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        let evolved = crate::classical::evolve_ensemble(&e, &params, 5);
        let d5 = crate::classical::binned_marginal_jz(&evolved, q.s, q.l);
        let got5 = series.dist_jz(5, q.s, q.l).unwrap();
        for (a, b) in d5.probs().iter().zip(got5.probs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        let m = crate::classical::mean_unit_l(evolved.points(), 1 << 10);
        for k in 0..3 {
            assert_abs_diff_eq!(series.mean_l_tilde[5][k], m[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn classical_series_is_worker_invariant() {
        let q = qn(5.0, 5.5);
        let params = ClassicalParams::from_quantum(&q, 5.0, 1.215);
        let ic = [1.0, 0.5, 2.0, 1.5];
        let run = || run_classical_series(&q, &params, ic, 4, 7777, 3, 256, &[2, 4]);
        let a = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(run);
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(run);
        assert_eq!(a.mean_l_tilde, b.mean_l_tilde);
        assert_eq!(a.counts_lz, b.counts_lz);
        assert_eq!(a.counts_jz, b.counts_jz);
    }

    #[test]
    fn single_trajectory_matches_map_step() {
        let params = ClassicalParams::new(5.0, 2.835, 1.1);
        let ic = [0.3, 0.6, 2.9, 1.0];
        let traj = run_single_trajectory(&params, ic, 20);
        let mut p = PhasePoint::from_angles(ic);
        for (k, expect) in traj.iter().enumerate() {
            assert_eq!(p, *expect, "kick {k}");
            p = crate::classical::map_step(&p, &params);
        }
    }
}
