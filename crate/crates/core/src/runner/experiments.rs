//! The experiment families: regime map, relaxation, variance growth,
//! break-time scan, equilibrium scaling scan, Ehrenfest scan, and the
//! coherent-state moment table.

use rand::RngExt;
use rayon::prelude::*;

use crate::analysis::{
    break_time, delta_series, ehrenfest_break_time, fit_break_law, fit_ehrenfest_law,
    fit_exponential, fit_exponential_pinned, fit_scaling, invariant_violation, relative_r,
    sigma_dist, FitResult, TimeSeries,
};
use crate::classical::{
    lyapunov_max, trajectory_rng, vector_model_moment, ClassicalParams, PhasePoint,
    DEFAULT_CHUNK_SIZE,
};
use crate::quantum::{
    coherent_x_moment, microcanonical_jz, microcanonical_lz, shannon_entropy, Distribution,
    ModelParams, QuantumNumbers,
};
use crate::{Error, Result, Spin};

use super::config::{Config, Experiment};
use super::csv::{fmt, CsvTable};
use super::drivers::{
    partner_spin, run_classical_series, run_quantum_series, run_single_trajectory,
    ClassicalSeries, QuantumSeries,
};

/// Everything an experiment produces: the CSV tables plus structured
/// results for programmatic callers.
pub struct ExperimentOutput {
    pub tables: Vec<CsvTable>,
    pub fits: Vec<(String, FitResult)>,
}

/// Runs the experiment selected by `which` under `config`.
pub fn run_experiment(which: Experiment, config: &Config) -> Result<ExperimentOutput> {
    if let Some(declared) = config.get("experiment") {
        if declared != which.name() {
            return Err(Error::Config(format!(
                "config declares experiment '{declared}' but '{}' was requested",
                which.name()
            )));
        }
    }
    match which {
        Experiment::RegimeMap => run_regime_map(config),
        Experiment::Relax => run_relax(config),
        Experiment::VarianceGrowth => run_variance_growth(config),
        Experiment::BreaktimeScan => run_breaktime_scan(config),
        Experiment::ScalingScan => run_scaling_scan(config),
        Experiment::EhrenfestScan => run_ehrenfest_scan(config),
        Experiment::AppendixA => run_appendix_a(config),
    }
}

/// Finite-time Lyapunov threshold separating regular from chaotic
/// samples. KAM orbits grow the tangent vector linearly, so their
/// finite-time exponent decays like `ln(n)/n`; the cut sits above that
/// floor and far below the chaotic-zone exponents.
pub fn lyapunov_cut(n_steps: usize) -> f64 {
    (2.0 * (n_steps as f64).ln()).max(3.0) / n_steps as f64
}

fn qn_from_config(config: &Config) -> Result<QuantumNumbers> {
    let s = Spin::new(config.f64("s")?)?;
    let l = Spin::new(config.f64("l")?)?;
    Ok(QuantumNumbers::new(s, l))
}

fn classify(fraction: f64) -> &'static str {
    if fraction <= 0.01 {
        "regular"
    } else if fraction >= 0.99 {
        "chaotic"
    } else {
        "mixed"
    }
}

fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Chaotic fraction of the kinematic surface over a `(gamma, r)` grid.
/// Initial conditions are drawn from the invariant measure; a sample is
/// chaotic when its finite-time Lyapunov exponent exceeds the cut.
pub fn run_regime_map(config: &Config) -> Result<ExperimentOutput> {
    let a = config.f64("a")?;
    let gammas = grid(
        config.f64("gamma_min")?,
        config.f64_or("gamma_max", config.f64("gamma_min")?)?,
        config.usize_or("gamma_steps", 1)?,
    );
    let rs = grid(
        config.f64("r_min")?,
        config.f64_or("r_max", config.f64("r_min")?)?,
        config.usize_or("r_steps", 1)?,
    );
    if gammas.is_empty() || rs.is_empty() {
        return Err(Error::Config("regime_map grid is empty".into()));
    }
    let samples = config.usize_or("samples_per_cell", 100)?;
    if samples < 50 {
        return Err(Error::Config(
            "regime_map needs samples_per_cell >= 50".into(),
        ));
    }
    let lyap_steps = config.usize_or("lyap_steps", 4000)?;
    let master_seed = config.u64_or("master_seed", 1)?;
    let cut = lyapunov_cut(lyap_steps);

    let cells: Vec<(f64, f64)> = rs
        .iter()
        .flat_map(|&r| gammas.iter().map(move |&g| (g, r)))
        .collect();
    let fractions: Vec<f64> = cells
        .par_iter()
        .enumerate()
        .map(|(cell_idx, &(gamma, r))| {
            let params = ClassicalParams::new(a, gamma, r);
            let mut chaotic = 0usize;
            for k in 0..samples {
                let idx = (cell_idx * samples + k) as u64;
                let mut rng = trajectory_rng(master_seed, idx);
                let z1: f64 = rng.random::<f64>() * 2.0 - 1.0;
                let f1: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                let z2: f64 = rng.random::<f64>() * 2.0 - 1.0;
                let f2: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                let p0 = PhasePoint {
                    s: [
                        (1.0 - z1 * z1).sqrt() * f1.cos(),
                        (1.0 - z1 * z1).sqrt() * f1.sin(),
                        z1,
                    ],
                    l: [
                        (1.0 - z2 * z2).sqrt() * f2.cos(),
                        (1.0 - z2 * z2).sqrt() * f2.sin(),
                        z2,
                    ],
                };
                if lyapunov_max(&p0, &params, lyap_steps) > cut {
                    chaotic += 1;
                }
            }
            chaotic as f64 / samples as f64
        })
        .collect();

    let mut table = CsvTable::new("regime_map.csv", &["gamma", "r", "chaotic_fraction", "class"]);
    table.meta("lambda_cut", fmt(cut));
    for (&(gamma, r), &frac) in cells.iter().zip(&fractions) {
        table.row(vec![
            fmt(gamma),
            fmt(r),
            fmt(frac),
            classify(frac).to_string(),
        ]);
    }
    Ok(ExperimentOutput {
        tables: vec![table],
        fits: Vec::new(),
    })
}

/// Shared setup for experiments that pair one quantum run with one
/// classical ensemble at fixed `(s, l)`.
struct PairedRun {
    quantum: QuantumSeries,
    classical: ClassicalSeries,
}

fn paired_run(
    config: &Config,
    qn: QuantumNumbers,
    n_kicks: usize,
    hist_kicks: &[usize],
    keep_quantum_dists: bool,
) -> Result<PairedRun> {
    let a = config.f64("a")?;
    let gamma = config.f64("gamma")?;
    let ic = config.ic_angles()?;
    let qparams = ModelParams::from_gamma(a, gamma, &qn);
    let cparams = ClassicalParams::from_quantum(&qn, a, gamma);
    let quantum = run_quantum_series(&qn, &qparams, ic, n_kicks, keep_quantum_dists)?;
    let classical = run_classical_series(
        &qn,
        &cparams,
        ic,
        n_kicks,
        config.u64("n_traj")?,
        config.u64_or("master_seed", 1)?,
        config.usize_or("chunk_size", DEFAULT_CHUNK_SIZE)?,
        hist_kicks,
    );
    Ok(PairedRun { quantum, classical })
}

/// Structured relaxation observables, exposed for the acceptance suite.
pub struct RelaxSeries {
    pub lz_tilde_q: Vec<f64>,
    pub lz_tilde_c: Vec<f64>,
    pub delta_lz: Vec<f64>,
    pub var_q: Vec<f64>,
    pub var_c: Vec<f64>,
    pub h_lz_q: Vec<f64>,
    pub h_lz_c: Vec<f64>,
    pub h_jz_q: Vec<f64>,
    pub h_jz_c: Vec<f64>,
    pub sigma_lz: Vec<f64>,
    pub sigma_jz: Vec<f64>,
}

/// Full relaxation pipeline: means, variances, entropies and bin-wise
/// fluctuation measures per kick, plus distribution snapshots.
pub fn run_relax_series(config: &Config) -> Result<(ExperimentOutput, RelaxSeries)> {
    let qn = qn_from_config(config)?;
    let n_kicks = config.usize("n_kicks")?;
    let all_kicks: Vec<usize> = (0..=n_kicks).collect();
    let run = paired_run(config, qn, n_kicks, &all_kicks, true)?;
    let (mag_l, nb_l) = (qn.l.magnitude(), qn.l.dim());
    let nb_j = qn.s.dim() + qn.l.dim() - 1;

    let mut series = RelaxSeries {
        lz_tilde_q: Vec::new(),
        lz_tilde_c: Vec::new(),
        delta_lz: Vec::new(),
        var_q: run.quantum.var_l.clone(),
        var_c: Vec::new(),
        h_lz_q: Vec::new(),
        h_lz_c: Vec::new(),
        h_jz_q: Vec::new(),
        h_jz_c: Vec::new(),
        sigma_lz: Vec::new(),
        sigma_jz: Vec::new(),
    };
    for kick in 0..=n_kicks {
        let lq = run.quantum.expect[kick].l;
        let lc = run.classical.mean_l_tilde[kick];
        series.lz_tilde_q.push(lq[2] / mag_l);
        series.lz_tilde_c.push(lc[2]);
        series.delta_lz.push((lq[2] - lc[2] * mag_l).abs());
        series
            .var_c
            .push(1.0 - (lc[0] * lc[0] + lc[1] * lc[1] + lc[2] * lc[2]));
        let dq_lz = &run.quantum.dist_lz[kick];
        let dq_jz = &run.quantum.dist_jz[kick];
        let dc_lz = run.classical.dist_lz(kick, qn.l).expect("recorded kick");
        let dc_jz = run
            .classical
            .dist_jz(kick, qn.s, qn.l)
            .expect("recorded kick");
        series.h_lz_q.push(shannon_entropy(dq_lz));
        series.h_lz_c.push(shannon_entropy(&dc_lz));
        series.h_jz_q.push(shannon_entropy(dq_jz));
        series.h_jz_c.push(shannon_entropy(&dc_jz));
        series.sigma_lz.push(sigma_dist(dq_lz, &dc_lz)?);
        series.sigma_jz.push(sigma_dist(dq_jz, &dc_jz)?);
    }

    let mut means = CsvTable::new(
        "means.csv",
        &["n", "lz_q", "lz_c", "lz_tilde_q", "lz_tilde_c", "delta_lz"],
    );
    means.meta("norm_drift", fmt((run.quantum.final_norm - 1.0).abs()));
    let mut variance = CsvTable::new("variance.csv", &["n", "var_q", "var_c"]);
    let mut entropy = CsvTable::new(
        "entropy.csv",
        &["n", "h_lz_q", "h_lz_c", "h_jz_q", "h_jz_c"],
    );
    entropy.meta(
        "h_mc_lz",
        fmt(shannon_entropy(&microcanonical_lz(qn.l))),
    );
    entropy.meta(
        "h_mc_jz",
        fmt(shannon_entropy(&microcanonical_jz(qn.s, qn.l))),
    );
    let mut sigma = CsvTable::new("sigma.csv", &["n", "sigma_lz", "sigma_jz", "r_lz", "r_jz"]);
    for kick in 0..=n_kicks {
        let lq = run.quantum.expect[kick].l;
        means.row(vec![
            kick.to_string(),
            fmt(lq[2]),
            fmt(run.classical.mean_l_tilde[kick][2] * mag_l),
            fmt(series.lz_tilde_q[kick]),
            fmt(series.lz_tilde_c[kick]),
            fmt(series.delta_lz[kick]),
        ]);
        variance.row(vec![
            kick.to_string(),
            fmt(series.var_q[kick]),
            fmt(series.var_c[kick]),
        ]);
        entropy.row(vec![
            kick.to_string(),
            fmt(series.h_lz_q[kick]),
            fmt(series.h_lz_c[kick]),
            fmt(series.h_jz_q[kick]),
            fmt(series.h_jz_c[kick]),
        ]);
        sigma.row(vec![
            kick.to_string(),
            fmt(series.sigma_lz[kick]),
            fmt(series.sigma_jz[kick]),
            fmt(relative_r(series.sigma_lz[kick], nb_l)),
            fmt(relative_r(series.sigma_jz[kick], nb_j)),
        ]);
    }

    let mut tables = vec![means, variance, entropy, sigma];
    for &kick in &config.usize_list_or("dist_kicks", &[0, n_kicks])? {
        let kick = kick.min(n_kicks);
        let dq = &run.quantum.dist_lz[kick];
        let dc = run.classical.dist_lz(kick, qn.l).expect("recorded kick");
        tables.push(dist_table(
            &format!("dist_lz_n{kick}.csv"),
            dq,
            &dc,
        ));
        let dq = &run.quantum.dist_jz[kick];
        let dc = run
            .classical
            .dist_jz(kick, qn.s, qn.l)
            .expect("recorded kick");
        tables.push(dist_table(
            &format!("dist_jz_n{kick}.csv"),
            dq,
            &dc,
        ));
    }
    Ok((
        ExperimentOutput {
            tables,
            fits: Vec::new(),
        },
        series,
    ))
}

fn dist_table(name: &str, q: &Distribution, c: &Distribution) -> CsvTable {
    let mut t = CsvTable::new(name, &["m", "p_q", "p_c"]);
    for i in 0..q.len() {
        t.row(vec![
            fmt(q.labels()[i]),
            fmt(q.probs()[i]),
            fmt(c.probs()[i]),
        ]);
    }
    t
}

fn run_relax(config: &Config) -> Result<ExperimentOutput> {
    run_relax_series(config).map(|(out, _)| out)
}

/// First kick at which the normalized variance exceeds one half: the
/// data-driven saturation estimate used to end the exponential-fit
/// window.
fn saturation_kick(var: &[f64]) -> Option<usize> {
    var.iter().position(|&v| v >= 0.5)
}

/// Exponential growth of the normalized variance, with the growth rate
/// `lambda_w = rate / 2`.
pub fn run_variance_growth(config: &Config) -> Result<ExperimentOutput> {
    let qn = qn_from_config(config)?;
    let n_kicks = config.usize("n_kicks")?;
    let with_classical = config.u64_or("n_traj", 0)? > 0;
    let run = if with_classical {
        paired_run(config, qn, n_kicks, &[], false)?
    } else {
        let a = config.f64("a")?;
        let gamma = config.f64("gamma")?;
        let qparams = ModelParams::from_gamma(a, gamma, &qn);
        let quantum = run_quantum_series(&qn, &qparams, config.ic_angles()?, n_kicks, false)?;
        PairedRun {
            quantum,
            classical: run_classical_series(
                &qn,
                &ClassicalParams::from_quantum(&qn, a, gamma),
                config.ic_angles()?,
                0,
                0,
                1,
                1,
                &[],
            ),
        }
    };

    let var_q = TimeSeries::from_values(run.quantum.var_l.clone())?;
    let window_hi = match config.get("fit_window_hi") {
        Some(_) => config.usize("fit_window_hi")? as i64,
        None => match saturation_kick(&run.quantum.var_l) {
            Some(k) => (k as i64 - 1).max(1),
            None => n_kicks as i64,
        },
    };
    let window_lo = config.usize_or("fit_window_lo", 0)? as i64;
    // primary estimator: the growth-ansatz fit with the amplitude pinned
    // at the coherent-state value 1/l
    let fit = fit_exponential_pinned(&var_q, window_lo, window_hi, 1.0 / qn.l.value())?;
    let rate = fit.param("rate").unwrap();
    let free_fit = fit_exponential(&var_q, window_lo, window_hi)?;
    let envelope_period = config.usize_or("envelope_period", 4)?;
    let env_fit = fit_exponential(&var_q.envelope(envelope_period), window_lo, window_hi);

    let mut table = CsvTable::new(
        "variance.csv",
        if with_classical {
            &["n", "var_q", "var_c"]
        } else {
            &["n", "var_q"]
        },
    );
    for kick in 0..=n_kicks {
        let mut row = vec![kick.to_string(), fmt(run.quantum.var_l[kick])];
        if with_classical {
            let m = run.classical.mean_l_tilde[kick];
            row.push(fmt(1.0 - (m[0] * m[0] + m[1] * m[1] + m[2] * m[2])));
        }
        table.row(row);
    }
    let mut fit_table = CsvTable::new(
        "fit.csv",
        &[
            "rate",
            "lambda_w",
            "stderr_rate",
            "reduced_chi2",
            "window_lo",
            "window_hi",
            "lambda_w_free",
            "lambda_w_envelope",
        ],
    );
    let lambda_env = env_fit
        .as_ref()
        .map(|f| f.param("rate").unwrap() / 2.0)
        .unwrap_or(f64::NAN);
    fit_table.row(vec![
        fmt(rate),
        fmt(rate / 2.0),
        fmt(fit.stderr_of("rate").unwrap()),
        fmt(fit.reduced_chi2),
        window_lo.to_string(),
        window_hi.to_string(),
        fmt(free_fit.param("rate").unwrap() / 2.0),
        fmt(lambda_env),
    ]);
    Ok(ExperimentOutput {
        tables: vec![table, fit_table],
        fits: vec![
            ("variance_growth".into(), fit),
            ("variance_growth_free".into(), free_fit),
        ],
    })
}

/// Break-time scan over `l`: evolves the paired systems, finds the first
/// kick where `delta L_z` exceeds the tolerance `p`, and fits
/// `t_b = ln(8 p l) / lambda_qc`.
pub fn run_breaktime_scan(config: &Config) -> Result<ExperimentOutput> {
    let l_list = config.f64_list("l_list")?;
    let r = config.f64("r")?;
    let p = config.f64("p")?;
    let n_kicks = config.usize("n_kicks")?;
    let mut table = CsvTable::new("breaktimes.csv", &["l", "s", "t_b"]);
    let mut series_tables = Vec::new();
    let mut fit_ls = Vec::new();
    let mut fit_ts = Vec::new();
    for &l in &l_list {
        let l_spin = Spin::new(l)?;
        let s_spin = partner_spin(l, r)?;
        let qn = QuantumNumbers::new(s_spin, l_spin);
        let run = paired_run(config, qn, n_kicks, &[], false)?;
        let mag_l = qn.l.magnitude();
        let q: Vec<f64> = run.quantum.expect.iter().map(|e| e.l[2]).collect();
        let c: Vec<f64> = run
            .classical
            .mean_l_tilde
            .iter()
            .map(|m| m[2] * mag_l)
            .collect();
        let delta = delta_series(
            &TimeSeries::from_values(q.clone())?,
            &TimeSeries::from_values(c.clone())?,
        )?;
        let tb = break_time(&delta, p);
        let mut st = CsvTable::new(
            &format!("delta_l{}.csv", l_spin),
            &["n", "lz_q", "lz_c", "delta_lz"],
        );
        for kick in 0..=n_kicks {
            st.row(vec![
                kick.to_string(),
                fmt(q[kick]),
                fmt(c[kick]),
                fmt(delta.y()[kick]),
            ]);
        }
        series_tables.push(st);
        table.row(vec![
            fmt(l),
            fmt(s_spin.value()),
            tb.map(|t| t.to_string()).unwrap_or_default(),
        ]);
        if let Some(t) = tb {
            fit_ls.push(l);
            fit_ts.push(t as f64);
        }
    }
    let mut tables = vec![table];
    tables.extend(series_tables);
    let mut fits = Vec::new();
    if fit_ls.len() >= 2 {
        let fit = fit_break_law(&fit_ls, &fit_ts, p)?;
        let mut ft = CsvTable::new(
            "fit.csv",
            &["lambda_qc", "stderr", "reduced_chi2", "points"],
        );
        ft.row(vec![
            fmt(fit.param("lambda_qc").unwrap()),
            fmt(fit.stderr_of("lambda_qc").unwrap()),
            fmt(fit.reduced_chi2),
            fit_ls.len().to_string(),
        ]);
        tables.push(ft);
        fits.push(("break_law".into(), fit));
    }
    Ok(ExperimentOutput { tables, fits })
}

/// Equilibrium scaling scan: pools the relative fluctuation measure
/// `R = N sigma` over an equilibrium kick window for each system size and
/// fits `R = A/sqrt(N) + B` together with the one-parameter form.
pub fn run_scaling_scan(config: &Config) -> Result<ExperimentOutput> {
    let l_list = config.f64_list("l_list")?;
    let r = config.f64("r")?;
    let window_lo = config.usize("window_lo")?;
    let window_hi = config.usize("window_hi")?;
    if window_lo > window_hi {
        return Err(Error::Config("window_lo exceeds window_hi".into()));
    }
    let n_kicks = window_hi;
    let hist_kicks: Vec<usize> = (window_lo..=window_hi).collect();

    let mut lz_rows = Vec::new();
    let mut jz_rows = Vec::new();
    let mut warnings = Vec::new();
    let mut n_lz = Vec::new();
    let mut r_lz = Vec::new();
    let mut n_jz = Vec::new();
    let mut r_jz = Vec::new();
    for &l in &l_list {
        let l_spin = Spin::new(l)?;
        let s_spin = partner_spin(l, r)?;
        let qn = QuantumNumbers::new(s_spin, l_spin);
        let run = paired_run(config, qn, n_kicks, &hist_kicks, true)?;
        // guard: the window must sit after the relaxation transient
        if let Some(sat) = saturation_kick(&run.quantum.var_l) {
            if window_lo < sat + 2 {
                warnings.push(format!(
                    "l={l}: window_lo {window_lo} overlaps the relaxation transient (t_sat ~ {sat})"
                ));
            }
        } else {
            warnings.push(format!("l={l}: state never reached saturation"));
        }
        let (nb_l, nb_j) = (qn.l.dim(), qn.s.dim() + qn.l.dim() - 1);
        for &kick in &hist_kicks {
            let dq = &run.quantum.dist_lz[kick];
            let dc = run.classical.dist_lz(kick, qn.l).expect("recorded");
            let sig = sigma_dist(dq, &dc)?;
            let rv = relative_r(sig, nb_l);
            lz_rows.push(vec![
                fmt(l),
                nb_l.to_string(),
                kick.to_string(),
                fmt(sig),
                fmt(rv),
            ]);
            n_lz.push(nb_l as f64);
            r_lz.push(rv);
            let dq = &run.quantum.dist_jz[kick];
            let dc = run
                .classical
                .dist_jz(kick, qn.s, qn.l)
                .expect("recorded");
            let sig = sigma_dist(dq, &dc)?;
            let rv = relative_r(sig, nb_j);
            jz_rows.push(vec![
                fmt(l),
                nb_j.to_string(),
                kick.to_string(),
                fmt(sig),
                fmt(rv),
            ]);
            n_jz.push(nb_j as f64);
            r_jz.push(rv);
        }
    }

    let header = ["l", "n_labels", "n", "sigma", "r_value"];
    let mut lz_table = CsvTable::new("scaling_lz.csv", &header);
    let mut jz_table = CsvTable::new("scaling_jz.csv", &header);
    for w in &warnings {
        lz_table.meta("warning", w);
        jz_table.meta("warning", w);
    }
    for row in lz_rows {
        lz_table.row(row);
    }
    for row in jz_rows {
        jz_table.row(row);
    }

    let mut tables = vec![lz_table, jz_table];
    let mut fits = Vec::new();
    for (name, ns, rs) in [("lz", &n_lz, &r_lz), ("jz", &n_jz, &r_jz)] {
        let sf = fit_scaling(ns, rs)?;
        let mut ft = CsvTable::new(
            &format!("fit_{name}.csv"),
            &["A", "stderr_A", "B", "stderr_B", "C", "stderr_C", "reduced_chi2"],
        );
        ft.row(vec![
            fmt(sf.two_param.param("A").unwrap()),
            fmt(sf.two_param.stderr_of("A").unwrap()),
            fmt(sf.two_param.param("B").unwrap()),
            fmt(sf.two_param.stderr_of("B").unwrap()),
            fmt(sf.one_param.param("C").unwrap()),
            fmt(sf.one_param.stderr_of("C").unwrap()),
            fmt(sf.two_param.reduced_chi2),
        ]);
        tables.push(ft);
        fits.push((format!("scaling_{name}_two_param"), sf.two_param));
        fits.push((format!("scaling_{name}_one_param"), sf.one_param));
    }
    Ok(ExperimentOutput { tables, fits })
}

/// Ehrenfest scan: single classical trajectory from the state centroid,
/// per-kick component differences and quadratic-invariant violation,
/// break-times at threshold `f l^2` and the log-law fit.
pub fn run_ehrenfest_scan(config: &Config) -> Result<ExperimentOutput> {
    let l_list = config.f64_list("l_list")?;
    let r = config.f64("r")?;
    let f = config.f64("f")?;
    let n_kicks = config.usize("n_kicks")?;
    let a = config.f64("a")?;
    let gamma = config.f64("gamma")?;
    let ic = config.ic_angles()?;

    let mut bt_table = CsvTable::new("breaktimes.csv", &["l", "s", "t_ehr", "late_viol_over_l2"]);
    let mut series_tables = Vec::new();
    let mut fit_ls = Vec::new();
    let mut fit_ts = Vec::new();
    let mut late_fractions = Vec::new();
    for &l in &l_list {
        let l_spin = Spin::new(l)?;
        let s_spin = partner_spin(l, r)?;
        let qn = QuantumNumbers::new(s_spin, l_spin);
        let qparams = ModelParams::from_gamma(a, gamma, &qn);
        let quantum = run_quantum_series(&qn, &qparams, ic, n_kicks, false)?;
        let cparams = ClassicalParams::from_quantum(&qn, a, gamma);
        let traj = run_single_trajectory(&cparams, ic, n_kicks);

        // the trajectory magnitude matches the state centroid |<L>| = l
        let vecs: Vec<[f64; 3]> = quantum.expect.iter().map(|e| e.l).collect();
        let viol = invariant_violation(&vecs, l)?;
        let t_ehr = ehrenfest_break_time(&viol, f, l);
        let mut st = CsvTable::new(
            &format!("ehrenfest_l{}.csv", l_spin),
            &["n", "xi_x", "xi_y", "xi_z", "invariant_violation"],
        );
        for kick in 0..=n_kicks {
            let q = quantum.expect[kick].l;
            let t = traj[kick].l;
            st.row(vec![
                kick.to_string(),
                fmt((q[0] - l * t[0]).abs()),
                fmt((q[1] - l * t[1]).abs()),
                fmt((q[2] - l * t[2]).abs()),
                fmt(viol.y()[kick]),
            ]);
        }
        series_tables.push(st);
        // saturation level over the last five kicks
        let tail = &viol.y()[n_kicks.saturating_sub(4)..];
        let late = tail.iter().sum::<f64>() / tail.len() as f64 / (l * l);
        late_fractions.push(late);
        bt_table.row(vec![
            fmt(l),
            fmt(s_spin.value()),
            t_ehr.map(|t| t.to_string()).unwrap_or_default(),
            fmt(late),
        ]);
        if let Some(t) = t_ehr {
            fit_ls.push(l);
            fit_ts.push(t as f64);
        }
    }
    let mut tables = vec![bt_table];
    tables.extend(series_tables);
    let mut fits = Vec::new();
    if fit_ls.len() >= 2 {
        let fit = fit_ehrenfest_law(&fit_ls, &fit_ts, f)?;
        let mut ft = CsvTable::new("fit.csv", &["lambda", "stderr", "reduced_chi2", "points"]);
        ft.row(vec![
            fmt(fit.param("lambda").unwrap()),
            fmt(fit.stderr_of("lambda").unwrap()),
            fmt(fit.reduced_chi2),
            fit_ls.len().to_string(),
        ]);
        tables.push(ft);
        fits.push(("ehrenfest_law".into(), fit));
    }
    Ok(ExperimentOutput { tables, fits })
}

/// Coherent-state moment table: quantum `<J_x^2>`, `<J_x^4>` against the
/// vector-model values, with the absolute and normalized mismatch.
pub fn run_appendix_a(config: &Config) -> Result<ExperimentOutput> {
    let j_list = config.f64_list("j_list")?;
    let mut table = CsvTable::new(
        "moments.csv",
        &[
            "j",
            "jx2_q",
            "jx2_c",
            "jx4_q",
            "jx4_c",
            "delta_jx4",
            "delta_jx4_over_j2",
        ],
    );
    for &j in &j_list {
        let spin = Spin::new(j)?;
        if spin.value() > super::MAX_QUANTUM_SPIN {
            return Err(Error::Capacity(format!(
                "j = {j} exceeds the validated maximum {}",
                super::MAX_QUANTUM_SPIN
            )));
        }
        let q2 = coherent_x_moment(spin, 2)?;
        let q4 = coherent_x_moment(spin, 4)?;
        let c2 = vector_model_moment(spin, 2)?;
        let c4 = vector_model_moment(spin, 4)?;
        let delta = (q4 - c4).abs();
        table.row(vec![
            fmt(j),
            fmt(q2),
            fmt(c2),
            fmt(q4),
            fmt(c4),
            fmt(delta),
            fmt(delta / (j * j)),
        ]);
    }
    Ok(ExperimentOutput {
        tables: vec![table],
        fits: Vec::new(),
    })
}
