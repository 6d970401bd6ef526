//! Python bindings exposing the main simulator types and operations.
//!
//! Build with `cargo build --release -p spincorr-py`; the resulting
//! `libspincorr_py.so` imports as the module `spincorr_py` once renamed
//! (see `python/smoke_test.py`).

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use spincorr::classical::{
    self, ClassicalParams, FixedPointBranch, MatchedDensitySpec, PhasePoint,
};
use spincorr::quantum::{self, ModelParams, QuantumNumbers, StateVector};
use spincorr::runner::drivers;
use spincorr::wigner;
use spincorr::Spin;

fn err(e: spincorr::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn spin(j: f64) -> PyResult<Spin> {
    Spin::new(j).map_err(err)
}

/// Wigner rotation matrix d^j(theta) as a nested list, both indices
/// ordered m = j, j-1, ..., -j.
#[pyfunction]
fn little_d(j: f64, theta: f64) -> PyResult<Vec<Vec<f64>>> {
    let d = wigner::little_d(spin(j)?, theta).map_err(err)?;
    let n = d.dim();
    Ok((0..n).map(|r| (0..n).map(|c| d.get(r, c)).collect()).collect())
}

/// Direct-formula evaluation of d^j(theta); refuses j > 60.
#[pyfunction]
fn little_d_direct(j: f64, theta: f64) -> PyResult<Vec<Vec<f64>>> {
    let d = wigner::little_d_direct(spin(j)?, theta).map_err(err)?;
    let n = d.dim();
    Ok((0..n).map(|r| (0..n).map(|c| d.get(r, c)).collect()).collect())
}

/// Diagonal z-rotation phases exp(-i m phi), m descending from +j.
#[pyfunction]
fn z_phase(j: f64, phi: f64) -> PyResult<Vec<Complex64>> {
    wigner::z_phase(spin(j)?, phi).map_err(err)
}

/// Coherent-state amplitudes R(theta, phi)|j, j> (m descending).
#[pyfunction]
fn coherent_state(j: f64, theta: f64, phi: f64) -> PyResult<Vec<Complex64>> {
    quantum::coherent_state(spin(j)?, theta, phi).map_err(err)
}

/// Moment <J_x^m> of the coherent state |j, j>.
#[pyfunction]
fn coherent_x_moment(j: f64, m: u32) -> PyResult<f64> {
    quantum::coherent_x_moment(spin(j)?, m).map_err(err)
}

/// Even moment <J_x^m> of the vector-model ring density.
#[pyfunction]
fn vector_model_moment(j: f64, m: u32) -> PyResult<f64> {
    classical::vector_model_moment(spin(j)?, m).map_err(err)
}

/// Shannon entropy (nats) of the microcanonical J_z distribution.
#[pyfunction]
fn microcanonical_entropy_jz(s: f64, l: f64) -> PyResult<f64> {
    Ok(quantum::shannon_entropy(&quantum::microcanonical_jz(
        spin(s)?,
        spin(l)?,
    )))
}

/// First-moment factor G(sigma^2) of the matched density.
#[pyfunction]
fn g_moment(sigma2: f64) -> f64 {
    classical::g_moment(sigma2)
}

/// Largest Lyapunov exponent from spherical-angle initial conditions
/// (radians) after `n_steps` kicks.
#[pyfunction]
fn lyapunov(a: f64, gamma: f64, r: f64, angles: [f64; 4], n_steps: usize) -> f64 {
    classical::lyapunov_max(
        &PhasePoint::from_angles(angles),
        &ClassicalParams::new(a, gamma, r),
        n_steps,
    )
}

/// Moduli of the four tangent-map eigenvalues at the trivial fixed
/// points; `branch` is "parallel" or "antiparallel".
#[pyfunction]
fn fixed_point_eig_moduli(a: f64, gamma: f64, r: f64, branch: &str) -> PyResult<Vec<f64>> {
    let branch = match branch {
        "parallel" => FixedPointBranch::Parallel,
        "antiparallel" => FixedPointBranch::AntiParallel,
        other => {
            return Err(PyValueError::new_err(format!(
                "branch must be 'parallel' or 'antiparallel', got '{other}'"
            )))
        }
    };
    let eigs =
        classical::fixed_point_eigs(&ClassicalParams::new(a, gamma, r), branch).map_err(err)?;
    Ok(eigs.iter().map(|x| x.norm()).collect())
}

/// Per-kick ensemble mean of the normalized L_z for a matched initial
/// density, reproducible from the master seed.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn ensemble_mean_lz_series(
    s: f64,
    l: f64,
    a: f64,
    gamma: f64,
    angles: [f64; 4],
    n_kicks: usize,
    n_traj: u64,
    master_seed: u64,
) -> PyResult<Vec<f64>> {
    let qn = QuantumNumbers::new(spin(s)?, spin(l)?);
    let params = ClassicalParams::from_quantum(&qn, a, gamma);
    let series = drivers::run_classical_series(
        &qn,
        &params,
        angles,
        n_kicks,
        n_traj,
        master_seed,
        classical::DEFAULT_CHUNK_SIZE,
        &[],
    );
    Ok(series.mean_l_tilde.iter().map(|m| m[2]).collect())
}

/// One classical kick applied to a pair of unit vectors.
#[pyfunction]
fn map_step(s: [f64; 3], l: [f64; 3], a: f64, gamma: f64, r: f64) -> ([f64; 3], [f64; 3]) {
    let p = classical::map_step(&PhasePoint { s, l }, &ClassicalParams::new(a, gamma, r));
    (p.s, p.l)
}

/// Exact quantum evolution of the kicked two-spin system.
#[pyclass]
struct KickedSpinSim {
    qn: QuantumNumbers,
    floquet: quantum::FactoredFloquet,
    psi: Option<StateVector>,
}

#[pymethods]
impl KickedSpinSim {
    /// System with spins (s, l), kick rotation `a` and dimensionless
    /// coupling `gamma` (matched exactly through c = gamma/|S|).
    #[new]
    fn new(s: f64, l: f64, a: f64, gamma: f64) -> PyResult<Self> {
        let qn = QuantumNumbers::new(spin(s)?, spin(l)?);
        drivers::check_capacity(&qn).map_err(err)?;
        let params = ModelParams::from_gamma(a, gamma, &qn);
        let floquet = quantum::build_floquet(&qn, &params).map_err(err)?;
        Ok(Self {
            qn,
            floquet,
            psi: None,
        })
    }

    /// Prepares the coherent product state at the given spherical angles
    /// (radians).
    fn prepare(&mut self, theta_s: f64, phi_s: f64, theta_l: f64, phi_l: f64) -> PyResult<()> {
        let sv = quantum::coherent_state(self.qn.s, theta_s, phi_s).map_err(err)?;
        let lv = quantum::coherent_state(self.qn.l, theta_l, phi_l).map_err(err)?;
        self.psi = Some(quantum::product_state(&self.qn, &sv, &lv).map_err(err)?);
        Ok(())
    }

    fn kick(&mut self, n: usize) -> PyResult<()> {
        let mut psi = self.take_state()?;
        for _ in 0..n {
            psi = quantum::apply_floquet(&self.floquet, &psi).map_err(err)?;
        }
        self.psi = Some(psi);
        Ok(())
    }

    fn norm(&self) -> PyResult<f64> {
        Ok(self.state()?.norm())
    }

    /// Expectation values (<S>, <L>, <J>) as three 3-tuples.
    fn expectations(&self) -> PyResult<([f64; 3], [f64; 3], [f64; 3])> {
        let e = quantum::expect_components(self.state()?);
        Ok((e.s, e.l, e.j))
    }

    /// Normalized variance of the second spin.
    fn variance_l(&self) -> PyResult<f64> {
        Ok(quantum::variance_l(self.state()?))
    }

    /// Marginal probabilities of L_z (m descending from +l).
    fn dist_lz(&self) -> PyResult<Vec<f64>> {
        Ok(quantum::dist_lz(self.state()?).probs().to_vec())
    }

    /// Probabilities of J_z (m_j descending from s+l).
    fn dist_jz(&self) -> PyResult<Vec<f64>> {
        Ok(quantum::dist_jz(self.state()?).probs().to_vec())
    }

    fn entropy_jz(&self) -> PyResult<f64> {
        Ok(quantum::shannon_entropy(&quantum::dist_jz(self.state()?)))
    }

    /// Probability weight of the two (m_s + m_l)-parity sectors.
    fn sector_probabilities(&self) -> PyResult<(f64, f64)> {
        Ok(self.state()?.sector_probabilities())
    }
}

impl KickedSpinSim {
    fn state(&self) -> PyResult<&StateVector> {
        self.psi
            .as_ref()
            .ok_or_else(|| PyValueError::new_err("no state prepared; call prepare() first"))
    }

    fn take_state(&mut self) -> PyResult<StateVector> {
        self.psi
            .take()
            .ok_or_else(|| PyValueError::new_err("no state prepared; call prepare() first"))
    }
}

/// Matched-density sampler with a deterministic per-index stream.
#[pyfunction]
fn sample_matched_point(j: f64, theta0: f64, phi0: f64, master_seed: u64, index: u64) -> PyResult<[f64; 3]> {
    let spec = MatchedDensitySpec::from_spin(spin(j)?, theta0, phi0);
    let mut rng = classical::trajectory_rng(master_seed, index);
    Ok(classical::sample_matched(&spec, &mut rng))
}

#[pymodule]
fn spincorr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(little_d, m)?)?;
    m.add_function(wrap_pyfunction!(little_d_direct, m)?)?;
    m.add_function(wrap_pyfunction!(z_phase, m)?)?;
    m.add_function(wrap_pyfunction!(coherent_state, m)?)?;
    m.add_function(wrap_pyfunction!(coherent_x_moment, m)?)?;
    m.add_function(wrap_pyfunction!(vector_model_moment, m)?)?;
    m.add_function(wrap_pyfunction!(microcanonical_entropy_jz, m)?)?;
    m.add_function(wrap_pyfunction!(g_moment, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point_eig_moduli, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble_mean_lz_series, m)?)?;
    m.add_function(wrap_pyfunction!(map_step, m)?)?;
    m.add_function(wrap_pyfunction!(sample_matched_point, m)?)?;
    m.add_class::<KickedSpinSim>()?;
    Ok(())
}
