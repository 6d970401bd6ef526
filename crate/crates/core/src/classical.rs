//! Classical dynamics: the stroboscopic two-spin map, tangent dynamics
//! and Lyapunov exponents, fixed-point stability, and Liouville ensembles
//! sampled from the matched initial density.
//!
//! Points are stored as Cartesian unit vectors `(S~, L~)` rather than
//! canonical coordinates; the map is a composition of rigid rotations in
//! that representation and has no coordinate singularity at the poles.

use num_complex::Complex64;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::quantum::{Distribution, QuantumNumbers};
use crate::{Error, Result, Spin};

/// Dimensionless parameters of the classical map.
#[derive(Clone, Copy, Debug)]
pub struct ClassicalParams {
    /// z-rotation angle per kick (radians).
    pub a: f64,
    /// Coupling strength `gamma = c |S|`.
    pub gamma: f64,
    /// Magnitude ratio `r = |L| / |S|`.
    pub r: f64,
}

impl ClassicalParams {
    pub fn new(a: f64, gamma: f64, r: f64) -> Self {
        Self { a, gamma, r }
    }

    /// Parameters matched to a quantum model with coupling `gamma`.
    pub fn from_quantum(qn: &QuantumNumbers, a: f64, gamma: f64) -> Self {
        Self { a, gamma, r: qn.ratio() }
    }
}

/// A point on the product of two unit spheres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub s: [f64; 3],
    pub l: [f64; 3],
}

impl PhasePoint {
    /// Builds from spherical angles `(theta_s, phi_s, theta_l, phi_l)` in
    /// radians.
    pub fn from_angles(angles: [f64; 4]) -> Self {
        let unit = |theta: f64, phi: f64| {
            [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
        };
        Self {
            s: unit(angles[0], angles[1]),
            l: unit(angles[2], angles[3]),
        }
    }

    pub fn norms(&self) -> (f64, f64) {
        let n = |v: &[f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        (n(&self.s), n(&self.l))
    }

    /// Rescales both vectors to unit length.
    pub fn renormalize(&mut self) {
        let (ns, nl) = self.norms();
        for k in 0..3 {
            self.s[k] /= ns;
            self.l[k] /= nl;
        }
    }
}

#[inline]
fn kick_about_x(v: &[f64; 3], sin_k: f64, cos_k: f64) -> [f64; 3] {
    [
        v[0],
        v[1] * cos_k - v[2] * sin_k,
        v[2] * cos_k + v[1] * sin_k,
    ]
}

#[inline]
fn rotate_about_z(v: &[f64; 3], sin_a: f64, cos_a: f64) -> [f64; 3] {
    [
        v[0] * cos_a - v[1] * sin_a,
        v[1] * cos_a + v[0] * sin_a,
        v[2],
    ]
}

#[inline]
pub(crate) fn step_kernel(p: &PhasePoint, gamma: f64, r: f64, sin_a: f64, cos_a: f64) -> PhasePoint {
    // kick angles use the partner's x-component before the kick
    let (sin_ks, cos_ks) = (gamma * r * p.l[0]).sin_cos();
    let (sin_kl, cos_kl) = (gamma * p.s[0]).sin_cos();
    PhasePoint {
        s: rotate_about_z(&kick_about_x(&p.s, sin_ks, cos_ks), sin_a, cos_a),
        l: rotate_about_z(&kick_about_x(&p.l, sin_kl, cos_kl), sin_a, cos_a),
    }
}

/// One iteration of the stroboscopic map: x-kick of each spin by the
/// partner's x-component, then z-rotation of both spins by `a`.
pub fn map_step(p: &PhasePoint, params: &ClassicalParams) -> PhasePoint {
    let (sin_a, cos_a) = params.a.sin_cos();
    step_kernel(p, params.gamma, params.r, sin_a, cos_a)
}

/// Tangent-space displacement paired with a base point.
#[derive(Clone, Copy, Debug)]
pub struct TangentVector(pub [f64; 6]);

impl TangentVector {
    /// Sum of absolute components, the expansion measure of the tangent
    /// dynamics.
    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for x in &mut self.0 {
            *x *= factor;
        }
    }
}

#[inline]
fn dkick_about_x(v: &[f64; 3], sin_k: f64, cos_k: f64) -> [f64; 3] {
    // derivative of the x-kick with respect to the kick angle
    [
        0.0,
        -v[1] * sin_k - v[2] * cos_k,
        -v[2] * sin_k + v[1] * cos_k,
    ]
}

/// Applies the analytic Jacobian of [`map_step`] at `p` to `v`.
pub fn tangent_step(p: &PhasePoint, v: &TangentVector, params: &ClassicalParams) -> TangentVector {
    let (sin_a, cos_a) = params.a.sin_cos();
    let (sin_ks, cos_ks) = (params.gamma * params.r * p.l[0]).sin_cos();
    let (sin_kl, cos_kl) = (params.gamma * p.s[0]).sin_cos();
    let vs = [v.0[0], v.0[1], v.0[2]];
    let vl = [v.0[3], v.0[4], v.0[5]];

    // block d S'/d S: Rz Rx(alpha) vs
    let mut ds = kick_about_x(&vs, sin_ks, cos_ks);
    // block d S'/d L: Rz Rx'(alpha) S * (gamma r) acting on delta L_x
    let dk = dkick_about_x(&p.s, sin_ks, cos_ks);
    for k in 0..3 {
        ds[k] += dk[k] * params.gamma * params.r * vl[0];
    }
    let ds = rotate_about_z(&ds, sin_a, cos_a);

    let mut dl = kick_about_x(&vl, sin_kl, cos_kl);
    let dk = dkick_about_x(&p.l, sin_kl, cos_kl);
    for k in 0..3 {
        dl[k] += dk[k] * params.gamma * vs[0];
    }
    let dl = rotate_about_z(&dl, sin_a, cos_a);

    TangentVector([ds[0], ds[1], ds[2], dl[0], dl[1], dl[2]])
}

/// Largest Lyapunov exponent along the trajectory from `ic`:
/// `(1/N) sum ln d(n)` with `d(n)` the L1 norm of the tangent vector,
/// renormalized to 1 after every step.
pub fn lyapunov_max(ic: &PhasePoint, params: &ClassicalParams, n_steps: usize) -> f64 {
    let (sin_a, cos_a) = params.a.sin_cos();
    let mut p = *ic;
    let mut v = TangentVector([1.0 / 6.0; 6]);
    let mut sum = 0.0;
    for n in 1..=n_steps {
        v = tangent_step(&p, &v, params);
        let d = v.l1_norm();
        sum += d.ln();
        v.scale(1.0 / d);
        p = step_kernel(&p, params.gamma, params.r, sin_a, cos_a);
        if n % 1000 == 0 {
            p.renormalize();
        }
    }
    sum / n_steps as f64
}

/// Which pair of trivial (polar) fixed points to analyse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPointBranch {
    /// Spins aligned: `(S_z, L_z) = ±(|S|, |L|)`.
    Parallel,
    /// Spins opposed: `(S_z, L_z) = (±|S|, ∓|L|)`.
    AntiParallel,
}

/// The four eigenvalues of the tangent map at the trivial fixed points,
/// i.e. the roots of `[xi^2 - 2 xi cos a + 1]^2 ± xi^2 gamma^2 r sin^2 a`
/// (minus: parallel, plus: anti-parallel). Solved through the companion
/// matrix and polished by Newton steps; each residual is checked.
pub fn fixed_point_eigs(
    params: &ClassicalParams,
    branch: FixedPointBranch,
) -> Result<[Complex64; 4]> {
    let c = params.a.cos();
    let g2 = params.gamma * params.gamma * params.r * params.a.sin().powi(2);
    let signed = match branch {
        FixedPointBranch::Parallel => -g2,
        FixedPointBranch::AntiParallel => g2,
    };
    // monic quartic xi^4 + a3 xi^3 + a2 xi^2 + a1 xi + a0
    let a3 = -4.0 * c;
    let a2 = 4.0 * c * c + 2.0 + signed;
    let a1 = -4.0 * c;
    let a0 = 1.0;

    let companion = nalgebra::Matrix4::new(
        0.0, 0.0, 0.0, -a0, //
        1.0, 0.0, 0.0, -a1, //
        0.0, 1.0, 0.0, -a2, //
        0.0, 0.0, 1.0, -a3,
    );
    let eigs = companion.complex_eigenvalues();
    let poly = |x: Complex64| (((x + a3) * x + a2) * x + a1) * x + a0;
    let dpoly = |x: Complex64| ((4.0 * x + 3.0 * a3) * x + 2.0 * a2) * x + a1;
    let mut roots = [Complex64::ZERO; 4];
    for (root, eig) in roots.iter_mut().zip(eigs.iter()) {
        let mut x = Complex64::new(eig.re, eig.im);
        // extra iterations cover degenerate (double) roots, where Newton
        // is only linearly convergent
        for _ in 0..8 {
            let d = dpoly(x);
            if d.norm() > 0.0 {
                x -= poly(x) / d;
            }
        }
        let residual = poly(x).norm();
        if residual > 1e-9 {
            return Err(Error::Domain(format!(
                "characteristic root residual {residual} exceeds 1e-9"
            )));
        }
        *root = x;
    }
    Ok(roots)
}

/// True when all four eigenvalues stay on the closed unit disk (within a
/// 1e-9 ring), the condition for regular islands around the fixed points.
pub fn fixed_point_stable(params: &ClassicalParams, branch: FixedPointBranch) -> Result<bool> {
    let eigs = fixed_point_eigs(params, branch)?;
    Ok(eigs.iter().all(|x| x.norm() <= 1.0 + 1e-9))
}

/// Initial density on one sphere: `C exp[-(1 - J~_z)/sigma^2]` about the
/// pole, rigidly rotated to the polarization direction `(theta0, phi0)`.
#[derive(Clone, Copy, Debug)]
pub struct MatchedDensitySpec {
    pub sigma2: f64,
    pub theta0: f64,
    pub phi0: f64,
    pub magnitude: f64,
}

impl MatchedDensitySpec {
    /// Width matched to the coherent state of spin `j`:
    /// `sigma^2 = 1 / (2 sqrt(j(j+1)))`.
    pub fn from_spin(j: Spin, theta0: f64, phi0: f64) -> Self {
        Self {
            sigma2: 0.5 / j.magnitude(),
            theta0,
            phi0,
            magnitude: j.magnitude(),
        }
    }
}

/// First-moment factor of the matched density:
/// `G(sigma^2) = (1 + e^{-2/sigma^2}) / (1 - e^{-2/sigma^2}) - sigma^2`,
/// so that `<J~_z> = G` and `<J~_x^2> = sigma^2 G` for a pole-aligned
/// density.
pub fn g_moment(sigma2: f64) -> f64 {
    let e = (-2.0 / sigma2).exp();
    (1.0 + e) / (1.0 - e) - sigma2
}

/// CDF of `J~_z` under a pole-aligned matched density (truncated
/// exponential on [-1, 1]).
pub fn matched_z_cdf(sigma2: f64, z: f64) -> f64 {
    if z <= -1.0 {
        return 0.0;
    }
    if z >= 1.0 {
        return 1.0;
    }
    let e = (-2.0 / sigma2).exp();
    (((z - 1.0) / sigma2).exp() - e) / (1.0 - e)
}

/// Draws one unit vector from the matched density by exact inverse-CDF
/// sampling: `phi ~ U[0, 2pi)`,
/// `J~_z = 1 + sigma^2 ln(1 - u (1 - e^{-2/sigma^2}))`.
pub fn sample_matched<R: Rng>(spec: &MatchedDensitySpec, rng: &mut R) -> [f64; 3] {
    let phi: f64 = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    let u: f64 = rng.random();
    let depletion = 1.0 - (-2.0 / spec.sigma2).exp();
    let z = 1.0 + spec.sigma2 * (1.0 - u * depletion).ln_1p_safe();
    let z = z.clamp(-1.0, 1.0);
    let st = (1.0 - z * z).max(0.0).sqrt();
    let v = [st * phi.cos(), st * phi.sin(), z];
    // rigid rotation: theta0 about y, then phi0 about z
    let (s0, c0) = spec.theta0.sin_cos();
    let v = [v[0] * c0 + v[2] * s0, v[1], v[2] * c0 - v[0] * s0];
    let (sp, cp) = spec.phi0.sin_cos();
    [v[0] * cp - v[1] * sp, v[1] * cp + v[0] * sp, v[2]]
}

trait LnSafe {
    fn ln_1p_safe(self) -> f64;
}

impl LnSafe for f64 {
    /// `ln` of an argument already shifted to `1 - u*depletion`; guards the
    /// measure-zero `u` draw that would make the argument exactly 0.
    fn ln_1p_safe(self) -> f64 {
        if self <= 0.0 {
            f64::MIN_POSITIVE.ln()
        } else {
            self.ln()
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Deterministic per-trajectory random stream: the key is derived from
/// `(master_seed, index)` by counter mixing, so partitioning across
/// workers cannot change any draw.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ index.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Matched per-subsystem densities for an initial product coherent state
/// centred at spherical angles `(theta_s, phi_s, theta_l, phi_l)`.
#[derive(Clone, Copy, Debug)]
pub struct EnsembleSpec {
    pub spec_s: MatchedDensitySpec,
    pub spec_l: MatchedDensitySpec,
    pub master_seed: u64,
}

impl EnsembleSpec {
    pub fn new(qn: &QuantumNumbers, angles: [f64; 4], master_seed: u64) -> Self {
        Self {
            spec_s: MatchedDensitySpec::from_spin(qn.s, angles[0], angles[1]),
            spec_l: MatchedDensitySpec::from_spin(qn.l, angles[2], angles[3]),
            master_seed,
        }
    }

    /// The phase point of trajectory `index`; a pure function of
    /// `(master_seed, index)`.
    pub fn point(&self, index: u64) -> PhasePoint {
        let mut rng = trajectory_rng(self.master_seed, index);
        PhasePoint {
            s: sample_matched(&self.spec_s, &mut rng),
            l: sample_matched(&self.spec_l, &mut rng),
        }
    }
}

/// An equal-weight collection of phase points realizing the Liouville
/// density.
#[derive(Clone, Debug)]
pub struct Ensemble {
    points: Vec<PhasePoint>,
    master_seed: u64,
}

impl Ensemble {
    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn from_points(points: Vec<PhasePoint>, master_seed: u64) -> Self {
        Self { points, master_seed }
    }
}

/// Materializes `n_traj` points of the matched initial density centred at
/// `angles` (radians). Reproducible bit-for-bit from `master_seed`
/// regardless of worker count.
pub fn make_ensemble(
    qn: &QuantumNumbers,
    angles: [f64; 4],
    n_traj: usize,
    master_seed: u64,
) -> Ensemble {
    let spec = EnsembleSpec::new(qn, angles, master_seed);
    let points = (0..n_traj as u64)
        .into_par_iter()
        .map(|i| spec.point(i))
        .collect();
    Ensemble { points, master_seed }
}

/// Advances every trajectory by `n_kicks`.
pub fn evolve_ensemble(e: &Ensemble, params: &ClassicalParams, n_kicks: usize) -> Ensemble {
    let (sin_a, cos_a) = params.a.sin_cos();
    let points = e
        .points
        .par_iter()
        .map(|p| {
            let mut q = *p;
            for k in 1..=n_kicks {
                q = step_kernel(&q, params.gamma, params.r, sin_a, cos_a);
                if k % 1000 == 0 {
                    q.renormalize();
                }
            }
            q
        })
        .collect();
    Ensemble {
        points,
        master_seed: e.master_seed,
    }
}

/// Default chunk length for fixed-order partial sums.
pub const DEFAULT_CHUNK_SIZE: usize = 1 << 16;

/// Ensemble average of the unit vector `L~`, accumulated in fixed-order
/// chunks so the result is bit-stable for a given `chunk_size`.
pub fn mean_unit_l(points: &[PhasePoint], chunk_size: usize) -> [f64; 3] {
    let partials: Vec<[f64; 3]> = points
        .par_chunks(chunk_size)
        .map(|chunk| {
            let mut acc = [0.0f64; 3];
            for p in chunk {
                for k in 0..3 {
                    acc[k] += p.l[k];
                }
            }
            acc
        })
        .collect();
    let mut total = [0.0f64; 3];
    for part in partials {
        for k in 0..3 {
            total[k] += part[k];
        }
    }
    let n = points.len().max(1) as f64;
    [total[0] / n, total[1] / n, total[2] / n]
}

/// Ensemble average of `L` in absolute units (`L~` scaled by
/// `sqrt(l(l+1))`).
pub fn ensemble_mean_l(e: &Ensemble, l: Spin) -> [f64; 3] {
    let m = mean_unit_l(&e.points, DEFAULT_CHUNK_SIZE);
    let mag = l.magnitude();
    [m[0] * mag, m[1] * mag, m[2] * mag]
}

/// Bin index for a value `x` on the label grid `top, top-1, ..., -top`:
/// bin `m` covers `(m - 1/2, m + 1/2]`, exact boundaries belong to the
/// lower `m`, and out-of-range values fold into the edge bins.
#[inline]
pub fn bin_index(x: f64, top: f64, n_bins: usize) -> usize {
    let i = (top - x + 0.5).floor();
    (i.max(0.0) as usize).min(n_bins - 1)
}

/// Histogram counts of absolute `L_z` over the `2l+1` quantum labels.
pub fn count_marginal_lz(points: &[PhasePoint], l: Spin) -> Vec<u64> {
    let mag = l.magnitude();
    let top = l.value();
    let n = l.dim();
    let mut counts = vec![0u64; n];
    for p in points {
        counts[bin_index(p.l[2] * mag, top, n)] += 1;
    }
    counts
}

/// Histogram counts of absolute `J_z = S_z + L_z` over the `2(s+l)+1`
/// labels.
pub fn count_marginal_jz(points: &[PhasePoint], s: Spin, l: Spin) -> Vec<u64> {
    let (mag_s, mag_l) = (s.magnitude(), l.magnitude());
    let top = s.value() + l.value();
    let n = s.dim() + l.dim() - 1;
    let mut counts = vec![0u64; n];
    for p in points {
        counts[bin_index(p.s[2] * mag_s + p.l[2] * mag_l, top, n)] += 1;
    }
    counts
}

fn counts_to_distribution(counts: Vec<u64>, top: f64, n_traj: usize) -> Distribution {
    let labels = (0..counts.len()).map(|i| top - i as f64).collect();
    let probs = counts
        .into_iter()
        .map(|c| c as f64 / n_traj as f64)
        .collect();
    Distribution::new(labels, probs).expect("counts are non-negative")
}

/// Binned marginal of `L_z` with bins of unit width centred on the
/// quantum eigenvalues.
pub fn binned_marginal_lz(e: &Ensemble, l: Spin) -> Distribution {
    counts_to_distribution(count_marginal_lz(&e.points, l), l.value(), e.len())
}

/// Binned marginal of `J_z` with bins of unit width centred on the
/// quantum eigenvalues.
pub fn binned_marginal_jz(e: &Ensemble, s: Spin, l: Spin) -> Distribution {
    counts_to_distribution(
        count_marginal_jz(&e.points, s, l),
        s.value() + l.value(),
        e.len(),
    )
}

/// Even moment `<J_x^m>` of the delta-ring (vector model) density with
/// cone angle `cos(theta0) = j / |J|`:
/// `(j(j+1) - j^2)^{m/2} (m-1)!!/m!!`, giving `j/2` at `m = 2` and
/// `3 j^2/8` at `m = 4`.
pub fn vector_model_moment(j: Spin, m: u32) -> Result<f64> {
    if !m.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "vector-model moment defined for even m, got {m}"
        )));
    }
    let jv = j.value();
    let transverse2 = j.casimir() - jv * jv; // |J|^2 sin^2(theta0)
    let mut ratio = 1.0; // (m-1)!!/m!!
    let mut k = m;
    while k >= 2 {
        ratio *= (k - 1) as f64 / k as f64;
        k -= 2;
    }
    Ok(transverse2.powi((m / 2) as i32) * ratio)
}
