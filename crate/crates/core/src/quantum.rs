//! Exact quantum dynamics of the kicked two-spin system.
//!
//! States live in the product basis `|s, m_s> ⊗ |l, m_l>` with both
//! magnetic indices descending from `+j`, stored m_s-major. One kick is
//! applied in factored form: rotate both subsystem indices into the x
//! eigenbasis with `d(pi/2)`, multiply the diagonal interaction phase,
//! rotate back and multiply the free-rotation phase. The full `N x N`
//! unitary is never materialized.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::wigner::{little_d, z_phase, DMatrix};
use crate::{Error, Result, Spin};

/// Spin quantum numbers of the two subsystems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuantumNumbers {
    pub s: Spin,
    pub l: Spin,
}

impl QuantumNumbers {
    pub fn new(s: Spin, l: Spin) -> Self {
        Self { s, l }
    }

    /// Hilbert-space dimension `(2s+1)(2l+1)`.
    pub fn dim(&self) -> usize {
        self.s.dim() * self.l.dim()
    }

    /// Classical magnitude ratio `|L|/|S|`.
    pub fn ratio(&self) -> f64 {
        self.l.magnitude() / self.s.magnitude()
    }
}

/// Kick parameters of the Hamiltonian: z-rotation angle `a` per kick and
/// coupling strength `c`.
#[derive(Clone, Copy, Debug)]
pub struct ModelParams {
    pub a: f64,
    pub c: f64,
}

impl ModelParams {
    pub fn new(a: f64, c: f64) -> Self {
        Self { a, c }
    }

    /// Chooses `c` so the dimensionless classical coupling
    /// `gamma = c sqrt(s(s+1))` is matched exactly.
    pub fn from_gamma(a: f64, gamma: f64, qn: &QuantumNumbers) -> Self {
        Self { a, c: gamma / qn.s.magnitude() }
    }

    pub fn gamma(&self, qn: &QuantumNumbers) -> f64 {
        self.c * qn.s.magnitude()
    }
}

/// Normalized complex amplitudes over the product basis.
#[derive(Clone, Debug)]
pub struct StateVector {
    qn: QuantumNumbers,
    amp: Vec<Complex64>,
}

impl StateVector {
    pub fn qn(&self) -> &QuantumNumbers {
        &self.qn
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Amplitude at basis indices `(i_s, i_l)`, each `0` at `m = +j`.
    pub fn at(&self, i_s: usize, i_l: usize) -> Complex64 {
        self.amp[i_s * self.qn.l.dim() + i_l]
    }

    /// Probability weights of the even and odd `(m_s + m_l)`-parity
    /// sectors. Parity is labelled by `(i_s + i_l) mod 2`, so the even
    /// sector contains the state `|s,s> ⊗ |l,l>`.
    pub fn sector_probabilities(&self) -> (f64, f64) {
        let dl = self.qn.l.dim();
        let mut even = 0.0;
        let mut odd = 0.0;
        for (idx, a) in self.amp.iter().enumerate() {
            let p = a.norm_sqr();
            if (idx / dl + idx % dl).is_multiple_of(2) {
                even += p;
            } else {
                odd += p;
            }
        }
        (even, odd)
    }
}

/// Subsystem coherent state `R(theta, phi) |j, j>`: maximum polarization
/// along the direction `(theta, phi)`.
pub fn coherent_state(j: Spin, theta: f64, phi: f64) -> Result<Vec<Complex64>> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Domain(format!(
            "coherent-state polar angle theta = {theta} outside [0, pi]"
        )));
    }
    let d = little_d(j, theta)?;
    let phases = z_phase(j, phi)?;
    // column m = +j of d(theta), phased by exp(-i m' phi)
    let col = d.column(0);
    Ok(col.into_iter().zip(phases).map(|(x, ph)| ph * x).collect())
}

/// Separable product state from two unit subsystem vectors.
pub fn product_state(
    qn: &QuantumNumbers,
    s_vec: &[Complex64],
    l_vec: &[Complex64],
) -> Result<StateVector> {
    if s_vec.len() != qn.s.dim() || l_vec.len() != qn.l.dim() {
        return Err(Error::Dimension(format!(
            "product state needs lengths ({}, {}), got ({}, {})",
            qn.s.dim(),
            qn.l.dim(),
            s_vec.len(),
            l_vec.len()
        )));
    }
    for (name, v) in [("s", s_vec), ("l", l_vec)] {
        let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!(
                "subsystem {name} vector has norm {norm}, expected 1"
            )));
        }
    }
    let mut amp = Vec::with_capacity(qn.dim());
    for a in s_vec {
        for b in l_vec {
            amp.push(a * b);
        }
    }
    Ok(StateVector { qn: *qn, amp })
}

/// One-kick Floquet operator in factored form: two quarter-turn rotation
/// matrices plus two diagonal phase arrays. Memory stays
/// `O((2s+1)^2 + (2l+1)^2 + N)`.
pub struct FactoredFloquet {
    qn: QuantumNumbers,
    d_s: Vec<f64>,
    d_s_t: Vec<f64>,
    d_l: Vec<f64>,
    d_l_t: Vec<f64>,
    phase_int: Vec<Complex64>,
    phase_free: Vec<Complex64>,
}

impl FactoredFloquet {
    pub fn qn(&self) -> &QuantumNumbers {
        &self.qn
    }
}

/// Precomputes the factored form of
/// `F = exp[-i a (S_z + L_z)] exp[-i c S_x L_x]`.
pub fn build_floquet(qn: &QuantumNumbers, params: &ModelParams) -> Result<FactoredFloquet> {
    let quarter = std::f64::consts::FRAC_PI_2;
    let d_s = little_d(qn.s, quarter)?;
    let d_l = little_d(qn.l, quarter)?;
    let (ds, dl) = (qn.s.dim(), qn.l.dim());
    let flat = |m: &DMatrix, transpose: bool| -> Vec<f64> {
        let n = m.dim();
        let mut v = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                if transpose {
                    v[c * n + r] = m.get(r, c);
                } else {
                    v[r * n + c] = m.get(r, c);
                }
            }
        }
        v
    };
    let mut phase_int = Vec::with_capacity(qn.dim());
    let mut phase_free = Vec::with_capacity(qn.dim());
    for i_s in 0..ds {
        let ms = qn.s.m_at(i_s);
        for i_l in 0..dl {
            let ml = qn.l.m_at(i_l);
            phase_int.push(Complex64::from_polar(1.0, -params.c * ms * ml));
            phase_free.push(Complex64::from_polar(1.0, -params.a * (ms + ml)));
        }
    }
    Ok(FactoredFloquet {
        qn: *qn,
        d_s: flat(&d_s, false),
        d_s_t: flat(&d_s, true),
        d_l: flat(&d_l, false),
        d_l_t: flat(&d_l, true),
        phase_int,
        phase_free,
    })
}

/// Applies the rotation matrix `m` (dl x dl) to the l-index of `amp`.
/// Each output element is a fixed-order dot product, so results do not
/// depend on the worker count.
fn rotate_l_index(m: &[f64], amp: &[Complex64], _ds: usize, dl: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; amp.len()];
    out.par_chunks_mut(dl)
        .zip(amp.par_chunks(dl))
        .for_each(|(out_row, in_row)| {
            for (ilp, o) in out_row.iter_mut().enumerate() {
                let mrow = &m[ilp * dl..(ilp + 1) * dl];
                let mut re = 0.0;
                let mut im = 0.0;
                for (w, a) in mrow.iter().zip(in_row) {
                    re += w * a.re;
                    im += w * a.im;
                }
                *o = Complex64::new(re, im);
            }
        });
    out
}

/// Applies the rotation matrix `m` (ds x ds) to the s-index of `amp`.
fn rotate_s_index(m: &[f64], amp: &[Complex64], ds: usize, dl: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; amp.len()];
    out.par_chunks_mut(dl)
        .enumerate()
        .for_each(|(isp, out_row)| {
            let mrow = &m[isp * ds..(isp + 1) * ds];
            for (is, &w) in mrow.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let in_row = &amp[is * dl..(is + 1) * dl];
                for (o, a) in out_row.iter_mut().zip(in_row) {
                    o.re += w * a.re;
                    o.im += w * a.im;
                }
            }
        });
    out
}

fn mul_diag(amp: &mut [Complex64], diag: &[Complex64]) {
    amp.par_iter_mut().zip(diag.par_iter()).for_each(|(a, d)| *a *= d);
}

fn mul_diag_conj(amp: &mut [Complex64], diag: &[Complex64]) {
    amp.par_iter_mut()
        .zip(diag.par_iter())
        .for_each(|(a, d)| *a *= d.conj());
}

/// Advances the state by one kick.
pub fn apply_floquet(f: &FactoredFloquet, psi: &StateVector) -> Result<StateVector> {
    if psi.qn != f.qn {
        return Err(Error::Dimension(
            "state and Floquet operator have different quantum numbers".into(),
        ));
    }
    let (ds, dl) = (f.qn.s.dim(), f.qn.l.dim());
    let t = rotate_l_index(&f.d_l_t, &psi.amp, ds, dl);
    let mut t = rotate_s_index(&f.d_s_t, &t, ds, dl);
    mul_diag(&mut t, &f.phase_int);
    let t = rotate_l_index(&f.d_l, &t, ds, dl);
    let mut t = rotate_s_index(&f.d_s, &t, ds, dl);
    mul_diag(&mut t, &f.phase_free);
    Ok(StateVector { qn: psi.qn, amp: t })
}

/// Undoes one kick; `apply_inverse(f, apply_floquet(f, psi))` returns the
/// input to rounding accuracy.
pub fn apply_inverse(f: &FactoredFloquet, psi: &StateVector) -> Result<StateVector> {
    if psi.qn != f.qn {
        return Err(Error::Dimension(
            "state and Floquet operator have different quantum numbers".into(),
        ));
    }
    let (ds, dl) = (f.qn.s.dim(), f.qn.l.dim());
    let mut t = psi.amp.clone();
    mul_diag_conj(&mut t, &f.phase_free);
    let t = rotate_l_index(&f.d_l_t, &t, ds, dl);
    let mut t = rotate_s_index(&f.d_s_t, &t, ds, dl);
    mul_diag_conj(&mut t, &f.phase_int);
    let t = rotate_l_index(&f.d_l, &t, ds, dl);
    let t = rotate_s_index(&f.d_s, &t, ds, dl);
    Ok(StateVector { qn: psi.qn, amp: t })
}

/// Expectation values of the Cartesian spin components.
#[derive(Clone, Copy, Debug)]
pub struct SpinExpectations {
    /// `<S>` in absolute units.
    pub s: [f64; 3],
    /// `<L>` in absolute units.
    pub l: [f64; 3],
    /// `<J> = <S> + <L>`.
    pub j: [f64; 3],
}

/// `<S>`, `<L>` and `<J>` of a unit state. The transverse components come
/// from the ladder identity `<J_x> + i <J_y> = <J_+>`.
pub fn expect_components(psi: &StateVector) -> SpinExpectations {
    let qn = psi.qn;
    let (ds, dl) = (qn.s.dim(), qn.l.dim());
    let mut sz = 0.0;
    let mut lz = 0.0;
    let mut s_plus = Complex64::ZERO;
    let mut l_plus = Complex64::ZERO;
    for i_s in 0..ds {
        let ms = qn.s.m_at(i_s);
        let row = &psi.amp[i_s * dl..(i_s + 1) * dl];
        for (i_l, a) in row.iter().enumerate() {
            let p = a.norm_sqr();
            sz += ms * p;
            lz += qn.l.m_at(i_l) * p;
            // L_+ couples (i_s, i_l) to (i_s, i_l - 1)
            if i_l >= 1 {
                let ml = qn.l.m_at(i_l);
                let coeff = (qn.l.casimir() - ml * (ml + 1.0)).sqrt();
                l_plus += row[i_l - 1].conj() * coeff * a;
            }
        }
        // S_+ couples (i_s, i_l) to (i_s - 1, i_l)
        if i_s >= 1 {
            let coeff = (qn.s.casimir() - ms * (ms + 1.0)).sqrt();
            let upper = &psi.amp[(i_s - 1) * dl..i_s * dl];
            for (a, b) in row.iter().zip(upper) {
                s_plus += b.conj() * coeff * a;
            }
        }
    }
    let s = [s_plus.re, s_plus.im, sz];
    let l = [l_plus.re, l_plus.im, lz];
    SpinExpectations {
        s,
        l,
        j: [s[0] + l[0], s[1] + l[1], s[2] + l[2]],
    }
}

/// Normalized variance of the second spin,
/// `[l(l+1) - <L>^2] / l(l+1)`, using the kinematically exact `<L^2>`.
pub fn variance_l(psi: &StateVector) -> f64 {
    let e = expect_components(psi);
    let mag2: f64 = e.l.iter().map(|x| x * x).sum();
    let casimir = psi.qn.l.casimir();
    ((casimir - mag2) / casimir).clamp(0.0, 1.0)
}

/// Discrete probability distribution over eigenvalue labels.
#[derive(Clone, Debug)]
pub struct Distribution {
    labels: Vec<f64>,
    probs: Vec<f64>,
}

impl Distribution {
    /// Wraps label/probability arrays, clamping negative rounding residue
    /// at `-1e-15` and rejecting anything more negative.
    pub fn new(labels: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::Dimension(format!(
                "{} labels vs {} probabilities",
                labels.len(),
                probs.len()
            )));
        }
        let mut clamped = probs;
        for p in &mut clamped {
            if *p < 0.0 {
                if *p < -1e-15 {
                    return Err(Error::Domain(format!("negative probability {p}")));
                }
                *p = 0.0;
            }
        }
        Ok(Self { labels, probs: clamped })
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.labels.iter().zip(&self.probs).map(|(x, p)| x * p).sum()
    }
}

/// Marginal distribution of `L_z`: `P(m_l) = sum_{m_s} |amp|^2`.
pub fn dist_lz(psi: &StateVector) -> Distribution {
    let qn = psi.qn;
    let dl = qn.l.dim();
    let mut probs = vec![0.0; dl];
    for row in psi.amp.chunks(dl) {
        for (p, a) in probs.iter_mut().zip(row) {
            *p += a.norm_sqr();
        }
    }
    let labels = qn.l.m_values().collect();
    Distribution::new(labels, probs).expect("probabilities are non-negative")
}

/// Distribution of the total `J_z` over `m_j = s+l, ..., -(s+l)`.
pub fn dist_jz(psi: &StateVector) -> Distribution {
    let qn = psi.qn;
    let dl = qn.l.dim();
    let n_j = qn.s.dim() + qn.l.dim() - 1;
    let mut probs = vec![0.0; n_j];
    for (idx, a) in psi.amp.iter().enumerate() {
        probs[idx / dl + idx % dl] += a.norm_sqr();
    }
    let top = qn.s.value() + qn.l.value();
    let labels = (0..n_j).map(|i| top - i as f64).collect();
    Distribution::new(labels, probs).expect("probabilities are non-negative")
}

/// Distribution of `L_x`, computed by rotating the l-index into the x
/// eigenbasis with `d(pi/2)` before marginalizing.
pub fn dist_lx(psi: &StateVector) -> Result<Distribution> {
    let qn = psi.qn;
    let (ds, dl) = (qn.s.dim(), qn.l.dim());
    let d = little_d(qn.l, std::f64::consts::FRAC_PI_2)?;
    // coefficient in the x basis: c'_m = sum_{m''} d_{m'',m} c_{m''}
    let mut dt = vec![0.0; dl * dl];
    for r in 0..dl {
        for c in 0..dl {
            dt[c * dl + r] = d.get(r, c);
        }
    }
    let rotated = rotate_l_index(&dt, &psi.amp, ds, dl);
    let mut probs = vec![0.0; dl];
    for row in rotated.chunks(dl) {
        for (p, a) in probs.iter_mut().zip(row) {
            *p += a.norm_sqr();
        }
    }
    let labels = qn.l.m_values().collect();
    Distribution::new(labels, probs)
}

/// Shannon entropy `-sum p ln p` in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(dist: &Distribution) -> f64 {
    -dist
        .probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Microcanonical distribution of `L_z`: flat over the `2l+1` labels.
pub fn microcanonical_lz(l: Spin) -> Distribution {
    let n = l.dim();
    let labels = l.m_values().collect();
    Distribution::new(labels, vec![1.0 / n as f64; n]).expect("uniform is a distribution")
}

/// Microcanonical distribution of `J_z`: flat plateau of height
/// `1/(2l+1)` for `|m_j| <= l-s`, tent-shaped slope outside.
pub fn microcanonical_jz(s: Spin, l: Spin) -> Distribution {
    let d_top = (s.doubled() + l.doubled()) as i64;
    let n_j = s.dim() + l.dim() - 1;
    let n = (s.dim() * l.dim()) as f64;
    let plateau = s.dim().min(l.dim()) as f64;
    let mut labels = Vec::with_capacity(n_j);
    let mut probs = Vec::with_capacity(n_j);
    for i in 0..n_j {
        let dmj = d_top - 2 * i as i64;
        labels.push(dmj as f64 / 2.0);
        let mult = ((d_top - dmj.abs()) / 2 + 1) as f64;
        probs.push(mult.min(plateau) / n);
    }
    Distribution::new(labels, probs).expect("multiplicities are non-negative")
}

/// Moment `<J_x^m>` of the polar coherent state `|j, j>`, evaluated in the
/// x eigenbasis. Odd moments vanish; `m = 2` gives `j/2` and `m = 4` gives
/// `3j^2/4 - j/4`.
pub fn coherent_x_moment(j: Spin, m: u32) -> Result<f64> {
    let d = little_d(j, std::f64::consts::FRAC_PI_2)?;
    let mut total = 0.0;
    for c in 0..j.dim() {
        let w = d.get(0, c).powi(2);
        total += j.m_at(c).powi(m as i32) * w;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn spin(j: f64) -> Spin {
        Spin::new(j).unwrap()
    }

    fn qn(s: f64, l: f64) -> QuantumNumbers {
        QuantumNumbers::new(spin(s), spin(l))
    }

    fn basis_state(j: Spin, index: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::ZERO; j.dim()];
        v[index] = Complex64::ONE;
        v
    }

    #[test]
    fn gamma_matching_is_exact() {
        let q = qn(140.0, 154.0);
        for gamma in [1.215, 2.835, 0.06] {
            let p = ModelParams::from_gamma(5.0, gamma, &q);
            assert!((p.gamma(&q) - gamma).abs() <= 1e-15 * gamma);
        }
    }

    #[test]
    fn coherent_state_at_pole_is_top_basis_vector() {
        let v = coherent_state(spin(7.0), 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(v[0].re, 1.0, epsilon = 1e-14);
        for a in &v[1..] {
            assert!(a.norm() < 1e-14);
        }
    }

    #[test]
    fn coherent_state_rejects_bad_theta() {
        assert!(coherent_state(spin(2.0), -0.1, 0.0).is_err());
        assert!(coherent_state(spin(2.0), PI + 0.1, 0.0).is_err());
    }

    #[test]
    fn coherent_state_expectations() {
        // <J_z> = j cos(theta), <J_x + i J_y> = j e^{i phi} sin(theta)
        let q = qn(10.0, 6.0);
        let (theta, phi) = (1.1, 0.6);
        let sv = coherent_state(q.s, theta, phi).unwrap();
        let lv = basis_state(q.l, 0);
        let psi = product_state(&q, &sv, &lv).unwrap();
        let e = expect_components(&psi);
        assert_abs_diff_eq!(e.s[2], 10.0 * theta.cos(), epsilon = 1e-10);
        let expected = Complex64::from_polar(10.0 * theta.sin(), phi);
        assert_abs_diff_eq!(e.s[0], expected.re, epsilon = 1e-9);
        assert_abs_diff_eq!(e.s[1], expected.im, epsilon = 1e-9);
        // x-polarized case from the same identity
        let sv = coherent_state(q.s, PI / 2.0, 0.0).unwrap();
        let psi = product_state(&q, &sv, &lv).unwrap();
        let e = expect_components(&psi);
        assert_abs_diff_eq!(e.s[0], 10.0, epsilon = 1e-10);
        assert_abs_diff_eq!(e.s[2], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn coherent_state_minimum_uncertainty_variance() {
        let q = qn(4.0, 154.0);
        let sv = basis_state(q.s, 0);
        let lv = coherent_state(q.l, 0.9, 2.0).unwrap();
        let psi = product_state(&q, &sv, &lv).unwrap();
        assert_abs_diff_eq!(variance_l(&psi), 1.0 / 155.0, epsilon = 1e-10);
    }

    #[test]
    fn product_state_marginal_is_separable() {
        let q = qn(1.5, 2.0);
        let sv = coherent_state(q.s, 0.7, 0.3).unwrap();
        let lv = coherent_state(q.l, 2.1, 4.4).unwrap();
        let psi = product_state(&q, &sv, &lv).unwrap();
        assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-12);
        let marg = dist_lz(&psi);
        for (i, p) in marg.probs().iter().enumerate() {
            assert_abs_diff_eq!(*p, lv[i].norm_sqr(), epsilon = 1e-12);
        }
    }

    #[test]
    fn product_state_rejects_mismatched_lengths() {
        let q = qn(1.0, 1.0);
        let v2 = basis_state(spin(0.5), 0);
        let v3 = basis_state(spin(1.0), 0);
        assert!(product_state(&q, &v2, &v3).is_err());
    }

    #[test]
    fn floquet_zero_coupling_preserves_jz() {
        let q = qn(3.0, 4.0);
        let f = build_floquet(&q, &ModelParams::new(1.3, 0.0)).unwrap();
        let sv = coherent_state(q.s, 1.0, 0.4).unwrap();
        let lv = coherent_state(q.l, 2.0, 1.9).unwrap();
        let mut psi = product_state(&q, &sv, &lv).unwrap();
        let jz0 = expect_components(&psi).j[2];
        for _ in 0..20 {
            psi = apply_floquet(&f, &psi).unwrap();
        }
        assert_abs_diff_eq!(expect_components(&psi).j[2], jz0, epsilon = 1e-12);
        assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn floquet_identity_at_zero_parameters() {
        let q = qn(2.0, 2.5);
        let f = build_floquet(&q, &ModelParams::new(0.0, 0.0)).unwrap();
        let sv = coherent_state(q.s, 0.8, 0.0).unwrap();
        let lv = coherent_state(q.l, 1.4, 0.7).unwrap();
        let psi = product_state(&q, &sv, &lv).unwrap();
        let out = apply_floquet(&f, &psi).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(out.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn floquet_inverse_roundtrip() {
        let q = qn(2.5, 3.0);
        let p = ModelParams::from_gamma(5.0, 2.835, &q);
        let f = build_floquet(&q, &p).unwrap();
        let sv = coherent_state(q.s, 0.9, 1.0).unwrap();
        let lv = coherent_state(q.l, 2.2, 0.3).unwrap();
        let psi = product_state(&q, &sv, &lv).unwrap();
        let back = apply_inverse(&f, &apply_floquet(&f, &psi).unwrap()).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(back.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn floquet_phase_at_a_pi() {
        // c = 0, a = pi, integer spins: amplitudes pick up (-1)^{m_s+m_l}
        let q = qn(2.0, 3.0);
        let f = build_floquet(&q, &ModelParams::new(PI, 0.0)).unwrap();
        let sv = coherent_state(q.s, 1.0, 0.0).unwrap();
        let lv = coherent_state(q.l, 0.5, 0.0).unwrap();
        let psi = product_state(&q, &sv, &lv).unwrap();
        let out = apply_floquet(&f, &psi).unwrap();
        let dl = q.l.dim();
        for (idx, (a, b)) in psi.amplitudes().iter().zip(out.amplitudes()).enumerate() {
            let (i_s, i_l) = (idx / dl, idx % dl);
            let ms_plus_ml = q.s.value() + q.l.value() - (i_s + i_l) as f64;
            let sign = if (ms_plus_ml as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            assert!((a * sign - b).norm() < 1e-11, "idx {idx}");
        }
    }

    #[test]
    fn selection_rule_conserves_parity_sector() {
        let q = qn(10.0, 11.0);
        let p = ModelParams::from_gamma(5.0, 2.835, &q);
        let f = build_floquet(&q, &p).unwrap();
        // |s,s> ⊗ |l,l> sits in the even (i_s + i_l) sector
        let mut psi = product_state(&q, &basis_state(q.s, 0), &basis_state(q.l, 0)).unwrap();
        for _ in 0..50 {
            psi = apply_floquet(&f, &psi).unwrap();
        }
        let (_, odd) = psi.sector_probabilities();
        assert!(odd < 1e-20, "leakage {odd}");
    }

    #[test]
    fn expectations_of_basis_states() {
        let q = qn(2.0, 1.0);
        let psi = product_state(&q, &basis_state(q.s, 1), &basis_state(q.l, 2)).unwrap();
        let e = expect_components(&psi);
        assert_abs_diff_eq!(e.s[2], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.l[2], -1.0, epsilon = 1e-14);
        for k in 0..2 {
            assert_abs_diff_eq!(e.s[k], 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(e.l[k], 0.0, epsilon = 1e-14);
        }
        for k in 0..3 {
            assert_abs_diff_eq!(e.j[k], e.s[k] + e.l[k], epsilon = 1e-14);
        }
    }

    #[test]
    fn dist_lz_moments_match_expectations() {
        let q = qn(2.5, 3.5);
        let p = ModelParams::from_gamma(5.0, 1.215, &q);
        let f = build_floquet(&q, &p).unwrap();
        let sv = coherent_state(q.s, 0.35, 0.70).unwrap();
        let lv = coherent_state(q.l, 2.79, 2.27).unwrap();
        let mut psi = product_state(&q, &sv, &lv).unwrap();
        for _ in 0..7 {
            psi = apply_floquet(&f, &psi).unwrap();
        }
        let d = dist_lz(&psi);
        assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.mean(), expect_components(&psi).l[2], epsilon = 1e-10);
    }

    #[test]
    fn dist_jz_delta_for_stretched_state() {
        let q = qn(2.0, 3.0);
        let psi = product_state(&q, &basis_state(q.s, 0), &basis_state(q.l, 0)).unwrap();
        let d = dist_jz(&psi);
        assert_eq!(d.labels()[0], 5.0);
        assert_abs_diff_eq!(d.probs()[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn dist_lx_peaks_for_x_polarized_state() {
        let q = qn(1.0, 8.0);
        let sv = basis_state(q.s, 0);
        let lv = coherent_state(q.l, PI / 2.0, 0.0).unwrap();
        let psi = product_state(&q, &sv, &lv).unwrap();
        let d = dist_lx(&psi).unwrap();
        assert_abs_diff_eq!(d.total(), 1.0, epsilon = 1e-12);
        // polarization along +x concentrates at m = +l (index 0)
        let (imax, _) = d
            .probs()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(imax, 0);
        assert!(d.probs()[0] > 0.5);
        assert_abs_diff_eq!(d.mean(), 8.0, epsilon = 1e-9);
    }

    #[test]
    fn dist_lx_is_delta_for_x_eigenstate() {
        // build an L_x eigenstate by rotating a basis vector with d(pi/2)
        let q = qn(0.5, 4.0);
        let d = little_d(q.l, PI / 2.0).unwrap();
        let target = 3usize;
        let lv: Vec<Complex64> = (0..q.l.dim())
            .map(|r| Complex64::new(d.get(r, target), 0.0))
            .collect();
        let psi = product_state(&q, &basis_state(q.s, 0), &lv).unwrap();
        let dist = dist_lx(&psi).unwrap();
        for (i, p) in dist.probs().iter().enumerate() {
            let want = if i == target { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(*p, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn entropy_uniform_and_delta() {
        let u = Distribution::new(vec![0.0, 1.0, 2.0], vec![1.0 / 3.0; 3]).unwrap();
        assert_abs_diff_eq!(shannon_entropy(&u), 3.0f64.ln(), epsilon = 1e-14);
        let d = Distribution::new(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(shannon_entropy(&d), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn distribution_rejects_real_negativity() {
        assert!(Distribution::new(vec![0.0], vec![-1e-12]).is_err());
        let d = Distribution::new(vec![0.0, 1.0], vec![-1e-16, 1.0]).unwrap();
        assert_eq!(d.probs()[0], 0.0);
    }

    #[test]
    fn microcanonical_forms() {
        let lz = microcanonical_lz(spin(1.0));
        for p in lz.probs() {
            assert_abs_diff_eq!(*p, 1.0 / 3.0, epsilon = 1e-15);
        }
        // s = l degenerates to a pure triangle peaking at m_j = 0
        let jz = microcanonical_jz(spin(2.0), spin(2.0));
        assert_abs_diff_eq!(jz.total(), 1.0, epsilon = 1e-12);
        let mid = jz.len() / 2;
        assert_abs_diff_eq!(jz.probs()[mid], 1.0 / 5.0, epsilon = 1e-15);
        assert!(jz.probs()[0] < jz.probs()[1]);
        // production-scale plateau value
        let jz = microcanonical_jz(spin(140.0), spin(154.0));
        assert_abs_diff_eq!(jz.total(), 1.0, epsilon = 1e-12);
        let mid = jz.len() / 2;
        assert_abs_diff_eq!(jz.probs()[mid], 1.0 / 309.0, epsilon = 1e-15);
    }

    #[test]
    fn coherent_x_moments_match_closed_forms() {
        for &j in &[0.5, 1.0, 5.5, 40.0] {
            let m2 = coherent_x_moment(spin(j), 2).unwrap();
            assert_abs_diff_eq!(m2, j / 2.0, epsilon = 1e-10 * (1.0 + j));
            let m4 = coherent_x_moment(spin(j), 4).unwrap();
            assert_abs_diff_eq!(
                m4,
                3.0 * j * j / 4.0 - j / 4.0,
                epsilon = 1e-10 * (1.0 + j * j)
            );
            let m1 = coherent_x_moment(spin(j), 1).unwrap();
            let m3 = coherent_x_moment(spin(j), 3).unwrap();
            assert!(m1.abs() < 1e-12 * (1.0 + j));
            assert!(m3.abs() < 1e-12 * (1.0 + j * j));
        }
    }
}
