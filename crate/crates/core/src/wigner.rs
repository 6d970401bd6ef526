//! Wigner rotation matrices `d^j_{m',m}(theta)` and z-rotation phases.
//!
//! Matrix elements are real in the standard `J_z` eigenbasis, ordered with
//! `m` descending from `+j` along both indices. Two evaluation routes are
//! provided: a stable three-term recursion usable up to large `j`
//! ([`little_d`]), and a direct evaluation of the explicit summation
//! formula ([`little_d_direct`]) kept as an independent oracle for
//! moderate `j`.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::OnceLock;

use crate::{Error, Result, Spin};

/// Largest doubled spin the direct-formula oracle accepts (`j = 60`).
/// Beyond this the alternating factorial sum loses too many digits.
pub const ORACLE_MAX_DOUBLED: u32 = 120;

/// Below this |sin theta| the recursion coefficients blow up; the matrix
/// is assembled by composing two quarter-turn-offset evaluations instead.
const SIN_THETA_MIN: f64 = 1e-9;

/// Rotation matrix `d^j(theta)` about the y-axis.
///
/// `entries[(r, c)]` is `d^j_{m',m}(theta)` with `m' = j - r`, `m = j - c`.
#[derive(Clone, Debug)]
pub struct DMatrix {
    j: Spin,
    theta: f64,
    entries: Array2<f64>,
}

impl DMatrix {
    pub fn j(&self) -> Spin {
        self.j
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Element `d^j_{m',m}` by basis index (`0` maps to `m = +j`).
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    /// Column at basis index `col` (all `m'` for fixed `m = j - col`).
    pub fn column(&self, col: usize) -> Vec<f64> {
        self.entries.column(col).to_vec()
    }

    /// Largest absolute entry of `D^T D - I`.
    pub fn orthogonality_residual(&self) -> f64 {
        let n = self.dim();
        let e = &self.entries;
        (0..n)
            .into_par_iter()
            .map(|r| {
                let mut worst = 0.0f64;
                for c in r..n {
                    let mut acc = 0.0;
                    for k in 0..n {
                        acc += e[(k, r)] * e[(k, c)];
                    }
                    let target = if r == c { 1.0 } else { 0.0 };
                    worst = worst.max((acc - target).abs());
                }
                worst
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Matrix product `self * other`, representing `d(theta1 + theta2)`.
    pub fn compose(&self, other: &DMatrix) -> Result<DMatrix> {
        if self.j != other.j {
            return Err(Error::Dimension(format!(
                "cannot compose d-matrices for j = {} and j = {}",
                self.j, other.j
            )));
        }
        let n = self.dim();
        let mut out = Array2::zeros((n, n));
        let a = self.entries.as_slice().expect("d-matrix is standard layout");
        let b = other.entries.as_slice().expect("d-matrix is standard layout");
        out.as_slice_mut()
            .expect("freshly allocated standard layout")
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(r, row)| {
                for k in 0..n {
                    let a_rk = a[r * n + k];
                    if a_rk == 0.0 {
                        continue;
                    }
                    let b_row = &b[k * n..(k + 1) * n];
                    for (o, &bv) in row.iter_mut().zip(b_row) {
                        *o += a_rk * bv;
                    }
                }
            });
        Ok(DMatrix {
            j: self.j,
            theta: self.theta + other.theta,
            entries: out,
        })
    }

    /// Largest absolute entrywise difference against another matrix.
    /// NaN anywhere in either matrix yields NaN.
    pub fn max_abs_diff(&self, other: &DMatrix) -> f64 {
        let mut worst = 0.0f64;
        for (a, b) in self.entries.iter().zip(other.entries.iter()) {
            let d = (a - b).abs();
            if d.is_nan() {
                return f64::NAN;
            }
            if d > worst {
                worst = d;
            }
        }
        worst
    }
}

/// Natural log of `n!`, from a compensated-summation table.
pub fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(4097);
        t.push(0.0);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for k in 1..=4096usize {
            // Kahan step; the table feeds seed exponents where absolute
            // error must stay near eps even for sums ~ 2000.
            let y = (k as f64).ln() - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
            t.push(sum);
        }
        t
    });
    table[n]
}

fn check_theta(theta: f64) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!("rotation angle theta = {theta} must be finite")));
    }
    Ok(())
}

/// `d^j(theta)` by three-term recursion over `m'` at fixed `m`.
///
/// Each column is seeded from the closed-form binomial expressions for the
/// top row (`m' = j`) and bottom row (`m' = -j`) and recursed inward from
/// both ends, switching at the classical turning latitude `m cos(theta)`
/// so the recursion always runs in its growing (stable) direction. Column
/// magnitudes are tracked in log scale, so seeds far below the f64 range
/// are handled without underflow.
pub fn little_d(j: Spin, theta: f64) -> Result<DMatrix> {
    check_theta(theta)?;
    let n = j.dim();
    if theta == 0.0 {
        return Ok(DMatrix {
            j,
            theta,
            entries: Array2::eye(n),
        });
    }
    if theta.sin().abs() < SIN_THETA_MIN {
        // Quarter-turn split: d(theta) = d(theta - pi/2) d(pi/2). Both
        // factors sit near |sin| = 1 where the recursion is well behaved.
        let half = std::f64::consts::FRAC_PI_2;
        let a = little_d(j, theta - half)?;
        let b = little_d(j, half)?;
        let mut m = a.compose(&b)?;
        m.theta = theta;
        return Ok(m);
    }

    let mut entries = Array2::zeros((n, n));
    let dj = j.doubled() as i64;
    let cos_t = theta.cos();
    let sin_t = theta.sin();
    let half = 0.5 * theta;
    let (abs_c, sgn_c) = (half.cos().abs(), half.cos().signum());
    let (abs_s, sgn_s) = (half.sin().abs(), half.sin().signum());
    let (ln_c, ln_s) = (abs_c.ln(), abs_s.ln());
    let casimir = j.casimir();
    // ladder coefficient sqrt(j(j+1) - m(m+1)) indexed by doubled m
    let ladder = |dm: i64| -> f64 { (casimir - (dm as f64 / 2.0) * (dm as f64 / 2.0 + 1.0)).sqrt() };

    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|c| {
            let dm = dj - 2 * c as i64; // doubled m for this column
            let m = dm as f64 / 2.0;
            let jm = ((dj + dm) / 2) as usize; // j + m
            let jmm = ((dj - dm) / 2) as usize; // j - m
            let ln_binom =
                0.5 * (ln_factorial(jm + jmm) - ln_factorial(jm) - ln_factorial(jmm));
            let mut col = vec![0.0f64; n];

            // Split row: index of the turning latitude m' ~ m cos(theta).
            let split = ((j.value() - m * cos_t).round()).clamp(0.0, (n - 1) as f64) as usize;

            // Downward sweep, seeded at m' = j.
            {
                let seed_log = ln_binom + jm as f64 * ln_c + jmm as f64 * ln_s;
                let seed_sign =
                    neg_one_pow(jmm) * int_sign_pow(sgn_c, jm) * int_sign_pow(sgn_s, jmm);
                let mut scale = seed_log;
                let mut prev = 0.0f64; // value at m' + 1 (mantissa)
                let mut cur = seed_sign; // value at m' = j (mantissa)
                col[0] = emit(cur, scale);
                for r in 1..=split {
                    let dmp = dj - 2 * (r - 1) as i64; // doubled m' before stepping down
                    let mp = dmp as f64 / 2.0;
                    let a_minus = ladder(dmp - 2);
                    let a_plus = ladder(dmp);
                    let next = ((2.0 * (m - mp * cos_t) / sin_t) * cur - a_plus * prev) / a_minus;
                    prev = cur;
                    cur = next;
                    if cur.abs() > 1e250 {
                        cur *= 1e-250;
                        prev *= 1e-250;
                        scale += 250.0 * std::f64::consts::LN_10;
                    }
                    col[r] = emit(cur, scale);
                }
            }

            // Upward sweep, seeded at m' = -j.
            if split + 1 < n {
                let seed_log = ln_binom + jmm as f64 * ln_c + jm as f64 * ln_s;
                let seed_sign = int_sign_pow(sgn_c, jmm) * int_sign_pow(sgn_s, jm);
                let mut scale = seed_log;
                let mut prev = 0.0f64; // value at m' - 1 (mantissa)
                let mut cur = seed_sign; // value at m' = -j (mantissa)
                col[n - 1] = emit(cur, scale);
                for r in (split + 1..n - 1).rev() {
                    let dmp = dj - 2 * (r + 1) as i64; // doubled m' before stepping up
                    let mp = dmp as f64 / 2.0;
                    let a_plus = ladder(dmp);
                    let a_minus = ladder(dmp - 2);
                    let next = ((2.0 * (m - mp * cos_t) / sin_t) * cur - a_minus * prev) / a_plus;
                    prev = cur;
                    cur = next;
                    if cur.abs() > 1e250 {
                        cur *= 1e-250;
                        prev *= 1e-250;
                        scale += 250.0 * std::f64::consts::LN_10;
                    }
                    col[r] = emit(cur, scale);
                }
            }
            col
        })
        .collect();

    for (c, col) in cols.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            entries[(r, c)] = v;
        }
    }
    Ok(DMatrix { j, theta, entries })
}

fn emit(mantissa: f64, log_scale: f64) -> f64 {
    if mantissa == 0.0 {
        0.0
    } else {
        mantissa * log_scale.exp()
    }
}

fn neg_one_pow(p: usize) -> f64 {
    if p.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn int_sign_pow(sign: f64, p: usize) -> f64 {
    if p.is_multiple_of(2) {
        1.0
    } else {
        sign
    }
}

/// `d^j(theta)` by direct evaluation of the explicit summation formula.
///
/// The alternating factorial sum cancels to many orders near the matrix
/// centre, so terms are carried in double-double precision; factorials up
/// to `(2j)! = 120!` stay inside the f64 exponent range. Oracle use only:
/// refuses `j > 60`.
pub fn little_d_direct(j: Spin, theta: f64) -> Result<DMatrix> {
    check_theta(theta)?;
    if j.doubled() > ORACLE_MAX_DOUBLED {
        return Err(Error::OracleRange(format!(
            "direct formula refused for j = {} (max j = 60); use the recursion",
            j
        )));
    }
    let n = j.dim();
    let dj = j.doubled() as i64;
    let half = 0.5 * theta;
    let cos_h = Dd::from(half.cos());
    let sin_h = Dd::from(half.sin());
    // power tables for cos(theta/2)^p and sin(theta/2)^p, p = 0..=2j
    let mut c_pow = Vec::with_capacity(n + 1);
    let mut s_pow = Vec::with_capacity(n + 1);
    c_pow.push(Dd::from(1.0));
    s_pow.push(Dd::from(1.0));
    for p in 1..=j.doubled() as usize {
        c_pow.push(c_pow[p - 1].mul(cos_h));
        s_pow.push(s_pow[p - 1].mul(sin_h));
    }
    let fact = dd_factorials();
    let sqrt_fact = dd_sqrt_factorials();

    let mut entries = Array2::zeros((n, n));
    for r in 0..n {
        let dmp = dj - 2 * r as i64;
        for c in 0..n {
            let dm = dj - 2 * c as i64;
            let jpm = (dj + dm) / 2; // j + m
            let jmm = (dj - dm) / 2; // j - m
            let jpmp = (dj + dmp) / 2; // j + m'
            let jmmp = (dj - dmp) / 2; // j - m'
            // product of sqrt factors: the product of the four factorials
            // themselves can overflow f64 range at j = 60
            let norm = sqrt_fact[jpm as usize]
                .mul(sqrt_fact[jmm as usize])
                .mul(sqrt_fact[jpmp as usize])
                .mul(sqrt_fact[jmmp as usize]);
            let k_lo = 0.max((dm - dmp) / 2);
            let k_hi = jpm.min(jmmp);
            let mut sum = Dd::from(0.0);
            for k in k_lo..=k_hi {
                let p_cos = (dj - 2 * k + (dm - dmp) / 2) as usize; // 2j - 2k + m - m'
                let p_sin = (2 * k - (dm - dmp) / 2) as usize;
                let den = fact[(jpm - k) as usize]
                    .mul(fact[k as usize])
                    .mul(fact[(jmmp - k) as usize])
                    .mul(fact[(k - (dm - dmp) / 2) as usize]);
                let mut term = c_pow[p_cos].mul(s_pow[p_sin]).div(den);
                if (k + (dmp - dm) / 2).rem_euclid(2) == 1 {
                    term = term.neg();
                }
                sum = sum.add(term);
            }
            entries[(r, c)] = norm.mul(sum).to_f64();
        }
    }
    Ok(DMatrix { j, theta, entries })
}

fn dd_factorials() -> &'static [Dd] {
    static TABLE: OnceLock<Vec<Dd>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(ORACLE_MAX_DOUBLED as usize + 1);
        t.push(Dd::from(1.0));
        for k in 1..=ORACLE_MAX_DOUBLED as usize {
            let prev = t[k - 1];
            t.push(prev.mul(Dd::from(k as f64)));
        }
        t
    })
}

fn dd_sqrt_factorials() -> &'static [Dd] {
    static TABLE: OnceLock<Vec<Dd>> = OnceLock::new();
    TABLE.get_or_init(|| dd_factorials().iter().map(|f| f.sqrt()).collect())
}

/// Unevaluated double-double value `hi + lo`, enough precision to ride out
/// the oracle's term cancellation.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn neg(self) -> Self {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn add(self, other: Dd) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = fast_two_sum(s, e);
        Dd { hi, lo }
    }

    fn mul(self, other: Dd) -> Self {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = fast_two_sum(p, e);
        Dd { hi, lo }
    }

    fn div(self, other: Dd) -> Self {
        let q1 = self.hi / other.hi;
        let r = self.add(other.mul(Dd::from(q1)).neg());
        let q2 = r.to_f64() / other.hi;
        let (hi, lo) = fast_two_sum(q1, q2);
        Dd { hi, lo }
    }

    fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return Dd::from(0.0);
        }
        let q1 = self.hi.sqrt();
        // one Newton step: q1 + (self - q1^2) / (2 q1)
        let r = self.add(Dd::from(q1).mul(Dd::from(q1)).neg());
        let q2 = r.to_f64() / (2.0 * q1);
        let (hi, lo) = fast_two_sum(q1, q2);
        Dd { hi, lo }
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

fn split(a: f64) -> (f64, f64) {
    // Dekker split at 27 bits
    let t = 134217729.0 * a; // 2^27 + 1
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Diagonal of the z-rotation `exp(-i m' phi)`, ordered `m'` descending.
pub fn z_phase(j: Spin, phi: f64) -> Result<Vec<Complex64>> {
    if !phi.is_finite() {
        return Err(Error::Domain(format!("rotation angle phi = {phi} must be finite")));
    }
    Ok((0..j.dim())
        .map(|i| {
            let mp = j.m_at(i);
            Complex64::from_polar(1.0, -mp * phi)
        })
        .collect())
}
