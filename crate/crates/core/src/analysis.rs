//! Quantum-classical difference measures and the fits used to extract
//! growth rates, break-times and scaling laws from them.
//!
//! All fits reduce to linear regression in transformed variables: `ln y`
//! against time for exponential growth, `t_b` against `ln(8 p l)` for the
//! break-time law, `R` against `1/sqrt(N)` for equilibrium scaling.

use crate::quantum::Distribution;
use crate::{Error, Result};

/// Real-valued series sampled at integer kick counts.
#[derive(Clone, Debug, Default)]
pub struct TimeSeries {
    t: Vec<i64>,
    y: Vec<f64>,
}

impl TimeSeries {
    pub fn new(t: Vec<i64>, y: Vec<f64>) -> Result<Self> {
        if t.len() != y.len() {
            return Err(Error::Dimension(format!(
                "{} time points vs {} values",
                t.len(),
                y.len()
            )));
        }
        if t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("kick indices must strictly increase".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("series values must be finite".into()));
        }
        Ok(Self { t, y })
    }

    /// Series starting at kick 0 with unit stride.
    pub fn from_values(y: Vec<f64>) -> Result<Self> {
        let t = (0..y.len() as i64).collect();
        Self::new(t, y)
    }

    pub fn t(&self) -> &[i64] {
        &self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Per-period running maximum: the upper envelope of an oscillating
    /// series, one point per period at the position of its maximum.
    pub fn envelope(&self, period: usize) -> TimeSeries {
        let period = period.max(1);
        let mut t = Vec::new();
        let mut y = Vec::new();
        for chunk_start in (0..self.len()).step_by(period) {
            let end = (chunk_start + period).min(self.len());
            let (mut bt, mut by) = (self.t[chunk_start], self.y[chunk_start]);
            for k in chunk_start..end {
                if self.y[k] > by {
                    by = self.y[k];
                    bt = self.t[k];
                }
            }
            t.push(bt);
            y.push(by);
        }
        TimeSeries { t, y }
    }
}

/// Result of a least-squares fit.
#[derive(Clone, Debug)]
pub struct FitResult {
    /// Named fitted parameters.
    pub params: Vec<(String, f64)>,
    /// One-sigma uncertainty per parameter, same order.
    pub stderr: Vec<f64>,
    /// Residual sum of squares divided by the degrees of freedom.
    pub reduced_chi2: f64,
    /// Index range of the input actually used.
    pub window: (usize, usize),
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    pub fn stderr_of(&self, name: &str) -> Option<f64> {
        self.params
            .iter()
            .position(|(n, _)| n == name)
            .map(|i| self.stderr[i])
    }
}

/// `|q - c|` pointwise; both series must share the same kick grid.
pub fn delta_series(q: &TimeSeries, c: &TimeSeries) -> Result<TimeSeries> {
    if q.t != c.t {
        return Err(Error::Dimension(
            "series sampled on different kick grids".into(),
        ));
    }
    let y = q.y.iter().zip(&c.y).map(|(a, b)| (a - b).abs()).collect();
    TimeSeries::new(q.t.clone(), y)
}

/// Per-bin RMS difference between two distributions over the same labels:
/// `sqrt((1/K) sum (P - P_c)^2)`.
pub fn sigma_dist(q: &Distribution, c: &Distribution) -> Result<f64> {
    if q.len() != c.len() {
        return Err(Error::Dimension(format!(
            "{} bins vs {} bins",
            q.len(),
            c.len()
        )));
    }
    let k = q.len() as f64;
    let ss: f64 = q
        .probs()
        .iter()
        .zip(c.probs())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((ss / k).sqrt())
}

/// Scale-independent fluctuation measure `R = N sigma`, the RMS difference
/// relative to the mean bin height `1/N`.
pub fn relative_r(sigma: f64, n_labels: usize) -> f64 {
    n_labels as f64 * sigma
}

/// First kick index at which the series strictly exceeds `tolerance`.
/// Values equal to the tolerance do not count as a break.
pub fn break_time(series: &TimeSeries, tolerance: f64) -> Option<i64> {
    series
        .t
        .iter()
        .zip(&series.y)
        .find(|(_, &y)| y > tolerance)
        .map(|(&t, _)| t)
}

fn regression_through_origin(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let slope = sxy / sxx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - slope * a) * (b - slope * a))
        .sum();
    let dof = (x.len() as f64 - 1.0).max(1.0);
    let var = ssr / dof / sxx;
    (slope, var.sqrt(), ssr / dof)
}

fn regression_with_intercept(x: &[f64], y: &[f64]) -> ((f64, f64), (f64, f64), f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - slope * a - intercept;
            r * r
        })
        .sum();
    let dof = (n - 2.0).max(1.0);
    let s2 = ssr / dof;
    let slope_err = (s2 / sxx).sqrt();
    let intercept_err = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();
    ((slope, slope_err), (intercept, intercept_err), s2)
}

/// Fits the break-time law `t_b = (1/lambda_qc) ln(8 p l)` by regression
/// through the origin of `t_b` against `ln(8 p l)`.
pub fn fit_break_law(l_values: &[f64], t_b: &[f64], p: f64) -> Result<FitResult> {
    if l_values.len() != t_b.len() || l_values.len() < 2 {
        return Err(Error::Dimension(
            "break-time fit needs matching arrays of at least 2 points".into(),
        ));
    }
    let x: Vec<f64> = l_values.iter().map(|l| (8.0 * p * l).ln()).collect();
    let (slope, slope_err, chi2) = regression_through_origin(&x, t_b);
    let lambda = 1.0 / slope;
    let lambda_err = slope_err / (slope * slope);
    Ok(FitResult {
        params: vec![("lambda_qc".into(), lambda), ("slope".into(), slope)],
        stderr: vec![lambda_err, slope_err],
        reduced_chi2: chi2,
        window: (0, l_values.len() - 1),
    })
}

/// Fits `y = A exp(rate * t)` over the kick window `[t_lo, t_hi]` by
/// linear regression of `ln y`. Non-positive samples inside the window
/// are skipped.
pub fn fit_exponential(series: &TimeSeries, t_lo: i64, t_hi: i64) -> Result<FitResult> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut lo_idx = usize::MAX;
    let mut hi_idx = 0;
    for (i, (&t, &v)) in series.t.iter().zip(&series.y).enumerate() {
        if t >= t_lo && t <= t_hi && v > 0.0 {
            x.push(t as f64);
            y.push(v.ln());
            lo_idx = lo_idx.min(i);
            hi_idx = hi_idx.max(i);
        }
    }
    if x.len() < 2 {
        return Err(Error::Domain(format!(
            "exponential fit window [{t_lo}, {t_hi}] holds fewer than 2 positive points"
        )));
    }
    let ((slope, slope_err), (intercept, intercept_err), chi2) =
        regression_with_intercept(&x, &y);
    Ok(FitResult {
        params: vec![
            ("rate".into(), slope),
            ("amplitude".into(), intercept.exp()),
        ],
        stderr: vec![slope_err, intercept.exp() * intercept_err],
        reduced_chi2: chi2,
        window: (lo_idx, hi_idx),
    })
}

/// Fits `y = amplitude * exp(rate * t)` with the amplitude held fixed:
/// one-parameter least squares of `ln y - ln(amplitude)` against `t`
/// through the origin. This is the growth-ansatz form whose prefactor is
/// set by the initial state, e.g. `1/l` for the coherent-state variance.
pub fn fit_exponential_pinned(
    series: &TimeSeries,
    t_lo: i64,
    t_hi: i64,
    amplitude: f64,
) -> Result<FitResult> {
    if amplitude <= 0.0 {
        return Err(Error::Domain("pinned amplitude must be positive".into()));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut lo_idx = usize::MAX;
    let mut hi_idx = 0;
    for (i, (&t, &v)) in series.t.iter().zip(&series.y).enumerate() {
        if t >= t_lo && t <= t_hi && v > 0.0 {
            x.push(t as f64);
            y.push(v.ln() - amplitude.ln());
            lo_idx = lo_idx.min(i);
            hi_idx = hi_idx.max(i);
        }
    }
    if x.len() < 2 {
        return Err(Error::Domain(format!(
            "pinned exponential fit window [{t_lo}, {t_hi}] holds fewer than 2 positive points"
        )));
    }
    let (slope, slope_err, chi2) = regression_through_origin(&x, &y);
    Ok(FitResult {
        params: vec![("rate".into(), slope), ("amplitude".into(), amplitude)],
        stderr: vec![slope_err, 0.0],
        reduced_chi2: chi2,
        window: (lo_idx, hi_idx),
    })
}

/// Estimated saturation time `t_sat = ln(l) / (2 lambda_w)` at which an
/// initially coherent state's variance reaches the system size.
pub fn saturation_time(l: f64, lambda_w: f64) -> f64 {
    l.ln() / (2.0 * lambda_w)
}

/// Two fits of equilibrium fluctuation data against system size: the
/// two-parameter law `R = A/sqrt(N) + B` and the one-parameter law
/// `R = C/sqrt(N)`.
#[derive(Clone, Debug)]
pub struct ScalingFit {
    pub two_param: FitResult,
    pub one_param: FitResult,
}

/// Fits `R = A/sqrt(N) + B` and `R = C/sqrt(N)` to fluctuation samples.
pub fn fit_scaling(n_values: &[f64], r_values: &[f64]) -> Result<ScalingFit> {
    if n_values.len() != r_values.len() || n_values.len() < 3 {
        return Err(Error::Dimension(
            "scaling fit needs matching arrays of at least 3 points".into(),
        ));
    }
    let x: Vec<f64> = n_values.iter().map(|n| 1.0 / n.sqrt()).collect();
    let ((a, a_err), (b, b_err), chi2) = regression_with_intercept(&x, r_values);
    let window = (0, n_values.len() - 1);
    let two_param = FitResult {
        params: vec![("A".into(), a), ("B".into(), b)],
        stderr: vec![a_err, b_err],
        reduced_chi2: chi2,
        window,
    };
    let (c, c_err, c_chi2) = regression_through_origin(&x, r_values);
    let one_param = FitResult {
        params: vec![("C".into(), c)],
        stderr: vec![c_err],
        reduced_chi2: c_chi2,
        window,
    };
    Ok(ScalingFit { two_param, one_param })
}

/// Magnitude of the gap between a quantum expectation series and the
/// matching single-trajectory series: `|<L_i(t)> - L_i(t)|`.
pub fn ehrenfest_diff(q: &TimeSeries, traj: &TimeSeries) -> Result<TimeSeries> {
    delta_series(q, traj)
}

/// Violation of the classical quadratic invariant:
/// `|l^2 - <L>^2|` per kick, from a series of `<L>` 3-vectors.
pub fn invariant_violation(q_vectors: &[[f64; 3]], l: f64) -> Result<TimeSeries> {
    let y = q_vectors
        .iter()
        .map(|v| {
            let mag2: f64 = v.iter().map(|x| x * x).sum();
            (l * l - mag2).abs()
        })
        .collect();
    TimeSeries::from_values(y)
}

/// First kick at which the invariant violation exceeds the fraction `f`
/// of the squared classical magnitude `l^2`.
pub fn ehrenfest_break_time(series: &TimeSeries, f: f64, l: f64) -> Option<i64> {
    break_time(series, f * l * l)
}

/// Fits the Ehrenfest break-time law `t = ln(f l) / (2 lambda)` by
/// regression through the origin, returning `lambda`.
pub fn fit_ehrenfest_law(l_values: &[f64], times: &[f64], f: f64) -> Result<FitResult> {
    if l_values.len() != times.len() || l_values.len() < 2 {
        return Err(Error::Dimension(
            "Ehrenfest fit needs matching arrays of at least 2 points".into(),
        ));
    }
    let x: Vec<f64> = l_values.iter().map(|l| (f * l).ln()).collect();
    let (slope, slope_err, chi2) = regression_through_origin(&x, times);
    let lambda = 1.0 / (2.0 * slope);
    let lambda_err = slope_err / (2.0 * slope * slope);
    Ok(FitResult {
        params: vec![("lambda".into(), lambda), ("slope".into(), slope)],
        stderr: vec![lambda_err, slope_err],
        reduced_chi2: chi2,
        window: (0, l_values.len() - 1),
    })
}
