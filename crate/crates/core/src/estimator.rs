//! Certified concurrence lower bounds from a measured mean `V_m` and a copy
//! budget `(N, K, r)`, and the sweeps, scans and frontiers built on them.
//!
//! Of `N` generated copies, `K` are discarded and `n = N - K` are measured in
//! random pairs. The retained copies are tentatively assigned the form
//! `rho0^(n-r) (x) rho_r`: `n - r` identical independent good copies and `r`
//! arbitrarily correlated bad ones. The assignment error is bounded by
//! `E = 3 K^4 exp(-K (r + 1) / N)`.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("invalid protocol parameters: {0}")]
    InvalidParams(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("no points to search")]
    EmptyPoints,
}

pub type Result<T> = std::result::Result<T, EstimatorError>;

/// Copy budget: `total` generated (`N`), `discarded` (`K`), `retained` (`n`), `bad` (`r`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProtocolParams {
    #[serde(rename = "N")]
    pub total: u64,
    #[serde(rename = "K")]
    pub discarded: u64,
    #[serde(rename = "n")]
    pub retained: u64,
    #[serde(rename = "r")]
    pub bad: u64,
}

impl ProtocolParams {
    /// Requires `N >= 4`, `1 <= K <= N - 2` and `r <= n - 2`.
    pub fn new(total: u64, discarded: u64, bad: u64) -> Result<Self> {
        if total < 4 {
            return Err(EstimatorError::InvalidParams(format!("N = {total} < 4")));
        }
        if discarded < 1 || discarded > total - 2 {
            return Err(EstimatorError::InvalidParams(format!(
                "K = {discarded} outside [1, {}]",
                total - 2
            )));
        }
        let retained = total - discarded;
        if bad > retained - 2 {
            return Err(EstimatorError::InvalidParams(format!(
                "r = {bad} outside [0, {}]",
                retained - 2
            )));
        }
        Ok(Self {
            total,
            discarded,
            retained,
            bad,
        })
    }
}

/// `E = 3 K^4 exp(-K (r + 1) / N)`. Not clamped; it can exceed one.
pub fn error_bound(params: &ProtocolParams) -> f64 {
    let k = params.discarded as f64;
    3.0 * k.powi(4) * (-k * (params.bad as f64 + 1.0) / params.total as f64).exp()
}

/// `log10(E)` evaluated in log space, finite even where `E` underflows.
pub fn log10_error_bound(params: &ProtocolParams) -> f64 {
    let k = params.discarded as f64;
    3f64.log10() + 4.0 * k.log10()
        - k * (params.bad as f64 + 1.0) / params.total as f64 / std::f64::consts::LN_10
}

/// Worst-case mean outcome on a pair of bad copies: `(5 - r/2)/(r - 1)` for
/// `2 <= r <= 10` (bad copies arranged in counterexample blocks), zero above.
/// Fewer than two bad copies cannot form a bad pair, so `r < 2` gives zero.
pub fn bad_pair_value(r: u64) -> f64 {
    match r {
        2..=10 => (5.0 - r as f64 / 2.0) / (r as f64 - 1.0),
        _ => 0.0,
    }
}

/// Probabilities that a random pair of the `n` retained copies is bad-bad
/// (`r(r-1)/n(n-1)`) and good-good (`(n-r)(n-r-1)/n(n-1)`).
pub fn pair_probabilities(n: u64, r: u64) -> Result<(f64, f64)> {
    if n < 2 || r > n {
        return Err(EstimatorError::OutOfRange(format!("n = {n}, r = {r}")));
    }
    let pairs = (n * (n - 1)) as f64;
    let bb = (r * r.saturating_sub(1)) as f64;
    let good = n - r;
    let gg = (good * good.saturating_sub(1)) as f64;
    Ok((bb / pairs, gg / pairs))
}

/// How the squared-concurrence bound `C_min` becomes the average-concurrence bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    /// `C_bar = ((n - r)/n) sqrt(C_min)`; tends to `sqrt(V_m)`.
    #[default]
    SquareRoot,
    /// `C_bar = ((n - r)/n) C_min`, the form printed alongside the derivation.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateReport {
    #[serde(flatten)]
    pub params: ProtocolParams,
    #[serde(rename = "V_m")]
    pub v_m: f64,
    #[serde(rename = "P_bb")]
    pub p_bb: f64,
    #[serde(rename = "P_n")]
    pub p_n: f64,
    #[serde(rename = "V_b")]
    pub v_b: f64,
    #[serde(rename = "C_min")]
    pub c_min: f64,
    #[serde(rename = "C_bar")]
    pub c_bar: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "log10_E")]
    pub log10_e: f64,
    pub form: BoundForm,
}

pub fn concurrence_lower_bound(v_m: f64, params: &ProtocolParams) -> Result<EstimateReport> {
    concurrence_lower_bound_with(v_m, params, BoundForm::SquareRoot)
}

pub fn concurrence_lower_bound_with(
    v_m: f64,
    params: &ProtocolParams,
    form: BoundForm,
) -> Result<EstimateReport> {
    if !(-4.0..=4.0).contains(&v_m) {
        return Err(EstimatorError::OutOfRange(format!(
            "V_m = {v_m} outside [-4, 4]"
        )));
    }
    let n = params.retained;
    let r = params.bad;
    let (p_bb, p_n) = pair_probabilities(n, r)?;
    let v_b = bad_pair_value(r);
    // p_n > 0 because r <= n - 2
    let c_min = ((v_m - p_bb * v_b) / p_n).clamp(0.0, 1.0);
    let good_fraction = (n - r) as f64 / n as f64;
    let c_bar = match form {
        BoundForm::SquareRoot => good_fraction * c_min.sqrt(),
        BoundForm::Literal => good_fraction * c_min,
    };
    Ok(EstimateReport {
        params: *params,
        v_m,
        p_bb,
        p_n,
        v_b,
        c_min,
        c_bar,
        e: error_bound(params),
        log10_e: log10_error_bound(params),
        form,
    })
}

/// Exponents of the budget rule `K = N^beta`, `r = (N - K)^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentChoice {
    pub alpha: f64,
    pub beta: f64,
}

impl ExponentChoice {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(EstimatorError::OutOfRange(format!(
                    "{name} = {v} outside (0, 1]"
                )));
            }
        }
        Ok(Self { alpha, beta })
    }
}

fn round_half_up(x: f64) -> u64 {
    (x + 0.5).floor() as u64
}

/// `K = round(N^beta)` clamped to `[1, N-2]`, then `r = round(n^alpha)` clamped to `[0, n-2]`.
pub fn params_from_exponents(total: u64, choice: ExponentChoice) -> Result<ProtocolParams> {
    if total < 4 {
        return Err(EstimatorError::InvalidParams(format!("N = {total} < 4")));
    }
    let k = round_half_up((total as f64).powf(choice.beta)).clamp(1, total - 2);
    let n = total - k;
    let r = round_half_up((n as f64).powf(choice.alpha)).min(n - 2);
    ProtocolParams::new(total, k, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    #[serde(rename = "N")]
    pub total: u64,
    #[serde(rename = "K")]
    pub discarded: u64,
    pub r: u64,
    #[serde(rename = "C_bar")]
    pub c_bar: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "log10_E")]
    pub log10_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub choice: ExponentChoice,
    pub points: Vec<SweepPoint>,
}

/// `E(N)` and `C_bar(N)` along `n_grid` for each exponent choice.
pub fn sweep_fig1(choices: &[ExponentChoice], v_m: f64, n_grid: &[u64]) -> Result<Vec<SweepCurve>> {
    choices
        .iter()
        .map(|&choice| {
            let points = n_grid
                .iter()
                .map(|&total| {
                    let params = params_from_exponents(total, choice)?;
                    let rep = concurrence_lower_bound(v_m, &params)?;
                    Ok(SweepPoint {
                        total,
                        discarded: params.discarded,
                        r: params.bad,
                        c_bar: rep.c_bar,
                        e: rep.e,
                        log10_e: rep.log10_e,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepCurve { choice, points })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterPoint {
    #[serde(rename = "K")]
    pub discarded: u64,
    pub r: u64,
    #[serde(rename = "C_bar")]
    pub c_bar: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "log10_E")]
    pub log10_e: f64,
}

/// One point per valid `(K, r)` at fixed `N`, ordered by `K` then `r`.
pub fn scatter_all(total: u64, v_m: f64) -> Result<Vec<ScatterPoint>> {
    if total < 4 {
        return Err(EstimatorError::InvalidParams(format!("N = {total} < 4")));
    }
    let mut points = Vec::new();
    for k in 1..=total - 2 {
        for r in 0..=total - k - 2 {
            let params = ProtocolParams::new(total, k, r)?;
            let rep = concurrence_lower_bound(v_m, &params)?;
            points.push(ScatterPoint {
                discarded: k,
                r,
                c_bar: rep.c_bar,
                e: rep.e,
                log10_e: rep.log10_e,
            });
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoResult {
    pub e_max: f64,
    /// Highest `C_bar` with `E <= e_max`; `None` when nothing is feasible.
    pub best: Option<ScatterPoint>,
    /// Feasible non-dominated points, ascending in both `E` and `C_bar`.
    pub frontier: Vec<ScatterPoint>,
}

/// Best feasible point under `E <= e_max` and the feasible tradeoff frontier.
///
/// Ties on `C_bar` go to smaller `E`, then smaller `r`, then smaller `K`.
pub fn pareto_frontier(points: &[ScatterPoint], e_max: f64) -> Result<ParetoResult> {
    if points.is_empty() {
        return Err(EstimatorError::EmptyPoints);
    }
    let mut feasible: Vec<ScatterPoint> = points.iter().copied().filter(|p| p.e <= e_max).collect();
    let best = feasible.iter().copied().reduce(|a, b| {
        let key = |p: &ScatterPoint| (p.c_bar, -p.e);
        match key(&b).partial_cmp(&key(&a)) {
            Some(std::cmp::Ordering::Greater) => b,
            Some(std::cmp::Ordering::Equal) if (b.r, b.discarded) < (a.r, a.discarded) => b,
            _ => a,
        }
    });
    feasible.sort_by(|a, b| {
        a.e.total_cmp(&b.e)
            .then(b.c_bar.total_cmp(&a.c_bar))
            .then((a.r, a.discarded).cmp(&(b.r, b.discarded)))
    });
    let mut frontier: Vec<ScatterPoint> = Vec::new();
    for p in feasible {
        if frontier.last().is_none_or(|last| p.c_bar > last.c_bar) {
            frontier.push(p);
        }
    }
    Ok(ParetoResult {
        e_max,
        best,
        frontier,
    })
}
