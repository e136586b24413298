//! Closed-form adjustable regret for one-way trading.
//!
//! One divisible unit is sold over `T` periods; the price `p_t` in each
//! period lies in `[m, M]` and is revealed before the period's sale.  The
//! guarantee from history `h_t` is
//!
//! ```text
//! D_{t-1}(h_t; beta) = beta * max(pmax_t, P_{1+T-t}(q_t)) - (r_t + m q_t)
//! P_j(q) = (M - m) * max(0, 1 - q / (beta j))^j + m
//! ```
//!
//! and the optimal policy keeps `q_{t+1} = min(q_t, P_n^-1(pmax_{t+1}))`
//! with `n = T - t`, selling whatever is left in the last period.
//!
//! The threshold price is written `pbar_t = max(pmax_t, P_n(q_t))` in the
//! derivation, where `P_n(q_t)` is also the quantity the adversary case
//! analysis refers to.

mod grid;

pub use grid::OnewayGrid;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{CurveSample, RegretCurve};
use crate::error::{Error, Result};

/// Tolerance used when checking realized regret against the guarantee.
pub const GUARANTEE_TOLERANCE: f64 = 1e-9;

/// Price band `[m, M]` and horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketSpec {
    min_price: f64,
    max_price: f64,
    periods: usize,
}

impl MarketSpec {
    pub fn new(min_price: f64, max_price: f64, periods: usize) -> Result<Self> {
        if !(min_price.is_finite() && max_price.is_finite()) {
            return Err(Error::input("price bounds must be finite"));
        }
        if min_price <= 0.0 {
            return Err(Error::input(format!("price floor m = {min_price} must be positive")));
        }
        if max_price < min_price {
            return Err(Error::input(format!("price cap M = {max_price} is below the floor m = {min_price}")));
        }
        if periods == 0 {
            return Err(Error::input("at least one trading period is required"));
        }
        Ok(MarketSpec {
            min_price,
            max_price,
            periods,
        })
    }

    /// `m`
    pub fn min_price(&self) -> f64 {
        self.min_price
    }

    /// `M`
    pub fn max_price(&self) -> f64 {
        self.max_price
    }

    /// `T`
    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn spread(&self) -> f64 {
        self.max_price - self.min_price
    }

    pub fn is_degenerate(&self) -> bool {
        self.max_price == self.min_price
    }

    pub fn contains(&self, price: f64) -> bool {
        price >= self.min_price && price <= self.max_price
    }

    fn check_price(&self, price: f64) -> Result<()> {
        if self.contains(price) {
            Ok(())
        } else {
            Err(Error::input(format!(
                "price {price} outside [{}, {}]",
                self.min_price, self.max_price
            )))
        }
    }
}

/// `(t, q_t, r_t, pmax_t)` at the start of period `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradingState {
    /// 1-based period; `T + 1` once trading is over.
    pub period: usize,
    pub remaining: f64,
    pub revenue: f64,
    pub max_price: f64,
}

impl TradingState {
    /// `q_1 = 1`, `r_1 = 0`, `pmax_1 = m`.
    pub fn initial(spec: &MarketSpec) -> Self {
        TradingState {
            period: 1,
            remaining: 1.0,
            revenue: 0.0,
            max_price: spec.min_price,
        }
    }

    /// `R_t = r_t + m q_t`, the revenue floor given the history.
    pub fn revenue_floor(&self, spec: &MarketSpec) -> f64 {
        self.revenue + spec.min_price * self.remaining
    }

    pub fn is_final(&self, spec: &MarketSpec) -> bool {
        self.period > spec.periods
    }

    pub fn validate(&self, spec: &MarketSpec) -> Result<()> {
        if self.period == 0 || self.period > spec.periods + 1 {
            return Err(Error::input(format!(
                "period {} outside 1..={}",
                self.period,
                spec.periods + 1
            )));
        }
        if !(0.0..=1.0).contains(&self.remaining) {
            return Err(Error::input(format!("remaining quantity {} outside [0, 1]", self.remaining)));
        }
        if !spec.contains(self.max_price) {
            return Err(Error::input(format!("running max price {} outside the band", self.max_price)));
        }
        let cap = self.max_price * (1.0 - self.remaining);
        if !(self.revenue >= 0.0 && self.revenue <= cap + 1e-9 * cap.max(1.0)) {
            return Err(Error::input(format!(
                "accrued revenue {} inconsistent with selling {} at prices up to {}",
                self.revenue,
                1.0 - self.remaining,
                self.max_price
            )));
        }
        Ok(())
    }
}

fn check_positive_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "closed-form one-way results need beta > 0, got {beta}"
        )))
    }
}

fn aux(spec: &MarketSpec, j: usize, q: f64, beta: f64) -> f64 {
    let base = (1.0 - q / (beta * j as f64)).max(0.0);
    spec.spread() * base.powi(j as i32) + spec.min_price
}

fn aux_inverse(spec: &MarketSpec, n: usize, price: f64, beta: f64) -> f64 {
    if spec.is_degenerate() {
        return 0.0;
    }
    let level = ((price - spec.min_price) / spec.spread()).clamp(0.0, 1.0);
    let q = beta * n as f64 * (1.0 - level.powf(1.0 / n as f64));
    q.clamp(0.0, beta * n as f64)
}

/// Auxiliary threshold price `P_j(q)`.
pub fn aux_price(j: usize, q: f64, beta: f64, spec: &MarketSpec) -> Result<f64> {
    check_positive_beta(beta)?;
    if j == 0 {
        return Err(Error::input("auxiliary price index must be positive"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::input(format!("quantity {q} outside [0, 1]")));
    }
    Ok(aux(spec, j, q, beta))
}

/// `P_n^-1(y)` on `q in [0, beta n]`; `0` for a degenerate band.
pub fn aux_price_inverse(n: usize, price: f64, beta: f64, spec: &MarketSpec) -> Result<f64> {
    check_positive_beta(beta)?;
    if n == 0 {
        return Err(Error::input("auxiliary price index must be positive"));
    }
    spec.check_price(price)?;
    Ok(aux_inverse(spec, n, price, beta))
}

/// `D_{t-1}(h_t; beta)` for a state at the start of period `t <= T`.
pub fn stage_guarantee(state: &TradingState, beta: f64, spec: &MarketSpec) -> Result<f64> {
    check_positive_beta(beta)?;
    state.validate(spec)?;
    if state.is_final(spec) {
        return Err(Error::input("no guarantee after the last period; use the terminal regret"));
    }
    let n = 1 + spec.periods - state.period;
    let threshold = state.max_price.max(aux(spec, n, state.remaining, beta));
    Ok(beta * threshold - state.revenue_floor(spec))
}

/// One period of the optimal policy: returns the amount sold at `price`
/// and the next state.
pub fn policy_step(state: &TradingState, price: f64, beta: f64, spec: &MarketSpec) -> Result<(f64, TradingState)> {
    check_positive_beta(beta)?;
    state.validate(spec)?;
    if state.is_final(spec) {
        return Err(Error::input("trading is already over"));
    }
    spec.check_price(price)?;
    let max_price = state.max_price.max(price);
    let keep = if state.period == spec.periods {
        0.0
    } else if spec.is_degenerate() {
        // Every price is m; hold until the forced final sale.
        state.remaining
    } else {
        let n = spec.periods - state.period;
        state.remaining.min(aux_inverse(spec, n, max_price, beta))
    };
    let sold = state.remaining - keep;
    let next = TradingState {
        period: state.period + 1,
        remaining: keep,
        revenue: state.revenue + price * sold,
        max_price,
    };
    Ok((sold, next))
}

/// `D(beta) = beta (M - m) max(0, 1 - 1/(beta T))^T - (1 - beta) m`,
/// with `D(0) = -m`.
pub fn overall_guarantee(beta: f64, spec: &MarketSpec) -> Result<f64> {
    crate::solve::check_beta(beta)?;
    if beta == 0.0 {
        return Ok(-spec.min_price);
    }
    let t = spec.periods;
    let base = (1.0 - 1.0 / (beta * t as f64)).max(0.0);
    Ok(beta * spec.spread() * base.powi(t as i32) - (1.0 - beta) * spec.min_price)
}

/// The closed-form curve sampled at `betas`.
pub fn guarantee_curve(spec: &MarketSpec, betas: &[f64]) -> Result<RegretCurve> {
    let samples = betas
        .iter()
        .map(|&beta| {
            Ok(CurveSample {
                beta,
                value: overall_guarantee(beta, spec)?,
                policy_id: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RegretCurve::new(
        format!("oneway m={} M={} T={}", spec.min_price, spec.max_price, spec.periods),
        samples,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub period: usize,
    pub price: f64,
    pub sold: f64,
    pub remaining: f64,
    /// Revenue accrued through this period.
    pub revenue: f64,
    /// Highest price seen through this period.
    pub max_price: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub revenue: f64,
    pub regret: f64,
    pub guarantee: f64,
    pub within_guarantee: bool,
    pub trace: Vec<TraceRow>,
}

fn replay(path: &[f64], beta: f64, spec: &MarketSpec, from: TradingState) -> Result<(TradingState, Vec<TraceRow>)> {
    let mut state = from;
    let mut trace = Vec::with_capacity(path.len());
    for (i, &price) in path.iter().enumerate() {
        let (sold, next) = policy_step(&state, price, beta, spec).map_err(|e| match e {
            Error::Input(msg) => Error::input(format!("period {}: {msg}", state.period.max(i + 1))),
            other => other,
        })?;
        trace.push(TraceRow {
            period: state.period,
            price,
            sold,
            remaining: next.remaining,
            revenue: next.revenue,
            max_price: next.max_price,
        });
        state = next;
    }
    Ok((state, trace))
}

/// Replays the optimal policy over a full price path.
pub fn simulate(path: &[f64], beta: f64, spec: &MarketSpec) -> Result<Simulation> {
    if path.len() != spec.periods {
        return Err(Error::input(format!(
            "price path has {} prices, expected {}",
            path.len(),
            spec.periods
        )));
    }
    if let Some(i) = path.iter().position(|p| !spec.contains(*p)) {
        return Err(Error::input(format!(
            "price {} in period {} outside [{}, {}]",
            path[i],
            i + 1,
            spec.min_price,
            spec.max_price
        )));
    }
    let (end, trace) = replay(path, beta, spec, TradingState::initial(spec))?;
    let regret = beta * end.max_price - end.revenue;
    let guarantee = overall_guarantee(beta, spec)?;
    Ok(Simulation {
        revenue: end.revenue,
        regret,
        guarantee,
        within_guarantee: regret <= guarantee + GUARANTEE_TOLERANCE,
        trace,
    })
}

/// Realized regret `beta * pmax - revenue` of replaying `path` from `from`.
pub fn realized_regret(path: &[f64], beta: f64, spec: &MarketSpec, from: &TradingState) -> Result<f64> {
    if from.period + path.len() != spec.periods + 1 {
        return Err(Error::input(format!(
            "path of {} prices does not finish the horizon from period {}",
            path.len(),
            from.period
        )));
    }
    let (end, _) = replay(path, beta, spec, *from)?;
    Ok(beta * end.max_price - end.revenue)
}

/// Equalizing adversary: a price path for periods `from.period..=T` on
/// which the optimal policy realizes exactly `stage_guarantee(from)`.
///
/// Each period the adversary either plays the floor `m` or raises the
/// price to `P_n(z*)` with `z* = n q_t / (n + 1)`, whichever leaves the
/// larger continuation guarantee; in the last period it picks an endpoint
/// of the band.
pub fn worst_case_path(beta: f64, spec: &MarketSpec, from: &TradingState) -> Result<Vec<f64>> {
    check_positive_beta(beta)?;
    from.validate(spec)?;
    let mut state = *from;
    let mut path = Vec::with_capacity(spec.periods + 1 - from.period);
    while !state.is_final(spec) {
        let candidates = if state.period == spec.periods {
            [spec.min_price, spec.max_price]
        } else {
            let n = spec.periods - state.period;
            let z = n as f64 * state.remaining / (n as f64 + 1.0);
            [spec.min_price, aux(spec, n, z, beta)]
        };
        let mut best: Option<(f64, f64, TradingState)> = None;
        for price in candidates {
            let (_, next) = policy_step(&state, price, beta, spec)?;
            let value = if next.is_final(spec) {
                beta * next.max_price - next.revenue
            } else {
                stage_guarantee(&next, beta, spec)?
            };
            if best.is_none_or(|(v, _, _)| value > v) {
                best = Some((value, price, next));
            }
        }
        let (_, price, next) = best.expect("two candidates");
        path.push(price);
        state = next;
    }
    Ok(path)
}

/// `count` paths of i.i.d. uniform prices in `[m, M]` from a seeded ChaCha8 stream.
pub fn random_paths(spec: &MarketSpec, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..spec.periods)
                .map(|_| {
                    if spec.is_degenerate() {
                        spec.min_price
                    } else {
                        rng.random_range(spec.min_price..=spec.max_price)
                    }
                })
                .collect()
        })
        .collect()
}
