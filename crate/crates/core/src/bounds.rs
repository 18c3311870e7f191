//! Value-function bounds for the beam-alignment MDP and an exact quadrature oracle.
//!
//! For a slot `k < L` the Q-function `q_k(m, a)` is sandwiched between
//! `q_lb` and `q_ub`, both maximized at the second-best arm. The exact
//! `q_k` is only computable for tiny instances; [`dp_exact_q`] evaluates
//! the backward recursion by composite Gauss–Legendre quadrature and is
//! meant as a test oracle.

use serde::{Deserialize, Serialize};

use crate::channel::Nu;
use crate::error::{Error, Result};
use crate::policy::top_two;
use crate::preference::{j_transform, log_sum_exp, PreferenceVector};
use crate::quadrature::GaussLegendre;

pub const MAX_ORACLE_ARMS: usize = 4;
pub const MAX_ORACLE_DEPTH: usize = 4;
/// Node doubling may move the oracle by at most this much.
pub const ORACLE_CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonContext {
    /// Number of beam-alignment slots `L`.
    pub horizon: usize,
    /// Current slot `k` in `0..=L`.
    pub slot: usize,
    pub nu: Nu,
}

impl HorizonContext {
    pub fn new(horizon: usize, slot: usize, nu: Nu) -> Result<Self> {
        if slot > horizon {
            return Err(Error::InvalidHorizon(format!(
                "slot {slot} exceeds horizon {horizon}"
            )));
        }
        Ok(HorizonContext { horizon, slot, nu })
    }

    /// Slots left in the beam-alignment phase, `L - k`.
    pub fn remaining(&self) -> usize {
        self.horizon - self.slot
    }

    fn require_alignment_slot(&self) -> Result<()> {
        if self.slot < self.horizon {
            Ok(())
        } else {
            Err(Error::NotAlignmentSlot {
                k: self.slot,
                horizon: self.horizon,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
}

/// `h(nu) = nu^{nu/(1-nu)} - nu^{1/(1-nu)}`.
pub fn h_nu(nu: Nu) -> f64 {
    let (v, ln) = (nu.get(), nu.ln());
    (v * ln / (1.0 - v)).exp() - (ln / (1.0 - v)).exp()
}

/// `g(nu) = nu^{1/(1-nu)} (1/(1+nu) - ln nu / (1-nu))`.
pub fn g_nu(nu: Nu) -> f64 {
    let (v, ln) = (nu.get(), nu.ln());
    (ln / (1.0 - v)).exp() * (1.0 / (1.0 + v) - ln / (1.0 - v))
}

fn max_excluding(values: &[f64], arm: usize) -> f64 {
    values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != arm)
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn check_arm(m: &PreferenceVector, arm: usize) -> Result<()> {
    if m.len() < 2 {
        return Err(Error::TooFewArms {
            required: 2,
            got: m.len(),
        });
    }
    m.check_arm(arm)
}

/// `ln xi(arm; m)`.
pub fn ln_xi(arm: usize, m: &PreferenceVector, nu: Nu) -> Result<f64> {
    check_arm(m, arm)?;
    let values = m.as_slice();
    let rival = max_excluding(values, arm);
    let own = values[arm];
    if rival - own < nu.ln() {
        Ok(own)
    } else {
        let v = nu.get();
        Ok(log_add_exp(
            rival,
            h_nu(nu).ln() + (own - v * rival) / (1.0 - v),
        ))
    }
}

/// One-step lookahead integral `xi(arm; m)`.
///
/// Equals `exp(m[a])` when `a` already dominates every rival by more than
/// `-ln nu`, and `exp(M) + h(nu) exp((m[a] - nu M)/(1 - nu))` otherwise, with `M`
/// the largest rival preference.
pub fn xi(arm: usize, m: &PreferenceVector, nu: Nu) -> Result<f64> {
    ln_xi(arm, m, nu).map(f64::exp)
}

/// `(x_[2], ln max_a xi(a; m))`.
pub fn ln_xi_max(m: &PreferenceVector, nu: Nu) -> Result<(usize, f64)> {
    let (first, second) = top_two(m.as_slice());
    let second = second.ok_or(Error::TooFewArms {
        required: 2,
        got: m.len(),
    })?;
    let v = nu.get();
    let ln = log_add_exp(
        m[first],
        h_nu(nu).ln() + (m[second] - v * m[first]) / (1.0 - v),
    );
    Ok((second, ln))
}

/// Maximizer and maximum of `xi` over arms, attained at the second-best arm.
pub fn xi_max(m: &PreferenceVector, nu: Nu) -> Result<(usize, f64)> {
    ln_xi_max(m, nu).map(|(arm, ln)| (arm, ln.exp()))
}

/// `min over ordered pairs i != j of (m[i] - nu m[j])`, in a single pass.
pub fn min_pair_gap(m: &PreferenceVector, nu: Nu) -> Result<f64> {
    let values = m.as_slice();
    let (first, second) = top_two(values);
    let second = second.ok_or(Error::TooFewArms {
        required: 2,
        got: values.len(),
    })?;
    let v = nu.get();
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, &mi)| {
            let rival = if i == first {
                values[second]
            } else {
                values[first]
            };
            mi - v * rival
        })
        .fold(f64::INFINITY, f64::min))
}

/// `(g - g^{n}) / (1 - g)`, i.e. `g + g^2 + ... + g^{n-1}`.
fn geometric_tail(g: f64, n: usize) -> f64 {
    (g - g.powi(n as i32)) / (1.0 - g)
}

pub fn q_lower_bound(m: &PreferenceVector, arm: usize, ctx: &HorizonContext) -> Result<f64> {
    ctx.require_alignment_slot()?;
    let nu = ctx.nu;
    let lse = m.log_partition();
    let head = (ln_xi(arm, m, nu)? - lse).exp();
    let series = geometric_tail(g_nu(nu), ctx.remaining());
    if series == 0.0 {
        return Ok(head);
    }
    let spread = (min_pair_gap(m, nu)? / (1.0 - nu.get()) - lse).exp();
    Ok(head + spread * h_nu(nu) * series)
}

pub fn q_upper_bound(m: &PreferenceVector, arm: usize, ctx: &HorizonContext) -> Result<f64> {
    ctx.require_alignment_slot()?;
    let nu = ctx.nu;
    let growth = (ctx.remaining() as f64 - 1.0) * h_nu(nu).ln_1p();
    Ok((growth + ln_xi(arm, m, nu)? - m.log_partition()).exp())
}

/// Bounds on the optimal value `V_k(m)`; exact at `k = L`.
pub fn value_bounds(m: &PreferenceVector, ctx: &HorizonContext) -> Result<BoundPair> {
    if ctx.slot == ctx.horizon {
        let (first, _) = top_two(m.as_slice());
        let v = (m[first] - m.log_partition()).exp();
        return Ok(BoundPair { lower: v, upper: v });
    }
    let second = crate::policy::select_second_best(m)?;
    Ok(BoundPair {
        lower: q_lower_bound(m, second, ctx)?,
        upper: q_upper_bound(m, second, ctx)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    /// Gauss–Legendre nodes per panel.
    pub panel_nodes: usize,
    /// Re-run with doubled nodes and fail if the result moves by more than
    /// [`ORACLE_CONVERGENCE_TOL`].
    pub check_convergence: bool,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            panel_nodes: 6,
            check_convergence: true,
        }
    }
}

/// Truncation point of the feedback integral; the tail beyond holds mass below `e^-40`.
pub fn oracle_upper_limit(nu: Nu) -> f64 {
    40.0 / nu.get()
}

/// Exact `q_k(m, arm)` by backward induction with numerical quadrature.
///
/// Limited to [`MAX_ORACLE_ARMS`] arms and [`MAX_ORACLE_DEPTH`] remaining slots:
/// the cost grows like `(arms * nodes)^(L - k)`.
pub fn dp_exact_q(
    m: &PreferenceVector,
    arm: usize,
    ctx: &HorizonContext,
    quad: &QuadratureSettings,
) -> Result<f64> {
    ctx.require_alignment_slot()?;
    check_arm(m, arm)?;
    let depth = ctx.remaining();
    if m.len() > MAX_ORACLE_ARMS || depth > MAX_ORACLE_DEPTH {
        return Err(Error::OracleGuard {
            arms: m.len(),
            depth,
            max_arms: MAX_ORACLE_ARMS,
            max_depth: MAX_ORACLE_DEPTH,
        });
    }
    let run = |nodes: usize| {
        let oracle = Oracle::new(ctx.nu, nodes);
        // preferences are shift invariant; centre them so exponentials stay tame
        let lse = m.log_partition();
        let centred: Vec<f64> = m.as_slice().iter().map(|v| v - lse).collect();
        oracle.q(&centred, arm, depth)
    };
    let coarse = run(quad.panel_nodes);
    if !quad.check_convergence {
        return Ok(coarse);
    }
    let fine = run(2 * quad.panel_nodes);
    let change = (fine - coarse).abs();
    if change > ORACLE_CONVERGENCE_TOL {
        return Err(Error::QuadratureNotConverged { change });
    }
    Ok(fine)
}

/// Exact `V_k(m)` via [`dp_exact_q`], maximized over arms.
pub fn dp_exact_value(
    m: &PreferenceVector,
    ctx: &HorizonContext,
    quad: &QuadratureSettings,
) -> Result<f64> {
    if ctx.slot == ctx.horizon {
        return value_bounds(m, ctx).map(|b| b.lower);
    }
    (0..m.len()).try_fold(f64::NEG_INFINITY, |best, a| {
        Ok(best.max(dp_exact_q(m, a, ctx, quad)?))
    })
}

const GRID_START: f64 = 0.25;
const GRID_RATIO: f64 = 2.0;
const MAX_EDGES: usize = 64;

struct Oracle {
    nu: Nu,
    rule: GaussLegendre,
    y_max: f64,
    /// Fixed geometric cuts resolving both decay scales (1 and 1/nu).
    grid: Vec<f64>,
}

impl Oracle {
    fn new(nu: Nu, nodes: usize) -> Self {
        let y_max = oracle_upper_limit(nu);
        let mut grid = Vec::new();
        let mut y = GRID_START;
        while y < y_max {
            grid.push(y);
            y *= GRID_RATIO;
        }
        Oracle {
            nu,
            rule: GaussLegendre::new(nodes),
            y_max,
            grid,
        }
    }

    /// `V_L(m) = max_a softmax(m)[a]`.
    fn terminal_value(m: &[f64]) -> f64 {
        let max = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        1.0 / m.iter().map(|v| (v - max).exp()).sum::<f64>()
    }

    fn value(&self, m: &[f64], remaining: usize) -> f64 {
        if remaining == 0 {
            return Self::terminal_value(m);
        }
        (0..m.len())
            .map(|a| self.q(m, a, remaining))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `q(m, arm) = int_0^ymax V(m + J(y) e_arm) f(y | m, arm) dy`.
    fn q(&self, m: &[f64], arm: usize, remaining: usize) -> f64 {
        let v = self.nu.get();
        let ln_nu = self.nu.ln();
        let p = (m[arm] - log_sum_exp(m)).exp();

        // Kinks of the integrand sit where the scanned arm's updated preference
        // crosses a rival's, offset by multiples of ln nu from deeper slots.
        let offsets = (remaining as i32 - 1).min(1);
        let mut buf = [0.0f64; MAX_EDGES];
        let mut len = 0;
        let mut push = |c: f64| {
            if c > 0.0 && c < self.y_max {
                buf[len] = c;
                len += 1;
            }
        };
        push(f64::MIN_POSITIVE);
        self.grid.iter().for_each(|&c| push(c));
        for (j, &mj) in m.iter().enumerate() {
            if j == arm {
                continue;
            }
            for t in -offsets..=offsets {
                let target = mj - m[arm] + t as f64 * ln_nu;
                push((target - ln_nu) / (1.0 - v));
            }
        }
        let cuts = &mut buf[..len];
        cuts.sort_unstable_by(f64::total_cmp);
        cuts[0] = 0.0;

        let density = |y: f64| p * v * (-v * y).exp() + (1.0 - p) * (-y).exp();
        let base = m[arm];
        if remaining == 1 {
            // V_L only needs the rivals' partition, which the scan leaves alone.
            let rival_max = (0..m.len())
                .filter(|&j| j != arm)
                .map(|j| m[j])
                .fold(f64::NEG_INFINITY, f64::max);
            let rivals: f64 = (0..m.len())
                .filter(|&j| j != arm)
                .map(|j| (m[j] - rival_max).exp())
                .sum();
            let offset = base - rival_max + ln_nu;
            let scale = offset.exp();
            if scale == 0.0 || !scale.is_finite() {
                return self.integrate_cuts(cuts, |y| {
                    let x = offset + (1.0 - v) * y;
                    let terminal = if x <= 0.0 {
                        1.0 / (rivals + x.exp())
                    } else {
                        1.0 / (1.0 + rivals * (-x).exp())
                    };
                    terminal * density(y)
                });
            }
            // e^{-y} = e^{-nu y} e^{-(1-nu) y} and e^x = scale / e^{-(1-nu) y}
            return self.integrate_cuts(cuts, |y| {
                let slow = (-v * y).exp();
                let fast = (-(1.0 - v) * y).exp();
                let terminal = if offset + (1.0 - v) * y <= 0.0 {
                    fast / (rivals * fast + scale)
                } else {
                    1.0 / (1.0 + rivals * fast / scale)
                };
                terminal * (p * v * slow + (1.0 - p) * slow * fast)
            });
        }

        let mut next = [0.0f64; MAX_ORACLE_ARMS];
        let next = &mut next[..m.len()];
        next.copy_from_slice(m);
        self.integrate_cuts(cuts, |y| {
            next[arm] = base + j_transform(y, self.nu);
            self.value(next, remaining - 1) * density(y)
        })
    }

    /// Composite rule over `[cuts[0], cuts[1]], ..., [cuts[last], y_max]`.
    fn integrate_cuts<F: FnMut(f64) -> f64>(&self, cuts: &[f64], mut f: F) -> f64 {
        let mut total = 0.0;
        let mut lo = cuts[0];
        for &hi in cuts[1..].iter().chain(std::iter::once(&self.y_max)) {
            if hi - lo > 1e-14 * self.y_max {
                total += self.rule.integrate(lo, hi, &mut f);
                lo = hi;
            }
        }
        total
    }
}
