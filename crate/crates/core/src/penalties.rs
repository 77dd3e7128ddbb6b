//! Nonconvex surrogates of the ℓ0 norm and the MCP proximal maps.
//!
//! Four penalty families are evaluated (MCP, SCAD, ETF, LTF); only MCP has a
//! proximal map here. All piecewise formulas put the knot on the inner branch
//! (`|s| ≤ γλ` is inclusive), which is value-neutral since the maps are
//! continuous there.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyFamily {
    /// Minimax concave penalty, `γ > 1`.
    Mcp,
    /// Smoothly clipped absolute deviation, `γ > 2`.
    Scad,
    /// Exponential type function, `γ > 0`.
    Etf,
    /// Logarithmic type function, `γ > 0`.
    Ltf,
}

impl PenaltyFamily {
    fn min_gamma(self) -> f64 {
        match self {
            PenaltyFamily::Mcp => 1.0,
            PenaltyFamily::Scad => 2.0,
            PenaltyFamily::Etf | PenaltyFamily::Ltf => 0.0,
        }
    }
}

/// Threshold scale `λ`, concavity `γ` and the family they parameterize.
/// Validated on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyParams {
    lambda: f64,
    gamma: f64,
    family: PenaltyFamily,
}

impl PenaltyParams {
    pub fn new(family: PenaltyFamily, lambda: f64, gamma: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "must be positive and finite",
            });
        }
        if !(gamma > family.min_gamma()) || !gamma.is_finite() {
            let reason = match family {
                PenaltyFamily::Mcp => "MCP requires gamma > 1",
                PenaltyFamily::Scad => "SCAD requires gamma > 2",
                PenaltyFamily::Etf | PenaltyFamily::Ltf => "ETF/LTF require gamma > 0",
            };
            return Err(Error::InvalidParameter { name: "gamma", value: gamma, reason });
        }
        Ok(Self { lambda, gamma, family })
    }

    pub fn mcp(lambda: f64, gamma: f64) -> Result<Self> {
        Self::new(PenaltyFamily::Mcp, lambda, gamma)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn family(&self) -> PenaltyFamily {
        self.family
    }

    /// Scalar penalty value for whatever family these parameters belong to.
    pub fn value(&self, u: f64) -> f64 {
        match self.family {
            PenaltyFamily::Mcp => mcp_raw(u, self.lambda, self.gamma),
            PenaltyFamily::Scad => scad_raw(u, self.lambda, self.gamma),
            PenaltyFamily::Etf => etf_raw(u, self.lambda, self.gamma),
            PenaltyFamily::Ltf => ltf_raw(u, self.lambda, self.gamma),
        }
    }

    fn expect(&self, family: PenaltyFamily) -> Result<()> {
        if self.family == family {
            Ok(())
        } else {
            Err(Error::InvalidInput(alloc::format!("expected {family:?} parameters, got {:?}", self.family)))
        }
    }
}

#[inline]
fn mcp_raw(u: f64, lambda: f64, gamma: f64) -> f64 {
    let a = u.abs();
    if a <= gamma * lambda {
        lambda * a - u * u / (2.0 * gamma)
    } else {
        0.5 * gamma * lambda * lambda
    }
}

#[inline]
fn scad_raw(u: f64, lambda: f64, gamma: f64) -> f64 {
    let a = u.abs();
    if a <= lambda {
        lambda * a
    } else if a <= gamma * lambda {
        -(u * u - 2.0 * gamma * lambda * a + lambda * lambda) / (2.0 * (gamma - 1.0))
    } else {
        0.5 * (gamma + 1.0) * lambda * lambda
    }
}

#[inline]
fn etf_raw(u: f64, lambda: f64, gamma: f64) -> f64 {
    lambda * -libm::expm1(-gamma * u.abs()) / -libm::expm1(-gamma)
}

#[inline]
fn ltf_raw(u: f64, lambda: f64, gamma: f64) -> f64 {
    lambda * libm::log1p(gamma * u.abs()) / libm::log1p(gamma)
}

/// `λ|u| − u²/(2γ)` for `|u| ≤ γλ`, `γλ²/2` beyond.
pub fn mcp_value(u: f64, params: &PenaltyParams) -> Result<f64> {
    params.expect(PenaltyFamily::Mcp)?;
    Ok(mcp_raw(u, params.lambda, params.gamma))
}

pub fn scad_value(u: f64, params: &PenaltyParams) -> Result<f64> {
    params.expect(PenaltyFamily::Scad)?;
    Ok(scad_raw(u, params.lambda, params.gamma))
}

pub fn etf_value(u: f64, params: &PenaltyParams) -> Result<f64> {
    params.expect(PenaltyFamily::Etf)?;
    Ok(etf_raw(u, params.lambda, params.gamma))
}

pub fn ltf_value(u: f64, params: &PenaltyParams) -> Result<f64> {
    params.expect(PenaltyFamily::Ltf)?;
    Ok(ltf_raw(u, params.lambda, params.gamma))
}

/// `Σᵢ P(uᵢ)`.
pub fn penalty_value_vec(u: &[f64], params: &PenaltyParams) -> f64 {
    u.iter().map(|&v| params.value(v)).sum()
}

/// `sign(z) · max(|z| − η, 0)`.
#[inline]
pub fn soft_threshold(z: f64, eta: f64) -> f64 {
    let m = z.abs() - eta;
    if m > 0.0 {
        m.copysign(z)
    } else {
        0.0
    }
}

/// Indices of the `k` largest-magnitude entries, in index order. Ties go to
/// the lower index.
pub fn top_k_indices(z: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    if k == 0 {
        return Vec::new();
    }
    if k < z.len() {
        idx.select_nth_unstable_by(k - 1, |&i, &j| z[j].abs().total_cmp(&z[i].abs()).then(i.cmp(&j)));
        idx.truncate(k);
    }
    idx.sort_unstable();
    idx
}

/// `k`-th largest magnitude (1-based), same ordering as [`top_k_indices`].
pub fn kth_largest_magnitude(z: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > z.len() {
        return Err(Error::InvalidInput(alloc::format!("order statistic {k} out of range 1..={}", z.len())));
    }
    let mut mags: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    let (_, kth, _) = mags.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    Ok(*kth)
}

/// Keeps the `tau` largest-magnitude entries of `z` and zeroes the rest.
pub fn hard_threshold(z: &[f64], tau: usize) -> Result<Vec<f64>> {
    if tau > z.len() {
        return Err(Error::InvalidInput(alloc::format!(
            "hard threshold keeps {tau} entries of a length-{} vector",
            z.len()
        )));
    }
    let mut out = alloc::vec![0.0; z.len()];
    for i in top_k_indices(z, tau) {
        out[i] = z[i];
    }
    Ok(out)
}

/// Which piece of a piecewise proximal map produced the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProxBranch {
    /// Output equals the input.
    PassThrough,
    /// Output is a scaled soft threshold of the input.
    Shrunk,
    /// Output is zero.
    Zeroed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxResult {
    pub value: f64,
    pub branch: ProxBranch,
}

impl ProxResult {
    const fn zero() -> Self {
        Self { value: 0.0, branch: ProxBranch::Zeroed }
    }

    const fn pass(s: f64) -> Self {
        Self { value: s, branch: ProxBranch::PassThrough }
    }
}

/// The one-dimensional MCP proximal objective `P(u) + (ρ/2)(s − u)²`.
pub fn mcp_prox_objective(u: f64, s: f64, params: &PenaltyParams, rho: f64) -> f64 {
    mcp_raw(u, params.lambda, params.gamma) + 0.5 * rho * (s - u) * (s - u)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "rho", value: rho, reason: "must be positive and finite" })
    }
}

/// Global minimizer of `P(u) + (ρ/2)(s − u)²` for MCP.
///
/// * `ρ > 1/γ`: pass-through above `γλ`, `sign(s)(|s| − λ/ρ)/(1 − 1/(γρ))` on
///   `(λ/ρ, γλ]`, zero at or below `λ/ρ`;
/// * `ρ = 1/γ`: hard threshold at `γλ`;
/// * `ρ < 1/γ`: hard threshold at `√(γ/ρ)·λ`.
pub fn mcp_prox_exact(s: f64, params: &PenaltyParams, rho: f64) -> Result<ProxResult> {
    params.expect(PenaltyFamily::Mcp)?;
    check_rho(rho)?;
    Ok(mcp_prox_exact_raw(s, params.lambda, params.gamma, rho))
}

#[inline]
pub(crate) fn mcp_prox_exact_raw(s: f64, lambda: f64, gamma: f64, rho: f64) -> ProxResult {
    let a = s.abs();
    let inv_gamma = 1.0 / gamma;
    if rho > inv_gamma {
        if a > gamma * lambda {
            ProxResult::pass(s)
        } else if a > lambda / rho {
            ProxResult {
                value: ((a - lambda / rho) / (1.0 - 1.0 / (gamma * rho))).copysign(s),
                branch: ProxBranch::Shrunk,
            }
        } else {
            ProxResult::zero()
        }
    } else {
        let threshold = if rho == inv_gamma { gamma * lambda } else { libm::sqrt(gamma / rho) * lambda };
        if a > threshold {
            ProxResult::pass(s)
        } else {
            ProxResult::zero()
        }
    }
}

/// The unified approximate MCP prox: pass-through above `γλ`,
/// `sign(s)(|s| − λ)/(1 − 1/γ)` on `(λ, γλ]`, zero at or below `λ`.
/// Independent of `ρ`.
pub fn mcp_prox_unified(s: f64, params: &PenaltyParams) -> Result<ProxResult> {
    params.expect(PenaltyFamily::Mcp)?;
    Ok(mcp_prox_unified_raw(s, params.lambda, params.gamma))
}

#[inline]
pub(crate) fn mcp_prox_unified_raw(s: f64, lambda: f64, gamma: f64) -> ProxResult {
    let a = s.abs();
    if a > gamma * lambda {
        ProxResult::pass(s)
    } else if a > lambda {
        ProxResult { value: ((a - lambda) / (1.0 - 1.0 / gamma)).copysign(s), branch: ProxBranch::Shrunk }
    } else {
        ProxResult::zero()
    }
}
