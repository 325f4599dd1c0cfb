//! Tukey HSD multiple comparison and the studentized range quantile it
//! needs.
//!
//! The studentized range CDF is evaluated as the double integral
//!
//! ```text
//! P(Q ≤ q) = ∫₀^∞ g_ν(s) · k ∫ φ(z) [Φ(z) − Φ(z − q·s)]^{k−1} dz ds
//! ```
//!
//! with `g_ν` the density of `√(χ²_ν/ν)`, both layers handled by
//! Gauss–Legendre quadrature, and the quantile recovered by bisection.
//! No closed form or table lookup is involved; published tables are only
//! used as test oracles.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::anova::check_alpha;
use crate::stats::special::{gauss_legendre, ln_gamma, normal_cdf, normal_pdf};

/// One unordered group pair in a Tukey comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyPair {
    pub group_a: usize,
    pub group_b: usize,
    pub mean_diff: f64,
    pub q_statistic: f64,
    pub significant: bool,
}

/// Result of a Tukey HSD test over k groups: all k·(k−1)/2 pairs plus the
/// group implicated by the most significant pairs, when any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyResult {
    pub pairwise: Vec<TukeyPair>,
    pub outlier_group: Option<usize>,
    pub critical_value: f64,
}

const INNER_NODES: usize = 120;
const OUTER_NODES: usize = 72;
const INNER_RANGE: f64 = 8.0;
const QUANTILE_TOL: f64 = 1e-7;
const MAX_BISECTIONS: usize = 200;

struct InnerGrid {
    /// (z, weight·φ(z), Φ(z)) per node on [-INNER_RANGE, INNER_RANGE]
    nodes: Vec<(f64, f64, f64)>,
}

fn inner_grid() -> &'static InnerGrid {
    static GRID: OnceLock<InnerGrid> = OnceLock::new();
    GRID.get_or_init(|| {
        let (xs, ws) = gauss_legendre(INNER_NODES);
        let nodes = xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| {
                let z = x * INNER_RANGE;
                (z, w * INNER_RANGE * normal_pdf(z), normal_cdf(z))
            })
            .collect();
        InnerGrid { nodes }
    })
}

fn outer_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(OUTER_NODES))
}

/// P(range of k independent standard normals ≤ w).
fn normal_range_cdf(w: f64, k: usize) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let grid = inner_grid();
    let mut acc = 0.0;
    for &(z, wphi, phi) in &grid.nodes {
        let span = (phi - normal_cdf(z - w)).max(0.0);
        acc += wphi * span.powi(k as i32 - 1);
    }
    (k as f64 * acc).clamp(0.0, 1.0)
}

/// ln of the density of `s = √(χ²_ν/ν)`.
fn ln_scale_density(s: f64, df: f64) -> f64 {
    std::f64::consts::LN_2 + 0.5 * df * (0.5 * df).ln() - ln_gamma(0.5 * df) + (df - 1.0) * s.ln()
        - 0.5 * df * s * s
}

/// CDF of the studentized range statistic with k groups and df degrees of
/// freedom for the variance estimate.
pub fn studentized_range_cdf(q: f64, k: usize, df: usize) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let nu = df as f64;
    // the scale density concentrates around s = 1 with spread ~ 1/√(2ν)
    let spread = 12.0 / (2.0 * nu).sqrt();
    let s_lo = (1.0 - spread).max(1e-9);
    let s_hi = 1.0 + spread;
    let (xs, ws) = outer_rule();
    let half = 0.5 * (s_hi - s_lo);
    let mid = 0.5 * (s_hi + s_lo);
    let mut acc = 0.0;
    for (&x, &w) in xs.iter().zip(ws) {
        let s = mid + half * x;
        let g = ln_scale_density(s, nu).exp();
        if g == 0.0 {
            continue;
        }
        acc += w * half * g * normal_range_cdf(q * s, k);
    }
    acc.clamp(0.0, 1.0)
}

/// Upper-α quantile of the studentized range: the q with
/// `P(Q_{k,df} ≤ q) = 1 − alpha`.
pub fn studentized_range_quantile(k: usize, df: usize, alpha: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "studentized range needs k >= 2 groups, got {k}"
        )));
    }
    if df < 2 {
        return Err(Error::InvalidParameter(format!(
            "studentized range needs df >= 2, got {df}"
        )));
    }
    check_alpha(alpha)?;
    if let Some(hit) = quantile_cache_get(k, df, alpha) {
        return Ok(hit);
    }

    let target = 1.0 - alpha;
    let mut lo = 0.0_f64;
    let mut hi = 2.0_f64;
    let mut expansions = 0;
    while studentized_range_cdf(hi, k, df) < target {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 20 {
            return Err(Error::QuantileNoConvergence { k, df });
        }
    }
    let mut iterations = 0;
    while hi - lo > QUANTILE_TOL {
        iterations += 1;
        if iterations > MAX_BISECTIONS {
            return Err(Error::QuantileNoConvergence { k, df });
        }
        let mid = 0.5 * (lo + hi);
        if studentized_range_cdf(mid, k, df) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    quantile_cache_put(k, df, alpha, q);
    Ok(q)
}

type QuantileCache = Mutex<HashMap<(usize, usize, u64), f64>>;

fn quantile_cache() -> &'static QuantileCache {
    static CACHE: OnceLock<QuantileCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn quantile_cache_get(k: usize, df: usize, alpha: f64) -> Option<f64> {
    quantile_cache()
        .lock()
        .ok()?
        .get(&(k, df, alpha.to_bits()))
        .copied()
}

fn quantile_cache_put(k: usize, df: usize, alpha: f64, q: f64) {
    if let Ok(mut cache) = quantile_cache().lock() {
        cache.insert((k, df, alpha.to_bits()), q);
    }
}

/// Tukey HSD over k groups at level `alpha`.
///
/// `q_ab = |x̄_a − x̄_b| / √(MSW/2 · (1/n_a + 1/n_b))`, compared against
/// the studentized range critical value for (k, df_within).
pub fn tukey_hsd(groups: &[Vec<f64>], alpha: f64) -> Result<TukeyResult> {
    check_alpha(alpha)?;
    if groups.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "tukey requires at least 2 groups, got {}",
            groups.len()
        )));
    }
    for (index, g) in groups.iter().enumerate() {
        if g.len() < 2 {
            return Err(Error::InsufficientGroup {
                index,
                len: g.len(),
            });
        }
    }
    let k = groups.len();
    let n_total: usize = groups.iter().map(Vec::len).sum();
    let df_within = n_total - k;
    let means: Vec<f64> = groups
        .iter()
        .map(|g| g.iter().sum::<f64>() / g.len() as f64)
        .collect();
    let ss_within: f64 = groups
        .iter()
        .zip(&means)
        .map(|(g, &m)| g.iter().map(|&x| (x - m) * (x - m)).sum::<f64>())
        .sum();
    let msw = ss_within / df_within as f64;
    if msw == 0.0 {
        return Err(Error::DegenerateVariance {
            context: "zero within-group variance across all groups",
        });
    }
    let critical_value = studentized_range_quantile(k, df_within, alpha)?;

    let mut pairwise = Vec::with_capacity(k * (k - 1) / 2);
    let mut significant_hits = vec![0_usize; k];
    for a in 0..k {
        for b in (a + 1)..k {
            let mean_diff = means[a] - means[b];
            let se =
                (msw / 2.0 * (1.0 / groups[a].len() as f64 + 1.0 / groups[b].len() as f64)).sqrt();
            let q_statistic = mean_diff.abs() / se;
            let significant = q_statistic > critical_value;
            if significant {
                significant_hits[a] += 1;
                significant_hits[b] += 1;
            }
            pairwise.push(TukeyPair {
                group_a: a,
                group_b: b,
                mean_diff,
                q_statistic,
                significant,
            });
        }
    }
    let best = significant_hits.iter().copied().max().unwrap_or(0);
    let outlier_group = if best == 0 {
        None
    } else {
        significant_hits.iter().position(|&c| c == best)
    };
    Ok(TukeyResult {
        pairwise,
        outlier_group,
        critical_value,
    })
}
