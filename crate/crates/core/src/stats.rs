//! Statistics kernel for the evaluation: midranks, Spearman's rho with its
//! t-test, Steiger's Z for two dependent correlations, Average Precision and
//! the distribution functions they need.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("empty input")]
    Empty,
    #[error("NaN in input")]
    NaN,
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("a sample is constant; correlation undefined")]
    DegenerateSample,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("no positive items")]
    NoPositives,
}

// ---------------------------------------------------------------------------
// special functions

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Regularized lower and upper incomplete gamma `(P(a, x), Q(a, x))`.
fn inc_gamma(a: f64, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    let ln_front = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        let p = sum * ln_front.exp();
        (p, 1.0 - p)
    } else {
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        let q = ln_front.exp() * h;
        (1.0 - q, q)
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    let (p, q) = inc_gamma(0.5, x * x);
    if x >= 0.0 {
        q
    } else {
        1.0 + p
    }
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Two-tailed standard normal p-value `2 (1 - Φ(|z|))`.
pub fn normal_two_tailed(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// CDF of Student's t distribution with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    assert!(df > 0.0, "degrees of freedom must be positive");
    if t == 0.0 {
        return 0.5;
    }
    let tail = 0.5 * inc_beta(df / 2.0, 0.5, df / (df + t * t));
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Two-tailed t p-value `2 (1 - F(|t|))`, computed from the tail directly.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    inc_beta(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// correlation

/// Ranks `1..=n`; tied values get the mean of the ranks they span.
pub fn midranks(values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(StatsError::NaN);
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        // -0.0 and 0.0 are one value
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    Ok(ranks)
}

/// Two equally long samples.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PairedSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, StatsError> {
        if x.len() != y.len() {
            return Err(StatsError::LengthMismatch(x.len(), y.len()));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewObservations {
            needed: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateSample);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of midranks.
pub fn spearman_rho(sample: &PairedSample) -> Result<f64, StatsError> {
    if sample.n() < 3 {
        return Err(StatsError::TooFewObservations {
            needed: 3,
            got: sample.n(),
        });
    }
    pearson(&midranks(&sample.x)?, &midranks(&sample.y)?)
}

/// Two-tailed p-value of rho against 0 with the t approximation on `n - 2`
/// degrees of freedom. `|rho| = 1` gives `p = 0`.
pub fn rho_t_test_p(rho: f64, n: usize) -> Result<f64, StatsError> {
    if n < 3 {
        return Err(StatsError::TooFewObservations { needed: 3, got: n });
    }
    if rho.is_nan() || rho.abs() > 1.0 {
        return Err(StatsError::DomainError(format!("rho = {rho}")));
    }
    if rho.abs() == 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    Ok(student_t_two_tailed(t, df))
}

/// Result of comparing two correlations that share one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationComparison {
    pub r1: f64,
    pub r2: f64,
    pub r12: f64,
    pub n: usize,
    pub z_stat: f64,
    pub p_two_tailed: f64,
}

/// Steiger's Z test (pooled mean-r form) for `H0: rho1 = rho2`, where `r1`
/// and `r2` correlate two variables with a shared third and `r12` is the
/// correlation between those two variables.
pub fn steiger_z(r1: f64, r2: f64, r12: f64, n: usize) -> Result<CorrelationComparison, StatsError> {
    for (name, r) in [("r1", r1), ("r2", r2), ("r12", r12)] {
        if !(r > -1.0 && r < 1.0) {
            return Err(StatsError::DomainError(format!("{name} = {r} is not in (-1, 1)")));
        }
    }
    if n < 4 {
        return Err(StatsError::TooFewObservations { needed: 4, got: n });
    }
    let mean_r = (r1 + r2) / 2.0;
    let mean_sq = mean_r * mean_r;
    let psi = r12 * (1.0 - 2.0 * mean_sq) - 0.5 * mean_sq * (1.0 - 2.0 * mean_sq - r12 * r12);
    let s = psi / ((1.0 - mean_sq) * (1.0 - mean_sq));
    if s >= 1.0 {
        return Err(StatsError::DomainError(format!(
            "covariance term {s} leaves no variance"
        )));
    }
    let z_stat = (r1.atanh() - r2.atanh()) * ((n as f64 - 3.0) / (2.0 - 2.0 * s)).sqrt();
    Ok(CorrelationComparison {
        r1,
        r2,
        r12,
        n,
        z_stat,
        p_two_tailed: normal_two_tailed(z_stat),
    })
}

// ---------------------------------------------------------------------------
// average precision

/// Mean over positive positions `k` of the precision among the first `k`.
pub fn average_precision(ranked: &[bool]) -> Result<f64, StatsError> {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &positive) in ranked.iter().enumerate() {
        if positive {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    if hits == 0 {
        return Err(StatsError::NoPositives);
    }
    Ok(sum / hits as f64)
}

/// An item to be ranked for AP.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredItem<'a> {
    pub id: &'a str,
    pub score: f64,
    pub positive: bool,
}

fn rank_order(a: &ScoredItem<'_>, b: &ScoredItem<'_>) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.id.cmp(b.id))
}

/// Labels sorted by descending score; equal scores by ascending id.
pub fn ranked_labels(items: &[ScoredItem<'_>]) -> Vec<bool> {
    let mut sorted: Vec<&ScoredItem<'_>> = items.iter().collect();
    sorted.sort_by(|a, b| rank_order(a, b));
    sorted.iter().map(|i| i.positive).collect()
}

/// AP of items ranked by descending score with the ascending-id tie-break.
pub fn ranked_average_precision(items: &[ScoredItem<'_>]) -> Result<f64, StatsError> {
    if items.iter().any(|i| i.score.is_nan()) {
        return Err(StatsError::NaN);
    }
    average_precision(&ranked_labels(items))
}

/// Expected AP when items with equal scores are ordered uniformly at random.
///
/// A tie group at positions `m+1..=m+g` holding `r` of its `g` items as
/// positives, with `R` positives ranked before it, contributes
/// `Σ_j (r/g) (R + 1 + (j-m-1)(r-1)/(g-1)) / j`.
pub fn expected_average_precision(items: &[ScoredItem<'_>]) -> Result<f64, StatsError> {
    if items.iter().any(|i| i.score.is_nan()) {
        return Err(StatsError::NaN);
    }
    let mut sorted: Vec<&ScoredItem<'_>> = items.iter().collect();
    sorted.sort_by(|a, b| rank_order(a, b));
    let total_pos = sorted.iter().filter(|i| i.positive).count();
    if total_pos == 0 {
        return Err(StatsError::NoPositives);
    }
    let mut before = 0usize;
    let mut seen_pos = 0usize;
    let mut sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j].score == sorted[i].score {
            j += 1;
        }
        let g = (j - i) as f64;
        let r = sorted[i..j].iter().filter(|x| x.positive).count();
        if r > 0 {
            let rf = r as f64;
            let spread = if j - i > 1 { (rf - 1.0) / (g - 1.0) } else { 0.0 };
            for offset in 0..(j - i) {
                let pos = (before + offset + 1) as f64;
                sum += (rf / g) * (seen_pos as f64 + 1.0 + offset as f64 * spread) / pos;
            }
        }
        seen_pos += r;
        before = j;
        i = j;
    }
    Ok(sum / total_pos as f64)
}
