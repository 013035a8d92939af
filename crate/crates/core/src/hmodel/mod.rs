//! h-index distribution of a product of two exponential variables.
//!
//! If a researcher's productivity and impact are independent exponentials
//! with means λ1 and λ2, the h-index proxy `h = λ1 λ2 · t1 t2` has density
//! `P_m(h) = (2/m) K0(2 √(h/m))` with `m = λ1 λ2`, mean `m` and standard
//! deviation `√3 m`. Its CCDF is `z K1(z)` with `z = 2 √(h/m)`.

mod bessel;
pub mod quad;

use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HModelError {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("no values to bin")]
    Empty,
    #[error("degenerate binning: {0}")]
    Degenerate(String),
    #[error("no sign change in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("{count} sign changes in [{lo}, {hi}]; expected exactly one")]
    MultipleSignChanges { lo: f64, hi: f64, count: usize },
}

fn domain(what: &'static str, value: f64) -> HModelError {
    HModelError::Domain { what, value }
}

/// Modified Bessel function of the second kind, order 0.
pub fn bessel_k0(x: f64) -> Result<f64, HModelError> {
    if !(x > 0.0) {
        return Err(domain("x", x));
    }
    Ok(bessel::k0_k1(x).0)
}

/// Modified Bessel function of the second kind, order 1.
pub fn bessel_k1(x: f64) -> Result<f64, HModelError> {
    if !(x > 0.0) {
        return Err(domain("x", x));
    }
    Ok(bessel::k0_k1(x).1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HModel {
    m: f64,
}

impl HModel {
    pub fn new(m: f64) -> Result<Self, HModelError> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(domain("m", m));
        }
        Ok(HModel { m })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn mean(&self) -> f64 {
        self.m
    }

    pub fn std_dev(&self) -> f64 {
        3f64.sqrt() * self.m
    }

    fn z(&self, h: f64) -> f64 {
        2.0 * (h / self.m).sqrt()
    }

    /// Density at `h > 0`.
    pub fn pdf(&self, h: f64) -> Result<f64, HModelError> {
        if !(h > 0.0) {
            return Err(domain("h", h));
        }
        Ok(2.0 / self.m * bessel::k0_k1(self.z(h)).0)
    }

    /// `P(H >= h)` for `h >= 0`.
    pub fn ccdf(&self, h: f64) -> Result<f64, HModelError> {
        if !(h >= 0.0) {
            return Err(domain("h", h));
        }
        if h == 0.0 {
            return Ok(1.0);
        }
        let z = self.z(h);
        Ok(z * bessel::k0_k1(z).1)
    }

    fn ccdf_unchecked(&self, h: f64) -> f64 {
        if h <= 0.0 {
            1.0
        } else {
            let z = self.z(h);
            z * bessel::k0_k1(z).1
        }
    }

    /// Probability of `[lo, hi)`.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        (self.ccdf_unchecked(lo) - self.ccdf_unchecked(hi)).max(0.0)
    }

    /// One continuous draw: `m · t1 · t2` with `t1, t2 ~ Exp(1)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let t1: f64 = rng.sample(Exp1);
        let t2: f64 = rng.sample(Exp1);
        self.m * t1 * t2
    }

    /// One integer draw; integer `k` stands for the continuous range `[k, k+1)`.
    pub fn sample_integer<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.sample(rng).floor() as u64
    }
}

pub fn pm_pdf(h: f64, model: &HModel) -> Result<f64, HModelError> {
    model.pdf(h)
}

pub fn pm_ccdf(h: f64, model: &HModel) -> Result<f64, HModelError> {
    model.ccdf(h)
}

/// Histogram over integer-valued data; bin `i` covers `[edges[i], edges[i+1])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedDistribution {
    pub edges: Vec<u64>,
    pub masses: Vec<f64>,
    pub total: usize,
}

impl BinnedDistribution {
    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    pub fn bin(&self, i: usize) -> (u64, u64, f64) {
        (self.edges[i], self.edges[i + 1], self.masses[i])
    }
}

pub const DEFAULT_LINEAR_UPTO: u64 = 10;
pub const DEFAULT_BINS_PER_DECADE: u32 = 5;

/// Unit bins from the smallest value through `linear_upto`, then
/// logarithmically spaced edges (`bins_per_decade` per factor of ten,
/// rounded to integers) until the largest value is covered. Empty bins are
/// kept with zero mass.
pub fn log_bin(values: &[u64], linear_upto: u64, bins_per_decade: u32) -> Result<BinnedDistribution, HModelError> {
    let (Some(&lo), Some(&hi)) = (values.iter().min(), values.iter().max()) else {
        return Err(HModelError::Empty);
    };
    if bins_per_decade == 0 {
        return Err(HModelError::Degenerate("zero bins per decade".into()));
    }
    let mut edges = vec![lo];
    let mut edge = lo;
    while edge <= linear_upto && edge <= hi {
        edge += 1;
        edges.push(edge);
    }
    let anchor = edge as f64;
    let ratio = 10f64.powf(1.0 / bins_per_decade as f64);
    let mut k = 1;
    while edge <= hi {
        let next = (anchor * ratio.powi(k)).round() as u64;
        edge = next.max(edge + 1);
        edges.push(edge);
        k += 1;
    }
    let mut counts = vec![0usize; edges.len() - 1];
    for &v in values {
        let bin = edges.partition_point(|&e| e <= v) - 1;
        counts[bin] += 1;
    }
    let total = values.len();
    Ok(BinnedDistribution {
        edges,
        masses: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitBin {
    pub lo: u64,
    pub hi: u64,
    pub empirical: f64,
    pub model: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub m: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub support_min: u64,
    pub loss: f64,
    pub bins: Vec<FitBin>,
}

const FIT_M_MIN: f64 = 1e-3;
const FIT_M_MAX: f64 = 1e3;

/// Least-squares fit of `m` in log-mass space over the nonempty bins at or
/// above `support_min`. Model bin masses are exact interval probabilities
/// renormalized to `[support_min, ∞)`; empirical masses are renormalized to
/// the same support.
pub fn fit_m(binned: &BinnedDistribution, support_min: u64) -> Result<(HModel, FitReport), HModelError> {
    let used: Vec<(u64, u64, f64)> = (0..binned.bins())
        .map(|i| binned.bin(i))
        .filter(|&(lo, _, mass)| lo >= support_min && mass > 0.0)
        .collect();
    if used.len() < 3 {
        return Err(HModelError::Degenerate(format!(
            "{} nonempty bins at or above {support_min}; need 3",
            used.len()
        )));
    }
    let empirical_total: f64 = used.iter().map(|b| b.2).sum();
    let targets: Vec<f64> = used.iter().map(|b| (b.2 / empirical_total).ln()).collect();
    let loss = |ln_m: f64| -> f64 {
        let model = HModel { m: ln_m.exp() };
        let norm = model.ccdf_unchecked(support_min as f64);
        used.iter()
            .zip(&targets)
            .map(|(&(lo, hi, _), &t)| {
                let mass = model.interval_mass(lo as f64, hi as f64) / norm;
                if mass > 0.0 {
                    (t - mass.ln()).powi(2)
                } else {
                    f64::INFINITY
                }
            })
            .sum()
    };
    let (a, b) = (FIT_M_MIN.ln(), FIT_M_MAX.ln());
    let grid: usize = 240;
    let step = (b - a) / grid as f64;
    let best = (0..=grid)
        .map(|k| (k, loss(a + step * k as f64)))
        .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let lo = a + step * best.saturating_sub(1) as f64;
    let hi = (a + step * (best + 1) as f64).min(b);
    let ln_m = golden_section(&loss, lo, hi, 1e-12);
    let model = HModel { m: ln_m.exp() };
    let norm = model.ccdf_unchecked(support_min as f64);
    let bins = used
        .iter()
        .map(|&(lo, hi, mass)| FitBin {
            lo,
            hi,
            empirical: mass / empirical_total,
            model: model.interval_mass(lo as f64, hi as f64) / norm,
        })
        .collect();
    let report = FitReport {
        m: model.m,
        mean: model.mean(),
        std_dev: model.std_dev(),
        support_min,
        loss: loss(ln_m),
        bins,
    };
    Ok((model, report))
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Pareto CCDF `(hmin / h)²`, equal to 1 at `hmin`.
pub fn pareto_ccdf(h: f64, hmin: f64) -> Result<f64, HModelError> {
    if !(hmin >= 1.0) {
        return Err(domain("hmin", hmin));
    }
    if !(h >= hmin) {
        return Err(domain("h", h));
    }
    Ok((hmin / h).powi(2))
}

const CROSSOVER_GRID: usize = 2000;
const CROSSOVER_TOL: f64 = 1e-6;

/// The single point in `(lo, hi)` where `a(h) - b(h)` changes sign, found by
/// bisection to `1e-6`. The bracket is scanned on a log-spaced grid first and
/// rejected unless exactly one sign change is seen.
pub fn crossover<A, B>(a: A, b: B, bracket: (f64, f64)) -> Result<f64, HModelError>
where
    A: Fn(f64) -> f64,
    B: Fn(f64) -> f64,
{
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(domain("bracket", lo));
    }
    let diff = |h: f64| a(h) - b(h);
    let ratio = (hi / lo).ln() / CROSSOVER_GRID as f64;
    let grid: Vec<f64> = (0..=CROSSOVER_GRID)
        .map(|k| if k == CROSSOVER_GRID { hi } else { lo * (ratio * k as f64).exp() })
        .collect();
    let signs: Vec<(f64, f64)> = grid
        .iter()
        .map(|&h| (h, diff(h)))
        .filter(|(_, d)| *d != 0.0)
        .collect();
    let changes: Vec<usize> = (1..signs.len())
        .filter(|&k| (signs[k - 1].1 > 0.0) != (signs[k].1 > 0.0))
        .collect();
    match changes.len() {
        0 => Err(HModelError::NoSignChange { lo, hi }),
        1 => {
            let (mut x0, d0) = signs[changes[0] - 1];
            let (mut x1, _) = signs[changes[0]];
            let positive_left = d0 > 0.0;
            while x1 - x0 > CROSSOVER_TOL {
                let mid = 0.5 * (x0 + x1);
                let d = diff(mid);
                if d == 0.0 {
                    return Ok(mid);
                }
                if (d > 0.0) == positive_left {
                    x0 = mid;
                } else {
                    x1 = mid;
                }
            }
            Ok(0.5 * (x0 + x1))
        }
        count => Err(HModelError::MultipleSignChanges { lo, hi, count }),
    }
}
