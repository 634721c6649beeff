//! Monte Carlo simulation of the GU point process.
//!
//! Drops are split across a fixed number of ChaCha20 streams derived from
//! the master seed (stream index = chunk index), so results do not depend on
//! the number of worker threads. Per-chunk sums are compensated and combined
//! in chunk order.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::channel::{avg_rate, rate_lower_bound};
use crate::edge::edge_cdf;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Generator name recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9), 64 streams";

const STREAMS: u64 = 64;
const MIN_DROPS: usize = 1000;
const CDF_POINTS: usize = 100;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRates {
    /// LoS-branch rate of the edge GU, bits/s.
    pub low: f64,
    /// LoS/NLoS-averaged rate of the edge GU, bits/s.
    pub full: f64,
}

/// One PPP realization on the service disk.
#[derive(Debug, Clone, PartialEq)]
pub struct DropSample {
    pub gu_radii: Vec<f64>,
    /// Largest radius; `None` for an empty realization.
    pub edge_radius: Option<f64>,
    pub rates: Option<EdgeRates>,
}

impl DropSample {
    /// Attaches the edge GU's rates. Empty realizations get zero.
    pub fn with_rates(mut self, p_u: f64, h_u: f64, s: &Scenario) -> Self {
        self.rates = Some(match self.edge_radius {
            Some(r) => EdgeRates {
                low: rate_lower_bound(r, h_u, p_u, s),
                full: avg_rate(r, h_u, p_u, s),
            },
            None => EdgeRates { low: 0.0, full: 0.0 },
        });
        self
    }
}

fn poisson(mean: f64) -> Poisson<f64> {
    Poisson::new(mean).expect("PPP mean is positive and finite")
}

/// Draws one realization: a Poisson count, then radii `r0 * sqrt(u)`.
pub fn ppp_drop(lambda_g: f64, r0: f64, seed: u64) -> DropSample {
    let mut rng = stream_rng(seed, 0);
    let n = poisson(PI * lambda_g * r0 * r0).sample(&mut rng) as usize;
    let gu_radii: Vec<f64> = (0..n).map(|_| r0 * rng.random::<f64>().sqrt()).collect();
    let edge_radius = gu_radii.iter().copied().reduce(f64::max);
    DropSample {
        gu_radii,
        edge_radius,
        rates: None,
    }
}

/// Edge radius of a fresh realization, without keeping the other radii.
fn edge_radius<R: Rng>(rng: &mut R, count: &Poisson<f64>, r0: f64) -> (usize, Option<f64>) {
    let n = count.sample(rng) as usize;
    let mut max_u: Option<f64> = None;
    for _ in 0..n {
        let u: f64 = rng.random();
        max_u = Some(max_u.map_or(u, |m| m.max(u)));
    }
    (n, max_u.map(|u| r0 * u.sqrt()))
}

#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

fn chunk_sizes(n: usize) -> Vec<(u64, usize)> {
    let streams = STREAMS as usize;
    (0..streams)
        .map(|i| (i as u64, n / streams + usize::from(i < n % streams)))
        .collect()
}

fn check_drops(op: &'static str, n: usize) -> Result<()> {
    if n < MIN_DROPS {
        return Err(Error::domain(op, format!("need at least {MIN_DROPS} drops (got {n})")));
    }
    Ok(())
}

/// Empirical CDF of the edge radius on a uniform grid over `[0, r0]`.
/// Empty realizations count as lying below every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub r: Vec<f64>,
    pub cdf: Vec<f64>,
    pub empty_fraction: f64,
    pub mean_count: f64,
    pub n_drops: usize,
}

impl EmpiricalCdf {
    /// Largest grid deviation from `exp(-pi*lambda*(r0^2 - r^2))`.
    pub fn sup_deviation(&self, lambda_g: f64, r0: f64) -> f64 {
        self.r
            .iter()
            .zip(&self.cdf)
            .map(|(&r, &f)| (f - edge_cdf(r, lambda_g, r0).expect("grid within [0, r0]")).abs())
            .fold(0.0, f64::max)
    }
}

pub fn mc_edge_distribution(s: &Scenario, n_drops: usize, seed: u64) -> Result<EmpiricalCdf> {
    check_drops("mc_edge_distribution", n_drops)?;
    let r0 = s.geom.r0;
    let count = poisson(PI * s.geom.lambda_g * r0 * r0);
    let chunks: Vec<(Vec<f64>, usize, usize)> = chunk_sizes(n_drops)
        .into_par_iter()
        .map(|(stream, n)| {
            let mut rng = stream_rng(seed, stream);
            let mut radii = Vec::with_capacity(n);
            let mut empty = 0;
            let mut gus = 0;
            for _ in 0..n {
                let (k, edge) = edge_radius(&mut rng, &count, r0);
                gus += k;
                match edge {
                    Some(r) => radii.push(r),
                    None => empty += 1,
                }
            }
            (radii, empty, gus)
        })
        .collect();

    let mut radii = Vec::with_capacity(n_drops);
    let (mut empty, mut gus) = (0usize, 0usize);
    for (r, e, g) in chunks {
        radii.extend(r);
        empty += e;
        gus += g;
    }
    radii.sort_by(f64::total_cmp);

    let n = n_drops as f64;
    let grid: Vec<f64> = (0..CDF_POINTS)
        .map(|i| {
            if i + 1 == CDF_POINTS {
                r0
            } else {
                r0 * i as f64 / (CDF_POINTS - 1) as f64
            }
        })
        .collect();
    let cdf = grid
        .iter()
        .map(|&r| (empty + radii.partition_point(|&x| x <= r)) as f64 / n)
        .collect();
    Ok(EmpiricalCdf {
        r: grid,
        cdf,
        empty_fraction: empty as f64 / n,
        mean_count: gus as f64 / n,
        n_drops,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEdgeRate {
    /// Sample mean of the edge GU's LoS-branch rate, bits/s.
    pub mean_low: f64,
    /// Sample mean of the edge GU's averaged rate, bits/s.
    pub mean_full: f64,
    pub std_err_low: f64,
    pub std_err_full: f64,
    pub n_drops: usize,
}

pub fn mc_edge_rate(s: &Scenario, p_u: f64, h_u: f64, n_drops: usize, seed: u64) -> Result<McEdgeRate> {
    check_drops("mc_edge_rate", n_drops)?;
    if !(p_u >= 0.0 && h_u > 0.0) {
        return Err(Error::domain(
            "mc_edge_rate",
            format!("need p_u >= 0 and h_u > 0 (got {p_u}, {h_u})"),
        ));
    }
    let r0 = s.geom.r0;
    let count = poisson(PI * s.geom.lambda_g * r0 * r0);
    let sums: Vec<[CompensatedSum; 4]> = chunk_sizes(n_drops)
        .into_par_iter()
        .map(|(stream, n)| {
            let mut rng = stream_rng(seed, stream);
            let mut acc = [CompensatedSum::default(); 4];
            for _ in 0..n {
                let (low, full) = match edge_radius(&mut rng, &count, r0).1 {
                    Some(r) => (rate_lower_bound(r, h_u, p_u, s), avg_rate(r, h_u, p_u, s)),
                    None => (0.0, 0.0),
                };
                acc[0].add(low);
                acc[1].add(low * low);
                acc[2].add(full);
                acc[3].add(full * full);
            }
            acc
        })
        .collect();

    let mut total = [CompensatedSum::default(); 4];
    for chunk in &sums {
        for (t, c) in total.iter_mut().zip(chunk) {
            t.add(c.total());
        }
    }
    let n = n_drops as f64;
    let mean_low = total[0].total() / n;
    let mean_full = total[2].total() / n;
    let std_err = |sum_sq: f64, mean: f64| ((sum_sq / n - mean * mean).max(0.0) / (n - 1.0)).sqrt();
    Ok(McEdgeRate {
        mean_low,
        mean_full,
        std_err_low: std_err(total[1].total(), mean_low),
        std_err_full: std_err(total[3].total(), mean_full),
        n_drops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_drop() {
        let a = ppp_drop(1e-3, 50.0, 99);
        assert_eq!(a, ppp_drop(1e-3, 50.0, 99));
        assert_ne!(a, ppp_drop(1e-3, 50.0, 100));
        for &r in &a.gu_radii {
            assert!((0.0..=50.0).contains(&r));
        }
        if !a.gu_radii.is_empty() {
            assert_eq!(a.edge_radius, a.gu_radii.iter().copied().reduce(f64::max));
        }
    }

    #[test]
    fn empty_drop_has_zero_rates() {
        // density so low that the first drop is empty for this seed range
        let s = Scenario::default();
        let empty = (0..200)
            .map(|seed| ppp_drop(1e-6, 50.0, seed))
            .find(|d| d.gu_radii.is_empty())
            .expect("an empty realization");
        assert_eq!(empty.edge_radius, None);
        let rated = empty.with_rates(0.2, 100.0, &s);
        assert_eq!(rated.rates, Some(EdgeRates { low: 0.0, full: 0.0 }));
    }

    #[test]
    fn count_mean_and_empty_probability() {
        let s = Scenario::default();
        let cdf = mc_edge_distribution(&s, 100_000, 3).unwrap();
        let mean = PI * 1e-3 * 2500.0;
        assert!(
            (cdf.mean_count - mean).abs() <= 3.0 * (mean / 1e5).sqrt(),
            "{}",
            cdf.mean_count
        );
        let p_empty = (-mean).exp();
        assert!((cdf.empty_fraction - p_empty).abs() <= 4.0 * (p_empty / 1e5).sqrt() + 1e-5);
        assert_eq!(*cdf.cdf.last().unwrap(), 1.0);
        assert_eq!(cdf.r.len(), 100);
    }

    #[test]
    fn doubling_density_shifts_mass_outward() {
        let s = Scenario::default();
        let mut dense = s;
        dense.geom.lambda_g *= 2.0;
        let a = mc_edge_distribution(&s, 20_000, 5).unwrap();
        let b = mc_edge_distribution(&dense, 20_000, 5).unwrap();
        for i in 40..99 {
            assert!(b.cdf[i] < a.cdf[i], "r = {}", a.r[i]);
        }
    }

    #[test]
    fn zero_power_zero_rates() {
        let m = mc_edge_rate(&Scenario::default(), 0.0, 100.0, 1000, 1).unwrap();
        assert_eq!((m.mean_low, m.mean_full), (0.0, 0.0));
    }

    #[test]
    fn bit_identical_reruns() {
        let s = Scenario::default();
        assert_eq!(
            mc_edge_rate(&s, 0.2, 90.0, 5000, 11).unwrap(),
            mc_edge_rate(&s, 0.2, 90.0, 5000, 11).unwrap()
        );
        assert_eq!(
            mc_edge_distribution(&s, 5000, 11).unwrap(),
            mc_edge_distribution(&s, 5000, 11).unwrap()
        );
    }

    #[test]
    fn too_few_drops() {
        assert!(mc_edge_rate(&Scenario::default(), 0.2, 90.0, 999, 1).is_err());
        assert!(mc_edge_distribution(&Scenario::default(), 10, 1).is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.total(), 1000.0);
    }
}
