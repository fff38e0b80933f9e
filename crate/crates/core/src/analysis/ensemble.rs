use std::fmt::Write as _;

use rayon::prelude::*;

use crate::env::phi_alpha;
use crate::error::{Error, Result};
use crate::kernel::{HeatKernelSeries, SeriesPoint};
use crate::seed::member_seed;

/// Quantile levels reported by [`quantile_band`].
pub const BAND_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Member kernels of an ensemble on a common time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub members: Vec<HeatKernelSeries>,
}

impl Ensemble {
    pub fn times(&self) -> Vec<f64> {
        self.members[0].times()
    }

    /// Values of every member at time index `i`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.members.iter().map(|m| m.points[i].value).collect()
    }
}

/// Solves `m` environments in parallel. Member `i` gets
/// `member_seed(master, i)`, so growing `m` keeps earlier members.
pub fn sample_ensemble<F>(sampler: F, m: usize, master_seed: u64) -> Result<Ensemble>
where
    F: Fn(u64) -> Result<HeatKernelSeries> + Sync,
{
    if m == 0 {
        return Err(Error::param("M", "empty ensemble"));
    }
    let seeds: Vec<u64> = (0..m).map(|i| member_seed(master_seed, i)).collect();
    let results: Vec<Result<HeatKernelSeries>> = seeds.par_iter().map(|&s| sampler(s)).collect();
    let mut members = Vec::with_capacity(m);
    for (seed, r) in seeds.iter().zip(results) {
        members.push(r.map_err(|e| Error::Member {
            seed: *seed,
            source: Box::new(e),
        })?);
    }
    let times = members[0].times();
    if let Some((i, _)) = members.iter().enumerate().find(|(_, s)| s.times() != times) {
        return Err(Error::Data(format!(
            "member with seed {} has a different time grid",
            seeds[i]
        )));
    }
    Ok(Ensemble {
        master_seed,
        seeds,
        members,
    })
}

/// Pointwise ensemble mean with a 95% normal interval.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealedKernel {
    /// Mean series; the error column is the CI half-width.
    pub mean: HeatKernelSeries,
    pub std_dev: Vec<f64>,
    pub members: usize,
}

pub fn annealed_kernel<F>(sampler: F, m: usize, master_seed: u64) -> Result<AnnealedKernel>
where
    F: Fn(u64) -> Result<HeatKernelSeries> + Sync,
{
    if m < 20 {
        return Err(Error::param("M", format!("{m} < 20 environments")));
    }
    annealed_mean(&sample_ensemble(sampler, m, master_seed)?)
}

/// Mean and CI of an existing ensemble.
pub fn annealed_mean(ensemble: &Ensemble) -> Result<AnnealedKernel> {
    let m = ensemble.members.len();
    let first = &ensemble.members[0];
    let mut mean = HeatKernelSeries::new(format!("annealed-{}", first.model), first.source, first.target, first.method)
        .with_param("M", m)
        .with_param("master_seed", ensemble.master_seed);
    let mut std_dev = Vec::with_capacity(first.len());
    for (i, t) in ensemble.times().into_iter().enumerate() {
        let col = ensemble.column(i);
        // Shifted by the first member so an identical ensemble is exact.
        let base = col[0];
        let mu = base + col.iter().map(|v| v - base).sum::<f64>() / m as f64;
        let var = if m > 1 {
            col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (m - 1) as f64
        } else {
            0.0
        };
        let sd = var.sqrt();
        std_dev.push(sd);
        mean.points.push(SeriesPoint {
            time: t,
            value: mu,
            error: 1.96 * sd / (m as f64).sqrt(),
        });
    }
    Ok(AnnealedKernel {
        mean,
        std_dev,
        members: m,
    })
}

/// Empirical quantiles of `p_t / φ_α(t)` across environments.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileBand {
    pub alpha: f64,
    pub times: Vec<f64>,
    /// One row per time, columns at [`BAND_LEVELS`].
    pub quantiles: Vec<[f64; 5]>,
    pub members: usize,
}

impl QuantileBand {
    /// 95% / 5% quantile ratio at time index `i`.
    pub fn spread(&self, i: usize) -> f64 {
        self.quantiles[i][4] / self.quantiles[i][0]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# alpha {}", self.alpha);
        let _ = writeln!(out, "# members {}", self.members);
        out.push_str("time,q05,q25,q50,q75,q95\n");
        for (t, q) in self.times.iter().zip(&self.quantiles) {
            let _ = writeln!(out, "{t},{},{},{},{},{}", q[0], q[1], q[2], q[3], q[4]);
        }
        out
    }
}

pub fn quantile_band<F>(sampler: F, m: usize, master_seed: u64, alpha: f64) -> Result<QuantileBand>
where
    F: Fn(u64) -> Result<HeatKernelSeries> + Sync,
{
    if m < 100 {
        return Err(Error::param("M", format!("{m} < 100 environments")));
    }
    band_of(&sample_ensemble(sampler, m, master_seed)?, alpha)
}

/// Quantile band of an existing ensemble.
pub fn band_of(ensemble: &Ensemble, alpha: f64) -> Result<QuantileBand> {
    let times = ensemble.times();
    let mut quantiles = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let phi = phi_alpha(t, alpha)?.value;
        let mut col: Vec<f64> = ensemble.column(i).into_iter().map(|v| v / phi).collect();
        col.sort_unstable_by(f64::total_cmp);
        quantiles.push(BAND_LEVELS.map(|q| quantile_sorted(&col, q)));
    }
    Ok(QuantileBand {
        alpha,
        times,
        quantiles,
        members: ensemble.members.len(),
    })
}

/// Linear-interpolation quantile (Hyndman–Fan type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Method;

    fn fixed(seed: u64) -> Result<HeatKernelSeries> {
        let mut s = HeatKernelSeries::new("fixed", 0, 0, Method::Uniformization);
        let shift = if seed == u64::MAX { 1.0 } else { 0.0 };
        for k in 1..=10 {
            s.points.push(SeriesPoint {
                time: k as f64 * 10.0,
                value: 0.3 / k as f64 + shift,
                error: 0.0,
            });
        }
        Ok(s)
    }

    #[test]
    fn degenerate_family_has_zero_width() {
        let a = annealed_kernel(fixed, 25, 1).unwrap();
        let single = fixed(0).unwrap();
        for (p, q) in a.mean.points.iter().zip(&single.points) {
            assert_eq!(p.value, q.value);
            assert_eq!(p.error, 0.0);
        }
        let b = quantile_band(fixed, 100, 1, 2.0).unwrap();
        assert!(b.quantiles.iter().all(|q| q.iter().all(|&v| v == q[0])));
    }

    #[test]
    fn failures_carry_the_member_seed() {
        let bad = member_seed(9, 3);
        let err = annealed_kernel(
            |s| if s == bad { Err(Error::Data("boom".into())) } else { fixed(s) },
            30,
            9,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Member { seed, .. } if seed == bad));
    }

    #[test]
    fn type7_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&v, 0.5), 3.0);
        assert_eq!(quantile_sorted(&v, 0.25), 2.0);
        assert!((quantile_sorted(&v, 0.05) - 1.2).abs() < 1e-12);
        assert_eq!(quantile_sorted(&v, 1.0), 5.0);
    }

    #[test]
    fn minimum_sizes() {
        assert!(annealed_kernel(fixed, 19, 0).is_err());
        assert!(quantile_band(fixed, 99, 0, 1.0).is_err());
    }
}
