//! The Poissonized companion of the local empirical process and the
//! diagnostics built on it: covariance convergence, the Poissonization
//! decoupling inequality, Gaussian marginal comparison, and the large
//! deviation tail rate.
//!
//! The Poissonized process replaces the sample size by an independent
//! Poisson count with the same rate:
//! `Pi_n(z, g) = (b_n sqrt(f(z)))^{-1} sum_{j <= eta} {g(h^{-1/d}(z - Z_j)) - E g}`
//! with `b_n = sqrt(2 n h log(1/h))` and the empty sum equal to zero.

use crate::density::{expectation_h, expectation_product_h, Density};
use crate::error::{Error, Result};
use crate::functions::FunctionNet;
use crate::limit::LimitBallModel;
use crate::process::BandwidthSchedule;
use crate::rng::{
    rep_rng, STREAM_FACT6_POISSON, STREAM_FACT6_SAMPLE, STREAM_GAUSS, STREAM_POISSON,
};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::Serialize;

/// `b_n = sqrt(2 n h log(1/h))`.
pub fn b_n(n: u64, h: f64) -> f64 {
    (2.0 * n as f64 * h * (1.0 / h).ln()).sqrt()
}

/// `eps_n = (2 log(1/h))^{-1}`, the large-deviation speed.
pub fn eps_n(h: f64) -> f64 {
    1.0 / (2.0 * (1.0 / h).ln())
}

/// One draw of the Poissonized process over a net.
#[derive(Debug, Clone, Serialize)]
pub struct PoissonEval {
    pub psi: Vec<f64>,
    pub eta: u64,
    pub n: u64,
    pub h: f64,
    pub z: Vec<f64>,
    pub net_id: String,
}

/// Reusable evaluation context for replication loops: centering terms and
/// window geometry are computed once per `(density, n, z, h, net)`.
pub struct PoissonSampler<'a> {
    density: &'a Density,
    net: &'a FunctionNet,
    pub n: u64,
    pub h: f64,
    z: Vec<f64>,
    scale: f64,
    window_lo: Vec<f64>,
    window_hi: Vec<f64>,
    centering: Vec<f64>,
    norm: f64,
}

impl<'a> PoissonSampler<'a> {
    pub fn new(
        density: &'a Density,
        n: u64,
        z: &[f64],
        h: f64,
        net: &'a FunctionNet,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("poisson rate n must be >= 1".into()));
        }
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidParameter(format!("bad bandwidth {h}")));
        }
        let d = density.dim();
        if z.len() != d || net.dim() != d {
            return Err(Error::InvalidParameter("dimension mismatch".into()));
        }
        let f_at_z = density.pdf(z);
        if !(f_at_z > 0.0) {
            return Err(Error::Domain(format!(
                "poissonized process needs f(z) > 0 at z = {z:?}"
            )));
        }
        let s = h.powf(1.0 / d as f64);
        let (glo, ghi) = net.support_box();
        let mut window_lo = vec![0.0; d];
        let mut window_hi = vec![0.0; d];
        for i in 0..d {
            let pad = 1e-12 * (1.0 + z[i].abs() + s);
            window_lo[i] = z[i] - s * ghi[i] - pad;
            window_hi[i] = z[i] - s * glo[i] + pad;
        }
        let centering: Vec<f64> = net
            .members
            .iter()
            .map(|g| expectation_h(density, g, h, z))
            .collect::<Result<_>>()?;
        Ok(PoissonSampler {
            density,
            net,
            n,
            h,
            z: z.to_vec(),
            scale: s,
            window_lo,
            window_hi,
            centering,
            norm: b_n(n, h) * f_at_z.sqrt(),
        })
    }

    /// The process value for an explicit point list standing in for the
    /// `eta` Poisson points (pedagogical / golden-test pathway).
    pub fn eval_points(&self, points: &[f64]) -> Vec<f64> {
        let d = self.z.len();
        debug_assert_eq!(points.len() % d, 0);
        let eta = (points.len() / d) as u64;
        let q = self.net.len();
        let mut sums = vec![0.0; q];
        let mut u = vec![0.0; d];
        for p in points.chunks_exact(d) {
            let inside = (0..d).all(|i| p[i] >= self.window_lo[i] && p[i] <= self.window_hi[i]);
            if !inside {
                continue;
            }
            for i in 0..d {
                u[i] = (self.z[i] - p[i]) / self.scale;
            }
            for (l, g) in self.net.members.iter().enumerate() {
                sums[l] += g.evaluate(&u);
            }
        }
        (0..q)
            .map(|l| (sums[l] - eta as f64 * self.centering[l]) / self.norm)
            .collect()
    }

    /// One replication: `eta ~ Poisson(n)`, then `eta` i.i.d. points, then
    /// the centered normalized sum. Deterministic in `(seed, rep)`.
    pub fn draw(&self, seed: u64, rep: u64) -> PoissonEval {
        self.draw_stream(seed, STREAM_POISSON, rep)
    }

    fn draw_stream(&self, seed: u64, stream: u64, rep: u64) -> PoissonEval {
        let mut rng = rep_rng(seed, stream, rep);
        let eta = Poisson::new(self.n as f64).expect("positive rate").sample(&mut rng) as u64;
        let d = self.z.len();
        let q = self.net.len();
        let mut sums = vec![0.0; q];
        let mut p = vec![0.0; d];
        let mut u = vec![0.0; d];
        for _ in 0..eta {
            for (m, o) in self.density.marginals().iter().zip(p.iter_mut()) {
                let v: f64 = rng.random();
                *o = m.quantile(v);
            }
            let inside = (0..d).all(|i| p[i] >= self.window_lo[i] && p[i] <= self.window_hi[i]);
            if !inside {
                continue;
            }
            for i in 0..d {
                u[i] = (self.z[i] - p[i]) / self.scale;
            }
            for (l, g) in self.net.members.iter().enumerate() {
                sums[l] += g.evaluate(&u);
            }
        }
        let psi = (0..q)
            .map(|l| (sums[l] - eta as f64 * self.centering[l]) / self.norm)
            .collect();
        PoissonEval {
            psi,
            eta,
            n: self.n,
            h: self.h,
            z: self.z.clone(),
            net_id: self.net.id.clone(),
        }
    }
}

/// Convenience wrapper for a single draw.
pub fn poissonized_process(
    density: &Density,
    n: u64,
    z: &[f64],
    h: f64,
    net: &FunctionNet,
    seed: u64,
    rep: u64,
) -> Result<PoissonEval> {
    Ok(PoissonSampler::new(density, n, z, h, net)?.draw(seed, rep))
}

/// The exact covariance matrix of the Poissonized process over the net:
/// `sigma_n(g_l, g_k) = n (b_n^2 f(z))^{-1} cov(g_l(h^{-1/d}(z-Z)), g_k(...))`,
/// row-major.
pub fn sigma_n_matrix(
    density: &Density,
    n: u64,
    z: &[f64],
    h: f64,
    net: &FunctionNet,
) -> Result<Vec<f64>> {
    let q = net.len();
    let f_at_z = density.pdf(z);
    if !(f_at_z > 0.0) {
        return Err(Error::Domain("sigma_n needs f(z) > 0".into()));
    }
    let means: Vec<f64> = net
        .members
        .iter()
        .map(|g| expectation_h(density, g, h, z))
        .collect::<Result<_>>()?;
    let b2 = b_n(n, h).powi(2);
    let scale = n as f64 / (b2 * f_at_z);
    let mut out = vec![0.0; q * q];
    for l in 0..q {
        for k in l..q {
            let second =
                expectation_product_h(density, &net.members[l], &net.members[k], h, z)?;
            let v = scale * (second - means[l] * means[k]);
            out[l * q + k] = v;
            out[k * q + l] = v;
        }
    }
    Ok(out)
}

/// Monte Carlo covariance of the Poissonized process scaled by
/// `2 log(1/h)`, minus the net's Gram matrix.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceReport {
    /// row-major `q x q` deviations
    pub deviations: Vec<f64>,
    pub max_abs_deviation: f64,
    /// standard error of the scaled covariance estimate at the worst entry
    pub stderr_at_max: f64,
    pub reps: u64,
    pub n: u64,
    pub h: f64,
}

pub fn covariance_check(
    density: &Density,
    n: u64,
    z: &[f64],
    h: f64,
    net: &FunctionNet,
    reps: u64,
    seed: u64,
) -> Result<CovarianceReport> {
    if reps < 2 {
        return Err(Error::InvalidParameter("need reps >= 2".into()));
    }
    let sampler = PoissonSampler::new(density, n, z, h, net)?;
    let q = net.len();
    let mut mean = vec![0.0; q];
    let mut prod = vec![0.0; q * q];
    let mut prod_sq = vec![0.0; q * q];
    for rep in 0..reps {
        let eval = sampler.draw(seed, rep);
        for l in 0..q {
            mean[l] += eval.psi[l];
            for k in l..q {
                let p = eval.psi[l] * eval.psi[k];
                prod[l * q + k] += p;
                prod_sq[l * q + k] += p * p;
            }
        }
    }
    let rf = reps as f64;
    mean.iter_mut().for_each(|m| *m /= rf);
    let scale = 2.0 * (1.0 / h).ln();
    let gram = net.gram()?;
    let mut deviations = vec![0.0; q * q];
    let mut max_abs = 0.0f64;
    let mut stderr_at_max = 0.0f64;
    for l in 0..q {
        for k in l..q {
            let sum_p = prod[l * q + k];
            let cov = (sum_p - rf * mean[l] * mean[k]) / (rf - 1.0);
            let dev = scale * cov - gram[l * q + k];
            deviations[l * q + k] = dev;
            deviations[k * q + l] = dev;
            if dev.abs() > max_abs {
                max_abs = dev.abs();
                let var_p = (prod_sq[l * q + k] / rf - (sum_p / rf).powi(2)).max(0.0);
                stderr_at_max = scale * (var_p / rf).sqrt();
            }
        }
    }
    Ok(CovarianceReport {
        deviations,
        max_abs_deviation: max_abs,
        stderr_at_max,
        reps,
        n,
        h,
    })
}

/// Outcome of the Poissonization decoupling check: Monte Carlo estimates of
/// the joint box-event probabilities on both the fixed-n and Poissonized
/// sides, and whether the factor-2 domination holds within noise slack.
#[derive(Debug, Clone, Serialize)]
pub struct Fact6Report {
    /// exact value of the window-probability condition (must be <= 1/2)
    pub condition_sum: f64,
    pub p_sample: f64,
    pub p_poisson: f64,
    pub se_sample: f64,
    pub se_poisson: f64,
    /// `p_sample <= 2 p_poisson + 3 (se_sample + 2 se_poisson)`
    pub holds: bool,
    pub reps: u64,
}

/// Joint box events for the processes at `z_list`, with per-point radii:
/// event `i` is `max_l |psi_i(g_l)| <= radii[i]`.
pub fn fact6_check(
    density: &Density,
    n: u64,
    z_list: &[Vec<f64>],
    h: f64,
    net: &FunctionNet,
    radii: &[f64],
    reps: u64,
    seed: u64,
) -> Result<Fact6Report> {
    if z_list.is_empty() || z_list.len() != radii.len() {
        return Err(Error::InvalidParameter(
            "need one radius per evaluation point".into(),
        ));
    }
    let d = density.dim();
    let s = h.powf(1.0 / d as f64);
    // exact decoupling condition: sum of window probabilities <= 1/2,
    // windows taken over the net's reference cube
    let mut condition_sum = 0.0;
    for z in z_list {
        let lo: Vec<f64> = (0..d).map(|i| z[i] - s * net.domain_hi[i]).collect();
        let hi: Vec<f64> = (0..d).map(|i| z[i] - s * net.domain_lo[i]).collect();
        condition_sum += density.box_probability(&lo, &hi);
    }
    if condition_sum > 0.5 {
        return Err(Error::Domain(format!(
            "decoupling condition violated: window probabilities sum to {condition_sum} > 1/2"
        )));
    }
    let samplers: Vec<PoissonSampler> = z_list
        .iter()
        .map(|z| PoissonSampler::new(density, n, z, h, net))
        .collect::<Result<_>>()?;
    let m = z_list.len();
    let q = net.len();
    let mut hits_sample = 0u64;
    let mut hits_poisson = 0u64;
    let mut point = vec![0.0; d];
    let mut u = vec![0.0; d];
    for rep in 0..reps {
        // fixed-n side: n points, evaluated against every z_i
        let mut rng = rep_rng(seed, STREAM_FACT6_SAMPLE, rep);
        let mut sums = vec![0.0; m * q];
        for _ in 0..n {
            for (mg, o) in density.marginals().iter().zip(point.iter_mut()) {
                let v: f64 = rng.random();
                *o = mg.quantile(v);
            }
            for (i, sampler) in samplers.iter().enumerate() {
                let inside = (0..d)
                    .all(|ax| point[ax] >= sampler.window_lo[ax] && point[ax] <= sampler.window_hi[ax]);
                if !inside {
                    continue;
                }
                for ax in 0..d {
                    u[ax] = (sampler.z[ax] - point[ax]) / sampler.scale;
                }
                for (l, g) in net.members.iter().enumerate() {
                    sums[i * q + l] += g.evaluate(&u);
                }
            }
        }
        let mut all_in = true;
        'outer: for (i, sampler) in samplers.iter().enumerate() {
            for l in 0..q {
                let psi = (sums[i * q + l] - n as f64 * sampler.centering[l]) / sampler.norm;
                if psi.abs() > radii[i] {
                    all_in = false;
                    break 'outer;
                }
            }
        }
        if all_in {
            hits_sample += 1;
        }

        // Poissonized side: one eta and one point cloud shared by every z_i
        let mut rng = rep_rng(seed, STREAM_FACT6_POISSON, rep);
        let eta = Poisson::new(n as f64).expect("positive rate").sample(&mut rng) as u64;
        let mut sums = vec![0.0; m * q];
        for _ in 0..eta {
            for (mg, o) in density.marginals().iter().zip(point.iter_mut()) {
                let v: f64 = rng.random();
                *o = mg.quantile(v);
            }
            for (i, sampler) in samplers.iter().enumerate() {
                let inside = (0..d)
                    .all(|ax| point[ax] >= sampler.window_lo[ax] && point[ax] <= sampler.window_hi[ax]);
                if !inside {
                    continue;
                }
                for ax in 0..d {
                    u[ax] = (sampler.z[ax] - point[ax]) / sampler.scale;
                }
                for (l, g) in net.members.iter().enumerate() {
                    sums[i * q + l] += g.evaluate(&u);
                }
            }
        }
        let mut all_in = true;
        'outer2: for (i, sampler) in samplers.iter().enumerate() {
            for l in 0..q {
                let psi = (sums[i * q + l] - eta as f64 * sampler.centering[l]) / sampler.norm;
                if psi.abs() > radii[i] {
                    all_in = false;
                    break 'outer2;
                }
            }
        }
        if all_in {
            hits_poisson += 1;
        }
    }
    let rf = reps as f64;
    let p_sample = hits_sample as f64 / rf;
    let p_poisson = hits_poisson as f64 / rf;
    let se_sample = (p_sample * (1.0 - p_sample) / rf).sqrt();
    let se_poisson = (p_poisson * (1.0 - p_poisson) / rf).sqrt();
    let holds = p_sample <= 2.0 * p_poisson + 3.0 * (se_sample + 2.0 * se_poisson);
    Ok(Fact6Report {
        condition_sum,
        p_sample,
        p_poisson,
        se_sample,
        se_poisson,
        holds,
        reps,
    })
}

/// Kolmogorov-Smirnov distances between Monte Carlo marginals of the
/// Poissonized process and Gaussian draws with the exact matched covariance,
/// one row per `n`.
#[derive(Debug, Clone, Serialize)]
pub struct GaussianCompareRow {
    pub n: u64,
    pub h: f64,
    /// one KS distance per net member
    pub ks: Vec<f64>,
    /// two-sample 99% null critical value at these sample sizes
    pub ks_crit_99: f64,
}

pub fn gaussian_compare(
    density: &Density,
    ns: &[u64],
    z: &[f64],
    schedule: &BandwidthSchedule,
    net: &FunctionNet,
    reps: u64,
    seed: u64,
) -> Result<Vec<GaussianCompareRow>> {
    if reps < 10 {
        return Err(Error::InvalidParameter("need reps >= 10".into()));
    }
    let q = net.len();
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let h = schedule.h(n)?;
        let sampler = PoissonSampler::new(density, n, z, h, net)?;
        let mut marginals: Vec<Vec<f64>> = vec![Vec::with_capacity(reps as usize); q];
        for rep in 0..reps {
            let eval = sampler.draw(seed, rep);
            for l in 0..q {
                marginals[l].push(eval.psi[l]);
            }
        }
        // exact-covariance Gaussian companion draws
        let sigma = sigma_n_matrix(density, n, z, h, net)?;
        let root = psd_root(&sigma, q)?;
        let mut gauss: Vec<Vec<f64>> = vec![Vec::with_capacity(reps as usize); q];
        let mut std = vec![0.0; q];
        for rep in 0..reps {
            let mut rng = rep_rng(seed, STREAM_GAUSS, rep);
            for x in std.iter_mut() {
                *x = StandardNormal.sample(&mut rng);
            }
            for l in 0..q {
                let v: f64 = (0..q).map(|j| root[l * q + j] * std[j]).sum();
                gauss[l].push(v);
            }
        }
        let ks: Vec<f64> = (0..q)
            .map(|l| ks_two_sample(marginals[l].clone(), gauss[l].clone()))
            .collect();
        rows.push(GaussianCompareRow {
            n,
            h,
            ks,
            ks_crit_99: ks_two_sample_critical(0.01, reps as usize, reps as usize),
        });
    }
    Ok(rows)
}

/// Symmetric PSD square root via eigendecomposition with clamped spectrum.
fn psd_root(sigma: &[f64], q: usize) -> Result<Vec<f64>> {
    let model = LimitBallModel::new(sigma, q)?;
    let (map, r) = model.whitened_map();
    // map is q x r with map map^T = sigma
    let mut out = vec![0.0; q * q];
    for l in 0..q {
        for j in 0..r {
            out[l * q + j] = map[l * r + j];
        }
    }
    Ok(out)
}

/// Two-sample Kolmogorov-Smirnov distance `sup_x |F_a(x) - F_b(x)|`; ties
/// across the samples are processed together. Two identical constant
/// samples are at distance zero.
pub fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "empty sample in KS");
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < n || j < m {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    d
}

/// Asymptotic two-sample critical value
/// `c(alpha) sqrt((n + m)/(n m))` with `c(alpha) = sqrt(-ln(alpha/2)/2)`.
pub fn ks_two_sample_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// One row of the large-deviation tail diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct LdpRow {
    pub n: u64,
    pub h: f64,
    pub eps_n: f64,
    pub hits: u64,
    pub p_hat: f64,
    /// `eps_n log p_hat`, absent when no hits landed
    pub eps_log_p: Option<f64>,
    /// one-sided bound `eps_n log(1/reps)` reported instead on zero hits
    pub zero_hit_bound: Option<f64>,
    /// `-I(F)` for `F = {max_l |psi_l| >= lambda}`
    pub theoretical: f64,
}

/// Estimate `eps_n log P{max_l |Pi_n(g_l)| >= lambda}` across `ns` and pair
/// it with the closed-form rate `-lambda^2 / (2 max_l Sigma_ll)`.
#[allow(clippy::too_many_arguments)]
pub fn ldp_tail_rate(
    density: &Density,
    ns: &[u64],
    z: &[f64],
    schedule: &BandwidthSchedule,
    net: &FunctionNet,
    lambda: f64,
    reps: u64,
    seed: u64,
) -> Result<Vec<LdpRow>> {
    if lambda < 0.0 {
        return Err(Error::InvalidParameter("lambda must be nonnegative".into()));
    }
    let q = net.len();
    let mut max_diag = 0.0f64;
    for l in 0..q {
        max_diag = max_diag.max(net.gram_entry(l, l)?);
    }
    let theoretical = if lambda == 0.0 {
        0.0
    } else if max_diag > 0.0 {
        -lambda * lambda / (2.0 * max_diag)
    } else {
        f64::NEG_INFINITY
    };
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let h = schedule.h(n)?;
        let sampler = PoissonSampler::new(density, n, z, h, net)?;
        let mut hits = 0u64;
        for rep in 0..reps {
            let eval = sampler.draw(seed, rep);
            let max_abs = eval.psi.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            if max_abs >= lambda {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / reps as f64;
        let eps = eps_n(h);
        let (eps_log_p, zero_hit_bound) = if hits > 0 {
            (Some(eps * p_hat.ln()), None)
        } else {
            (None, Some(eps * (1.0 / reps as f64).ln()))
        };
        rows.push(LdpRow {
            n,
            h,
            eps_n: eps,
            hits,
            p_hat,
            eps_log_p,
            zero_hit_bound,
            theoretical,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{interval_net, ComboTerm, FunctionDescriptor, FunctionNet, Kernel1d};

    fn uniform01() -> Density {
        Density::uniform_box(vec![0.0], vec![1.0]).unwrap()
    }

    #[test]
    fn single_point_worked_example() {
        // eta = 1 with the point 0.55, rate n = 2, z = 0.5, h = 0.2,
        // g = 1_{[-1/2, 0]}: centered value 0.9, b_n = sqrt(0.8 ln 5)
        let f = uniform01();
        let g = FunctionDescriptor::rect(vec![-0.5], vec![0.0]).unwrap();
        let net = FunctionNet::from_members("w", vec![g], None).unwrap();
        let sampler = PoissonSampler::new(&f, 2, &[0.5], 0.2, &net).unwrap();
        let psi = sampler.eval_points(&[0.55]);
        let expect = 0.9 / (0.8 * 5.0f64.ln()).sqrt();
        assert!((psi[0] - expect).abs() < 1e-12);
        assert!((psi[0] - 0.79321).abs() < 5e-4, "{}", psi[0]);
    }

    #[test]
    fn empty_sum_is_exactly_zero() {
        let f = uniform01();
        let net = interval_net(&[0.5, 1.0]).unwrap();
        // tiny rate so eta = 0 happens fast
        let sampler = PoissonSampler::new(&f, 1, &[0.5], 0.2, &net).unwrap();
        let mut found = false;
        for rep in 0..200 {
            let eval = sampler.draw(11, rep);
            if eval.eta == 0 {
                assert!(eval.psi.iter().all(|&v| v == 0.0));
                found = true;
                break;
            }
        }
        assert!(found, "no eta = 0 replication in 200 draws at rate 1");
    }

    #[test]
    fn determinism_in_seed_and_rep() {
        let f = uniform01();
        let net = interval_net(&[0.5, 1.0]).unwrap();
        let sampler = PoissonSampler::new(&f, 50, &[0.5], 0.1, &net).unwrap();
        let a = sampler.draw(5, 3);
        let b = sampler.draw(5, 3);
        assert_eq!(a.psi, b.psi);
        assert_eq!(a.eta, b.eta);
        let c = sampler.draw(5, 4);
        assert!(a.psi != c.psi || a.eta != c.eta);
    }

    #[test]
    fn mean_zero_within_monte_carlo_error() {
        let f = uniform01();
        let net = interval_net(&[0.4, 1.0]).unwrap();
        let sampler = PoissonSampler::new(&f, 100, &[0.5], 0.1, &net).unwrap();
        let reps = 10_000u64;
        let q = net.len();
        let mut sum = vec![0.0; q];
        let mut sum_sq = vec![0.0; q];
        for rep in 0..reps {
            let e = sampler.draw(21, rep);
            for l in 0..q {
                sum[l] += e.psi[l];
                sum_sq[l] += e.psi[l] * e.psi[l];
            }
        }
        for l in 0..q {
            let mean = sum[l] / reps as f64;
            let var = (sum_sq[l] / reps as f64 - mean * mean).max(0.0);
            let se = (var / reps as f64).sqrt();
            assert!(
                mean.abs() <= 4.0 * se,
                "member {l}: mean {mean} exceeds 4 se {se}"
            );
        }
    }

    #[test]
    fn sigma_n_matches_closed_form_uniform() {
        // uniform f, interval net: sigma_n[l][k] = (min(t_l,t_k) - h t_l t_k)/(2 log(1/h))
        let f = uniform01();
        let ts = [0.3, 0.8];
        let net = interval_net(&ts).unwrap();
        let (n, h) = (1000u64, 0.05);
        let got = sigma_n_matrix(&f, n, &[0.5], h, &net).unwrap();
        for l in 0..2 {
            for k in 0..2 {
                let expect =
                    (ts[l].min(ts[k]) - h * ts[l] * ts[k]) / (2.0 * (1.0 / h).ln());
                assert!(
                    (got[l * 2 + k] - expect).abs() < 1e-10,
                    "({l},{k}): {} vs {expect}",
                    got[l * 2 + k]
                );
            }
        }
    }

    #[test]
    fn covariance_check_small() {
        let f = uniform01();
        let net = interval_net(&[0.5, 1.0]).unwrap();
        let rep = covariance_check(&f, 2000, &[0.5], 0.05, &net, 4000, 7).unwrap();
        assert!(
            rep.max_abs_deviation <= 0.06 + 4.0 * rep.stderr_at_max,
            "max dev {} stderr {}",
            rep.max_abs_deviation,
            rep.stderr_at_max
        );
    }

    #[test]
    fn covariance_check_zero_function_net() {
        let f = uniform01();
        let zero = FunctionDescriptor::combo(vec![ComboTerm {
            coeff: 0.0,
            function: FunctionDescriptor::rect(vec![0.0], vec![1.0]).unwrap(),
        }])
        .unwrap();
        let net = FunctionNet::from_members("zero", vec![zero], None).unwrap();
        let rep = covariance_check(&f, 100, &[0.5], 0.1, &net, 100, 3).unwrap();
        assert_eq!(rep.max_abs_deviation, 0.0);
    }

    #[test]
    fn stderr_scales_with_reps() {
        let f = uniform01();
        let net = interval_net(&[1.0]).unwrap();
        let a = covariance_check(&f, 500, &[0.5], 0.1, &net, 2000, 13).unwrap();
        let b = covariance_check(&f, 500, &[0.5], 0.1, &net, 8000, 13).unwrap();
        let ratio = a.stderr_at_max / b.stderr_at_max;
        assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn fact6_examples() {
        let f = uniform01();
        let net = interval_net(&[0.5, 1.0]).unwrap();
        // condition: windows z - h [0,1] have probability h each
        let zs = vec![vec![0.3], vec![0.6]];
        let rep = fact6_check(&f, 50, &zs, 0.15, &net, &[0.9, 0.9], 4000, 2).unwrap();
        assert!((rep.condition_sum - 0.3).abs() < 1e-12);
        assert!(rep.holds, "{rep:?}");
        // whole-space events: both probabilities one
        let rep = fact6_check(&f, 50, &zs, 0.15, &net, &[1e9, 1e9], 500, 2).unwrap();
        assert_eq!(rep.p_sample, 1.0);
        assert_eq!(rep.p_poisson, 1.0);
        assert!(rep.holds);
        // violated decoupling condition is refused with the computed sum
        let zs4 = vec![vec![0.2], vec![0.4], vec![0.6], vec![0.8]];
        let err = fact6_check(&f, 50, &zs4, 0.2, &net, &[1.0; 4], 100, 2);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn ks_two_sample_basics() {
        let a = vec![1.0, 2.0, 3.0];
        let b = vec![1.0, 2.0, 3.0];
        assert_eq!(ks_two_sample(a, b), 0.0);
        let a = vec![0.0, 0.0, 0.0];
        let b = vec![1.0, 1.0, 1.0];
        assert_eq!(ks_two_sample(a, b), 1.0);
        // identical generators stay under the 99% critical value
        let f = uniform01();
        let x = f.sample_rep(2000, 3, 0).points;
        let y = f.sample_rep(2000, 3, 1).points;
        let d = ks_two_sample(x, y);
        assert!(d < ks_two_sample_critical(0.01, 2000, 2000), "{d}");
    }

    #[test]
    fn gaussian_compare_runs_and_degenerate_entry() {
        let f = uniform01();
        let zero = FunctionDescriptor::combo(vec![ComboTerm {
            coeff: 0.0,
            function: FunctionDescriptor::rect(vec![0.0], vec![1.0]).unwrap(),
        }])
        .unwrap();
        let live = FunctionDescriptor::rect(vec![0.0], vec![1.0]).unwrap();
        let net = FunctionNet::from_members("mixed", vec![live, zero], None).unwrap();
        let sched = BandwidthSchedule::Power { alpha: 0.5 };
        let rows = gaussian_compare(&f, &[400], &[0.5], &sched, &net, 800, 19).unwrap();
        assert_eq!(rows.len(), 1);
        // degenerate entry: both marginals identically zero
        assert_eq!(rows[0].ks[1], 0.0);
        // live entry: close to its Gaussian companion at this scale
        assert!(rows[0].ks[0] < 3.0 * rows[0].ks_crit_99, "{:?}", rows[0].ks);
    }

    #[test]
    fn ldp_theoretical_values() {
        let f = uniform01();
        let k = FunctionDescriptor::kernel(Kernel1d::Uniform, 1).unwrap();
        let net = FunctionNet::from_members("k", vec![k], None).unwrap();
        let sched = BandwidthSchedule::Power { alpha: 0.5 };
        let rows = ldp_tail_rate(&f, &[100], &[0.5], &sched, &net, 1.0, 2000, 5).unwrap();
        assert!((rows[0].theoretical + 0.5).abs() < 1e-12);
        // lambda = 0: the whole space, eps log 1 = 0 = -I
        let rows = ldp_tail_rate(&f, &[100], &[0.5], &sched, &net, 0.0, 100, 5).unwrap();
        assert_eq!(rows[0].theoretical, 0.0);
        assert_eq!(rows[0].eps_log_p, Some(0.0));
    }
}
