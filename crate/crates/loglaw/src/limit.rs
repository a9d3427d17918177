//! The unit ball of the reproducing kernel Hilbert space induced by a net's
//! Gram matrix: the quadratic rate function, sup-norm distance to the ball,
//! epsilon-ball membership, and the closed form of the one-dimensional
//! (Strassen-type) rate.
//!
//! Restricted to a net `{g_1, ..., g_q}` with Gram matrix `Sigma`, the
//! achievable value vectors of the ball are exactly the ellipsoid
//! `{Sigma a : a^T Sigma a <= 1}` (projecting a representer onto the span of
//! the net members changes neither the constraint values nor decreases the
//! energy), the rate function is `I(psi) = psi^T Sigma^+ psi / 2` on the
//! range of `Sigma` and infinite off it, and distances are taken in the
//! max-norm. All net-restricted distances lower-bound their continuum
//! counterparts; the net mesh is reported alongside every distance.

use crate::error::{Error, Result};
use crate::functions::FunctionNet;
use nalgebra::{DMatrix, SymmetricEigen};

/// Relative eigenvalue cutoff below which directions count as null space.
pub const DEFAULT_RANK_CUTOFF: f64 = 1e-12;

/// Default absolute accuracy of the distance solver.
pub const DEFAULT_SOLVER_TOL: f64 = 1e-6;

/// Eigen-factorized Gram matrix with the solvers built on top of it.
#[derive(Debug, Clone)]
pub struct LimitBallModel {
    q: usize,
    gram: Vec<f64>,
    /// eigenvalues, descending, clamped at zero
    eigvals: Vec<f64>,
    /// eigenvectors, row-major `q x q`, row i = coordinates of e-vector i
    eigvecs: Vec<f64>,
    rank: usize,
    /// whitened ellipsoid map `M = U_r diag(sqrt(lambda))`, row-major `q x r`
    map: Vec<f64>,
    pub rank_cutoff_rel: f64,
    pub solver_tol: f64,
}

/// Result of a distance computation: the certified value, its bracket, and
/// the witness point on the ball.
#[derive(Debug, Clone)]
pub struct Projection {
    pub dist: f64,
    pub lower: f64,
    pub upper: f64,
    pub witness: Vec<f64>,
    pub iterations: usize,
}

impl LimitBallModel {
    pub fn new(gram: &[f64], q: usize) -> Result<Self> {
        Self::with_options(gram, q, DEFAULT_RANK_CUTOFF, DEFAULT_SOLVER_TOL)
    }

    pub fn from_net(net: &FunctionNet) -> Result<Self> {
        Self::new(net.gram()?, net.len())
    }

    pub fn with_options(
        gram: &[f64],
        q: usize,
        rank_cutoff_rel: f64,
        solver_tol: f64,
    ) -> Result<Self> {
        if q == 0 || gram.len() != q * q {
            return Err(Error::InvalidParameter("gram matrix shape mismatch".into()));
        }
        for l in 0..q {
            for k in 0..q {
                let asym = (gram[l * q + k] - gram[k * q + l]).abs();
                if asym > 1e-9 * (1.0 + gram[l * q + l].abs().max(gram[k * q + k].abs())) {
                    return Err(Error::InvalidParameter("gram matrix is not symmetric".into()));
                }
            }
        }
        let m = DMatrix::from_row_slice(q, q, gram);
        let eig = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..q).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let lambda_max = eig.eigenvalues[order[0]].max(0.0);
        let mut eigvals = Vec::with_capacity(q);
        let mut eigvecs = vec![0.0; q * q];
        for (row, &src) in order.iter().enumerate() {
            let lam = eig.eigenvalues[src];
            if lam < -1e-8 * (1.0 + lambda_max) {
                return Err(Error::InvalidParameter(format!(
                    "gram matrix is not positive semidefinite (eigenvalue {lam})"
                )));
            }
            eigvals.push(lam.max(0.0));
            for i in 0..q {
                eigvecs[row * q + i] = eig.eigenvectors[(i, src)];
            }
        }
        let cutoff = rank_cutoff_rel * lambda_max;
        let rank = eigvals.iter().take_while(|&&l| l > cutoff).count();
        let mut map = vec![0.0; q * rank];
        for j in 0..rank {
            let root = eigvals[j].sqrt();
            for i in 0..q {
                map[i * rank + j] = eigvecs[j * q + i] * root;
            }
        }
        Ok(LimitBallModel {
            q,
            gram: gram.to_vec(),
            eigvals,
            eigvecs,
            rank,
            map,
            rank_cutoff_rel,
            solver_tol,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn gram(&self) -> &[f64] {
        &self.gram
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigvals
    }

    /// The ellipsoid map `M` (row-major `q x rank`): the ball's value
    /// vectors are `{M w : ||w||_2 <= 1}`.
    pub fn whitened_map(&self) -> (&[f64], usize) {
        (&self.map, self.rank)
    }

    /// Eigen-basis coordinates `U psi` (descending eigenvalue order).
    fn eigcoords(&self, psi: &[f64]) -> Vec<f64> {
        (0..self.q)
            .map(|row| {
                (0..self.q)
                    .map(|i| self.eigvecs[row * self.q + i] * psi[i])
                    .sum()
            })
            .collect()
    }

    fn range_residual_sq(&self, coords: &[f64]) -> f64 {
        coords[self.rank..].iter().map(|y| y * y).sum()
    }

    /// True when `psi` lies in the range of the Gram matrix (up to the rank
    /// cutoff).
    pub fn in_range(&self, psi: &[f64]) -> bool {
        let coords = self.eigcoords(psi);
        let norm_sq: f64 = psi.iter().map(|v| v * v).sum();
        self.range_residual_sq(&coords).sqrt() <= 1e-9 * norm_sq.sqrt().max(1.0)
    }

    /// The rate function `I(psi) = psi^T Sigma^+ psi / 2`, infinite for
    /// vectors off the range of the Gram matrix.
    pub fn rate(&self, psi: &[f64]) -> f64 {
        assert_eq!(psi.len(), self.q, "rate: psi length mismatch");
        let coords = self.eigcoords(psi);
        let norm_sq: f64 = psi.iter().map(|v| v * v).sum();
        if self.range_residual_sq(&coords).sqrt() > 1e-9 * norm_sq.sqrt().max(1.0) {
            return f64::INFINITY;
        }
        0.5 * coords[..self.rank]
            .iter()
            .zip(&self.eigvals)
            .map(|(y, l)| y * y / l)
            .sum::<f64>()
    }

    /// Closed-form rate of the exceedance set `{psi : max_l |psi_l| >= lambda}`.
    pub fn exceedance_rate(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        let max_diag = (0..self.q)
            .map(|l| self.gram[l * self.q + l])
            .fold(0.0f64, f64::max);
        if max_diag <= 0.0 {
            return f64::INFINITY;
        }
        lambda * lambda / (2.0 * max_diag)
    }

    fn mul_map(&self, w: &[f64], out: &mut [f64]) {
        let r = self.rank;
        for i in 0..self.q {
            let row = &self.map[i * r..(i + 1) * r];
            out[i] = row.iter().zip(w).map(|(m, x)| m * x).sum();
        }
    }

    fn mul_map_t(&self, s: &[f64], out: &mut [f64]) {
        let r = self.rank;
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.q {
            let row = &self.map[i * r..(i + 1) * r];
            let si = s[i];
            for j in 0..r {
                out[j] += row[j] * si;
            }
        }
    }

    /// Cheap upper bound for [`Self::dist_to_unit_ball`]: the sup-norm
    /// residual of the clipped minimal-norm representer, a feasible point of
    /// the ellipsoid. Costs one `q x rank` matvec.
    pub fn dist_upper_bound(&self, psi: &[f64]) -> f64 {
        let r = self.rank;
        if r == 0 {
            return psi.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        }
        let coords = self.eigcoords(psi);
        let mut w: Vec<f64> = (0..r).map(|j| coords[j] / self.eigvals[j].sqrt()).collect();
        let norm: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1.0 {
            w.iter_mut().for_each(|x| *x /= norm);
        }
        let mut v = vec![0.0; self.q];
        self.mul_map(&w, &mut v);
        psi.iter()
            .zip(&v)
            .fold(0.0f64, |m, (p, vi)| m.max((p - vi).abs()))
    }

    /// `min {max_l |psi_l - v_l| : v in the net ellipsoid of the unit ball}`.
    ///
    /// Solved by bisection on the distance with an inner accelerated
    /// projected-gradient feasibility solve in whitened coordinates. Both
    /// sides of the bisection are certified: feasible points give upper
    /// bounds, and every trial spawns a weak-duality lower bound
    /// `u^T psi - ||M^T u||_2` over `||u||_1 <= 1`. On iteration exhaustion
    /// the error carries the best bracket.
    pub fn dist_to_unit_ball(&self, psi: &[f64]) -> Result<Projection> {
        assert_eq!(psi.len(), self.q, "dist: psi length mismatch");
        let tol = self.solver_tol;
        // membership short-circuit: on-range points with energy inside the
        // ball are at distance exactly zero
        let coords = self.eigcoords(psi);
        let psi_norm: f64 = psi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if self.range_residual_sq(&coords).sqrt() <= 1e-9 * psi_norm.max(1.0) {
            let qf: f64 = coords[..self.rank]
                .iter()
                .zip(&self.eigvals)
                .map(|(y, l)| y * y / l)
                .sum();
            if qf <= 1.0 + tol {
                return Ok(Projection {
                    dist: 0.0,
                    lower: 0.0,
                    upper: 0.0,
                    witness: psi.to_vec(),
                    iterations: 0,
                });
            }
        }
        let r = self.rank;
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if r == 0 {
            // degenerate ball {0}
            return Ok(Projection {
                dist: sup(psi),
                lower: sup(psi),
                upper: sup(psi),
                witness: vec![0.0; self.q],
                iterations: 0,
            });
        }

        // initial lower bound from coordinate duals u = +/- e_l
        let mut lower = 0.0f64;
        for l in 0..self.q {
            let row = &self.map[l * r..(l + 1) * r];
            let row_norm: f64 = row.iter().map(|m| m * m).sum::<f64>().sqrt();
            lower = lower.max(psi[l].abs() - row_norm);
        }
        lower = lower.max(0.0);

        // initial feasible point: representer coefficients clipped to the ball
        let mut w = vec![0.0; r];
        for j in 0..r {
            w[j] = coords[j] / self.eigvals[j].sqrt();
        }
        let wn: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wn > 1.0 {
            w.iter_mut().for_each(|x| *x /= wn);
        }
        let mut v = vec![0.0; self.q];
        self.mul_map(&w, &mut v);
        let mut resid: Vec<f64> = psi.iter().zip(&v).map(|(p, vi)| p - vi).collect();
        let mut upper = sup(&resid);
        let mut witness = v.clone();

        let step = 1.0 / self.eigvals[0].max(f64::MIN_POSITIVE);
        let base_iters = (10.0 * self.q as f64 * (1.0 / tol).ln()).ceil() as usize;
        let mut inner_iters = (base_iters / 4).max(128);
        let budget = 4000 * base_iters;
        let mut spent = 0usize;

        let mut grad = vec![0.0; r];
        let mut s = vec![0.0; self.q];
        let mut w_new = vec![0.0; r];
        let mut y = w.clone();
        // dual point of the best (lowest-phi) iterate of a round
        let mut s_best = vec![0.0; self.q];

        while upper - lower > tol {
            if spent >= budget {
                return Err(Error::Solver {
                    iterations: spent,
                    lower,
                    upper,
                });
            }
            let t = 0.5 * (lower + upper);
            let upper_before = upper;
            let lower_before = lower;
            // FISTA with function restart on
            // phi(w) = 1/2 sum relu(|psi - Mw| - t)^2 over the unit ball
            y.copy_from_slice(&w);
            let mut momentum = 1.0f64;
            let mut phi_prev = f64::INFINITY;
            let mut phi_best = f64::INFINITY;
            let mut reached_t = false;
            for _ in 0..inner_iters {
                spent += 1;
                self.mul_map(&y, &mut v);
                for l in 0..self.q {
                    let rl = psi[l] - v[l];
                    s[l] = rl.signum() * (rl.abs() - t).max(0.0);
                }
                self.mul_map_t(&s, &mut grad);
                // gradient of phi at y is -M^T s; descend and project
                let mut norm_sq = 0.0;
                for j in 0..r {
                    let val = y[j] + step * grad[j];
                    w_new[j] = val;
                    norm_sq += val * val;
                }
                if norm_sq > 1.0 {
                    let inv = norm_sq.sqrt().recip();
                    w_new.iter_mut().for_each(|x| *x *= inv);
                }
                let momentum_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
                let beta = (momentum - 1.0) / momentum_next;
                for j in 0..r {
                    y[j] = w_new[j] + beta * (w_new[j] - w[j]);
                }
                w.copy_from_slice(&w_new);
                momentum = momentum_next;

                self.mul_map(&w, &mut v);
                let mut phi = 0.0;
                for l in 0..self.q {
                    resid[l] = psi[l] - v[l];
                    let excess = (resid[l].abs() - t).max(0.0);
                    phi += 0.5 * excess * excess;
                }
                let rho = sup(&resid);
                if rho < upper {
                    upper = rho;
                    witness.copy_from_slice(&v);
                }
                if phi < phi_best {
                    phi_best = phi;
                    for l in 0..self.q {
                        let rl = resid[l];
                        s_best[l] = rl.signum() * (rl.abs() - t).max(0.0);
                    }
                }
                if rho <= t {
                    reached_t = true;
                    break;
                }
                if phi > phi_prev {
                    // momentum overshot; restart
                    y.copy_from_slice(&w);
                    momentum = 1.0;
                }
                phi_prev = phi;
            }
            if !reached_t && phi_best > 0.0 {
                // infeasible-looking trial: weak-duality bound from the
                // best dual point, u = s / ||s||_1
                let l1: f64 = s_best.iter().map(|x| x.abs()).sum();
                if l1 > 0.0 {
                    let u: Vec<f64> = s_best.iter().map(|x| x / l1).collect();
                    self.mul_map_t(&u, &mut grad);
                    let mtu: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
                    let cand: f64 = u.iter().zip(psi).map(|(ui, p)| ui * p).sum::<f64>() - mtu;
                    lower = lower.max(cand.min(upper));
                }
            }
            let progressed = upper < upper_before - 0.25 * tol
                || lower > lower_before + 0.25 * tol;
            if !progressed {
                inner_iters = (inner_iters * 2).min(256 * base_iters);
            }
        }
        Ok(Projection {
            dist: 0.5 * (lower + upper),
            lower,
            upper,
            witness,
            iterations: spent,
        })
    }

    /// The witness point achieving [`Self::dist_to_unit_ball`] within the
    /// solver tolerance (`psi` itself when it already lies in the ball).
    pub fn project_to_ball(&self, psi: &[f64]) -> Result<Vec<f64>> {
        Ok(self.dist_to_unit_ball(psi)?.witness)
    }
}

/// Max-norm epsilon-ball membership: `max_l |psi_l - theta_l| < eps`.
pub fn in_epsilon_ball(psi: &[f64], theta: &[f64], eps: f64) -> bool {
    assert_eq!(psi.len(), theta.len(), "length mismatch");
    psi.iter()
        .zip(theta)
        .fold(0.0f64, |m, (p, t)| m.max((p - t).abs()))
        < eps
}

/// Closed-form rate for the interval net `{1_{[0, t_l]}}`:
/// `I = 1/2 sum (psi_l - psi_{l-1})^2 / (t_l - t_{l-1})` with
/// `(t_0, psi_0) = (0, 0)`; agrees with the pseudoinverse route through the
/// min(t_l, t_k) Gram matrix.
pub fn strassen_rate_1d(t_grid: &[f64], psi: &[f64]) -> Result<f64> {
    if t_grid.is_empty() || t_grid.len() != psi.len() {
        return Err(Error::InvalidParameter(
            "grid and value vectors must be nonempty and of equal length".into(),
        ));
    }
    if t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "t grid must be strictly increasing and positive".into(),
        ));
    }
    let mut prev_t = 0.0;
    let mut prev_psi = 0.0;
    let mut acc = 0.0;
    for (t, p) in t_grid.iter().zip(psi) {
        let dt = t - prev_t;
        let dp = p - prev_psi;
        acc += dp * dp / dt;
        prev_t = *t;
        prev_psi = *p;
    }
    Ok(0.5 * acc)
}

/// The min(t_l, t_k) Gram matrix of an interval net, the 1d counterpart of
/// [`crate::functions::gram_matrix`].
pub fn min_gram(t_grid: &[f64]) -> Vec<f64> {
    let q = t_grid.len();
    let mut g = vec![0.0; q * q];
    for l in 0..q {
        for k in 0..q {
            g[l * q + k] = t_grid[l].min(t_grid[k]);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn rate_examples() {
        let model = LimitBallModel::new(&[0.5, 0.5, 0.5, 1.0], 2).unwrap();
        assert_eq!(model.rate(&[0.0, 0.0]), 0.0);
        let r = model.rate(&[0.5, 1.0]);
        assert!((r - 0.5).abs() < 1e-12, "{r}");
        // duplicated member: off-range vectors have infinite rate
        let dup = LimitBallModel::new(&[1.0, 1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(dup.rank(), 1);
        assert!(dup.rate(&[1.0, 0.0]).is_infinite());
        assert!(dup.rate(&[1.0, 1.0]).is_finite());
    }

    #[test]
    fn dist_examples() {
        let m1 = LimitBallModel::new(&[0.25], 1).unwrap();
        let p = m1.dist_to_unit_ball(&[1.0]).unwrap();
        assert!((p.dist - 0.5).abs() < 1e-6, "{}", p.dist);
        assert!((p.witness[0] - 0.5).abs() < 1e-4);

        // boundary point of the ball: distance exactly zero
        let m2 = LimitBallModel::new(&[0.5, 0.5, 0.5, 1.0], 2).unwrap();
        let p = m2.dist_to_unit_ball(&[0.5, 1.0]).unwrap();
        assert_eq!(p.dist, 0.0);
        assert_eq!(p.witness, vec![0.5, 1.0]);

        // disk of radius 1/2: dist = 1 - 0.5/sqrt(2)
        let m3 = LimitBallModel::new(&[0.25, 0.0, 0.0, 0.25], 2).unwrap();
        let p = m3.dist_to_unit_ball(&[1.0, 1.0]).unwrap();
        let expect = 1.0 - 0.5 / 2.0f64.sqrt();
        assert!((p.dist - expect).abs() < 1e-5, "{} vs {expect}", p.dist);
        let w = 0.5 / 2.0f64.sqrt();
        assert!((p.witness[0] - w).abs() < 1e-3 && (p.witness[1] - w).abs() < 1e-3);
        assert!(p.upper - p.lower <= DEFAULT_SOLVER_TOL * 1.0001);
    }

    #[test]
    fn dist_inside_returns_point_itself() {
        let m = LimitBallModel::new(&[0.25, 0.0, 0.0, 0.25], 2).unwrap();
        let psi = [0.1, -0.2];
        let p = m.dist_to_unit_ball(&psi).unwrap();
        assert_eq!(p.dist, 0.0);
        assert_eq!(p.witness, psi.to_vec());
    }

    #[test]
    fn dist_grid_oracle_small() {
        // brute force over the disk against the solver, q = 2
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..10 {
            let a = rng.random_range(0.05..1.0);
            let b = rng.random_range(0.05..1.0);
            let c = rng.random_range(-0.5..0.5) * (a * b) as f64;
            let gram = [a, c, c, b];
            let model = LimitBallModel::new(&gram, 2).unwrap();
            let psi = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            let got = model.dist_to_unit_ball(&psi).unwrap().dist;
            let (map, r) = model.whitened_map();
            let m = 400;
            let mut best = f64::INFINITY;
            for i in 0..=m {
                for j in 0..=m {
                    let w1 = -1.0 + 2.0 * i as f64 / m as f64;
                    let w2 = -1.0 + 2.0 * j as f64 / m as f64;
                    if w1 * w1 + w2 * w2 > 1.0 {
                        continue;
                    }
                    let v0 = map[0] * w1 + map[1] * w2;
                    let v1 = map[r] * w1 + map[r + 1] * w2;
                    best = best.min((psi[0] - v0).abs().max((psi[1] - v1).abs()));
                }
            }
            assert!(
                (got - best).abs() < 5e-3,
                "solver {got} vs grid {best} for gram {gram:?} psi {psi:?}"
            );
        }
    }

    #[test]
    fn epsilon_ball_examples() {
        assert!(in_epsilon_ball(&[0.3, 0.1], &[0.3, 0.1], 1e-9));
        assert!(!in_epsilon_ball(&[0.0, 0.0], &[0.3, 0.0], 0.25));
        assert!(in_epsilon_ball(&[0.0, 0.0], &[0.3, 0.0], 0.35));
    }

    #[test]
    fn strassen_examples() {
        let t = [0.25, 0.5, 1.0];
        assert!((strassen_rate_1d(&t, &[0.25, 0.5, 1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((strassen_rate_1d(&t, &[0.0, 0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(strassen_rate_1d(&t, &[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(strassen_rate_1d(&[0.5, 0.5], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn strassen_agrees_with_pseudoinverse() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..25 {
            let q = rng.random_range(1..=8);
            let mut ts: Vec<f64> = (0..q)
                .map(|_| rng.random_range(0.05f64..1.0))
                .collect();
            ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ts.dedup_by(|a, b| (*a - *b).abs() < 0.02);
            // a random path psi(t) = int_0^t xi with piecewise-constant xi
            let levels: Vec<f64> = (0..ts.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut psi = Vec::with_capacity(ts.len());
            let mut acc = 0.0;
            let mut prev = 0.0;
            for (i, &t) in ts.iter().enumerate() {
                acc += levels[i] * (t - prev);
                psi.push(acc);
                prev = t;
            }
            let closed = strassen_rate_1d(&ts, &psi).unwrap();
            let model = LimitBallModel::new(&min_gram(&ts), ts.len()).unwrap();
            let pinv = model.rate(&psi);
            assert!(
                (closed - pinv).abs() < 1e-9,
                "closed {closed} vs pinv {pinv} (q = {})",
                ts.len()
            );
        }
    }

    #[test]
    fn rate_scaling_is_quadratic() {
        let model = LimitBallModel::new(&min_gram(&[0.3, 0.7, 1.0]), 3).unwrap();
        let psi = [0.1, 0.4, 0.5];
        let base = model.rate(&psi);
        for &c in &[2.0, 3.5, 10.0] {
            let scaled: Vec<f64> = psi.iter().map(|p| p * c).collect();
            assert!((model.rate(&scaled) - c * c * base).abs() < 1e-9 * c * c);
        }
    }

    #[test]
    fn dist_scaling_is_monotone() {
        let model = LimitBallModel::new(&[0.25, 0.0, 0.0, 0.25], 2).unwrap();
        let psi = [0.9, 0.8];
        let mut last = 0.0;
        for &c in &[1.0, 1.5, 2.0, 4.0] {
            let scaled: Vec<f64> = psi.iter().map(|p| p * c).collect();
            let d = model.dist_to_unit_ball(&scaled).unwrap().dist;
            assert!(d >= last - 1e-9, "dist not monotone: {d} after {last}");
            last = d;
        }
    }

    #[test]
    fn refining_net_never_decreases_rate() {
        // fixed path xi, coarse grid subset of fine grid
        let xi = |x: f64| if x < 0.4 { 1.2 } else { -0.3 };
        let path = |t: f64| {
            if t < 0.4 {
                1.2 * t
            } else {
                1.2 * 0.4 - 0.3 * (t - 0.4)
            }
        };
        let coarse: Vec<f64> = vec![0.25, 0.5, 1.0];
        let fine: Vec<f64> = vec![0.125, 0.25, 0.375, 0.5, 0.75, 1.0];
        let rc = strassen_rate_1d(&coarse, &coarse.iter().map(|&t| path(t)).collect::<Vec<_>>())
            .unwrap();
        let rf =
            strassen_rate_1d(&fine, &fine.iter().map(|&t| path(t)).collect::<Vec<_>>()).unwrap();
        assert!(rc <= rf + 1e-12);
        // and both are below the true energy
        let energy = 0.5 * (0.4 * xi(0.0) * xi(0.0) + 0.6 * xi(0.5) * xi(0.5));
        assert!(rf <= energy + 1e-12);
    }

    #[test]
    fn exceedance_rate_examples() {
        let m = LimitBallModel::new(&[1.0], 1).unwrap();
        assert!((m.exceedance_rate(1.0) - 0.5).abs() < 1e-15);
        assert_eq!(m.exceedance_rate(0.0), 0.0);
    }
}
