//! Target densities with exact evaluation, exact inverse-CDF sampling, and
//! smoothed (convolved) evaluation for centering terms.
//!
//! Shipped densities are products of one-dimensional marginals whose CDFs
//! have closed forms, so sampling is rejection-free and bit-for-bit
//! reproducible from `(seed, replication)`. Each density declares a compact
//! region `J` (a box with nonempty interior) and a margin `gamma` on which it
//! is continuous and strictly positive.

use crate::error::{Error, Result};
use crate::functions::FunctionDescriptor;
use crate::poly::{Piecewise, Poly};
use crate::quad;
use crate::rng::{rep_rng, STREAM_DIRECT};
use rand::Rng;
use serde::{Deserialize, Serialize};

const SQRT_2PI: f64 = 2.5066282746310002;

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + statrs::function::erf::erf(x / std::f64::consts::SQRT_2))
}

/// One component of a truncated Gaussian mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// A one-dimensional marginal with closed-form CDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marginal {
    Uniform { lo: f64, hi: f64 },
    Triangular { lo: f64, hi: f64, mode: f64 },
    TruncGaussMix {
        lo: f64,
        hi: f64,
        components: Vec<GaussComponent>,
    },
}

impl Marginal {
    fn validate(&self) -> Result<()> {
        match self {
            Marginal::Uniform { lo, hi } => {
                if !(lo < hi) {
                    return Err(Error::InvalidParameter("uniform needs lo < hi".into()));
                }
            }
            Marginal::Triangular { lo, hi, mode } => {
                if !(lo < mode && mode < hi) {
                    return Err(Error::InvalidParameter(
                        "triangular needs lo < mode < hi".into(),
                    ));
                }
            }
            Marginal::TruncGaussMix { lo, hi, components } => {
                if !(lo < hi) {
                    return Err(Error::InvalidParameter("mixture needs lo < hi".into()));
                }
                if components.is_empty() {
                    return Err(Error::InvalidParameter("mixture needs components".into()));
                }
                if components.iter().any(|c| c.sd <= 0.0 || c.weight <= 0.0) {
                    return Err(Error::InvalidParameter(
                        "mixture weights and scales must be positive".into(),
                    ));
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "mixture weights sum to {total}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Marginal::Uniform { lo, hi }
            | Marginal::Triangular { lo, hi, .. }
            | Marginal::TruncGaussMix { lo, hi, .. } => (*lo, *hi),
        }
    }

    fn mix_norm(lo: f64, hi: f64, components: &[GaussComponent]) -> f64 {
        components
            .iter()
            .map(|c| {
                c.weight
                    * (std_normal_cdf((hi - c.mean) / c.sd) - std_normal_cdf((lo - c.mean) / c.sd))
            })
            .sum()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Marginal::Uniform { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Marginal::Triangular { lo, hi, mode } => {
                if x < *lo || x > *hi {
                    0.0
                } else if x <= *mode {
                    2.0 * (x - lo) / ((hi - lo) * (mode - lo))
                } else {
                    2.0 * (hi - x) / ((hi - lo) * (hi - mode))
                }
            }
            Marginal::TruncGaussMix { lo, hi, components } => {
                if x < *lo || x > *hi {
                    return 0.0;
                }
                let norm = Self::mix_norm(*lo, *hi, components);
                let raw: f64 = components
                    .iter()
                    .map(|c| {
                        let t = (x - c.mean) / c.sd;
                        c.weight * (-0.5 * t * t).exp() / (c.sd * SQRT_2PI)
                    })
                    .sum();
                raw / norm
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Marginal::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Marginal::Triangular { lo, hi, mode } => {
                if x <= *lo {
                    0.0
                } else if x >= *hi {
                    1.0
                } else if x <= *mode {
                    (x - lo) * (x - lo) / ((hi - lo) * (mode - lo))
                } else {
                    1.0 - (hi - x) * (hi - x) / ((hi - lo) * (hi - mode))
                }
            }
            Marginal::TruncGaussMix { lo, hi, components } => {
                if x <= *lo {
                    return 0.0;
                }
                if x >= *hi {
                    return 1.0;
                }
                let norm = Self::mix_norm(*lo, *hi, components);
                let raw: f64 = components
                    .iter()
                    .map(|c| {
                        c.weight
                            * (std_normal_cdf((x - c.mean) / c.sd)
                                - std_normal_cdf((lo - c.mean) / c.sd))
                    })
                    .sum();
                (raw / norm).clamp(0.0, 1.0)
            }
        }
    }

    /// Inverse CDF. Closed form except for mixtures, which bisect the
    /// monotone CDF to full precision (deterministic).
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            Marginal::Uniform { lo, hi } => lo + u * (hi - lo),
            Marginal::Triangular { lo, hi, mode } => {
                let fc = (mode - lo) / (hi - lo);
                if u <= fc {
                    lo + (u * (hi - lo) * (mode - lo)).sqrt()
                } else {
                    hi - ((1.0 - u) * (hi - lo) * (hi - mode)).sqrt()
                }
            }
            Marginal::TruncGaussMix { lo, hi, .. } => {
                let (mut a, mut b) = (*lo, *hi);
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    if self.cdf(m) < u {
                        a = m;
                    } else {
                        b = m;
                    }
                    if b - a <= f64::EPSILON * (1.0 + a.abs().max(b.abs())) {
                        break;
                    }
                }
                0.5 * (a + b)
            }
        }
    }

    /// Supremum of the pdf over `[a, b]`; closed form for the unimodal
    /// kinds, a fine fixed grid for mixtures.
    pub fn sup_pdf_on(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = self.support();
        let a = a.max(lo);
        let b = b.min(hi);
        if a > b {
            return 0.0;
        }
        match self {
            Marginal::Uniform { .. } => self.pdf(0.5 * (a + b)),
            Marginal::Triangular { mode, .. } => self.pdf(mode.clamp(a, b)),
            Marginal::TruncGaussMix { .. } => {
                let m = 4096;
                (0..=m)
                    .map(|i| self.pdf(a + (b - a) * i as f64 / m as f64))
                    .fold(0.0, f64::max)
            }
        }
    }

    /// True when the pdf is continuous and strictly positive on `[a, b]`.
    fn positive_on(&self, a: f64, b: f64) -> bool {
        match self {
            Marginal::Uniform { lo, hi } => a >= *lo && b <= *hi,
            // triangular vanishes at its endpoints
            Marginal::Triangular { lo, hi, .. } => a > *lo && b < *hi,
            Marginal::TruncGaussMix { lo, hi, .. } => a >= *lo && b <= *hi,
        }
    }

    /// Piecewise-polynomial representation when one exists.
    pub(crate) fn piecewise(&self) -> Option<Piecewise> {
        match self {
            Marginal::Uniform { lo, hi } => Some(Piecewise::new(
                vec![*lo, *hi],
                vec![Poly::constant(1.0 / (hi - lo))],
            )),
            Marginal::Triangular { lo, hi, mode } => {
                let up = 2.0 / ((hi - lo) * (mode - lo));
                let down = 2.0 / ((hi - lo) * (hi - mode));
                Some(Piecewise::new(
                    vec![*lo, *mode, *hi],
                    vec![
                        Poly::new(vec![-lo * up, up]),
                        Poly::new(vec![hi * down, -down]),
                    ],
                ))
            }
            Marginal::TruncGaussMix { .. } => None,
        }
    }
}

/// A product density on `R^d` with declared region `J` and margin `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    marginals: Vec<Marginal>,
    pub region_lo: Vec<f64>,
    pub region_hi: Vec<f64>,
    pub margin_gamma: f64,
}

impl Density {
    pub fn new(
        marginals: Vec<Marginal>,
        region_lo: Vec<f64>,
        region_hi: Vec<f64>,
        margin_gamma: f64,
    ) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidParameter("density needs at least one axis".into()));
        }
        for m in &marginals {
            m.validate()?;
        }
        let d = marginals.len();
        if region_lo.len() != d || region_hi.len() != d {
            return Err(Error::InvalidParameter("region dimension mismatch".into()));
        }
        if margin_gamma <= 0.0 {
            return Err(Error::InvalidParameter("margin gamma must be positive".into()));
        }
        for i in 0..d {
            if !(region_lo[i] < region_hi[i]) {
                return Err(Error::InvalidParameter(
                    "region J must have nonempty interior".into(),
                ));
            }
            if !marginals[i].positive_on(region_lo[i] - margin_gamma, region_hi[i] + margin_gamma) {
                return Err(Error::InvalidParameter(format!(
                    "density is not strictly positive on the gamma-enlargement of J along axis {i}"
                )));
            }
        }
        Ok(Density {
            marginals,
            region_lo,
            region_hi,
            margin_gamma,
        })
    }

    /// Uniform density on a box; `J` defaults to the central 60% of the box
    /// with `gamma` one tenth of the smallest side.
    pub fn uniform_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidParameter("box corners mismatch".into()));
        }
        let marginals: Vec<Marginal> = lo
            .iter()
            .zip(&hi)
            .map(|(&a, &b)| Marginal::Uniform { lo: a, hi: b })
            .collect();
        let region_lo: Vec<f64> = lo.iter().zip(&hi).map(|(&a, &b)| a + 0.2 * (b - a)).collect();
        let region_hi: Vec<f64> = lo.iter().zip(&hi).map(|(&a, &b)| b - 0.2 * (b - a)).collect();
        let gamma = lo
            .iter()
            .zip(&hi)
            .map(|(&a, &b)| 0.1 * (b - a))
            .fold(f64::INFINITY, f64::min);
        Density::new(marginals, region_lo, region_hi, gamma)
    }

    /// One-dimensional triangular density.
    pub fn triangular(lo: f64, hi: f64, mode: f64) -> Result<Self> {
        let m = Marginal::Triangular { lo, hi, mode };
        m.validate()?;
        let span = hi - lo;
        Density::new(
            vec![m],
            vec![lo + 0.2 * span],
            vec![hi - 0.2 * span],
            0.1 * span,
        )
    }

    /// One-dimensional truncated Gaussian mixture.
    pub fn trunc_gauss_mix(
        lo: f64,
        hi: f64,
        components: Vec<GaussComponent>,
    ) -> Result<Self> {
        let m = Marginal::TruncGaussMix { lo, hi, components };
        m.validate()?;
        let span = hi - lo;
        Density::new(
            vec![m],
            vec![lo + 0.2 * span],
            vec![hi - 0.2 * span],
            0.1 * span,
        )
    }

    /// General product of one-dimensional marginals with explicit region.
    pub fn product(
        marginals: Vec<Marginal>,
        region_lo: Vec<f64>,
        region_hi: Vec<f64>,
        margin_gamma: f64,
    ) -> Result<Self> {
        Density::new(marginals, region_lo, region_hi, margin_gamma)
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn support(&self) -> (Vec<f64>, Vec<f64>) {
        let lo = self.marginals.iter().map(|m| m.support().0).collect();
        let hi = self.marginals.iter().map(|m| m.support().1).collect();
        (lo, hi)
    }

    /// `f(z)`; exactly zero outside the support box.
    pub fn pdf(&self, z: &[f64]) -> f64 {
        debug_assert_eq!(z.len(), self.dim());
        self.marginals
            .iter()
            .zip(z)
            .map(|(m, &x)| m.pdf(x))
            .product()
    }

    pub fn cdf_axis(&self, axis: usize, x: f64) -> f64 {
        self.marginals[axis].cdf(x)
    }

    /// Exact probability of the closed box `[lo, hi]`.
    pub fn box_probability(&self, lo: &[f64], hi: &[f64]) -> f64 {
        self.marginals
            .iter()
            .enumerate()
            .map(|(i, m)| (m.cdf(hi[i]) - m.cdf(lo[i])).max(0.0))
            .product()
    }

    /// `sup_z f(z)` over the box `[lo, hi]` (exact for the unimodal kinds).
    pub fn sup_pdf_on(&self, lo: &[f64], hi: &[f64]) -> f64 {
        self.marginals
            .iter()
            .enumerate()
            .map(|(i, m)| m.sup_pdf_on(lo[i], hi[i]))
            .product()
    }

    /// `n` i.i.d. draws, replication 0.
    pub fn sample(&self, n: usize, seed: u64) -> Sample {
        self.sample_rep(n, seed, 0)
    }

    /// `n` i.i.d. draws for replication `rep`. The generator is derived from
    /// `(seed, rep)` so parallel and serial execution agree bit-for-bit, and
    /// samples at different `n` from the same `(seed, rep)` are prefixes of
    /// one infinite sequence.
    pub fn sample_rep(&self, n: usize, seed: u64, rep: u64) -> Sample {
        let d = self.dim();
        let mut rng = rep_rng(seed, STREAM_DIRECT, rep);
        let mut points = Vec::with_capacity(n * d);
        for _ in 0..n {
            for m in &self.marginals {
                let u: f64 = rng.random();
                points.push(m.quantile(u));
            }
        }
        Sample {
            dim: d,
            n,
            points,
            seed,
            rep,
        }
    }
}

/// A concrete sample of `n` points in `R^d`, flat row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub dim: usize,
    pub n: usize,
    pub points: Vec<f64>,
    pub seed: u64,
    pub rep: u64,
}

impl Sample {
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Build directly from literal points (the `fixed-points:` pathway).
    pub fn from_points(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.len() % dim != 0 {
            return Err(Error::InvalidParameter(
                "point list length is not a multiple of the dimension".into(),
            ));
        }
        let n = points.len() / dim;
        Ok(Sample {
            dim,
            n,
            points,
            seed: 0,
            rep: 0,
        })
    }
}

// ---------------------------------------------------------------------------
// Smoothing / centering integrals

fn scale_of(h: f64, d: usize) -> f64 {
    h.powf(1.0 / d as f64)
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must satisfy 0 < h < 1, got {h}"
        )));
    }
    Ok(())
}

/// `E g(h^{-1/d}(z - Z))` computed exactly for indicator/CDF pairs and by
/// piecewise-exact or adaptive integration otherwise. Absolute accuracy 1e-8
/// or better.
pub fn expectation_h(
    density: &Density,
    g: &FunctionDescriptor,
    h: f64,
    z: &[f64],
) -> Result<f64> {
    check_bandwidth(h)?;
    let d = density.dim();
    if g.dim() != d || z.len() != d {
        return Err(Error::InvalidParameter(
            "dimension mismatch between density, function and point".into(),
        ));
    }
    let s = scale_of(h, d);
    expectation_inner(density, g, h, s, z)
}

fn expectation_inner(
    density: &Density,
    g: &FunctionDescriptor,
    h: f64,
    s: f64,
    z: &[f64],
) -> Result<f64> {
    use FunctionDescriptor::*;
    match g {
        RectIndicator { lo, hi } => {
            let mut p = 1.0;
            for i in 0..lo.len() {
                let a = density.cdf_axis(i, z[i] - s * hi[i]);
                let b = density.cdf_axis(i, z[i] - s * lo[i]);
                p *= (b - a).max(0.0);
            }
            Ok(p)
        }
        ProductKernel { kernel, .. } => {
            let mut p = 1.0;
            for (i, m) in density.marginals().iter().enumerate() {
                p *= axis_kernel_expectation(m, *kernel, s, z[i])?;
            }
            Ok(p)
        }
        EllipsoidIndicator { center, shape } if center.len() == 1 => {
            let r = 1.0 / shape[0].sqrt();
            let iv = FunctionDescriptor::RectIndicator {
                lo: vec![center[0] - r],
                hi: vec![center[0] + r],
            };
            expectation_inner(density, &iv, h, s, z)
        }
        EllipsoidIndicator { center, shape } => {
            ellipse_slice_expectation(density, center, shape, h, s, z, None, None)
        }
        AffineCombo { terms } => {
            let mut acc = 0.0;
            for t in terms {
                acc += t.coeff * expectation_inner(density, &t.function, h, s, z)?;
            }
            Ok(acc)
        }
    }
}

/// One axis of `E prod_i k((z_i - X_i)/s)`: `int k((z-x)/s) f(x) dx`.
fn axis_kernel_expectation(
    marginal: &Marginal,
    kernel: crate::functions::Kernel1d,
    s: f64,
    z: f64,
) -> Result<f64> {
    let (mlo, mhi) = marginal.support();
    let a = (z - 0.5 * s).max(mlo);
    let b = (z + 0.5 * s).min(mhi);
    if a >= b {
        return Ok(0.0);
    }
    match marginal.piecewise() {
        Some(fp) => {
            // Work in window coordinates u = (z - x)/s, where both factors
            // have small coefficients; the change of variables contributes s.
            let fp_u = fp.compose_affine(z, -s);
            Ok(s * kernel.piecewise().product_integral(&fp_u, -0.5, 0.5))
        }
        None => quad::integrate(
            &|x| kernel.eval((z - x) / s) * marginal.pdf(x),
            a,
            b,
            1e-9,
        ),
    }
}

/// Expectation over a 2-d ellipse slice decomposition, optionally clipped by
/// a rectangle (`clip`) and weighted by a product kernel (`kernel`).
#[allow(clippy::too_many_arguments)]
fn ellipse_slice_expectation(
    density: &Density,
    center: &[f64],
    shape: &[f64],
    h: f64,
    s: f64,
    z: &[f64],
    clip: Option<(&[f64], &[f64])>,
    kernel: Option<crate::functions::Kernel1d>,
) -> Result<f64> {
    let det = shape[0] * shape[3] - 0.25 * (shape[1] + shape[2]).powi(2);
    let a12 = 0.5 * (shape[1] + shape[2]);
    let a22 = shape[3];
    let ext = (a22 / det).sqrt();
    let mut u1_lo = center[0] - ext;
    let mut u1_hi = center[0] + ext;
    let mut u2_clip = (f64::NEG_INFINITY, f64::INFINITY);
    if let Some((clo, chi)) = clip {
        u1_lo = u1_lo.max(clo[0]);
        u1_hi = u1_hi.min(chi[0]);
        u2_clip = (clo[1], chi[1]);
    }
    if kernel.is_some() {
        u1_lo = u1_lo.max(-0.5);
        u1_hi = u1_hi.min(0.5);
        u2_clip = (u2_clip.0.max(-0.5), u2_clip.1.min(0.5));
    }
    if u1_lo >= u1_hi {
        return Ok(0.0);
    }
    let m0 = &density.marginals()[0];
    let m1 = &density.marginals()[1];
    let tol = (1e-8 / h).clamp(1e-12, 1e-4);
    let integrand = |u1: f64| -> f64 {
        let dx = u1 - center[0];
        let disc = a22 - dx * dx * det;
        if disc <= 0.0 {
            return 0.0;
        }
        let half = disc.sqrt() / a22;
        let mid = center[1] - a12 * dx / a22;
        let l = (mid - half).max(u2_clip.0);
        let r = (mid + half).min(u2_clip.1);
        if l >= r {
            return 0.0;
        }
        let outer = m0.pdf(z[0] - s * u1);
        if outer == 0.0 {
            return 0.0;
        }
        let inner = match kernel {
            None => (m1.cdf(z[1] - s * l) - m1.cdf(z[1] - s * r)) / s,
            Some(k) => {
                // int_l^r k(u2) f2(z2 - s u2) du2, smooth on the slice
                quad::panel(&|u2: f64| k.eval(u2) * m1.pdf(z[1] - s * u2), l, r)
            }
        };
        let weight = match kernel {
            None => 1.0,
            Some(k) => k.eval(u1),
        };
        weight * outer * inner
    };
    let j = quad::integrate(&integrand, u1_lo, u1_hi, tol)?;
    Ok(h * j)
}

/// The smoothed density `f * H_h(z) = h^{-1} int f(x) H(h^{-1/d}(z-x)) dx`.
pub fn smoothed_density(
    density: &Density,
    g: &FunctionDescriptor,
    h: f64,
    z: &[f64],
) -> Result<f64> {
    Ok(expectation_h(density, g, h, z)? / h)
}

/// `E [g1 g2](h^{-1/d}(z - Z))`, the mixed moment entering the covariance of
/// the local processes.
pub fn expectation_product_h(
    density: &Density,
    g1: &FunctionDescriptor,
    g2: &FunctionDescriptor,
    h: f64,
    z: &[f64],
) -> Result<f64> {
    check_bandwidth(h)?;
    let d = density.dim();
    if g1.dim() != d || g2.dim() != d || z.len() != d {
        return Err(Error::InvalidParameter(
            "dimension mismatch between density, functions and point".into(),
        ));
    }
    let s = scale_of(h, d);
    product_inner(density, g1, g2, h, s, z)
}

fn product_inner(
    density: &Density,
    g1: &FunctionDescriptor,
    g2: &FunctionDescriptor,
    h: f64,
    s: f64,
    z: &[f64],
) -> Result<f64> {
    use FunctionDescriptor::*;
    if let AffineCombo { terms } = g1 {
        let mut acc = 0.0;
        for t in terms {
            acc += t.coeff * product_inner(density, &t.function, g2, h, s, z)?;
        }
        return Ok(acc);
    }
    if let AffineCombo { .. } = g2 {
        return product_inner(density, g2, g1, h, s, z);
    }
    // 1-d ellipsoids are intervals
    if let EllipsoidIndicator { center, shape } = g1 {
        if center.len() == 1 {
            let r = 1.0 / shape[0].sqrt();
            let iv = RectIndicator {
                lo: vec![center[0] - r],
                hi: vec![center[0] + r],
            };
            return product_inner(density, &iv, g2, h, s, z);
        }
    }
    if let EllipsoidIndicator { center, shape } = g2 {
        if center.len() == 1 {
            let r = 1.0 / shape[0].sqrt();
            let iv = RectIndicator {
                lo: vec![center[0] - r],
                hi: vec![center[0] + r],
            };
            return product_inner(density, g1, &iv, h, s, z);
        }
    }
    match (g1, g2) {
        (RectIndicator { lo: l1, hi: h1 }, RectIndicator { lo: l2, hi: h2 }) => {
            let lo: Vec<f64> = l1.iter().zip(l2).map(|(a, b)| a.max(*b)).collect();
            let hi: Vec<f64> = h1.iter().zip(h2).map(|(a, b)| a.min(*b)).collect();
            if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
                return Ok(0.0);
            }
            expectation_inner(density, &RectIndicator { lo, hi }, h, s, z)
        }
        (RectIndicator { lo, hi }, ProductKernel { kernel, .. })
        | (ProductKernel { kernel, .. }, RectIndicator { lo, hi }) => {
            let mut p = 1.0;
            for (i, m) in density.marginals().iter().enumerate() {
                p *= axis_kernel_window(m, *kernel, None, s, z[i], lo[i], hi[i])?;
            }
            Ok(p)
        }
        (ProductKernel { kernel: k1, .. }, ProductKernel { kernel: k2, .. }) => {
            let mut p = 1.0;
            for (i, m) in density.marginals().iter().enumerate() {
                p *= axis_kernel_window(m, *k1, Some(*k2), s, z[i], -0.5, 0.5)?;
            }
            Ok(p)
        }
        (EllipsoidIndicator { center, shape }, RectIndicator { lo, hi })
        | (RectIndicator { lo, hi }, EllipsoidIndicator { center, shape }) => {
            ellipse_slice_expectation(density, center, shape, h, s, z, Some((lo, hi)), None)
        }
        (EllipsoidIndicator { center, shape }, ProductKernel { kernel, .. })
        | (ProductKernel { kernel, .. }, EllipsoidIndicator { center, shape }) => {
            ellipse_slice_expectation(density, center, shape, h, s, z, None, Some(*kernel))
        }
        (
            EllipsoidIndicator { center: c1, shape: s1 },
            EllipsoidIndicator { center: c2, shape: s2 },
        ) => ellipse_pair_expectation(density, c1, s1, c2, s2, h, s, z),
        (AffineCombo { .. }, _) | (_, AffineCombo { .. }) => unreachable!(),
    }
}

/// One axis of a kernel-weighted window expectation:
/// `int_{u in [ulo, uhi]} k1(u) [k2(u)] f(z - s u) du * s`, i.e. the x-space
/// integral of the kernel(s) against the marginal over the mapped window.
fn axis_kernel_window(
    marginal: &Marginal,
    k1: crate::functions::Kernel1d,
    k2: Option<crate::functions::Kernel1d>,
    s: f64,
    z: f64,
    ulo: f64,
    uhi: f64,
) -> Result<f64> {
    let ulo = ulo.max(-0.5);
    let uhi = uhi.min(0.5);
    if ulo >= uhi {
        return Ok(0.0);
    }
    let (mlo, mhi) = marginal.support();
    // x = z - s u decreasing in u
    let a = (z - s * uhi).max(mlo);
    let b = (z - s * ulo).min(mhi);
    if a >= b {
        return Ok(0.0);
    }
    match marginal.piecewise() {
        Some(fp) => {
            // kernels share the single piece on [-1/2, 1/2]
            let mut kp = k1.piecewise();
            if let Some(k2) = k2 {
                let kq = k2.piecewise();
                kp = Piecewise::new(kp.breaks.clone(), vec![kp.pieces[0].mul(&kq.pieces[0])]);
            }
            let fp_u = fp.compose_affine(z, -s);
            Ok(s * kp.product_integral(&fp_u, ulo, uhi))
        }
        None => quad::integrate(
            &|x| {
                let u = (z - x) / s;
                let w = k1.eval(u) * k2.map_or(1.0, |k| k.eval(u));
                w * marginal.pdf(x)
            },
            a,
            b,
            1e-9,
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn ellipse_pair_expectation(
    density: &Density,
    c1: &[f64],
    s1: &[f64],
    c2: &[f64],
    s2: &[f64],
    h: f64,
    s: f64,
    z: &[f64],
) -> Result<f64> {
    let slice = |c: &[f64], sh: &[f64], u1: f64| -> Option<(f64, f64)> {
        let det = sh[0] * sh[3] - 0.25 * (sh[1] + sh[2]).powi(2);
        let a12 = 0.5 * (sh[1] + sh[2]);
        let dx = u1 - c[0];
        let disc = sh[3] - dx * dx * det;
        if disc <= 0.0 {
            return None;
        }
        let half = disc.sqrt() / sh[3];
        let mid = c[1] - a12 * dx / sh[3];
        Some((mid - half, mid + half))
    };
    let ext = |c: &[f64], sh: &[f64]| -> (f64, f64) {
        let det = sh[0] * sh[3] - 0.25 * (sh[1] + sh[2]).powi(2);
        let e = (sh[3] / det).sqrt();
        (c[0] - e, c[0] + e)
    };
    let (l1, r1) = ext(c1, s1);
    let (l2, r2) = ext(c2, s2);
    let lo = l1.max(l2);
    let hi = r1.min(r2);
    if lo >= hi {
        return Ok(0.0);
    }
    let m0 = &density.marginals()[0];
    let m1 = &density.marginals()[1];
    let tol = (1e-8 / h).clamp(1e-12, 1e-4);
    let j = quad::integrate(
        &|u1| {
            let (a, b) = match (slice(c1, s1, u1), slice(c2, s2, u1)) {
                (Some(a), Some(b)) => (a.0.max(b.0), a.1.min(b.1)),
                _ => return 0.0,
            };
            if a >= b {
                return 0.0;
            }
            let outer = m0.pdf(z[0] - s * u1);
            if outer == 0.0 {
                return 0.0;
            }
            outer * (m1.cdf(z[1] - s * a) - m1.cdf(z[1] - s * b)) / s
        },
        lo,
        hi,
        tol,
    )?;
    Ok(h * j)
}
