//! Indexing function classes: rectangle and ellipsoid indicators, compactly
//! supported product kernels, and affine combinations of those, together with
//! the `L_2` inner-product algebra and finite nets over the parameterized
//! classes.
//!
//! All functions are bounded with compact support; indicator geometry lives
//! either in the centered cube `I^d = [-1/2, 1/2]^d` or, for the
//! distribution-function style interval nets, in `[0, 1]`.

use crate::error::{Error, Result};
use crate::poly::{Piecewise, Poly};
use crate::quad;
use serde::{Deserialize, Serialize};

/// Absolute tolerance for inner products that need quadrature.
pub const INNER_PRODUCT_TOL: f64 = 1e-10;

/// Nets larger than this skip eager Gram materialization (covering nets over
/// rectangle classes run to hundreds of thousands of members).
pub const GRAM_EAGER_LIMIT: usize = 2048;

/// One-dimensional base kernels, supported on `[-1/2, 1/2]` and integrating
/// to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel1d {
    /// `1_{[-1/2, 1/2]}`.
    Uniform,
    /// Rescaled Epanechnikov `(3/2)(1 - 4x^2)` on `[-1/2, 1/2]`.
    Epanechnikov,
}

impl Kernel1d {
    pub fn eval(&self, x: f64) -> f64 {
        if !(-0.5..=0.5).contains(&x) {
            return 0.0;
        }
        match self {
            Kernel1d::Uniform => 1.0,
            Kernel1d::Epanechnikov => 1.5 * (1.0 - 4.0 * x * x),
        }
    }

    /// `int k^2` over the line.
    pub fn norm_sq(&self) -> f64 {
        match self {
            Kernel1d::Uniform => 1.0,
            Kernel1d::Epanechnikov => 1.2,
        }
    }

    pub fn sup_abs(&self) -> f64 {
        match self {
            Kernel1d::Uniform => 1.0,
            Kernel1d::Epanechnikov => 1.5,
        }
    }

    /// Exact `int_a^b k(x) dx`.
    pub fn integral_over(&self, a: f64, b: f64) -> f64 {
        let a = a.max(-0.5);
        let b = b.min(0.5);
        if a >= b {
            return 0.0;
        }
        match self {
            Kernel1d::Uniform => b - a,
            // antiderivative 1.5 x - 2 x^3
            Kernel1d::Epanechnikov => {
                let f = |x: f64| 1.5 * x - 2.0 * x * x * x;
                f(b) - f(a)
            }
        }
    }

    pub(crate) fn piecewise(&self) -> Piecewise {
        match self {
            Kernel1d::Uniform => Piecewise::new(vec![-0.5, 0.5], vec![Poly::constant(1.0)]),
            Kernel1d::Epanechnikov => Piecewise::new(
                vec![-0.5, 0.5],
                vec![Poly::new(vec![1.5, 0.0, -6.0])],
            ),
        }
    }
}

/// One term of an affine combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComboTerm {
    pub coeff: f64,
    pub function: FunctionDescriptor,
}

/// A member of an indexing class, described by explicit geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionDescriptor {
    /// Indicator of the closed box `[lo_1, hi_1] x ... x [lo_d, hi_d]`.
    RectIndicator { lo: Vec<f64>, hi: Vec<f64> },
    /// Indicator of `{x : (x-c)^T A (x-c) <= 1}` with `A` symmetric positive
    /// definite, stored row-major. Shipped for `d <= 2`.
    EllipsoidIndicator { center: Vec<f64>, shape: Vec<f64> },
    /// Product kernel `K(x) = k(x_1) ... k(x_d)`.
    ProductKernel { kernel: Kernel1d, dim: usize },
    /// `sum_j c_j g_j` with all `g_j` of equal dimension.
    AffineCombo { terms: Vec<ComboTerm> },
}

impl FunctionDescriptor {
    pub fn rect(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidParameter(
                "rectangle corners must be nonempty and of equal dimension".into(),
            ));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) ) {
            return Err(Error::InvalidParameter(
                "rectangle needs lo < hi on every axis".into(),
            ));
        }
        Ok(FunctionDescriptor::RectIndicator { lo, hi })
    }

    pub fn ellipsoid(center: Vec<f64>, shape: Vec<f64>) -> Result<Self> {
        let d = center.len();
        if d == 0 || d > 2 {
            return Err(Error::InvalidParameter(
                "ellipsoid indicators are shipped for d in {1, 2}".into(),
            ));
        }
        if shape.len() != d * d {
            return Err(Error::InvalidParameter("shape matrix has wrong size".into()));
        }
        match d {
            1 => {
                if shape[0] <= 0.0 {
                    return Err(Error::InvalidParameter("shape must be positive".into()));
                }
            }
            _ => {
                let (a11, a12, a21, a22) = (shape[0], shape[1], shape[2], shape[3]);
                if (a12 - a21).abs() > 1e-12 * (1.0 + a12.abs().max(a21.abs())) {
                    return Err(Error::InvalidParameter("shape must be symmetric".into()));
                }
                if a11 <= 0.0 || a11 * a22 - a12 * a21 <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "shape must be positive definite".into(),
                    ));
                }
            }
        }
        Ok(FunctionDescriptor::EllipsoidIndicator { center, shape })
    }

    pub fn kernel(kernel: Kernel1d, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("kernel dimension must be >= 1".into()));
        }
        Ok(FunctionDescriptor::ProductKernel { kernel, dim })
    }

    pub fn combo(terms: Vec<ComboTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("empty affine combination".into()));
        }
        let d = terms[0].function.dim();
        if terms.iter().any(|t| t.function.dim() != d) {
            return Err(Error::InvalidParameter(
                "affine combination mixes dimensions".into(),
            ));
        }
        Ok(FunctionDescriptor::AffineCombo { terms })
    }

    pub fn dim(&self) -> usize {
        match self {
            FunctionDescriptor::RectIndicator { lo, .. } => lo.len(),
            FunctionDescriptor::EllipsoidIndicator { center, .. } => center.len(),
            FunctionDescriptor::ProductKernel { dim, .. } => *dim,
            FunctionDescriptor::AffineCombo { terms } => terms[0].function.dim(),
        }
    }

    /// Pointwise evaluation; identically zero outside the support.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            FunctionDescriptor::RectIndicator { lo, hi } => {
                let inside = lo
                    .iter()
                    .zip(hi)
                    .zip(x)
                    .all(|((a, b), v)| *a <= *v && *v <= *b);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionDescriptor::EllipsoidIndicator { center, shape } => {
                let d = center.len();
                let mut q = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        q += (x[i] - center[i]) * shape[i * d + j] * (x[j] - center[j]);
                    }
                }
                if q <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionDescriptor::ProductKernel { kernel, .. } => {
                x.iter().map(|&v| kernel.eval(v)).product()
            }
            FunctionDescriptor::AffineCombo { terms } => terms
                .iter()
                .map(|t| t.coeff * t.function.evaluate(x))
                .sum(),
        }
    }

    /// Smallest axis-aligned box containing the support.
    pub fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            FunctionDescriptor::RectIndicator { lo, hi } => (lo.clone(), hi.clone()),
            FunctionDescriptor::EllipsoidIndicator { center, shape } => {
                let d = center.len();
                let ext: Vec<f64> = if d == 1 {
                    vec![1.0 / shape[0].sqrt()]
                } else {
                    let det = shape[0] * shape[3] - shape[1] * shape[2];
                    vec![(shape[3] / det).sqrt(), (shape[0] / det).sqrt()]
                };
                (
                    center.iter().zip(&ext).map(|(c, e)| c - e).collect(),
                    center.iter().zip(&ext).map(|(c, e)| c + e).collect(),
                )
            }
            FunctionDescriptor::ProductKernel { dim, .. } => {
                (vec![-0.5; *dim], vec![0.5; *dim])
            }
            FunctionDescriptor::AffineCombo { terms } => {
                let d = self.dim();
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for t in terms {
                    let (l, h) = t.function.support_box();
                    for i in 0..d {
                        lo[i] = lo[i].min(l[i]);
                        hi[i] = hi[i].max(h[i]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// A sup-norm bound (the class constant kappa): 1 for indicators,
    /// `sup|K|` for kernels, the triangle-inequality bound for combos.
    pub fn bound_kappa(&self) -> f64 {
        match self {
            FunctionDescriptor::RectIndicator { .. }
            | FunctionDescriptor::EllipsoidIndicator { .. } => 1.0,
            FunctionDescriptor::ProductKernel { kernel, dim } => {
                kernel.sup_abs().powi(*dim as i32)
            }
            FunctionDescriptor::AffineCombo { terms } => terms
                .iter()
                .map(|t| t.coeff.abs() * t.function.bound_kappa())
                .sum(),
        }
    }

    /// Exact `int g` over the space.
    pub fn integral(&self) -> f64 {
        match self {
            FunctionDescriptor::RectIndicator { lo, hi } => {
                lo.iter().zip(hi).map(|(a, b)| b - a).product()
            }
            FunctionDescriptor::EllipsoidIndicator { center, shape } => {
                if center.len() == 1 {
                    2.0 / shape[0].sqrt()
                } else {
                    let det = shape[0] * shape[3] - shape[1] * shape[2];
                    std::f64::consts::PI / det.sqrt()
                }
            }
            FunctionDescriptor::ProductKernel { .. } => 1.0,
            FunctionDescriptor::AffineCombo { terms } => terms
                .iter()
                .map(|t| t.coeff * t.function.integral())
                .sum(),
        }
    }

    /// `int g^2`.
    pub fn norm_sq(&self) -> Result<f64> {
        inner_product(self, self)
    }

    /// The rescaled function `x -> g(z - lambda x)` as explicit geometry,
    /// available for the indicator kinds (kernels transform only as a whole
    /// class and are evaluated directly).
    pub fn shift_scale(&self, z: &[f64], lambda: f64) -> Option<FunctionDescriptor> {
        if lambda <= 0.0 || z.len() != self.dim() {
            return None;
        }
        match self {
            FunctionDescriptor::RectIndicator { lo, hi } => {
                let new_lo: Vec<f64> = z.iter().zip(hi).map(|(zi, b)| (zi - b) / lambda).collect();
                let new_hi: Vec<f64> = z.iter().zip(lo).map(|(zi, a)| (zi - a) / lambda).collect();
                Some(FunctionDescriptor::RectIndicator {
                    lo: new_lo,
                    hi: new_hi,
                })
            }
            FunctionDescriptor::EllipsoidIndicator { center, shape } => {
                let new_center: Vec<f64> = z
                    .iter()
                    .zip(center)
                    .map(|(zi, ci)| (zi - ci) / lambda)
                    .collect();
                let new_shape: Vec<f64> = shape.iter().map(|a| a * lambda * lambda).collect();
                Some(FunctionDescriptor::EllipsoidIndicator {
                    center: new_center,
                    shape: new_shape,
                })
            }
            _ => None,
        }
    }
}

/// `int g^2` of the product kernel built from `kernel` in dimension `dim`.
pub fn kernel_norm_sq(kernel: Kernel1d, dim: usize) -> f64 {
    kernel.norm_sq().powi(dim as i32)
}

// ---------------------------------------------------------------------------
// Inner products

/// Two-dimensional ellipse `{u : (u-c)^T A (u-c) <= 1}` in slice form.
struct Ellipse2 {
    cx: f64,
    cy: f64,
    a12: f64,
    a22: f64,
    det: f64,
}

impl Ellipse2 {
    fn new(center: &[f64], shape: &[f64]) -> Self {
        Ellipse2 {
            cx: center[0],
            cy: center[1],
            a12: 0.5 * (shape[1] + shape[2]),
            a22: shape[3],
            det: shape[0] * shape[3] - 0.25 * (shape[1] + shape[2]).powi(2),
        }
    }

    fn x_extent(&self) -> (f64, f64) {
        let e = (self.a22 / self.det).sqrt();
        (self.cx - e, self.cx + e)
    }

    /// The y-interval of the slice at abscissa `x`, if nonempty.
    fn slice(&self, x: f64) -> Option<(f64, f64)> {
        let dx = x - self.cx;
        let disc = self.a22 - dx * dx * self.det;
        if disc < 0.0 {
            return None;
        }
        let s = disc.sqrt() / self.a22;
        let mid = self.cy - self.a12 * dx / self.a22;
        Some((mid - s, mid + s))
    }
}

fn interval_of_1d_ellipsoid(center: &[f64], shape: &[f64]) -> FunctionDescriptor {
    let r = 1.0 / shape[0].sqrt();
    FunctionDescriptor::RectIndicator {
        lo: vec![center[0] - r],
        hi: vec![center[0] + r],
    }
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> Option<(f64, f64)> {
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    if lo < hi {
        Some((lo, hi))
    } else {
        None
    }
}

/// `(g1, g2) = int g1 g2` with closed forms for indicator and kernel pairs
/// and adaptive quadrature (tolerance `1e-10`) for the ellipse slices.
pub fn inner_product(g1: &FunctionDescriptor, g2: &FunctionDescriptor) -> Result<f64> {
    use FunctionDescriptor::*;
    if g1.dim() != g2.dim() {
        return Err(Error::InvalidParameter(
            "inner product of functions with different dimensions".into(),
        ));
    }
    // Affine combinations expand bilinearly.
    if let AffineCombo { terms } = g1 {
        let mut acc = 0.0;
        for t in terms {
            acc += t.coeff * inner_product(&t.function, g2)?;
        }
        return Ok(acc);
    }
    if let AffineCombo { .. } = g2 {
        return inner_product(g2, g1);
    }
    match (g1, g2) {
        (RectIndicator { lo: l1, hi: h1 }, RectIndicator { lo: l2, hi: h2 }) => {
            let mut vol = 1.0;
            for i in 0..l1.len() {
                vol *= (h1[i].min(h2[i]) - l1[i].max(l2[i])).max(0.0);
            }
            Ok(vol)
        }
        (RectIndicator { lo, hi }, ProductKernel { kernel, .. }) => {
            let mut acc = 1.0;
            for i in 0..lo.len() {
                acc *= kernel.integral_over(lo[i], hi[i]);
            }
            Ok(acc)
        }
        (ProductKernel { .. }, RectIndicator { .. }) => inner_product(g2, g1),
        (ProductKernel { kernel: k1, dim }, ProductKernel { kernel: k2, .. }) => {
            let p1 = k1.piecewise();
            let p2 = k2.piecewise();
            let one = p1.product_integral(&p2, -0.5, 0.5);
            Ok(one.powi(*dim as i32))
        }
        (EllipsoidIndicator { center, shape }, _) if center.len() == 1 => {
            inner_product(&interval_of_1d_ellipsoid(center, shape), g2)
        }
        (_, EllipsoidIndicator { center, shape }) if center.len() == 1 => {
            inner_product(g1, &interval_of_1d_ellipsoid(center, shape))
        }
        (EllipsoidIndicator { center, shape }, RectIndicator { lo, hi }) => {
            let e = Ellipse2::new(center, shape);
            let range = match overlap(e.x_extent(), (lo[0], hi[0])) {
                Some(r) => r,
                None => return Ok(0.0),
            };
            let (ylo, yhi) = (lo[1], hi[1]);
            quad::integrate(
                &|x| match e.slice(x) {
                    Some((a, b)) => (b.min(yhi) - a.max(ylo)).max(0.0),
                    None => 0.0,
                },
                range.0,
                range.1,
                INNER_PRODUCT_TOL,
            )
        }
        (RectIndicator { .. }, EllipsoidIndicator { .. }) => inner_product(g2, g1),
        (EllipsoidIndicator { center, shape }, ProductKernel { kernel, .. }) => {
            let e = Ellipse2::new(center, shape);
            let range = match overlap(e.x_extent(), (-0.5, 0.5)) {
                Some(r) => r,
                None => return Ok(0.0),
            };
            let k = *kernel;
            quad::integrate(
                &|x| match e.slice(x) {
                    Some((a, b)) => k.eval(x) * k.integral_over(a, b),
                    None => 0.0,
                },
                range.0,
                range.1,
                INNER_PRODUCT_TOL,
            )
        }
        (ProductKernel { .. }, EllipsoidIndicator { .. }) => inner_product(g2, g1),
        (
            EllipsoidIndicator { center: c1, shape: s1 },
            EllipsoidIndicator { center: c2, shape: s2 },
        ) => {
            let e1 = Ellipse2::new(c1, s1);
            let e2 = Ellipse2::new(c2, s2);
            let range = match overlap(e1.x_extent(), e2.x_extent()) {
                Some(r) => r,
                None => return Ok(0.0),
            };
            quad::integrate(
                &|x| match (e1.slice(x), e2.slice(x)) {
                    (Some(a), Some(b)) => (a.1.min(b.1) - a.0.max(b.0)).max(0.0),
                    _ => 0.0,
                },
                range.0,
                range.1,
                INNER_PRODUCT_TOL,
            )
        }
        (AffineCombo { .. }, _) | (_, AffineCombo { .. }) => unreachable!(),
    }
}

/// The pseudo-metric `rho(g1, g2) = ||g1 - g2||_2`, clamped at zero against
/// negative round-off.
pub fn l2_distance(g1: &FunctionDescriptor, g2: &FunctionDescriptor) -> Result<f64> {
    let a = inner_product(g1, g1)?;
    let b = inner_product(g1, g2)?;
    let c = inner_product(g2, g2)?;
    Ok((a - 2.0 * b + c).max(0.0).sqrt())
}

/// Row-major `q x q` Gram matrix of pairwise inner products. Symmetric by
/// construction (each pair is computed once and mirrored).
pub fn gram_matrix(members: &[FunctionDescriptor]) -> Result<Vec<f64>> {
    let q = members.len();
    if q == 0 {
        return Err(Error::InvalidParameter("gram matrix of an empty net".into()));
    }
    let mut gram = vec![0.0; q * q];
    for l in 0..q {
        for k in l..q {
            let v = inner_product(&members[l], &members[k])?;
            gram[l * q + k] = v;
            gram[k * q + l] = v;
        }
    }
    Ok(gram)
}

// ---------------------------------------------------------------------------
// Nets

/// Documentation-only entropy constants `N(eps) <= c0 * eps^{-nu0}` attached
/// to a shipped class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyMeta {
    pub c0: f64,
    pub nu0: f64,
}

/// A finite net over an indexing class together with its Gram matrix.
#[derive(Debug, Clone, Serialize)]
pub struct FunctionNet {
    pub id: String,
    pub members: Vec<FunctionDescriptor>,
    /// Covering radius of the net in the parameterized class, when the net
    /// was built as a cover.
    pub mesh_delta: Option<f64>,
    /// Reference cube the class lives in.
    pub domain_lo: Vec<f64>,
    pub domain_hi: Vec<f64>,
    pub entropy_meta: Option<EntropyMeta>,
    gram: Option<Vec<f64>>,
}

impl FunctionNet {
    /// Build a net from explicit members. The Gram matrix is materialized
    /// eagerly up to [`GRAM_EAGER_LIMIT`] members.
    pub fn from_members(
        id: impl Into<String>,
        members: Vec<FunctionDescriptor>,
        mesh_delta: Option<f64>,
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidParameter("net needs at least one member".into()));
        }
        let d = members[0].dim();
        if members.iter().any(|m| m.dim() != d) {
            return Err(Error::InvalidParameter("net mixes dimensions".into()));
        }
        let (domain_lo, domain_hi) = infer_domain(&members);
        let gram = if members.len() <= GRAM_EAGER_LIMIT {
            Some(gram_matrix(&members)?)
        } else {
            None
        };
        Ok(FunctionNet {
            id: id.into(),
            members,
            mesh_delta,
            domain_lo,
            domain_hi,
            entropy_meta: None,
            gram,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    /// Row-major Gram matrix; errors for nets too large to materialize.
    pub fn gram(&self) -> Result<&[f64]> {
        self.gram.as_deref().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "gram matrix not materialized for a net of {} members (limit {})",
                self.members.len(),
                GRAM_EAGER_LIMIT
            ))
        })
    }

    pub fn gram_entry(&self, l: usize, k: usize) -> Result<f64> {
        match &self.gram {
            Some(g) => Ok(g[l * self.len() + k]),
            None => inner_product(&self.members[l], &self.members[k]),
        }
    }

    /// Union of the member support boxes.
    pub fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for m in &self.members {
            let (l, h) = m.support_box();
            for i in 0..d {
                lo[i] = lo[i].min(l[i]);
                hi[i] = hi[i].max(h[i]);
            }
        }
        (lo, hi)
    }

    /// Largest sup-norm bound among the members.
    pub fn kappa(&self) -> f64 {
        self.members
            .iter()
            .map(|m| m.bound_kappa())
            .fold(0.0, f64::max)
    }

    /// Minimal `rho`-distance from `probe` to the net members.
    pub fn covering_distance(&self, probe: &FunctionDescriptor) -> Result<f64> {
        let mut best = f64::INFINITY;
        for m in &self.members {
            best = best.min(l2_distance(probe, m)?);
        }
        Ok(best)
    }

    /// Self-describing JSON dump (kind, geometry, Gram matrix) for
    /// inspection.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("net serializes")
    }
}

fn infer_domain(members: &[FunctionDescriptor]) -> (Vec<f64>, Vec<f64>) {
    let d = members[0].dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for m in members {
        let (l, h) = m.support_box();
        for i in 0..d {
            lo[i] = lo[i].min(l[i]);
            hi[i] = hi[i].max(h[i]);
        }
    }
    let eps = 1e-9;
    if lo.iter().all(|&v| v >= -0.5 - eps) && hi.iter().all(|&v| v <= 0.5 + eps) {
        (vec![-0.5; d], vec![0.5; d])
    } else if lo.iter().all(|&v| v >= -eps) && hi.iter().all(|&v| v <= 1.0 + eps) {
        (vec![0.0; d], vec![1.0; d])
    } else {
        (lo, hi)
    }
}

/// Parameterized classes for which covering nets can be generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassSpec {
    /// `{1_{[0,t]} : t in (0, 1]}` on the unit interval.
    Intervals1d,
    /// Closed rectangles contained in `I^2`.
    Rectangles2d,
    /// A single kernel (shift/scale family frozen at the identity).
    SingleKernel { kernel: Kernel1d, dim: usize },
}

/// Build a `rho`-covering net of radius `mesh_delta` over a shipped class.
///
/// For the interval class `rho(t, u) = sqrt(|t - u|)`, so a parameter grid of
/// spacing `mesh_delta^2` suffices. For rectangles every corner coordinate is
/// snapped to a grid of spacing `mesh_delta^2 / 2.5`; the symmetric
/// difference moved per face is at most half a grid step times the side
/// length, which keeps the `L_2` distortion under `mesh_delta`.
pub fn build_net(class: &ClassSpec, mesh_delta: f64) -> Result<FunctionNet> {
    if mesh_delta <= 0.0 {
        return Err(Error::InvalidParameter("mesh_delta must be positive".into()));
    }
    match class {
        ClassSpec::Intervals1d => {
            let m = (1.0 / (mesh_delta * mesh_delta) - 1e-9).ceil().max(1.0) as usize;
            let ts: Vec<f64> = (1..=m).map(|k| k as f64 / m as f64).collect();
            let mut net = interval_net(&ts)?;
            net.mesh_delta = Some(mesh_delta);
            net.id = format!("intervals-cover-{mesh_delta}");
            Ok(net)
        }
        ClassSpec::Rectangles2d => {
            let spacing = mesh_delta * mesh_delta / 2.5;
            let cells = (1.0 / spacing - 1e-9).ceil().max(1.0) as usize;
            let ng = cells + 1;
            let grid: Vec<f64> = (0..ng).map(|i| i as f64 / cells as f64 - 0.5).collect();
            let mut members = Vec::with_capacity(ng * ng * (ng - 1) * (ng - 1) / 4);
            for i1 in 0..ng {
                for j1 in (i1 + 1)..ng {
                    for i2 in 0..ng {
                        for j2 in (i2 + 1)..ng {
                            members.push(FunctionDescriptor::RectIndicator {
                                lo: vec![grid[i1], grid[i2]],
                                hi: vec![grid[j1], grid[j2]],
                            });
                        }
                    }
                }
            }
            let mut net = FunctionNet::from_members(
                format!("rectangles-cover-{mesh_delta}"),
                members,
                Some(mesh_delta),
            )?;
            net.domain_lo = vec![-0.5, -0.5];
            net.domain_hi = vec![0.5, 0.5];
            Ok(net)
        }
        ClassSpec::SingleKernel { kernel, dim } => {
            let member = FunctionDescriptor::kernel(*kernel, *dim)?;
            let mut net = FunctionNet::from_members(
                format!("kernel-{kernel:?}-{dim}d").to_lowercase(),
                vec![member],
                Some(mesh_delta),
            )?;
            net.mesh_delta = Some(mesh_delta);
            Ok(net)
        }
    }
}

/// The distribution-function net `{1_{[0, t_l]}}` on `[0, 1]`.
pub fn interval_net(ts: &[f64]) -> Result<FunctionNet> {
    if ts.is_empty() {
        return Err(Error::InvalidParameter("interval net needs endpoints".into()));
    }
    if ts.windows(2).any(|w| w[0] >= w[1]) || ts[0] <= 0.0 || *ts.last().unwrap() > 1.0 {
        return Err(Error::InvalidParameter(
            "interval endpoints must be strictly increasing in (0, 1]".into(),
        ));
    }
    let members: Vec<FunctionDescriptor> = ts
        .iter()
        .map(|&t| FunctionDescriptor::RectIndicator {
            lo: vec![0.0],
            hi: vec![t],
        })
        .collect();
    let mut net = FunctionNet::from_members("intervals", members, None)?;
    net.domain_lo = vec![0.0];
    net.domain_hi = vec![1.0];
    Ok(net)
}

/// Anchored rectangles `[-1/2, u] x [-1/2, v]` in `I^2`, one per `(u, v)`
/// pair; the two-dimensional analog of the interval net.
pub fn anchored_rect_net(us: &[f64], vs: &[f64]) -> Result<FunctionNet> {
    if us.is_empty() || vs.is_empty() {
        return Err(Error::InvalidParameter("anchored rect net needs anchors".into()));
    }
    for &v in us.iter().chain(vs) {
        if !(-0.5..=0.5).contains(&v) || v <= -0.5 {
            return Err(Error::InvalidParameter(
                "anchors must lie in (-1/2, 1/2]".into(),
            ));
        }
    }
    let mut members = Vec::with_capacity(us.len() * vs.len());
    for &u in us {
        for &v in vs {
            members.push(FunctionDescriptor::RectIndicator {
                lo: vec![-0.5, -0.5],
                hi: vec![u, v],
            });
        }
    }
    let mut net = FunctionNet::from_members("anchored-rects", members, None)?;
    net.domain_lo = vec![-0.5, -0.5];
    net.domain_hi = vec![0.5, 0.5];
    Ok(net)
}

/// Extract the interval endpoints of a net built by [`interval_net`].
pub fn interval_endpoints(net: &FunctionNet) -> Result<Vec<f64>> {
    net.members
        .iter()
        .map(|m| match m {
            FunctionDescriptor::RectIndicator { lo, hi }
                if lo.len() == 1 && lo[0] == 0.0 =>
            {
                Ok(hi[0])
            }
            _ => Err(Error::InvalidParameter(
                "net is not an interval net on [0, 1]".into(),
            )),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rect2(l1: f64, l2: f64, h1: f64, h2: f64) -> FunctionDescriptor {
        FunctionDescriptor::rect(vec![l1, l2], vec![h1, h2]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let r = rect2(-0.5, -0.5, 0.0, 0.0);
        assert_eq!(r.evaluate(&[-0.25, -0.25]), 1.0);
        assert_eq!(r.evaluate(&[0.75, 0.0]), 0.0);
        let k = FunctionDescriptor::kernel(Kernel1d::Epanechnikov, 1).unwrap();
        assert_eq!(k.evaluate(&[0.0]), 1.5);
        assert_eq!(k.evaluate(&[0.75]), 0.0);
    }

    #[test]
    fn inner_product_examples() {
        let a = rect2(-0.5, -0.5, 0.0, 0.0);
        let b = rect2(-0.25, -0.25, 0.25, 0.25);
        assert!((inner_product(&a, &b).unwrap() - 0.0625).abs() < 1e-15);
        let k = FunctionDescriptor::kernel(Kernel1d::Epanechnikov, 1).unwrap();
        assert!((inner_product(&k, &k).unwrap() - 1.2).abs() < 1e-14);
        let c = rect2(0.1, 0.1, 0.4, 0.4);
        let d = rect2(-0.4, -0.4, -0.1, -0.1);
        assert_eq!(inner_product(&c, &d).unwrap(), 0.0);
    }

    #[test]
    fn l2_distance_examples() {
        let g = rect2(-0.5, -0.5, 0.0, 0.0);
        assert_eq!(l2_distance(&g, &g).unwrap(), 0.0);
        // disjoint indicators of measure 1/4 each
        let a = FunctionDescriptor::rect(vec![0.0], vec![0.25]).unwrap();
        let b = FunctionDescriptor::rect(vec![0.5], vec![0.75]).unwrap();
        assert!((l2_distance(&a, &b).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        // interval class: rho = sqrt(|t - u|)
        let s = FunctionDescriptor::rect(vec![0.0], vec![0.3]).unwrap();
        let t = FunctionDescriptor::rect(vec![0.0], vec![0.8]).unwrap();
        assert!((l2_distance(&s, &t).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gram_examples() {
        let net = interval_net(&[0.5, 1.0]).unwrap();
        let g = net.gram().unwrap();
        assert_eq!(g, &[0.5, 0.5, 0.5, 1.0]);
        let k = FunctionDescriptor::kernel(Kernel1d::Epanechnikov, 1).unwrap();
        let g = gram_matrix(&[k]).unwrap();
        assert!((g[0] - 1.2).abs() < 1e-14);
    }

    #[test]
    fn kernel_norms() {
        assert_eq!(kernel_norm_sq(Kernel1d::Uniform, 1), 1.0);
        assert!((kernel_norm_sq(Kernel1d::Epanechnikov, 1) - 1.2).abs() < 1e-15);
        assert!((kernel_norm_sq(Kernel1d::Epanechnikov, 2) - 1.44).abs() < 1e-15);
    }

    #[test]
    fn ellipse_area_and_rect_overlap() {
        // circle of radius 0.4 centered at origin: shape = I / 0.16
        let a = 1.0 / 0.16;
        let e = FunctionDescriptor::ellipsoid(vec![0.0, 0.0], vec![a, 0.0, 0.0, a]).unwrap();
        let area = std::f64::consts::PI * 0.16;
        assert!((e.integral() - area).abs() < 1e-12);
        // full-box rect recovers the area
        let full = rect2(-0.5, -0.5, 0.5, 0.5);
        let got = inner_product(&e, &full).unwrap();
        assert!((got - area).abs() < 2e-10, "{got} vs {area}");
        // half-plane cut through the center: half the area
        let half = rect2(-0.5, -0.5, 0.0, 0.5);
        let got = inner_product(&e, &half).unwrap();
        assert!((got - 0.5 * area).abs() < 2e-10);
        // self inner product equals the area
        let got = inner_product(&e, &e).unwrap();
        assert!((got - area).abs() < 2e-10);
    }

    #[test]
    fn ellipse_kernel_against_midpoint_reference() {
        let a = 1.0 / 0.09;
        let e = FunctionDescriptor::ellipsoid(vec![0.1, -0.05], vec![a, 0.0, 0.0, a]).unwrap();
        let k = FunctionDescriptor::kernel(Kernel1d::Epanechnikov, 2).unwrap();
        let got = inner_product(&e, &k).unwrap();
        // crude midpoint reference on a fine grid
        let m = 2000;
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                let x = -0.5 + (i as f64 + 0.5) / m as f64;
                let y = -0.5 + (j as f64 + 0.5) / m as f64;
                acc += e.evaluate(&[x, y]) * k.evaluate(&[x, y]);
            }
        }
        acc /= (m * m) as f64;
        assert!((got - acc).abs() < 5e-4, "{got} vs {acc}");
    }

    #[test]
    fn combo_expands_bilinearly() {
        let k = FunctionDescriptor::kernel(Kernel1d::Epanechnikov, 1).unwrap();
        let r = FunctionDescriptor::rect(vec![-0.5], vec![0.5]).unwrap();
        let combo = FunctionDescriptor::combo(vec![
            ComboTerm { coeff: 2.0, function: k.clone() },
            ComboTerm { coeff: -1.0, function: r.clone() },
        ])
        .unwrap();
        // ||2K - 1||^2 = 4*1.2 - 4*1 + 1 = 1.8   (since (K, 1) = 1)
        let got = combo.norm_sq().unwrap();
        assert!((got - 1.8).abs() < 1e-12);
        assert_eq!(combo.evaluate(&[0.0]), 2.0 * 1.5 - 1.0);
    }

    #[test]
    fn build_net_interval_grid() {
        let net = build_net(&ClassSpec::Intervals1d, 0.1).unwrap();
        assert_eq!(net.len(), 100);
        let ts = interval_endpoints(&net).unwrap();
        assert!((ts[0] - 0.01).abs() < 1e-12);
        assert_eq!(*ts.last().unwrap(), 1.0);
        // covering radius: any t in (0,1] is within mesh of the net
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..200 {
            let t: f64 = rng.random_range(1e-6..1.0);
            let probe = FunctionDescriptor::rect(vec![0.0], vec![t]).unwrap();
            let d = net.covering_distance(&probe).unwrap();
            assert!(d <= 0.1 + 1e-9, "t={t} dist={d}");
        }
    }

    #[test]
    fn build_net_single_kernel() {
        let net = build_net(
            &ClassSpec::SingleKernel { kernel: Kernel1d::Epanechnikov, dim: 2 },
            0.5,
        )
        .unwrap();
        assert_eq!(net.len(), 1);
        assert!((net.gram().unwrap()[0] - 1.44).abs() < 1e-12);
    }

    #[test]
    fn rectangles_cover_probe() {
        let mesh = 0.25;
        let net = build_net(&ClassSpec::Rectangles2d, mesh).unwrap();
        assert!(net.gram.is_none(), "covering net must not materialize gram");
        let spacing = mesh * mesh / 2.5;
        let cells = (1.0 / spacing - 1e-9).ceil() as usize;
        let snap = |v: f64| ((v + 0.5) * cells as f64).round().clamp(0.0, cells as f64) as usize;
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let mut c1: Vec<f64> = (0..2).map(|_| rng.random_range(-0.5..0.5)).collect();
            let mut c2: Vec<f64> = (0..2).map(|_| rng.random_range(-0.5..0.5)).collect();
            for i in 0..2 {
                if c1[i] > c2[i] {
                    std::mem::swap(&mut c1[i], &mut c2[i]);
                }
                if c1[i] == c2[i] {
                    c2[i] = (c2[i] + 1e-3).min(0.5);
                }
            }
            let probe = FunctionDescriptor::RectIndicator { lo: c1.clone(), hi: c2.clone() };
            // snapped member (degeneracy pushed apart by one cell) certifies cover
            let mut il = [snap(c1[0]), snap(c1[1])];
            let mut ih = [snap(c2[0]), snap(c2[1])];
            for i in 0..2 {
                if il[i] == ih[i] {
                    if ih[i] < cells {
                        ih[i] += 1;
                    } else {
                        il[i] -= 1;
                    }
                }
            }
            let cand = FunctionDescriptor::RectIndicator {
                lo: vec![
                    il[0] as f64 / cells as f64 - 0.5,
                    il[1] as f64 / cells as f64 - 0.5,
                ],
                hi: vec![
                    ih[0] as f64 / cells as f64 - 0.5,
                    ih[1] as f64 / cells as f64 - 0.5,
                ],
            };
            let d = l2_distance(&probe, &cand).unwrap();
            assert!(d <= mesh + 1e-9, "probe {probe:?} dist {d}");
        }
    }

    #[test]
    fn shift_scale_consistency() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let shapes: Vec<FunctionDescriptor> = vec![
            rect2(-0.4, -0.2, 0.1, 0.3),
            FunctionDescriptor::ellipsoid(vec![0.05, -0.1], vec![20.0, 2.0, 2.0, 30.0]).unwrap(),
        ];
        for g in &shapes {
            for _ in 0..50 {
                let z: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
                let lambda: f64 = rng.random_range(1.0..3.0);
                let t = g.shift_scale(&z, lambda).unwrap();
                for _ in 0..20 {
                    let x: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let moved: Vec<f64> =
                        z.iter().zip(&x).map(|(zi, xi)| zi - lambda * xi).collect();
                    assert_eq!(g.evaluate(&moved), t.evaluate(&x));
                }
            }
        }
    }

    #[test]
    fn cauchy_schwarz_on_shipped_nets() {
        let nets = [
            interval_net(&[0.2, 0.5, 0.9, 1.0]).unwrap(),
            anchored_rect_net(&[-0.2, 0.1, 0.5], &[-0.1, 0.4]).unwrap(),
        ];
        for net in &nets {
            let q = net.len();
            let g = net.gram().unwrap();
            for l in 0..q {
                for k in 0..q {
                    assert!(
                        g[l * q + k].abs() <= (g[l * q + l] * g[k * q + k]).sqrt() + 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn sup_norm_and_support_probes() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let net = anchored_rect_net(&[-0.2, 0.3, 0.5], &[0.0, 0.5]).unwrap();
        let kappa = net.kappa();
        assert_eq!(kappa, 1.0);
        for m in &net.members {
            let (lo, hi) = m.support_box();
            assert!(lo.iter().all(|&v| v >= -0.5 - 1e-12));
            assert!(hi.iter().all(|&v| v <= 0.5 + 1e-12));
            for _ in 0..200 {
                let x: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
                let v = m.evaluate(&x).abs();
                assert!(v <= kappa);
                let outside = x
                    .iter()
                    .zip(lo.iter().zip(&hi))
                    .any(|(xi, (l, h))| xi < l || xi > h);
                if outside {
                    assert_eq!(m.evaluate(&x), 0.0);
                }
            }
        }
    }

    #[test]
    fn duplicate_member_gram_is_singular() {
        let t = FunctionDescriptor::rect(vec![0.0], vec![0.5]).unwrap();
        let g = gram_matrix(&[t.clone(), t]).unwrap();
        let det = g[0] * g[3] - g[1] * g[2];
        assert!(det.abs() < 1e-10);
    }
}
