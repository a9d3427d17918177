//! Empirical-process engines: the local empirical process over a net, the
//! uniform-increment process, the oscillation modulus of the uniform
//! empirical process, kernel density estimation with its sup statistic and
//! plug-in band, and bandwidth schedule validation.

use crate::density::{expectation_h, smoothed_density, Density, Sample};
use crate::error::{Error, Result};
use crate::functions::{FunctionDescriptor, FunctionNet};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Normalization applied to the local empirical process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// The raw process `E_n`.
    Raw,
    /// `D_n = E_n / sqrt(2 log(1/h))`.
    Log,
    /// `L_n = E_n / sqrt(2 log(1/h) f(z))`; requires `f(z) > 0`.
    LogDensity,
}

/// Where a process evaluation is anchored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Location {
    Point(Vec<f64>),
    Time(f64),
}

/// A vector of process values over the members of a net.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessEval {
    pub psi: Vec<f64>,
    pub n: usize,
    pub h: f64,
    pub location: Location,
    pub mode: Normalization,
    /// The density value used by the `LogDensity` normalization.
    pub f_at_z: Option<f64>,
    pub net_id: String,
}

// ---------------------------------------------------------------------------
// Indexed samples

/// A sample with per-axis sorted views for windowed queries. Construction is
/// `O(d n log n)`; a box query costs a binary search plus the best axis'
/// window size.
pub struct IndexedSample<'a> {
    sample: &'a Sample,
    /// per axis: point indices sorted by that coordinate (stable sort)
    order: Vec<Vec<u32>>,
    /// per axis: the sorted coordinate values
    values: Vec<Vec<f64>>,
}

impl<'a> IndexedSample<'a> {
    pub fn new(sample: &'a Sample) -> Self {
        let d = sample.dim;
        let mut order = Vec::with_capacity(d);
        let mut values = Vec::with_capacity(d);
        for axis in 0..d {
            let mut idx: Vec<u32> = (0..sample.n as u32).collect();
            idx.sort_by(|&a, &b| {
                let va = sample.points[a as usize * d + axis];
                let vb = sample.points[b as usize * d + axis];
                va.partial_cmp(&vb).unwrap()
            });
            let vals: Vec<f64> = idx
                .iter()
                .map(|&i| sample.points[i as usize * d + axis])
                .collect();
            order.push(idx);
            values.push(vals);
        }
        IndexedSample {
            sample,
            order,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.sample.n
    }

    pub fn dim(&self) -> usize {
        self.sample.dim
    }

    pub fn sample(&self) -> &Sample {
        self.sample
    }

    /// Sorted coordinates along `axis`.
    pub fn sorted_axis(&self, axis: usize) -> &[f64] {
        &self.values[axis]
    }

    fn axis_range(&self, axis: usize, lo: f64, hi: f64) -> (usize, usize) {
        let v = &self.values[axis];
        let a = v.partition_point(|&x| x < lo);
        let b = v.partition_point(|&x| x <= hi);
        (a, b)
    }

    /// Indices of the points inside the closed box `[lo, hi]`, found by
    /// scanning the axis with the smallest candidate window.
    pub fn window_indices(&self, lo: &[f64], hi: &[f64]) -> Vec<u32> {
        let d = self.dim();
        let mut best_axis = 0;
        let mut best = (0usize, usize::MAX);
        for axis in 0..d {
            let (a, b) = self.axis_range(axis, lo[axis], hi[axis]);
            if b.saturating_sub(a) < best.1.saturating_sub(best.0) {
                best = (a, b);
                best_axis = axis;
            }
        }
        let mut out = Vec::new();
        for k in best.0..best.1 {
            let i = self.order[best_axis][k] as usize;
            let p = self.sample.point(i);
            let inside = (0..d).all(|ax| p[ax] >= lo[ax] && p[ax] <= hi[ax]);
            if inside {
                out.push(i as u32);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Local empirical process

/// `E g_l(h^{-1/d}(z - Z))` for every net member, to 1e-8 absolute accuracy.
pub fn centering_terms(
    density: &Density,
    net: &FunctionNet,
    z: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    net.members
        .iter()
        .map(|g| expectation_h(density, g, h, z))
        .collect()
}

/// The local empirical process at `z` over a net:
/// `psi_l = (nh)^{-1/2} sum_i {g_l(h^{-1/d}(z - Z_i)) - E g_l(h^{-1/d}(z - Z))}`.
///
/// Only sample points inside the scaled support window of the net
/// contribute; they are located through the per-axis sorted index.
pub fn local_empirical(
    sample: &IndexedSample,
    z: &[f64],
    h: f64,
    net: &FunctionNet,
    density: &Density,
    mode: Normalization,
) -> Result<ProcessEval> {
    let centering = centering_terms(density, net, z, h)?;
    let f_at_z = density.pdf(z);
    local_empirical_with(sample, z, h, net, &centering, f_at_z, mode)
}

/// As [`local_empirical`] with precomputed centerings and density value,
/// for replication loops that share `(z, h, net)`.
pub fn local_empirical_with(
    sample: &IndexedSample,
    z: &[f64],
    h: f64,
    net: &FunctionNet,
    centering: &[f64],
    f_at_z: f64,
    mode: Normalization,
) -> Result<ProcessEval> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must satisfy 0 < h < 1, got {h}"
        )));
    }
    let d = sample.dim();
    if z.len() != d || net.dim() != d || centering.len() != net.len() {
        return Err(Error::InvalidParameter(
            "dimension mismatch in local process evaluation".into(),
        ));
    }
    if matches!(mode, Normalization::LogDensity) && !(f_at_z > 0.0) {
        return Err(Error::Domain(format!(
            "density-normalized process needs f(z) > 0 at z = {z:?}"
        )));
    }
    let s = h.powf(1.0 / d as f64);
    let (glo, ghi) = net.support_box();
    // window in sample space, padded by a hair so boundary points are never
    // lost to division rounding; the member evaluation decides exactly
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for i in 0..d {
        let pad = 1e-12 * (1.0 + z[i].abs() + s);
        lo[i] = z[i] - s * ghi[i] - pad;
        hi[i] = z[i] - s * glo[i] + pad;
    }
    let q = net.len();
    let mut sums = vec![0.0; q];
    let mut u = vec![0.0; d];
    for &idx in &sample.window_indices(&lo, &hi) {
        let p = sample.sample().point(idx as usize);
        for i in 0..d {
            u[i] = (z[i] - p[i]) / s;
        }
        for (l, g) in net.members.iter().enumerate() {
            sums[l] += g.evaluate(&u);
        }
    }
    let n = sample.n();
    let scale = 1.0 / (n as f64 * h).sqrt();
    let mut psi: Vec<f64> = (0..q)
        .map(|l| (sums[l] - n as f64 * centering[l]) * scale)
        .collect();
    let log_norm = (2.0 * (1.0 / h).ln()).sqrt();
    match mode {
        Normalization::Raw => {}
        Normalization::Log => psi.iter_mut().for_each(|v| *v /= log_norm),
        Normalization::LogDensity => {
            let root_f = f_at_z.sqrt();
            psi.iter_mut().for_each(|v| *v = *v / log_norm / root_f);
        }
    }
    Ok(ProcessEval {
        psi,
        n,
        h,
        location: Location::Point(z.to_vec()),
        mode,
        f_at_z: Some(f_at_z),
        net_id: net.id.clone(),
    })
}

/// Full-enumeration evaluation of the same quantity, with no windowing; the
/// independent reference for the binned path.
pub fn local_empirical_reference(
    sample: &Sample,
    z: &[f64],
    h: f64,
    net: &FunctionNet,
    centering: &[f64],
) -> Vec<f64> {
    let d = sample.dim;
    let s = h.powf(1.0 / d as f64);
    let q = net.len();
    let mut sums = vec![0.0; q];
    let mut u = vec![0.0; d];
    for i in 0..sample.n {
        let p = sample.point(i);
        for k in 0..d {
            u[k] = (z[k] - p[k]) / s;
        }
        for (l, g) in net.members.iter().enumerate() {
            sums[l] += g.evaluate(&u);
        }
    }
    let scale = 1.0 / (sample.n as f64 * h).sqrt();
    (0..q)
        .map(|l| (sums[l] - sample.n as f64 * centering[l]) * scale)
        .collect()
}

// ---------------------------------------------------------------------------
// Uniform increments

/// Uniform sample on `[0, 1]` with sorted values, the substrate for the
/// increment process and the oscillation modulus.
pub struct SortedUniform {
    pub values: Vec<f64>,
    pub n: usize,
}

impl SortedUniform {
    pub fn from_sample(sample: &Sample) -> Result<Self> {
        if sample.dim != 1 {
            return Err(Error::InvalidParameter(
                "uniform increments need a one-dimensional sample".into(),
            ));
        }
        let mut values = sample.points.clone();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(SortedUniform {
            n: values.len(),
            values,
        })
    }

    /// `G_n(t)`: fraction of points `<= t`.
    pub fn ecdf(&self, t: f64) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.count_le(t) as f64 / self.n as f64
    }

    fn count_le(&self, t: f64) -> usize {
        self.values.partition_point(|&x| x <= t)
    }
}

/// The increment process
/// `xi_n(t, s) = sqrt(n/h) {G_n(t + h s) - G_n(t) - h s}` on a grid of
/// `s in [0, 1]`; the `normalized` flag divides by `sqrt(2 log(1/h))`.
pub fn increment_process(
    sample: &SortedUniform,
    t: f64,
    h: f64,
    s_grid: &[f64],
    normalized: bool,
) -> Result<ProcessEval> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParameter(format!("bad bandwidth {h}")));
    }
    if !(0.0..=1.0 - h).contains(&t) {
        return Err(Error::Domain(format!(
            "increment anchor t = {t} outside [0, 1 - h] with h = {h}"
        )));
    }
    if s_grid.iter().any(|&s| !(0.0..=1.0).contains(&s)) {
        return Err(Error::InvalidParameter("s grid must lie in [0, 1]".into()));
    }
    let n = sample.n;
    let amp = (n as f64 / h).sqrt();
    let g_t = sample.ecdf(t);
    let denom = if normalized {
        (2.0 * (1.0 / h).ln()).sqrt()
    } else {
        1.0
    };
    let psi: Vec<f64> = s_grid
        .iter()
        .map(|&s| amp * (sample.ecdf(t + h * s) - g_t - h * s) / denom)
        .collect();
    Ok(ProcessEval {
        psi,
        n,
        h,
        location: Location::Time(t),
        mode: if normalized {
            Normalization::Log
        } else {
            Normalization::Raw
        },
        f_at_z: None,
        net_id: String::new(),
    })
}

// ---------------------------------------------------------------------------
// Oscillation modulus

// The supremum defining the oscillation modulus is attained on a finite
// critical set: windows pinched onto order-statistic pairs (positive part),
// point-free stretches between order statistics including the domain
// endpoints, and windows of length exactly h anchored just after a point, at
// 0, or ending at 1 (negative part). Both the fast sweep and the quadratic
// reference enumerate the same candidates with the same arithmetic, so they
// agree bit for bit.

struct OscCandidates {
    /// sorted points
    p: Vec<f64>,
    n: usize,
    /// positive part: value(i <= j) = a[j] - b[i] when p[j] - p[i] <= h
    a: Vec<f64>,
    b: Vec<f64>,
    /// gap part over 0, points, 1: value(i < j) = c[j] - d[i] when
    /// q[j] - q[i] <= h, excluding the full-interval pair
    q: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl OscCandidates {
    fn new(mut points: Vec<f64>) -> Self {
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = points.len();
        let nf = n as f64;
        let a: Vec<f64> = points
            .iter()
            .enumerate()
            .map(|(j, &pj)| (j + 1) as f64 / nf - pj)
            .collect();
        let b: Vec<f64> = points
            .iter()
            .enumerate()
            .map(|(i, &pi)| i as f64 / nf - pi)
            .collect();
        let mut q = Vec::with_capacity(n + 2);
        q.push(0.0);
        q.extend_from_slice(&points);
        q.push(1.0);
        let c: Vec<f64> = q
            .iter()
            .enumerate()
            .map(|(j, &qj)| qj - (j as f64 - 1.0) / nf)
            .collect();
        let d: Vec<f64> = q
            .iter()
            .enumerate()
            .map(|(i, &qi)| qi - i as f64 / nf)
            .collect();
        OscCandidates {
            p: points,
            n,
            a,
            b,
            q,
            c,
            d,
        }
    }

    /// Negative-part value of the length-h window `(anchor, anchor + h]`.
    fn length_h_value(&self, anchor: f64, h: f64) -> f64 {
        let hi = anchor + h;
        let count = self.p.partition_point(|&x| x <= hi) - self.p.partition_point(|&x| x <= anchor);
        h - count as f64 / self.n as f64
    }

    fn anchors(&self, h: f64) -> impl Iterator<Item = f64> + '_ {
        let edge = 1.0 - h;
        std::iter::once(0.0)
            .chain(self.p.iter().copied().filter(move |&x| x <= edge))
            .chain(std::iter::once(edge))
    }
}

/// Oscillation modulus of the uniform empirical process,
/// `sqrt(n) * sup {|G_n(t+s) - G_n(t) - s| : 0 <= t, t+s <= 1, 0 <= s <= h}`,
/// in `O(n log n)` (two-pointer sweeps with monotone deques over the sorted
/// sample, plus binary-searched window counts).
pub fn oscillation_modulus(points: &[f64], h: f64) -> f64 {
    assert!(h > 0.0 && h < 1.0, "need 0 < h < 1");
    if points.is_empty() {
        return 0.0;
    }
    let cand = OscCandidates::new(points.to_vec());
    let mut best = f64::NEG_INFINITY;

    // positive part: sliding max of a[j] - b[i] over i <= j, p[j] - p[i] <= h
    let mut deque: VecDeque<usize> = VecDeque::new();
    let mut lo = 0usize;
    for j in 0..cand.n {
        while let Some(&back) = deque.back() {
            if cand.b[back] >= cand.b[j] {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back(j);
        while cand.p[j] - cand.p[lo] > h {
            if deque.front() == Some(&lo) {
                deque.pop_front();
            }
            lo += 1;
        }
        let front = *deque.front().unwrap();
        best = best.max(cand.a[j] - cand.b[front]);
    }

    // gap part over the augmented points (0, sample, 1)
    let m = cand.q.len();
    let mut deque: VecDeque<usize> = VecDeque::new();
    let mut lo = 0usize;
    for j in 1..m {
        // window of candidate i's is [lo, j - 1]
        let i_new = j - 1;
        while let Some(&back) = deque.back() {
            if cand.d[back] >= cand.d[i_new] {
                deque.pop_back();
            } else {
                break;
            }
        }
        deque.push_back(i_new);
        while cand.q[j] - cand.q[lo] > h {
            if deque.front() == Some(&lo) {
                deque.pop_front();
            }
            lo += 1;
        }
        if deque.is_empty() {
            continue;
        }
        if j == m - 1 {
            // the full-interval pair (0, 1) is not a window; rescan without it
            let mut mn = f64::INFINITY;
            for i in lo.max(1)..j {
                if cand.q[j] - cand.q[i] <= h {
                    mn = mn.min(cand.d[i]);
                }
            }
            if mn.is_finite() {
                best = best.max(cand.c[j] - mn);
            }
        } else {
            let front = *deque.front().unwrap();
            best = best.max(cand.c[j] - cand.d[front]);
        }
    }

    // length-h windows anchored after points, at 0, or ending at 1
    for anchor in cand.anchors(h) {
        best = best.max(cand.length_h_value(anchor, h));
    }

    (cand.n as f64).sqrt() * best.max(0.0)
}

/// Quadratic-time reference for the oscillation modulus: enumerates every
/// candidate window directly. Shares the candidate arithmetic with the fast
/// path so agreement is exact, but selects by exhaustive scan.
pub fn oscillation_modulus_reference(points: &[f64], h: f64) -> f64 {
    assert!(h > 0.0 && h < 1.0, "need 0 < h < 1");
    if points.is_empty() {
        return 0.0;
    }
    let cand = OscCandidates::new(points.to_vec());
    let mut best = f64::NEG_INFINITY;
    for j in 0..cand.n {
        for i in 0..=j {
            if cand.p[j] - cand.p[i] <= h {
                best = best.max(cand.a[j] - cand.b[i]);
            }
        }
    }
    let m = cand.q.len();
    for j in 1..m {
        for i in 0..j {
            if i == 0 && j == m - 1 {
                continue;
            }
            if cand.q[j] - cand.q[i] <= h {
                best = best.max(cand.c[j] - cand.d[i]);
            }
        }
    }
    for anchor in cand.anchors(h) {
        best = best.max(cand.length_h_value(anchor, h));
    }
    (cand.n as f64).sqrt() * best.max(0.0)
}

// ---------------------------------------------------------------------------
// Kernel density estimation

/// `f_n(z) = (nh)^{-1} sum_i K(h^{-1/d}(z - Z_i))`.
pub fn kde(sample: &IndexedSample, kernel: &FunctionDescriptor, h: f64, z: &[f64]) -> Result<f64> {
    if sample.n() == 0 {
        return Err(Error::Domain("kde of an empty sample".into()));
    }
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidParameter(format!("bad bandwidth {h}")));
    }
    let d = sample.dim();
    if kernel.dim() != d || z.len() != d {
        return Err(Error::InvalidParameter("kde dimension mismatch".into()));
    }
    let s = h.powf(1.0 / d as f64);
    let (glo, ghi) = kernel.support_box();
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for i in 0..d {
        let pad = 1e-12 * (1.0 + z[i].abs() + s);
        lo[i] = z[i] - s * ghi[i] - pad;
        hi[i] = z[i] - s * glo[i] + pad;
    }
    let mut acc = 0.0;
    let mut u = vec![0.0; d];
    for &idx in &sample.window_indices(&lo, &hi) {
        let p = sample.sample().point(idx as usize);
        for i in 0..d {
            u[i] = (z[i] - p[i]) / s;
        }
        acc += kernel.evaluate(&u);
    }
    Ok(acc / (sample.n() as f64 * h))
}

/// The normalized sup statistic of the KDE over a grid:
/// `max_z sqrt(nh) |f_n(z) - E f_n(z)| / sqrt(2 ||K||^2 log(1/h))`, with
/// `E f_n = f * K_h` from the smoothing machinery. The `normalize_by_f`
/// flag divides pointwise by `sqrt(f(z))` and requires `f > 0` on the grid.
pub fn kde_sup_stat(
    sample: &IndexedSample,
    kernel: &FunctionDescriptor,
    h: f64,
    z_grid: &[Vec<f64>],
    density: &Density,
    normalize_by_f: bool,
) -> Result<f64> {
    if z_grid.is_empty() {
        return Err(Error::InvalidParameter("empty evaluation grid".into()));
    }
    let norm_sq = kernel.norm_sq()?;
    let denom = (2.0 * norm_sq * (1.0 / h).ln()).sqrt();
    let amp = (sample.n() as f64 * h).sqrt();
    let mut worst: f64 = 0.0;
    for z in z_grid {
        let fnz = kde(sample, kernel, h, z)?;
        let efn = smoothed_density(density, kernel, h, z)?;
        let mut t = amp * (fnz - efn).abs() / denom;
        if normalize_by_f {
            let f = density.pdf(z);
            if !(f > 0.0) {
                return Err(Error::Domain(format!(
                    "normalized sup statistic needs f(z) > 0 on the grid, got f({z:?}) = 0"
                )));
            }
            t /= f.sqrt();
        }
        worst = worst.max(t);
    }
    Ok(worst)
}

/// One row of the plug-in confidence band.
#[derive(Debug, Clone, Serialize)]
pub struct BandPoint {
    pub z: Vec<f64>,
    pub f_n: f64,
    pub halfwidth: f64,
}

/// Plug-in band: `halfwidth = sqrt(2 ||K||^2 f_n(z) log(1/h) / (nh))`.
pub fn kde_band(
    sample: &IndexedSample,
    kernel: &FunctionDescriptor,
    h: f64,
    z_grid: &[Vec<f64>],
) -> Result<Vec<BandPoint>> {
    let norm_sq = kernel.norm_sq()?;
    let nh = sample.n() as f64 * h;
    z_grid
        .iter()
        .map(|z| {
            let f_n = kde(sample, kernel, h, z)?;
            let halfwidth = (2.0 * norm_sq * f_n.max(0.0) * (1.0 / h).ln() / nh).sqrt();
            Ok(BandPoint {
                z: z.clone(),
                f_n,
                halfwidth,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Bandwidth schedules

/// A bandwidth sequence `h_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BandwidthSchedule {
    /// `h_n = n^{-alpha}` with `0 < alpha < 1`.
    Power { alpha: f64 },
    /// Explicit `(n, h)` table; every requested `n` must be present.
    Table { pairs: Vec<(u64, f64)> },
}

impl BandwidthSchedule {
    pub fn h(&self, n: u64) -> Result<f64> {
        match self {
            BandwidthSchedule::Power { alpha } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "power schedule needs 0 < alpha < 1, got {alpha}"
                    )));
                }
                Ok((n as f64).powf(-alpha))
            }
            BandwidthSchedule::Table { pairs } => pairs
                .iter()
                .find(|(m, _)| *m == n)
                .map(|&(_, h)| h)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("schedule table has no entry for n = {n}"))
                }),
        }
    }
}

/// Default divergence threshold for the `n h_n / log(1/h_n)` condition at
/// the largest evaluated `n`.
pub const H2_THRESHOLD: f64 = 10.0;

/// Pass/fail report for the three bandwidth conditions, with the monotone
/// sequences it inspected.
#[derive(Debug, Clone, Serialize)]
pub struct ScheduleReport {
    pub ns: Vec<u64>,
    pub hs: Vec<f64>,
    /// `h_n` strictly decreasing, inside `(0, 1)`, and `n h_n` strictly
    /// increasing.
    pub h1_pass: bool,
    /// `n h_n / log(1/h_n)` increasing and above the threshold at the end.
    pub h2_pass: bool,
    pub h2_threshold: f64,
    /// `log(1/h_n) / log log n` increasing with nontrivial growth.
    pub h3_pass: bool,
    pub seq_nh: Vec<f64>,
    pub seq_nh_over_log: Vec<f64>,
    pub seq_log_ratio: Vec<f64>,
}

impl ScheduleReport {
    pub fn all_pass(&self) -> bool {
        self.h1_pass && self.h2_pass && self.h3_pass
    }
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

/// Evaluate the three bandwidth conditions over the given `n` values
/// (report, not exception: defective schedules yield failing rows).
pub fn validate_schedule(schedule: &BandwidthSchedule, ns: &[u64]) -> Result<ScheduleReport> {
    if ns.is_empty() {
        return Err(Error::InvalidParameter("empty n range".into()));
    }
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let hs: Vec<f64> = ns.iter().map(|&n| schedule.h(n)).collect::<Result<_>>()?;
    let in_range = hs.iter().all(|&h| h > 0.0 && h < 1.0);
    let seq_nh: Vec<f64> = ns.iter().zip(&hs).map(|(&n, &h)| n as f64 * h).collect();
    let h1_pass = in_range
        && hs.windows(2).all(|w| w[1] < w[0])
        && strictly_increasing(&seq_nh);
    let seq_nh_over_log: Vec<f64> = ns
        .iter()
        .zip(&hs)
        .map(|(&n, &h)| n as f64 * h / (1.0 / h).ln())
        .collect();
    let h2_pass = in_range
        && strictly_increasing(&seq_nh_over_log)
        && *seq_nh_over_log.last().unwrap() >= H2_THRESHOLD;
    let seq_log_ratio: Vec<f64> = ns
        .iter()
        .zip(&hs)
        .map(|(&n, &h)| (1.0 / h).ln() / (n as f64).ln().ln())
        .collect();
    // constant-to-rounding sequences must not pass on noise alone
    let grows = seq_log_ratio.len() == 1
        || seq_log_ratio.last().unwrap() > &(seq_log_ratio[0] * (1.0 + 1e-6));
    let h3_pass = in_range
        && ns[0] >= 3
        && strictly_increasing(&seq_log_ratio)
        && grows;
    Ok(ScheduleReport {
        ns,
        hs,
        h1_pass,
        h2_pass,
        h2_threshold: H2_THRESHOLD,
        h3_pass,
        seq_nh,
        seq_nh_over_log,
        seq_log_ratio,
    })
}

/// Log-spaced integer grid between `lo` and `hi` inclusive.
pub fn log_spaced_ns(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    if count < 2 || lo >= hi {
        return vec![lo, hi];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<u64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as u64)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}
