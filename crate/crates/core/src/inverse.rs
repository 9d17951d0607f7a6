//! Exact inverse by backward substitution.
//!
//! The inverse of one stage recovers the two half-width sections from
//! prefix sums of cross-differences of adjacent slopes:
//!
//! ```text
//! g0(h, s) = sum_{k < h} [ g(k + 1, 2s) - g(k, 2s + 1) ]
//! g1(h, s) = sum_{k < h} [ g(k - s, 2s + 1) - g(k - s, 2s) ]
//! ```
//!
//! Sums start at the bottom of the window, i.e. everything below the window
//! is taken to be zero. This makes the stage inverse a bijection on images
//! whose support is bounded below, so it also inverts deltas, whose inverse
//! images are signed half-lines described by the [`lambda_tree`].

use rayon::prelude::*;

use crate::error::{arg, AdrtError, Result};
use crate::grid::{check_scale, rewindow, Kind, SquareImage, StripImage};
use crate::range::in_support_set;
use crate::sample::Sample;
use crate::transform::forward_strip;

const PAR_THRESHOLD: usize = 1 << 15;

#[inline]
fn at<T: Sample>(col: &[T], r: isize) -> T {
    if r >= 0 && (r as usize) < col.len() {
        col[r as usize]
    } else {
        T::zero()
    }
}

/// Inverts stage `m` on every level-`m` section of a column-major buffer.
/// Every row of `dst` is written.
pub(crate) fn inverse_stage_raw<T: Sample>(src: &[T], dst: &mut [T], m: u32, rows: usize) -> Result<()> {
    let half = 1usize << (m - 1);
    let section_len = rows << m;
    let overflow = || AdrtError::Overflow("backward substitution");
    let run = |(sec, out): (usize, &mut [T])| -> Result<()> {
        let base = sec << m;
        let (left, right) = out.split_at_mut(half * rows);
        for s in 0..half {
            let even = &src[(base + 2 * s) * rows..(base + 2 * s + 1) * rows];
            let odd = &src[(base + 2 * s + 1) * rows..(base + 2 * s + 2) * rows];

            let g0 = &mut left[s * rows..(s + 1) * rows];
            let mut acc = T::zero();
            for (r, o) in g0.iter_mut().enumerate() {
                let r = r as isize;
                let d = at(even, r).checked_sub(at(odd, r - 1)).ok_or_else(overflow)?;
                acc = acc.checked_add(d).ok_or_else(overflow)?;
                *o = acc;
            }

            let g1 = &mut right[s * rows..(s + 1) * rows];
            let mut acc = T::zero();
            for (r, o) in g1.iter_mut().enumerate() {
                *o = acc;
                let k = r as isize - s as isize;
                let d = at(odd, k).checked_sub(at(even, k)).ok_or_else(overflow)?;
                acc = acc.checked_add(d).ok_or_else(overflow)?;
            }
        }
        Ok(())
    };
    if dst.len() >= PAR_THRESHOLD {
        dst.par_chunks_mut(section_len).enumerate().try_for_each(run)
    } else {
        dst.chunks_mut(section_len).enumerate().try_for_each(run)
    }
}

/// Companion of [`inverse_stage_raw`] for non-negative magnitudes: every
/// difference becomes a sum, so each output bounds the total size of the
/// terms that cancel into the corresponding inverse value.
pub(crate) fn magnitude_stage_raw(src: &[f64], dst: &mut [f64], m: u32, rows: usize) {
    let half = 1usize << (m - 1);
    let section_len = rows << m;
    let run = |(sec, out): (usize, &mut [f64])| {
        let base = sec << m;
        let (left, right) = out.split_at_mut(half * rows);
        for s in 0..half {
            let even = &src[(base + 2 * s) * rows..(base + 2 * s + 1) * rows];
            let odd = &src[(base + 2 * s + 1) * rows..(base + 2 * s + 2) * rows];
            let mut acc = 0.0;
            for (r, o) in left[s * rows..(s + 1) * rows].iter_mut().enumerate() {
                let r = r as isize;
                acc += at(even, r) + at(odd, r - 1);
                *o = acc;
            }
            let mut acc = 0.0;
            for (r, o) in right[s * rows..(s + 1) * rows].iter_mut().enumerate() {
                *o = acc;
                let k = r as isize - s as isize;
                acc += at(odd, k) + at(even, k);
            }
        }
    };
    if dst.len() >= PAR_THRESHOLD {
        dst.par_chunks_mut(section_len).enumerate().for_each(run)
    } else {
        dst.chunks_mut(section_len).enumerate().for_each(run)
    }
}

/// Column-major magnitudes `|g|`, or `None` for exact sample types.
pub(crate) fn magnitudes<T: Sample>(g: &StripImage<T>) -> Option<Vec<f64>> {
    if T::EXACT {
        None
    } else {
        Some(g.raw().iter().map(|v| v.abs_f64()).collect())
    }
}

/// Which of the two difference relations to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// `D(h, s) = g(h + 1, 2s) - g(h, 2s + 1)`
    Even,
    /// `D(h, s) = g(h - s, 2s + 1) - g(h - s, 2s)`
    Odd,
}

/// Height differences of the two sub-transforms, read off a level-`m`
/// image. Result window is `[lo - 1, hi + 2^{m-1})`.
pub fn differences<T: Sample>(g: &StripImage<T>, parity: Parity) -> Result<StripImage<T>> {
    let m = g.n();
    if m == 0 {
        return arg("differences need a level of at least 1");
    }
    let half = 1usize << (m - 1);
    let lo = g.lo() - 1;
    let hi = g.hi() + half as i64;
    let mut out = StripImage::zeros(m - 1, lo, hi, Kind::Sino)?;
    for s in 0..half {
        for h in lo..hi {
            let (a, b) = match parity {
                Parity::Even => (g.get(h + 1, 2 * s), g.get(h, 2 * s + 1)),
                Parity::Odd => (g.get(h - s as i64, 2 * s + 1), g.get(h - s as i64, 2 * s)),
            };
            out.set(h, s, a.checked_sub(b).ok_or(AdrtError::Overflow("differences"))?)?;
        }
    }
    Ok(out)
}

/// Inverse of a single stage on a level-`m` image, on the same window.
///
/// Values at heights below `hi` are exact: each depends only on samples at
/// or below its own height.
pub fn s_inverse<T: Sample>(g: &StripImage<T>) -> Result<(StripImage<T>, StripImage<T>)> {
    let m = g.n();
    if m == 0 {
        return arg("s_inverse needs a level of at least 1");
    }
    let half = 1usize << (m - 1);
    let out = inverse_stage(g, m)?;
    let g0 = StripImage::from_fn(m - 1, g.lo(), g.hi(), Kind::Image, |h, s| out.get(h, s))?;
    let g1 = StripImage::from_fn(m - 1, g.lo(), g.hi(), Kind::Image, |h, s| out.get(h, half + s))?;
    Ok((g0, g1))
}

/// `(S^n_m)^{-1}` applied to every level-`m` section, on the same window.
pub fn inverse_stage<T: Sample>(g: &StripImage<T>, m: u32) -> Result<StripImage<T>> {
    if m == 0 || m > g.n() {
        return arg(format!("stage {m} out of range for n={}", g.n()));
    }
    let mut out = StripImage::zeros(g.n(), g.lo(), g.hi(), g.kind())?;
    let rows = out.rows();
    inverse_stage_raw(g.raw(), out.raw_mut(), m, rows)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseOptions {
    /// Clip values that leave the admissible support instead of failing.
    pub allow_out_of_range: bool,
    /// A float value outside the support counts as zero when it is at most
    /// `tol` times the total magnitude of the sinogram terms that cancel
    /// into it. Integers are always exact.
    pub tol: f64,
}

impl Default for InverseOptions {
    fn default() -> Self {
        InverseOptions {
            allow_out_of_range: false,
            tol: 1e-9,
        }
    }
}

/// A value removed by clipping during an out-of-range inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discarded<T> {
    pub stage: u32,
    pub h: i64,
    pub column: usize,
    pub value: T,
}

#[derive(Debug, Clone)]
pub struct InverseOutcome<T: Sample> {
    pub image: SquareImage<T>,
    /// Empty exactly when the input was in the range of the transform.
    pub discarded: Vec<Discarded<T>>,
}

/// Inverts a sinogram of a square image.
pub fn inverse<T: Sample>(g: &StripImage<T>) -> Result<SquareImage<T>> {
    inverse_with(g, InverseOptions::default()).map(|o| o.image)
}

/// Inverts `g` stage by stage. After each stage the intermediate image must
/// lie in the support set of its level; the first violation is reported as
/// [`AdrtError::OutOfRange`] unless `allow_out_of_range` is set, in which
/// case offending values are clipped and listed in the outcome.
pub fn inverse_with<T: Sample>(g: &StripImage<T>, opts: InverseOptions) -> Result<InverseOutcome<T>> {
    let n = g.n();
    let size = g.width() as i64;
    for (h, s, _) in g.nonzeros() {
        if !in_support_set(n, n, h, s) {
            return arg(format!(
                "sinogram value at (h={h}, s={s}) lies outside -s <= h <= {}",
                size - 1
            ));
        }
    }
    // Out-of-range data shows up below -s or up to N/2 rows above the square.
    let lo = -(size - 1);
    let hi = 2 * size;
    let mut src = rewindow(g, lo, hi, false)?;
    let mut dst = src.clone();
    let rows = src.rows();
    let mut mag = magnitudes(&src);
    let mut mag_next = mag.clone();
    let mut discarded = Vec::new();
    for stage in (1..=n).rev() {
        inverse_stage_raw(src.raw(), dst.raw_mut(), stage, rows)?;
        if let (Some(a), Some(b)) = (&mag, &mut mag_next) {
            magnitude_stage_raw(a, b, stage, rows);
        }
        for j in 0..dst.width() {
            let col = dst.column_mut(j);
            for (r, v) in col.iter_mut().enumerate() {
                let h = lo + r as i64;
                if in_support_set(n, stage - 1, h, j) {
                    continue;
                }
                let bound = mag_next.as_ref().map_or(0.0, |b| b[j * rows + r]);
                if !v.negligible(bound, opts.tol) {
                    if !opts.allow_out_of_range {
                        return Err(AdrtError::OutOfRange {
                            stage,
                            h,
                            column: j,
                        });
                    }
                    discarded.push(Discarded {
                        stage,
                        h,
                        column: j,
                        value: *v,
                    });
                }
                *v = T::zero();
                if let Some(b) = &mut mag_next {
                    b[j * rows + r] = 0.0;
                }
            }
        }
        std::mem::swap(&mut src, &mut dst);
        std::mem::swap(&mut mag, &mut mag_next);
    }
    let image = SquareImage::from_fn(n, |i, j| src.get(i as i64, j))?;
    Ok(InverseOutcome { image, discarded })
}

/// An `(h, s, sigma)` triple: intercept, slope and sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LambdaTriple {
    pub h: i64,
    pub s: u64,
    pub sign: i8,
}

impl LambdaTriple {
    pub fn new(h: i64, s: u64, sign: i8) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return arg(format!("sign must be +1 or -1, got {sign}"));
        }
        Ok(LambdaTriple { h, s, sign })
    }
}

fn parity_sign(bit: u64) -> i8 {
    if bit & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Locations and signs of the two half-lines making up the one-stage
/// inverse of `sign * delta_{h,s}`.
pub fn lambda_map(t: LambdaTriple) -> (LambdaTriple, LambdaTriple) {
    let r = t.s & 1;
    let q = t.s >> 1;
    (
        LambdaTriple {
            h: t.h + r as i64,
            s: q,
            sign: t.sign * parity_sign(r),
        },
        LambdaTriple {
            h: t.h + q as i64 + 1,
            s: q,
            sign: t.sign * parity_sign(r + 1),
        },
    )
}

/// The unique pre-image of a pair under [`lambda_map`].
pub fn lambda_unmap(pair: (LambdaTriple, LambdaTriple)) -> Result<LambdaTriple> {
    let (a, b) = pair;
    let h = b.h - b.s as i64 - 1;
    let s = a.h + 2 * b.h - 3 * h - 2;
    if s < 0 || (a.sign != 1 && a.sign != -1) {
        return Err(AdrtError::Inconsistent);
    }
    let sign = a.sign * parity_sign(s as u64);
    let t = LambdaTriple { h, s: s as u64, sign };
    if lambda_map(t) != pair {
        return Err(AdrtError::Inconsistent);
    }
    Ok(t)
}

/// Depth-`n` expansion of `lambda`; leaf `t` follows branch bits of `t`
/// from the most significant down.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaTree {
    pub root: LambdaTriple,
    pub depth: u32,
    pub leaves: Vec<LambdaTriple>,
}

pub fn lambda_tree(h: i64, s: u64, n: u32) -> Result<LambdaTree> {
    check_scale(n)?;
    if s >= 1 << n {
        return arg(format!("slope {s} out of range for n={n}"));
    }
    let root = LambdaTriple { h, s, sign: 1 };
    let mut level = vec![root];
    for _ in 0..n {
        level = level
            .into_iter()
            .flat_map(|t| {
                let (a, b) = lambda_map(t);
                [a, b]
            })
            .collect();
    }
    Ok(LambdaTree {
        root,
        depth: n,
        leaves: level,
    })
}

/// Leaf `t` of the depth-`n` tree without the recursion. Reading the bits
/// `b_1 .. b_n` of `t` from the most significant, step `k` adds
/// `floor(s / 2^k) + 1` on a 1 branch and bit `k - 1` of `s` on a 0 branch.
/// The sign is `(-1)^popcount(t xor s)`.
pub fn lambda_leaf_closed(h: i64, s: u64, n: u32, t: u64) -> LambdaTriple {
    let mut height = h;
    for k in 1..=n {
        let b = (t >> (n - k)) & 1;
        height += if b == 1 {
            (s >> k) as i64 + 1
        } else {
            ((s >> (k - 1)) & 1) as i64
        };
    }
    LambdaTriple {
        h: height,
        s: s >> n,
        sign: parity_sign(u64::from((t ^ s).count_ones())),
    }
}

/// `(R^n)^{-1}[delta_{h,s}]` on the window `[lo, hi)`, by composing stage
/// inverses. Column `j` is a signed half-line profile starting at the
/// intercept of leaf `j` of the lambda tree.
pub fn delta_inverse_profile<T: Sample>(n: u32, h: i64, s: usize, lo: i64, hi: i64) -> Result<StripImage<T>> {
    check_scale(n)?;
    if s >= 1 << n {
        return arg(format!("slope {s} out of range for n={n}"));
    }
    if lo > hi {
        return arg(format!("window [{lo}, {hi}) is reversed"));
    }
    // Sums run from the bottom, so the work window must start at the delta.
    let work_lo = lo.min(h);
    let work_hi = hi.max(h + 1);
    let mut src = StripImage::zeros(n, work_lo, work_hi, Kind::Image)?;
    src.set(h, s, T::one())?;
    let mut dst = src.clone();
    let rows = src.rows();
    for stage in (1..=n).rev() {
        inverse_stage_raw(src.raw(), dst.raw_mut(), stage, rows)?;
        std::mem::swap(&mut src, &mut dst);
    }
    rewindow(&src, lo, hi, true)
}

/// `C(a, k)` for `a >= 0`, exact.
fn binomial(a: i64, k: u32) -> Option<i64> {
    let mut acc: i128 = 1;
    for i in 0..k as i128 {
        acc = acc.checked_mul(a as i128 - i)? / (i + 1);
    }
    i64::try_from(acc).ok()
}

/// Closed form of [`delta_inverse_profile`]:
/// `sigma_j * C(i - h_j + n - 1, n - 1)` for `i >= h_j`, zero below, with
/// `(h_j, sigma_j)` the leaves of the lambda tree. Requires `n >= 1`.
pub fn delta_inverse_closed_form<T: Sample>(
    n: u32,
    h: i64,
    s: usize,
    lo: i64,
    hi: i64,
) -> Result<StripImage<T>> {
    if n == 0 {
        return arg("the half-line closed form needs n >= 1");
    }
    let tree = lambda_tree(h, s as u64, n)?;
    let mut out = StripImage::zeros(n, lo, hi, Kind::Image)?;
    for (j, leaf) in tree.leaves.iter().enumerate() {
        for i in lo.max(leaf.h)..hi {
            let c = binomial(i - leaf.h + n as i64 - 1, n - 1).ok_or(AdrtError::Overflow("binomial"))?;
            out.set(i, j, T::from_i64(c * i64::from(leaf.sign)))?;
        }
    }
    Ok(out)
}

/// Default probe location: the delta whose last leaf starts at height 0.
pub fn default_probe_point(n: u32) -> (i64, usize) {
    let size = 1i64 << n;
    (-size + 1, (size - 1) as usize)
}

/// Sup norms of `R 1_k R^{-1} delta - delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceProbe {
    pub k: u64,
    /// Over all heights.
    pub sup: f64,
    /// Over heights `[0, k N)` only; lines there never leave the cut-off.
    pub restricted: f64,
}

/// Truncates the inverse of `delta_{h,s}` to heights `[0, (k + 1) N)`,
/// transforms it back and measures how far the result is from the delta.
pub fn divergence_probe<T: Sample>(n: u32, k: u64, h: i64, s: usize) -> Result<DivergenceProbe> {
    if k == 0 {
        return arg("the cut-off index k must be at least 1");
    }
    let size = 1i64 << n;
    let top = (k as i64 + 1) * size;
    let profile = delta_inverse_profile::<T>(n, h, s, h.min(0), top)?;
    let cut = rewindow(&profile, 0, top, true)?;
    let g = forward_strip(&cut)?;
    let mut sup = 0.0f64;
    let mut restricted = 0.0f64;
    for j in 0..g.width() {
        for hh in g.lo().min(h)..g.hi().max(h + 1) {
            let mut v = g.get(hh, j);
            if hh == h && j == s {
                v = v.checked_sub(T::one()).ok_or(AdrtError::Overflow("probe"))?;
            }
            let a = v.abs_f64();
            sup = sup.max(a);
            if (0..k as i64 * size).contains(&hh) {
                restricted = restricted.max(a);
            }
        }
    }
    Ok(DivergenceProbe { k, sup, restricted })
}

/// Least-squares slope of `log v` against `log k`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(k, v)| (k.ln(), v.ln())).collect();
    let count = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / count;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / count;
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
