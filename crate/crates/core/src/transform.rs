//! Forward single-quadrant ADRT, back-projection, and their oracles.
//!
//! The forward transform is the composition of stage operators: stage `m`
//! pairs the level-`(m-1)` sections `2l'` and `2l'+1` of its input into the
//! level-`m` section `l'` by
//!
//! ```text
//! g(h, 2t)     = f0(h, t) + f1(h + t,     t)
//! g(h, 2t + 1) = f0(h, t) + f1(h + t + 1, t)
//! ```
//!
//! Back-projection composes the transposed stages in reverse order.
//!
//! All stages of one transform share a single window: heights
//! `[lo - (N - 1), hi)` for the forward direction, which for square images
//! is the support bound `-s <= h <= N - 1`.

use rayon::prelude::*;

use crate::error::{arg, AdrtError, Result};
use crate::grid::{Kind, SquareImage, StripImage};
use crate::lines::digital_line_closed;
use crate::sample::Sample;

// Stages run in groups of this many, one pass over the section per group.
const FUSED_STAGES: u32 = 3;

// Below this many samples a stage runs on the calling thread.
const PAR_THRESHOLD: usize = 1 << 15;

#[inline]
fn at<T: Sample>(col: &[T], r: isize) -> T {
    if r >= 0 && (r as usize) < col.len() {
        col[r as usize]
    } else {
        T::zero()
    }
}

/// Output rows `[a, b)` of `out` become `x[r] + y[r + shift]`, with `y`
/// zero past its end. All three slices have the same length.
#[inline]
fn add_shifted<T: Sample>(out: &mut [T], x: &[T], y: &[T], shift: usize, a: usize, b: usize) -> Result<()> {
    let mid = b.min(y.len().saturating_sub(shift)).max(a);
    if !T::add_into(&mut out[a..mid], &x[a..mid], &y[a + shift..mid + shift]) {
        return Err(AdrtError::Overflow("stage sum"));
    }
    out[mid..b].copy_from_slice(&x[mid..b]);
    Ok(())
}

/// One forward stage on a column-major buffer with `rows` rows per column.
/// Only output rows in `live` are written; all other rows of `dst` must
/// already be zero.
pub(crate) fn forward_stage_raw<T: Sample>(
    src: &[T],
    dst: &mut [T],
    m: u32,
    rows: usize,
    live: (usize, usize),
) -> Result<()> {
    let half = 1usize << (m - 1);
    // One task per output column pair (2t, 2t + 1) of a section.
    let run = |(p, out): (usize, &mut [T])| -> Result<()> {
        let base = (p / half) << m;
        let t = p % half;
        let left = &src[(base + t) * rows..(base + t + 1) * rows];
        let right = &src[(base + half + t) * rows..(base + half + t + 1) * rows];
        let (even, odd) = out.split_at_mut(rows);
        add_shifted(even, left, right, t, live.0, live.1)?;
        add_shifted(odd, left, right, t + 1, live.0, live.1)
    };
    if dst.len() >= PAR_THRESHOLD {
        dst.par_chunks_mut(2 * rows).enumerate().try_for_each(run)
    } else {
        dst.chunks_mut(2 * rows).enumerate().try_for_each(run)
    }
}

/// One stage done in place on a level-`m` section whose two halves hold
/// level `m - 1` with columns in bit-reversed order. The pair at physical
/// columns `(p, half + p)` is logical column `t = rev(p)` of each half and
/// becomes logical columns `2t` and `2t + 1`, which keeps the section in
/// bit-reversed order.
fn stage_in_place<T: Sample>(section: &mut [T], m: u32, rows: usize, live: (usize, usize)) -> Result<()> {
    let half = 1usize << (m - 1);
    let (a, b) = live;
    let parallel = section.len() >= PAR_THRESHOLD && half > 1;
    let (left, right) = section.split_at_mut(half * rows);
    let run = |(p, (l, r)): (usize, (&mut [T], &mut [T]))| butterfly(l, r, reverse_bits(p, m - 1), a, b);
    if parallel {
        left.par_chunks_mut(rows)
            .zip(right.par_chunks_mut(rows))
            .enumerate()
            .try_for_each(run)
    } else {
        left.chunks_mut(rows)
            .zip(right.chunks_mut(rows))
            .enumerate()
            .try_for_each(run)
    }
}

/// Rows `[a, b)` of `l, r` become `l[h] + r[h + t]` and `l[h] + r[h + t + 1]`,
/// with `r` zero past its end. Row `h` only reads rows `>= h`, so going up
/// in blocks that are loaded before they are stored needs no scratch column.
#[inline]
fn butterfly<T: Sample>(l: &mut [T], r: &mut [T], t: usize, a: usize, b: usize) -> Result<()> {
    const BLOCK: usize = 64;
    let len = r.len();
    let mut ok = true;
    let mut h = a;
    let (mut x, mut y0, mut y1) = ([T::zero(); BLOCK], [T::zero(); BLOCK], [T::zero(); BLOCK]);
    while h + BLOCK <= b && h + BLOCK + t < len {
        x.copy_from_slice(&l[h..h + BLOCK]);
        y0.copy_from_slice(&r[h + t..h + t + BLOCK]);
        y1.copy_from_slice(&r[h + t + 1..h + t + 1 + BLOCK]);
        ok &= T::add_into(&mut l[h..h + BLOCK], &x, &y0);
        ok &= T::add_into(&mut r[h..h + BLOCK], &x, &y1);
        h += BLOCK;
    }
    for h in h..b {
        let x = l[h];
        let y0 = at(r, (h + t) as isize);
        let y1 = at(r, (h + t + 1) as isize);
        l[h] = x.checked_add(y0).ok_or(AdrtError::Overflow("stage sum"))?;
        r[h] = x.checked_add(y1).ok_or(AdrtError::Overflow("stage sum"))?;
    }
    if ok {
        Ok(())
    } else {
        Err(AdrtError::Overflow("stage sum"))
    }
}

/// Stages `m - r + 1..=m` fused, in place, on a level-`m` section whose
/// `2^r` subsections hold level `m - r` in bit-reversed order. The columns
/// `p + k q` (`q` the subsection width) all hold logical column
/// `u = rev(p)` of their subsection and together produce logical columns
/// `u 2^r + c`, stored at `p + rev(c) q`; so each group is closed under the
/// `r` stages and runs through them in scratch space. Every intermediate is
/// a true level value, so overflow is reported exactly as stage by stage.
fn stages_in_place<T: Sample>(section: &mut [T], m: u32, r: u32, rows: usize, pad: usize) -> Result<()> {
    let group = 1usize << r;
    let q = 1usize << (m - r);
    let parallel = section.len() >= PAR_THRESHOLD && q > 1;
    let live = |level: u32| pad + 1 - (1 << level);
    // Stage j < r - 1 writes scratch set j, so rows below a set's live
    // window stay zero across groups.
    let run = |scratch: &mut Vec<Vec<Vec<T>>>, p: usize, cols: &mut [&mut [T]]| -> Result<()> {
        let u = reverse_bits(p, m - r);
        for j in 0..r as usize {
            let (a, b) = (live(m - r + j as u32 + 1), rows);
            let width = 1usize << j;
            let (done, rest) = scratch.split_at_mut(j);
            for s in 0..group >> (j + 1) {
                for c in 0..width {
                    let t = (u << j) + c;
                    for e in 0..2 {
                        let out = 2 * c + e;
                        if j == 0 {
                            let y = &mut rest[0][2 * s + out];
                            add_shifted(y, cols[2 * s], cols[2 * s + 1], t + e, a, b)?;
                        } else {
                            let x = &done[j - 1];
                            let (l, rt) = (&x[2 * s * width + c], &x[(2 * s + 1) * width + c]);
                            let y: &mut [T] = if j + 1 == r as usize {
                                cols[reverse_bits(out, r)]
                            } else {
                                &mut rest[0][s * 2 * width + out]
                            };
                            add_shifted(y, l, rt, t + e, a, b)?;
                        }
                    }
                }
            }
        }
        Ok(())
    };
    let init = || vec![vec![vec![T::zero(); rows]; group]; r as usize - 1];
    let mut cols: Vec<Vec<&mut [T]>> = (0..q).map(|_| Vec::with_capacity(group)).collect();
    for (k, col) in section.chunks_mut(rows).enumerate() {
        cols[k % q].push(col);
    }
    if parallel {
        cols.par_iter_mut()
            .enumerate()
            .try_for_each_init(init, |scratch, (p, c)| run(scratch, p, c))
    } else {
        let mut scratch = init();
        cols.iter_mut()
            .enumerate()
            .try_for_each(|(p, c)| run(&mut scratch, p, c))
    }
}

/// The low `bits` bits of `x` in reverse order.
fn reverse_bits(x: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - bits)
    }
}

/// Runs stages `1..=m` in place and depth first on one level-`m` section,
/// so small sections are finished while they are still in cache. Leaves
/// the columns in bit-reversed order. `pad` is the row index of height `lo`.
fn forward_section<T: Sample>(section: &mut [T], m: u32, rows: usize, pad: usize) -> Result<()> {
    if m == 0 {
        return Ok(());
    }
    let r = m.min(FUSED_STAGES);
    let child = m - r;
    let len = rows << child;
    if section.len() >= 2 * PAR_THRESHOLD {
        section
            .par_chunks_mut(len)
            .try_for_each(|part| forward_section(part, child, rows, pad))?;
    } else {
        for part in section.chunks_mut(len) {
            forward_section(part, child, rows, pad)?;
        }
    }
    // Level m is nonzero from 2^m - 1 rows below the input window.
    let live = (pad + 1 - (1 << m), rows);
    if r >= 2 {
        stages_in_place(section, m, r, rows, pad)
    } else {
        stage_in_place(section, m, rows, live)
    }
}

/// Puts the columns of every width-`2^m` section back in natural order.
fn unreverse_columns<T: Sample>(data: &mut [T], m: u32, rows: usize) {
    for section in data.chunks_mut(rows << m) {
        for p in 0..1usize << m {
            let q = reverse_bits(p, m);
            if p < q {
                let (x, y) = section.split_at_mut(q * rows);
                x[p * rows..(p + 1) * rows].swap_with_slice(&mut y[..rows]);
            }
        }
    }
}

/// Forward stages `1..=m` on the columns given by `column`, each of
/// `hi - lo` samples; output window `[lo - (N - 1), hi)`.
fn forward_columns<'a, T: Sample + 'a>(
    n: u32,
    lo: i64,
    hi: i64,
    m: u32,
    column: impl Fn(usize) -> &'a [T],
) -> Result<StripImage<T>> {
    check_level(n, m, true)?;
    let pad = (1usize << n) - 1;
    let mut g = StripImage::zeros(n, lo - pad as i64, hi, Kind::Sino)?;
    let rows = g.rows();
    for j in 0..1usize << n {
        g.column_mut(j)[pad..].copy_from_slice(column(j));
    }
    for section in g.raw_mut().chunks_mut(rows << m) {
        forward_section(section, m, rows, pad)?;
    }
    unreverse_columns(g.raw_mut(), m, rows);
    Ok(g)
}

/// One back-projection stage (level `m` to level `m - 1`), transpose of
/// [`forward_stage_raw`].
pub(crate) fn backward_stage_raw<T: Sample>(
    src: &[T],
    dst: &mut [T],
    m: u32,
    rows: usize,
    live: (usize, usize),
) -> Result<()> {
    let half = 1usize << (m - 1);
    let section_len = rows << m;
    let run = |(sec, out): (usize, &mut [T])| -> Result<()> {
        let base = sec << m;
        let (left, right) = out.split_at_mut(half * rows);
        for t in 0..half {
            let even = &src[(base + 2 * t) * rows..(base + 2 * t + 1) * rows];
            let odd = &src[(base + 2 * t + 1) * rows..(base + 2 * t + 2) * rows];
            let g0 = &mut left[t * rows..(t + 1) * rows];
            for (r, o) in g0.iter_mut().enumerate().take(live.1).skip(live.0) {
                *o = even[r].checked_add(odd[r]).ok_or(AdrtError::Overflow("back-projection"))?;
            }
            let g1 = &mut right[t * rows..(t + 1) * rows];
            let t = t as isize;
            for (r, o) in g1.iter_mut().enumerate().take(live.1).skip(live.0) {
                let r = r as isize;
                *o = at(even, r - t)
                    .checked_add(at(odd, r - t - 1))
                    .ok_or(AdrtError::Overflow("back-projection"))?;
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

fn check_level(n: u32, m: u32, allow_zero: bool) -> Result<()> {
    if m > n || (!allow_zero && m == 0) {
        return arg(format!("stage {m} out of range for n={n}"));
    }
    Ok(())
}

/// Runs forward stages `1..=m` on `f`, output window `[lo - (N - 1), hi)`.
pub fn forward_strip_partial<T: Sample>(f: &StripImage<T>, m: u32) -> Result<StripImage<T>> {
    forward_columns(f.n(), f.lo(), f.hi(), m, |j| f.column(j))
}

/// `R^n` of a strip image (an element of the half-strip space).
pub fn forward_strip<T: Sample>(f: &StripImage<T>) -> Result<StripImage<T>> {
    forward_strip_partial(f, f.n())
}

/// `R^n_m[f]`: the first `m` stages; `m = 0` is the identity.
pub fn forward_partial<T: Sample>(f: &SquareImage<T>, m: u32) -> Result<StripImage<T>> {
    forward_columns(f.n(), 0, f.size() as i64, m, |j| f.column(j))
}

/// The single-quadrant ADRT `R^n[f]` on the window `[-(N - 1), N)`.
pub fn forward<T: Sample>(f: &SquareImage<T>) -> Result<StripImage<T>> {
    forward_partial(f, f.n())
}

/// Direct summation of `f` over every digital line. `O(N^3)`; oracle only.
pub fn forward_bruteforce<T: Sample>(f: &SquareImage<T>) -> Result<StripImage<T>> {
    let n = f.n();
    let size = f.size() as i64;
    let mut out = StripImage::zeros(n, -(size - 1), size, Kind::Sino)?;
    for s in 0..f.size() {
        for h in -(size - 1)..size {
            let line = digital_line_closed(n, h, s)?;
            let mut acc = T::zero();
            for (k, j) in line.points() {
                if (0..size).contains(&k) {
                    acc = acc
                        .checked_add(f.get(k as usize, j))
                        .ok_or(AdrtError::Overflow("bruteforce"))?;
                }
            }
            out.set(h, s, acc)?;
        }
    }
    Ok(out)
}

/// One stage on a pair of level-`(m-1)` images sharing a window `[lo, hi)`;
/// the result has scale `m` and window `[lo - 2^{m-1}, hi)`.
pub fn s_step<T: Sample>(f0: &StripImage<T>, f1: &StripImage<T>) -> Result<StripImage<T>> {
    if f0.n() != f1.n() {
        return arg(format!("scale mismatch: {} vs {}", f0.n(), f1.n()));
    }
    if (f0.lo(), f0.hi()) != (f1.lo(), f1.hi()) {
        return arg("s_step operands must share a window");
    }
    let half = f0.width();
    let m = f0.n() + 1;
    let lo = f0.lo() - half as i64;
    let mut src = StripImage::zeros(m, lo, f0.hi(), Kind::Sino)?;
    for t in 0..half {
        src.column_mut(t)[half..].copy_from_slice(f0.column(t));
        src.column_mut(half + t)[half..].copy_from_slice(f1.column(t));
    }
    let mut dst = StripImage::zeros(m, lo, f0.hi(), Kind::Sino)?;
    let rows = dst.rows();
    forward_stage_raw(src.raw(), dst.raw_mut(), m, rows, (0, rows))?;
    Ok(dst)
}

/// Stage operator `S^n_m` on every section pair of `f`; the result has
/// window `[lo - 2^{m-1}, hi)`.
pub fn s_stage<T: Sample>(f: &StripImage<T>, m: u32) -> Result<StripImage<T>> {
    check_level(f.n(), m, false)?;
    let grow = 1usize << (m - 1);
    let lo = f.lo() - grow as i64;
    let mut src = StripImage::zeros(f.n(), lo, f.hi(), f.kind())?;
    for j in 0..f.width() {
        src.column_mut(j)[grow..].copy_from_slice(f.column(j));
    }
    let mut dst = StripImage::zeros(f.n(), lo, f.hi(), Kind::Sino)?;
    let rows = dst.rows();
    forward_stage_raw(src.raw(), dst.raw_mut(), m, rows, (0, rows))?;
    Ok(dst)
}

/// Transposed stage on a level-`m` image `g`: returns the level-`(m-1)`
/// pair on the window `[lo, hi + 2^{m-1})`.
pub fn b_step<T: Sample>(g: &StripImage<T>) -> Result<(StripImage<T>, StripImage<T>)> {
    let m = g.n();
    if m == 0 {
        return arg("b_step needs a level of at least 1");
    }
    let half = 1usize << (m - 1);
    let hi = g.hi() + half as i64;
    let padded = crate::grid::rewindow(g, g.lo(), hi, false)?;
    let mut out = StripImage::zeros(m, g.lo(), hi, Kind::Image)?;
    let rows = out.rows();
    backward_stage_raw(padded.raw(), out.raw_mut(), m, rows, (0, rows))?;
    let g0 = StripImage::from_fn(m - 1, g.lo(), hi, Kind::Image, |h, t| out.get(h, t))?;
    let g1 = StripImage::from_fn(m - 1, g.lo(), hi, Kind::Image, |h, t| out.get(h, half + t))?;
    Ok((g0, g1))
}

/// Back-projection `R'^n_m[g] = B^n_1 ... B^n_m [g]` on the window
/// `[lo, hi + 2^m - 1)`.
pub fn backproject<T: Sample>(g: &StripImage<T>, m: u32) -> Result<StripImage<T>> {
    let n = g.n();
    check_level(n, m, true)?;
    let grow = (1i64 << m) - 1;
    let mut src = crate::grid::rewindow(g, g.lo(), g.hi() + grow, false)?.with_kind(Kind::Image);
    let mut dst = src.clone();
    let rows = src.rows();
    let mut b = g.rows();
    for stage in (1..=m).rev() {
        b += 1 << (stage - 1);
        backward_stage_raw(src.raw(), dst.raw_mut(), stage, rows, (0, b))?;
        std::mem::swap(&mut src, &mut dst);
    }
    Ok(src)
}

/// The four single-quadrant transforms making up the full ADRT.
///
/// Quadrant `k` is `forward` of a dihedral image of `f`:
///
/// | quadrant | input image                         |
/// |----------|-------------------------------------|
/// | 0        | `f`                                 |
/// | 1        | `transpose(f)`                      |
/// | 2        | `flip_columns(transpose(f))`        |
/// | 3        | `flip_columns(f)`                   |
///
/// where `transpose(f)(i, j) = f(j, i)` and
/// `flip_columns(f)(i, j) = f(i, N - 1 - j)`.
pub fn full_adrt<T: Sample>(f: &SquareImage<T>) -> Result<[StripImage<T>; 4]> {
    let t = f.transpose();
    Ok([
        forward(f)?,
        forward(&t)?,
        forward(&t.flip_columns())?,
        forward(&f.flip_columns())?,
    ])
}

/// The dihedral image fed to quadrant `q` of [`full_adrt`].
pub fn quadrant_input<T: Sample>(f: &SquareImage<T>, q: usize) -> SquareImage<T> {
    match q {
        0 => f.clone(),
        1 => f.transpose(),
        2 => f.transpose().flip_columns(),
        _ => f.flip_columns(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dot, make_delta};
    use crate::lines::{dual_line_closed, line_indicator};

    fn sq(rows: &[&[i64]]) -> SquareImage<i64> {
        SquareImage::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn col(values: &[i64]) -> StripImage<i64> {
        StripImage::from_rows(0, 0, Kind::Image, &values.iter().map(|&v| vec![v]).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn two_by_two_sinogram() {
        let g = forward(&sq(&[&[1, 2], &[3, 4]])).unwrap();
        assert_eq!((g.lo(), g.hi()), (-1, 2));
        assert_eq!(g.get(0, 0), 3);
        assert_eq!(g.get(1, 0), 7);
        assert_eq!(g.get(-1, 0), 0);
        assert_eq!(g.get(-1, 1), 2);
        assert_eq!(g.get(0, 1), 5);
        assert_eq!(g.get(1, 1), 3);
        assert_eq!(g, forward_bruteforce(&sq(&[&[1, 2], &[3, 4]])).unwrap());
    }

    #[test]
    fn s_step_examples() {
        let g = s_step(&col(&[1, 3]), &col(&[2, 4])).unwrap();
        assert_eq!(g.n(), 1);
        let expect = [(0, 0, 3), (1, 0, 7), (-1, 1, 2), (0, 1, 5), (1, 1, 3)];
        for (h, s, v) in expect {
            assert_eq!(g.get(h, s), v, "({h},{s})");
        }
        assert_eq!(g.nonzeros().len(), 5);

        let f0 = col(&[5, -1]);
        let g = s_step(&f0, &col(&[0, 0])).unwrap();
        for h in -1..2 {
            assert_eq!(g.get(h, 0), f0.get(h, 0));
            assert_eq!(g.get(h, 1), f0.get(h, 0));
        }

        let f0 = StripImage::from_fn(1, 0, 2, Kind::Image, |h, t| i64::from(h == 1 && t == 1)).unwrap();
        let zero = StripImage::zeros(1, 0, 2, Kind::Image).unwrap();
        let g = s_step(&f0, &zero).unwrap();
        assert_eq!(g.nonzeros(), vec![(1, 2, 1), (1, 3, 1)]);

        assert!(s_step(&col(&[1]), &zero).is_err());
    }

    #[test]
    fn s_stage_examples() {
        let f = sq(&[&[1, 2], &[3, 4]]).embed();
        assert_eq!(s_stage(&f, 1).unwrap(), forward(&sq(&[&[1, 2], &[3, 4]])).unwrap());

        let zero = StripImage::<i64>::zeros(3, 0, 8, Kind::Image).unwrap();
        assert!(s_stage(&zero, 2).unwrap().nonzeros().is_empty());

        let d = make_delta::<i64>(3, 2, 5).unwrap();
        for m in 1..=3 {
            assert_eq!(s_stage(&d, m).unwrap().nonzeros().len(), 2);
        }
        assert!(s_stage(&d, 0).is_err());
        assert!(s_stage(&d, 4).is_err());
    }

    #[test]
    fn partial_levels() {
        let f = sq(&[&[1, 2], &[3, 4]]);
        assert_eq!(forward_partial(&f, 0).unwrap(), f.embed());
        assert_eq!(forward_partial(&f, 1).unwrap(), forward(&f).unwrap());
        assert!(forward_partial(&f, 2).is_err());
    }

    #[test]
    fn delta_gives_dual_line_indicator() {
        let n = 2;
        for i in 0..4 {
            for j in 0..4 {
                let mut d = SquareImage::<i64>::zeros(n).unwrap();
                d.set(i, j, 1);
                let g = forward(&d).unwrap();
                let line = dual_line_closed(n, i as i64, j).unwrap();
                assert_eq!(g, line_indicator(&line, -4, 4).unwrap());
            }
        }
    }

    #[test]
    fn per_slope_mass() {
        let c = 7;
        for n in 0..=4 {
            let f = SquareImage::from_fn(n, |_, _| c).unwrap();
            let g = forward(&f).unwrap();
            let size = 1i64 << n;
            for s in 0..g.width() {
                let total: i64 = (g.lo()..g.hi()).map(|h| g.get(h, s)).sum();
                assert_eq!(total, c * size * size);
            }
        }
    }

    #[test]
    fn b_step_examples() {
        let f0 = col(&[2, -3, 5]);
        let zero = col(&[0, 0, 0]);
        let g = s_step(&f0, &zero).unwrap();
        let (g0, g1) = b_step(&g).unwrap();
        assert_eq!(g0, f0.checked_scale(2).unwrap());
        // g1(h) = f0(h) + f0(h - 1)
        assert_eq!(g1, col(&[2, -1, 2, 5]));

        let mut d = StripImage::<i64>::zeros(2, 4, 5, Kind::Sino).unwrap();
        d.set(4, 2, 1).unwrap();
        let (g0, g1) = b_step(&d).unwrap();
        assert_eq!(g0.nonzeros(), vec![(4, 1, 1)]);
        assert_eq!(g1.nonzeros(), vec![(5, 1, 1)]);
    }

    #[test]
    fn backproject_examples() {
        let n = 2;
        for h in -3..4 {
            for s in 0..4 {
                let d = make_delta::<i64>(n, h, s).unwrap();
                let line = crate::lines::digital_line_closed(n, h, s).unwrap();
                let ind = line_indicator(&line, -3, 8).unwrap();
                assert_eq!(backproject(&d, n).unwrap(), ind);
            }
        }
        let zero = StripImage::<i64>::zeros(3, -7, 8, Kind::Sino).unwrap();
        assert!(backproject(&zero, 3).unwrap().nonzeros().is_empty());
        assert_eq!(backproject(&zero, 0).unwrap(), zero);
    }

    #[test]
    fn full_adrt_quadrants() {
        let n = 2;
        let f = SquareImage::from_fn(n, |i, j| (3 * i + j) as i64).unwrap();
        let quads = full_adrt(&f).unwrap();
        assert_eq!(quads[0], forward(&f).unwrap());
        for (q, g) in quads.iter().enumerate() {
            assert_eq!(*g, forward(&quadrant_input(&f, q)).unwrap());
        }

        let c = SquareImage::from_fn(n, |_, _| 3i64).unwrap();
        for g in full_adrt(&c).unwrap() {
            for s in 0..4 {
                let total: i64 = (g.lo()..g.hi()).map(|h| g.get(h, s)).sum();
                assert_eq!(total, 3 * 16);
            }
        }

        // delta at the top-left corner
        let mut d = SquareImage::<i64>::zeros(n).unwrap();
        d.set(0, 0, 1);
        let corners = [(0, 0), (0, 0), (0, 3), (0, 3)];
        for (q, g) in full_adrt(&d).unwrap().iter().enumerate() {
            let (i, j) = corners[q];
            let line = dual_line_closed(n, i, j).unwrap();
            assert_eq!(*g, line_indicator(&line, -4, 4).unwrap(), "quadrant {q}");
        }
    }

    #[test]
    fn fused_stages_match_single_stages() {
        for n in [5u32, 6, 7] {
            let f = SquareImage::from_fn(n, |i, j| ((i * 37 + j * 11 + i * j) % 23) as i64 - 11).unwrap();
            let mut g = f.embed();
            for m in 1..=n {
                g = s_stage(&g, m).unwrap();
                let fast = forward_partial(&f, m).unwrap();
                for h in fast.lo()..fast.hi() {
                    for s in 0..fast.width() {
                        assert_eq!(fast.get(h, s), g.get(h, s), "n={n} m={m} h={h} s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn overflow_is_reported() {
        let f = SquareImage::from_fn(1, |_, _| i64::MAX).unwrap();
        assert_eq!(forward(&f), Err(AdrtError::Overflow("stage sum")));
        let f = SquareImage::from_fn(3, |_, _| i64::MAX / 4).unwrap();
        assert_eq!(forward(&f), Err(AdrtError::Overflow("stage sum")));
        let f = SquareImage::from_fn(3, |_, _| i64::MAX / 8).unwrap();
        assert!(forward(&f).is_ok());
    }

    #[test]
    fn transpose_small() {
        let f = SquareImage::from_fn(2, |i, j| (i * 4 + j) as i64 - 5).unwrap();
        let g = StripImage::from_fn(2, -3, 4, Kind::Sino, |h, s| h * 3 - s as i64).unwrap();
        let lhs = dot(&forward(&f).unwrap(), &g).unwrap();
        let rhs = dot(&f.embed(), &backproject(&g, 2).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}
