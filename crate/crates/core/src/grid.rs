//! Index spaces and image containers.
//!
//! Images live on the vertical strip `Z x I_N` with `N = 2^n`. A
//! [`StripImage`] stores a finite window of heights `[lo, hi)`; every value
//! outside the window is zero. A [`SquareImage`] is an `N x N` image, which
//! [`SquareImage::embed`] places on the strip at heights `[0, N)`.
//!
//! Storage is column-major: each column is a contiguous run of heights, so
//! the stage kernels (shifted column sums and prefix sums along `h`) stream
//! through memory.

use std::fmt;

use crate::error::{arg, AdrtError, Result};
use crate::sample::Sample;

/// Largest supported scale exponent.
pub const MAX_SCALE: u32 = 20;

/// Tag distinguishing images from sinograms; only affects file headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Image,
    Sino,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Image => "image",
            Kind::Sino => "sino",
        }
    }
}

pub(crate) fn check_scale(n: u32) -> Result<()> {
    if n > MAX_SCALE {
        return arg(format!("scale n={n} exceeds the supported maximum {MAX_SCALE}"));
    }
    Ok(())
}

/// A finitely windowed image on the strip `Z x I_{2^n}`.
#[derive(Clone)]
pub struct StripImage<T> {
    n: u32,
    lo: i64,
    hi: i64,
    kind: Kind,
    data: Vec<T>,
}

impl<T: Sample> StripImage<T> {
    pub fn zeros(n: u32, lo: i64, hi: i64, kind: Kind) -> Result<Self> {
        check_scale(n)?;
        if lo > hi {
            return arg(format!("window [{lo}, {hi}) is reversed"));
        }
        let rows = (hi - lo) as usize;
        Ok(StripImage {
            n,
            lo,
            hi,
            kind,
            data: vec![T::zero(); rows << n],
        })
    }

    pub fn from_fn(
        n: u32,
        lo: i64,
        hi: i64,
        kind: Kind,
        mut f: impl FnMut(i64, usize) -> T,
    ) -> Result<Self> {
        let mut img = Self::zeros(n, lo, hi, kind)?;
        let rows = img.rows();
        for j in 0..img.width() {
            let col = &mut img.data[j * rows..(j + 1) * rows];
            for (r, v) in col.iter_mut().enumerate() {
                *v = f(lo + r as i64, j);
            }
        }
        Ok(img)
    }

    /// Builds an image from rows listed in ascending height starting at `lo`.
    pub fn from_rows(n: u32, lo: i64, kind: Kind, rows: &[Vec<T>]) -> Result<Self> {
        check_scale(n)?;
        let width = 1usize << n;
        if let Some(bad) = rows.iter().position(|r| r.len() != width) {
            return arg(format!(
                "row {bad} has {} values, expected {width}",
                rows[bad].len()
            ));
        }
        Self::from_fn(n, lo, lo + rows.len() as i64, kind, |h, j| {
            rows[(h - lo) as usize][j]
        })
    }

    /// Builds an image from a row-major buffer (ascending heights).
    pub fn from_row_major(n: u32, lo: i64, hi: i64, kind: Kind, values: &[T]) -> Result<Self> {
        check_scale(n)?;
        if lo > hi {
            return arg(format!("window [{lo}, {hi}) is reversed"));
        }
        let width = 1usize << n;
        let rows = (hi - lo) as usize;
        if values.len() != rows * width {
            return arg(format!(
                "expected {} values for {rows} rows of width {width}, got {}",
                rows * width,
                values.len()
            ));
        }
        Self::from_fn(n, lo, hi, kind, |h, j| values[(h - lo) as usize * width + j])
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of columns, `2^n`.
    pub fn width(&self) -> usize {
        1 << self.n
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn rows(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn with_kind(mut self, kind: Kind) -> Self {
        self.kind = kind;
        self
    }

    pub fn in_window(&self, h: i64) -> bool {
        self.lo <= h && h < self.hi
    }

    /// Value at `(h, j)`; zero outside the window.
    ///
    /// Panics if `j` is not a column of the strip.
    pub fn get(&self, h: i64, j: usize) -> T {
        assert!(j < self.width(), "column {j} out of range");
        if self.in_window(h) {
            self.data[j * self.rows() + (h - self.lo) as usize]
        } else {
            T::zero()
        }
    }

    pub fn set(&mut self, h: i64, j: usize, v: T) -> Result<()> {
        if j >= self.width() {
            return arg(format!("column {j} out of range for width {}", self.width()));
        }
        if !self.in_window(h) {
            return Err(AdrtError::Clip {
                lo: self.lo,
                hi: self.hi,
                h,
                column: j,
            });
        }
        let rows = self.rows();
        self.data[j * rows + (h - self.lo) as usize] = v;
        Ok(())
    }

    pub fn column(&self, j: usize) -> &[T] {
        let rows = self.rows();
        &self.data[j * rows..(j + 1) * rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [T] {
        let rows = self.rows();
        &mut self.data[j * rows..(j + 1) * rows]
    }

    pub(crate) fn raw(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn raw_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Values in row-major order, rows ascending in `h`.
    pub fn to_row_major(&self) -> Vec<T> {
        let width = self.width();
        let rows = self.rows();
        let mut out = Vec::with_capacity(rows * width);
        for r in 0..rows {
            for j in 0..width {
                out.push(self.data[j * rows + r]);
            }
        }
        out
    }

    /// Nonzero entries as `(h, j, value)`, ascending in `h` then `j`.
    pub fn nonzeros(&self) -> Vec<(i64, usize, T)> {
        let rows = self.rows();
        let mut out = Vec::new();
        for r in 0..rows {
            for j in 0..self.width() {
                let v = self.data[j * rows + r];
                if !v.is_zero() {
                    out.push((self.lo + r as i64, j, v));
                }
            }
        }
        out
    }

    /// Smallest and largest heights carrying a nonzero value.
    pub fn support_rows(&self) -> Option<(i64, i64)> {
        let rows = self.rows();
        let live = |r: usize| (0..self.width()).any(|j| !self.data[j * rows + r].is_zero());
        let first = (0..rows).find(|&r| live(r))?;
        let last = (0..rows).rev().find(|&r| live(r))?;
        Some((self.lo + first as i64, self.lo + last as i64))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs_f64()).fold(0.0, f64::max)
    }

    /// Combines two images of the same scale entrywise over the union of
    /// their windows.
    pub fn zip_with(
        &self,
        other: &Self,
        mut f: impl FnMut(T, T) -> Option<T>,
    ) -> Result<Self> {
        if self.n != other.n {
            return arg(format!("scale mismatch: {} vs {}", self.n, other.n));
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi.max(other.hi);
        let mut out = Self::zeros(self.n, lo, hi, self.kind)?;
        let rows = out.rows();
        for j in 0..self.width() {
            for r in 0..rows {
                let h = lo + r as i64;
                out.data[j * rows + r] =
                    f(self.get(h, j), other.get(h, j)).ok_or(AdrtError::Overflow("zip_with"))?;
            }
        }
        Ok(out)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, T::checked_add)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, T::checked_sub)
    }

    pub fn checked_scale(&self, c: T) -> Result<Self> {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v = v.checked_mul(c).ok_or(AdrtError::Overflow("scale"))?;
        }
        Ok(out)
    }

    /// Restricts to a square image; every nonzero value must lie in `[0, N)`.
    pub fn to_square(&self) -> Result<SquareImage<T>> {
        let size = self.width();
        if let Some((first, last)) = self.support_rows() {
            if first < 0 || last >= size as i64 {
                return arg(format!(
                    "support rows [{first}, {last}] do not fit in the square [0, {size})"
                ));
            }
        }
        SquareImage::from_fn(self.n, |i, j| self.get(i as i64, j))
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> StripImage<U> {
        StripImage {
            n: self.n,
            lo: self.lo,
            hi: self.hi,
            kind: self.kind,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Equality of the represented functions on `Z x I_N`: windows may differ as
/// long as the values agree (zero outside each window).
impl<T: Sample> PartialEq for StripImage<T> {
    fn eq(&self, other: &Self) -> bool {
        if self.n != other.n {
            return false;
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi.max(other.hi);
        (0..self.width()).all(|j| (lo..hi).all(|h| self.get(h, j) == other.get(h, j)))
    }
}

impl<T: Sample> fmt::Debug for StripImage<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "StripImage {{ n: {}, window: [{}, {}), kind: {} }}",
            self.n,
            self.lo,
            self.hi,
            self.kind.as_str()
        )?;
        let rows = self.rows();
        for r in 0..rows.min(64) {
            write!(f, "  h={:>4}:", self.lo + r as i64)?;
            for j in 0..self.width().min(16) {
                write!(f, " {}", self.data[j * rows + r])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// An `N x N` image, `N = 2^n`, indexed `(i, j)` with `i` the height.
#[derive(Clone, PartialEq)]
pub struct SquareImage<T> {
    n: u32,
    data: Vec<T>,
}

impl<T: Sample> SquareImage<T> {
    pub fn zeros(n: u32) -> Result<Self> {
        check_scale(n)?;
        Ok(SquareImage {
            n,
            data: vec![T::zero(); 1 << (2 * n)],
        })
    }

    pub fn from_fn(n: u32, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut img = Self::zeros(n)?;
        let size = img.size();
        for j in 0..size {
            for i in 0..size {
                img.data[j * size + i] = f(i, j);
            }
        }
        Ok(img)
    }

    /// Builds from rows `rows[i][j]`; the row count must be a power of two
    /// equal to the row length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let size = rows.len();
        if !size.is_power_of_two() {
            return arg(format!("image size {size} is not a power of two"));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != size) {
            return arg(format!("row {bad} has {} values, expected {size}", rows[bad].len()));
        }
        Self::from_fn(size.trailing_zeros(), |i, j| rows[i][j])
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Side length `N = 2^n`.
    pub fn size(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.size() + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let size = self.size();
        self.data[j * size + i] = v;
    }

    pub fn column(&self, j: usize) -> &[T] {
        let size = self.size();
        &self.data[j * size..(j + 1) * size]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.size())
            .map(|i| (0..self.size()).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// The same image as an element of the strip, window `[0, N)`.
    pub fn embed(&self) -> StripImage<T> {
        StripImage {
            n: self.n,
            lo: 0,
            hi: self.size() as i64,
            kind: Kind::Image,
            data: self.data.clone(),
        }
    }

    /// `(i, j) -> f(j, i)`.
    pub fn transpose(&self) -> Self {
        let size = self.size();
        let mut out = self.clone();
        for j in 0..size {
            for i in 0..size {
                out.data[j * size + i] = self.get(j, i);
            }
        }
        out
    }

    /// `(i, j) -> f(i, N - 1 - j)`.
    pub fn flip_columns(&self) -> Self {
        let size = self.size();
        let mut out = self.clone();
        for j in 0..size {
            for i in 0..size {
                out.data[j * size + i] = self.get(i, size - 1 - j);
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs_f64()).fold(0.0, f64::max)
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> SquareImage<U> {
        SquareImage {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl<T: Sample> fmt::Debug for SquareImage<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SquareImage {{ n: {} }}", self.n)?;
        for i in 0..self.size().min(32) {
            write!(f, " ")?;
            for j in 0..self.size().min(16) {
                write!(f, " {}", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The `(m, l)`-section of a strip image: columns `[l 2^m, (l+1) 2^m)`
/// addressed as `0..2^m`. Borrowed, no copy.
#[derive(Clone, Copy)]
pub struct SectionView<'a, T> {
    parent: &'a StripImage<T>,
    m: u32,
    offset: usize,
}

impl<'a, T: Sample> SectionView<'a, T> {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn width(&self) -> usize {
        1 << self.m
    }

    /// Column of the parent holding section column 0.
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn get(&self, i: i64, j: usize) -> T {
        assert!(j < self.width(), "section column {j} out of range");
        self.parent.get(i, j + self.offset)
    }
}

/// Mutable counterpart of [`SectionView`]; writes land in the parent.
pub struct SectionViewMut<'a, T> {
    parent: &'a mut StripImage<T>,
    m: u32,
    offset: usize,
}

impl<'a, T: Sample> SectionViewMut<'a, T> {
    pub fn width(&self) -> usize {
        1 << self.m
    }

    pub fn get(&self, i: i64, j: usize) -> T {
        assert!(j < self.width(), "section column {j} out of range");
        self.parent.get(i, j + self.offset)
    }

    pub fn set(&mut self, i: i64, j: usize, v: T) -> Result<()> {
        if j >= self.width() {
            return arg(format!("section column {j} out of range"));
        }
        self.parent.set(i, j + self.offset, v)
    }
}

fn section_offset(n: u32, m: u32, l: usize) -> Result<usize> {
    if m > n {
        return arg(format!("section scale m={m} exceeds n={n}"));
    }
    if l >= 1 << (n - m) {
        return arg(format!("section index {l} out of range for m={m}, n={n}"));
    }
    Ok(l << m)
}

pub fn section<T: Sample>(f: &StripImage<T>, m: u32, l: usize) -> Result<SectionView<'_, T>> {
    let offset = section_offset(f.n, m, l)?;
    Ok(SectionView {
        parent: f,
        m,
        offset,
    })
}

pub fn section_mut<T: Sample>(
    f: &mut StripImage<T>,
    m: u32,
    l: usize,
) -> Result<SectionViewMut<'_, T>> {
    let offset = section_offset(f.n, m, l)?;
    Ok(SectionViewMut {
        parent: f,
        m,
        offset,
    })
}

/// Dot product over the intersection of the windows, summed in ascending
/// `h` and then ascending `j`.
pub fn dot<T: Sample>(f: &StripImage<T>, g: &StripImage<T>) -> Result<T> {
    if f.n != g.n {
        return arg(format!("scale mismatch: {} vs {}", f.n, g.n));
    }
    let lo = f.lo.max(g.lo);
    let hi = f.hi.min(g.hi);
    let mut acc = T::zero();
    for h in lo..hi {
        for j in 0..f.width() {
            let term = f
                .get(h, j)
                .checked_mul(g.get(h, j))
                .ok_or(AdrtError::Overflow("dot"))?;
            acc = acc.checked_add(term).ok_or(AdrtError::Overflow("dot"))?;
        }
    }
    Ok(acc)
}

/// Kronecker delta at `(i, j)` on the window `[i, i + 1)`.
pub fn make_delta<T: Sample>(n: u32, i: i64, j: usize) -> Result<StripImage<T>> {
    check_scale(n)?;
    if j >= 1 << n {
        return arg(format!("column {j} out of range for n={n}"));
    }
    let mut d = StripImage::zeros(n, i, i + 1, Kind::Image)?;
    d.set(i, j, T::one())?;
    Ok(d)
}

/// Copies `f` onto the window `[lo, hi)`. Dropping a nonzero value is an
/// error unless `clip` is set, in which case the result is the cut-off of
/// `f` to the new window.
pub fn rewindow<T: Sample>(f: &StripImage<T>, lo: i64, hi: i64, clip: bool) -> Result<StripImage<T>> {
    let mut out = StripImage::zeros(f.n, lo, hi, f.kind)?;
    let rows = out.rows();
    for j in 0..f.width() {
        let src = f.column(j);
        for (r, &v) in src.iter().enumerate() {
            let h = f.lo + r as i64;
            if out.in_window(h) {
                out.data[j * rows + (h - lo) as usize] = v;
            } else if !clip && !v.is_zero() {
                return Err(AdrtError::Clip {
                    lo,
                    hi,
                    h,
                    column: j,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: u32, lo: i64, hi: i64) -> StripImage<i64> {
        StripImage::from_fn(n, lo, hi, Kind::Image, |h, j| 100 * h + j as i64 + 1).unwrap()
    }

    #[test]
    fn section_addresses_parent_columns() {
        let f = ramp(3, 0, 4);
        let v = section(&f, 1, 2).unwrap();
        assert_eq!(v.width(), 2);
        assert_eq!(v.offset(), 4);
        assert_eq!(v.get(3, 0), f.get(3, 4));
        assert_eq!(v.get(3, 1), f.get(3, 5));
    }

    #[test]
    fn section_full_and_single_column() {
        let f = ramp(3, -2, 3);
        let whole = section(&f, 3, 0).unwrap();
        for j in 0..8 {
            assert_eq!(whole.get(1, j), f.get(1, j));
        }
        let col = section(&f, 0, 5).unwrap();
        assert_eq!(col.width(), 1);
        assert_eq!(col.get(-2, 0), f.get(-2, 5));
    }

    #[test]
    fn section_bounds() {
        let f = ramp(2, 0, 1);
        assert!(section(&f, 3, 0).is_err());
        assert!(section(&f, 1, 2).is_err());
    }

    #[test]
    fn section_write_through() {
        let mut f = ramp(2, 0, 2);
        section_mut(&mut f, 1, 1).unwrap().set(1, 1, -7).unwrap();
        assert_eq!(f.get(1, 3), -7);
    }

    #[test]
    fn sections_reassemble() {
        for n in 0..=5 {
            let f = ramp(n, -3, 5);
            for m in 0..=n {
                let mut g = StripImage::zeros(n, -3, 5, Kind::Image).unwrap();
                for l in 0..1usize << (n - m) {
                    let src = section(&f, m, l).unwrap();
                    let mut dst = section_mut(&mut g, m, l).unwrap();
                    for h in -3..5 {
                        for j in 0..src.width() {
                            dst.set(h, j, src.get(h, j)).unwrap();
                        }
                    }
                }
                // f(i, j) = f_{m, j / 2^m}(i, j mod 2^m)
                for h in -3..5 {
                    for j in 0..f.width() {
                        let v = section(&g, m, j >> m).unwrap().get(h, j & ((1 << m) - 1));
                        assert_eq!(v, f.get(h, j));
                    }
                }
                assert_eq!(g, f);
            }
        }
    }

    #[test]
    fn delta_dot() {
        let d = make_delta::<i64>(1, 0, 0).unwrap();
        assert_eq!(dot(&d, &d).unwrap(), 1);
        assert_eq!(d.nonzeros(), vec![(0, 0, 1)]);

        let neg = make_delta::<i64>(2, -3, 1).unwrap();
        assert_eq!(neg.get(-3, 1), 1);
        assert_eq!(neg.lo(), -3);

        assert!(make_delta::<i64>(1, 0, 2).is_err());
    }

    #[test]
    fn dot_disjoint_windows() {
        let f = ramp(2, 0, 3);
        let g = ramp(2, 5, 7);
        assert_eq!(dot(&f, &g).unwrap(), 0);
    }

    #[test]
    fn dot_point_evaluation() {
        let f = ramp(2, -2, 3);
        for h in -2..3 {
            for j in 0..4 {
                let d = make_delta(2, h, j).unwrap();
                assert_eq!(dot(&f, &d).unwrap(), f.get(h, j));
            }
        }
    }

    #[test]
    fn dot_scale_mismatch_and_overflow() {
        assert!(dot(&ramp(1, 0, 1), &ramp(2, 0, 1)).is_err());
        let big = StripImage::from_fn(1, 0, 1, Kind::Image, |_, _| i64::MAX).unwrap();
        assert_eq!(dot(&big, &big), Err(AdrtError::Overflow("dot")));
    }

    #[test]
    fn rewindow_widen_and_clip() {
        let f = ramp(1, 0, 2);
        let wide = rewindow(&f, -4, 6, false).unwrap();
        assert_eq!(wide, f);
        let g = ramp(1, -1, 3);
        assert_eq!(dot(&wide, &g).unwrap(), dot(&f, &g).unwrap());

        let err = rewindow(&f, 0, 1, false).unwrap_err();
        assert!(matches!(err, AdrtError::Clip { h: 1, .. }));
        let cut = rewindow(&f, 0, 1, true).unwrap();
        assert_eq!(cut.get(1, 0), 0);
        assert_eq!(cut.get(0, 1), f.get(0, 1));
    }

    #[test]
    fn equality_ignores_window() {
        let f = ramp(1, 0, 2);
        let wide = rewindow(&f, -3, 4, false).unwrap();
        assert_eq!(f, wide);
        let mut other = wide.clone();
        other.set(-3, 0, 1).unwrap();
        assert_ne!(f, other);
    }

    #[test]
    fn square_embed_and_views() {
        let sq = SquareImage::from_rows(&[vec![1i64, 2], vec![3, 4]]).unwrap();
        let e = sq.embed();
        assert_eq!((e.lo(), e.hi()), (0, 2));
        assert_eq!(e.get(1, 0), 3);
        assert_eq!(sq.transpose().get(0, 1), 3);
        assert_eq!(sq.flip_columns().get(0, 0), 2);
        assert_eq!(e.to_square().unwrap(), sq);
        assert_eq!(e.to_row_major(), vec![1, 2, 3, 4]);
        assert!(SquareImage::from_rows(&vec![vec![1i64, 2, 3]; 3]).is_err());
    }
}
