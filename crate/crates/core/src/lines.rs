//! Digital lines and dual digital lines.
//!
//! A digital line at level `m` in section `l` has exactly one point per
//! column of the section, so it is stored as the height `k(t)` for each
//! column `t` in `0..2^m`; the point in global coordinates is
//! `(k(t), t + l 2^m)`.

use crate::error::{arg, AdrtError, Result};
use crate::grid::{check_scale, Kind, StripImage};
use crate::sample::Sample;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitalLine {
    pub n: u32,
    pub m: u32,
    pub section: usize,
    pub h: i64,
    pub s: usize,
    /// Dual lines descend instead of ascend.
    pub dual: bool,
    heights: Vec<i64>,
}

impl DigitalLine {
    /// `k(t)` for each section column `t`.
    pub fn heights(&self) -> &[i64] {
        &self.heights
    }

    /// Points `(k(t), global column)`.
    pub fn points(&self) -> impl Iterator<Item = (i64, usize)> + '_ {
        let offset = self.section << self.m;
        self.heights
            .iter()
            .enumerate()
            .map(move |(t, &k)| (k, t + offset))
    }

    pub fn contains(&self, i: i64, j: usize) -> bool {
        let offset = self.section << self.m;
        j >= offset && j - offset < self.heights.len() && self.heights[j - offset] == i
    }

    /// Lowest and highest heights visited.
    pub fn extent(&self) -> (i64, i64) {
        let lo = *self.heights.iter().min().expect("lines are nonempty");
        let hi = *self.heights.iter().max().expect("lines are nonempty");
        (lo, hi)
    }
}

fn check_line_args(n: u32, m: u32, l: usize, s: usize) -> Result<()> {
    check_scale(n)?;
    if m > n {
        return arg(format!("level m={m} exceeds n={n}"));
    }
    if l >= 1 << (n - m) {
        return arg(format!("section {l} out of range for m={m}, n={n}"));
    }
    if s >= 1 << m {
        return arg(format!("slope {s} out of range for level {m}"));
    }
    Ok(())
}

// Unfolds the two-branch recursion: slope s = 2t + b joins the left half at
// intercept h with the right half at h + sign * (t + b).
fn unfold(m: u32, h: i64, s: usize, sign: i64, out: &mut Vec<i64>) {
    if m == 0 {
        out.push(h);
        return;
    }
    let t = s >> 1;
    let b = (s & 1) as i64;
    unfold(m - 1, h, t, sign, out);
    unfold(m - 1, h + sign * (t as i64 + b), t, sign, out);
}

fn recursive(n: u32, m: u32, l: usize, h: i64, s: usize, dual: bool) -> Result<DigitalLine> {
    check_line_args(n, m, l, s)?;
    let mut heights = Vec::with_capacity(1 << m);
    unfold(m, h, s, if dual { -1 } else { 1 }, &mut heights);
    Ok(DigitalLine {
        n,
        m,
        section: l,
        h,
        s,
        dual,
        heights,
    })
}

/// `D^n_{m,l}[h|s]` by the two-branch recursion.
pub fn digital_line_recursive(n: u32, m: u32, l: usize, h: i64, s: usize) -> Result<DigitalLine> {
    recursive(n, m, l, h, s, false)
}

/// `D'^n_{m,l}[h|s]`, the dual line, by its recursion (negative offsets).
pub fn dual_line_recursive(n: u32, m: u32, l: usize, h: i64, s: usize) -> Result<DigitalLine> {
    recursive(n, m, l, h, s, true)
}

/// Reverses the low `bits` bits of `x`.
pub fn bit_reverse(x: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - bits)
    }
}

/// Height increment between columns `t - 1` and `t` (for `t >= 1`): the
/// bitwise inner product of `t & !(t - 1)` with the `n`-bit reversal of `s`.
pub fn line_increment(n: u32, s: usize, t: usize) -> i64 {
    debug_assert!(t >= 1);
    let lowest = t & !(t - 1);
    (lowest & bit_reverse(s, n)).count_ones() as i64
}

fn closed(n: u32, h: i64, s: usize, dual: bool) -> Result<DigitalLine> {
    check_line_args(n, n, 0, s)?;
    let sign = if dual { -1 } else { 1 };
    let mut heights = Vec::with_capacity(1 << n);
    let mut k = h;
    heights.push(k);
    for t in 1..1usize << n {
        k += sign * line_increment(n, s, t);
        heights.push(k);
    }
    Ok(DigitalLine {
        n,
        m: n,
        section: 0,
        h,
        s,
        dual,
        heights,
    })
}

/// `D^n[h|s]` from the closed-form increments, anchored at `k(0) = h`.
pub fn digital_line_closed(n: u32, h: i64, s: usize) -> Result<DigitalLine> {
    closed(n, h, s, false)
}

/// `D'^n[h|s]` from the same increments with their signs flipped, anchored
/// at `k(0) = h`.
pub fn dual_line_closed(n: u32, h: i64, s: usize) -> Result<DigitalLine> {
    closed(n, h, s, true)
}

/// 0/1 image of the line's points on the window `[lo, hi)`.
pub fn line_indicator<T: Sample>(line: &DigitalLine, lo: i64, hi: i64) -> Result<StripImage<T>> {
    let mut img = StripImage::zeros(line.n, lo, hi, Kind::Image)?;
    for (k, j) in line.points() {
        img.set(k, j, T::one()).map_err(|_| AdrtError::Clip {
            lo,
            hi,
            h: k,
            column: j,
        })?;
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recursion_base_examples() {
        let h = 5;
        assert_eq!(digital_line_recursive(1, 1, 0, h, 0).unwrap().heights(), &[h, h]);
        assert_eq!(digital_line_recursive(1, 1, 0, h, 1).unwrap().heights(), &[h, h + 1]);
        assert_eq!(
            digital_line_recursive(2, 2, 0, h, 3).unwrap().heights(),
            &[h, h + 1, h + 2, h + 3]
        );
        assert_eq!(dual_line_recursive(1, 1, 0, h, 0).unwrap().heights(), &[h, h]);
        assert_eq!(dual_line_recursive(1, 1, 0, h, 1).unwrap().heights(), &[h, h - 1]);
    }

    #[test]
    fn closed_form_examples() {
        let h = -2;
        assert_eq!(digital_line_closed(3, h, 0).unwrap().heights(), &[h; 8]);
        let diag = digital_line_closed(2, h, 3).unwrap();
        assert_eq!(diag.heights(), &[h, h + 1, h + 2, h + 3]);
        assert!((1..4).all(|t| line_increment(2, 3, t) == 1));
        assert_eq!(digital_line_closed(1, h, 1).unwrap().heights(), &[h, h + 1]);
    }

    #[test]
    fn section_offsets() {
        let line = digital_line_recursive(3, 1, 2, 0, 1).unwrap();
        let pts: Vec<_> = line.points().collect();
        assert_eq!(pts, vec![(0, 4), (1, 5)]);
        assert!(line.contains(1, 5));
        assert!(!line.contains(0, 5));
        assert!(!line.contains(0, 0));
    }

    #[test]
    fn argument_bounds() {
        assert!(digital_line_recursive(2, 3, 0, 0, 0).is_err());
        assert!(digital_line_recursive(2, 1, 2, 0, 0).is_err());
        assert!(digital_line_recursive(2, 1, 0, 0, 2).is_err());
        assert!(digital_line_closed(2, 0, 4).is_err());
        assert!(dual_line_closed(1, 0, 2).is_err());
    }

    #[test]
    fn closed_matches_recursion_exhaustively() {
        for n in 0..=5u32 {
            let size = 1i64 << n;
            for s in 0..1usize << n {
                for h in -size..=size {
                    let a = digital_line_closed(n, h, s).unwrap();
                    let b = digital_line_recursive(n, n, 0, h, s).unwrap();
                    assert_eq!(a.heights(), b.heights(), "n={n} h={h} s={s}");
                    let a = dual_line_closed(n, h, s).unwrap();
                    let b = dual_line_recursive(n, n, 0, h, s).unwrap();
                    assert_eq!(a.heights(), b.heights(), "dual n={n} h={h} s={s}");
                }
            }
        }
    }

    #[test]
    fn increments_are_monotone_and_sum_to_slope() {
        for n in 0..=5u32 {
            for m in 0..=n {
                for l in 0..1usize << (n - m) {
                    for s in 0..1usize << m {
                        let line = digital_line_recursive(n, m, l, 3, s).unwrap();
                        let k = line.heights();
                        assert!(k.windows(2).all(|w| w[1] - w[0] == 0 || w[1] - w[0] == 1));
                        assert_eq!(k[k.len() - 1] - k[0], s as i64);

                        let dual = dual_line_recursive(n, m, l, 3, s).unwrap();
                        let d = dual.heights();
                        for t in 1..k.len() {
                            assert_eq!(d[t] - d[t - 1], -(k[t] - k[t - 1]));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn duality_exhaustive() {
        // (i, j) lies on D[h|s] exactly when (h, s) lies on D'[i|j].
        for n in 0..=3u32 {
            let size = 1i64 << n;
            let width = 1usize << n;
            for h in -size..size {
                for s in 0..width {
                    let line = digital_line_recursive(n, n, 0, h, s).unwrap();
                    for i in -2 * size..2 * size {
                        for j in 0..width {
                            let dual = dual_line_recursive(n, n, 0, i, j).unwrap();
                            assert_eq!(line.contains(i, j), dual.contains(h, s));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn indicator() {
        let line = digital_line_closed(1, 0, 1).unwrap();
        let ind: StripImage<i64> = line_indicator(&line, 0, 2).unwrap();
        assert_eq!(ind.nonzeros(), vec![(0, 0, 1), (1, 1, 1)]);
        assert!(matches!(
            line_indicator::<i64>(&line, 0, 1),
            Err(AdrtError::Clip { h: 1, .. })
        ));
    }

    #[test]
    fn bit_reverse_widths() {
        assert_eq!(bit_reverse(0b001, 3), 0b100);
        assert_eq!(bit_reverse(0b110, 3), 0b011);
        assert_eq!(bit_reverse(5, 0), 0);
    }
}
