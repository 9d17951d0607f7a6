//! Range characterization: which sinograms are transforms of square images.
//!
//! A sinogram supported in `E^n = {-s <= h <= N - 1}` is in the range of
//! the transform on square images exactly when staged backward substitution
//! never leaves the support sets `E^n_m`. At each level `m = n, ..., 1` and
//! for each section `l` and slope pair `(2q, 2q + 1)` this amounts to
//!
//! * one mass constraint: both slopes carry the same total, and
//! * for `m >= 2`, `2q` support constraints: after inverting the stage, the
//!   left half must vanish at heights `[-2q, -q)` and the right half at
//!   heights `[N, N + q)`.
//!
//! Together these are `N (N - 1) / 2` independent linear constraints. They
//! are evaluated by residual extraction during the substitution, never as
//! matrices; the generating families are available from
//! [`basis_families`] for testing.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{arg, Result};
use crate::grid::{check_scale, rewindow, Kind, StripImage};
use crate::inverse::{inverse_stage_raw, magnitude_stage_raw, magnitudes};
use crate::sample::Sample;

/// Membership in `E^n_m`: `-(s mod 2^m) <= h <= 2^n - 1`.
pub fn in_support_set(n: u32, m: u32, h: i64, s: usize) -> bool {
    let low = (s & ((1usize << m) - 1)) as i64;
    -low <= h && h < (1i64 << n)
}

/// The set `E^n_{m,l}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportSet {
    pub n: u32,
    pub m: u32,
    pub l: usize,
}

impl SupportSet {
    pub fn contains(&self, h: i64, s: usize) -> bool {
        (s >> self.m) == self.l && in_support_set(self.n, self.m, h, s)
    }

    /// `2^m N + 2^m (2^m - 1) / 2`.
    pub fn cardinality(&self) -> u64 {
        let w = 1u64 << self.m;
        w * (1u64 << self.n) + w * (w - 1) / 2
    }

    pub fn members(&self) -> impl Iterator<Item = (i64, usize)> + '_ {
        let size = 1i64 << self.n;
        let base = self.l << self.m;
        (0..1usize << self.m)
            .flat_map(move |t| (-(t as i64)..size).map(move |h| (h, base + t)))
    }
}

pub fn e_set(n: u32, m: u32, l: usize) -> Result<SupportSet> {
    check_scale(n)?;
    if m > n || l >= 1 << (n - m) {
        return arg(format!("(m={m}, l={l}) out of range for n={n}"));
    }
    Ok(SupportSet { n, m, l })
}

/// Whether every nonzero value of `g` lies in `E^n_m`.
pub fn check_support<T: Sample>(g: &StripImage<T>, m: u32) -> bool {
    m <= g.n() && g.nonzeros().iter().all(|&(h, s, _)| in_support_set(g.n(), m, h, s))
}

fn mass_residual<T: Sample>(g: &StripImage<T>, even: usize, t: usize) -> Result<T> {
    let overflow = crate::error::AdrtError::Overflow("mass residual");
    let mut acc = T::zero();
    for h in g.lo().max(-2 * t as i64)..g.hi() {
        acc = acc.checked_add(g.get(h, even)).ok_or(overflow.clone())?;
    }
    for h in g.lo().max(-2 * t as i64 - 1)..g.hi() {
        acc = acc.checked_sub(g.get(h, even + 1)).ok_or(overflow.clone())?;
    }
    Ok(acc)
}

/// Mass residuals of section `l` at level `m`, one per `t in 0..2^{m-1}`:
/// the sum of slope `2t` over `h >= -2t` minus the sum of slope `2t + 1`
/// over `h >= -2t - 1`.
pub fn mass_residuals<T: Sample>(g: &StripImage<T>, m: u32, l: usize) -> Result<Vec<T>> {
    let n = g.n();
    if m == 0 || m > n || l >= 1 << (n - m) {
        return arg(format!("(m={m}, l={l}) out of range for n={n}"));
    }
    let base = l << m;
    (0..1usize << (m - 1))
        .map(|t| mass_residual(g, base + 2 * t, t))
        .collect()
}

/// Which half of a stage inverse a support constraint reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Left half, heights `[-2q, -q)`.
    Lower,
    /// Right half, heights `[N, N + q)`.
    Upper,
}

/// Identifies one linear constraint on the sinogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConstraintId {
    Mass {
        level: u32,
        section: usize,
        pair: usize,
    },
    Support {
        level: u32,
        section: usize,
        pair: usize,
        branch: Branch,
        h: i64,
    },
}

impl ConstraintId {
    pub fn is_mass(&self) -> bool {
        matches!(self, ConstraintId::Mass { .. })
    }
}

/// One evaluated constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual<T> {
    pub value: T,
    /// Total size of the sinogram terms that cancel into `value`, the
    /// scale against which float residuals are judged. Zero for integers.
    pub magnitude: f64,
}

impl<T: Sample> Residual<T> {
    pub fn vanishes(&self, tol: f64) -> bool {
        self.value.is_zero() || self.value.negligible(self.magnitude, tol)
    }
}

/// Residuals of one level and the next-level image, restricted to its
/// support set.
#[derive(Debug, Clone)]
pub struct LevelResiduals<T: Sample> {
    pub residuals: Vec<(ConstraintId, Residual<T>)>,
    /// `(S^n_m)^{-1}[g]` with everything outside `E^n_{m-1}` removed.
    pub next: StripImage<T>,
    next_magnitudes: Option<Vec<f64>>,
}

fn clip_to_support<T: Sample>(f: &mut StripImage<T>, mag: &mut Option<Vec<f64>>, m: u32) {
    let (n, lo, rows) = (f.n(), f.lo(), f.rows());
    for j in 0..f.width() {
        for (r, v) in f.column_mut(j).iter_mut().enumerate() {
            if !in_support_set(n, m, lo + r as i64, j) {
                *v = T::zero();
                if let Some(b) = mag.as_mut() {
                    b[j * rows + r] = 0.0;
                }
            }
        }
    }
}

/// Evaluates the level-`m` constraints on `g`, whose support is taken to
/// lie in `E^n_m` (values outside it are ignored).
pub fn level_residuals<T: Sample>(g: &StripImage<T>, m: u32) -> Result<LevelResiduals<T>> {
    let n = g.n();
    if m == 0 || m > n {
        return arg(format!("level {m} out of range for n={n}"));
    }
    let size = 1i64 << n;
    let src = rewindow(g, -(size - 1), 2 * size, true)?;
    let mag = magnitudes(&src);
    level_pass(src, mag, m)
}

fn level_pass<T: Sample>(
    mut src: StripImage<T>,
    mut mag: Option<Vec<f64>>,
    m: u32,
) -> Result<LevelResiduals<T>> {
    let n = src.n();
    let size = 1i64 << n;
    let rows = src.rows();
    let lo = src.lo();
    clip_to_support(&mut src, &mut mag, m);
    let magnitude = |mag: &Option<Vec<f64>>, h: i64, j: usize| {
        mag.as_ref().map_or(0.0, |b| {
            let r = h - lo;
            if (0..rows as i64).contains(&r) {
                b[j * rows + r as usize]
            } else {
                0.0
            }
        })
    };

    let half = 1usize << (m - 1);
    let mut residuals = Vec::new();
    for section in 0..1usize << (n - m) {
        for (pair, value) in mass_residuals(&src, m, section)?.into_iter().enumerate() {
            let even = (section << m) + 2 * pair;
            let t = pair as i64;
            let total = ((-2 * t).max(lo)..src.hi())
                .map(|h| magnitude(&mag, h, even))
                .chain(((-2 * t - 1).max(lo)..src.hi()).map(|h| magnitude(&mag, h, even + 1)))
                .sum();
            let id = ConstraintId::Mass {
                level: m,
                section,
                pair,
            };
            residuals.push((
                id,
                Residual {
                    value,
                    magnitude: total,
                },
            ));
        }
    }

    let mut next = src.clone();
    inverse_stage_raw(src.raw(), next.raw_mut(), m, rows)?;
    let mut next_mag = mag.clone();
    if let (Some(a), Some(b)) = (&mag, &mut next_mag) {
        magnitude_stage_raw(a, b, m, rows);
    }
    if m >= 2 {
        for section in 0..1usize << (n - m) {
            let base = section << m;
            for q in 0..half {
                let qi = q as i64;
                let lower = (-2 * qi..-qi).map(|h| (Branch::Lower, h, base + q));
                let upper = (size..size + qi).map(|h| (Branch::Upper, h, base + half + q));
                for (branch, h, j) in lower.chain(upper) {
                    let id = ConstraintId::Support {
                        level: m,
                        section,
                        pair: q,
                        branch,
                        h,
                    };
                    let r = Residual {
                        value: next.get(h, j),
                        magnitude: magnitude(&next_mag, h, j),
                    };
                    residuals.push((id, r));
                }
            }
        }
    }
    clip_to_support(&mut next, &mut next_mag, m - 1);
    Ok(LevelResiduals {
        residuals,
        next,
        next_magnitudes: next_mag,
    })
}

/// Outcome of [`validate`].
#[derive(Debug, Clone)]
pub struct RangeReport<T> {
    pub n: u32,
    pub residuals: BTreeMap<ConstraintId, Residual<T>>,
    /// Nonzero input values outside `E^n`.
    pub outside_support: Vec<(i64, usize, T)>,
    /// Largest residual or out-of-support magnitude.
    pub max_abs: f64,
    pub mass_count: usize,
    pub support_count: usize,
    /// Tolerance applied to float data; zero for integers.
    pub tol: f64,
    pub passed: bool,
}

impl<T: Sample> RangeReport<T> {
    pub fn total(&self) -> usize {
        self.mass_count + self.support_count
    }

    pub fn nonzero_residuals(&self) -> usize {
        self.residuals.values().filter(|r| !r.value.is_zero()).count()
    }

    /// Residuals that exceed the tolerance.
    pub fn violations(&self) -> usize {
        self.residuals.values().filter(|r| !r.vanishes(self.tol)).count()
    }
}

/// Decides whether `g` is the transform of a square image.
///
/// Integer data is checked exactly and `tol` is ignored. A float residual
/// passes when it is at most `tol` times the total magnitude of the terms
/// that cancel into it, and a float value outside `E^n` passes when it is
/// at most `tol * max |g|`.
pub fn validate<T: Sample>(g: &StripImage<T>, tol: f64) -> Result<RangeReport<T>> {
    let n = g.n();
    let tol = if T::EXACT { 0.0 } else { tol };
    let scale = g.max_abs();
    let outside_support: Vec<_> = g
        .nonzeros()
        .into_iter()
        .filter(|&(h, s, _)| !in_support_set(n, n, h, s))
        .collect();

    let size = 1i64 << n;
    let mut residuals = BTreeMap::new();
    let mut current = rewindow(g, -(size - 1), 2 * size, true)?;
    let mut mag = magnitudes(&current);
    for m in (1..=n).rev() {
        let level = level_pass(current, mag, m)?;
        residuals.extend(level.residuals);
        current = level.next;
        mag = level.next_magnitudes;
    }

    let mass_count = residuals.keys().filter(|id| id.is_mass()).count();
    let support_count = residuals.len() - mass_count;
    let max_abs = residuals
        .values()
        .map(|r| r.value.abs_f64())
        .chain(outside_support.iter().map(|(_, _, v)| v.abs_f64()))
        .fold(0.0, f64::max);
    let passed = residuals.values().all(|r| r.vanishes(tol))
        && outside_support.iter().all(|&(_, _, v)| v.negligible(scale, tol));
    Ok(RangeReport {
        n,
        residuals,
        outside_support,
        max_abs,
        mass_count,
        support_count,
        tol,
        passed,
    })
}

/// Breakdown of the number of range constraints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintCount {
    /// `(N / 2) n`.
    pub mass: u64,
    /// `(m, N (2^{m-1} - 1) / 2)` for `m = 2..=n`.
    pub support_by_level: Vec<(u32, u64)>,
    /// `N (N - 1) / 2`.
    pub total: u64,
}

pub fn constraint_count(n: u32) -> ConstraintCount {
    let size = 1u64 << n;
    let mass = size / 2 * u64::from(n);
    let support_by_level: Vec<_> = (2..=n)
        .map(|m| (m, size * ((1u64 << (m - 1)) - 1) / 2))
        .collect();
    let total = mass + support_by_level.iter().map(|&(_, c)| c).sum::<u64>();
    ConstraintCount {
        mass,
        support_by_level,
        total,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Phi,
    Psi,
    Mu,
}

/// Position of a generator in the split of the level space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// Reachable from images supported in the previous support set.
    Over,
    /// Only reachable from images leaving it (support constraints).
    Under,
    /// Mass direction.
    Mass,
}

#[derive(Debug, Clone)]
pub struct BasisMember {
    pub family: Family,
    pub part: Part,
    pub q: usize,
    /// `None` for mass generators.
    pub p: Option<i64>,
    pub image: StripImage<i64>,
}

fn check_family_args(n: u32, m: u32, l: usize, q: usize) -> Result<usize> {
    if m == 0 || m > n || l >= 1 << (n - m) || q >= 1 << (m - 1) {
        return arg(format!("(m={m}, l={l}, q={q}) out of range for n={n}"));
    }
    Ok(l << m)
}

fn sparse(n: u32, entries: &[(i64, usize, i64)]) -> Result<StripImage<i64>> {
    let size = 1i64 << n;
    let mut img = StripImage::zeros(n, -(size - 1), size, Kind::Sino)?;
    for &(h, s, v) in entries {
        let cur = img.get(h, s);
        img.set(h, s, cur + v)?;
    }
    Ok(img)
}

/// `delta_{p, 2q + l 2^m} + delta_{p, 2q + 1 + l 2^m}`.
pub fn phi(n: u32, m: u32, l: usize, p: i64, q: usize) -> Result<StripImage<i64>> {
    let base = check_family_args(n, m, l, q)?;
    sparse(n, &[(p, base + 2 * q, 1), (p, base + 2 * q + 1, 1)])
}

/// `delta_{p, 2q + l 2^m} + delta_{p - 1, 2q + 1 + l 2^m}`.
pub fn psi(n: u32, m: u32, l: usize, p: i64, q: usize) -> Result<StripImage<i64>> {
    let base = check_family_args(n, m, l, q)?;
    sparse(n, &[(p, base + 2 * q, 1), (p - 1, base + 2 * q + 1, 1)])
}

/// `+1` on slope `2q` for `-2q <= h < N`, `-1` on slope `2q + 1` for
/// `-2q - 1 <= h < N`.
pub fn mu(n: u32, m: u32, l: usize, q: usize) -> Result<StripImage<i64>> {
    let base = check_family_args(n, m, l, q)?;
    let size = 1i64 << n;
    let qi = q as i64;
    let mut entries: Vec<_> = (-2 * qi..size).map(|h| (h, base + 2 * q, 1)).collect();
    entries.extend((-2 * qi - 1..size).map(|h| (h, base + 2 * q + 1, -1)));
    sparse(n, &entries)
}

/// All `phi`, `psi` and `mu` generators of section `l` at level `m`, tagged
/// with their part of the split.
pub fn basis_families(n: u32, m: u32, l: usize) -> Result<Vec<BasisMember>> {
    check_family_args(n, m, l, 0)?;
    let size = 1i64 << n;
    let mut out = Vec::new();
    for q in 0..1usize << (m - 1) {
        let qi = q as i64;
        for p in -2 * qi..size {
            out.push(BasisMember {
                family: Family::Phi,
                part: if p >= -qi { Part::Over } else { Part::Under },
                q,
                p: Some(p),
                image: phi(n, m, l, p, q)?,
            });
        }
        for p in -2 * qi..size {
            out.push(BasisMember {
                family: Family::Psi,
                part: if p < size - qi { Part::Over } else { Part::Under },
                q,
                p: Some(p),
                image: psi(n, m, l, p, q)?,
            });
        }
        out.push(BasisMember {
            family: Family::Mu,
            part: Part::Mass,
            q,
            p: None,
            image: mu(n, m, l, q)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dot, make_delta, SquareImage};
    use crate::transform::{forward, forward_partial};

    fn sino_2x2() -> StripImage<i64> {
        forward(&SquareImage::from_rows(&[vec![1i64, 2], vec![3, 4]]).unwrap()).unwrap()
    }

    #[test]
    fn e_set_examples() {
        let e = e_set(3, 0, 5).unwrap();
        assert_eq!(e.cardinality(), 8);
        assert!(e.contains(0, 5) && e.contains(7, 5));
        assert!(!e.contains(-1, 5) && !e.contains(0, 4));

        let e = e_set(1, 1, 0).unwrap();
        let members: Vec<_> = e.members().collect();
        assert_eq!(members, vec![(0, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]);
        assert_eq!(e.cardinality(), 5);

        for n in 0..=6u32 {
            let size = 1u64 << n;
            let e = e_set(n, n, 0).unwrap();
            assert_eq!(2 * e.cardinality(), 3 * size * size - size);
            assert_eq!(e.members().count() as u64, e.cardinality());
        }
        assert!(e_set(2, 3, 0).is_err());
        assert!(e_set(2, 1, 2).is_err());
    }

    #[test]
    fn support_checks() {
        let d = make_delta::<i64>(2, -1, 0).unwrap();
        assert!(!check_support(&d, 0));
        let d = make_delta::<i64>(2, -1, 1).unwrap();
        assert!(!check_support(&d, 0));
        assert!(check_support(&d, 1) && check_support(&d, 2));
    }

    #[test]
    fn forward_partial_stays_in_support_sets() {
        let f = SquareImage::from_fn(3, |i, j| (i * 7 + j * 3) as i64 % 5 - 2).unwrap();
        for m in 0..=3 {
            assert!(check_support(&forward_partial(&f, m).unwrap(), m));
        }
    }

    #[test]
    fn mass_examples() {
        let g = sino_2x2();
        assert_eq!(mass_residuals(&g, 1, 0).unwrap(), vec![0]);
        let mut bumped = g.clone();
        bumped.set(0, 1, 6).unwrap();
        assert_eq!(mass_residuals(&bumped, 1, 0).unwrap(), vec![-1]);
        assert!(mass_residuals(&g, 0, 0).is_err());
        assert!(mass_residuals(&g, 1, 1).is_err());
    }

    #[test]
    fn validate_two_by_two() {
        let report = validate(&sino_2x2(), 0.0).unwrap();
        assert!(report.passed);
        assert_eq!(report.total(), 1);
        assert_eq!(report.mass_count, 1);

        let mut g = sino_2x2();
        g.set(1, 1, 4).unwrap();
        let report = validate(&g, 0.0).unwrap();
        assert!(!report.passed);
        let id = ConstraintId::Mass {
            level: 1,
            section: 0,
            pair: 0,
        };
        assert_eq!(report.residuals[&id].value, -1);
    }

    #[test]
    fn validate_flags_values_outside_support() {
        let mut g = sino_2x2();
        g.set(-1, 0, 1).unwrap();
        let report = validate(&g, 0.0).unwrap();
        assert!(!report.passed);
        assert_eq!(report.outside_support, vec![(-1, 0, 1)]);
    }

    #[test]
    fn counts() {
        assert_eq!(constraint_count(0).total, 0);
        assert_eq!(constraint_count(1).total, 1);
        let c = constraint_count(2);
        assert_eq!((c.mass, c.support_by_level.clone(), c.total), (4, vec![(2, 2)], 6));
        assert_eq!(constraint_count(3).total, 28);
        for n in 0..=12u32 {
            let size = 1u64 << n;
            assert_eq!(constraint_count(n).total, size * (size - 1) / 2);
        }
    }

    #[test]
    fn generators_have_two_unit_entries() {
        for n in 1..=3 {
            for m in 1..=n {
                for l in 0..1usize << (n - m) {
                    for b in basis_families(n, m, l).unwrap() {
                        if b.family != Family::Mu {
                            let nz = b.image.nonzeros();
                            assert_eq!(nz.len(), 2);
                            assert!(nz.iter().all(|&(_, _, v)| v == 1));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn mass_generators_are_orthogonal_to_phi_and_psi() {
        for n in 1..=3 {
            for m in 1..=n {
                for l in 0..1usize << (n - m) {
                    let members = basis_families(n, m, l).unwrap();
                    for a in members.iter().filter(|b| b.family == Family::Mu) {
                        for b in members.iter().filter(|b| b.family != Family::Mu) {
                            assert_eq!(dot(&a.image, &b.image).unwrap(), 0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn generators_live_in_support_set_and_split_counts() {
        for n in 1..=4 {
            for m in 1..=n {
                let members = basis_families(n, m, 0).unwrap();
                for b in &members {
                    assert!(check_support(&b.image, m));
                }
                let under = members.iter().filter(|b| b.part == Part::Under).count();
                let half = 1usize << (m - 1);
                assert_eq!(under, half * (half - 1));
                // generators of one section span E^n_{m,l}
                let e = e_set(n, m, 0).unwrap();
                assert_eq!(members.len() as u64, e.cardinality());
            }
        }
    }

    #[test]
    fn gram_matrix_of_one_pair_is_tridiagonal() {
        let (n, m, l, q) = (3, 3, 0, 2usize);
        let size = 8i64;
        let qi = q as i64;
        // psi_p, phi_p alternate; neighbours share exactly one delta
        let mut chain = Vec::new();
        for p in -2 * qi..size {
            chain.push(psi(n, m, l, p, q).unwrap());
            chain.push(phi(n, m, l, p, q).unwrap());
        }
        for (a, x) in chain.iter().enumerate() {
            for (b, y) in chain.iter().enumerate() {
                let expect = match a.abs_diff(b) {
                    0 => 2,
                    1 => 1,
                    _ => 0,
                };
                assert_eq!(dot(x, y).unwrap(), expect, "({a}, {b})");
            }
        }
    }
}
