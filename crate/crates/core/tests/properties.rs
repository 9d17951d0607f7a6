//! Property tests for the forward transform, its transpose, the inverse and
//! the validator.

use adrt::format::{parse_str, to_text, write_binary, read_image, AnyImage};
use adrt::grid::{dot, Kind, SquareImage, StripImage};
use adrt::transform::{backproject, forward, forward_bruteforce};
use adrt::{inverse, validate};
use proptest::prelude::*;

/// A scale and a square image of that scale with small integer entries.
fn square(max_n: u32) -> impl Strategy<Value = SquareImage<i64>> {
    (0..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-1000i64..=1000, 1 << (2 * n))
            .prop_map(move |v| SquareImage::from_fn(n, |i, j| v[j << n | i]).unwrap())
    })
}

fn sinogram_like(f: &SquareImage<i64>, seed: i64) -> StripImage<i64> {
    let size = f.size() as i64;
    StripImage::from_fn(f.n(), -(size - 1), size, Kind::Sino, |h, s| {
        (h * 7 + s as i64 * 13 + seed).rem_euclid(201) - 100
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_matches_line_sums(f in square(4)) {
        prop_assert_eq!(forward(&f).unwrap(), forward_bruteforce(&f).unwrap());
    }

    #[test]
    fn backprojection_is_the_transpose(f in square(4), seed in -50i64..50) {
        let g = sinogram_like(&f, seed);
        let lhs = dot(&forward(&f).unwrap(), &g).unwrap();
        let rhs = dot(&f.embed(), &backproject(&g, f.n()).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn forward_is_linear(f in square(4), c in -9i64..=9) {
        let size = f.size();
        let g = SquareImage::from_fn(f.n(), |i, j| (i * 3 + j * size) as i64 % 17 - 8).unwrap();
        let sum = SquareImage::from_fn(f.n(), |i, j| c * f.get(i, j) + g.get(i, j)).unwrap();
        let expect = forward(&f).unwrap().checked_scale(c).unwrap().checked_add(&forward(&g).unwrap()).unwrap();
        prop_assert_eq!(forward(&sum).unwrap(), expect);
    }

    #[test]
    fn integer_round_trip(f in square(5)) {
        prop_assert_eq!(inverse(&forward(&f).unwrap()).unwrap(), f);
    }

    #[test]
    fn float_round_trip_small_scales(f in square(3)) {
        let x = f.map(|v| v as f64 / 7.0);
        let y = inverse(&forward(&x).unwrap()).unwrap();
        for i in 0..x.size() {
            for j in 0..x.size() {
                prop_assert!((x.get(i, j) - y.get(i, j)).abs() <= 1e-12 * x.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn transforms_are_accepted(f in square(4)) {
        let report = validate(&forward(&f).unwrap(), 0.0).unwrap();
        prop_assert!(report.passed);
        prop_assert_eq!(report.violations(), 0);
    }

    #[test]
    fn perturbations_are_rejected(f in square(4), pick in any::<prop::sample::Index>(), bump in 1i64..100) {
        // A 1 x 1 image has no constraints: every value is a transform.
        prop_assume!(f.n() >= 1);
        let mut g = forward(&f).unwrap();
        let cells: Vec<(i64, usize)> = (g.lo()..g.hi()).flat_map(|h| (0..g.width()).map(move |s| (h, s))).collect();
        let (h, s) = cells[pick.index(cells.len())];
        g.set(h, s, g.get(h, s) + bump).unwrap();
        prop_assert!(!validate(&g, 0.0).unwrap().passed);
    }

    #[test]
    fn text_format_round_trip(f in square(3)) {
        let g = forward(&f).unwrap();
        prop_assert_eq!(parse_str(&to_text(&g)).unwrap(), AnyImage::I64(g));
    }

    #[test]
    fn float_text_format_is_bit_exact(bits in prop::collection::vec(any::<f64>(), 4)) {
        let finite: Vec<f64> = bits.iter().map(|v| if v.is_finite() { *v } else { 0.5 }).collect();
        let g = StripImage::from_fn(1, -1, 1, Kind::Sino, |h, s| finite[(h + 1) as usize * 2 + s]).unwrap();
        match parse_str(&to_text(&g)).unwrap() {
            AnyImage::F64(back) => {
                for h in -1..1 {
                    for s in 0..2 {
                        prop_assert_eq!(back.get(h, s).to_bits(), g.get(h, s).to_bits());
                    }
                }
            }
            other => prop_assert!(false, "wrong dtype {:?}", other.dtype()),
        }
    }

    #[test]
    fn binary_format_round_trip(f in square(3)) {
        let g = forward(&f).unwrap();
        let mut buf = Vec::new();
        write_binary(&g, &mut buf).unwrap();
        prop_assert_eq!(read_image(&buf[..]).unwrap(), AnyImage::I64(g));
    }
}
