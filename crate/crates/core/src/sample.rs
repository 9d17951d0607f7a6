use std::fmt::{Debug, Display};

/// Element type tag for images and files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dtype {
    I64,
    F64,
}

impl Dtype {
    pub fn as_str(self) -> &'static str {
        match self {
            Dtype::I64 => "i64",
            Dtype::F64 => "f64",
        }
    }
}

/// A sample value: either exact 64-bit integers (overflow is detected) or
/// double precision reals.
pub trait Sample:
    Copy + Default + PartialEq + PartialOrd + Debug + Display + Send + Sync + 'static
{
    const DTYPE: Dtype;
    /// Arithmetic is exact (overflow aside).
    const EXACT: bool;

    fn zero() -> Self {
        Self::default()
    }
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_f64(self) -> f64;

    fn checked_add(self, rhs: Self) -> Option<Self>;
    fn checked_sub(self, rhs: Self) -> Option<Self>;
    fn checked_mul(self, rhs: Self) -> Option<Self>;
    fn checked_neg(self) -> Option<Self>;

    /// `out[i] = x[i] + y[i]` over the common length; `false` on overflow.
    fn add_into(out: &mut [Self], x: &[Self], y: &[Self]) -> bool {
        let mut ok = true;
        for ((o, &a), &b) in out.iter_mut().zip(x).zip(y) {
            match a.checked_add(b) {
                Some(v) => *o = v,
                None => ok = false,
            }
        }
        ok
    }

    fn is_zero(self) -> bool {
        self == Self::zero()
    }

    fn abs_f64(self) -> f64 {
        self.to_f64().abs()
    }

    /// Whether `self` counts as zero when it arose from cancellation among
    /// terms of total size `magnitude`. Integers are exact and ignore both
    /// arguments.
    fn negligible(self, magnitude: f64, tol: f64) -> bool;
}

impl Sample for i64 {
    const DTYPE: Dtype = Dtype::I64;
    const EXACT: bool = true;

    fn one() -> Self {
        1
    }
    fn from_i64(v: i64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn checked_add(self, rhs: Self) -> Option<Self> {
        i64::checked_add(self, rhs)
    }
    fn checked_sub(self, rhs: Self) -> Option<Self> {
        i64::checked_sub(self, rhs)
    }
    fn checked_mul(self, rhs: Self) -> Option<Self> {
        i64::checked_mul(self, rhs)
    }
    fn checked_neg(self) -> Option<Self> {
        i64::checked_neg(self)
    }
    fn add_into(out: &mut [Self], x: &[Self], y: &[Self]) -> bool {
        // Branch-free so the loop vectorizes: a wrapped sum has the sign
        // of neither operand, which shows up in the sign bit of `signs`.
        let mut signs = 0i64;
        for ((o, &a), &b) in out.iter_mut().zip(x).zip(y) {
            let v = a.wrapping_add(b);
            *o = v;
            signs |= (a ^ v) & (b ^ v);
        }
        signs >= 0
    }
    fn negligible(self, _magnitude: f64, _tol: f64) -> bool {
        self == 0
    }
}

impl Sample for f64 {
    const DTYPE: Dtype = Dtype::F64;
    const EXACT: bool = false;

    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn checked_add(self, rhs: Self) -> Option<Self> {
        Some(self + rhs)
    }
    fn checked_sub(self, rhs: Self) -> Option<Self> {
        Some(self - rhs)
    }
    fn checked_mul(self, rhs: Self) -> Option<Self> {
        Some(self * rhs)
    }
    fn checked_neg(self) -> Option<Self> {
        Some(-self)
    }
    fn add_into(out: &mut [Self], x: &[Self], y: &[Self]) -> bool {
        for ((o, &a), &b) in out.iter_mut().zip(x).zip(y) {
            *o = a + b;
        }
        true
    }
    fn negligible(self, magnitude: f64, tol: f64) -> bool {
        self.abs() <= tol * magnitude
    }
}
