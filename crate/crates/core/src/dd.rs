//! Double-double arithmetic.
//!
//! A [`Dd`] carries an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`,
//! giving roughly 106 bits of significand. The closed-form link statistics
//! subtract nearly equal moments (the distortion variance can be eleven
//! orders of magnitude below the second moment it is extracted from), so they
//! are evaluated in this type and rounded to `f64` only at the end.
//!
//! Only what the analytics need is provided: field operations, `exp`, and the
//! scaled complementary error function.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value represented as the unevaluated sum `hi + lo`.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    // Above 2^996 the splitter product would overflow; split a scaled copy.
    const THRESHOLD: f64 = 6.696_928_794_914_17e299;
    if a.abs() > THRESHOLD {
        let b = a * 3.725_290_298_461_914e-9; // 2^-28
        let t = SPLITTER * b;
        let hi = t - (t - b);
        let lo = b - hi;
        return (hi * 268_435_456.0, lo * 268_435_456.0);
    }
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    if !p.is_finite() {
        return (p, 0.0);
    }
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const SQRT_2PI: Dd = Dd { hi: 2.5066282746310007, lo: -1.8328579980459167e-16 };
    pub const FRAC_1_SQRT_2PI: Dd = Dd { hi: 0.3989422804014327, lo: -2.49232720227773e-17 };
    pub const FRAC_1_SQRT_PI: Dd = Dd { hi: 0.5641895835477563, lo: 7.66772980658294e-18 };
    pub const FRAC_2_SQRT_PI: Dd = Dd { hi: std::f64::consts::FRAC_2_SQRT_PI, lo: 1.533545961316588e-17 };
    pub const LN_2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 };
    pub const FRAC_1_SQRT_2: Dd = Dd { hi: std::f64::consts::FRAC_1_SQRT_2, lo: -4.833646656726457e-17 };

    #[inline]
    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn mul_f64_exact(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn sqr(self) -> Dd {
        self * self
    }

    /// Multiplication by an exact power of two.
    #[inline]
    fn ldexp(self, k: i32) -> Dd {
        // Two steps keep 2^k representable for |k| up to ~2000.
        let half = k / 2;
        let a = 2f64.powi(half);
        let b = 2f64.powi(k - half);
        Dd { hi: self.hi * a * b, lo: self.lo * a * b }
    }

    /// `e^self`, accurate to a few units in the last double-double place.
    pub fn exp(self) -> Dd {
        if self.hi > 709.8 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ONE;
        }
        let k = (self.hi / Dd::LN_2.hi).round();
        let r = (self - Dd::LN_2 * k).ldexp(-10);
        // expm1(r) by Taylor series; |r| < 3.5e-4 so nine terms reach 1e-33.
        let mut term = r;
        let mut p = r;
        for n in 2..=10 {
            term = term * r / n as f64;
            p = p + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // (1+p)^2 - 1 = p(2+p), applied ten times undoes the 2^-10 reduction.
        for _ in 0..10 {
            p = p * (p + 2.0);
        }
        (p + 1.0).ldexp(k as i32)
    }

    /// Scaled complementary error function `e^{z^2} erfc(z)` for `z >= 0`.
    pub fn erfcx(z: Dd) -> Dd {
        debug_assert!(z.hi >= 0.0, "erfcx domain is z >= 0, got {}", z.hi);
        if z.hi < 3.0 {
            // erf(z) = (2/sqrt(pi)) e^{-z^2} sum_n 2^n z^{2n+1} / (2n+1)!!,
            // so erfcx(z) = e^{z^2} - (2/sqrt(pi)) * sum. All terms positive.
            let z2 = z.sqr();
            let two_z2 = z2 * 2.0;
            let mut term = z;
            let mut sum = z;
            let mut n = 1.0;
            loop {
                term = term * two_z2 / (2.0 * n + 1.0);
                sum = sum + term;
                if term.hi.abs() <= 1e-34 * sum.hi.abs() {
                    break;
                }
                n += 1.0;
            }
            z2.exp() - Dd::FRAC_2_SQRT_PI * sum
        } else {
            // Laplace continued fraction, evaluated backwards.
            let depth = if z.hi < 6.0 {
                100
            } else if z.hi < 10.0 {
                50
            } else {
                25
            };
            let mut t = z;
            for k in (1..=depth).rev() {
                t = z + Dd::from_f64(k as f64 * 0.5) / t;
            }
            Dd::FRAC_1_SQRT_PI / t
        }
    }

    /// Complementary error function for any real argument.
    pub fn erfc(z: Dd) -> Dd {
        if z.hi >= 0.0 {
            Dd::erfcx(z) * (-z.sqr()).exp()
        } else {
            Dd::from_f64(2.0) - Dd::erfcx(-z) * (-z.sqr()).exp()
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::from_f64(x)
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        if !s1.is_finite() {
            return Dd::from_f64(s1);
        }
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        if !p.is_finite() {
            return Dd::from_f64(p);
        }
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Dd::from_f64(q1);
        }
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + q3
    }
}

macro_rules! f64_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<f64> for Dd {
            type Output = Dd;
            #[inline]
            fn $m(self, b: f64) -> Dd {
                $tr::$m(self, Dd::from_f64(b))
            }
        }
        impl $tr<Dd> for f64 {
            type Output = Dd;
            #[inline]
            fn $m(self, b: Dd) -> Dd {
                $tr::$m(Dd::from_f64(self), b)
            }
        }
    )*};
}

f64_ops!(Add add, Sub sub, Mul mul, Div div);
