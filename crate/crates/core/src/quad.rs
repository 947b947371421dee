//! Adaptive Gauss-Kronrod (7/15) quadrature with global error control.
//!
//! Used as an independent numerical oracle for the closed-form link
//! statistics and for Gamma-Gamma normalization checks. Infinite limits are
//! mapped onto `[0, 1)` with `x = a + t/(1-t)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Nodes and weights keep their published 33-digit values.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes (1, 3, 5, 7).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Error targets for [`integrate`]. The iteration stops once the estimated
/// error is below `max(abs_tol, rel_tol * |integral|)`.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_tol: 0.0, rel_tol: 1e-12, max_intervals: 4000 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
    pub converged: bool,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * h;
    let error = ((kronrod - gauss) * h).abs();
    Segment { a, b, value, error }
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, intervals: 0, converged: true };
    }
    let mut heap = BinaryHeap::new();
    let first = gk15(f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    let mut converged = false;
    while heap.len() < tol.max_intervals {
        if error <= tol.abs_tol.max(tol.rel_tol * value.abs()) {
            converged = true;
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = gk15(f, worst.a, mid);
        let right = gk15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    QuadResult { value, error, intervals: heap.len(), converged }
}

/// Integrates `f` over `[a, b]`; either limit may be infinite.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    integrate_dyn(&f, a, b, tol)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    if a > b {
        let r = integrate_dyn(f, b, a, tol);
        return QuadResult { value: -r.value, ..r };
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adapt(&f, a, b, tol),
        (true, false) => {
            let g = |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let u = 1.0 - t;
                let v = f(a + t / u) / (u * u);
                if v.is_finite() { v } else { 0.0 }
            };
            adapt(&g, 0.0, 1.0, tol)
        }
        (false, true) => {
            let g = |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let u = 1.0 - t;
                let v = f(b - t / u) / (u * u);
                if v.is_finite() { v } else { 0.0 }
            };
            adapt(&g, 0.0, 1.0, tol)
        }
        (false, false) => {
            let l = integrate_dyn(f, f64::NEG_INFINITY, 0.0, tol);
            let r = integrate_dyn(f, 0.0, f64::INFINITY, tol);
            QuadResult {
                value: l.value + r.value,
                error: l.error + r.error,
                intervals: l.intervals + r.intervals,
                converged: l.converged && r.converged,
            }
        }
    }
}

/// Sums [`integrate`] over consecutive breakpoints, e.g. the edges of a
/// piecewise integrand.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: Tolerance) -> QuadResult {
    let mut total = QuadResult { value: 0.0, error: 0.0, intervals: 0, converged: true };
    for w in breaks.windows(2) {
        let r = integrate(&f, w[0], w[1], tol);
        total.value += r.value;
        total.error += r.error;
        total.intervals += r.intervals;
        total.converged &= r.converged;
    }
    total
}
