//! Scalar special functions in `f64`.

pub use libm::erf;

/// `ln |Gamma(x)|`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `1/sqrt(2*pi)`.
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x) = erfc(x/sqrt 2)/2`.
#[inline]
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}
