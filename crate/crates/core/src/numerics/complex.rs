use num_complex::Complex64;

/// A complex number in double precision.
pub type ComplexScalar = Complex64;

#[inline]
pub fn complex_add(a: ComplexScalar, b: ComplexScalar) -> ComplexScalar {
    a + b
}

#[inline]
pub fn complex_mul(a: ComplexScalar, b: ComplexScalar) -> ComplexScalar {
    a * b
}

/// Squared modulus `re² + im²`.
#[inline]
pub fn complex_abs2(a: ComplexScalar) -> f64 {
    a.re * a.re + a.im * a.im
}

#[inline]
pub fn is_finite(a: ComplexScalar) -> bool {
    a.re.is_finite() && a.im.is_finite()
}
