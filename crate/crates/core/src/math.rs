// Thin wrappers so the rest of the crate reads like std float code.

#[inline]
pub(crate) fn sqrt(v: f64) -> f64 {
    libm::sqrt(v)
}

#[inline]
pub(crate) fn abs(v: f64) -> f64 {
    libm::fabs(v)
}

#[inline]
pub(crate) fn round(v: f64) -> f64 {
    libm::round(v)
}

#[inline]
pub(crate) fn floor(v: f64) -> f64 {
    libm::floor(v)
}

#[inline]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub(crate) fn cos(v: f64) -> f64 {
    libm::cos(v)
}

#[inline]
pub(crate) fn sin(v: f64) -> f64 {
    libm::sin(v)
}

/// Direction of `(dx, dy)` in degrees, normalized to `[0, 360)`.
///
/// Image coordinates: x grows to the right, y grows downwards.
pub(crate) fn angle_deg(dx: f64, dy: f64) -> f64 {
    let a = atan2(dy, dx).to_degrees();
    if a < 0.0 {
        a + 360.0
    } else {
        a
    }
}

/// Smallest absolute difference between two angles in degrees.
pub(crate) fn angle_diff_deg(a: f64, b: f64) -> f64 {
    let d = abs(a - b) % 360.0;
    if d > 180.0 {
        360.0 - d
    } else {
        d
    }
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
