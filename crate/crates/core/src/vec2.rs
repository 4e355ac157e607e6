//! Minimal planar vector helpers. Points and vectors are plain `[f64; 2]`.

pub type Point = [f64; 2];
pub type Vec2 = [f64; 2];

#[inline]
pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn scale(a: Vec2, t: f64) -> Vec2 {
    [a[0] * t, a[1] * t]
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn neg(a: Vec2) -> Vec2 {
    [-a[0], -a[1]]
}

/// Left normal of a direction (rotation by +90 degrees).
#[inline]
pub fn left_normal(t: Vec2) -> Vec2 {
    [-t[1], t[0]]
}

#[inline]
pub fn lerp(a: Point, b: Point, t: f64) -> Point {
    [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t]
}

#[inline]
pub fn unit(a: Vec2) -> Vec2 {
    let n = norm(a);
    if n == 0.0 {
        [0.0, 0.0]
    } else {
        [a[0] / n, a[1] / n]
    }
}

/// Angle of `a` in `[0, 2pi)`.
#[inline]
pub fn angle(a: Vec2) -> f64 {
    let t = a[1].atan2(a[0]);
    if t < 0.0 {
        t + std::f64::consts::TAU
    } else {
        t
    }
}
