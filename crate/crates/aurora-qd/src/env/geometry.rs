//! 2D segment/ray intersection primitives for the maze simulators.

/// A 2D point.
pub type Point = (f64, f64);

/// Wall segment between two endpoints.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }
}

const EPS: f64 = 1e-12;

/// Distance along the ray `origin + t * dir` (`t >= 0`, `dir` unit length)
/// to the intersection with `seg`, or `None` if the ray misses it.
pub fn ray_segment_intersection(origin: Point, dir: (f64, f64), seg: &Segment) -> Option<f64> {
    // Solve origin + t*dir = a + u*(b - a) for t >= 0, u in [0, 1].
    let (ox, oy) = origin;
    let (dx, dy) = dir;
    let (ax, ay) = seg.a;
    let (bx, by) = seg.b;
    let ex = bx - ax;
    let ey = by - ay;
    let denom = dx * ey - dy * ex;
    if denom.abs() < EPS {
        // Parallel (collinear overlap is treated as a miss).
        return None;
    }
    let qx = ax - ox;
    let qy = ay - oy;
    let t = (qx * ey - qy * ex) / denom;
    let u = (qx * dy - qy * dx) / denom;
    if t >= 0.0 && (-EPS..=1.0 + EPS).contains(&u) {
        Some(t)
    } else {
        None
    }
}

/// First intersection parameter `t in [0, 1]` of the motion segment
/// `from -> to` with `seg`, or `None`.
pub fn segment_segment_intersection(from: Point, to: Point, seg: &Segment) -> Option<f64> {
    let dx = to.0 - from.0;
    let dy = to.1 - from.1;
    let len = (dx * dx + dy * dy).sqrt();
    if len < EPS {
        return None;
    }
    let t = ray_segment_intersection(from, (dx / len, dy / len), seg)?;
    if t <= len + EPS {
        Some((t / len).min(1.0))
    } else {
        None
    }
}
