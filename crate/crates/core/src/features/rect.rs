use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Contour;
use crate::scalar::Scalar;
use crate::segmentation::BinaryMask;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }

    fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    fn norm(self) -> T {
        self.dot(self).sqrt()
    }
}

/// Minimum-area enclosing rectangle.
///
/// `tilt` is the angle of the long side measured counter-clockwise as seen
/// on screen (y axis pointing down), folded into `(-pi/2, pi/2]`; the long
/// side runs along `(cos tilt, -sin tilt)` in pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinAreaRect<T> {
    pub center: Point2<T>,
    pub side_long: T,
    pub side_short: T,
    pub tilt: T,
}

impl<T: Scalar> MinAreaRect<T> {
    pub fn area(&self) -> T {
        self.side_long * self.side_short
    }

    /// Corners in order around the rectangle.
    pub fn corners(&self) -> [Point2<T>; 4] {
        let (s, c) = self.tilt.sin_cos();
        let half = T::lit(0.5);
        let u = Point2::new(c * self.side_long * half, -s * self.side_long * half);
        let v = Point2::new(s * self.side_short * half, c * self.side_short * half);
        let p = self.center;
        [
            Point2::new(p.x - u.x - v.x, p.y - u.y - v.y),
            Point2::new(p.x + u.x - v.x, p.y + u.y - v.y),
            Point2::new(p.x + u.x + v.x, p.y + u.y + v.y),
            Point2::new(p.x - u.x + v.x, p.y - u.y + v.y),
        ]
    }

    /// Whether `p` lies inside, allowing `tol` of slack on each side.
    pub fn contains(&self, p: Point2<T>, tol: T) -> bool {
        let (s, c) = self.tilt.sin_cos();
        let d = p.sub(self.center);
        let along = d.x * c - d.y * s;
        let across = d.x * s + d.y * c;
        let half = T::lit(0.5);
        along.abs() <= self.side_long * half + tol && across.abs() <= self.side_short * half + tol
    }
}

/// Andrew's monotone chain; returns the hull counter-clockwise in a y-up
/// frame without collinear points.
pub fn convex_hull<T: Scalar>(points: &[Point2<T>]) -> Vec<Point2<T>> {
    let mut pts: Vec<Point2<T>> = points.to_vec();
    pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2<T>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let base = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2<T>>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= base + 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                if b.sub(a).cross(p.sub(a)) <= T::zero() {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn fold_tilt(theta: f64) -> f64 {
    let mut t = theta;
    while t <= -FRAC_PI_2 {
        t += PI;
    }
    while t > FRAC_PI_2 {
        t -= PI;
    }
    t
}

/// One rectangle per hull edge (rotating calipers), in hull order.
fn caliper_rects<T: Scalar>(contour: &Contour) -> Result<Vec<MinAreaRect<T>>> {
    let pts: Vec<Point2<T>> =
        contour.points.iter().map(|&(x, y)| Point2::new(T::lit(x as f64), T::lit(y as f64))).collect();
    let hull = convex_hull(&pts);
    if hull.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "contour of {} points has a degenerate hull",
            contour.len()
        )));
    }
    let n = hull.len();
    let at = |i: usize| hull[i % n];
    let eps = T::lit(1e-9);
    let half = T::lit(0.5);

    let mut rects = Vec::with_capacity(n);
    let (mut right, mut top, mut left) = (1usize, 1usize, 0usize);
    for i in 0..n {
        let origin = at(i);
        let edge = at(i + 1).sub(origin);
        let len = edge.norm();
        let e = Point2::new(edge.x / len, edge.y / len);
        let nrm = Point2::new(-e.y, e.x);

        if i == 0 {
            right = 1;
        }
        while at(right + 1).sub(origin).dot(e) > at(right).sub(origin).dot(e) + eps {
            right += 1;
        }
        if i == 0 {
            top = right;
        }
        while at(top + 1).sub(origin).dot(nrm) > at(top).sub(origin).dot(nrm) + eps {
            top += 1;
        }
        if i == 0 {
            left = top;
        }
        while at(left + 1).sub(origin).dot(e) < at(left).sub(origin).dot(e) - eps {
            left += 1;
        }

        let max_e = at(right).sub(origin).dot(e);
        let min_e = at(left).sub(origin).dot(e);
        let height = at(top).sub(origin).dot(nrm);
        let width = max_e - min_e;
        let mid_e = (min_e + max_e) * half;
        let center = Point2::new(
            origin.x + e.x * mid_e + nrm.x * height * half,
            origin.y + e.y * mid_e + nrm.y * height * half,
        );
        let (long_dir, side_long, side_short) = if width >= height { (e, width, height) } else { (nrm, height, width) };
        if side_short <= eps {
            return Err(Error::DegenerateGeometry("contour is collinear".into()));
        }
        let tilt = fold_tilt((-long_dir.y.to_f64_lossy()).atan2(long_dir.x.to_f64_lossy()));
        rects.push(MinAreaRect { center, side_long, side_short, tilt: T::lit(tilt) });
    }
    Ok(rects)
}

/// Rotating calipers over the convex hull of the contour pixel centres.
pub fn min_area_rect<T: Scalar>(contour: &Contour) -> Result<MinAreaRect<T>> {
    let rects = caliper_rects::<T>(contour)?;
    let eps = T::lit(1e-9);
    Ok(rects.into_iter().reduce(|best, r| if r.area() < best.area() - eps { r } else { best }).expect("hull has edges"))
}

/// Long-axis tilt of the second moments of `mask` (same convention as
/// [`MinAreaRect::tilt`]), or `None` when the moments are nearly isotropic.
pub fn principal_tilt(mask: &BinaryMask) -> Option<f64> {
    let (cx, cy) = mask.centroid()?;
    let (mut m20, mut m02, mut m11) = (0.0, 0.0, 0.0);
    for (x, y) in mask.iter_true() {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        m20 += dx * dx;
        m02 += dy * dy;
        m11 += dx * dy;
    }
    let spread = (m20 - m02).hypot(2.0 * m11);
    if spread <= ISOTROPY_TOL * (m20 + m02) {
        return None;
    }
    Some(fold_tilt(-0.5 * (2.0 * m11).atan2(m20 - m02)))
}

const ISOTROPY_TOL: f64 = 0.01;

/// Angle the lesion is rotated by before asymmetry is measured: the
/// principal axis of the mask, or the rectangle's tilt when the moments are
/// nearly isotropic. A symmetry axis is always a principal axis, while the
/// exact minimum rectangle of a rasterized smooth outline wanders by several
/// degrees between near-tied candidates.
pub fn alignment_tilt<T: Scalar>(rect: &MinAreaRect<T>, mask: &BinaryMask) -> T {
    principal_tilt(mask).map_or(rect.tilt, T::lit)
}
