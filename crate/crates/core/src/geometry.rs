//! Normalized screen geometry.
//!
//! Every box and point is stored as a fraction of its containing raster
//! (origin top-left). Pixel conversion only happens at crop/render time.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid box ({x0}, {y0}, {x1}, {y1}): need 0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1")]
    InvalidBox { x0: f64, y0: f64, x1: f64, y1: f64 },
    #[error("invalid point ({x}, {y}): coordinates must lie in [0, 1]")]
    InvalidPoint { x: f64, y: f64 },
}

/// Axis-aligned box in normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub struct BBox {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

#[derive(Deserialize)]
struct RawBox {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl TryFrom<RawBox> for BBox {
    type Error = GeometryError;

    fn try_from(r: RawBox) -> Result<Self, Self::Error> {
        BBox::new(r.x0, r.y0, r.x1, r.y1)
    }
}

fn in_unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

impl BBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeometryError> {
        if in_unit(x0) && in_unit(y0) && in_unit(x1) && in_unit(y1) && x0 < x1 && y0 < y1 {
            Ok(Self { x0, y0, x1, y1 })
        } else {
            Err(GeometryError::InvalidBox { x0, y0, x1, y1 })
        }
    }

    /// Clips the given corners to the unit square. `None` if nothing is left.
    pub fn clamped(x0: f64, y0: f64, x1: f64, y1: f64) -> Option<Self> {
        let c = |v: f64| v.clamp(0.0, 1.0);
        Self::new(c(x0), c(y0), c(x1), c(y1)).ok()
    }

    /// The whole raster.
    pub fn full() -> Self {
        Self { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn y0(&self) -> f64 {
        self.y0
    }
    pub fn x1(&self) -> f64 {
        self.x1
    }
    pub fn y1(&self) -> f64 {
        self.y1
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point { x: (self.x0 + self.x1) / 2.0, y: (self.y0 + self.y1) / 2.0 }
    }

    /// Closed containment test.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn contains_box(&self, other: &BBox) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = self.x1.min(other.x1) - self.x0.max(other.x0);
        let h = self.y1.min(other.y1) - self.y0.max(other.y0);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Intersection over union, in `[0, 1]`.
    pub fn iou(&self, other: &BBox) -> f64 {
        let inter = self.intersection_area(other);
        if inter == 0.0 {
            return 0.0;
        }
        let union = self.area() + other.area() - inter;
        (inter / union).clamp(0.0, 1.0)
    }

    /// Smallest box containing both.
    pub fn union_hull(&self, other: &BBox) -> BBox {
        BBox {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    /// Width over height, measured in normalized units.
    pub fn aspect_ratio(&self) -> f64 {
        self.width() / self.height()
    }

    /// Re-expresses this box relative to `frame`, clipping to it.
    ///
    /// Used when a box given in one raster has to be expressed inside a crop
    /// of that raster.
    pub fn relative_to(&self, frame: &BBox) -> Option<BBox> {
        let fx = |v: f64| (v - frame.x0) / frame.width();
        let fy = |v: f64| (v - frame.y0) / frame.height();
        BBox::clamped(fx(self.x0), fy(self.y0), fx(self.x1), fy(self.y1))
    }

    /// Pixel rectangle `(left, top, right, bottom)` with exclusive right and
    /// bottom edges. Leading edges round down, trailing edges round up so
    /// border pixels are never lost.
    pub fn to_pixels(&self, width: u32, height: u32) -> (u32, u32, u32, u32) {
        let w = width as f64;
        let h = height as f64;
        let left = (self.x0 * w).floor().max(0.0) as u32;
        let top = (self.y0 * h).floor().max(0.0) as u32;
        let right = ((self.x1 * w).ceil() as u32).min(width);
        let bottom = ((self.y1 * h).ceil() as u32).min(height);
        (left, top, right, bottom)
    }

    /// Corner-wise blend `(1 - t) * self + t * other`.
    pub fn lerp(&self, other: &BBox, t: f64) -> BBox {
        let mix = |a: f64, b: f64| a + (b - a) * t;
        BBox {
            x0: mix(self.x0, other.x0),
            y0: mix(self.y0, other.y0),
            x1: mix(self.x1, other.x1),
            y1: mix(self.y1, other.y1),
        }
    }
}

/// Free-function form of [`BBox::iou`].
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    a.iou(b)
}

pub fn union_hull(a: &BBox, b: &BBox) -> BBox {
    a.union_hull(b)
}

pub fn center(b: &BBox) -> Point {
    b.center()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Deserialize)]
struct RawPoint {
    x: f64,
    y: f64,
}

impl TryFrom<RawPoint> for Point {
    type Error = GeometryError;

    fn try_from(r: RawPoint) -> Result<Self, Self::Error> {
        Point::new(r.x, r.y)
    }
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Self, GeometryError> {
        if in_unit(x) && in_unit(y) {
            Ok(Self { x, y })
        } else {
            Err(GeometryError::InvalidPoint { x, y })
        }
    }

    pub fn is_valid(&self) -> bool {
        in_unit(self.x) && in_unit(self.y)
    }
}
