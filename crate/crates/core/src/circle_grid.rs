//! Circle-grid geometry: compass angles, polar/world transforms, tree
//! expansion and ship-domain radius.
//!
//! World frame: `x` east, `y` north. Bearings are compass degrees,
//! clockwise from north.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::cell::CellSet;
use crate::error::{Error, Result};
use crate::ship::ShipParams;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (other - self).norm()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Rotate a ship-frame offset (forward = +y) into the world frame of a
    /// vessel steering `heading`.
    pub fn rotated(self, heading: CompassAngle) -> Point {
        let (s, c) = heading.radians().sin_cos();
        Point::new(self.x * c + self.y * s, -self.x * s + self.y * c)
    }

    /// Unit vector pointing along a compass bearing.
    pub fn unit(bearing: CompassAngle) -> Point {
        let (s, c) = bearing.radians().sin_cos();
        Point::new(s, c)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// Normalize degrees into `[0, 360)`.
pub fn normalize_deg(deg: f64) -> f64 {
    let d = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if d >= 360.0 {
        0.0
    } else {
        d
    }
}

/// Wrap degrees into `(-180, 180]`.
pub fn wrap_signed_deg(deg: f64) -> f64 {
    let d = normalize_deg(deg);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

/// A compass bearing in `[0, 360)` degrees, clockwise from north.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(into = "f64", from = "f64")]
pub struct CompassAngle(f64);

impl CompassAngle {
    pub const NORTH: CompassAngle = CompassAngle(0.0);

    pub fn new(degrees: f64) -> Self {
        Self(normalize_deg(degrees))
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    /// Radians of the signed representation, so that mirrored headings
    /// produce exactly negated sines.
    pub fn radians(self) -> f64 {
        wrap_signed_deg(self.0).to_radians()
    }

    /// Signed difference `self - other` in `(-180, 180]`.
    pub fn diff(self, other: CompassAngle) -> f64 {
        wrap_signed_deg(self.0 - other.0)
    }

    pub fn offset(self, delta_deg: f64) -> Self {
        Self::new(self.0 + delta_deg)
    }
}

impl From<CompassAngle> for f64 {
    fn from(a: CompassAngle) -> f64 {
        a.0
    }
}

impl From<f64> for CompassAngle {
    fn from(d: f64) -> Self {
        CompassAngle::new(d)
    }
}

pub fn polar_to_world(center: Point, radius_m: f64, alpha: CompassAngle) -> Point {
    let (s, c) = alpha.radians().sin_cos();
    Point::new(center.x + radius_m * s, center.y + radius_m * c)
}

/// Four-quadrant compass bearing from `from` to `to`.
pub fn compass_bearing(from: Point, to: Point) -> Result<CompassAngle> {
    let d = to - from;
    if d.x == 0.0 && d.y == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(CompassAngle::new(d.x.atan2(d.y).to_degrees()))
}

pub fn ship_domain_radius(params: &ShipParams, factor: f64) -> Result<f64> {
    if !(4.0..=8.0).contains(&factor) {
        return Err(Error::FactorOutOfRange(factor));
    }
    Ok(factor * params.length_m)
}

/// Node of the circle-grid tree. Children of a node lie on the circle of
/// cell radius around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridNode {
    pub position: Point,
    pub heading: CompassAngle,
    pub parent: Option<usize>,
    /// Index into the cell set used to reach this node.
    pub cell_used: Option<usize>,
    pub depth: usize,
}

impl GridNode {
    pub fn root(position: Point, heading: CompassAngle) -> Self {
        Self {
            position,
            heading,
            parent: None,
            cell_used: None,
            depth: 0,
        }
    }

    /// Child reached from this node (stored at `self_id`) by a maneuver
    /// ending at `position` with `heading`.
    pub fn child(
        &self,
        self_id: usize,
        position: Point,
        heading: CompassAngle,
        cell_used: Option<usize>,
    ) -> Self {
        Self {
            position,
            heading,
            parent: Some(self_id),
            cell_used,
            depth: self.depth + 1,
        }
    }
}

/// One child per cell; `node_id` is the parent's index in its tree.
pub fn expand_node(node: &GridNode, node_id: usize, cells: &CellSet) -> Vec<GridNode> {
    cells
        .cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            let position = node.position + cell.end_offset.rotated(node.heading);
            let heading = node.heading.offset(cell.heading_change_deg);
            node.child(node_id, position, heading, Some(i))
        })
        .collect()
}

/// Arena-backed circle-grid tree.
#[derive(Debug, Clone, Default)]
pub struct GridTree {
    pub nodes: Vec<GridNode>,
}

impl GridTree {
    pub fn new(root: GridNode) -> Self {
        Self { nodes: vec![root] }
    }

    /// Expand `id` and return the ids of the new children.
    pub fn expand(&mut self, id: usize, cells: &CellSet) -> Vec<usize> {
        let children = expand_node(&self.nodes[id], id, cells);
        let start = self.nodes.len();
        self.nodes.extend(children);
        (start..self.nodes.len()).collect()
    }

    /// Node ids from the root down to `id`.
    pub fn path_to(&self, id: usize) -> Vec<usize> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }
}
