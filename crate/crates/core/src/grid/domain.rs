use serde::{Deserialize, Serialize};

use super::GridError;
use crate::exactgeo::{Loc, Shape};
use crate::vec2::{Point, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Dim {
    One,
    #[default]
    Two,
}

/// Edge between two active cells; `dir` is the unit vector from `i` to `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorEdge {
    pub i: usize,
    pub j: usize,
    pub dir: Vec2,
    pub mid: Point,
}

/// Edge between an active cell and the outside; `normal` points into the
/// domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub cell: usize,
    pub normal: Vec2,
    pub mid: Point,
}

/// Masked uniform grid. Cell `(ix, iy)` covers
/// `[ox + ix h, ox + (ix+1) h] x [oy + iy h, oy + (iy+1) h]`.
#[derive(Debug, Clone)]
pub struct GridDomain {
    h: f64,
    origin: Point,
    nx: usize,
    ny: usize,
    dim: Dim,
    cells: Vec<[usize; 2]>,
    lookup: Vec<usize>,
    interior: Vec<InteriorEdge>,
    boundary: Vec<BoundaryEdge>,
}

const NONE: usize = usize::MAX;

impl GridDomain {
    /// `mask` is row-major with row 0 at the bottom.
    pub fn from_mask(h: f64, origin: Point, nx: usize, ny: usize, mask: &[bool], dim: Dim) -> Result<Self, GridError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(GridError::Invalid(format!("cell width must be positive, got {h}")));
        }
        if mask.len() != nx * ny {
            return Err(GridError::ShapeMismatch {
                expected: nx * ny,
                got: mask.len(),
            });
        }
        if dim == Dim::One && ny != 1 {
            return Err(GridError::Invalid("one-dimensional grids have a single row".into()));
        }
        let mut lookup = vec![NONE; nx * ny];
        let mut cells = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                if mask[iy * nx + ix] {
                    lookup[iy * nx + ix] = cells.len();
                    cells.push([ix, iy]);
                }
            }
        }
        if cells.is_empty() {
            return Err(GridError::EmptyMask);
        }
        let mut dom = GridDomain {
            h,
            origin,
            nx,
            ny,
            dim,
            cells,
            lookup,
            interior: vec![],
            boundary: vec![],
        };
        dom.build_edges();
        dom.check_connected()?;
        Ok(dom)
    }

    /// Rows listed top to bottom; `#`, `1`, `x` mark active cells, `.`,
    /// `0`, space inactive.
    pub fn from_bitmap(h: f64, origin: Point, rows: &[String]) -> Result<Self, GridError> {
        let ny = rows.len();
        let nx = rows.first().map_or(0, |r| r.chars().count());
        let mut mask = vec![false; nx * ny];
        for (r, row) in rows.iter().enumerate() {
            if row.chars().count() != nx {
                return Err(GridError::Invalid(format!("bitmap row {r} has length {} != {nx}", row.chars().count())));
            }
            let iy = ny - 1 - r;
            for (ix, ch) in row.chars().enumerate() {
                mask[iy * nx + ix] = match ch {
                    '#' | '1' | 'x' => true,
                    '.' | '0' | ' ' => false,
                    c => return Err(GridError::Invalid(format!("bad bitmap character `{c}`"))),
                };
            }
        }
        Self::from_mask(h, origin, nx, ny, &mask, Dim::Two)
    }

    /// Cells of `bbox = [x0, y0, x1, y1]` whose centers lie inside `shape`.
    pub fn rasterize(shape: &Shape, h: f64, bbox: [f64; 4]) -> Result<Self, GridError> {
        let nx = ((bbox[2] - bbox[0]) / h).round() as usize;
        let ny = ((bbox[3] - bbox[1]) / h).round() as usize;
        let mut mask = vec![false; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let c = [bbox[0] + (ix as f64 + 0.5) * h, bbox[1] + (iy as f64 + 0.5) * h];
                mask[iy * nx + ix] = shape.locate(c) == Loc::Inside;
            }
        }
        Self::from_mask(h, [bbox[0], bbox[1]], nx, ny, &mask, Dim::Two)
    }

    pub fn rect(nx: usize, ny: usize, h: f64, origin: Point) -> Self {
        Self::from_mask(h, origin, nx, ny, &vec![true; nx * ny], Dim::Two).expect("full rectangle is valid")
    }

    pub fn line(n: usize, h: f64, x0: f64) -> Self {
        Self::from_mask(h, [x0, 0.0], n, 1, &vec![true; n], Dim::One).expect("full line is valid")
    }

    fn build_edges(&mut self) {
        let h = self.h;
        let two = self.dim == Dim::Two;
        for (k, &[ix, iy]) in self.cells.iter().enumerate() {
            let c = self.center(k);
            if let Some(j) = self.active(ix as isize + 1, iy as isize) {
                self.interior.push(InteriorEdge {
                    i: k,
                    j,
                    dir: [1.0, 0.0],
                    mid: [c[0] + 0.5 * h, c[1]],
                });
            }
            if two {
                if let Some(j) = self.active(ix as isize, iy as isize + 1) {
                    self.interior.push(InteriorEdge {
                        i: k,
                        j,
                        dir: [0.0, 1.0],
                        mid: [c[0], c[1] + 0.5 * h],
                    });
                }
            }
        }
        for (k, &[ix, iy]) in self.cells.iter().enumerate() {
            let c = self.center(k);
            let (x, y) = (ix as isize, iy as isize);
            let mut sides = vec![((x - 1, y), [1.0, 0.0]), ((x + 1, y), [-1.0, 0.0])];
            if two {
                sides.push(((x, y - 1), [0.0, 1.0]));
                sides.push(((x, y + 1), [0.0, -1.0]));
            }
            for ((a, b), n) in sides {
                if self.active(a, b).is_none() {
                    self.boundary.push(BoundaryEdge {
                        cell: k,
                        normal: n,
                        mid: [c[0] - 0.5 * h * n[0], c[1] - 0.5 * h * n[1]],
                    });
                }
            }
        }
    }

    fn check_connected(&self) -> Result<(), GridError> {
        let n = self.cells.len();
        let mut adj = vec![vec![]; n];
        for e in &self.interior {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(k) = stack.pop() {
            for &m in &adj[k] {
                if !seen[m] {
                    seen[m] = true;
                    count += 1;
                    stack.push(m);
                }
            }
        }
        if count == n {
            Ok(())
        } else {
            Err(GridError::Disconnected { reached: count, cells: n })
        }
    }

    fn active(&self, ix: isize, iy: isize) -> Option<usize> {
        if ix < 0 || iy < 0 || ix as usize >= self.nx || iy as usize >= self.ny {
            return None;
        }
        match self.lookup[iy as usize * self.nx + ix as usize] {
            NONE => None,
            k => Some(k),
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn dim(&self) -> Dim {
        self.dim
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn origin(&self) -> Point {
        self.origin
    }
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }
    pub fn cells(&self) -> &[[usize; 2]] {
        &self.cells
    }
    pub fn interior_edges(&self) -> &[InteriorEdge] {
        &self.interior
    }
    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// Active-cell index of grid position `(ix, iy)`.
    pub fn cell_at(&self, ix: usize, iy: usize) -> Option<usize> {
        self.active(ix as isize, iy as isize)
    }

    pub fn center(&self, k: usize) -> Point {
        let [ix, iy] = self.cells[k];
        let y = if self.dim == Dim::Two {
            self.origin[1] + (iy as f64 + 0.5) * self.h
        } else {
            0.0
        };
        [self.origin[0] + (ix as f64 + 0.5) * self.h, y]
    }

    /// Edge weight `h^(N-1)`.
    pub fn edge_weight(&self) -> f64 {
        match self.dim {
            Dim::One => 1.0,
            Dim::Two => self.h,
        }
    }

    /// Cell volume `h^N`.
    pub fn cell_volume(&self) -> f64 {
        match self.dim {
            Dim::One => self.h,
            Dim::Two => self.h * self.h,
        }
    }

    /// Number of incident edges (interior and boundary) per cell.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_cells()];
        for e in &self.interior {
            d[e.i] += 1;
            d[e.j] += 1;
        }
        for b in &self.boundary {
            d[b.cell] += 1;
        }
        d
    }

    /// Interior edge index joining cells `a` and `b`, if adjacent.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.interior
            .iter()
            .position(|e| (e.i == a && e.j == b) || (e.i == b && e.j == a))
    }

    /// Radius of the smallest disc containing every active cell.
    pub fn circumradius(&self) -> f64 {
        let h = self.h;
        let mut pts = Vec::with_capacity(4 * self.n_cells());
        let mut on_rim = vec![false; self.n_cells()];
        for b in &self.boundary {
            on_rim[b.cell] = true;
        }
        for k in (0..self.n_cells()).filter(|&k| on_rim[k]) {
            let c = self.center(k);
            if self.dim == Dim::One {
                pts.push([c[0] - 0.5 * h, 0.0]);
                pts.push([c[0] + 0.5 * h, 0.0]);
            } else {
                for (a, b) in [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)] {
                    pts.push([c[0] + a * h, c[1] + b * h]);
                }
            }
        }
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        pts.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(7));
        min_enclosing_circle(&pts).1
    }
}

fn circle2(a: Point, b: Point) -> (Point, f64) {
    let c = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    (c, crate::vec2::dist(a, c))
}

fn circle3(a: Point, b: Point, c: Point) -> Option<(Point, f64)> {
    let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
    if d.abs() < 1e-300 {
        return None;
    }
    let a2 = a[0] * a[0] + a[1] * a[1];
    let b2 = b[0] * b[0] + b[1] * b[1];
    let c2 = c[0] * c[0] + c[1] * c[1];
    let ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d;
    let uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d;
    let u = [ux, uy];
    Some((u, crate::vec2::dist(u, a)))
}

/// Incremental minimum enclosing circle; expected linear time when the
/// points arrive in random order.
pub fn min_enclosing_circle(pts: &[Point]) -> (Point, f64) {
    let inside = |c: &(Point, f64), p: Point| crate::vec2::dist(c.0, p) <= c.1 * (1.0 + 1e-12) + 1e-15;
    let mut c = (pts[0], 0.0);
    for i in 1..pts.len() {
        if inside(&c, pts[i]) {
            continue;
        }
        c = (pts[i], 0.0);
        for j in 0..i {
            if inside(&c, pts[j]) {
                continue;
            }
            c = circle2(pts[i], pts[j]);
            for k in 0..j {
                if inside(&c, pts[k]) {
                    continue;
                }
                if let Some(cc) = circle3(pts[i], pts[j], pts[k]) {
                    c = cc;
                }
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_counts() {
        let d = GridDomain::rect(2, 1, 1.0, [0.0, 0.0]);
        assert_eq!(d.interior_edges().len(), 1);
        assert_eq!(d.boundary_edges().len(), 6);
        let l = GridDomain::line(3, 1.0, 0.0);
        assert_eq!(l.interior_edges().len(), 2);
        assert_eq!(l.boundary_edges().len(), 2);
    }

    #[test]
    fn bitmap_top_row_first() {
        let d = GridDomain::from_bitmap(1.0, [0.0, 0.0], &["#.".into(), "##".into()]).unwrap();
        assert_eq!(d.n_cells(), 3);
        assert!(d.cell_at(0, 1).is_some() && d.cell_at(1, 1).is_none());
        assert!(matches!(
            GridDomain::from_bitmap(1.0, [0.0, 0.0], &["#.".into(), ".#".into()]),
            Err(GridError::Disconnected { .. })
        ));
        assert!(matches!(
            GridDomain::from_bitmap(1.0, [0.0, 0.0], &["..".into()]),
            Err(GridError::EmptyMask)
        ));
    }

    #[test]
    fn circumradius_of_square() {
        let d = GridDomain::rect(4, 4, 0.5, [0.0, 0.0]);
        assert!((d.circumradius() - 2f64.sqrt()).abs() < 1e-12);
    }
}
