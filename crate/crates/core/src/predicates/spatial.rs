//! Location predicates over Morton-coded quadtree cells.
//!
//! Coordinates are `w`-bit fixed-point integers. The Morton code of a point
//! interleaves latitude and longitude bits MSB-first, latitude first, so any
//! even-length prefix of the code names a quadtree cell. A criterion is a list
//! of `(depth, prefix)` slots; depth 0 marks an empty slot.

use crate::error::{Error, Result};
use crate::obdd::{build_layered, InputWord, Qrobdd, FALSE, TRUE};

pub const MAX_COORD_BITS: usize = 32;
pub const DEPTH_BITS: usize = 8;

/// One criterion slot: the first `depth` bits of `prefix` (a `2w`-bit value,
/// trailing bits zero) must equal the seller's Morton code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub depth: u8,
    pub prefix: u64,
}

fn check_coord_bits(w: usize) -> Result<()> {
    if w > MAX_COORD_BITS {
        return Err(Error::InvalidPredicate(format!(
            "coordinate width {w} exceeds {MAX_COORD_BITS}"
        )));
    }
    Ok(())
}

/// Interleaves the low `w` bits of `lat` and `lon` into a `2w`-bit code.
pub fn morton(lat: u64, lon: u64, w: usize) -> u64 {
    let mut m = 0u64;
    for j in (0..w).rev() {
        m = (m << 1) | ((lat >> j) & 1);
        m = (m << 1) | ((lon >> j) & 1);
    }
    m
}

/// Bits per criterion slot for `w`-bit coordinates.
pub fn slot_bits(w: usize) -> usize {
    DEPTH_BITS + 2 * w
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum CellState {
    Matched,
    /// Reading a slot's depth field; value of the bits read so far.
    Depth(u16),
    /// Reading a prefix that must agree with the seller for this many bits.
    Compare(u8),
    /// Current slot cannot match.
    Skip,
}

/// Seller at `(lat, lon)`; `X` is `slots` cells. True iff some slot has
/// `1 <= depth <= 2w` and its prefix agrees with the seller's Morton code on
/// the first `depth` bits.
pub fn compile_point_in_cells(lat: u64, lon: u64, slots: usize, w: usize) -> Result<Qrobdd> {
    check_coord_bits(w)?;
    super::numeric::check_width(lat, w)?;
    super::numeric::check_width(lon, w)?;
    let code_bits = 2 * w;
    let m = morton(lat, lon, w);
    let per_slot = slot_bits(w);
    let code_bit = |t: usize| (m >> (code_bits - 1 - t)) & 1 == 1;

    let q = build_layered(
        slots * per_slot,
        CellState::Depth(0),
        |i, &s, bit| {
            let pos = i % per_slot;
            let next = match s {
                CellState::Matched => return CellState::Matched,
                CellState::Skip => CellState::Skip,
                CellState::Depth(v) => {
                    let v = (v << 1) | bit as u16;
                    let read = pos + 1;
                    // Smallest depth still reachable with this prefix.
                    if (v as usize) << (DEPTH_BITS - read) > code_bits {
                        CellState::Skip
                    } else if read == DEPTH_BITS {
                        if v == 0 {
                            CellState::Skip
                        } else {
                            CellState::Compare(v as u8)
                        }
                    } else {
                        CellState::Depth(v)
                    }
                }
                CellState::Compare(d) => {
                    let t = pos - DEPTH_BITS;
                    if t < d as usize && bit != code_bit(t) {
                        CellState::Skip
                    } else {
                        CellState::Compare(d)
                    }
                }
            };
            // A compare that has consumed its `depth` bits has matched.
            let next = match next {
                CellState::Compare(d) if pos + 1 >= DEPTH_BITS + d as usize => CellState::Matched,
                other => other,
            };
            if pos + 1 == per_slot && next != CellState::Matched {
                CellState::Depth(0)
            } else {
                next
            }
        },
        |&s| if s == CellState::Matched { TRUE } else { FALSE }.to_vec(),
    )?;
    Ok(q.reduce())
}

/// Packs cells into a criterion of exactly `slots` slots, padding with empty
/// slots.
pub fn cells_criterion(cells: &[Cell], slots: usize, w: usize) -> Result<InputWord> {
    check_coord_bits(w)?;
    if cells.len() > slots {
        return Err(Error::InvalidPredicate(format!(
            "{} cells do not fit in {slots} slots",
            cells.len()
        )));
    }
    let mut x = InputWord::empty();
    for c in cells
        .iter()
        .copied()
        .chain(std::iter::repeat(Cell {
            depth: 0,
            prefix: 0,
        }))
        .take(slots)
    {
        x.push_uint(c.depth as u64, DEPTH_BITS)?;
        x.push_uint(c.prefix, 2 * w)?;
    }
    Ok(x)
}

/// A quadtree approximation of a polygon.
#[derive(Clone, Debug, PartialEq)]
pub struct CellCover {
    /// Sorted by depth, then prefix.
    pub cells: Vec<Cell>,
    /// Area of the emitted cells over the polygon's area. Values well below 1
    /// mean the polygon is poorly represented (thin slivers, tight budgets).
    pub coverage_ratio: f64,
}

/// Convex polygon in doubled integer coordinates, counterclockwise.
struct ConvexPolygon {
    pts: Vec<(i128, i128)>,
}

impl ConvexPolygon {
    fn new(vertices: &[(u64, u64)], w: usize) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::TooFewVertices(vertices.len()));
        }
        let limit = 1u128 << w;
        if vertices
            .iter()
            .any(|&(a, b)| a as u128 > limit || b as u128 > limit)
        {
            return Err(Error::InvalidPredicate(
                "vertex outside the coordinate square".into(),
            ));
        }
        let mut pts: Vec<(i128, i128)> = vertices
            .iter()
            .map(|&(a, b)| (2 * a as i128, 2 * b as i128))
            .collect();
        pts.dedup();
        if pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        if pts.len() < 3 {
            return Err(Error::TooFewVertices(pts.len()));
        }
        let k = pts.len();
        let turns: Vec<i128> = (0..k)
            .map(|i| {
                let (a, b, c) = (pts[i], pts[(i + 1) % k], pts[(i + 2) % k]);
                cross(sub(b, a), sub(c, b))
            })
            .collect();
        let pos = turns.iter().any(|&t| t > 0);
        let neg = turns.iter().any(|&t| t < 0);
        if pos && neg {
            return Err(Error::NonConvex);
        }
        if neg {
            pts.reverse();
        }
        // Same-sign turns also admit self-intersecting stars; a convex
        // polygon's edge directions wind exactly once.
        let winding: f64 = (0..k)
            .map(|i| {
                let (a, b, c) = (pts[i], pts[(i + 1) % k], pts[(i + 2) % k]);
                let (u, v) = (sub(b, a), sub(c, b));
                (cross(u, v) as f64).atan2(dot(u, v) as f64)
            })
            .sum();
        if (winding - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(Error::NonConvex);
        }
        Ok(Self { pts })
    }

    fn edges(&self) -> impl Iterator<Item = ((i128, i128), (i128, i128))> + '_ {
        let k = self.pts.len();
        (0..k).map(move |i| (self.pts[i], self.pts[(i + 1) % k]))
    }

    fn contains(&self, p: (i128, i128)) -> bool {
        self.edges().all(|(a, b)| cross(sub(b, a), sub(p, a)) >= 0)
    }

    /// Doubled area, i.e. four times the area in original units times two.
    fn area_doubled_coords(&self) -> i128 {
        self.edges().map(|(a, b)| cross(a, b)).sum::<i128>()
    }

    fn bbox(&self) -> ((i128, i128), (i128, i128)) {
        let xs = self.pts.iter().map(|p| p.0);
        let ys = self.pts.iter().map(|p| p.1);
        (
            (xs.clone().min().unwrap(), ys.clone().min().unwrap()),
            (xs.max().unwrap(), ys.max().unwrap()),
        )
    }

    /// Separating-axis test against a closed axis-aligned square.
    fn intersects(&self, corners: &[(i128, i128); 4]) -> bool {
        let ((x0, y0), (x1, y1)) = self.bbox();
        let (cx0, cy0) = corners[0];
        let (cx1, cy1) = corners[3];
        if cx1 < x0 || cx0 > x1 || cy1 < y0 || cy0 > y1 {
            return false;
        }
        self.edges()
            .all(|(a, b)| corners.iter().any(|&c| cross(sub(b, a), sub(c, a)) >= 0))
    }
}

fn sub(a: (i128, i128), b: (i128, i128)) -> (i128, i128) {
    (a.0 - b.0, a.1 - b.1)
}

fn cross(a: (i128, i128), b: (i128, i128)) -> i128 {
    a.0 * b.1 - a.1 * b.0
}

fn dot(a: (i128, i128), b: (i128, i128)) -> i128 {
    a.0 * b.0 + a.1 * b.1
}

/// Covers a convex polygon (vertices as `(lat, lon)`, coordinates in
/// `[0, 2^w]`) with at most `max_cells` quadtree cells.
///
/// A cell is emitted when it lies entirely inside the polygon, or when it is
/// at maximum depth and its center is inside. When the budget is exceeded the
/// deepest cells are dropped first. Cell depths are Morton bit counts, so a
/// quadtree level `l` cell has depth `2l`; the whole square is never emitted
/// as a cell since depth 0 is reserved.
pub fn polygon_to_cells(vertices: &[(u64, u64)], max_cells: usize, w: usize) -> Result<CellCover> {
    check_coord_bits(w)?;
    if max_cells == 0 {
        return Err(Error::InvalidPredicate("max_cells must be positive".into()));
    }
    if w == 0 {
        return Err(Error::InvalidPredicate(
            "coordinate width must be positive".into(),
        ));
    }
    let poly = ConvexPolygon::new(vertices, w)?;

    let mut emitted: Vec<(usize, u64, u64)> = Vec::new();
    let mut frontier: Vec<(u64, u64)> = vec![(0, 0)];
    for level in 1..=w {
        if emitted.len() >= max_cells {
            break;
        }
        // Side length in doubled coordinates.
        let side = 2i128 << (w - level);
        let mut next = Vec::new();
        for &(a, b) in &frontier {
            for (da, db) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let (ca, cb) = (2 * a + da, 2 * b + db);
                let x0 = ca as i128 * side;
                let y0 = cb as i128 * side;
                let corners = [
                    (x0, y0),
                    (x0, y0 + side),
                    (x0 + side, y0),
                    (x0 + side, y0 + side),
                ];
                if corners.iter().all(|&c| poly.contains(c)) {
                    emitted.push((level, ca, cb));
                } else if level == w {
                    if poly.contains((x0 + side / 2, y0 + side / 2)) {
                        emitted.push((level, ca, cb));
                    }
                } else if poly.intersects(&corners) {
                    next.push((ca, cb));
                }
            }
        }
        frontier = next;
    }

    let mut cells: Vec<Cell> = emitted
        .iter()
        .map(|&(level, a, b)| Cell {
            depth: (2 * level) as u8,
            prefix: morton(a, b, level) << (2 * (w - level)),
        })
        .collect();
    cells.sort();
    cells.truncate(max_cells);

    let covered: f64 = cells
        .iter()
        .map(|c| 4f64.powi((w - c.depth as usize / 2) as i32))
        .sum();
    let area = poly.area_doubled_coords() as f64 / 8.0;
    Ok(CellCover {
        cells,
        coverage_ratio: covered / area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn morton_interleaves_lat_first() {
        assert_eq!(morton(0b10, 0b01, 2), 0b1001);
        assert_eq!(morton(0b11, 0b00, 2), 0b1010);
        assert_eq!(morton(0xffff_ffff, 0xffff_ffff, 32), u64::MAX);
    }

    #[test]
    fn exact_cell_matches() {
        let w = 4;
        let (lat, lon) = (5, 12);
        let q = compile_point_in_cells(lat, lon, 2, w).unwrap();
        let exact = Cell {
            depth: 8,
            prefix: morton(lat, lon, w),
        };
        let x = cells_criterion(&[exact], 2, w).unwrap();
        assert_eq!(q.evaluate(&x).unwrap(), TRUE);
        let empty = cells_criterion(&[], 2, w).unwrap();
        assert_eq!(q.evaluate(&empty).unwrap(), FALSE);
    }

    #[test]
    fn exhaustive_w3_one_slot() {
        let w = 3;
        for (lat, lon) in [(0, 0), (5, 2), (7, 7), (3, 6)] {
            let m = morton(lat, lon, w);
            let q = compile_point_in_cells(lat, lon, 1, w).unwrap();
            assert_eq!(q.n(), 14);
            let table = q.truth_table().unwrap();
            for k in 0..(1u64 << 14) {
                let d = k >> 6;
                let prefix = k & 63;
                let want = (1..=6).contains(&d) && (prefix >> (6 - d)) == (m >> (6 - d));
                assert_eq!(table[k as usize] == TRUE, want, "k={k}");
            }
        }
    }

    #[test]
    fn rejects_wide_coordinates() {
        assert!(compile_point_in_cells(0, 0, 1, 33).is_err());
        assert!(compile_point_in_cells(8, 0, 1, 3).is_err());
    }

    #[test]
    fn full_square_is_four_quadrants() {
        let s = 16;
        let cover = polygon_to_cells(&[(0, 0), (s, 0), (s, s), (0, s)], 16, 4).unwrap();
        assert_eq!(cover.cells.len(), 4);
        assert!(cover.cells.iter().all(|c| c.depth == 2));
        let prefixes: Vec<u64> = cover.cells.iter().map(|c| c.prefix >> 6).collect();
        assert_eq!(prefixes, vec![0, 1, 2, 3]);
        assert!((cover.coverage_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn right_triangle_cells_have_centers_inside() {
        let w = 4;
        let s = 1u64 << w;
        let tri = [(0, 0), (s, 0), (0, s)];
        let cover = polygon_to_cells(&tri, 16, w).unwrap();
        assert!(!cover.cells.is_empty() && cover.cells.len() <= 16);
        for c in &cover.cells {
            let level = c.depth as usize / 2;
            let code = c.prefix >> (2 * (w - level));
            let (mut a, mut b) = (0u64, 0u64);
            for j in (0..level).rev() {
                a = (a << 1) | ((code >> (2 * j + 1)) & 1);
                b = (b << 1) | ((code >> (2 * j)) & 1);
            }
            let side = (s >> level) as f64;
            let (cx, cy) = ((a as f64 + 0.5) * side, (b as f64 + 0.5) * side);
            assert!(cx + cy <= s as f64, "cell {c:?} center outside");
        }
    }

    #[test]
    fn thin_sliver_reports_distorted_coverage() {
        // Area 1/2; only the max-depth cell at (7, 0) has its center inside.
        let cover = polygon_to_cells(&[(0, 0), (16, 1), (15, 1)], 64, 4).unwrap();
        assert_eq!(cover.cells.len(), 1);
        assert_eq!(cover.cells[0].depth, 8);
        assert_eq!(cover.cells[0].prefix, morton(7, 0, 4));
        assert_eq!(cover.coverage_ratio, 2.0);
    }

    #[test]
    fn polygon_errors() {
        assert!(matches!(
            polygon_to_cells(&[(0, 0), (1, 1)], 4, 4),
            Err(Error::TooFewVertices(2))
        ));
        // Dart shape.
        let dart = [(0, 0), (8, 2), (16, 0), (8, 16)];
        assert!(matches!(
            polygon_to_cells(&dart, 4, 4),
            Err(Error::NonConvex)
        ));
        // Pentagram: all turns share a sign but it winds twice.
        let star = [(8, 0), (13, 16), (0, 6), (16, 6), (3, 16)];
        assert!(matches!(
            polygon_to_cells(&star, 4, 4),
            Err(Error::NonConvex)
        ));
        // Clockwise input is accepted.
        assert!(polygon_to_cells(&[(0, 0), (0, 16), (16, 0)], 4, 4).is_ok());
    }

    #[test]
    fn budget_drops_deepest_first() {
        let tri = [(0, 0), (16, 0), (0, 16)];
        let full = polygon_to_cells(&tri, 1000, 4).unwrap();
        let small = polygon_to_cells(&tri, 3, 4).unwrap();
        assert_eq!(small.cells.len(), 3);
        assert_eq!(small.cells, full.cells[..3].to_vec());
        assert!(small.coverage_ratio < full.coverage_ratio);
    }
}
