use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::io::fmt_sig;

/// Number of uniform R2 samples used by region comparisons.
pub const REGION_GRID: usize = 512;

const MONO_TOL: f64 = 1e-12;
/// Relative R2 distance below which two frontier endpoints coincide.
const EDGE_TOL: f64 = 1e-12;

/// Downward-closed region in the (R2, R1) plane, stored as its upper-right
/// boundary: points sorted by R2, R1 nonincreasing, linear in between. Two
/// points may share an R2, upper first, to mark a vertical drop. A point
/// beyond the last R2 is outside the region.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frontier2D {
    points: Vec<(f64, f64)>,
}

/// `c1·R1 + c2·R2 ≤ b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Halfplane {
    pub c1: f64,
    pub c2: f64,
    pub b: f64,
}

impl Halfplane {
    pub fn new(c1: f64, c2: f64, b: f64) -> Self {
        Halfplane { c1, c2, b }
    }
}

impl Frontier2D {
    pub fn empty() -> Self {
        Frontier2D { points: Vec::new() }
    }

    /// Validates an already sorted, monotone point list.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        for w in points.windows(2) {
            if w[1].0 < w[0].0 {
                return Err(Error::InvalidFrontier("R2 must be ascending".into()));
            }
            if w[1].1 > w[0].1 + MONO_TOL {
                return Err(Error::InvalidFrontier("R1 must be nonincreasing".into()));
            }
        }
        if points
            .iter()
            .any(|&(a, b)| !a.is_finite() || !b.is_finite() || a < 0.0 || b < 0.0)
        {
            return Err(Error::InvalidFrontier(
                "coordinates must be finite and nonnegative".into(),
            ));
        }
        Ok(Frontier2D::normalized(points))
    }

    /// Box region `R2 ≤ r2, R1 ≤ r1`.
    pub fn rect(r2: f64, r1: f64) -> Self {
        let (r2, r1) = (r2.max(0.0), r1.max(0.0));
        if r2 == 0.0 {
            Frontier2D {
                points: vec![(0.0, r1)],
            }
        } else {
            Frontier2D {
                points: vec![(0.0, r1), (r2, r1)],
            }
        }
    }

    /// Frontier of the downward closure of a finite point set (no
    /// convexification): the Pareto points joined by segments.
    pub fn from_vertices(mut pts: Vec<(f64, f64)>) -> Self {
        pts.retain(|p| p.0.is_finite() && p.1.is_finite());
        for p in &mut pts {
            p.0 = p.0.max(0.0);
            p.1 = p.1.max(0.0);
        }
        if pts.is_empty() {
            return Frontier2D::empty();
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
        let mut pareto: Vec<(f64, f64)> = Vec::new();
        let mut best = f64::NEG_INFINITY;
        for &p in pts.iter().rev() {
            if p.1 > best {
                pareto.push(p);
                best = p.1;
            }
        }
        pareto.reverse();
        if pareto[0].0 > 0.0 {
            pareto.insert(0, (0.0, pareto[0].1));
        }
        Frontier2D::normalized(pareto)
    }

    /// Sorts, keeps the max and min R1 of each R2 tie and flattens float noise
    /// in the monotonicity.
    fn normalized(mut pts: Vec<(f64, f64)>) -> Self {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
        for p in pts {
            let n = out.len();
            if n >= 2 && out[n - 2].0 == p.0 {
                out[n - 1].1 = p.1;
            } else if n >= 1 && out[n - 1].0 == p.0 && out[n - 1].1 == p.1 {
                continue;
            } else {
                out.push(p);
            }
        }
        for k in (0..out.len().saturating_sub(1)).rev() {
            if out[k].1 < out[k + 1].1 {
                out[k].1 = out[k + 1].1;
            }
        }
        out.dedup();
        // A drop at the last R2 is implied by downward closure.
        if out.len() >= 2 && out[out.len() - 2].0 == out[out.len() - 1].0 {
            out.pop();
        }
        Frontier2D { points: out }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn r2_max(&self) -> Option<f64> {
        self.points.last().map(|p| p.0)
    }

    pub fn r1_max(&self) -> Option<f64> {
        self.points.first().map(|p| p.1)
    }

    /// Largest R1 in the region at this R2, or `None` outside its R2 range.
    pub fn r1_at(&self, r2: f64) -> Option<f64> {
        let last = self.points.last()?;
        if r2 > last.0 || r2.is_nan() {
            return None;
        }
        let first = self.points[0];
        if r2 <= first.0 {
            return Some(first.1);
        }
        let k = self.points.partition_point(|p| p.0 < r2);
        let (x0, y0) = self.points[k - 1];
        let (x1, y1) = self.points[k];
        if x1 == x0 {
            return Some(y1.max(y0));
        }
        Some(y0 + (y1 - y0) * (r2 - x0) / (x1 - x0))
    }

    /// Right limit of `r1_at`: below it at a vertical drop, `None` from the
    /// last R2 on.
    pub fn r1_right(&self, r2: f64) -> Option<f64> {
        let first = self.points.first()?;
        if r2 < first.0 {
            return Some(first.1);
        }
        let k = self.points.partition_point(|p| p.0 <= r2);
        if k == self.points.len() {
            return None;
        }
        let (x0, y0) = self.points[k - 1];
        let (x1, y1) = self.points[k];
        Some(y0 + (y1 - y0) * (r2 - x0) / (x1 - x0))
    }

    /// Largest R2 in the region at this R1, or `None` if R1 exceeds the region.
    pub fn r2_at(&self, r1: f64) -> Option<f64> {
        let first = self.points.first()?;
        if r1 > first.1 {
            return None;
        }
        let mut best = 0.0f64;
        for w in self.points.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if y1 >= r1 {
                best = best.max(x1);
            } else if y0 >= r1 && y0 > y1 {
                best = best.max(x0 + (x1 - x0) * (y0 - r1) / (y0 - y1));
            }
        }
        Some(best.max(first.0))
    }

    /// Point-in-region test with tolerance.
    pub fn contains_point(&self, r2: f64, r1: f64, tol: f64) -> bool {
        if r1 <= tol && r2 <= tol {
            return !self.is_empty();
        }
        match self.r2_max() {
            None => false,
            Some(m) => {
                let at = (r2 - tol).clamp(0.0, m);
                r2 - tol <= m && self.r1_at(at).is_some_and(|v| r1 <= v + tol)
            }
        }
    }

    fn breakpoints(&self, other: &Frontier2D, upto: f64) -> Vec<f64> {
        let mut xs: Vec<f64> = self
            .points
            .iter()
            .chain(other.points.iter())
            .map(|p| p.0)
            .filter(|x| *x <= upto)
            .collect();
        xs.push(0.0);
        xs.push(upto);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    }

    /// Pointwise minimum of the two frontiers over the merged R2 breakpoints.
    pub fn intersect(&self, other: &Frontier2D) -> Frontier2D {
        let (Some(a), Some(b)) = (self.r2_max(), other.r2_max()) else {
            return Frontier2D::empty();
        };
        let upto = a.min(b);
        let mut pts = Vec::new();
        for x in self.breakpoints(other, upto) {
            pts.push((x, self.r1_at(x).unwrap().min(other.r1_at(x).unwrap())));
            if let (Some(p), Some(q)) = (self.r1_right(x), other.r1_right(x)) {
                pts.push((x, p.min(q)));
            }
        }
        Frontier2D::normalized(pts)
    }

    /// Pointwise maximum of the two frontiers over the merged R2 breakpoints.
    pub fn union(&self, other: &Frontier2D) -> Frontier2D {
        let (a, b) = match (self.r2_max(), other.r2_max()) {
            (None, _) => return other.clone(),
            (_, None) => return self.clone(),
            (Some(a), Some(b)) => (a, b),
        };
        let upto = a.max(b);
        let max = |p: Option<f64>, q: Option<f64>| match (p, q) {
            (Some(p), Some(q)) => Some(p.max(q)),
            (p, q) => p.or(q),
        };
        let mut pts = Vec::new();
        for x in self.breakpoints(other, upto) {
            pts.push((x, max(self.r1_at(x), other.r1_at(x)).unwrap_or(0.0)));
            if let Some(v) = max(self.r1_right(x), other.r1_right(x)) {
                pts.push((x, v));
            }
        }
        Frontier2D::normalized(pts)
    }

    /// Union of many frontiers.
    pub fn union_all<'a, I: IntoIterator<Item = &'a Frontier2D>>(items: I) -> Frontier2D {
        items
            .into_iter()
            .fold(Frontier2D::empty(), |acc, f| acc.union(f))
    }

    /// Every point of `inner` lies in `self` up to `tol` in each coordinate.
    /// Checked at all breakpoints of both frontiers and on a uniform grid.
    pub fn contains(&self, inner: &Frontier2D, tol: f64) -> bool {
        let Some(im) = inner.r2_max() else {
            return true;
        };
        let Some(om) = self.r2_max() else {
            return false;
        };
        if im > om + tol {
            return false;
        }
        let mut xs = self.breakpoints(inner, im);
        xs.extend((0..=REGION_GRID).map(|k| im * k as f64 / REGION_GRID as f64));
        xs.into_iter().all(|x| {
            let o = self.r1_at(x.min(om)).unwrap_or(0.0);
            let left = inner.r1_at(x).unwrap_or(0.0) <= o + tol;
            let right = match inner.r1_right(x) {
                Some(v) => v <= self.r1_right(x).unwrap_or(o) + tol,
                None => true,
            };
            left && right
        })
    }

    /// Largest vertical distance between the two frontiers, counting R1 as 0
    /// outside a frontier's R2 range.
    pub fn max_gap(&self, other: &Frontier2D) -> f64 {
        let upto = self
            .r2_max()
            .unwrap_or(0.0)
            .max(other.r2_max().unwrap_or(0.0));
        let mut xs = self.breakpoints(other, upto);
        xs.extend((0..=REGION_GRID).map(|k| upto * k as f64 / REGION_GRID as f64));
        // An R2 overshoot within float noise reads the endpoint, not 0.
        let at = |f: &Frontier2D, x: f64| match f.r2_max() {
            Some(m) if x > m && x - m <= EDGE_TOL * (1.0 + m) => f.r1_at(m),
            _ => f.r1_at(x),
        };
        let near_end =
            |f: &Frontier2D, x: f64| f.r2_max().is_some_and(|m| m - x <= EDGE_TOL * (1.0 + m));
        xs.into_iter()
            .map(|x| {
                let left = (at(self, x).unwrap_or(0.0) - at(other, x).unwrap_or(0.0)).abs();
                let right = match (self.r1_right(x), other.r1_right(x)) {
                    (Some(p), Some(q)) => (p - q).abs(),
                    (Some(p), None) if !near_end(self, x) => p,
                    (None, Some(q)) if !near_end(other, x) => q,
                    _ => 0.0,
                };
                left.max(right)
            })
            .fold(0.0, f64::max)
    }

    /// Upper concave envelope (time-sharing closure).
    pub fn convexify(&self) -> Frontier2D {
        Frontier2D::hull_of(self.points.clone())
    }

    /// Frontier of the convex, downward-closed hull of a point set.
    pub fn hull_of(mut pts: Vec<(f64, f64)>) -> Frontier2D {
        pts.retain(|p| p.0.is_finite() && p.1.is_finite());
        if pts.is_empty() {
            return Frontier2D::empty();
        }
        for p in &mut pts {
            p.0 = p.0.max(0.0);
            p.1 = p.1.max(0.0);
        }
        let top = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let start = pts
            .iter()
            .filter(|p| p.1 == top)
            .map(|p| p.0)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut cand: Vec<(f64, f64)> = pts.into_iter().filter(|p| p.0 > start).collect();
        cand.push((start, top));
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
        cand.dedup_by(|b, a| a.0 == b.0);
        let mut hull: Vec<(f64, f64)> = Vec::with_capacity(cand.len());
        for p in cand {
            while hull.len() >= 2 {
                let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
                let scale = (a.0 - o.0).abs().max((p.1 - o.1).abs()).max(1.0);
                if cross >= -1e-12 * scale * scale {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        if hull[0].0 > 0.0 {
            hull.insert(0, (0.0, top));
        }
        Frontier2D::normalized(hull)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "R2,R1")?;
        for (r2, r1) in &self.points {
            writeln!(w, "{},{}", fmt_sig(*r2, 12), fmt_sig(*r1, 12))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Frontier2D> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "R2,R1" => {}
            _ => return Err(Error::Parse("missing R2,R1 header".into())),
        }
        let mut pts = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad row `{line}`")))?;
            let p = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(e.to_string()))
            };
            pts.push((p(a)?, p(b)?));
        }
        Frontier2D::new(pts)
    }
}

pub fn frontier_intersect(a: &Frontier2D, b: &Frontier2D) -> Frontier2D {
    a.intersect(b)
}

pub fn frontier_union(a: &Frontier2D, b: &Frontier2D) -> Frontier2D {
    a.union(b)
}

pub fn frontier_contains(outer: &Frontier2D, inner: &Frontier2D, tol: f64) -> bool {
    outer.contains(inner, tol)
}

/// Mutual containment within `tol`.
pub fn region_equal(a: &Frontier2D, b: &Frontier2D, tol: f64) -> bool {
    a.contains(b, tol) && b.contains(a, tol)
}

/// Frontier of `{R1, R2 ≥ 0} ∩ halfplanes` in floating point. An infeasible
/// system gives the empty frontier.
pub fn frontier_from_halfplanes(hs: &[Halfplane]) -> Result<Frontier2D> {
    let mut lines: Vec<Halfplane> = hs.to_vec();
    lines.push(Halfplane::new(-1.0, 0.0, 0.0));
    lines.push(Halfplane::new(0.0, -1.0, 0.0));
    if lines
        .iter()
        .any(|h| !(h.c1.is_finite() && h.c2.is_finite()) || h.b.is_nan())
    {
        return Err(Error::InvalidSystem("non-finite halfplane".into()));
    }
    let tol = |h: &Halfplane| 1e-12 * (1.0 + h.b.abs());
    let feasible = |x: f64, y: f64| lines.iter().all(|h| h.c1 * x + h.c2 * y <= h.b + tol(h));
    let cap = |r1: bool| {
        lines
            .iter()
            .filter(|h| {
                if r1 {
                    h.c2 == 0.0 && h.c1 > 0.0
                } else {
                    h.c1 == 0.0 && h.c2 > 0.0
                }
            })
            .map(|h| if r1 { h.b / h.c1 } else { h.b / h.c2 })
            .fold(f64::INFINITY, f64::min)
    };
    let (cap_r1, cap_r2) = (cap(true), cap(false));
    let mut verts = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (p, q) = (lines[i], lines[j]);
            if !(p.b.is_finite() && q.b.is_finite()) {
                continue;
            }
            let det = p.c1 * q.c2 - q.c1 * p.c2;
            if det.abs() < 1e-14 {
                continue;
            }
            let x = (p.b * q.c2 - q.b * p.c2) / det;
            let y = (p.c1 * q.b - q.c1 * p.b) / det;
            if feasible(x, y) {
                // Pull tolerance-admitted vertices back inside the axis caps so
                // near-equal caps do not leave a sliver past the true corner.
                let (x, y) = (x.clamp(0.0, cap_r1), y.clamp(0.0, cap_r2));
                verts.push((y, x));
            }
        }
    }
    if verts.is_empty() {
        return Ok(Frontier2D::empty());
    }
    let finite: Vec<&Halfplane> = lines.iter().filter(|h| h.b.is_finite()).collect();
    let mut dirs = vec![(1.0, 0.0), (0.0, 1.0)];
    for h in &finite {
        for d in [(h.c2, -h.c1), (-h.c2, h.c1)] {
            if d.0 >= 0.0 && d.1 >= 0.0 && (d.0 > 0.0 || d.1 > 0.0) {
                dirs.push(d);
            }
        }
    }
    if dirs
        .iter()
        .any(|d| finite.iter().all(|h| h.c1 * d.0 + h.c2 * d.1 <= 1e-14))
    {
        return Err(Error::Unbounded);
    }
    Ok(Frontier2D::from_vertices(verts))
}
