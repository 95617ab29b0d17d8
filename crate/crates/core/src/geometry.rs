//! Points, norms, compact set backends, distances, projections, the
//! Hausdorff metric and finite sampling.
//!
//! Continuous sets are unions of closed norm balls; everything else must be
//! given as a finite point cloud. Balls admit closed-form distances and a
//! closed-form nearest boundary point, which keeps projections exact where
//! the jump examples need them to be.

use crate::config::ToleranceConfig;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::cmp::Ordering;
use std::collections::HashMap;

/// Norm fixed for a whole analysis run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub fn vector_norm<S: Scalar>(self, v: &[S]) -> S {
        match self {
            NormKind::L1 => v.iter().fold(S::zero(), |acc, x| acc + x.abs()),
            NormKind::L2 => v
                .iter()
                .fold(S::zero(), |acc, x| acc + *x * *x)
                .sqrt(),
            NormKind::Linf => v.iter().fold(S::zero(), |acc, x| acc.max(x.abs())),
        }
    }

    /// Half-diagonal of a lattice cell of step `h` in dimension `d`; the
    /// covering radius of the lattice under this norm.
    fn cell_half_diagonal<S: Scalar>(self, h: S, d: usize) -> S {
        let half = h * S::half();
        match self {
            NormKind::L1 => half * S::from_usize(d).unwrap(),
            NormKind::L2 => half * S::from_usize(d).unwrap().sqrt(),
            NormKind::Linf => half,
        }
    }
}

/// A point of `R^d`. Coordinates are finite and `d >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<S> {
    coords: Vec<S>,
}

impl<S: Scalar> Point<S> {
    pub fn new(coords: Vec<S>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("point must have dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("point coordinates must be finite".into()));
        }
        Ok(Self { coords })
    }

    /// Construction from coordinates known to be finite.
    pub(crate) fn from_vec(coords: Vec<S>) -> Self {
        debug_assert!(!coords.is_empty() && coords.iter().all(|c| c.is_finite()));
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn norm(&self, norm: NormKind) -> S {
        norm.vector_norm(&self.coords)
    }

    pub fn dist(&self, other: &Self, norm: NormKind) -> S {
        debug_assert_eq!(self.dim(), other.dim());
        let diff: Vec<S> = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| *a - *b)
            .collect();
        norm.vector_norm(&diff)
    }

    pub fn midpoint(&self, other: &Self) -> Self {
        Self::from_vec(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| (*a + *b) * S::half())
                .collect(),
        )
    }

    /// Lexicographic total order; well defined because coordinates are finite.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.coords.iter().zip(&other.coords) {
            match a.partial_cmp(b).expect("finite coordinates") {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.coords.len().cmp(&other.coords.len())
    }
}

/// Closed ball `{ x : |x - center| <= radius }` in the analysis norm.
#[derive(Clone, Debug)]
pub struct Ball<S> {
    pub center: Point<S>,
    pub radius: S,
}

impl<S: Scalar> Ball<S> {
    pub fn new(center: Point<S>, radius: S) -> Result<Self> {
        if !(radius >= S::zero() && radius.is_finite()) {
            return Err(Error::InvalidInput("ball radius must be finite and >= 0".into()));
        }
        Ok(Self { center, radius })
    }

    pub fn distance(&self, p: &Point<S>, norm: NormKind) -> S {
        (p.dist(&self.center, norm) - self.radius).max(S::zero())
    }

    /// Nearest point of the ball: `p` itself when inside, otherwise the
    /// radial boundary point.
    pub fn project(&self, p: &Point<S>, norm: NormKind) -> Point<S> {
        let d = p.dist(&self.center, norm);
        if d <= self.radius {
            return p.clone();
        }
        let scale = self.radius / d;
        Point::from_vec(
            self.center
                .coords()
                .iter()
                .zip(p.coords())
                .map(|(c, x)| *c + (*x - *c) * scale)
                .collect(),
        )
    }
}

/// Deduplicate within `tol` (per-coordinate) and sort lexicographically. The
/// lexicographically smallest member of each cluster is kept.
pub(crate) fn dedup_points<S: Scalar>(mut pts: Vec<Point<S>>, tol: S) -> Vec<Point<S>> {
    pts.sort_by(|a, b| a.lex_cmp(b));
    pts.dedup_by(|a, b| a == b);
    if pts.len() <= 1 {
        return pts;
    }
    let dim = pts[0].dim();
    let cell = tol.max(S::lit(1e-12));
    let key = |p: &Point<S>| -> Vec<i64> {
        p.coords()
            .iter()
            .map(|c| (*c / cell).floor().as_f64() as i64)
            .collect()
    };
    let mut kept: Vec<Point<S>> = Vec::with_capacity(pts.len());
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for p in pts {
        let k = key(&p);
        let mut dup = false;
        let mut offset = vec![-1i64; dim];
        'scan: loop {
            let cell_key: Vec<i64> = k.iter().zip(&offset).map(|(a, b)| a + b).collect();
            if let Some(ids) = grid.get(&cell_key) {
                for &i in ids {
                    let close = kept[i]
                        .coords()
                        .iter()
                        .zip(p.coords())
                        .all(|(a, b)| (*a - *b).abs() <= tol);
                    if close {
                        dup = true;
                        break 'scan;
                    }
                }
            }
            let mut axis = 0;
            loop {
                if axis == dim {
                    break 'scan;
                }
                offset[axis] += 1;
                if offset[axis] <= 1 {
                    break;
                }
                offset[axis] = -1;
                axis += 1;
            }
        }
        if !dup {
            grid.entry(k).or_default().push(kept.len());
            kept.push(p);
        }
    }
    kept
}

/// Nonempty, deduplicated, lexicographically sorted finite point set.
#[derive(Clone, Debug)]
pub struct PointSet<S> {
    pts: Vec<Point<S>>,
}

impl<S: Scalar> PointSet<S> {
    pub fn new(pts: Vec<Point<S>>, tie_tol: S) -> Result<Self> {
        if pts.is_empty() {
            return Err(Error::InvalidInput("point set must be nonempty".into()));
        }
        let dim = pts[0].dim();
        if pts.iter().any(|p| p.dim() != dim) {
            return Err(Error::InvalidInput("mixed dimensions in point set".into()));
        }
        Ok(Self {
            pts: dedup_points(pts, tie_tol),
        })
    }

    pub fn points(&self) -> &[Point<S>] {
        &self.pts
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.pts[0].dim()
    }

    pub fn min_dist(&self, p: &Point<S>, norm: NormKind) -> S {
        self.pts
            .iter()
            .map(|q| q.dist(p, norm))
            .fold(S::infinity(), S::min)
    }

    /// Sorted set equality within `tol`, as a two-sided covering check.
    pub fn set_eq(&self, other: &Self, norm: NormKind, tol: S) -> bool {
        self.pts.iter().all(|p| other.min_dist(p, norm) <= tol)
            && other.pts.iter().all(|p| self.min_dist(p, norm) <= tol)
    }
}

/// Compact nonempty subset of `R^d`.
#[derive(Clone, Debug)]
pub enum CompactSet<S> {
    Points(PointSet<S>),
    Balls(Vec<Ball<S>>),
    Union(Vec<CompactSet<S>>),
}

impl<S: Scalar> CompactSet<S> {
    pub fn points(pts: Vec<Point<S>>, tie_tol: S) -> Result<Self> {
        Ok(CompactSet::Points(PointSet::new(pts, tie_tol)?))
    }

    pub fn balls(balls: Vec<Ball<S>>) -> Result<Self> {
        if balls.is_empty() {
            return Err(Error::InvalidInput("ball union must be nonempty".into()));
        }
        let dim = balls[0].center.dim();
        if balls.iter().any(|b| b.center.dim() != dim) {
            return Err(Error::InvalidInput("mixed dimensions in ball union".into()));
        }
        Ok(CompactSet::Balls(balls))
    }

    pub fn union(members: Vec<CompactSet<S>>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidInput("union must be nonempty".into()));
        }
        let dim = members[0].dim();
        if members.iter().any(|m| m.dim() != dim) {
            return Err(Error::InvalidInput("mixed dimensions in union".into()));
        }
        Ok(CompactSet::Union(members))
    }

    pub fn singleton(p: Point<S>) -> Self {
        CompactSet::Points(PointSet { pts: vec![p] })
    }

    pub fn dim(&self) -> usize {
        match self {
            CompactSet::Points(ps) => ps.dim(),
            CompactSet::Balls(bs) => bs[0].center.dim(),
            CompactSet::Union(ms) => ms[0].dim(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            CompactSet::Points(_) => true,
            CompactSet::Balls(bs) => bs.iter().all(|b| b.radius == S::zero()),
            CompactSet::Union(ms) => ms.iter().all(|m| m.is_finite()),
        }
    }

    pub fn as_points(&self) -> Option<&PointSet<S>> {
        match self {
            CompactSet::Points(ps) => Some(ps),
            _ => None,
        }
    }

    /// `inf { |p - a| : a in self }`, exact on every backend.
    pub fn distance(&self, p: &Point<S>, norm: NormKind) -> S {
        match self {
            CompactSet::Points(ps) => ps.min_dist(p, norm),
            CompactSet::Balls(bs) => bs
                .iter()
                .map(|b| b.distance(p, norm))
                .fold(S::infinity(), S::min),
            CompactSet::Union(ms) => ms
                .iter()
                .map(|m| m.distance(p, norm))
                .fold(S::infinity(), S::min),
        }
    }

    pub fn contains(&self, p: &Point<S>, norm: NormKind, tol: S) -> bool {
        self.distance(p, norm) <= tol
    }

    /// All nearest points within `tie_tol` of the minimum, deduplicated and
    /// sorted. For balls the representative is the radial boundary point
    /// (or `p` itself when `p` lies inside).
    pub fn project(&self, p: &Point<S>, norm: NormKind, tie_tol: S) -> Vec<Point<S>> {
        let best = self.distance(p, norm);
        let mut out = Vec::new();
        self.collect_projections(p, norm, best, tie_tol, &mut out);
        dedup_points(out, tie_tol)
    }

    fn collect_projections(
        &self,
        p: &Point<S>,
        norm: NormKind,
        best: S,
        tie_tol: S,
        out: &mut Vec<Point<S>>,
    ) {
        match self {
            CompactSet::Points(ps) => {
                for q in ps.points() {
                    if q.dist(p, norm) <= best + tie_tol {
                        out.push(q.clone());
                    }
                }
            }
            CompactSet::Balls(bs) => {
                for b in bs {
                    if b.distance(p, norm) <= best + tie_tol {
                        out.push(b.project(p, norm));
                    }
                }
            }
            CompactSet::Union(ms) => {
                for m in ms {
                    if m.distance(p, norm) <= best + tie_tol {
                        m.collect_projections(p, norm, best, tie_tol, out);
                    }
                }
            }
        }
    }

    /// Lexicographically smallest nearest point: the canonical tie-break used
    /// whenever a single projection value is required.
    pub fn project_canonical(&self, p: &Point<S>, norm: NormKind, tie_tol: S) -> Point<S> {
        let projections = self.project(p, norm, tie_tol);
        projections.into_iter().next().expect("nonempty set")
    }

    /// `|A| = haus(A, {0}) = max_{a in A} |a|`; closed form on every backend.
    pub fn set_norm(&self, norm: NormKind) -> S {
        match self {
            CompactSet::Points(ps) => ps
                .points()
                .iter()
                .map(|p| p.norm(norm))
                .fold(S::zero(), S::max),
            CompactSet::Balls(bs) => bs
                .iter()
                .map(|b| b.center.norm(norm) + b.radius)
                .fold(S::zero(), S::max),
            CompactSet::Union(ms) => ms
                .iter()
                .map(|m| m.set_norm(norm))
                .fold(S::zero(), S::max),
        }
    }

    /// Finite subset `N` of the set with `haus(self, N) <= eps`.
    pub fn sample(&self, eps: S, norm: NormKind) -> PointSet<S> {
        let mut pts = Vec::new();
        self.collect_sample(eps, norm, &mut pts);
        PointSet {
            pts: dedup_points(pts, eps * S::lit(1e-7)),
        }
    }

    fn collect_sample(&self, eps: S, norm: NormKind, out: &mut Vec<Point<S>>) {
        match self {
            CompactSet::Points(ps) => out.extend_from_slice(ps.points()),
            CompactSet::Balls(bs) => {
                for b in bs {
                    sample_ball(b, eps, norm, out);
                }
            }
            CompactSet::Union(ms) => {
                for m in ms {
                    m.collect_sample(eps, norm, out);
                }
            }
        }
    }
}

/// Net of a single ball. Concentric rings for Euclidean discs, a lattice
/// with boundary snapping otherwise. Nodes always lie inside the ball.
fn sample_ball<S: Scalar>(ball: &Ball<S>, eps: S, norm: NormKind, out: &mut Vec<Point<S>>) {
    let d = ball.center.dim();
    out.push(ball.center.clone());
    if ball.radius <= S::zero() {
        return;
    }
    if d == 2 && norm == NormKind::L2 {
        // rings spaced so a polar cell has half-diagonal <= eps
        let step = eps * S::two().sqrt() * S::lit(0.999);
        let rings = (ball.radius / step).ceil().as_f64() as usize;
        for j in 0..=rings {
            let r = ball.radius - S::from_usize(j).unwrap() * step;
            if r <= S::zero() {
                break;
            }
            let circumference = S::lit(2.0 * std::f64::consts::PI) * r;
            let count = (circumference / step).ceil().as_f64().max(4.0) as usize;
            for i in 0..count {
                let theta =
                    S::lit(2.0 * std::f64::consts::PI) * S::from_usize(i).unwrap()
                        / S::from_usize(count).unwrap();
                out.push(Point::from_vec(vec![
                    ball.center.coords()[0] + r * theta.cos(),
                    ball.center.coords()[1] + r * theta.sin(),
                ]));
            }
        }
        return;
    }
    // lattice anchored at the center; outside nodes near the boundary are
    // snapped radially so the boundary band stays covered
    let h = match norm {
        NormKind::L1 => eps / S::from_usize(d).unwrap(),
        NormKind::L2 => eps / S::from_usize(d).unwrap().sqrt(),
        NormKind::Linf => eps,
    } * S::lit(0.999);
    let span = (ball.radius / h).ceil().as_f64() as i64 + 1;
    let mut idx = vec![-span; d];
    loop {
        let q = Point::from_vec(
            ball.center
                .coords()
                .iter()
                .zip(&idx)
                .map(|(c, i)| *c + h * S::lit(*i as f64))
                .collect(),
        );
        let dist_c = q.dist(&ball.center, norm);
        if dist_c <= ball.radius {
            out.push(q);
        } else if dist_c <= ball.radius + norm.cell_half_diagonal(h, d) * S::two() {
            out.push(ball.project(&q, norm));
        }
        // odometer over the index box
        let mut axis = 0;
        loop {
            if axis == d {
                return;
            }
            idx[axis] += 1;
            if idx[axis] <= span {
                break;
            }
            idx[axis] = -span;
            axis += 1;
        }
    }
}

/// Hausdorff distance together with the discretization error bound of the
/// reported value (zero when both sets are finite).
#[derive(Clone, Copy, Debug)]
pub struct HausdorffEstimate<S> {
    pub value: S,
    pub error_bound: S,
}

/// One-sided term `sup_{x in X} dist(x, Y)`. The supremum runs over a finite
/// representative of `X` while distances to `Y` stay exact, so the error is
/// at most the sampling resolution of `X`.
fn one_sided_sup<S: Scalar>(
    x: &CompactSet<S>,
    y: &CompactSet<S>,
    norm: NormKind,
    eps: S,
) -> (S, S) {
    if let Some(ps) = x.as_points() {
        let sup = sup_dist_points(ps.points(), y, norm);
        return (sup, S::zero());
    }
    if x.is_finite() {
        let rep = x.sample(eps, norm);
        return (sup_dist_points(rep.points(), y, norm), S::zero());
    }
    let rep = x.sample(eps, norm);
    (sup_dist_points(rep.points(), y, norm), eps)
}

fn sup_dist_points<S: Scalar>(pts: &[Point<S>], y: &CompactSet<S>, norm: NormKind) -> S {
    // index the target when it is a large finite cloud
    if let Some(ps) = y.as_points() {
        if ps.len() > 256 && pts.len() > 64 {
            let index = GridIndex::build(ps.points(), IndexMetric::Plain(norm));
            return pts
                .iter()
                .map(|p| index.nearest(p.coords()).1)
                .fold(S::zero(), S::max);
        }
    }
    pts.iter()
        .map(|p| y.distance(p, norm))
        .fold(S::zero(), S::max)
}

/// Hausdorff metric. Exact for finite backends; continuous backends are
/// sampled at `tol.sample_eps` with the error bound reported.
pub fn hausdorff<S: Scalar>(
    a: &CompactSet<S>,
    b: &CompactSet<S>,
    norm: NormKind,
    tol: &ToleranceConfig<S>,
) -> HausdorffEstimate<S> {
    let (s1, e1) = one_sided_sup(a, b, norm, tol.sample_eps);
    let (s2, e2) = one_sided_sup(b, a, norm, tol.sample_eps);
    HausdorffEstimate {
        value: s1.max(s2),
        error_bound: e1.max(e2),
    }
}

/// Hausdorff distance between two finite point sets, exact.
pub fn hausdorff_points<S: Scalar>(a: &PointSet<S>, b: &PointSet<S>, norm: NormKind) -> S {
    let s1 = sup_points_to_points(a, b, norm);
    let s2 = sup_points_to_points(b, a, norm);
    s1.max(s2)
}

/// One-sided excess `sup_{x in a} dist(x, b)` for finite sets, exact.
pub fn sup_points_to_points<S: Scalar>(a: &PointSet<S>, b: &PointSet<S>, norm: NormKind) -> S {
    if b.len() > 256 && a.len() > 64 {
        let index = GridIndex::build(b.points(), IndexMetric::Plain(norm));
        a.points()
            .iter()
            .map(|p| index.nearest(p.coords()).1)
            .fold(S::zero(), S::max)
    } else {
        a.points()
            .iter()
            .map(|p| b.min_dist(p, norm))
            .fold(S::zero(), S::max)
    }
}

/// Metric used by the cell index: a plain norm, or the max of the chosen
/// norm over two coordinate blocks (the product metric on pairs).
#[derive(Clone, Copy, Debug)]
pub enum IndexMetric {
    Plain(NormKind),
    BlockMax(NormKind, usize),
}

impl IndexMetric {
    fn dist<S: Scalar>(&self, a: &[S], b: &[S]) -> S {
        let diff: Vec<S> = a.iter().zip(b).map(|(x, y)| *x - *y).collect();
        match self {
            IndexMetric::Plain(n) => n.vector_norm(&diff),
            IndexMetric::BlockMax(n, split) => n
                .vector_norm(&diff[..*split])
                .max(n.vector_norm(&diff[*split..])),
        }
    }
}

/// Uniform cell index over a finite point cloud. Nearest-neighbor queries
/// are exact: shells of cells are scanned outward until the shell's lower
/// bound exceeds the best distance found.
pub struct GridIndex<'a, S> {
    pts: &'a [Point<S>],
    metric: IndexMetric,
    cell: S,
    origin: Vec<S>,
    map: HashMap<Vec<i64>, Vec<u32>>,
    dim: usize,
}

impl<'a, S: Scalar> GridIndex<'a, S> {
    pub fn build(pts: &'a [Point<S>], metric: IndexMetric) -> Self {
        let dim = pts[0].dim();
        let mut lo = pts[0].coords().to_vec();
        let mut hi = lo.clone();
        for p in pts {
            for (i, c) in p.coords().iter().enumerate() {
                lo[i] = lo[i].min(*c);
                hi[i] = hi[i].max(*c);
            }
        }
        let mut extent = S::zero();
        for i in 0..dim {
            extent = extent.max(hi[i] - lo[i]);
        }
        let n = S::from_usize(pts.len()).unwrap();
        let cell = (extent / n.powf(S::one() / S::from_usize(dim).unwrap()))
            .max(extent * S::lit(1e-9))
            .max(S::lit(1e-12));
        let mut map: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
        for (i, p) in pts.iter().enumerate() {
            map.entry(Self::key_of(p.coords(), &lo, cell))
                .or_default()
                .push(i as u32);
        }
        Self {
            pts,
            metric,
            cell,
            origin: lo,
            map,
            dim,
        }
    }

    fn key_of(coords: &[S], origin: &[S], cell: S) -> Vec<i64> {
        coords
            .iter()
            .zip(origin)
            .map(|(c, o)| ((*c - *o) / cell).floor().as_f64() as i64)
            .collect()
    }

    /// Index and distance of the nearest point to `q`. Exact: shells are
    /// scanned outward until their lower bound exceeds the best hit.
    pub fn nearest(&self, q: &[S]) -> (usize, S) {
        let center = Self::key_of(q, &self.origin, self.cell);
        // seed the bound so far-away queries terminate early
        let mut best = (0usize, self.metric.dist(q, self.pts[0].coords()));
        let mut shell = 0i64;
        loop {
            if shell > 0 {
                // any point in a cell at Chebyshev shell k is at least
                // (k-1)*cell away in every metric considered here
                let lower = S::lit((shell - 1) as f64) * self.cell;
                if lower > best.1 {
                    return best;
                }
            }
            self.scan_shell(&center, shell, q, &mut best);
            shell += 1;
        }
    }

    fn scan_shell(&self, center: &[i64], shell: i64, q: &[S], best: &mut (usize, S)) {
        let mut offset = vec![-shell; self.dim];
        loop {
            if shell == 0 || offset.iter().any(|o| o.abs() == shell) {
                let key: Vec<i64> = center.iter().zip(&offset).map(|(c, o)| c + o).collect();
                if let Some(ids) = self.map.get(&key) {
                    for &i in ids {
                        let d = self.metric.dist(q, self.pts[i as usize].coords());
                        if d < best.1 {
                            *best = (i as usize, d);
                        }
                    }
                }
            }
            let mut axis = 0;
            loop {
                if axis == self.dim {
                    return;
                }
                offset[axis] += 1;
                if offset[axis] <= shell {
                    break;
                }
                offset[axis] = -shell;
                axis += 1;
            }
        }
    }
}
