//! Set-valued functions on a compact interval: piecewise definitions with
//! affine-in-`t` coordinates, partitions, variation machinery, local moduli
//! and one-sided limits.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{hausdorff, Ball, CompactSet, NormKind, Point};
use crate::scalar::Scalar;

/// Coordinates affine in time: `coords(t) = base + slope * t`.
#[derive(Clone, Debug)]
pub struct AffinePoint<S> {
    pub base: Vec<S>,
    pub slope: Vec<S>,
}

impl<S: Scalar> AffinePoint<S> {
    pub fn constant(coords: Vec<S>) -> Self {
        let slope = vec![S::zero(); coords.len()];
        Self {
            base: coords,
            slope,
        }
    }

    pub fn new(base: Vec<S>, slope: Vec<S>) -> Result<Self> {
        if base.is_empty() || base.len() != slope.len() {
            return Err(Error::InvalidInput(
                "affine point needs matching base and slope of dimension >= 1".into(),
            ));
        }
        if base.iter().chain(&slope).any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("affine coefficients must be finite".into()));
        }
        Ok(Self { base, slope })
    }

    pub fn at(&self, t: S) -> Point<S> {
        Point::new(
            self.base
                .iter()
                .zip(&self.slope)
                .map(|(b, m)| *b + *m * t)
                .collect(),
        )
        .expect("finite affine evaluation")
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }
}

#[derive(Clone, Debug)]
pub struct AffineBall<S> {
    pub center: AffinePoint<S>,
    pub radius: S,
}

/// Set expression of one piece; every backend may move affinely in `t`.
#[derive(Clone, Debug)]
pub enum SetExpr<S> {
    Points(Vec<AffinePoint<S>>),
    Balls(Vec<AffineBall<S>>),
    Union(Vec<SetExpr<S>>),
}

impl<S: Scalar> SetExpr<S> {
    pub fn eval(&self, t: S, tie_tol: S) -> Result<CompactSet<S>> {
        match self {
            SetExpr::Points(ps) => {
                CompactSet::points(ps.iter().map(|p| p.at(t)).collect(), tie_tol)
            }
            SetExpr::Balls(bs) => CompactSet::balls(
                bs.iter()
                    .map(|b| Ball::new(b.center.at(t), b.radius))
                    .collect::<Result<Vec<_>>>()?,
            ),
            SetExpr::Union(ms) => CompactSet::union(
                ms.iter()
                    .map(|m| m.eval(t, tie_tol))
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            SetExpr::Points(ps) => ps.first().map(|p| p.dim()),
            SetExpr::Balls(bs) => bs.first().map(|b| b.center.dim()),
            SetExpr::Union(ms) => ms.first().and_then(|m| m.dim()),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            SetExpr::Points(_) => true,
            SetExpr::Balls(bs) => bs.iter().all(|b| b.radius == S::zero()),
            SetExpr::Union(ms) => ms.iter().all(|m| m.is_finite()),
        }
    }
}

/// One piece of the tiling: the sub-interval with endpoint flags and the set
/// expression valid there. Degenerate pieces (`lo == hi`, both closed) encode
/// a value at a single point, which is how a jump value distinct from both
/// one-sided limits is written down.
#[derive(Clone, Debug)]
pub struct Piece<S> {
    pub lo: S,
    pub hi: S,
    pub closed_lo: bool,
    pub closed_hi: bool,
    pub expr: SetExpr<S>,
}

impl<S: Scalar> Piece<S> {
    pub fn contains(&self, t: S) -> bool {
        let above = t > self.lo || (t == self.lo && self.closed_lo);
        let below = t < self.hi || (t == self.hi && self.closed_hi);
        above && below
    }
}

/// Set-valued function on `[a, b]`.
#[derive(Clone, Debug)]
pub struct Svf<S> {
    domain: (S, S),
    pieces: Vec<Piece<S>>,
    breakpoints: Vec<S>,
    graph_norm: S,
    tie_tol: S,
}

impl<S: Scalar> Svf<S> {
    pub fn new(
        domain: (S, S),
        pieces: Vec<Piece<S>>,
        breakpoints: Vec<S>,
        tie_tol: S,
    ) -> Result<Self> {
        let (a, b) = domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInput("domain must be a proper finite interval".into()));
        }
        if pieces.is_empty() {
            return Err(Error::InvalidInput("at least one piece required".into()));
        }
        // pieces must tile [a, b] exactly
        if pieces[0].lo != a || !pieces[0].closed_lo {
            return Err(Error::InvalidInput(format!(
                "tiling must start closed at {}",
                a.as_f64()
            )));
        }
        let last = pieces.last().unwrap();
        if last.hi != b || !last.closed_hi {
            return Err(Error::InvalidInput(format!(
                "tiling must end closed at {}",
                b.as_f64()
            )));
        }
        for (i, p) in pieces.iter().enumerate() {
            if p.lo > p.hi || (p.lo == p.hi && !(p.closed_lo && p.closed_hi)) {
                return Err(Error::InvalidInput(format!(
                    "piece {i} has an empty interval"
                )));
            }
        }
        for (i, w) in pieces.windows(2).enumerate() {
            if w[0].hi != w[1].lo {
                return Err(Error::InvalidInput(format!(
                    "tiling gap between {} and {} after piece {i}",
                    w[0].hi.as_f64(),
                    w[1].lo.as_f64()
                )));
            }
            if w[0].closed_hi == w[1].closed_lo {
                return Err(Error::InvalidInput(format!(
                    "tiling overlap or gap at {} after piece {i}: exactly one side must be closed",
                    w[0].hi.as_f64()
                )));
            }
        }
        let dim = pieces[0]
            .expr
            .dim()
            .ok_or_else(|| Error::InvalidInput("empty set expression".into()))?;
        for p in &pieces {
            if p.expr.dim() != Some(dim) {
                return Err(Error::InvalidInput("mixed dimensions across pieces".into()));
            }
        }
        let mut breakpoints = breakpoints;
        breakpoints.sort_by(|x, y| x.partial_cmp(y).unwrap());
        breakpoints.dedup();
        if breakpoints.iter().any(|x| !(*x > a && *x < b)) {
            return Err(Error::InvalidInput("breakpoints must be interior".into()));
        }
        // sup_t |F(t)|: affine coordinates make |F(t)| convex per piece, so
        // the supremum over each piece sits at an endpoint
        let mut graph_norm = S::zero();
        for p in &pieces {
            for t in [p.lo, p.hi] {
                graph_norm = graph_norm.max(p.expr.eval(t, tie_tol)?.set_norm(NormKind::L2));
            }
        }
        Ok(Self {
            domain,
            pieces,
            breakpoints,
            graph_norm,
            tie_tol,
        })
    }

    pub fn domain(&self) -> (S, S) {
        self.domain
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece<S>] {
        &self.pieces
    }

    /// Cached bound `sup_t |F(t)|` (Euclidean).
    pub fn graph_norm(&self) -> S {
        self.graph_norm
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].expr.dim().unwrap()
    }

    pub fn evaluate(&self, t: S) -> Result<CompactSet<S>> {
        if !(t >= self.domain.0 && t <= self.domain.1) {
            return Err(Error::OutOfDomain {
                t: t.as_f64(),
                lo: self.domain.0.as_f64(),
                hi: self.domain.1.as_f64(),
            });
        }
        let piece = self
            .pieces
            .iter()
            .find(|p| p.contains(t))
            .expect("validated tiling covers the domain");
        piece.expr.eval(t, self.tie_tol)
    }

    /// Exact one-sided limit at `xi`: the adjacent piece is affine in `t`,
    /// so its limit is the expression evaluated at `xi` itself.
    pub fn one_sided_limit(&self, xi: S, side: Side) -> Result<CompactSet<S>> {
        let (a, b) = self.domain;
        match side {
            Side::Left => {
                if !(xi > a && xi <= b) {
                    return Err(Error::OutOfDomain {
                        t: xi.as_f64(),
                        lo: a.as_f64(),
                        hi: b.as_f64(),
                    });
                }
                let piece = self
                    .pieces
                    .iter()
                    .find(|p| p.lo < xi && xi <= p.hi)
                    .expect("validated tiling");
                piece.expr.eval(xi, self.tie_tol)
            }
            Side::Right => {
                if !(xi >= a && xi < b) {
                    return Err(Error::OutOfDomain {
                        t: xi.as_f64(),
                        lo: a.as_f64(),
                        hi: b.as_f64(),
                    });
                }
                let piece = self
                    .pieces
                    .iter()
                    .find(|p| p.lo <= xi && xi < p.hi)
                    .expect("validated tiling");
                piece.expr.eval(xi, self.tie_tol)
            }
        }
    }

    /// Numeric fallback: walk a shrinking delta schedule and declare the
    /// limit once consecutive evaluations are Cauchy. Works for any SVF, at
    /// sampled accuracy.
    pub fn one_sided_limit_numeric(
        &self,
        xi: S,
        side: Side,
        deltas: &[S],
        cfg: &Config<S>,
    ) -> Result<CompactSet<S>> {
        if deltas.len() < 2 {
            return Err(Error::InvalidInput("schedule needs at least two deltas".into()));
        }
        let mut prev: Option<CompactSet<S>> = None;
        let mut hits = 0usize;
        let tol_cauchy = cfg.tol.conv_tol;
        for &d in deltas {
            let t = match side {
                Side::Left => xi - d,
                Side::Right => xi + d,
            };
            let value = self.evaluate(t)?;
            if let Some(p) = &prev {
                let h = hausdorff(p, &value, cfg.norm, &cfg.tol);
                if h.value <= tol_cauchy {
                    hits += 1;
                    if hits >= 2 {
                        return Ok(value);
                    }
                } else {
                    hits = 0;
                }
            }
            prev = Some(value);
        }
        Err(Error::NonConvergence {
            what: format!("one-sided limit ({side:?})"),
            witness: xi.as_f64(),
            gap: f64::NAN,
        })
    }

    /// True when any piece adjacent to or containing `xi` has a continuous
    /// (ball) backend.
    pub fn continuous_near(&self, xi: S) -> bool {
        self.pieces
            .iter()
            .any(|p| p.lo <= xi && xi <= p.hi && !p.expr.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Strictly increasing grid `a = x_0 < ... < x_n = b` (at least two nodes).
#[derive(Clone, Debug)]
pub struct Partition<S> {
    nodes: Vec<S>,
}

impl<S: Scalar> Partition<S> {
    pub fn new(mut nodes: Vec<S>) -> Result<Self> {
        nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
        nodes.dedup();
        if nodes.len() < 2 {
            return Err(Error::InvalidPartition("need at least two distinct nodes".into()));
        }
        Ok(Self { nodes })
    }

    pub fn uniform(a: S, b: S, intervals: usize) -> Result<Self> {
        if intervals == 0 || !(a < b) {
            return Err(Error::InvalidPartition("need a < b and intervals >= 1".into()));
        }
        let n = S::from_usize(intervals).unwrap();
        let mut nodes: Vec<S> = (0..=intervals)
            .map(|i| a + (b - a) * S::from_usize(i).unwrap() / n)
            .collect();
        // guard against rounding on the last node
        *nodes.last_mut().unwrap() = b;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[S] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn span(&self) -> (S, S) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }

    /// Mesh norm: the largest gap.
    pub fn norm(&self) -> S {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(S::zero(), S::max)
    }

    /// Merge extra nodes (clipped to the span) into a new partition.
    pub fn refine_with(&self, extra: &[S]) -> Partition<S> {
        let (a, b) = self.span();
        let mut nodes = self.nodes.clone();
        nodes.extend(extra.iter().copied().filter(|x| *x >= a && *x <= b));
        Partition::new(nodes).expect("refinement keeps at least the original nodes")
    }

    /// Drop an interior node equal to `x` (used to keep a straddling grid).
    pub fn without(&self, x: S) -> Result<Partition<S>> {
        let nodes: Vec<S> = self.nodes.iter().copied().filter(|n| *n != x).collect();
        Partition::new(nodes)
    }

    /// Index of the step interval containing `x`: largest `i` with
    /// `nodes[i] <= x`.
    pub fn step_index(&self, x: S) -> Option<usize> {
        if x < self.nodes[0] || x > *self.nodes.last().unwrap() {
            return None;
        }
        let mut lo = 0usize;
        let mut hi = self.nodes.len() - 1;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.nodes[mid] <= x {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Some(lo)
    }
}

/// `V(F, chi) = sum haus(F(x_i), F(x_{i-1}))` with the accumulated
/// discretization bound of the sampled Hausdorff terms.
pub fn variation_on_partition<S: Scalar>(
    svf: &Svf<S>,
    chi: &Partition<S>,
    cfg: &Config<S>,
) -> Result<(S, S)> {
    let mut total = S::zero();
    let mut bound = S::zero();
    let mut prev = svf.evaluate(chi.nodes()[0])?;
    for &x in &chi.nodes()[1..] {
        let cur = svf.evaluate(x)?;
        let h = hausdorff(&prev, &cur, cfg.norm, &cfg.tol);
        total = total + h.value;
        bound = bound + h.error_bound;
        prev = cur;
    }
    Ok((total, bound))
}

/// Variation profile across a refinement schedule.
#[derive(Clone, Debug)]
pub struct VariationProfile<S> {
    pub grid: Partition<S>,
    /// `v_F` at the grid nodes, nondecreasing, `v_F(a) = 0`.
    pub values: Vec<S>,
    pub total: S,
    pub error_bound: S,
    pub converged: bool,
}

impl<S: Scalar> VariationProfile<S> {
    /// `v_F` at the largest grid node `<= x` (step interpolation).
    pub fn value_at(&self, x: S) -> S {
        match self.grid.step_index(x) {
            Some(i) => self.values[i],
            None => {
                if x < self.grid.nodes()[0] {
                    S::zero()
                } else {
                    self.total
                }
            }
        }
    }

    /// Grid estimate of the right quasi-modulus of `v_F` at `alpha`:
    /// `sup { v(x) - v(alpha+) : x in (alpha, alpha+delta] }`.
    pub fn quasi_modulus_plus(&self, alpha: S, delta: S) -> S {
        let nodes = self.grid.nodes();
        let v_plus = nodes
            .iter()
            .position(|&x| x > alpha)
            .map(|i| self.values[i])
            .unwrap_or(self.total);
        let hi = self.value_at(alpha + delta);
        (hi - v_plus).max(S::zero())
    }

    /// Grid estimate of the left quasi-modulus of `v_F` at `beta`:
    /// `sup { v(beta-) - v(x) : x in [beta-delta, beta) }`.
    pub fn quasi_modulus_minus(&self, beta: S, delta: S) -> S {
        let nodes = self.grid.nodes();
        let v_minus = nodes
            .iter()
            .rposition(|&x| x < beta)
            .map(|i| self.values[i])
            .unwrap_or(S::zero());
        let lo_idx = nodes
            .iter()
            .position(|&x| x >= beta - delta)
            .unwrap_or(0);
        (v_minus - self.values[lo_idx]).max(S::zero())
    }
}

/// Default refinement schedule: dyadic grids joined with the declared
/// breakpoints and a geometric ladder around each of them, so jump
/// contributions are resolved down to the ladder scale.
pub fn default_variation_schedule<S: Scalar>(svf: &Svf<S>, cfg: &Config<S>) -> Vec<Partition<S>> {
    let (a, b) = svf.domain();
    let mut extra: Vec<S> = svf.breakpoints().to_vec();
    for &xi in svf.breakpoints() {
        for d in cfg.ladder((a, b), xi) {
            extra.push(xi - d);
            extra.push(xi + d);
        }
    }
    (cfg.refine_min..=cfg.refine_max)
        .map(|k| {
            Partition::uniform(a, b, 1usize << k)
                .expect("valid domain")
                .refine_with(&extra)
        })
        .collect()
}

/// Monotone variation estimates across the schedule; converged once two
/// successive totals differ by less than `conv_tol`.
pub fn total_variation<S: Scalar>(
    svf: &Svf<S>,
    schedule: &[Partition<S>],
    cfg: &Config<S>,
) -> Result<VariationProfile<S>> {
    if schedule.is_empty() {
        return Err(Error::InvalidInput("empty refinement schedule".into()));
    }
    let mut prev_total: Option<S> = None;
    let mut converged = false;
    let mut last_idx = schedule.len() - 1;
    for (i, chi) in schedule.iter().enumerate() {
        let (total, _) = variation_on_partition(svf, chi, cfg)?;
        if let Some(p) = prev_total {
            if (total - p).abs() < cfg.tol.conv_tol {
                converged = true;
                last_idx = i;
                break;
            }
        }
        prev_total = Some(total);
        last_idx = i;
    }
    let grid = schedule[last_idx].clone();
    let mut values = Vec::with_capacity(grid.len());
    values.push(S::zero());
    let mut acc = S::zero();
    let mut bound = S::zero();
    let mut prev = svf.evaluate(grid.nodes()[0])?;
    for &x in &grid.nodes()[1..] {
        let cur = svf.evaluate(x)?;
        let h = hausdorff(&prev, &cur, cfg.norm, &cfg.tol);
        acc = acc + h.value;
        bound = bound + h.error_bound;
        values.push(acc);
        prev = cur;
    }
    Ok(VariationProfile {
        grid,
        values,
        total: acc,
        error_bound: bound,
        converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModulusKind {
    Omega,
    OmegaMinus,
    OmegaPlus,
    QuasiMinus,
    QuasiPlus,
}

#[derive(Clone, Copy, Debug)]
pub struct ModulusEstimate<S> {
    pub kind: ModulusKind,
    pub x_star: S,
    pub delta: S,
    pub value: S,
    pub grid_step: S,
}

/// Local moduli of continuity of the set values, estimated on a grid of
/// step at most `sample_eps`.
///
/// `Omega` is the symmetric modulus on the window `[x*-d/2, x*+d/2]`;
/// `OmegaMinus`/`OmegaPlus` compare one-sided windows against the value at
/// `x*`; the quasi kinds compare half-open windows against the one-sided
/// limit (spec'd on the open side, so the estimate carries a grid error).
pub fn local_modulus<S: Scalar>(
    svf: &Svf<S>,
    kind: ModulusKind,
    x_star: S,
    delta: S,
    cfg: &Config<S>,
) -> Result<ModulusEstimate<S>> {
    if delta <= S::zero() {
        return Err(Error::InvalidInput("delta must be positive".into()));
    }
    let (a, b) = svf.domain();
    let step = cfg.tol.sample_eps.min(delta / S::lit(16.0));
    let window = |lo: S, hi: S| -> Vec<S> {
        let lo = lo.max(a);
        let hi = hi.min(b);
        let n = ((hi - lo) / step).ceil().as_f64().max(1.0) as usize;
        let mut xs: Vec<S> = (0..=n)
            .map(|i| lo + (hi - lo) * S::from_usize(i).unwrap() / S::from_usize(n).unwrap())
            .collect();
        xs.push(x_star.max(lo).min(hi));
        xs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        xs.dedup();
        xs
    };
    let rho = |x: S, y: S| -> Result<S> {
        Ok(hausdorff(&svf.evaluate(x)?, &svf.evaluate(y)?, cfg.norm, &cfg.tol).value)
    };
    let value = match kind {
        ModulusKind::Omega => {
            let xs = window(x_star - delta * S::half(), x_star + delta * S::half());
            let sets: Vec<CompactSet<S>> = xs
                .iter()
                .map(|&x| svf.evaluate(x))
                .collect::<Result<Vec<_>>>()?;
            let mut sup = S::zero();
            for i in 0..sets.len() {
                for j in i + 1..sets.len() {
                    sup = sup.max(hausdorff(&sets[i], &sets[j], cfg.norm, &cfg.tol).value);
                }
            }
            sup
        }
        ModulusKind::OmegaMinus => {
            let xs = window(x_star - delta, x_star);
            let mut sup = S::zero();
            for &x in &xs {
                sup = sup.max(rho(x, x_star)?);
            }
            sup
        }
        ModulusKind::OmegaPlus => {
            let xs = window(x_star, x_star + delta);
            let mut sup = S::zero();
            for &x in &xs {
                sup = sup.max(rho(x, x_star)?);
            }
            sup
        }
        ModulusKind::QuasiMinus => {
            let limit = svf.one_sided_limit(x_star, Side::Left)?;
            let xs = window(x_star - delta, x_star);
            let mut sup = S::zero();
            for &x in &xs {
                if x < x_star {
                    sup = sup
                        .max(hausdorff(&limit, &svf.evaluate(x)?, cfg.norm, &cfg.tol).value);
                }
            }
            sup
        }
        ModulusKind::QuasiPlus => {
            let limit = svf.one_sided_limit(x_star, Side::Right)?;
            let xs = window(x_star, x_star + delta);
            let mut sup = S::zero();
            for &x in &xs {
                if x > x_star {
                    sup = sup
                        .max(hausdorff(&limit, &svf.evaluate(x)?, cfg.norm, &cfg.tol).value);
                }
            }
            sup
        }
    };
    Ok(ModulusEstimate {
        kind,
        x_star,
        delta,
        value,
        grid_step: step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config<f64> {
        Config::default()
    }

    fn pts(xs: &[f64]) -> SetExpr<f64> {
        SetExpr::Points(xs.iter().map(|&x| AffinePoint::constant(vec![x])).collect())
    }

    /// The one-dimensional jump example with a moving right piece:
    /// `{-1/4, 0, 1/4}` left of 1/2, five points at 1/2, two points drifting
    /// right of 1/2 at unit speed.
    fn moving_jump() -> Svf<f64> {
        let right = SetExpr::Points(vec![
            AffinePoint::new(vec![-1.5], vec![1.0]).unwrap(),
            AffinePoint::new(vec![0.5], vec![1.0]).unwrap(),
        ]);
        Svf::new(
            (0.0, 1.0),
            vec![
                Piece {
                    lo: 0.0,
                    hi: 0.5,
                    closed_lo: true,
                    closed_hi: false,
                    expr: pts(&[-0.25, 0.0, 0.25]),
                },
                Piece {
                    lo: 0.5,
                    hi: 0.5,
                    closed_lo: true,
                    closed_hi: true,
                    expr: pts(&[-1.0, -0.25, 0.0, 0.25, 1.0]),
                },
                Piece {
                    lo: 0.5,
                    hi: 1.0,
                    closed_lo: false,
                    closed_hi: true,
                    expr: right,
                },
            ],
            vec![0.5],
            1e-9,
        )
        .unwrap()
    }

    fn two_discs(with_origin: bool) -> Svf<f64> {
        let left = SetExpr::Balls(vec![AffineBall {
            center: AffinePoint::constant(vec![-2.0, 2.0]),
            radius: 1.0,
        }]);
        let right = SetExpr::Balls(vec![AffineBall {
            center: AffinePoint::constant(vec![2.0, 2.0]),
            radius: 1.0,
        }]);
        let mut at_members = vec![left.clone()];
        if with_origin {
            at_members.push(pts_2d(&[[0.0, 0.0]]));
        }
        at_members.push(right.clone());
        Svf::new(
            (0.0, 1.0),
            vec![
                Piece {
                    lo: 0.0,
                    hi: 0.5,
                    closed_lo: true,
                    closed_hi: false,
                    expr: left,
                },
                Piece {
                    lo: 0.5,
                    hi: 0.5,
                    closed_lo: true,
                    closed_hi: true,
                    expr: SetExpr::Union(at_members),
                },
                Piece {
                    lo: 0.5,
                    hi: 1.0,
                    closed_lo: false,
                    closed_hi: true,
                    expr: right,
                },
            ],
            vec![0.5],
            1e-9,
        )
        .unwrap()
    }

    fn pts_2d(coords: &[[f64; 2]]) -> SetExpr<f64> {
        SetExpr::Points(
            coords
                .iter()
                .map(|c| AffinePoint::constant(c.to_vec()))
                .collect(),
        )
    }

    #[test]
    fn evaluate_moving_piece() {
        let g = moving_jump();
        let at = g.evaluate(0.5).unwrap();
        assert_eq!(at.as_points().unwrap().len(), 5);
        let right = g.evaluate(0.6).unwrap();
        let values: Vec<f64> = right
            .as_points()
            .unwrap()
            .points()
            .iter()
            .map(|p| p.coords()[0])
            .collect();
        assert!((values[0] + 0.9).abs() < 1e-15);
        assert!((values[1] - 1.1).abs() < 1e-15);
        // constant piece evaluates to the same set anywhere inside
        let c1 = g.evaluate(0.1).unwrap();
        let c2 = g.evaluate(0.3).unwrap();
        assert!(hausdorff(&c1, &c2, NormKind::L2, &cfg().tol).value == 0.0);
        assert!(g.evaluate(1.5).is_err());
    }

    #[test]
    fn disc_fixture_value_at_jump() {
        let f = two_discs(true);
        let at = f.evaluate(0.5).unwrap();
        let origin = Point::new(vec![0.0, 0.0]).unwrap();
        assert!(at.contains(&origin, NormKind::L2, 1e-12));
        assert!(at.contains(&Point::new(vec![-2.0, 2.0]).unwrap(), NormKind::L2, 1e-12));
        assert!(at.contains(&Point::new(vec![3.0, 2.0]).unwrap(), NormKind::L2, 1e-12));
    }

    #[test]
    fn tiling_gaps_are_reported() {
        let bad = Svf::new(
            (0.0, 1.0),
            vec![
                Piece {
                    lo: 0.0,
                    hi: 0.4,
                    closed_lo: true,
                    closed_hi: true,
                    expr: pts(&[0.0]),
                },
                Piece {
                    lo: 0.5,
                    hi: 1.0,
                    closed_lo: true,
                    closed_hi: true,
                    expr: pts(&[0.0]),
                },
            ],
            vec![],
            1e-9,
        );
        let msg = format!("{}", bad.unwrap_err());
        assert!(msg.contains("0.4") && msg.contains("0.5"));
    }

    #[test]
    fn one_sided_limits_analytic() {
        let g = moving_jump();
        let left = g.one_sided_limit(0.5, Side::Left).unwrap();
        assert_eq!(left.as_points().unwrap().len(), 3);
        let right = g.one_sided_limit(0.5, Side::Right).unwrap();
        let values: Vec<f64> = right
            .as_points()
            .unwrap()
            .points()
            .iter()
            .map(|p| p.coords()[0])
            .collect();
        assert_eq!(values, vec![-1.0, 1.0]);
        // at a continuity point both limits equal the value
        let v = g.evaluate(0.25).unwrap();
        let l = g.one_sided_limit(0.25, Side::Left).unwrap();
        assert_eq!(hausdorff(&v, &l, NormKind::L2, &cfg().tol).value, 0.0);
    }

    #[test]
    fn one_sided_limit_numeric_agrees() {
        let cfg = cfg();
        let g = moving_jump();
        let deltas = cfg.ladder((0.0, 1.0), 0.5);
        // constant left piece: the numeric walk is exactly Cauchy
        let numeric = g
            .one_sided_limit_numeric(0.5, Side::Left, &deltas, &cfg)
            .unwrap();
        let analytic = g.one_sided_limit(0.5, Side::Left).unwrap();
        let h = hausdorff(&numeric, &analytic, NormKind::L2, &cfg.tol);
        assert_eq!(h.value, 0.0);

        // the moving right piece never meets the Cauchy threshold within the
        // schedule; the numeric fallback reports that instead of guessing
        assert!(matches!(
            g.one_sided_limit_numeric(0.5, Side::Right, &deltas, &cfg),
            Err(Error::NonConvergence { .. })
        ));

        let f = two_discs(false);
        let numeric = f
            .one_sided_limit_numeric(0.5, Side::Left, &deltas, &cfg)
            .unwrap();
        let analytic = f.one_sided_limit(0.5, Side::Left).unwrap();
        let h = hausdorff(&numeric, &analytic, NormKind::L2, &cfg.tol);
        assert!(h.value <= 2.0 * cfg.tol.sample_eps);
    }

    #[test]
    fn partition_basics() {
        let chi = Partition::<f64>::uniform(0.0, 1.0, 4).unwrap();
        assert_eq!(chi.len(), 5);
        assert!((chi.norm() - 0.25).abs() < 1e-15);
        assert_eq!(chi.step_index(0.3), Some(1));
        assert_eq!(chi.step_index(1.0), Some(4));
        assert!(chi.step_index(1.1).is_none());
        let refined = chi.refine_with(&[0.1, 0.5]);
        assert_eq!(refined.len(), 6);
        let without = refined.without(0.5).unwrap();
        assert_eq!(without.len(), 5);
        assert!(Partition::new(vec![0.3_f64]).is_err());
    }

    #[test]
    fn variation_of_constant_is_zero() {
        let g = moving_jump();
        let cfg = cfg();
        let chi = Partition::new(vec![0.0, 0.1, 0.2, 0.3]).unwrap();
        let (v, _) = variation_on_partition(&g, &chi, &cfg).unwrap();
        assert_eq!(v, 0.0);
        // two-node partition reduces to a single Hausdorff distance
        let chi = Partition::new(vec![0.0, 1.0]).unwrap();
        let (v, _) = variation_on_partition(&g, &chi, &cfg).unwrap();
        let expect = hausdorff(
            &g.evaluate(0.0).unwrap(),
            &g.evaluate(1.0).unwrap(),
            cfg.norm,
            &cfg.tol,
        )
        .value;
        assert_eq!(v, expect);
    }

    #[test]
    fn variation_across_jump_matches_per_gap_hausdorff() {
        let g = moving_jump();
        let cfg = cfg();
        let h = 1.0 / 16.0;
        let chi = Partition::new(vec![0.0, 0.5 - h, 0.5, 0.5 + h, 1.0]).unwrap();
        let (v, _) = variation_on_partition(&g, &chi, &cfg).unwrap();
        // per-gap brute force: 3/4 across the left jump, 1 - h across the
        // right jump, then the moving tail
        let expected = 0.75 + (1.0 - h) + (0.5 - h);
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn total_variation_of_moving_jump() {
        let g = moving_jump();
        let cfg = cfg();
        let schedule = default_variation_schedule(&g, &cfg);
        let profile = total_variation(&g, &schedule, &cfg).unwrap();
        assert!(profile.converged);
        // 3/4 + 1 + (b - xi), approached from below at the ladder scale
        assert!((profile.total - 2.25).abs() < 1e-5);
        for w in profile.values.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn total_variation_of_disc_fixture() {
        let f = two_discs(false);
        let cfg = cfg();
        let schedule = default_variation_schedule(&f, &cfg);
        let profile = total_variation(&f, &schedule, &cfg).unwrap();
        // both jump legs contribute haus = 4: far side of the other disc
        assert!((profile.total - 8.0).abs() < 1e-6 + 2.0 * profile.error_bound);
        assert!(profile.converged);
    }

    #[test]
    fn singleton_variation_reduces_to_scalar() {
        // F(t) = {t}: V = |f(b) - f(a)| = 1
        let f = Svf::new(
            (0.0, 1.0),
            vec![Piece {
                lo: 0.0,
                hi: 1.0,
                closed_lo: true,
                closed_hi: true,
                expr: SetExpr::Points(vec![AffinePoint::new(vec![0.0], vec![1.0]).unwrap()]),
            }],
            vec![],
            1e-9,
        )
        .unwrap();
        let cfg = cfg();
        let schedule = default_variation_schedule(&f, &cfg);
        let profile = total_variation(&f, &schedule, &cfg).unwrap();
        assert!((profile.total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moduli_on_the_jump_example() {
        let g = moving_jump();
        let cfg = cfg();
        // left modulus against the five-point value: 3/4
        let m = local_modulus(&g, ModulusKind::OmegaMinus, 0.5, 0.05, &cfg).unwrap();
        assert!((m.value - 0.75).abs() < 1e-12);
        // left quasi-modulus vanishes: constant left piece equals the limit
        let m = local_modulus(&g, ModulusKind::QuasiMinus, 0.5, 0.05, &cfg).unwrap();
        assert_eq!(m.value, 0.0);
        // right quasi-modulus equals delta: the sets translate at unit speed
        let m = local_modulus(&g, ModulusKind::QuasiPlus, 0.5, 0.05, &cfg).unwrap();
        assert!((m.value - 0.05).abs() < 1e-12);
        // constant function has zero moduli
        let m = local_modulus(&g, ModulusKind::Omega, 0.25, 0.1, &cfg).unwrap();
        assert_eq!(m.value, 0.0);
    }

    #[test]
    fn modulus_nondecreasing_in_delta() {
        let g = moving_jump();
        let cfg = cfg();
        // strict monotonicity at a continuity point of the moving piece
        let mut prev = 0.0;
        for i in 1..=8 {
            let delta = 0.02 * i as f64;
            let m = local_modulus(&g, ModulusKind::OmegaPlus, 0.7, delta, &cfg).unwrap();
            assert!(m.value >= prev - 1e-12);
            prev = m.value;
        }
        // at the jump the grid estimate may dip by its own step
        let mut prev = (0.0, 0.0);
        for i in 1..=8 {
            let delta = 0.02 * i as f64;
            let m = local_modulus(&g, ModulusKind::OmegaPlus, 0.5, delta, &cfg).unwrap();
            assert!(m.value >= prev.0 - (m.grid_step + prev.1));
            prev = (m.value, m.grid_step);
        }
    }

    #[test]
    fn lipschitz_singleton_omega() {
        let f = Svf::new(
            (0.0, 1.0),
            vec![Piece {
                lo: 0.0,
                hi: 1.0,
                closed_lo: true,
                closed_hi: true,
                expr: SetExpr::Points(vec![AffinePoint::new(vec![0.0], vec![1.0]).unwrap()]),
            }],
            vec![],
            1e-9,
        )
        .unwrap();
        let m = local_modulus(&f, ModulusKind::Omega, 0.5, 0.2, &cfg()).unwrap();
        // omega window has width delta, so sup |f(x1)-f(x2)| = delta
        assert!((m.value - 0.2).abs() < 1e-12);
    }

    #[test]
    fn graph_norm_cached() {
        let g = moving_jump();
        assert!((g.graph_norm() - 1.5).abs() < 1e-12);
        let f = two_discs(true);
        assert!((f.graph_norm() - (2.0 * 2.0_f64.sqrt() + 1.0)).abs() < 1e-12);
    }
}
