//! Chain functions, anchored chain constructions, and metric-selection
//! approximation over refining partitions.
//!
//! A chain function is a right-continuous step function whose node values
//! form a metric chain of the set values along a partition. Metric
//! selections arise as pointwise limits of chain functions when the mesh
//! norm tends to zero; here a selection is certified by a deterministic
//! construction (canonical tie-breaking) plus Cauchy detection on a fixed
//! evaluation grid, or rejected loudly.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{CompactSet, Point};
use crate::pairs::pair_defect;
use crate::scalar::Scalar;
use crate::svf::{Partition, Side, Svf};
use rayon::prelude::*;

/// How a selection is pinned down.
#[derive(Clone, Debug)]
pub enum AnchorMode<S> {
    /// Fix the value `y` at a node `x*` of the partition and project outward
    /// from there.
    AtNodeOutward { y: Point<S> },
    /// Keep `x*` out of the partition; set the two neighboring nodes to the
    /// projections of a metric pair of the one-sided limits, then project
    /// outward. The pair defect of the straddling edge is recorded.
    StraddlePair { y_minus: Point<S>, y_plus: Point<S> },
}

#[derive(Clone, Debug)]
pub struct Anchor<S> {
    pub x_star: S,
    pub mode: AnchorMode<S>,
}

impl<S: Scalar> Anchor<S> {
    pub fn at_node(x_star: S, y: Point<S>) -> Self {
        Self {
            x_star,
            mode: AnchorMode::AtNodeOutward { y },
        }
    }

    pub fn straddle(x_star: S, y_minus: Point<S>, y_plus: Point<S>) -> Self {
        Self {
            x_star,
            mode: AnchorMode::StraddlePair { y_minus, y_plus },
        }
    }

    pub fn is_straddle(&self) -> bool {
        matches!(self.mode, AnchorMode::StraddlePair { .. })
    }
}

/// Step function on a partition whose node values form a metric chain of
/// the evaluated sets.
#[derive(Clone, Debug)]
pub struct ChainFunction<S> {
    pub partition: Partition<S>,
    pub values: Vec<Point<S>>,
    /// Metric-pair defect of the straddling edge (zero for node anchors,
    /// whose edges are projections by construction).
    pub pair_defect: S,
    /// How far the straddle projections moved from the anchoring pair.
    pub straddle_drift: S,
}

impl<S: Scalar> ChainFunction<S> {
    /// `y_i` on `[x_i, x_{i+1})`, `y_n` at the right end.
    pub fn eval(&self, x: S) -> Result<&Point<S>> {
        let idx = self.partition.step_index(x).ok_or_else(|| {
            let (a, b) = self.partition.span();
            Error::OutOfDomain {
                t: x.as_f64(),
                lo: a.as_f64(),
                hi: b.as_f64(),
            }
        })?;
        Ok(&self.values[idx])
    }

    /// Variation of the step function between `lo` and `hi`.
    pub fn variation_between(&self, lo: S, hi: S) -> S {
        let nodes = self.partition.nodes();
        let mut acc = S::zero();
        let mut prev: Option<&Point<S>> = None;
        for (i, &x) in nodes.iter().enumerate() {
            if x < lo || x > hi {
                if x > hi {
                    break;
                }
                continue;
            }
            if prev.is_none() && i > 0 && nodes[i - 1] < lo {
                // the step holding at lo starts at the previous node
                prev = Some(&self.values[i - 1]);
            }
            if let Some(p) = prev {
                acc = acc + p.dist(&self.values[i], crate::geometry::NormKind::L2);
            }
            prev = Some(&self.values[i]);
        }
        acc
    }
}

/// Build a chain function anchored per `anchor` on the partition `chi`.
///
/// Node anchors require `x*` to be a node and `y* in F(x*)`; outward values
/// are canonical projections of the neighbor value. Straddle anchors require
/// `x*` to lie strictly between two nodes; the neighbors get the projections
/// of the anchoring pair onto their sets.
pub fn build_anchored_chain<S: Scalar>(
    svf: &Svf<S>,
    chi: &Partition<S>,
    anchor: &Anchor<S>,
    cfg: &Config<S>,
) -> Result<ChainFunction<S>> {
    let nodes = chi.nodes();
    let sets: Vec<CompactSet<S>> = nodes
        .iter()
        .map(|&x| svf.evaluate(x))
        .collect::<Result<Vec<_>>>()?;
    let tie = cfg.tol.tie_tol;
    let mut values: Vec<Option<Point<S>>> = vec![None; nodes.len()];
    let mut defect = S::zero();
    let mut drift = S::zero();

    let (left_seed, right_seed) = match &anchor.mode {
        AnchorMode::AtNodeOutward { y } => {
            let j = nodes
                .iter()
                .position(|&x| x == anchor.x_star)
                .ok_or_else(|| {
                    Error::InvalidPartition(format!(
                        "anchor node {} missing from partition",
                        anchor.x_star.as_f64()
                    ))
                })?;
            let dist = sets[j].distance(y, cfg.norm);
            if dist > tie {
                return Err(Error::InvalidAnchor {
                    dist: dist.as_f64(),
                    tol: tie.as_f64(),
                });
            }
            values[j] = Some(y.clone());
            (j, j)
        }
        AnchorMode::StraddlePair { y_minus, y_plus } => {
            if nodes.iter().any(|&x| x == anchor.x_star) {
                return Err(Error::InvalidPartition(
                    "straddle anchor requires the partition to exclude x*".into(),
                ));
            }
            let i_plus = nodes
                .iter()
                .position(|&x| x > anchor.x_star)
                .ok_or_else(|| Error::InvalidPartition("x* beyond the partition".into()))?;
            if i_plus == 0 {
                return Err(Error::InvalidPartition("x* before the partition".into()));
            }
            let i_minus = i_plus - 1;
            let ym = sets[i_minus].project_canonical(y_minus, cfg.norm, tie);
            let yp = sets[i_plus].project_canonical(y_plus, cfg.norm, tie);
            drift = ym.dist(y_minus, cfg.norm).max(yp.dist(y_plus, cfg.norm));
            defect = pair_defect(&ym, &yp, &sets[i_minus], &sets[i_plus], cfg);
            values[i_minus] = Some(ym);
            values[i_plus] = Some(yp);
            (i_minus, i_plus)
        }
    };

    for i in (0..left_seed).rev() {
        let prev = values[i + 1].as_ref().unwrap();
        values[i] = Some(sets[i].project_canonical(prev, cfg.norm, tie));
    }
    for i in right_seed + 1..nodes.len() {
        let prev = values[i - 1].as_ref().unwrap();
        values[i] = Some(sets[i].project_canonical(prev, cfg.norm, tie));
    }

    Ok(ChainFunction {
        partition: chi.clone(),
        values: values.into_iter().map(|v| v.unwrap()).collect(),
        pair_defect: defect,
        straddle_drift: drift,
    })
}

/// One-sided values of a selection at an interior point, obtained by linear
/// extrapolation on the innermost ladder probes.
#[derive(Clone, Debug)]
pub struct OneSided<S> {
    pub minus: Point<S>,
    pub plus: Point<S>,
    /// Achieved extrapolation residual, the worse of the two sides.
    pub gap: S,
}

/// Grid-sampled metric selection with convergence diagnostics.
#[derive(Clone, Debug)]
pub struct SelectionApprox<S> {
    pub anchor: Anchor<S>,
    pub grid: Partition<S>,
    pub values: Vec<Point<S>>,
    pub refinement_level: usize,
    /// Max node-wise movement in the last refinement step.
    pub cauchy_gap: S,
    pub converged: bool,
    /// Max distance of a grid value from `F(x)` over all grid nodes.
    pub containment_defect: S,
    /// Straddle-edge pair defect at the final level.
    pub pair_defect: S,
    pub straddle_drift: S,
    pub chain: Option<ChainFunction<S>>,
}

impl<S: Scalar> SelectionApprox<S> {
    /// Step evaluation at an arbitrary domain point.
    pub fn eval(&self, x: S) -> Result<&Point<S>> {
        let idx = self.grid.step_index(x).ok_or_else(|| {
            let (a, b) = self.grid.span();
            Error::OutOfDomain {
                t: x.as_f64(),
                lo: a.as_f64(),
                hi: b.as_f64(),
            }
        })?;
        Ok(&self.values[idx])
    }

    /// Grid variation of the selection values.
    pub fn grid_variation(&self, cfg: &Config<S>) -> S {
        self.values
            .windows(2)
            .map(|w| w[0].dist(&w[1], cfg.norm))
            .fold(S::zero(), |acc, d| acc + d)
    }

    /// Sup norm over the grid values.
    pub fn sup_norm(&self, cfg: &Config<S>) -> S {
        self.values
            .iter()
            .map(|p| p.norm(cfg.norm))
            .fold(S::zero(), S::max)
    }

    /// Passes the per-selection validity gates.
    pub fn is_valid(&self, cfg: &Config<S>) -> bool {
        self.converged
            && self.pair_defect <= cfg.pair_tol
            && self.containment_defect <= cfg.tol.tie_tol
    }

    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                what: "metric selection refinement".into(),
                witness: self.anchor.x_star.as_f64(),
                gap: self.cauchy_gap.as_f64(),
            })
        }
    }

    /// Maximal window around `x*` on which the grid values stay constant.
    pub fn constancy_window(&self, x_star: S, tol: S, cfg: &Config<S>) -> (S, S) {
        let nodes = self.grid.nodes();
        let center = match self.grid.step_index(x_star) {
            Some(i) => i,
            None => return (x_star, x_star),
        };
        let reference = &self.values[center];
        let mut lo = nodes[center];
        let mut hi = if center + 1 < nodes.len() {
            nodes[center + 1]
        } else {
            nodes[center]
        };
        let mut i = center;
        while i > 0 && self.values[i - 1].dist(reference, cfg.norm) <= tol {
            i -= 1;
            lo = nodes[i];
        }
        let mut i = center + 1;
        while i < nodes.len() && self.values[i].dist(reference, cfg.norm) <= tol {
            hi = nodes[i];
            i += 1;
        }
        (lo, hi)
    }
}

/// Evaluation grid: uniform probes joined with the domain ends, declared
/// breakpoints, the focus points and their geometric ladders, plus any
/// caller-supplied probes.
pub fn probe_grid<S: Scalar>(
    svf: &Svf<S>,
    focus: &[S],
    extra: &[S],
    cfg: &Config<S>,
) -> Partition<S> {
    let (a, b) = svf.domain();
    let mut nodes: Vec<S> = Partition::uniform(a, b, cfg.probe_count.max(2))
        .expect("valid domain")
        .nodes()
        .to_vec();
    nodes.extend_from_slice(svf.breakpoints());
    for &xi in focus {
        nodes.push(xi);
        for d in cfg.ladder((a, b), xi) {
            nodes.push(xi - d);
            nodes.push(xi + d);
        }
    }
    nodes.extend(extra.iter().copied().filter(|x| *x >= a && *x <= b));
    Partition::new(nodes).expect("at least the uniform probes")
}

/// Construction partition for refinement level `k`: the dyadic grid joined
/// with every probe node, adjusted so the anchor mode holds (`x*` inserted
/// for node anchors, removed for straddle anchors).
fn refinement_partition<S: Scalar>(
    svf: &Svf<S>,
    level: usize,
    grid: &Partition<S>,
    anchor: &Anchor<S>,
    _cfg: &Config<S>,
) -> Result<Partition<S>> {
    let (a, b) = svf.domain();
    let dyadic = Partition::uniform(a, b, 1usize << level)?;
    let mut merged = dyadic.refine_with(grid.nodes());
    match anchor.mode {
        AnchorMode::AtNodeOutward { .. } => {
            merged = merged.refine_with(&[anchor.x_star]);
        }
        AnchorMode::StraddlePair { .. } => {
            merged = merged.without(anchor.x_star)?;
        }
    }
    Ok(merged)
}

/// Worst distance of a grid value from the graph of `F`. Each step value is
/// checked against the set at the chain node it originates from, so a probe
/// strictly between chain nodes (the straddle focus) is attributed to its
/// step source rather than to itself.
fn containment_defect<S: Scalar>(
    svf: &Svf<S>,
    grid: &Partition<S>,
    values: &[Point<S>],
    chain: &ChainFunction<S>,
    cfg: &Config<S>,
) -> Result<S> {
    let mut worst = S::zero();
    for (&x, v) in grid.nodes().iter().zip(values) {
        let source = match chain.partition.step_index(x) {
            Some(i) => chain.partition.nodes()[i],
            None => x,
        };
        worst = worst.max(svf.evaluate(source)?.distance(v, cfg.norm));
    }
    Ok(worst)
}

/// Approximate the metric selection pinned by `anchor`, evaluated on `grid`.
/// Chains are built on refining partitions; convergence is declared after
/// the node-wise movement stays below `conv_tol` twice in a row. Never
/// errors on non-convergence — the flag and the witness gap are recorded.
pub fn metric_selection_diagnostic<S: Scalar>(
    svf: &Svf<S>,
    anchor: &Anchor<S>,
    grid: &Partition<S>,
    cfg: &Config<S>,
) -> Result<SelectionApprox<S>> {
    let mut prev: Option<Vec<Point<S>>> = None;
    let mut gap = S::infinity();
    let mut hits = 0usize;
    let mut converged = false;
    let mut level_used = cfg.refine_min;
    let mut last_chain: Option<ChainFunction<S>> = None;

    for level in cfg.refine_min..=cfg.refine_max {
        let chi = refinement_partition(svf, level, grid, anchor, cfg)?;
        let chain = build_anchored_chain(svf, &chi, anchor, cfg)?;
        let values: Vec<Point<S>> = grid
            .nodes()
            .iter()
            .map(|&x| chain.eval(x).map(Clone::clone))
            .collect::<Result<Vec<_>>>()?;
        if let Some(p) = &prev {
            gap = p
                .iter()
                .zip(&values)
                .map(|(u, v)| u.dist(v, cfg.norm))
                .fold(S::zero(), S::max);
            if gap < cfg.tol.conv_tol {
                hits += 1;
            } else {
                hits = 0;
            }
        }
        level_used = level;
        prev = Some(values);
        last_chain = Some(chain);
        if hits >= 2 {
            converged = true;
            break;
        }
    }

    let values = prev.expect("at least one refinement level");
    let chain = last_chain.expect("at least one refinement level");
    let containment = containment_defect(svf, grid, &values, &chain, cfg)?;
    Ok(SelectionApprox {
        anchor: anchor.clone(),
        grid: grid.clone(),
        values,
        refinement_level: level_used,
        cauchy_gap: gap,
        converged,
        containment_defect: containment,
        pair_defect: chain.pair_defect,
        straddle_drift: chain.straddle_drift,
        chain: if cfg.keep_chains { Some(chain) } else { None },
    })
}

/// As [`metric_selection_diagnostic`], but non-convergence is an error.
pub fn metric_selection<S: Scalar>(
    svf: &Svf<S>,
    anchor: &Anchor<S>,
    grid: &Partition<S>,
    cfg: &Config<S>,
) -> Result<SelectionApprox<S>> {
    metric_selection_diagnostic(svf, anchor, grid, cfg)?.into_converged()
}

/// One-sided values `(s(xi-), s(xi+))` by linear extrapolation through the
/// two innermost ladder probes; the fit is validated on the third rung.
pub fn selection_one_sided<S: Scalar>(
    s: &SelectionApprox<S>,
    xi: S,
    cfg: &Config<S>,
) -> Result<OneSided<S>> {
    let (a, b) = s.grid.span();
    if !(xi > a && xi < b) {
        return Err(Error::OutOfDomain {
            t: xi.as_f64(),
            lo: a.as_f64(),
            hi: b.as_f64(),
        });
    }
    let deltas = cfg.ladder((a, b), xi);
    if deltas.len() < 3 {
        return Err(Error::InvalidInput(
            "point too close to the boundary for a one-sided ladder".into(),
        ));
    }
    let scale = S::one() + s.sup_norm(cfg);
    let tol = cfg.one_sided_tol * scale;
    let side = |sign: S| -> Result<(Point<S>, S)> {
        let n = deltas.len();
        let probe = |k: usize| -> Result<&Point<S>> { s.eval(xi + sign * deltas[k]) };
        let v1 = probe(n - 1)?; // innermost
        let v2 = probe(n - 2)?;
        let v3 = probe(n - 3)?;
        let d1 = deltas[n - 1];
        let d2 = deltas[n - 2];
        let d3 = deltas[n - 3];
        // linear fit through (d1, v1), (d2, v2), evaluated at 0 and at d3
        let denom = d2 - d1;
        let mut limit = Vec::with_capacity(v1.dim());
        let mut residual = S::zero();
        for i in 0..v1.dim() {
            let slope = (v2.coords()[i] - v1.coords()[i]) / denom;
            limit.push(v1.coords()[i] - slope * d1);
            let predicted = v1.coords()[i] + slope * (d3 - d1);
            residual = residual.max((predicted - v3.coords()[i]).abs());
        }
        if residual > tol {
            return Err(Error::NonConvergence {
                what: "one-sided extrapolation".into(),
                witness: (xi + sign * d1).as_f64(),
                gap: residual.as_f64(),
            });
        }
        Ok((Point::new(limit)?, residual))
    };
    let (minus, g1) = side(-S::one())?;
    let (plus, g2) = side(S::one())?;
    Ok(OneSided {
        minus,
        plus,
        gap: g1.max(g2),
    })
}

#[derive(Clone, Copy, Debug, Default)]
pub struct FamilyCensus {
    pub at_node_anchors: usize,
    pub straddle_anchors: usize,
    pub converged: usize,
    pub valid: usize,
    pub flagged: usize,
}

/// Light per-member record kept when a family is streamed.
#[derive(Clone, Debug)]
pub struct SelectionSummary<S> {
    pub anchor: Anchor<S>,
    pub converged: bool,
    pub valid: bool,
    pub pair_defect: S,
    pub straddle_drift: S,
    pub containment_defect: S,
    pub grid_variation: S,
    pub sup_norm: S,
    pub one_sided: Option<OneSided<S>>,
}

/// Anchors of the selection family at `xi`: node anchors at net points of
/// `F(xi)`, `F(xi-)`, `F(xi+)` (deduplicated) and one straddle anchor per
/// metric pair of the one-sided limits.
pub fn family_anchors<S: Scalar>(svf: &Svf<S>, xi: S, cfg: &Config<S>) -> Result<Vec<Anchor<S>>> {
    let eps = cfg.anchor_eps();
    let f_at = svf.evaluate(xi)?;
    let f_minus = svf.one_sided_limit(xi, Side::Left)?;
    let f_plus = svf.one_sided_limit(xi, Side::Right)?;
    let mut points = f_at.sample(eps, cfg.norm).points().to_vec();
    points.extend_from_slice(f_minus.sample(eps, cfg.norm).points());
    points.extend_from_slice(f_plus.sample(eps, cfg.norm).points());
    let points = crate::geometry::dedup_points(points, cfg.tol.tie_tol);
    let mut anchors: Vec<Anchor<S>> = points
        .into_iter()
        .filter(|p| f_at.contains(p, cfg.norm, cfg.tol.tie_tol))
        .map(|p| Anchor::at_node(xi, p))
        .collect();
    let pairs = crate::pairs::metric_pairs(&f_minus, &f_plus, cfg)?;
    anchors.extend(
        pairs
            .into_iter()
            .map(|p| Anchor::straddle(xi, p.a, p.b)),
    );
    Ok(anchors)
}

/// Build the family and map every member through `f`, keeping only the
/// summaries and mapped outputs. Members are built in parallel; the output
/// order follows the anchor order, so results are deterministic.
pub fn selection_family_map<S, T, F>(
    svf: &Svf<S>,
    xi: S,
    extra_probes: &[S],
    cfg: &Config<S>,
    f: F,
) -> Result<(Vec<(SelectionSummary<S>, T)>, FamilyCensus)>
where
    S: Scalar,
    T: Send,
    F: Fn(&SelectionApprox<S>) -> T + Sync,
{
    let anchors = family_anchors(svf, xi, cfg)?;
    let grid = probe_grid(svf, &[xi], extra_probes, cfg);
    let out: Vec<Result<(SelectionSummary<S>, T)>> = anchors
        .par_iter()
        .map(|anchor| {
            let approx = metric_selection_diagnostic(svf, anchor, &grid, cfg)?;
            let one_sided = selection_one_sided(&approx, xi, cfg).ok();
            let valid = approx.is_valid(cfg) && one_sided.is_some();
            let summary = SelectionSummary {
                anchor: anchor.clone(),
                converged: approx.converged,
                valid,
                pair_defect: approx.pair_defect,
                straddle_drift: approx.straddle_drift,
                containment_defect: approx.containment_defect,
                grid_variation: approx.grid_variation(cfg),
                sup_norm: approx.sup_norm(cfg),
                one_sided,
            };
            let mapped = f(&approx);
            Ok((summary, mapped))
        })
        .collect();
    let mut census = FamilyCensus::default();
    let mut members = Vec::with_capacity(out.len());
    for (anchor, item) in anchors.iter().zip(out) {
        if anchor.is_straddle() {
            census.straddle_anchors += 1;
        } else {
            census.at_node_anchors += 1;
        }
        match item {
            Ok((summary, mapped)) => {
                if summary.converged {
                    census.converged += 1;
                }
                if summary.valid {
                    census.valid += 1;
                } else {
                    census.flagged += 1;
                }
                members.push((summary, mapped));
            }
            Err(_) => census.flagged += 1,
        }
    }
    Ok((members, census))
}

/// Full selection family at `xi`: converged members are returned, the rest
/// are flagged in the census. Retains every grid; use the anchor net
/// resolution (`cfg.anchor_eps`) to keep this affordable on continuous sets.
pub fn selection_family<S: Scalar>(
    svf: &Svf<S>,
    xi: S,
    cfg: &Config<S>,
) -> Result<(Vec<SelectionApprox<S>>, FamilyCensus)> {
    let (members, census) =
        selection_family_map(svf, xi, &[], cfg, |approx| approx.clone())?;
    if census.valid == 0 {
        return Err(Error::EmptyFamily {
            flagged: census.flagged,
        });
    }
    Ok((members.into_iter().map(|(_, a)| a).collect(), census))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::NormKind;
    use crate::svf::{AffineBall, AffinePoint, Piece, SetExpr};

    fn cfg() -> Config<f64> {
        Config::default()
    }

    fn pt1(x: f64) -> Point<f64> {
        Point::new(vec![x]).unwrap()
    }

    fn pts(xs: &[f64]) -> SetExpr<f64> {
        SetExpr::Points(xs.iter().map(|&x| AffinePoint::constant(vec![x])).collect())
    }

    fn moving_jump() -> Svf<f64> {
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
                    expr: SetExpr::Points(vec![
                        AffinePoint::new(vec![-1.5], vec![1.0]).unwrap(),
                        AffinePoint::new(vec![0.5], vec![1.0]).unwrap(),
                    ]),
                },
            ],
            vec![0.5],
            1e-9,
        )
        .unwrap()
    }

    fn constant_svf(value: &[f64]) -> Svf<f64> {
        Svf::new(
            (0.0, 1.0),
            vec![Piece {
                lo: 0.0,
                hi: 1.0,
                closed_lo: true,
                closed_hi: true,
                expr: pts(value),
            }],
            vec![],
            1e-9,
        )
        .unwrap()
    }

    fn disc_svf() -> Svf<f64> {
        let left = SetExpr::Balls(vec![AffineBall {
            center: AffinePoint::constant(vec![-2.0, 2.0]),
            radius: 1.0,
        }]);
        let right = SetExpr::Balls(vec![AffineBall {
            center: AffinePoint::constant(vec![2.0, 2.0]),
            radius: 1.0,
        }]);
        Svf::new(
            (0.0, 1.0),
            vec![
                Piece {
                    lo: 0.0,
                    hi: 0.5,
                    closed_lo: true,
                    closed_hi: false,
                    expr: left.clone(),
                },
                Piece {
                    lo: 0.5,
                    hi: 0.5,
                    closed_lo: true,
                    closed_hi: true,
                    expr: SetExpr::Union(vec![
                        left,
                        SetExpr::Points(vec![AffinePoint::constant(vec![0.0, 0.0])]),
                        right.clone(),
                    ]),
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

    #[test]
    fn chain_function_step_convention() {
        let g = constant_svf(&[0.0, 2.0]);
        let chi = Partition::new(vec![0.0, 0.25, 0.5, 1.0]).unwrap();
        let anchor = Anchor::at_node(0.25, pt1(2.0));
        let cfg = cfg();
        let c = build_anchored_chain(&g, &chi, &anchor, &cfg).unwrap();
        // value at a node is that node's chain value
        assert_eq!(c.eval(0.25).unwrap(), &pt1(2.0));
        // right-continuous step: just below the next node the value holds
        assert_eq!(c.eval(0.4999).unwrap(), &pt1(2.0));
        // the right endpoint takes the last node value
        assert_eq!(c.eval(1.0).unwrap(), &c.values[3]);
        assert!(c.eval(1.5).is_err());
    }

    #[test]
    fn anchored_chain_on_jump_example() {
        let g = moving_jump();
        let cfg = cfg();
        let grid = probe_grid(&g, &[0.5], &[], &cfg);
        let anchor = Anchor::at_node(0.5, pt1(0.0));
        let chi = refinement_partition(&g, 4, &grid, &anchor, &cfg).unwrap();
        let c = build_anchored_chain(&g, &chi, &anchor, &cfg).unwrap();
        // constant 0 on the left, the lower moving track on the right
        assert_eq!(c.eval(0.2).unwrap(), &pt1(0.0));
        assert_eq!(c.eval(0.5).unwrap(), &pt1(0.0));
        let nodes = c.partition.nodes();
        for (&x, v) in nodes.iter().zip(&c.values) {
            if x > 0.5 {
                assert!((v.coords()[0] - (-1.0 + x - 0.5)).abs() < 1e-12);
            }
        }
        assert_eq!(c.pair_defect, 0.0);
    }

    #[test]
    fn invalid_anchor_rejected() {
        let g = moving_jump();
        let cfg = cfg();
        let grid = probe_grid(&g, &[0.5], &[], &cfg);
        let anchor = Anchor::at_node(0.5, pt1(0.4));
        let chi = refinement_partition(&g, 4, &grid, &anchor, &cfg).unwrap();
        assert!(matches!(
            build_anchored_chain(&g, &chi, &anchor, &cfg),
            Err(Error::InvalidAnchor { .. })
        ));
    }

    #[test]
    fn straddle_chain_on_disc_fixture() {
        let f = disc_svf();
        let cfg = cfg();
        let y_minus = Point::new(vec![-1.0, 2.0]).unwrap();
        let y_plus = Point::new(vec![1.0, 2.0]).unwrap();
        let anchor = Anchor::straddle(0.5, y_minus.clone(), y_plus.clone());
        let grid = probe_grid(&f, &[0.5], &[], &cfg);
        let chi = refinement_partition(&f, 4, &grid, &anchor, &cfg).unwrap();
        let c = build_anchored_chain(&f, &chi, &anchor, &cfg).unwrap();
        // projections within constant discs are identities on anchored points
        assert_eq!(c.eval(0.2).unwrap(), &y_minus);
        assert_eq!(c.eval(0.9).unwrap(), &y_plus);
        assert_eq!(c.pair_defect, 0.0);
        assert_eq!(c.straddle_drift, 0.0);
    }

    #[test]
    fn selection_on_jump_example_anchored_at_zero() {
        let g = moving_jump();
        let cfg = cfg();
        let grid = probe_grid(&g, &[0.5], &[], &cfg);
        let s = metric_selection(&g, &Anchor::at_node(0.5, pt1(0.0)), &grid, &cfg).unwrap();
        assert!(s.converged);
        assert_eq!(s.containment_defect, 0.0);
        let one_sided = selection_one_sided(&s, 0.5, &cfg).unwrap();
        assert!((one_sided.minus.coords()[0] - 0.0).abs() < 1e-9);
        assert!((one_sided.plus.coords()[0] - (-1.0)).abs() < 1e-9);
    }

    #[test]
    fn selection_through_constant_svf_is_constant() {
        let f = constant_svf(&[0.7]);
        let cfg = cfg();
        let grid = probe_grid(&f, &[0.5], &[], &cfg);
        let s = metric_selection(&f, &Anchor::at_node(0.5, pt1(0.7)), &grid, &cfg).unwrap();
        assert!(s.values.iter().all(|v| v == &pt1(0.7)));
        let one_sided = selection_one_sided(&s, 0.5, &cfg).unwrap();
        assert_eq!(one_sided.minus, pt1(0.7));
        assert_eq!(one_sided.plus, pt1(0.7));
        assert_eq!(one_sided.gap, 0.0);
    }

    #[test]
    fn selection_on_disc_fixture_anchored_at_origin() {
        let f = disc_svf();
        let cfg = cfg();
        let grid = probe_grid(&f, &[0.5], &[], &cfg);
        let s = metric_selection(
            &f,
            &Anchor::at_node(0.5, Point::new(vec![0.0, 0.0]).unwrap()),
            &grid,
            &cfg,
        )
        .unwrap();
        let one_sided = selection_one_sided(&s, 0.5, &cfg).unwrap();
        let h = 2.0_f64.sqrt() / 2.0;
        assert!((one_sided.minus.coords()[0] - (-2.0 + h)).abs() < 1e-9);
        assert!((one_sided.minus.coords()[1] - (2.0 - h)).abs() < 1e-9);
        assert!((one_sided.plus.coords()[0] - (2.0 - h)).abs() < 1e-9);
        assert!((one_sided.plus.coords()[1] - (2.0 - h)).abs() < 1e-9);
    }

    #[test]
    fn straddle_pair_defect_flags_unstable_pair() {
        // the pair (0, 1) of the one-sided limits of the moving example is
        // not approachable: the projected straddle edge is never a pair
        let g = moving_jump();
        let cfg = cfg();
        let grid = probe_grid(&g, &[0.5], &[], &cfg);
        let anchor = Anchor::straddle(0.5, pt1(0.0), pt1(1.0));
        let s = metric_selection_diagnostic(&g, &anchor, &grid, &cfg).unwrap();
        assert!(s.pair_defect > 0.2);
        assert!(!s.is_valid(&cfg));

        // (1/4, 1) is approachable and the selection reproduces it
        let anchor = Anchor::straddle(0.5, pt1(0.25), pt1(1.0));
        let s = metric_selection_diagnostic(&g, &anchor, &grid, &cfg).unwrap();
        assert!(s.is_valid(&cfg));
        let one_sided = selection_one_sided(&s, 0.5, &cfg).unwrap();
        assert!((one_sided.minus.coords()[0] - 0.25).abs() < 1e-9);
        assert!((one_sided.plus.coords()[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn interior_anchor_is_locally_constant() {
        let f = disc_svf();
        let cfg = cfg();
        let grid = probe_grid(&f, &[0.25], &[], &cfg);
        let s = metric_selection(
            &f,
            &Anchor::at_node(0.25, Point::new(vec![-2.0, 2.0]).unwrap()),
            &grid,
            &cfg,
        )
        .unwrap();
        let (lo, hi) = s.constancy_window(0.25, 1e-12, &cfg);
        assert!(lo < 0.25 && hi > 0.25);
        // the whole left piece is constant for this anchor
        assert!(hi >= 0.499);
    }

    #[test]
    fn anchor_in_both_limits_gives_continuous_selection() {
        // overlapping one-sided limits at the breakpoint: {0, 2} meets {0, 5}
        let h = Svf::new(
            (0.0, 1.0),
            vec![
                Piece {
                    lo: 0.0,
                    hi: 0.5,
                    closed_lo: true,
                    closed_hi: false,
                    expr: pts(&[0.0, 2.0]),
                },
                Piece {
                    lo: 0.5,
                    hi: 0.5,
                    closed_lo: true,
                    closed_hi: true,
                    expr: pts(&[0.0, 2.0, 5.0]),
                },
                Piece {
                    lo: 0.5,
                    hi: 1.0,
                    closed_lo: false,
                    closed_hi: true,
                    expr: pts(&[0.0, 5.0]),
                },
            ],
            vec![0.5],
            1e-9,
        )
        .unwrap();
        let cfg = cfg();
        let grid = probe_grid(&h, &[0.5], &[], &cfg);
        let s = metric_selection(&h, &Anchor::at_node(0.5, pt1(0.0)), &grid, &cfg).unwrap();
        let one_sided = selection_one_sided(&s, 0.5, &cfg).unwrap();
        assert_eq!(one_sided.minus, pt1(0.0));
        assert_eq!(one_sided.plus, pt1(0.0));
        assert_eq!(s.eval(0.5).unwrap(), &pt1(0.0));
    }

    #[test]
    fn family_on_jump_example() {
        let g = moving_jump();
        let cfg = cfg();
        let (members, census) = selection_family(&g, 0.5, &cfg).unwrap();
        assert_eq!(census.at_node_anchors, 5);
        assert_eq!(census.straddle_anchors, 4);
        // the (0,1) straddle anchor is flagged, everything else converges
        assert_eq!(census.flagged, 1);
        assert_eq!(census.valid, 8);
        assert_eq!(members.len(), 9);
    }

    #[test]
    fn family_covers_the_value_at_the_anchor_point() {
        let g = moving_jump();
        let cfg = cfg();
        let (members, _) = selection_family(&g, 0.5, &cfg).unwrap();
        let f_at = g.evaluate(0.5).unwrap();
        // every point of F(xi) is some member's value at xi
        for target in f_at.as_points().unwrap().points() {
            let hit = members.iter().any(|s| {
                s.is_valid(&cfg) && s.eval(0.5).unwrap().dist(target, cfg.norm) <= 1e-9
            });
            assert!(hit, "no member passes through {target:?}");
        }
    }

    #[test]
    fn variation_between_counts_the_entry_step() {
        let g = moving_jump();
        let cfg = cfg();
        let grid = probe_grid(&g, &[0.5], &[], &cfg);
        let s = metric_selection(&g, &Anchor::at_node(0.5, pt1(0.0)), &grid, &cfg).unwrap();
        let chain_cfg = Config {
            keep_chains: true,
            ..cfg.clone()
        };
        let s2 =
            metric_selection(&g, &Anchor::at_node(0.5, pt1(0.0)), &grid, &chain_cfg).unwrap();
        let chain = s2.chain.as_ref().unwrap();
        // jump of size ~1 at xi plus the drift of the moving piece
        let v = chain.variation_between(0.4, 0.7);
        assert!((v - 1.2).abs() < 0.05, "v = {v}");
        assert!(s.grid_variation(&cfg) <= 1.5 + 1e-9);
    }
}
