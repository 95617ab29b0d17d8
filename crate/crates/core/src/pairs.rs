//! Metric pairs, metric chains and metric linear combinations.
//!
//! A metric pair of `(A, B)` is a pair `(a, b)` where one coordinate is a
//! nearest point of the other's set. Chains string pairs across a sequence
//! of sets, and the metric linear combination takes weighted sums along
//! chains only — in contrast to the Minkowski combination over the full
//! Cartesian product.

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{CompactSet, Point, PointSet};
use crate::scalar::Scalar;
use std::cmp::Ordering;

/// Which projection relation certifies the pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairWitness {
    /// `b` is a nearest point of `B` to `a`.
    BProjectsA,
    /// `a` is a nearest point of `A` to `b`.
    AProjectsB,
    Both,
}

impl PairWitness {
    fn merge(self, other: PairWitness) -> PairWitness {
        if self == other {
            self
        } else {
            PairWitness::Both
        }
    }
}

#[derive(Clone, Debug)]
pub struct MetricPair<S> {
    pub a: Point<S>,
    pub b: Point<S>,
    pub witness: PairWitness,
}

impl<S: Scalar> MetricPair<S> {
    pub fn gap(&self, norm: crate::geometry::NormKind) -> S {
        self.a.dist(&self.b, norm)
    }

    fn lex_cmp(&self, other: &Self) -> Ordering {
        self.a
            .lex_cmp(&other.a)
            .then_with(|| self.b.lex_cmp(&other.b))
    }
}

/// A tuple whose consecutive entries are metric pairs of consecutive sets.
#[derive(Clone, Debug)]
pub struct MetricChain<S> {
    pub points: Vec<Point<S>>,
}

/// Weights and sets of a metric (or Minkowski) linear combination.
#[derive(Clone, Debug)]
pub struct MetricCombinationSpec<'a, S> {
    pub lambdas: Vec<S>,
    pub sets: Vec<&'a CompactSet<S>>,
}

impl<'a, S: Scalar> MetricCombinationSpec<'a, S> {
    pub fn new(lambdas: Vec<S>, sets: Vec<&'a CompactSet<S>>) -> Result<Self> {
        if lambdas.len() != sets.len() || sets.len() < 2 {
            return Err(Error::InvalidInput(
                "combination needs equally many weights and sets, at least two".into(),
            ));
        }
        Ok(Self { lambdas, sets })
    }
}

/// Finite representative of a set used for pair enumeration: the points
/// themselves when finite, a net at `sample_eps` otherwise.
fn enumeration_rep<S: Scalar>(set: &CompactSet<S>, cfg: &Config<S>) -> PointSet<S> {
    match set.as_points() {
        Some(ps) => ps.clone(),
        None => set.sample(cfg.tol.sample_eps, cfg.norm),
    }
}

/// Enumerate the metric pairs of `(a, b)`.
///
/// Exact for finite sets: both projection directions, all ties kept.
/// Continuous sets are discretized at `sample_eps` and every candidate is
/// snapped by one analytic projection, so one coordinate of every reported
/// pair lies exactly on the original set.
pub fn metric_pairs<S: Scalar>(
    a: &CompactSet<S>,
    b: &CompactSet<S>,
    cfg: &Config<S>,
) -> Result<Vec<MetricPair<S>>> {
    let rep_a = enumeration_rep(a, cfg);
    let rep_b = enumeration_rep(b, cfg);
    let tie = cfg.tol.tie_tol;
    let mut out: Vec<MetricPair<S>> = Vec::new();
    for pa in rep_a.points() {
        for q in b.project(pa, cfg.norm, tie) {
            out.push(MetricPair {
                a: pa.clone(),
                b: q,
                witness: PairWitness::BProjectsA,
            });
            if out.len() > cfg.chain_cap {
                return Err(Error::EnumerationCap {
                    produced: out.len(),
                    cap: cfg.chain_cap,
                });
            }
        }
    }
    for pb in rep_b.points() {
        for q in a.project(pb, cfg.norm, tie) {
            out.push(MetricPair {
                a: q,
                b: pb.clone(),
                witness: PairWitness::AProjectsB,
            });
            if out.len() > cfg.chain_cap {
                return Err(Error::EnumerationCap {
                    produced: out.len(),
                    cap: cfg.chain_cap,
                });
            }
        }
    }
    Ok(dedup_pairs(out, tie))
}

fn dedup_pairs<S: Scalar>(mut pairs: Vec<MetricPair<S>>, tol: S) -> Vec<MetricPair<S>> {
    pairs.sort_by(|x, y| x.lex_cmp(y));
    let mut out: Vec<MetricPair<S>> = Vec::with_capacity(pairs.len());
    for p in pairs {
        if let Some(last) = out.last_mut() {
            let close = last
                .a
                .coords()
                .iter()
                .chain(last.b.coords())
                .zip(p.a.coords().iter().chain(p.b.coords()))
                .all(|(x, y)| (*x - *y).abs() <= tol);
            if close {
                last.witness = last.witness.merge(p.witness);
                continue;
            }
        }
        out.push(p);
    }
    out
}

/// The pair form of the Hausdorff distance: `max { |a-b| : (a,b) pairs }`.
/// Coincides exactly with the two-sided supremum form on finite sets.
pub fn hausdorff_via_pairs<S: Scalar>(
    a: &CompactSet<S>,
    b: &CompactSet<S>,
    cfg: &Config<S>,
) -> Result<S> {
    let pairs = metric_pairs(a, b, cfg)?;
    Ok(pairs
        .iter()
        .map(|p| p.gap(cfg.norm))
        .fold(S::zero(), S::max))
}

/// Chain anchored at `a = points[j]`, built by outward canonical projection:
/// descending `a_{i-1} in proj(a_i, A_{i-1})`, ascending symmetric.
pub fn chain_through<S: Scalar>(
    sets: &[&CompactSet<S>],
    j: usize,
    a: &Point<S>,
    cfg: &Config<S>,
) -> Result<MetricChain<S>> {
    if sets.is_empty() || j >= sets.len() {
        return Err(Error::InvalidInput("anchor index out of range".into()));
    }
    let dist = sets[j].distance(a, cfg.norm);
    if dist > cfg.tol.tie_tol {
        return Err(Error::InvalidAnchor {
            dist: dist.as_f64(),
            tol: cfg.tol.tie_tol.as_f64(),
        });
    }
    let mut points = vec![a.clone(); sets.len()];
    for i in (0..j).rev() {
        points[i] = sets[i].project_canonical(&points[i + 1], cfg.norm, cfg.tol.tie_tol);
    }
    for i in j + 1..sets.len() {
        points[i] = sets[i].project_canonical(&points[i - 1], cfg.norm, cfg.tol.tie_tol);
    }
    Ok(MetricChain { points })
}

/// Pairs between two indexed point lists, as index pairs. Both projection
/// directions, ties kept.
fn pairs_indexed<S: Scalar>(
    a: &PointSet<S>,
    b: &PointSet<S>,
    cfg: &Config<S>,
) -> Vec<(usize, usize)> {
    let tie = cfg.tol.tie_tol;
    let norm = cfg.norm;
    let mut out = Vec::new();
    for (i, pa) in a.points().iter().enumerate() {
        let best = b.min_dist(pa, norm);
        for (k, pb) in b.points().iter().enumerate() {
            if pa.dist(pb, norm) <= best + tie {
                out.push((i, k));
            }
        }
    }
    for (k, pb) in b.points().iter().enumerate() {
        let best = a.min_dist(pb, norm);
        for (i, pa) in a.points().iter().enumerate() {
            if pa.dist(pb, norm) <= best + tie {
                out.push((i, k));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Exhaustive enumeration of all metric chains of the given sets.
/// Continuous sets are discretized at `sample_eps` first.
pub fn metric_chains<S: Scalar>(
    sets: &[&CompactSet<S>],
    cfg: &Config<S>,
) -> Result<Vec<MetricChain<S>>> {
    if sets.len() < 2 {
        return Err(Error::InvalidInput("a chain needs at least two sets".into()));
    }
    let reps: Vec<PointSet<S>> = sets.iter().map(|s| enumeration_rep(s, cfg)).collect();
    // adjacency per consecutive pair of sets
    let mut edges: Vec<Vec<Vec<usize>>> = Vec::with_capacity(reps.len() - 1);
    for w in reps.windows(2) {
        let mut adj = vec![Vec::new(); w[0].len()];
        for (i, k) in pairs_indexed(&w[0], &w[1], cfg) {
            adj[i].push(k);
        }
        edges.push(adj);
    }
    let mut chains = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(reps.len());
    for start in 0..reps[0].len() {
        stack.push(start);
        dfs_chains(&reps, &edges, &mut stack, &mut chains, cfg.chain_cap)?;
        stack.pop();
    }
    Ok(chains)
}

fn dfs_chains<S: Scalar>(
    reps: &[PointSet<S>],
    edges: &[Vec<Vec<usize>>],
    stack: &mut Vec<usize>,
    chains: &mut Vec<MetricChain<S>>,
    cap: usize,
) -> Result<()> {
    let depth = stack.len() - 1;
    if depth == edges.len() {
        if chains.len() >= cap {
            return Err(Error::EnumerationCap {
                produced: chains.len(),
                cap,
            });
        }
        chains.push(MetricChain {
            points: stack
                .iter()
                .enumerate()
                .map(|(level, &idx)| reps[level].points()[idx].clone())
                .collect(),
        });
        return Ok(());
    }
    let last = *stack.last().unwrap();
    for &next in &edges[depth][last] {
        stack.push(next);
        dfs_chains(reps, edges, stack, chains, cap)?;
        stack.pop();
    }
    Ok(())
}

/// Metric linear combination: weighted sums along metric chains only.
pub fn metric_linear_combination<S: Scalar>(
    spec: &MetricCombinationSpec<'_, S>,
    cfg: &Config<S>,
) -> Result<PointSet<S>> {
    let points = if spec.sets.len() == 2 {
        // pair route keeps one coordinate analytic on continuous backends
        let pairs = metric_pairs(spec.sets[0], spec.sets[1], cfg)?;
        pairs
            .into_iter()
            .map(|p| {
                combine(
                    &[&p.a, &p.b],
                    &spec.lambdas,
                )
            })
            .collect()
    } else {
        let chains = metric_chains(&spec.sets, cfg)?;
        chains
            .into_iter()
            .map(|c| {
                let refs: Vec<&Point<S>> = c.points.iter().collect();
                combine(&refs, &spec.lambdas)
            })
            .collect()
    };
    PointSet::new(points, cfg.tol.tie_tol)
}

fn combine<S: Scalar>(points: &[&Point<S>], lambdas: &[S]) -> Point<S> {
    let dim = points[0].dim();
    let mut coords = vec![S::zero(); dim];
    for (p, l) in points.iter().zip(lambdas) {
        for (c, x) in coords.iter_mut().zip(p.coords()) {
            *c = *c + *l * *x;
        }
    }
    Point::new(coords).expect("finite combination")
}

/// Minkowski linear combination: weighted sums over the full product.
pub fn minkowski_combination<S: Scalar>(
    spec: &MetricCombinationSpec<'_, S>,
    cfg: &Config<S>,
) -> Result<PointSet<S>> {
    let reps: Vec<PointSet<S>> = spec.sets.iter().map(|s| enumeration_rep(s, cfg)).collect();
    let total: usize = reps.iter().map(|r| r.len()).try_fold(1usize, |acc, n| {
        acc.checked_mul(n).filter(|t| *t <= cfg.chain_cap)
    })
    .ok_or(Error::EnumerationCap {
        produced: cfg.chain_cap,
        cap: cfg.chain_cap,
    })?;
    let mut points = Vec::with_capacity(total);
    let mut idx = vec![0usize; reps.len()];
    loop {
        let refs: Vec<&Point<S>> = idx
            .iter()
            .enumerate()
            .map(|(level, &i)| &reps[level].points()[i])
            .collect();
        points.push(combine(&refs, &spec.lambdas));
        let mut axis = 0;
        loop {
            if axis == reps.len() {
                return PointSet::new(points, cfg.tol.tie_tol);
            }
            idx[axis] += 1;
            if idx[axis] < reps[axis].len() {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

/// Defect of `(a, b)` as a metric pair of `(A, B)`: zero (up to ties) iff
/// one coordinate projects onto the other.
pub fn pair_defect<S: Scalar>(
    a: &Point<S>,
    b: &Point<S>,
    set_a: &CompactSet<S>,
    set_b: &CompactSet<S>,
    cfg: &Config<S>,
) -> S {
    let gap = a.dist(b, cfg.norm);
    let da = gap - set_b.distance(a, cfg.norm);
    let db = gap - set_a.distance(b, cfg.norm);
    da.min(db).max(S::zero())
}
