//! Tolerances, enumeration caps and schedule parameters for an analysis run.

use crate::error::{Error, Result};
use crate::geometry::NormKind;
use crate::scalar::Scalar;

/// The three base tolerances every geometric operation depends on.
#[derive(Clone, Copy, Debug)]
pub struct ToleranceConfig<S> {
    /// Slack when deciding projection ties and deduplicating points.
    pub tie_tol: S,
    /// Resolution used when a continuous set is replaced by a finite net.
    pub sample_eps: S,
    /// Cauchy threshold for refinement and limit detection.
    pub conv_tol: S,
}

impl<S: Scalar> ToleranceConfig<S> {
    pub fn new(tie_tol: S, sample_eps: S, conv_tol: S) -> Result<Self> {
        if !(tie_tol > S::zero() && sample_eps > S::zero() && conv_tol > S::zero()) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if tie_tol > sample_eps {
            return Err(Error::InvalidInput(
                "tie_tol must not exceed sample_eps".into(),
            ));
        }
        Ok(Self {
            tie_tol,
            sample_eps,
            conv_tol,
        })
    }
}

impl<S: Scalar> Default for ToleranceConfig<S> {
    fn default() -> Self {
        Self {
            tie_tol: S::lit(1e-9),
            sample_eps: S::lit(1e-2),
            conv_tol: S::lit(1e-9),
        }
    }
}

/// Full configuration of an analysis run.
#[derive(Clone, Debug)]
pub struct Config<S> {
    pub norm: NormKind,
    pub tol: ToleranceConfig<S>,
    /// Hard cap on enumerated chains / pairs / product combinations.
    pub chain_cap: usize,
    /// Acceptance threshold for the metric-pair defect of a straddling chain
    /// and for pair-stability residuals.
    pub pair_tol: S,
    /// Acceptance threshold for the one-sided extrapolation residual.
    pub one_sided_tol: S,
    /// Dyadic refinement levels used when approximating a metric selection.
    pub refine_min: usize,
    pub refine_max: usize,
    /// Number of rungs in the geometric delta ladder around a point of
    /// interest: `delta_k = (b - a) / 10 * 2^-k`, `k = 1..=ladder_len`.
    pub ladder_len: usize,
    /// Number of uniform probe nodes in a selection evaluation grid.
    pub probe_count: usize,
    /// Net resolution for anchor sampling; defaults to `tol.sample_eps`.
    pub anchor_eps: Option<S>,
    /// Keep the final chain function inside each `SelectionApprox`.
    pub keep_chains: bool,
}

impl<S: Scalar> Default for Config<S> {
    fn default() -> Self {
        Self {
            norm: NormKind::L2,
            tol: ToleranceConfig::default(),
            chain_cap: 1_000_000,
            pair_tol: S::lit(1e-6),
            one_sided_tol: S::lit(1e-6),
            refine_min: 3,
            refine_max: 12,
            ladder_len: 20,
            probe_count: 65,
            anchor_eps: None,
            keep_chains: false,
        }
    }
}

impl<S: Scalar> Config<S> {
    pub fn with_norm(mut self, norm: NormKind) -> Self {
        self.norm = norm;
        self
    }

    pub fn anchor_eps(&self) -> S {
        self.anchor_eps.unwrap_or(self.tol.sample_eps)
    }

    /// Delta ladder around an interior point, coarsest first. Rungs leaving
    /// the open interval `(a, b)` on either side are dropped.
    pub fn ladder(&self, domain: (S, S), xi: S) -> Vec<S> {
        let span = (domain.1 - domain.0) / S::lit(10.0);
        let mut out = Vec::with_capacity(self.ladder_len);
        let mut delta = span;
        for _ in 0..self.ladder_len {
            delta = delta * S::half();
            if xi - delta > domain.0 && xi + delta < domain.1 {
                out.push(delta);
            }
        }
        out
    }
}

/// Additive tolerance budget attached to every verdict.
#[derive(Clone, Copy, Debug)]
pub struct Budget<S> {
    /// Discretization of continuous backends: `2 * sample_eps` when any set
    /// in play is continuous, zero for all-finite instances.
    pub sampling: S,
    /// Selection convergence plus one-sided extrapolation allowance.
    pub selection: S,
    /// Metric-pair residual allowance.
    pub pairs: S,
    /// Projection tie slack.
    pub ties: S,
}

impl<S: Scalar> Budget<S> {
    pub fn for_run(cfg: &Config<S>, any_continuous: bool) -> Self {
        let sampling = if any_continuous {
            cfg.tol.sample_eps * S::two()
        } else {
            S::zero()
        };
        Self {
            sampling,
            selection: cfg.tol.conv_tol * S::lit(10.0) + cfg.one_sided_tol,
            pairs: cfg.pair_tol,
            ties: cfg.tol.tie_tol * S::lit(10.0),
        }
    }

    pub fn total(&self) -> S {
        self.sampling + self.selection + self.pairs + self.ties
    }
}
