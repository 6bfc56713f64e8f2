"""Distributions over the latent nonlinearity and a max-entropy curriculum.

The latent amplifier nonlinearity B is drawn fresh each episode from a
configurable distribution.  For training, an adaptive curriculum widens a
Beta distribution on a fixed support as far as it can while a constraint on
the (importance-weighted) success rate still holds, moving toward the
uniform distribution whenever the policy keeps succeeding.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import betaln, digamma

from .errors import ConfigurationError

__all__ = [
    "DrDistribution",
    "CurriculumState",
    "sample",
    "entropy",
    "kl",
    "success_indicator",
    "doraemon_update",
]


@dataclass(frozen=True)
class DrDistribution:
    """Distribution of the per-episode nonlinearity value.

    Three variants: a point mass, a uniform interval, or a Beta shape
    rescaled onto an interval.  Construct via the classmethods.
    """

    kind: str
    params: tuple

    @classmethod
    def fixed(cls, value: float) -> "DrDistribution":
        return cls(kind="fixed", params=(float(value),))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "DrDistribution":
        if not lo < hi:
            raise ConfigurationError(f"need lo < hi, got [{lo}, {hi}]")
        return cls(kind="uniform", params=(float(lo), float(hi)))

    @classmethod
    def beta(cls, a: float, b: float, lo: float, hi: float) -> "DrDistribution":
        if a <= 0 or b <= 0:
            raise ConfigurationError(f"beta shapes must be positive, got a={a}, b={b}")
        if not lo < hi:
            raise ConfigurationError(f"need lo < hi, got [{lo}, {hi}]")
        return cls(kind="beta", params=(float(a), float(b), float(lo), float(hi)))

    @property
    def support(self) -> tuple:
        if self.kind == "fixed":
            v = self.params[0]
            return (v, v)
        if self.kind == "uniform":
            return self.params
        return self.params[2:]


def sample(dist: DrDistribution, rng: np.random.Generator) -> float:
    """One draw; always inside the support."""
    if dist.kind == "fixed":
        return dist.params[0]
    if dist.kind == "uniform":
        return float(rng.uniform(*dist.params))
    a, b, lo, hi = dist.params
    return float(lo + (hi - lo) * rng.beta(a, b))


def _beta_entropy(a, b, scale: float):
    """Differential entropy of Beta(a, b) stretched over an interval of width scale."""
    return (
        betaln(a, b)
        - (a - 1) * digamma(a)
        - (b - 1) * digamma(b)
        + (a + b - 2) * digamma(a + b)
        + np.log(scale)
    )


def _beta_kl(a1, b1, a2, b2):
    """KL(Beta(a1,b1) || Beta(a2,b2)) on a common support (scale cancels)."""
    return (
        betaln(a2, b2)
        - betaln(a1, b1)
        + (a1 - a2) * digamma(a1)
        + (b1 - b2) * digamma(b1)
        + (a2 - a1 + b2 - b1) * digamma(a1 + b1)
    )


def entropy(dist: DrDistribution) -> float:
    """Differential entropy in nats; -inf for a point mass."""
    if dist.kind == "fixed":
        return float("-inf")
    if dist.kind == "uniform":
        lo, hi = dist.params
        return float(np.log(hi - lo))
    a, b, lo, hi = dist.params
    return float(_beta_entropy(a, b, hi - lo))


def _as_beta_shapes(dist: DrDistribution) -> tuple:
    if dist.kind == "uniform":
        return (1.0, 1.0)
    if dist.kind == "beta":
        return dist.params[:2]
    raise ConfigurationError(f"{dist.kind} distribution has no density")


def kl(p: DrDistribution, q: DrDistribution) -> float:
    """KL divergence between two densities on the same support."""
    if p.support != q.support:
        raise ConfigurationError(f"support mismatch: {p.support} vs {q.support}")
    a1, b1 = _as_beta_shapes(p)
    a2, b2 = _as_beta_shapes(q)
    return float(_beta_kl(a1, b1, a2, b2))


def success_indicator(terminal_ratio: float, threshold: float = 0.65) -> bool:
    """Whether an episode's final intensity ratio counts as a success."""
    return terminal_ratio >= threshold


@dataclass
class CurriculumState:
    """Evolving Beta distribution plus the episode buffer feeding its updates."""

    a: float = 60.0
    b: float = 90.0
    support: tuple = (1.0, 3.5)
    success_threshold: float = 0.65
    success_rate_bound: float = 0.5
    kl_step: float = 0.1
    min_episodes: int = 500
    update_index: int = 0
    buffer: list = field(default_factory=list)

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ConfigurationError("beta shapes must be positive")
        if not self.support[0] < self.support[1]:
            raise ConfigurationError(f"bad support {self.support}")

    @property
    def distribution(self) -> DrDistribution:
        return DrDistribution.beta(self.a, self.b, *self.support)

    def record(self, b_value: float, terminal_ratio: float) -> None:
        lo, hi = self.support
        if not lo <= b_value <= hi:
            raise ConfigurationError(f"episode value {b_value} outside support [{lo}, {hi}]")
        self.buffer.append((float(b_value), float(terminal_ratio)))


# candidate grid for the two Beta shape parameters, log-spaced for resolution
# near small shapes where entropy changes fastest
_GRID = np.logspace(np.log10(0.5), np.log10(100.0), 120)


def _success_estimates(state: CurriculumState, cand_a, cand_b):
    """Self-normalized importance-sampled success rate under each candidate.

    Episodes were collected under the current Beta; re-weighting by the
    candidate-to-current density ratio estimates the success rate the
    candidate would see, without new rollouts.
    """
    values = np.array([v for v, _ in state.buffer])
    success = np.array(
        [1.0 if success_indicator(r, state.success_threshold) else 0.0 for _, r in state.buffer]
    )
    lo, hi = state.support
    u = np.clip((values - lo) / (hi - lo), 1e-12, 1 - 1e-12)
    log_u, log_1mu = np.log(u), np.log1p(-u)
    base = (state.a - 1) * log_u + (state.b - 1) * log_1mu - betaln(state.a, state.b)
    out = np.empty(len(cand_a))
    for i, (ca, cb) in enumerate(zip(cand_a, cand_b)):
        logw = (ca - 1) * log_u + (cb - 1) * log_1mu - betaln(ca, cb) - base
        w = np.exp(logw - logw.max())
        out[i] = float(np.sum(w * success) / np.sum(w))
    return out


def doraemon_update(state: CurriculumState) -> CurriculumState:
    """One constrained curriculum step.

    Among candidate Beta parameters inside the KL trust region around the
    current distribution, pick the one with maximum entropy whose estimated
    success rate stays above the bound.  When the bound already fails at the
    current parameters, keep them unchanged: estimates re-weighted away from
    a failing distribution are not trusted to pick a retreat direction.  The
    buffer is consumed either way.
    """
    if len(state.buffer) < state.min_episodes:
        warnings.warn(
            f"curriculum update skipped: {len(state.buffer)} episodes buffered, "
            f"{state.min_episodes} required",
            stacklevel=2,
        )
        return state

    new_a, new_b = state.a, state.b
    (est_here,) = _success_estimates(state, [state.a], [state.b])
    if est_here >= state.success_rate_bound:
        aa, bb = np.meshgrid(_GRID, _GRID, indexing="ij")
        cand_a = np.append(aa.ravel(), [state.a, 1.0])
        cand_b = np.append(bb.ravel(), [state.b, 1.0])
        kls = _beta_kl(cand_a, cand_b, state.a, state.b)
        in_ball = kls <= state.kl_step
        cand_a, cand_b, kls = cand_a[in_ball], cand_b[in_ball], kls[in_ball]

        est = _success_estimates(state, cand_a, cand_b)
        feasible = est >= state.success_rate_bound
        scale = state.support[1] - state.support[0]
        ent = _beta_entropy(cand_a[feasible], cand_b[feasible], scale)
        order = np.lexsort((kls[feasible], -ent))
        best = np.nonzero(feasible)[0][order[0]]
        new_a, new_b = float(cand_a[best]), float(cand_b[best])

    return replace(
        state, a=new_a, b=new_b, update_index=state.update_index + 1, buffer=[]
    )
