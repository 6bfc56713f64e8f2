"""Gaussian-process surrogate and expected-improvement optimization.

A deliberately small GP: RBF kernel with per-dimension length scales,
observation noise, hyperparameters refit by marginal likelihood.  Inputs
live in the unit cube (normalized controls), outputs are intensity ratios.
Queries are unconstrained in step size, which is exactly what separates
this baseline from the bounded-step environment policy.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg, optimize
from scipy.special import erf

from ..errors import ConfigurationError, NumericalError

__all__ = ["GpSurrogate", "bo_suggest", "bo_run", "expected_improvement"]

_LOG_BOUNDS = {
    "lengthscale": (np.log(1e-2), np.log(10.0)),
    "signal": (np.log(1e-3), np.log(10.0)),
    "noise": (np.log(1e-6), np.log(1.0)),
}


def _norm_cdf(z):
    return 0.5 * (1.0 + erf(z / np.sqrt(2.0)))


def _norm_pdf(z):
    return np.exp(-0.5 * z**2) / np.sqrt(2.0 * np.pi)


class GpSurrogate:
    def __init__(self, dim: int = 3):
        self.dim = dim
        self.x = np.empty((0, dim))
        self.y = np.empty(0)
        # log(lengthscales), log(signal std), log(noise std)
        self.params = np.concatenate([np.log(0.3) * np.ones(dim), [np.log(1.0), np.log(1e-2)]])
        self._cache = None

    def __len__(self) -> int:
        return len(self.y)

    def add(self, x, y: float) -> None:
        x = np.asarray(x, dtype=float).reshape(self.dim)
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise ConfigurationError(f"surrogate inputs must lie in the unit cube, got {x}")
        self.x = np.vstack([self.x, x])
        self.y = np.append(self.y, float(y))
        self._cache = None

    def _kernel(self, a: np.ndarray, b: np.ndarray, params: np.ndarray) -> np.ndarray:
        ls = np.exp(params[: self.dim])
        sig2 = np.exp(2.0 * params[self.dim])
        d = (a[:, None, :] - b[None, :, :]) / ls
        return sig2 * np.exp(-0.5 * np.sum(d**2, axis=-1))

    def _factorize(self, params: np.ndarray):
        """Cholesky of K + noise, escalating jitter when not positive definite."""
        n = len(self.y)
        k = self._kernel(self.x, self.x, params) + np.exp(2.0 * params[-1]) * np.eye(n)
        jitter = 1e-10
        while jitter <= 1e-4:
            try:
                return linalg.cholesky(k + jitter * np.eye(n), lower=True)
            except linalg.LinAlgError:
                jitter *= 10.0
        raise NumericalError("covariance not positive definite even with maximal jitter")

    def _neg_log_marginal(self, params: np.ndarray) -> float:
        try:
            low = self._factorize(params)
        except NumericalError:
            return 1e12
        centered = self.y - self.y.mean()
        alpha = linalg.cho_solve((low, True), centered)
        return float(
            0.5 * centered @ alpha
            + np.sum(np.log(np.diag(low)))
            + 0.5 * len(self.y) * np.log(2.0 * np.pi)
        )

    def fit(self) -> None:
        """Refit hyperparameters by maximizing the marginal likelihood."""
        if len(self.y) < 3:
            return
        lb = [_LOG_BOUNDS["lengthscale"]] * self.dim + [_LOG_BOUNDS["signal"], _LOG_BOUNDS["noise"]]
        best = None
        for start in (self.params, np.concatenate([np.zeros(self.dim), [0.0, np.log(1e-2)]])):
            res = optimize.minimize(
                self._neg_log_marginal, start, method="L-BFGS-B", bounds=lb
            )
            if best is None or res.fun < best.fun:
                best = res
        self.params = best.x
        self._cache = None

    def posterior(self, query: np.ndarray):
        """Predictive mean and variance at query points (m, dim)."""
        query = np.atleast_2d(query)
        if len(self.y) == 0:
            return np.zeros(len(query)), np.full(len(query), np.exp(2.0 * self.params[self.dim]))
        if self._cache is None:
            low = self._factorize(self.params)
            alpha = linalg.cho_solve((low, True), self.y - self.y.mean())
            self._cache = (low, alpha)
        low, alpha = self._cache
        k_star = self._kernel(query, self.x, self.params)
        mean = self.y.mean() + k_star @ alpha
        v = linalg.solve_triangular(low, k_star.T, lower=True)
        var = np.exp(2.0 * self.params[self.dim]) - np.sum(v**2, axis=0)
        return mean, np.maximum(var, 0.0)


def expected_improvement(surrogate: GpSurrogate, query: np.ndarray) -> np.ndarray:
    """EI against the best observed value; zero wherever nothing can improve."""
    mean, var = surrogate.posterior(query)
    best = surrogate.y.max()
    sigma = np.sqrt(var)
    improve = mean - best
    ei = np.where(
        sigma > 1e-12,
        improve * _norm_cdf(improve / np.maximum(sigma, 1e-12))
        + sigma * _norm_pdf(improve / np.maximum(sigma, 1e-12)),
        np.maximum(improve, 0.0),
    )
    return ei


def bo_suggest(surrogate: GpSurrogate, rng: np.random.Generator, n_candidates: int = 256) -> np.ndarray:
    """Next query: random multistart on EI plus local refinement of the leaders."""
    dim = surrogate.dim
    cand = rng.uniform(0.0, 1.0, size=(n_candidates, dim))
    ei = expected_improvement(surrogate, cand)
    leaders = cand[np.argsort(ei)[-5:]]
    best_x, best_ei = None, -np.inf
    for x0 in leaders:
        res = optimize.minimize(
            lambda x: -expected_improvement(surrogate, x.reshape(1, -1))[0],
            x0,
            method="L-BFGS-B",
            bounds=[(0.0, 1.0)] * dim,
        )
        if -res.fun > best_ei:
            best_ei, best_x = -res.fun, res.x
    return np.clip(best_x, 0.0, 1.0)


def bo_run(
    objective,
    budget: int,
    rng: np.random.Generator,
    dim: int = 3,
    init_points: int = 10,
    fit_every: int = 10,
):
    """Full optimization loop; returns the query history as (x, value) pairs.

    The first ``init_points`` queries are uniform random; afterwards the
    surrogate is refit every ``fit_every`` observations and queried by
    expected improvement.
    """
    if budget < init_points:
        raise ConfigurationError(f"budget {budget} smaller than init_points {init_points}")
    surrogate = GpSurrogate(dim=dim)
    history = []
    for i in range(budget):
        if i < init_points:
            x = rng.uniform(0.0, 1.0, size=dim)
        else:
            if (i - init_points) % fit_every == 0:
                surrogate.fit()
            x = bo_suggest(surrogate, rng)
        value = float(objective(x))
        surrogate.add(x, value)
        history.append((x, value))
    return history
