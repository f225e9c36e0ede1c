"""The success-number curve: expected cracked accounts before i failures.

Across U accounts the optimal attacker computes, per account, the
posterior probability w that its top-ratio sweetword is the real
password, then attacks accounts in descending w.  With a(t) the
distribution of w, the expected number of successes before the i-th
failure is

    lambda_U(i) = U sum_{j<=i} E_t[ t C(U-1, j-1) E[v_t]^{U-j} (1 - E[v_t])^{j-1} ]

where v_t(x) is x for x >= t and 1 below: an account with smaller w is
attacked later and cannot block, one with larger w must succeed (factor
x).  Every integral over a(t) is realized as a sample average over a
seeded Monte Carlo sample of w -- a(t) has no neat closed form even for
simple (P, Q) -- and the beta kernels are evaluated in log space so U up
to 1e7 is exact.

The substitution x = E[v_t] turns the sum into beta-kernel convolutions
of phi/(1-phi), phi the inverse of t -> E[v_t]; for large U each kernel
is nearly a point mass at (U-j)/(U-1), giving the fast delta
approximation ``lambda_delta_approx``.

Caveat, by construction: these formulas treat a(t) as atomless.  When w
has large atoms (e.g. P = Q makes every w = 1/k) the ordering of tied
accounts matters and the formula mis-counts; the ``games`` module's
simulator is the ground truth there.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln

from .core import PasswordModel
from .errors import DegenerateSampleError, DomainError
from .flatness import DELTA_APPROX, MONTE_CARLO, QUADRATURE, MetricCurve
from .models import _alias_for
from .parallel import DEFAULT_CHUNK, chunk_rng, run_chunked


@dataclass(frozen=True)
class WSample:
    """Seeded Monte Carlo sample of the per-account top-posterior w."""

    values: np.ndarray
    k: int
    seed: int
    source: str = ""
    chunk_size: int = DEFAULT_CHUNK
    _sorted: np.ndarray = field(init=False, repr=False, compare=False)
    _suffix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.size == 0:
            raise DomainError("w sample is empty")
        if values.min() < 1.0 / self.k - 1e-12 or values.max() > 1.0 + 1e-12:
            raise DomainError("w values must lie in [1/k, 1]")
        sorted_vals = np.sort(values)
        # suffix[i] = sum of sorted_vals[i:], suffix[N] = 0
        suffix = np.concatenate((np.cumsum(sorted_vals[::-1])[::-1], [0.0]))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_sorted", sorted_vals)
        object.__setattr__(self, "_suffix", suffix)
        values.flags.writeable = False

    @property
    def count(self) -> int:
        return int(self.values.size)

    def mean(self) -> float:
        return float(self._suffix[0] / self.count)

    def save(self, path: str | Path):
        """Binary values plus a JSON sidecar describing the draw."""
        path = Path(path)
        np.save(path.with_suffix(".npy"), self.values)
        sidecar = {"k": self.k, "seed": self.seed, "N": self.count,
                   "source": self.source, "chunk_size": self.chunk_size}
        path.with_suffix(".json").write_text(json.dumps(sidecar), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "WSample":
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
        values = np.load(path.with_suffix(".npy"))
        return cls(values=values, k=meta["k"], seed=meta["seed"],
                   source=meta.get("source", ""), chunk_size=meta.get("chunk_size", DEFAULT_CHUNK))


def ratio_lookup(P: PasswordModel, Q: PasswordModel) -> np.ndarray:
    """Per-index likelihood ratio P/Q; +inf where Q = 0 < P, 0 where P = 0."""
    if P.n != Q.n:
        raise DomainError("models must share a password space")
    p = P.pmf_array()
    q = Q.pmf_array()
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(q > 0, p / np.where(q > 0, q, 1.0), np.inf)
    r[(q == 0) & (p == 0)] = 0.0
    return r


def _draw_w_chunk(rng: np.random.Generator, P: PasswordModel, Q: PasswordModel,
                  ratios: np.ndarray, k: int, n: int) -> np.ndarray:
    p_alias, p_map = _alias_for(P)
    q_alias, q_map = _alias_for(Q)
    true_idx = p_alias.draw(rng, n)
    if p_map is not None:
        true_idx = p_map[true_idx]
    hw_idx = q_alias.draw(rng, n * (k - 1)).reshape(n, k - 1)
    if q_map is not None:
        hw_idx = q_map[hw_idx]
    r_true = ratios[true_idx]
    r_hw = ratios[hw_idx]
    top = np.maximum(r_true, r_hw.max(axis=1))
    total = r_true + r_hw.sum(axis=1)
    with np.errstate(invalid="ignore"):
        w = top / total
    # A Q-zero true password is self-revealing: the posterior is 1.
    w[np.isinf(r_true)] = 1.0
    return w


def sample_w(P: PasswordModel, Q: PasswordModel, k: int, N: int, seed: int,
             chunk_size: int = DEFAULT_CHUNK, threads: int | None = None) -> WSample:
    """Draw N sweetword lists and record each account's top posterior w.

    w = max_m (P/Q of sweetword m) / sum_j (P/Q of sweetword j), the
    success probability of the optimal single guess.  Deterministic for
    a given (seed, chunk_size).
    """
    if k < 2:
        raise DomainError(f"k >= 2 required, got {k}")
    if N < 1:
        raise DomainError(f"N >= 1 required, got {N}")
    ratios = ratio_lookup(P, Q)

    def worker(c: int, n: int) -> np.ndarray:
        return _draw_w_chunk(chunk_rng(seed, c), P, Q, ratios, k, n)

    chunks = run_chunked(worker, N, chunk_size, threads)
    values = np.concatenate(chunks)
    return WSample(values=values, k=k, seed=seed, chunk_size=chunk_size,
                   source=f"P={P.label} Q={Q.label}")


def expected_v(sample: WSample, t) -> np.ndarray | float:
    """Sample-average survival factor E[v_t]: values >= t count as
    themselves, values below t count as 1.  Vectorized over t."""
    t_arr = np.asarray(t, dtype=float)
    idx = np.searchsorted(sample._sorted, t_arr, side="left")
    out = (idx + sample._suffix[idx]) / sample.count
    return out if t_arr.shape else float(out)


def beta_kernel_log(U: int, j: int, x: np.ndarray) -> np.ndarray:
    """log of C(U-1, j-1) x^{U-j} (1-x)^{j-1}, safe at x = 1 for j = 1.

    Zero exponents contribute exactly 0 (0^0 := 1), so x = 1 with j = 1
    and x = 0 with j = U stay finite instead of producing 0 * -inf.
    """
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, gammaln(U) - gammaln(j) - gammaln(U - j + 1))
    with np.errstate(divide="ignore"):
        if U - j > 0:
            out = out + (U - j) * np.log(x)
        if j - 1 > 0:
            out = out + (j - 1) * np.log1p(-x)
    return out


def lambda_curve(sample: WSample, U: int, i_max: int) -> MetricCurve:
    """Success-number curve from the beta-kernel sum over the w sample."""
    if U < 1:
        raise DomainError(f"U >= 1 required, got {U}")
    if not 1 <= i_max <= U:
        raise DomainError(f"i_max must be in [1, U], got {i_max}")
    t = sample._sorted  # fixed summation order: ascending values
    x = expected_v(sample, t)
    increments = np.empty(i_max)
    for j in range(1, i_max + 1):
        kernel = np.exp(beta_kernel_log(U, j, x))
        increments[j - 1] = U * float(np.mean(t * kernel))
    values = np.minimum(np.cumsum(increments), float(U))
    return MetricCurve(
        indices=np.arange(1, i_max + 1),
        values=values,
        method=MONTE_CARLO,
        meta={"U": U, "N": sample.count, "k": sample.k, "seed": sample.seed,
              "estimator": "beta-kernel-sum"},
    )


@dataclass(frozen=True)
class PhiTable:
    """Tabulated inverse of t -> E[v_t]: knots (x, t), both nondecreasing.

    Built from the exact step structure of the sample estimator, so
    phi(E[v_t]) = t holds at every knot.  ``degenerate`` marks an
    all-equal sample, for which the inverse carries no information.
    """

    xs: np.ndarray
    ts: np.ndarray
    k: int
    degenerate: bool = False

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ts = np.asarray(self.ts, dtype=float)
        if xs.shape != ts.shape or xs.size == 0:
            raise DomainError("phi table needs matching nonempty knot arrays")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ts) < 0):
            raise DomainError("phi knots must have strictly increasing x, nondecreasing t")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ts", ts)

    @property
    def x_range(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    def phi(self, x) -> np.ndarray | float:
        """Monotone piecewise-linear interpolation, clamped to the knot range."""
        if self.degenerate:
            raise DegenerateSampleError("phi is undefined for an all-equal w sample")
        out = np.interp(x, self.xs, self.ts)
        return out if np.asarray(x).shape else float(out)


def phi_table(sample: WSample, grid_size: int | None = None) -> PhiTable:
    """Tabulate (E[v_t], t) over the thresholds where the estimator moves.

    E[v_t] is a left-continuous step function of t, jumping just above
    each distinct sample value; the knot for each step keeps the
    smallest t attaining it.  ``grid_size`` caps the table by uniform
    rank thinning but always keeps the top tail at full resolution,
    where the large-U kernels concentrate.
    """
    if grid_size is not None and grid_size < 2:
        raise DomainError(f"grid_size >= 2 required, got {grid_size}")
    v = sample._sorted
    N = sample.count
    t_min = 1.0 / sample.k
    if v[0] == v[-1]:
        return PhiTable(xs=np.array([v[0]]), ts=np.array([t_min]),
                        k=sample.k, degenerate=True)

    # Boundary after the last copy of each distinct value.
    last = np.flatnonzero(np.diff(v) > 0)  # v[last] < v[last+1]
    counts_below = np.concatenate((last + 1, [N]))          # passwords < t for t just above value
    boundary_vals = np.concatenate((v[last], [v[-1]]))      # the values themselves (smallest t)
    xs = (counts_below + sample._suffix[counts_below]) / N
    ts = boundary_vals
    # Left endpoint: for t in [1/k, min w], E[v_t] is the sample mean.
    xs = np.concatenate(([sample.mean()], xs))
    ts = np.concatenate(([t_min], ts))
    # Collapse duplicate x keeping the smallest t (first occurrence).
    keep = np.concatenate(([True], np.diff(xs) > 0))
    xs, ts = xs[keep], ts[keep]

    if grid_size is not None and xs.size > grid_size:
        tail = min(xs.size, max(64, grid_size // 8))
        head_idx = np.unique(np.linspace(0, xs.size - tail - 1,
                                         max(2, grid_size - tail)).astype(int))
        idx = np.concatenate((head_idx, np.arange(xs.size - tail, xs.size)))
        xs, ts = xs[idx], ts[idx]
    return PhiTable(xs=xs, ts=ts, k=sample.k)


def lambda_delta_approx(phi: PhiTable, U: int, i_max: int) -> MetricCurve:
    """Point-mass approximation of the beta-kernel convolution:

        lambda_U(i) ~= sum_{j<=i} phi(x_j) / (1 - phi(x_j)),
        x_j = (U - j) / (U - 1),

    each kernel replaced by a delta at its mode.  Terms with phi within
    1e-12 of 1 are capped at U and the cumulative curve is clipped to U.
    """
    if U < 2:
        raise DomainError(f"delta approximation needs U >= 2, got {U}")
    if not 1 <= i_max <= U:
        raise DomainError(f"i_max must be in [1, U], got {i_max}")
    if phi.degenerate:
        raise DegenerateSampleError(
            "all sampled w equal: E[v_t] is flat and its inverse carries no "
            "information; use the exact curve or the game simulator"
        )
    j = np.arange(1, i_max + 1, dtype=float)
    x = (U - j) / (U - 1.0)
    lo, hi = phi.x_range
    clamped = bool(np.any(x < lo) or np.any(x > hi))
    t = np.asarray(phi.phi(np.clip(x, lo, hi)))
    terms = np.where(t >= 1.0 - 1e-12, float(U), t / (1.0 - t))
    values = np.minimum(np.cumsum(np.minimum(terms, float(U))), float(U))
    return MetricCurve(
        indices=np.arange(1, i_max + 1),
        values=values,
        method=DELTA_APPROX,
        meta={"U": U, "k": phi.k, "knots": int(phi.xs.size), "clamped": clamped},
    )


def lambda_phi_quadrature(phi: PhiTable, U: int, i_max: int) -> MetricCurve:
    """Trapezoid evaluation of the x-space convolution over the phi knots.

    A consistency route for the substitution identity; agrees with
    ``lambda_curve`` on continuous-like samples with dense knots.
    """
    if phi.degenerate:
        raise DegenerateSampleError("phi is degenerate")
    x = phi.xs
    odds = phi.ts / np.maximum(1.0 - phi.ts, 1e-300)
    increments = np.empty(i_max)
    for j in range(1, i_max + 1):
        f = odds * np.exp(beta_kernel_log(U, j, x))
        increments[j - 1] = U * float(np.trapezoid(f, x))
    values = np.minimum(np.cumsum(increments), float(U))
    return MetricCurve(indices=np.arange(1, i_max + 1), values=values,
                       method=QUADRATURE,
                       meta={"U": U, "k": phi.k, "estimator": "phi-trapezoid"})


def monte_carlo_mean_w(sample: WSample) -> float:
    """Convenience: lambda_1(1) collapses to the mean of w."""
    return sample.mean()
