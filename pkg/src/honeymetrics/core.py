"""Password distributions and their likelihood-ratio spectrum.

The security of a decoy-password (honeyword) system against a
distinguishing attacker is governed entirely by the distribution of the
likelihood ratio P(pw)/Q(pw), where P is the real-password distribution
and Q the honeyword generator.  This module derives that object: given
two discrete models P and Q over the same indexed password space, it
groups passwords by their exact ratio and records

  * the sorted distinct finite ratio values,
  * the P-mass and Q-mass attached to each value (densities f and g),
  * ``M``   -- the largest finite ratio carrying Q-mass, and
  * ``b``   -- the P-mass of passwords Q can never generate
               (ratio +infinity; such a password is self-revealing).

Group-wise, P-mass equals ratio times Q-mass; ``verify_ratio_identity``
measures how far a spectrum deviates from that identity, which is a
useful canary for grouping bugs.

``ContinuousRatioModel`` is the analytic counterpart for worked
continuous examples: the CDF ``G`` of the ratio under a Q-draw on
``[0, M]``, optionally with its inverse for substitution quadrature.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, SpaceMismatchError

# Dense storage bound: above this, a PasswordModel must be given as a
# sparse index->probability mapping.
DENSE_SPACE_LIMIT = 10_000_000

# Ratios are grouped after rounding to this many significant decimal
# digits so float noise cannot split a tie group.
RATIO_SIGNIFICANT_DIGITS = 12

_PMF_SUM_TOL = 1e-9


class PasswordModel:
    """A discrete probability distribution over an indexed password space.

    Probabilities are stored densely (numpy array) for spaces up to
    ``DENSE_SPACE_LIMIT`` and as a sparse ``{index: prob}`` map above.
    Instances are immutable after construction and safe to share across
    workers.

    ``vocab``, when present, maps indices back to password strings (used
    by corpus-trained models); index-based constructors leave it None.
    """

    __slots__ = ("n", "label", "vocab", "_dense", "_sparse", "_alias")

    def __init__(
        self,
        n: int,
        pmf: Sequence[float] | np.ndarray | Mapping[int, float],
        label: str = "",
        vocab: tuple[str, ...] | None = None,
    ):
        if n < 1:
            raise DomainError(f"password space must be nonempty, got n={n}")
        self.n = int(n)
        self.label = label
        self.vocab = vocab
        self._alias = None
        if isinstance(pmf, Mapping):
            self._dense = None
            self._sparse = {int(i): float(p) for i, p in pmf.items() if p != 0.0}
            probs = np.fromiter(self._sparse.values(), dtype=float, count=len(self._sparse))
            if any(not (0 <= i < n) for i in self._sparse):
                raise DomainError("sparse pmf contains an index outside [0, n)")
        else:
            if self.n > DENSE_SPACE_LIMIT:
                raise DomainError(
                    f"n={n} exceeds the dense storage limit {DENSE_SPACE_LIMIT}; "
                    "supply the pmf as a sparse mapping"
                )
            arr = np.asarray(pmf, dtype=float)
            if arr.shape != (self.n,):
                raise DomainError(f"pmf has shape {arr.shape}, expected ({self.n},)")
            self._dense = arr
            self._dense.flags.writeable = False
            self._sparse = None
            probs = arr
        if probs.size and (probs.min() < 0.0 or probs.max() > 1.0):
            raise DomainError("probabilities must lie in [0, 1]")
        total = float(probs.sum())
        if abs(total - 1.0) > _PMF_SUM_TOL:
            raise DomainError(f"pmf sums to {total!r}, expected 1 within {_PMF_SUM_TOL}")

    @property
    def is_dense(self) -> bool:
        return self._dense is not None

    def pmf(self, i: int) -> float:
        """Probability of password index ``i``."""
        if not 0 <= i < self.n:
            raise DomainError(f"index {i} outside password space [0, {self.n})")
        if self._dense is not None:
            return float(self._dense[i])
        return self._sparse.get(int(i), 0.0)

    def pmf_array(self) -> np.ndarray:
        """Dense probability vector (read-only view)."""
        if self._dense is None:
            raise DomainError("model is stored sparsely; no dense pmf array")
        return self._dense

    def nonzero_items(self) -> tuple[np.ndarray, np.ndarray]:
        """(indices, probabilities) of the support, indices ascending."""
        if self._dense is not None:
            idx = np.flatnonzero(self._dense)
            return idx, self._dense[idx]
        idx = np.array(sorted(self._sparse), dtype=np.int64)
        return idx, np.array([self._sparse[i] for i in idx], dtype=float)

    def __repr__(self) -> str:
        kind = "dense" if self.is_dense else "sparse"
        lab = f" {self.label!r}" if self.label else ""
        return f"<PasswordModel{lab} n={self.n} ({kind})>"


def _round_significant(r: np.ndarray, digits: int = RATIO_SIGNIFICANT_DIGITS) -> np.ndarray:
    """Round positive entries to ``digits`` significant decimal digits."""
    out = np.array(r, dtype=float, copy=True)
    pos = out > 0
    if np.any(pos):
        exp = np.floor(np.log10(out[pos]))
        scale = np.power(10.0, digits - 1 - exp)
        out[pos] = np.round(out[pos] * scale) / scale
    return out


@dataclass(frozen=True)
class RatioSpectrum:
    """Grouped likelihood-ratio statistics of a (P, Q) model pair.

    ``ratios``/``p_mass``/``q_mass`` describe the finite groups with
    ratios strictly increasing; ``b`` is the P-mass of the +infinity
    group (passwords with Q = 0).  ``M`` is the largest finite ratio
    with positive Q-mass, 0.0 when no finite group exists.
    """

    ratios: np.ndarray
    p_mass: np.ndarray
    q_mass: np.ndarray
    b: float
    label: str = ""
    _cum_p: np.ndarray = field(init=False, repr=False, compare=False)
    _cum_q: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ratios = np.asarray(self.ratios, dtype=float)
        p = np.asarray(self.p_mass, dtype=float)
        q = np.asarray(self.q_mass, dtype=float)
        if not (ratios.shape == p.shape == q.shape):
            raise DomainError("ratio/p/q arrays must have identical shape")
        if ratios.size and not np.all(np.diff(ratios) > 0):
            raise DomainError("group ratios must be strictly increasing")
        if ratios.size and (ratios[0] < 0 or not np.isfinite(ratios[-1])):
            raise DomainError("finite groups must have finite nonnegative ratios")
        if not 0.0 <= self.b <= 1.0 + _PMF_SUM_TOL:
            raise DomainError(f"b={self.b} outside [0, 1]")
        if abs(p.sum() + self.b - 1.0) > _PMF_SUM_TOL:
            raise DomainError("finite p-mass plus b must sum to 1")
        if abs(q.sum() - 1.0) > _PMF_SUM_TOL:
            raise DomainError("q-mass must sum to 1")
        object.__setattr__(self, "ratios", ratios)
        object.__setattr__(self, "p_mass", p)
        object.__setattr__(self, "q_mass", q)
        object.__setattr__(self, "_cum_p", np.concatenate(([0.0], np.cumsum(p))))
        object.__setattr__(self, "_cum_q", np.concatenate(([0.0], np.cumsum(q))))
        for arr in (self.ratios, self.p_mass, self.q_mass):
            arr.flags.writeable = False

    @property
    def M(self) -> float:
        mask = self.q_mass > 0
        if not np.any(mask):
            return 0.0
        return float(self.ratios[mask][-1])

    @property
    def group_count(self) -> int:
        return int(self.ratios.size) + (1 if self.b > 0 else 0)

    def groups(self) -> Iterable[tuple[float, float, float]]:
        """Yield (ratio, p_mass, q_mass), the +inf group last if present."""
        for r, p, q in zip(self.ratios, self.p_mass, self.q_mass):
            yield float(r), float(p), float(q)
        if self.b > 0:
            yield math.inf, float(self.b), 0.0

    def cdf_G(self, x, strict: bool = False):
        """Q-side ratio CDF: Pr_{pw<-Q}[ratio <= x] (or < x when strict)."""
        side = "left" if strict else "right"
        idx = np.searchsorted(self.ratios, x, side=side)
        return self._cum_q[idx]

    def cdf_F(self, x, strict: bool = False):
        """P-side ratio CDF over finite ratios: Pr_{pw<-P}[ratio <= x]."""
        side = "left" if strict else "right"
        idx = np.searchsorted(self.ratios, x, side=side)
        return self._cum_p[idx]

    def to_json(self) -> str:
        groups = [[r, p, q] for r, p, q in zip(self.ratios, self.p_mass, self.q_mass)]
        if self.b > 0:
            groups.append(["inf", self.b, 0.0])
        return json.dumps({"groups": groups, "M": self.M, "b": self.b})

    @classmethod
    def from_json(cls, text: str) -> "RatioSpectrum":
        data = json.loads(text)
        finite = [(g[0], g[1], g[2]) for g in data["groups"] if g[0] != "inf"]
        return cls(
            ratios=np.array([g[0] for g in finite], dtype=float),
            p_mass=np.array([g[1] for g in finite], dtype=float),
            q_mass=np.array([g[2] for g in finite], dtype=float),
            b=float(data["b"]),
        )


def build_ratio_spectrum(P: PasswordModel, Q: PasswordModel, label: str = "") -> RatioSpectrum:
    """Group a shared password space by the exact ratio P(pw)/Q(pw).

    Passwords with Q = 0 and P > 0 are aggregated into the +infinity
    group (mass ``b``); passwords with P = Q = 0 can never appear in a
    sweetword list and are dropped.  Ratios are grouped after rounding
    to ``RATIO_SIGNIFICANT_DIGITS`` significant digits.
    """
    if P.n != Q.n:
        raise SpaceMismatchError(f"space sizes differ: P has {P.n}, Q has {Q.n}")
    if P.is_dense and Q.is_dense:
        p = P.pmf_array()
        q = Q.pmf_array()
    else:
        # Sparse path: only the union of supports matters.
        pi, pv = P.nonzero_items()
        qi, qv = Q.nonzero_items()
        union = np.union1d(pi, qi)
        p = np.zeros(union.size)
        q = np.zeros(union.size)
        p[np.searchsorted(union, pi)] = pv
        q[np.searchsorted(union, qi)] = qv

    b = float(p[q == 0.0].sum())
    keep = q > 0.0
    key = _round_significant(p[keep] / q[keep])
    values, inverse = np.unique(key, return_inverse=True)
    p_mass = np.bincount(inverse, weights=p[keep], minlength=values.size)
    q_mass = np.bincount(inverse, weights=q[keep], minlength=values.size)
    # The group's ratio is the q-weighted mean of its members' exact
    # ratios, i.e. p_mass / q_mass: the p = ratio * q identity then holds
    # by construction and its verifier flags grouping bugs, not rounding.
    ratios = p_mass / q_mass
    return RatioSpectrum(ratios=ratios, p_mass=p_mass, q_mass=q_mass, b=b, label=label)


@dataclass(frozen=True)
class IdentityReport:
    """Result of checking p_mass == ratio * q_mass across finite groups."""

    max_rel_deviation: float
    worst_ratio: float | None
    group_count: int

    def ok(self, tol: float = 1e-9) -> bool:
        return self.max_rel_deviation <= tol


def verify_ratio_identity(spec: RatioSpectrum) -> IdentityReport:
    """Measure the worst group-wise violation of p = ratio * q.

    Exact-rational inputs give zero deviation; any positive deviation on
    a freshly built spectrum points at a grouping problem.
    """
    if spec.ratios.size == 0:
        return IdentityReport(0.0, None, spec.group_count)
    expected = spec.ratios * spec.q_mass
    denom = np.maximum(np.maximum(np.abs(spec.p_mass), np.abs(expected)), 1e-300)
    rel = np.abs(spec.p_mass - expected) / denom
    # Groups with no mass on either side deviate by construction 0.
    rel[(spec.p_mass == 0) & (expected == 0)] = 0.0
    worst = int(np.argmax(rel))
    return IdentityReport(float(rel[worst]), float(spec.ratios[worst]), spec.group_count)


@dataclass(frozen=True)
class ContinuousRatioModel:
    """Analytic ratio distribution for the continuous case.

    ``G`` is the ratio CDF under a Q-draw on [0, M]; ``G_inv``, when
    supplied, is its inverse on [0, 1] and enables substitution
    quadrature without numerical root finding.
    """

    M: float
    b: float
    G: Callable[[float], float]
    G_inv: Callable[[float], float] | None = None
    label: str = ""

    def __post_init__(self):
        if self.M <= 0:
            raise DomainError(f"M must be positive, got {self.M}")
        if not 0.0 <= self.b < 1.0:
            raise DomainError(f"b={self.b} outside [0, 1)")
        if abs(self.G(self.M) - 1.0) > 1e-12:
            raise DomainError(f"G(M) = {self.G(self.M)!r}, expected 1")
        if self.G(0.0) < -1e-12:
            raise DomainError("G(0) must be >= 0")

    def inverse(self, u: float) -> float:
        """G^{-1}(u); bisection fallback when no analytic inverse is set."""
        if self.G_inv is not None:
            return self.G_inv(u)
        lo, hi = 0.0, self.M
        # G is nondecreasing; 100 bisection steps pin x to ~1e-30 * M.
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if self.G(mid) < u:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
