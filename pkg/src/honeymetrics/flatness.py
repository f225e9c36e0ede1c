"""The flatness curve: how fast an optimal attacker finds the real password.

``epsilon(i)`` is the best possible probability of identifying the real
password within ``i`` guesses from a list of one P-draw and k-1 Q-draws.
The optimal attacker guesses in descending likelihood-ratio order with
uniformly random tie order, so with ``a`` honeywords strictly above the
real password's ratio and ``e`` tied with it, the real password's rank
is a + 1 + u with u uniform on {0..e}.  Summing Pr[rank <= i] over the
multinomial (a, e) split gives the exact discrete curve; at i = 1 it
collapses to the closed form

    epsilon(1) = b + sum_x (x / k) * (G(x)^k - G(x^-)^k)

and in the continuous case to  b + (M - integral of G^k) / k.

Also here: the Zipf-against-uniform beta-function closed form, missing
mass of corpus-trained generators (how much real-password mass the
generator can never produce), and the union bound on sweetword
collisions that limits how much the "all sweetwords distinct" variant
can differ from the curves computed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .core import ContinuousRatioModel, PasswordModel, RatioSpectrum
from .errors import DomainError, NumericalError

DEFAULT_QUAD_TOL = 1e-10

# MetricCurve.method values
DISCRETE_EXACT = "discrete-exact"
QUADRATURE = "quadrature"
CLOSED_FORM = "closed-form"
MONTE_CARLO = "monte-carlo"
BRUTE_FORCE = "brute-force"
DELTA_APPROX = "delta-approx"


@dataclass(frozen=True)
class MetricCurve:
    """An indexed metric curve (flatness or success-number) with provenance.

    ``meta`` records whatever reproduces the values: seed, trial count,
    tolerance, stderr per point for Monte Carlo methods.
    """

    indices: np.ndarray
    values: np.ndarray
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=float)
        if idx.shape != val.shape:
            raise DomainError("indices and values must have the same length")
        if idx.size and (idx[0] < 1 or np.any(np.diff(idx) <= 0)):
            raise DomainError("indices must be strictly increasing positive integers")
        # Both metric families are cumulative; tolerate only float jitter.
        if val.size and np.any(np.diff(val) < -1e-9):
            raise DomainError("curve values must be nondecreasing")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    def value_at(self, i: int) -> float:
        pos = np.searchsorted(self.indices, i)
        if pos >= self.indices.size or self.indices[pos] != i:
            raise DomainError(f"index {i} not on the curve")
        return float(self.values[pos])

    def points(self):
        return list(zip(self.indices.tolist(), self.values.tolist()))


def _check_k_i(k: int, i_max: int):
    if k < 2:
        raise DomainError(f"need at least one honeyword: k >= 2, got {k}")
    if not 1 <= i_max <= k:
        raise DomainError(f"i_max must be in [1, k], got i_max={i_max}, k={k}")


def flatness_discrete(spec: RatioSpectrum, k: int, i_max: int | None = None,
                      group_chunk: int = 4096) -> MetricCurve:
    """Exact flatness curve of a discrete ratio spectrum.

    Per finite ratio group x with P-mass f(x), the k-1 honeywords split
    multinomially into (above, tied, below) with probabilities
    (1 - G(x), g(x), G(x^-)); the rank distribution follows from the
    uniform tie order.  The +infinity group contributes its full mass b
    to every index (a Q-zero password is always guessed first).
    Multinomial weights are evaluated in log space.
    """
    i_max = k if i_max is None else i_max
    _check_k_i(k, i_max)

    m = k - 1
    # All (a, e) splits with a + e <= m, flattened.
    a_idx, e_idx = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="ij")
    keep = (a_idx + e_idx) <= m
    a_idx = a_idx[keep].astype(float)
    e_idx = e_idx[keep].astype(float)
    r_idx = m - a_idx - e_idx
    log_multinomial = (
        gammaln(m + 1)
        - gammaln(a_idx + 1)
        - gammaln(e_idx + 1)
        - gammaln(r_idx + 1)
    )

    G = np.cumsum(spec.q_mass)
    G_minus = G - spec.q_mass
    p_above = np.clip(1.0 - G, 0.0, 1.0)
    p_tie = spec.q_mass
    p_below = G_minus
    # log(0) -> large negative; index 0 contributes exactly 0 * log.
    with np.errstate(divide="ignore"):
        log_above = np.log(np.maximum(p_above, 1e-300))
        log_tie = np.log(np.maximum(p_tie, 1e-300))
        log_below = np.log(np.maximum(p_below, 1e-300))

    # Each (group, a, e) term adds a ramp in i: slope p*w/(e+1) on
    # [a+1, a+e+1].  Accumulate slopes in a difference array.
    slope_diff = np.zeros(k + 2)
    n_groups = spec.ratios.size
    for lo in range(0, n_groups, group_chunk):
        hi = min(lo + group_chunk, n_groups)
        logw = (
            log_multinomial[None, :]
            + a_idx[None, :] * log_above[lo:hi, None]
            + e_idx[None, :] * log_tie[lo:hi, None]
            + r_idx[None, :] * log_below[lo:hi, None]
        )
        w = np.exp(logw) * spec.p_mass[lo:hi, None]
        slopes = (w / (e_idx[None, :] + 1.0)).sum(axis=0)
        np.add.at(slope_diff, (a_idx + 1).astype(int), slopes)
        np.add.at(slope_diff, (a_idx + e_idx + 2).astype(int), -slopes)

    slope = np.cumsum(slope_diff)[1 : k + 1]
    eps = spec.b + np.cumsum(slope)
    return MetricCurve(
        indices=np.arange(1, i_max + 1),
        values=np.minimum(eps[:i_max], 1.0),
        method=DISCRETE_EXACT,
        meta={"k": k, "b": spec.b, "M": spec.M},
    )


def theorem_epsilon1_discrete(spec: RatioSpectrum, k: int) -> float:
    """Closed-form epsilon(1) = b + sum_x (x/k)(G(x)^k - G(x^-)^k).

    O(#groups); the independent cross-check for ``flatness_discrete``
    at i = 1 and the fast path for very large spectra.
    """
    if k < 2:
        raise DomainError(f"k >= 2 required, got {k}")
    G = np.cumsum(spec.q_mass)
    G_minus = G - spec.q_mass
    return float(spec.b + np.sum(spec.ratios * (G ** k - G_minus ** k)) / k)


def _quad(func, lo, hi, tol):
    value, err = integrate.quad(func, lo, hi, epsabs=tol, epsrel=tol, limit=200)
    if err > 50 * max(tol, 1e-15):
        raise NumericalError(
            f"quadrature achieved error {err:.3e}, requested {tol:.3e}", achieved=err
        )
    return value


def epsilon1_continuous(model: ContinuousRatioModel, k: int, tol: float = DEFAULT_QUAD_TOL) -> float:
    """epsilon(1) = (M - integral_0^M G^k) / k + b."""
    if k < 2:
        raise DomainError(f"k >= 2 required, got {k}")
    integral = _quad(lambda x: model.G(x) ** k, 0.0, model.M, tol)
    return (model.M - integral) / k + model.b


def flatness_continuous(
    model: ContinuousRatioModel,
    k: int,
    i_max: int | None = None,
    tol: float = DEFAULT_QUAD_TOL,
) -> MetricCurve:
    """Flatness curve by substitution quadrature in u = G(x) space.

    The j-th increment is C(k-1, j-1) * integral_0^1 of
    G^{-1}(u) u^{k-j} (1-u)^{j-1} du; the substitution removes any
    endpoint singularity the x-space density may have.  epsilon(1) is
    cross-checked against the independent closed form and a mismatch
    beyond 10x the quadrature tolerance raises.
    """
    i_max = k if i_max is None else i_max
    _check_k_i(k, i_max)
    inv = np.vectorize(model.inverse) if model.G_inv is None else model.G_inv

    increments = []
    for j in range(1, i_max + 1):
        coef = math.comb(k - 1, j - 1)
        integrand = lambda u, j=j, coef=coef: (
            coef * inv(u) * u ** (k - j) * (1.0 - u) ** (j - 1)
        )
        increments.append(_quad(integrand, 0.0, 1.0, tol))
    values = model.b + np.cumsum(increments)

    check = epsilon1_continuous(model, k, tol)
    if abs(values[0] - check) > 10 * tol:
        raise NumericalError(
            f"epsilon(1) routes disagree: {values[0]!r} vs {check!r}",
            achieved=abs(values[0] - check),
        )
    return MetricCurve(
        indices=np.arange(1, i_max + 1),
        values=np.minimum(values, 1.0),
        method=QUADRATURE,
        meta={"k": k, "tolerance": tol, "epsilon1_closed_form": check},
    )


def zipf_flatness_closed_form(alpha: float, k: int, i_max: int | None = None) -> MetricCurve:
    """Large-n flatness of Zipf(alpha) passwords against a uniform generator:

        epsilon(i) = sum_{j<=i} (1 - alpha) C(k-1, j-1) B(j - alpha, k+1-j)

    evaluated via log-gamma.  Asymptotic in the space size n, so expect
    a few percent of gap against the exact discrete curve at n ~ 1e6.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0, 1), got {alpha}")
    i_max = k if i_max is None else i_max
    _check_k_i(k, i_max)
    j = np.arange(1, i_max + 1, dtype=float)
    log_choose = gammaln(k) - gammaln(j) - gammaln(k - j + 1)
    log_beta = gammaln(j - alpha) + gammaln(k + 1 - j) - gammaln(k + 1 - alpha)
    terms = (1.0 - alpha) * np.exp(log_choose + log_beta)
    return MetricCurve(
        indices=np.arange(1, i_max + 1),
        values=np.minimum(np.cumsum(terms), 1.0),
        method=CLOSED_FORM,
        meta={"alpha": alpha, "k": k},
    )


@dataclass(frozen=True)
class MissingMassEstimate:
    """Expected generator-unreachable mass E[b] for an iid training set.

    ``direct`` is the exact finite-n expectation; ``approx`` the
    exponential approximation (uniform) or the truncated alternating
    zeta series (Zipf).  ``terms_used`` is set for the series.
    """

    direct: float
    approx: float
    kind: str
    terms_used: int | None = None


def uniform_missing_mass(n: int, sample_size: int) -> MissingMassEstimate:
    """E[b] for a list model trained on |S| iid draws from uniform(n)."""
    if n < 1 or sample_size < 0:
        raise DomainError("need n >= 1 and sample_size >= 0")
    if sample_size == 0:
        direct = 1.0
    elif n == 1:
        direct = 0.0
    else:
        direct = math.exp(sample_size * math.log1p(-1.0 / n))
    return MissingMassEstimate(
        direct=direct, approx=math.exp(-sample_size / n), kind="uniform"
    )


def zipf_missing_mass_direct(alpha: float, n: int, sample_size: int) -> float:
    """Exact E[b] = sum_i p_i (1 - p_i)^|S| for Zipf(alpha, n)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0, 1), got {alpha}")
    ranks = np.arange(1, n + 1, dtype=float)
    p = ranks ** -alpha
    p /= p.sum()
    return float(np.sum(p * np.exp(sample_size * np.log1p(-p))))


def zipf_missing_mass_series(
    alpha: float,
    n: int,
    sample_size: int,
    max_terms: int = 200,
    rel_tol: float = 1e-12,
) -> tuple[float, int]:
    """Alternating zeta series for the Zipf missing mass:

        1 + sum_{j>=1} (-1)^j |S|^j zeta(alpha (j+1)) / (j! A^{j+1})

    with A = sum_{r<=n} r^-alpha.  The terms peak near j = |S|/A before
    the factorial wins, so the sum is evaluated in arbitrary precision
    sized to the peak; in plain doubles the cancellation destroys the
    result whenever |S| is a few times larger than A.  Raises when the
    term budget cannot reach ``rel_tol``.  Requires alpha > 0.5 so every
    zeta argument exceeds 1.
    """
    if not 0.5 < alpha < 1.0:
        raise DomainError(f"series needs alpha in (0.5, 1), got {alpha}")
    ranks = np.arange(1, n + 1, dtype=float)
    A = float(np.sum(ranks ** -alpha))
    x = sample_size / A
    # Terms grow like x^j / j! until j ~ x; they cannot decay inside the
    # budget unless e*x is well below max_terms.  Refuse up front rather
    # than grind through hundreds of digits to the same conclusion.
    if math.e * x > max_terms:
        raise NumericalError(
            f"zeta series cannot converge within {max_terms} terms: the peak "
            f"sits at j ~ |S|/A = {x:.1f}; use the direct sum instead",
            achieved=math.inf,
        )
    # Peak term ~ e^x; keep ~20 digits beyond it.
    dps = int(30 + x * math.log10(math.e))
    with mpmath.workdps(dps):
        S = mpmath.mpf(sample_size)
        A_mp = mpmath.mpf(A)
        total = mpmath.mpf(1)
        term = mpmath.mpf(1)
        for j in range(1, max_terms + 1):
            term = term * (-S) / j
            contribution = term * mpmath.zeta(alpha * (j + 1)) / A_mp ** (j + 1)
            total += contribution
            if abs(contribution) < rel_tol * abs(total) and j > x:
                return float(total), j
    raise NumericalError(
        f"zeta series did not converge within {max_terms} terms "
        f"(|S|/A = {x:.1f}); use the direct sum instead",
        achieved=float(abs(contribution)),
    )


def zipf_missing_mass(alpha: float, n: int, sample_size: int) -> MissingMassEstimate:
    direct = zipf_missing_mass_direct(alpha, n, sample_size)
    series, terms = zipf_missing_mass_series(alpha, n, sample_size)
    return MissingMassEstimate(direct=direct, approx=series, kind="zipf", terms_used=terms)


def collision_bound(P: PasswordModel, Q: PasswordModel, k: int) -> float:
    """Union bound on Pr[some two sweetwords coincide]:

        sum_pw P(pw) (1 - (1 - Q(pw))^{k-1})  +  C(k-1, 2) sum_pw Q(pw)^2.

    Flatness under a distinct-sweetwords constraint differs from the
    unconstrained curves by at most this probability.
    """
    if P.n != Q.n:
        raise DomainError("collision bound needs a shared password space")
    if k < 2:
        raise DomainError(f"k >= 2 required, got {k}")
    pi, pv = P.nonzero_items()
    q_at_p = np.array([Q.pmf(int(i)) for i in pi]) if not Q.is_dense else Q.pmf_array()[pi]
    pw_hits_hw = float(np.sum(pv * -np.expm1((k - 1) * np.log1p(-q_at_p))))
    _, qv = Q.nonzero_items()
    hw_pair = math.comb(k - 1, 2) * float(np.sum(qv ** 2))
    return pw_hits_hw + hw_pair


def uniform_collision_closed_form(n: int, k: int) -> float:
    """The looser closed form (k^2 + 2k - 2) / (2n) for uniform Q."""
    if n < 1 or k < 2:
        raise DomainError("need n >= 1 and k >= 2")
    return (k * k + 2 * k - 2) / (2.0 * n)


def curve_to_rows(curve: MetricCurve, value_name: str) -> list[str]:
    """CSV rows "i,<value>,method" with 12 significant digits."""
    rows = [f"i,{value_name},method"]
    for i, v in curve.points():
        rows.append(f"{i},{v:.12g},{curve.method}")
    return rows
