"""Game simulators and exact brute-force oracles.

Everything the closed-form modules claim is checkable against this one:
sweetword lists are actually generated (one P-draw, k-1 iid Q-draws,
shuffled), the optimal Bayesian attacker actually plays (descending
ratio order, uniform random tie order), and outcomes are counted.

Win checking comes in two flavors:

  * ``position`` -- a guess wins when it names the slot the real
    password was dealt into.  This matches the rank semantics of the
    closed-form flatness machinery exactly.
  * ``value`` -- a guess wins when the submitted password string equals
    the real one, so a honeyword that collided with the real password
    also wins.  This is the literal game contract; it exceeds the
    position-checked probability by at most the collision bound.

Flatness defaults to ``position`` (matching the formulas it validates),
the success-number game to ``value`` (matching the deployed check); both
accept either.  Brute-force oracles enumerate every outcome and average
tie orders analytically; they refuse instances beyond a cost guard.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import PasswordModel
from .errors import DomainError, InstanceTooLargeError
from .flatness import BRUTE_FORCE, MONTE_CARLO, MetricCurve
from .models import _alias_for, sample
from .parallel import DEFAULT_CHUNK, chunk_rng, run_chunked
from .successnum import ratio_lookup

POSITION = "position"
VALUE = "value"

BRUTE_FLAT_LIMIT = 1_000_000
BRUTE_SN_LIMIT = 10_000_000


def _check_win_mode(win_check: str):
    if win_check not in (POSITION, VALUE):
        raise DomainError(f"win_check must be 'position' or 'value', got {win_check!r}")


@dataclass(frozen=True)
class SweetwordList:
    """One account's stored list: k password indices, one of them real."""

    words: np.ndarray
    true_index: int
    k: int

    def __post_init__(self):
        if len(self.words) != self.k:
            raise DomainError("sweetword list length must equal k")
        if not 0 <= self.true_index < self.k:
            raise DomainError("true_index outside the list")


def gen_swl(P: PasswordModel, Q: PasswordModel, k: int, rng: np.random.Generator) -> SweetwordList:
    """One P-draw plus k-1 iid Q-draws, uniformly shuffled.

    Duplicates are allowed, exactly as the games sample them.
    """
    if k < 2:
        raise DomainError(f"k >= 2 required, got {k}")
    words = np.empty(k, dtype=np.int64)
    words[0] = sample(P, rng)
    words[1:] = sample(Q, rng, k - 1)
    perm = rng.permutation(k)
    return SweetwordList(words=words[perm], true_index=int(np.flatnonzero(perm == 0)[0]), k=k)


@dataclass(frozen=True)
class GuessOrder:
    """Attacker's ranked positions with the Bayes posterior per slot."""

    positions: np.ndarray
    posteriors: np.ndarray
    degenerate: bool = False


def optimal_guess_order(swl: SweetwordList, P: PasswordModel, Q: PasswordModel,
                        rng: np.random.Generator) -> GuessOrder:
    """Sort positions by descending P/Q ratio, ties in uniform random order.

    Posteriors follow the Bayes rule weight r_m / sum_j r_j; slots whose
    value Q cannot generate carry infinite ratio and split posterior 1.
    A list where every slot has P = 0 cannot arise from the generator
    (the real password has positive P); it is reported with uniform
    posteriors and flagged.
    """
    ratios = np.array([P.pmf(int(w)) / Q.pmf(int(w)) if Q.pmf(int(w)) > 0 else
                       (math.inf if P.pmf(int(w)) > 0 else 0.0) for w in swl.words])
    order = np.lexsort((rng.random(swl.k), -ratios))
    if np.any(np.isinf(ratios)):
        posteriors = np.where(np.isinf(ratios), 1.0, 0.0)
        posteriors /= posteriors.sum()
        return GuessOrder(order, posteriors)
    total = ratios.sum()
    if total == 0.0:
        return GuessOrder(order, np.full(swl.k, 1.0 / swl.k), degenerate=True)
    return GuessOrder(order, ratios / total)


# ---------------------------------------------------------------------------
# Monte Carlo flatness game
# ---------------------------------------------------------------------------

def _first_candidate_rank(rng, block_size, candidates, max_k):
    """Rank (1-based) of the first of ``candidates`` marked members in a
    uniform random order of a block, vectorized inverse-CDF sampling:
    P[X > x] = C(s-m, x) / C(s, x)."""
    n = block_size.size
    steps = np.arange(max_k, dtype=float)[None, :]
    s = block_size[:, None].astype(float)
    m = candidates[:, None].astype(float)
    frac = np.clip(s - m - steps, 0.0, None) / np.maximum(s - steps, 1.0)
    frac[s - steps <= 0] = 0.0
    survival = np.cumprod(frac, axis=1)
    u = rng.random(n)
    return 1 + (survival > u[:, None]).sum(axis=1)


def _flat_chunk(rng, P, Q, ratios, k, n, win_check):
    p_alias, p_map = _alias_for(P)
    q_alias, q_map = _alias_for(Q)
    true_idx = p_alias.draw(rng, n)
    if p_map is not None:
        true_idx = p_map[true_idx]
    hw_idx = q_alias.draw(rng, n * (k - 1)).reshape(n, k - 1)
    if q_map is not None:
        hw_idx = q_map[hw_idx]
    r_true = ratios[true_idx][:, None]
    r_hw = ratios[hw_idx]
    above = (r_hw > r_true).sum(axis=1)
    tied = (r_hw == r_true).sum(axis=1)
    if win_check == POSITION:
        # The real password's slot is uniform inside its tie block.
        rank = above + 1 + rng.integers(0, tied + 1)
    else:
        dup = (hw_idx == true_idx[:, None]).sum(axis=1)
        rank = above + _first_candidate_rank(rng, tied + 1, dup + 1, k)
    return np.bincount(rank, minlength=k + 2)


def monte_carlo_flatness(
    P: PasswordModel,
    Q: PasswordModel,
    k: int,
    i_max: int | None = None,
    trials: int = 1_000_000,
    seed: int = 0,
    chunk_size: int = DEFAULT_CHUNK,
    threads: int | None = None,
    win_check: str = POSITION,
) -> MetricCurve:
    """Empirical Pr[win within i guesses] with binomial standard errors."""
    i_max = k if i_max is None else i_max
    if k < 2 or not 1 <= i_max <= k:
        raise DomainError(f"need k >= 2 and 1 <= i_max <= k, got k={k}, i_max={i_max}")
    if trials < 1:
        raise DomainError("trials >= 1 required")
    _check_win_mode(win_check)
    ratios = ratio_lookup(P, Q)

    def worker(c, n):
        return _flat_chunk(chunk_rng(seed, c), P, Q, ratios, k, n, win_check)

    counts = sum(run_chunked(worker, trials, chunk_size, threads))
    cdf = np.cumsum(counts)[1 : i_max + 1]
    p_hat = cdf / trials
    stderr = np.sqrt(p_hat * (1.0 - p_hat) / trials)
    near_edge = bool(np.any((p_hat < 5 * stderr) | (1.0 - p_hat < 5 * stderr)))
    return MetricCurve(
        indices=np.arange(1, i_max + 1),
        values=p_hat,
        method=MONTE_CARLO,
        meta={"trials": trials, "seed": seed, "k": k, "stderr": stderr,
              "chunk_size": chunk_size, "win_check": win_check,
              "edge_estimate": near_edge},
    )


# ---------------------------------------------------------------------------
# Success-number game
# ---------------------------------------------------------------------------

def _play_sn_game(rng, P, Q, ratios, k, U, t_max, win_check):
    """One full game; returns SN at thresholds 1..t_max."""
    p_alias, p_map = _alias_for(P)
    q_alias, q_map = _alias_for(Q)
    true_idx = p_alias.draw(rng, U)
    if p_map is not None:
        true_idx = p_map[true_idx]
    hw_idx = q_alias.draw(rng, U * (k - 1)).reshape(U, k - 1)
    if q_map is not None:
        hw_idx = q_map[hw_idx]

    slots = np.concatenate((true_idx[:, None], hw_idx), axis=1)
    r = ratios[slots]
    r_true = r[:, 0]
    finite_total = np.where(np.isinf(r_true), 1.0, r_true) + r[:, 1:].sum(axis=1)
    top = r.max(axis=1)
    w = np.where(np.isinf(r_true), 1.0, top / finite_total)

    # Top-posterior slot, ties broken uniformly.
    tiebreak = rng.random((U, k))
    is_top = r == top[:, None]
    pick = np.argmax(np.where(is_top, tiebreak, -1.0), axis=1)
    submitted = slots[np.arange(U), pick]
    if win_check == VALUE:
        success = submitted == true_idx
    else:
        success = pick == 0
    success = np.where(np.isinf(r_true), True, success)

    order = np.lexsort((rng.random(U), -w))
    s = success[order]
    fail_pos = np.flatnonzero(~s)
    total_success = int(s.sum())
    sn = np.empty(t_max, dtype=np.int64)
    for t in range(1, t_max + 1):
        if t <= fail_pos.size:
            sn[t - 1] = fail_pos[t - 1] - (t - 1)
        else:
            sn[t - 1] = total_success
    return sn


def sn_game(P: PasswordModel, Q: PasswordModel, k: int, U: int, t: int,
            seed: int = 0, win_check: str = VALUE) -> int:
    """Play one seeded game; success count when the t-th failure hits."""
    if U < 1 or t < 1 or k < 2:
        raise DomainError("need U >= 1, t >= 1, k >= 2")
    _check_win_mode(win_check)
    ratios = ratio_lookup(P, Q)
    return int(_play_sn_game(chunk_rng(seed, 0), P, Q, ratios, k, U, t, win_check)[t - 1])


def monte_carlo_sn(
    P: PasswordModel,
    Q: PasswordModel,
    k: int,
    U: int,
    t_max: int,
    games: int = 1000,
    seed: int = 0,
    chunk_size: int = 64,
    threads: int | None = None,
    win_check: str = VALUE,
) -> MetricCurve:
    """Mean success-number over independent games, one guess per account."""
    if U < 1 or t_max < 1 or k < 2 or games < 1:
        raise DomainError("need U >= 1, t_max >= 1, k >= 2, games >= 1")
    _check_win_mode(win_check)
    ratios = ratio_lookup(P, Q)

    def worker(c, n):
        rng = chunk_rng(seed, c)
        out = np.empty((n, t_max), dtype=np.int64)
        for g in range(n):
            out[g] = _play_sn_game(rng, P, Q, ratios, k, U, t_max, win_check)
        return out

    traces = np.vstack(run_chunked(worker, games, chunk_size, threads))
    mean = traces.mean(axis=0)
    stderr = traces.std(axis=0, ddof=1) / math.sqrt(games) if games > 1 else np.full(t_max, np.nan)
    return MetricCurve(
        indices=np.arange(1, t_max + 1),
        values=mean,
        method=MONTE_CARLO,
        meta={"games": games, "seed": seed, "U": U, "k": k, "stderr": stderr,
              "chunk_size": chunk_size, "win_check": win_check},
    )


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------

def _outcome_stats(r_pw, pw, hw_indices, ratios, win_check):
    """(w, success probability over the uniform tie order) for one outcome."""
    r_hw = ratios[list(hw_indices)]
    if math.isinf(r_pw):
        return 1.0, 1.0
    top = max(r_pw, r_hw.max()) if r_hw.size else r_pw
    w = top / (r_pw + r_hw.sum())
    if r_pw < top:
        return w, 0.0
    block = 1 + int((r_hw == r_pw).sum())
    if win_check == VALUE:
        hits = 1 + int((np.asarray(hw_indices) == pw).sum())
    else:
        hits = 1
    return w, hits / block


def _brute_outcomes(P, Q, k, win_check):
    """Enumerate (probability, w, success_prob) over all sweetword draws."""
    ratios = ratio_lookup(P, Q)
    supp_p, pv = P.nonzero_items()
    supp_q, qv = Q.nonzero_items()
    outcomes = []
    for pw, ppw in zip(supp_p, pv):
        r_pw = ratios[pw]
        for hws in itertools.product(range(supp_q.size), repeat=k - 1):
            prob = ppw * math.prod(qv[h] for h in hws)
            hw_idx = supp_q[list(hws)]
            w, sp = _outcome_stats(r_pw, pw, hw_idx, ratios, win_check)
            outcomes.append((prob, w, sp))
    return outcomes


def brute_force_flatness(P: PasswordModel, Q: PasswordModel, k: int,
                         i_max: int | None = None, win_check: str = POSITION) -> MetricCurve:
    """Exact flatness by enumerating every sweetword draw.

    Tie orders are averaged analytically: with ``a`` honeywords strictly
    above and a tie block of size s containing m winning slots, the win
    probability within i guesses is 1 - C(s-m, c)/C(s, c), c the number
    of block slots among the first i guesses.
    """
    i_max = k if i_max is None else i_max
    if k < 2 or not 1 <= i_max <= k:
        raise DomainError(f"need k >= 2 and 1 <= i_max <= k, got k={k}, i_max={i_max}")
    _check_win_mode(win_check)
    cost = float(P.n) ** k
    if cost > BRUTE_FLAT_LIMIT:
        raise InstanceTooLargeError(
            f"brute-force flatness needs n^k <= {BRUTE_FLAT_LIMIT:g}, got {cost:g}", cost)
    ratios = ratio_lookup(P, Q)
    supp_p, pv = P.nonzero_items()
    supp_q, qv = Q.nonzero_items()
    eps = np.zeros(i_max)
    for pw, ppw in zip(supp_p, pv):
        r_pw = ratios[pw]
        for hws in itertools.product(range(supp_q.size), repeat=k - 1):
            prob = ppw * math.prod(qv[h] for h in hws)
            hw_idx = supp_q[list(hws)]
            r_hw = ratios[hw_idx]
            if math.isinf(r_pw):
                above, block, hits = 0, 1, 1
            else:
                above = int((r_hw > r_pw).sum())
                block = 1 + int((r_hw == r_pw).sum())
                hits = 1 + int((hw_idx == pw).sum()) if win_check == VALUE else 1
            for i in range(1, i_max + 1):
                c = min(max(i - above, 0), block)
                win = 1.0 - math.comb(block - hits, c) / math.comb(block, c)
                eps[i - 1] += prob * win
    return MetricCurve(
        indices=np.arange(1, i_max + 1), values=eps, method=BRUTE_FORCE,
        meta={"k": k, "win_check": win_check},
    )


def _expected_sn_for_order(success_probs, t_max):
    """E[SN_t], t = 1..t_max, for independent Bernoulli successes in order."""
    fail = np.zeros(t_max + 1)
    fail[0] = 1.0
    esn = np.zeros(t_max)
    for sp in success_probs:
        esn += sp * np.cumsum(fail)[:t_max]
        shifted = np.concatenate(([0.0], fail[:-1]))
        shifted[-1] += fail[-1]  # cap: >= t_max failures all equivalent
        fail = sp * fail + (1.0 - sp) * shifted
    return esn


def _average_over_tie_orders(accounts, t_max):
    """Average E[SN_t] over uniform orders of accounts tied on w."""
    by_w: dict[float, list[float]] = {}
    for w, sp in accounts:
        by_w.setdefault(w, []).append(sp)
    blocks = [by_w[w] for w in sorted(by_w, reverse=True)]
    total = np.zeros(t_max)
    n_orders = 0
    for perms in itertools.product(*(itertools.permutations(b) for b in blocks)):
        order = [sp for block in perms for sp in block]
        total += _expected_sn_for_order(order, t_max)
        n_orders += 1
    return total / n_orders


def brute_force_sn(P: PasswordModel, Q: PasswordModel, k: int, U: int,
                   t_max: int, win_check: str = VALUE) -> MetricCurve:
    """Exact expected success-number by enumerating account outcomes,
    averaging tie orders and success randomness analytically."""
    if U < 1 or t_max < 1 or k < 2:
        raise DomainError("need U >= 1, t_max >= 1, k >= 2")
    _check_win_mode(win_check)
    cost = (float(P.n) ** k) ** U * math.factorial(U)
    if cost > BRUTE_SN_LIMIT:
        raise InstanceTooLargeError(
            f"brute-force success-number needs (n^k)^U * U! <= {BRUTE_SN_LIMIT:g}, "
            f"got {cost:g}", cost)

    outcomes = _brute_outcomes(P, Q, k, win_check)
    # Collapse outcomes with identical (w, success prob).
    classes: dict[tuple[float, float], float] = {}
    for prob, w, sp in outcomes:
        classes[(w, sp)] = classes.get((w, sp), 0.0) + prob
    items = list(classes.items())

    expected = np.zeros(t_max)
    for combo in itertools.product(range(len(items)), repeat=U):
        prob = math.prod(items[c][1] for c in combo)
        accounts = [items[c][0] for c in combo]
        expected += prob * _average_over_tie_orders(accounts, t_max)
    return MetricCurve(
        indices=np.arange(1, t_max + 1), values=expected, method=BRUTE_FORCE,
        meta={"U": U, "k": k, "win_check": win_check},
    )
