"""Concrete password-distribution constructors and sampling.

Uniform and Zipf models live on an integer index space (Zipf rank r has
probability r^-alpha / sum_j j^-alpha, ranks descending).  Corpus-trained
"list" models use a password's empirical frequency; their space is the
corpus vocabulary, optionally widened by a reference vocabulary whose
unseen entries get probability zero.

Sampling uses Vose's alias method: O(n) table build, O(1) per draw,
fully vectorized and deterministic for a given numpy Generator.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import ContinuousRatioModel, PasswordModel
from .errors import DomainError


class AliasSampler:
    """Vose alias tables over a probability vector."""

    def __init__(self, probs: np.ndarray):
        probs = np.asarray(probs, dtype=float)
        n = probs.size
        if n == 0:
            raise DomainError("cannot sample from an empty distribution")
        scaled = probs * n / probs.sum()
        self.n = n
        self.prob = np.ones(n)
        self.alias = np.arange(n)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        scaled = scaled.copy()
        while small and large:
            s = small.pop()
            l = large.pop()
            self.prob[s] = scaled[s]
            self.alias[s] = l
            scaled[l] -= 1.0 - scaled[s]
            (small if scaled[l] < 1.0 else large).append(l)
        # Leftovers are 1.0 up to float error.
        for i in small + large:
            self.prob[i] = 1.0

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        j = rng.integers(0, self.n, size=size)
        accept = rng.random(size) < self.prob[j]
        return np.where(accept, j, self.alias[j])


def _alias_for(model: PasswordModel) -> tuple[AliasSampler, np.ndarray | None]:
    """Cached alias sampler; sparse models sample over their support."""
    if model._alias is None:
        if model.is_dense:
            model._alias = (AliasSampler(model.pmf_array()), None)
        else:
            idx, probs = model.nonzero_items()
            model._alias = (AliasSampler(probs), idx)
    return model._alias


def sample(model: PasswordModel, rng: np.random.Generator, size: int | None = None):
    """Draw password indices distributed per the model's pmf."""
    sampler, remap = _alias_for(model)
    out = sampler.draw(rng, size if size is not None else 1)
    if remap is not None:
        out = remap[out]
    return out if size is not None else int(out[0])


def uniform_model(n: int, label: str = "") -> PasswordModel:
    """Uniform distribution over n passwords."""
    if n < 1:
        raise DomainError(f"uniform model needs n >= 1, got {n}")
    return PasswordModel(n, np.full(n, 1.0 / n), label=label or f"uniform({n})")


@dataclass(frozen=True)
class ZipfParams:
    """Zipf exponent, space size and the exact normalizer sum_j j^-alpha."""

    alpha: float
    n: int
    S_norm: float

    def asymptotic_norm(self) -> float:
        """n^(1-alpha) / (1-alpha); within a few percent of S_norm for large n."""
        return self.n ** (1.0 - self.alpha) / (1.0 - self.alpha)


def zipf_params(alpha: float, n: int) -> ZipfParams:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"zipf exponent must be in (0, 1), got {alpha}")
    if n < 1:
        raise DomainError(f"zipf model needs n >= 1, got {n}")
    ranks = np.arange(1, n + 1, dtype=float)
    return ZipfParams(alpha=alpha, n=n, S_norm=float(np.sum(ranks ** -alpha)))


def zipf_model(alpha: float, n: int, label: str = "") -> PasswordModel:
    """Zipf(alpha, n): index i holds rank i+1, probabilities descending."""
    params = zipf_params(alpha, n)
    ranks = np.arange(1, n + 1, dtype=float)
    pmf = ranks ** -alpha / params.S_norm
    return PasswordModel(n, pmf, label=label or f"zipf({alpha},{n})")


@dataclass(frozen=True)
class Corpus:
    """A multiset of training passwords; size counts duplicates."""

    entries: tuple[str, ...]
    size: int

    @classmethod
    def from_entries(cls, entries: Sequence[str]) -> "Corpus":
        entries = tuple(entries)
        if not entries:
            raise DomainError("corpus is empty")
        return cls(entries=entries, size=len(entries))

    @classmethod
    def from_file(cls, path: str | Path) -> "Corpus":
        # Each line is a verbatim password: strip only the line ending
        # (LF or CRLF); no case folding, no whitespace trimming.
        text = Path(path).read_text(encoding="utf-8")
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        return cls.from_entries([ln[:-1] if ln.endswith("\r") else ln for ln in lines])


def train_list_model(
    corpus: Corpus,
    reference_vocab: Sequence[str] | None = None,
    label: str = "",
) -> PasswordModel:
    """Empirical distribution of a corpus: pmf(pw) = count(pw) / |S|.

    The password space is the corpus vocabulary extended by
    ``reference_vocab``; reference entries absent from the corpus get
    probability zero.  Index order: first appearance in the corpus,
    then first appearance in the reference.
    """
    counts = Counter(corpus.entries)
    vocab: dict[str, int] = {}
    for pw in corpus.entries:
        if pw not in vocab:
            vocab[pw] = len(vocab)
    for pw in reference_vocab or ():
        if pw not in vocab:
            vocab[pw] = len(vocab)
    pmf = np.zeros(len(vocab))
    for pw, c in counts.items():
        pmf[vocab[pw]] = c / corpus.size
    return PasswordModel(
        len(vocab), pmf, label=label or f"list(|S|={corpus.size})",
        vocab=tuple(vocab),
    )


def train_list_model_indices(samples: np.ndarray, space_size: int, label: str = "") -> PasswordModel:
    """List model over an integer space: counts of sampled indices / N.

    Used when the ground-truth model P owns the space, e.g. to measure
    how much P-mass a corpus-trained generator misses.
    """
    samples = np.asarray(samples, dtype=np.int64)
    if samples.size == 0:
        raise DomainError("corpus is empty")
    if samples.min() < 0 or samples.max() >= space_size:
        raise DomainError("sample index outside the password space")
    pmf = np.bincount(samples, minlength=space_size) / samples.size
    return PasswordModel(space_size, pmf, label=label or f"list(|S|={samples.size})")


def linear_example() -> ContinuousRatioModel:
    """Worked continuous example: true-password density x + 0.5 on [0, 1]
    against a uniform generator, giving ratio CDF G(x) = x - 0.5 on
    [0.5, 1.5], M = 1.5, b = 0."""
    return ContinuousRatioModel(
        M=1.5,
        b=0.0,
        G=lambda x: min(1.0, max(0.0, x - 0.5)),
        G_inv=lambda u: u + 0.5,
        label="linear-example",
    )
