"""Post-run statistics: degree distributions, replicate summaries, the paired sign test."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidCounts, MismatchedGrids, SeriesTooShort, TooFewSamples
from .network import Network

Z_95 = 1.96


@dataclass(frozen=True)
class DegreeHistogram:
    counts: dict[int, int]
    n_total: int

    @classmethod
    def from_degrees(cls, degrees: Iterable[int]) -> "DegreeHistogram":
        degrees = np.asarray(list(degrees) if not isinstance(degrees, np.ndarray) else degrees, dtype=np.int64)
        values, freq = np.unique(degrees, return_counts=True)
        return cls({int(k): int(c) for k, c in zip(values, freq)}, int(degrees.size))

    @property
    def max_degree(self) -> int:
        return max(self.counts, default=0)

    @property
    def mean_degree(self) -> float:
        if self.n_total == 0:
            return 0.0
        return sum(k * c for k, c in self.counts.items()) / self.n_total

    def frequency(self, k: int) -> float:
        return self.counts.get(k, 0) / self.n_total if self.n_total else 0.0

    def hub_ratio(self) -> float:
        """Max degree over mean degree, a crude heavy-tail diagnostic."""
        mean = self.mean_degree
        return self.max_degree / mean if mean > 0 else 0.0

    def loglog_points(self) -> list[tuple[float, float]]:
        """``(log10 k, log10 P(k))`` for every observed degree ``k >= 1``."""
        return [
            (math.log10(k), math.log10(c / self.n_total))
            for k, c in sorted(self.counts.items())
            if k >= 1
        ]


def degree_histogram(net: Network) -> DegreeHistogram:
    return DegreeHistogram.from_degrees(net.degrees)


def last_k_mean(series: Sequence[float], k: int = 20) -> float:
    if k < 1 or len(series) < k:
        raise SeriesTooShort(f"need at least {k} entries, got {len(series)}")
    return float(np.mean(np.asarray(series[-k:], dtype=np.float64)))


def ci95(samples: Sequence[float]) -> tuple[float, float]:
    """Normal-approximation 95% interval for the mean."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise TooFewSamples("need at least two samples for an interval")
    mean = float(x.mean())
    half = Z_95 * float(x.std(ddof=1)) / math.sqrt(x.size)
    return mean - half, mean + half


def pair_by_parameter(
    runs_a: Sequence[tuple[float, float]], runs_b: Sequence[tuple[float, float]]
) -> tuple[int, int]:
    """Count non-tied pairs and how often arm ``a`` wins.

    Entries sharing a parameter value are paired in the order they appear
    (replicate ``r`` of one arm against replicate ``r`` of the other).
    """
    grouped_a: dict[float, list[float]] = defaultdict(list)
    grouped_b: dict[float, list[float]] = defaultdict(list)
    for key, value in runs_a:
        grouped_a[key].append(value)
    for key, value in runs_b:
        grouped_b[key].append(value)
    if grouped_a.keys() != grouped_b.keys():
        raise MismatchedGrids("arms were run on different parameter grids")
    n = k = 0
    for key, values_a in grouped_a.items():
        values_b = grouped_b[key]
        if len(values_a) != len(values_b):
            raise MismatchedGrids(f"arms have different replicate counts at {key}")
        for va, vb in zip(values_a, values_b):
            if va == vb:
                continue
            n += 1
            k += va > vb
    return n, k


@dataclass(frozen=True)
class SignTestResult:
    n: int
    k: int
    p_value: float


def binomial_tails(n: int, k: int) -> tuple[Fraction, Fraction]:
    """Exact ``(P(B <= k), P(B >= k))`` for ``B ~ Binomial(n, 1/2)``."""
    below = 0
    c = 1
    for i in range(k + 1):
        below += c
        c = c * (n - i) // (i + 1)
    above = (1 << n) - below + math.comb(n, k)
    denom = 1 << n
    return Fraction(below, denom), Fraction(above, denom)


def sign_test(n: int, k: int) -> SignTestResult:
    """Exact two-tailed sign test at p0 = 1/2: ``min(1, 2 * smaller tail)``."""
    if n < 1 or not 0 <= k <= n:
        raise InvalidCounts(f"need n >= 1 and 0 <= k <= n, got n={n}, k={k}")
    below, above = binomial_tails(n, k)
    p = min(Fraction(1), 2 * min(below, above))
    return SignTestResult(n=n, k=k, p_value=float(p))


def aggregate_degree_frequencies(histograms: Sequence[DegreeHistogram]) -> list[dict]:
    """Per-degree mean frequency across replicates, with a 95% interval when possible."""
    if not histograms:
        return []
    degrees = sorted(set().union(*(h.counts for h in histograms)))
    rows = []
    for k in degrees:
        freqs = [h.frequency(k) for h in histograms]
        row = {"degree": k, "mean_frequency": float(np.mean(freqs))}
        if len(freqs) >= 2:
            row["ci_low"], row["ci_high"] = ci95(freqs)
        else:
            row["ci_low"] = row["ci_high"] = row["mean_frequency"]
        rows.append(row)
    return rows
