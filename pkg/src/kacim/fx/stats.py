"""Paired comparisons of baselines: Wilcoxon signed-rank test and ranking score."""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm, rankdata

MIN_NONZERO = 5
EXACT_MAX = 30
RAW = "RAW"


class WilcoxonError(ValueError):
    """Too few nonzero paired differences for the signed-rank test."""


def signed_rank_counts(r: int) -> list[int]:
    """``counts[s]`` = number of subsets of ``{1..r}`` whose sum is ``s``."""
    counts = [1] + [0] * (r * (r + 1) // 2)
    top = 0
    for k in range(1, r + 1):
        top += k
        for s in range(top, k - 1, -1):
            counts[s] += counts[s - k]
    return counts


def _exact_tail(t_plus: int, r: int, upper: bool) -> float:
    counts = signed_rank_counts(r)
    hits = sum(counts[t_plus:]) if upper else sum(counts[: t_plus + 1])
    return hits / 2 ** r


def wilcoxon_signed_rank(a, b, alternative: str = "greater") -> float:
    """p-value of the signed-rank test on ``a - b``.

    Zero differences are dropped.  With at most 30 remaining pairs and no
    tied magnitudes the null distribution is exact; otherwise a normal
    approximation with continuity and tie corrections is used.
    ``alternative="greater"`` tests whether ``a`` tends to exceed ``b``.
    """
    if alternative not in ("greater", "two_sided"):
        raise ValueError(f"unknown alternative {alternative!r}")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("a and b must be vectors of equal length")
    d = a - b
    d = d[d != 0]
    r = d.size
    if r < MIN_NONZERO:
        raise WilcoxonError(f"need at least {MIN_NONZERO} nonzero differences, got {r}")
    ranks = rankdata(np.abs(d))
    t_plus = float(ranks[d > 0].sum())
    ties = np.unique(np.abs(d), return_counts=True)[1]

    if r <= EXACT_MAX and np.all(ties == 1):
        t = int(round(t_plus))
        upper = _exact_tail(t, r, upper=True)
        if alternative == "greater":
            return upper
        return min(1.0, 2.0 * min(upper, _exact_tail(t, r, upper=False)))

    mean = r * (r + 1) / 4.0
    var = r * (r + 1) * (2 * r + 1) / 24.0 - float(np.sum(ties ** 3 - ties)) / 48.0
    sd = math.sqrt(var)
    if alternative == "greater":
        return float(norm.sf((t_plus - mean - 0.5) / sd))
    z = max(abs(t_plus - mean) - 0.5, 0.0) / sd
    return float(min(1.0, 2.0 * norm.sf(z)))


@dataclass
class ComparisonTable:
    """Per-run test accuracies keyed by ``(dataset, baseline)``."""

    accuracies: dict = field(default_factory=dict)

    def add(self, dataset: str, baseline: str, accuracy: float) -> None:
        self.accuracies.setdefault((dataset, baseline), []).append(float(accuracy))

    @property
    def datasets(self) -> list[str]:
        return sorted({d for d, _ in self.accuracies})

    def baselines(self, dataset: str | None = None) -> list[str]:
        return sorted({b for d, b in self.accuracies if dataset is None or d == dataset})

    def validate(self) -> None:
        every = set(self.baselines())
        for d in self.datasets:
            missing = every - set(self.baselines(d))
            if missing:
                raise ValueError(f"dataset {d!r} is missing baselines {sorted(missing)}")
            lengths = {len(self.accuracies[(d, b)]) for b in self.baselines(d)}
            if len(lengths) != 1:
                raise ValueError(f"dataset {d!r} has unequal run counts {sorted(lengths)}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "baseline", "run", "accuracy"])
        for (d, b) in sorted(self.accuracies):
            for i, acc in enumerate(self.accuracies[(d, b)]):
                w.writerow([d, b, i, repr(acc)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ComparisonTable":
        rows = defaultdict(dict)
        for rec in csv.DictReader(io.StringIO(text)):
            rows[(rec["dataset"], rec["baseline"])][int(rec["run"])] = float(rec["accuracy"])
        return cls({k: [v[i] for i in sorted(v)] for k, v in rows.items()})

    def summary(self) -> dict:
        out = {}
        for (d, b), accs in sorted(self.accuracies.items()):
            out.setdefault(d, {})[b] = {"mean": float(np.mean(accs)), "std": float(np.std(accs)),
                                        "runs": len(accs)}
        return out


def beats(t: ComparisonTable, dataset: str, b: str, other: str, p_threshold: float) -> bool:
    try:
        p = wilcoxon_signed_rank(t.accuracies[(dataset, b)], t.accuracies[(dataset, other)], "greater")
    except WilcoxonError:
        if len(t.accuracies[(dataset, b)]) < MIN_NONZERO:
            raise
        return False  # fewer than five runs differ at all
    return p < p_threshold


def ranking_score(t: ComparisonTable, p_threshold: float = 0.01, exclude=(RAW,)) -> dict[str, int]:
    """Count significant pairwise wins per baseline, summed over datasets.

    Baselines in ``exclude`` neither receive a score nor count as rivals.
    """
    t.validate()
    scores = {b: 0 for b in t.baselines() if b not in exclude}
    for d in t.datasets:
        present = [b for b in t.baselines(d) if b not in exclude]
        for b in present:
            for other in present:
                if other != b and beats(t, d, b, other, p_threshold):
                    scores[b] += 1
    return scores
