"""Rank-based group comparison: Kruskal-Wallis, Dunn's post hoc test and tiered rankings."""

import math
from dataclasses import asdict, dataclass
from enum import Enum
from itertools import combinations
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.stats import chi2, norm, rankdata, tiecorrect

from src.core.exceptions import ContractViolationError
from src.core.logging import get_logger

logger = get_logger(__name__)

SIGNIFICANCE = 0.01


@dataclass(frozen=True)
class SampleGroup:
    label: str
    values: Tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ContractViolationError(f"group {self.label!r} is empty")
        if not all(math.isfinite(v) for v in values):
            raise ContractViolationError(f"group {self.label!r} contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return len(self.values)


class Adjustment(str, Enum):
    NONE = "none"
    BONFERRONI = "bonferroni"


@dataclass(frozen=True)
class KruskalResult:
    statistic: float
    df: int
    p_value: float


@dataclass(frozen=True)
class PairwiseComparison:
    first: str
    second: str
    z: float
    p_raw: float
    p_adjusted: float


@dataclass(frozen=True)
class TestReport:
    statistic: float
    degrees_of_freedom: int
    p_value: float
    pairwise: Tuple[PairwiseComparison, ...]
    ranking: Tuple[str, ...]
    tiers: Tuple[Tuple[str, ...], ...]

    def to_document(self) -> Dict:
        doc = asdict(self)
        doc["pairwise"] = [asdict(p) for p in self.pairwise]
        doc["ranking"] = list(self.ranking)
        doc["tiers"] = [list(t) for t in self.tiers]
        return doc


def _pooled_ranks(groups: Sequence[SampleGroup]) -> Tuple[np.ndarray, List[np.ndarray]]:
    if len(groups) < 2:
        raise ContractViolationError("at least two groups are needed")
    pooled = np.concatenate([np.asarray(g.values) for g in groups])
    ranks = rankdata(pooled)  # mid-ranks for ties
    bounds = np.cumsum([0] + [g.size for g in groups])
    return ranks, [ranks[a:b] for a, b in zip(bounds[:-1], bounds[1:])]


def kruskal_wallis(groups: Sequence[SampleGroup]) -> KruskalResult:
    """H statistic with tie correction; all-equal data gives H = 0, p = 1."""
    ranks, per_group = _pooled_ranks(groups)
    n = len(ranks)
    df = len(groups) - 1
    correction = tiecorrect(ranks)
    if correction == 0.0:
        return KruskalResult(0.0, df, 1.0)
    h = 12.0 / (n * (n + 1)) * sum(r.sum() ** 2 / len(r) for r in per_group) - 3.0 * (n + 1)
    h /= correction
    h = max(h, 0.0)
    return KruskalResult(float(h), df, float(chi2.sf(h, df)))


def _tie_term(ranks: np.ndarray) -> float:
    _, counts = np.unique(ranks, return_counts=True)
    n = len(ranks)
    return float(np.sum(counts.astype(np.float64) ** 3 - counts)) / (12.0 * (n - 1))


def dunns_test(
    groups: Sequence[SampleGroup], adjustment: Adjustment = Adjustment.BONFERRONI
) -> List[PairwiseComparison]:
    """Pairwise z tests on mean ranks, in the order ``combinations(groups, 2)`` yields."""
    ranks, per_group = _pooled_ranks(groups)
    n = len(ranks)
    spread = n * (n + 1) / 12.0 - _tie_term(ranks)
    pairs = list(combinations(range(len(groups)), 2))
    results = []
    for i, j in pairs:
        a, b = per_group[i], per_group[j]
        variance = spread * (1.0 / len(a) + 1.0 / len(b))
        if variance <= 0.0:
            z, p = 0.0, 1.0
        else:
            z = float((a.mean() - b.mean()) / math.sqrt(variance))
            p = float(min(1.0, 2.0 * norm.sf(abs(z))))
        adjusted = min(1.0, p * len(pairs)) if adjustment is Adjustment.BONFERRONI else p
        results.append(PairwiseComparison(groups[i].label, groups[j].label, z, p, adjusted))
    return results


def mean_ranks(groups: Sequence[SampleGroup]) -> Dict[str, float]:
    _, per_group = _pooled_ranks(groups)
    return {g.label: float(r.mean()) for g, r in zip(groups, per_group)}


def rank_groups(
    groups: Sequence[SampleGroup],
    pairwise: Sequence[PairwiseComparison],
    *,
    alpha: float = SIGNIFICANCE,
) -> Tuple[Tuple[str, ...], Tuple[Tuple[str, ...], ...]]:
    """Order labels by descending mean rank and cluster them into tiers.

    A label opens a new tier when it differs significantly from every member of the
    current tier; otherwise it joins it. Tiers give a partial order where Dunn's test
    cannot separate neighbours.
    """
    ranks = mean_ranks(groups)
    order = tuple(sorted(ranks, key=lambda label: (-ranks[label], label)))
    significant = {
        frozenset((p.first, p.second)) for p in pairwise if p.p_adjusted < alpha
    }
    tiers: List[List[str]] = []
    for label in order:
        if tiers and not all(frozenset((label, other)) in significant for other in tiers[-1]):
            tiers[-1].append(label)
        else:
            tiers.append([label])
    return order, tuple(tuple(t) for t in tiers)


def format_ranking(tiers: Sequence[Sequence[str]]) -> str:
    """``A > B ~ C > D``: ``>`` separates tiers, ``~`` joins indistinguishable labels."""
    return " > ".join(" ~ ".join(tier) for tier in tiers)


def compare_groups(
    groups: Sequence[SampleGroup],
    adjustment: Adjustment = Adjustment.BONFERRONI,
    *,
    alpha: float = SIGNIFICANCE,
) -> TestReport:
    kw = kruskal_wallis(groups)
    pairwise = dunns_test(groups, adjustment)
    ranking, tiers = rank_groups(groups, pairwise, alpha=alpha)
    logger.info(
        "groups compared",
        groups=len(groups),
        statistic=kw.statistic,
        p_value=kw.p_value,
        ranking=format_ranking(tiers),
    )
    return TestReport(kw.statistic, kw.df, kw.p_value, tuple(pairwise), ranking, tiers)
