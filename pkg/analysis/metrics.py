"""
    Grouping quality against ground-truth labels.
"""

import numpy as np

from collections import Counter
from sklearn.metrics import normalized_mutual_info_score
from sklearn.metrics.cluster import contingency_matrix

from netlist.errors import NetlistError


# Paired label lists over the gates present in both mappings
def _overlap(grouping: dict[str, str], truth: dict[str, str]) -> tuple[list[str], list[str]]:
    common = sorted(set(grouping) & set(truth))
    if not common:
        raise NetlistError("no labeled gate in the grouping")
    return [truth[g] for g in common], [grouping[g] for g in common]


# Normalized mutual information, arithmetic mean of the entropies
def nmi(grouping: dict[str, str], truth: dict[str, str]) -> float:
    """
    NMI between a grouping and ground-truth labels.

    Only gates labeled in both mappings count. A trivial partition on one
    side against a non-trivial one on the other scores 0.

    @type  grouping: dict( str -> str )
    @param grouping: Gate name to group name

    @type  truth: dict( str -> str )
    @param truth: Gate name to label

    @rtype:   float
    @returns: NMI in [0, 1]

    @raise NetlistError: no gate in common
    """
    labels, groups = _overlap(grouping, truth)
    return float(normalized_mutual_info_score(labels, groups, average_method='arithmetic'))


# Share of gates carrying the majority label of their group
def purity(grouping: dict[str, str], truth: dict[str, str]) -> float:
    labels, groups = _overlap(grouping, truth)
    table = contingency_matrix(labels, groups)
    return float(np.asarray(table.max(axis=0)).sum() / len(labels))


# Most frequent group sizes
def size_histogram(sizes: list[int], top: int = 5) -> list[tuple[int, int]]:
    counts = Counter(sizes)
    return sorted(counts.items(), key=lambda kv: (-kv[1], -kv[0]))[:top]
