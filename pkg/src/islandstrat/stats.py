"""One-sided treatment comparisons."""
from __future__ import annotations

import numpy as np
from scipy import stats

_ALIASES = {"A>B": "greater", "A<B": "less", "A!=B": "two-sided"}


def mann_whitney(a, b, alternative: str = "greater") -> dict:
    """Mann-Whitney U of sample ``a`` against ``b``.

    Exact null distribution when both samples have at most 8 values and no
    ties; otherwise the normal approximation with tie and continuity
    correction.  ``u`` is the statistic for ``a``.
    """
    alternative = _ALIASES.get(alternative, alternative)
    if alternative not in ("greater", "less", "two-sided"):
        raise ValueError(f"unknown alternative {alternative!r}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    pooled = np.concatenate([a, b])
    exact = max(len(a), len(b)) <= 8 and len(np.unique(pooled)) == len(pooled)
    method = "exact" if exact else "asymptotic"
    res = stats.mannwhitneyu(a, b, alternative=alternative, method=method)
    med_a, med_b = float(np.median(a)), float(np.median(b))
    direction = "A>B" if med_a > med_b else "A<B" if med_a < med_b else "A=B"
    return {
        "u": float(res.statistic),
        "p_value": float(res.pvalue),
        "method": method,
        "alternative": alternative,
        "n_a": len(a),
        "n_b": len(b),
        "median_a": med_a,
        "median_b": med_b,
        "direction": direction,
    }
