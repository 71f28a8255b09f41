"""Distribution-free median confidence intervals and tolerance intervals.

For ``B`` i.i.d. draws from a continuous law, the pair of order statistics
``[X_(r), X_(s)]`` covers the median with probability

    sum_{j=r}^{s-1} C(B, j) 2^{-B}

and contains at least a fraction ``gamma`` of the population with
probability

    sum_{j=0}^{s-r-1} C(B, j) gamma^j (1 - gamma)^{B-j}.

Both sums are evaluated in log space.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from decimal import ROUND_FLOOR, ROUND_HALF_UP, Decimal

import numpy as np
from scipy.special import gammaln, logsumexp

MAX_B = 10_000
MAX_TOLERANCE_B = 100_000


class IntervalKind(enum.Enum):
    MEDIAN_CI = "ci"
    TOLERANCE = "tolerance"


@dataclass(frozen=True)
class IntervalDesign:
    B: int
    r: int
    s: int
    level: float
    kind: IntervalKind
    breakdown: float
    gamma: float | None = None

    def __post_init__(self):
        if not 1 <= self.r <= self.s <= self.B:
            raise ValueError("need 1 <= r <= s <= B")
        if not 0.0 <= self.level <= 1.0:
            raise ValueError("level must lie in [0, 1]")
        if not 0.0 <= self.breakdown <= 0.5:
            raise ValueError("breakdown must lie in [0, 0.5]")


def _log_binom_pmf(B: int, j: np.ndarray, log_p: float, log_q: float) -> np.ndarray:
    j = np.asarray(j, dtype=float)
    log_c = gammaln(B + 1.0) - gammaln(j + 1.0) - gammaln(B - j + 1.0)
    with np.errstate(invalid="ignore"):
        # 0 * log(0) terms are 0
        a = np.where(j == 0, 0.0, j * log_p)
        b = np.where(j == B, 0.0, (B - j) * log_q)
    return log_c + a + b


def _binom_range_prob(B: int, lo: int, hi: int, p: float) -> float:
    """P(lo <= Bin(B, p) <= hi), inclusive bounds."""
    if hi < lo:
        return 0.0
    j = np.arange(lo, hi + 1)
    log_p = math.log(p) if p > 0 else -math.inf
    log_q = math.log1p(-p) if p < 1 else -math.inf
    total = float(np.exp(logsumexp(_log_binom_pmf(B, j, log_p, log_q))))
    return min(max(total, 0.0), 1.0)


def _check_pair(B: int, r: int, s: int) -> None:
    if not 1 <= r < s <= B:
        raise ValueError(f"need 1 <= r < s <= B, got B={B}, r={r}, s={s}")


def median_ci_level(B: int, r: int, s: int) -> float:
    """Exact probability that ``[X_(r), X_(s)]`` contains the median."""
    _check_pair(B, r, s)
    if B > MAX_B:
        raise ValueError(f"B must not exceed {MAX_B}")
    return _binom_range_prob(B, r, s - 1, 0.5)


def ci_breakdown_point(B: int, r: int, s: int) -> float:
    if not 1 <= r <= s <= B:
        raise ValueError("need 1 <= r <= s <= B")
    return min(r - 1, B - s) / B


def tolerance_breakdown_point(B: int, r: int, s: int) -> float:
    if not 1 <= r <= s <= B:
        raise ValueError("need 1 <= r <= s <= B")
    return min(r - 1, B - s + 1) / B


def design_median_ci(B: int, alpha: float) -> IntervalDesign | None:
    """Narrowest symmetric pair ``s = B - r + 1`` reaching level ``1 - alpha``.

    Returns ``None`` when even ``(1, B)`` falls short.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if B < 2:
        raise ValueError("B must be >= 2")
    for r in range(B // 2, 0, -1):
        s = B - r + 1
        level = median_ci_level(B, r, s)
        if level >= 1.0 - alpha:
            return IntervalDesign(B, r, s, level, IntervalKind.MEDIAN_CI,
                                  ci_breakdown_point(B, r, s))
    return None


def tolerance_level(B: int, r: int, s: int, gamma: float) -> float:
    """Probability that ``[X_(r), X_(s)]`` covers at least ``gamma`` of the law."""
    _check_pair(B, r, s)
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    return _binom_range_prob(B, 0, s - r - 1, gamma)


def design_tolerance(gamma: float, beta: float, r: int,
                     max_B: int = MAX_TOLERANCE_B) -> IntervalDesign | None:
    """Smallest ``B`` whose symmetric pair ``(r, B - r + 1)`` reaches ``beta``.

    With ``s = B - r + 1`` the level equals ``P(Bin(B, 1 - gamma) >= 2r)``,
    which is nondecreasing in ``B``; bisection is therefore exact.
    """
    if not (0 < gamma < 1 and 0 < beta < 1):
        raise ValueError("gamma and beta must lie in (0, 1)")
    if r < 1:
        raise ValueError("r must be >= 1")

    def level(B):
        return tolerance_level(B, r, B - r + 1, gamma)

    lo = 2 * r  # smallest B with r < s
    if lo > max_B:
        return None
    if level(lo) < beta:
        hi = lo
        while level(hi) < beta:
            if hi >= max_B:
                return None
            lo, hi = hi, min(2 * hi, max_B)
        # level(lo) < beta <= level(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if level(mid) >= beta:
                hi = mid
            else:
                lo = mid
        B = hi
    else:
        B = lo
    s = B - r + 1
    return IntervalDesign(B, r, s, level(B), IntervalKind.TOLERANCE,
                          tolerance_breakdown_point(B, r, s), gamma=gamma)


def round_half_up(value: float, decimals: int) -> float:
    q = Decimal(1).scaleb(-decimals)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


def round_down(value: float, decimals: int) -> float:
    """Truncate toward -inf; used for printed lower bounds on probabilities."""
    q = Decimal(1).scaleb(-decimals)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_FLOOR))


# Published reference rows: (1 - alpha, B, r, s, level, breakdown).
REFERENCE_CI_ROWS = [
    (0.90, 8, 2, 7, 0.930, 0.125),
    (0.90, 10, 2, 9, 0.979, 0.100),
    (0.90, 18, 6, 13, 0.904, 0.278),
    (0.90, 30, 11, 20, 0.901, 0.333),
    (0.90, 53, 21, 33, 0.902, 0.377),
    (0.90, 104, 44, 61, 0.905, 0.413),
    (0.95, 9, 2, 8, 0.961, 0.111),
    (0.95, 10, 2, 9, 0.979, 0.100),
    (0.95, 17, 5, 13, 0.951, 0.235),
    (0.95, 37, 13, 25, 0.953, 0.324),
    (0.95, 51, 19, 33, 0.951, 0.353),
    (0.95, 101, 41, 61, 0.954, 0.396),
    (0.99, 10, 1, 10, 0.998, 0.000),
    (0.99, 12, 2, 11, 0.994, 0.083),
    (0.99, 26, 7, 20, 0.991, 0.231),
    (0.99, 39, 12, 28, 0.991, 0.282),
    (0.99, 49, 16, 34, 0.991, 0.306),
    (0.99, 101, 38, 64, 0.991, 0.366),
]

# Published reference rows: (gamma, beta, B, r, s, prob, breakdown).
REFERENCE_TOLERANCE_ROWS = [
    (0.9, 0.9, 38, 1, 38, 0.9047, 0.0),
    (0.9, 0.95, 46, 1, 46, 0.9519, 0.0),
    (0.9, 0.99, 64, 1, 64, 0.9904, 0.0),
    (0.9, 0.999, 89, 1, 89, 0.9990, 0.0),
    (0.95, 0.90, 77, 1, 77, 0.9026, 0.0),
    (0.95, 0.95, 93, 1, 93, 0.9500, 0.0),
    (0.95, 0.99, 130, 1, 130, 0.9900, 0.0),
    (0.95, 0.999, 181, 1, 181, 0.9990, 0.0),
    (0.99, 0.90, 388, 1, 388, 0.9003, 0.0),
    (0.99, 0.95, 473, 1, 473, 0.9502, 0.0),
    (0.99, 0.99, 662, 1, 662, 0.9900, 0.0),
    (0.99, 0.999, 920, 1, 920, 0.9990, 0.0),
    (0.9, 0.9, 65, 2, 64, 0.9004, 0.031),
    (0.9, 0.95, 76, 2, 75, 0.9530, 0.026),
    (0.9, 0.99, 97, 2, 96, 0.9901, 0.021),
    (0.9, 0.999, 126, 2, 125, 0.9990, 0.016),
    (0.95, 0.90, 132, 2, 131, 0.9007, 0.015),
    (0.95, 0.95, 153, 2, 152, 0.9505, 0.013),
    (0.95, 0.99, 198, 2, 197, 0.9902, 0.010),
    (0.95, 0.999, 257, 2, 256, 0.9990, 0.008),
    (0.99, 0.90, 667, 2, 666, 0.9004, 0.003),
    (0.99, 0.95, 773, 2, 772, 0.9500, 0.003),
    (0.99, 0.99, 1001, 2, 1000, 0.9900, 0.002),
    (0.99, 0.999, 1302, 2, 1301, 0.9990, 0.002),
    (0.9, 0.9, 164, 6, 159, 0.9037, 0.037),
    (0.9, 0.95, 179, 6, 174, 0.9514, 0.034),
    (0.9, 0.99, 210, 6, 205, 0.9902, 0.029),
    (0.9, 0.999, 249, 6, 244, 0.9990, 0.024),
    (0.95, 0.90, 330, 6, 325, 0.9017, 0.018),
    (0.95, 0.95, 361, 6, 356, 0.9505, 0.017),
    (0.95, 0.99, 425, 6, 420, 0.9901, 0.014),
    (0.95, 0.999, 505, 6, 500, 0.9990, 0.012),
    (0.99, 0.90, 1658, 6, 1653, 0.9004, 0.004),
    (0.99, 0.95, 1818, 6, 1813, 0.9501, 0.003),
    (0.99, 0.99, 2144, 6, 2139, 0.9900, 0.003),
    (0.99, 0.999, 2552, 6, 2547, 0.9990, 0.002),
]

CI_COLUMNS = ["1-alpha", "B", "r", "s", "lower_bound_confidence_level",
              "finite_sample_breakdown_point", "note"]
TOLERANCE_COLUMNS = ["gamma", "beta", "B", "r", "s", "prob_ge",
                     "finite_sample_breakdown_point", "note"]


def _ci_rows() -> list[dict]:
    rows = []
    for conf, B, r_ref, s_ref, level_ref, bd_ref in REFERENCE_CI_ROWS:
        d = design_median_ci(B, round(1.0 - conf, 10))
        level = round_half_up(d.level, 3)
        bd = round_half_up(d.breakdown, 3)
        notes = []
        if (d.r, d.s) != (r_ref, s_ref):
            notes.append(f"reference pair ({r_ref},{s_ref})")
        if level != level_ref:
            notes.append(f"reference level {level_ref:.3f}")
        if bd != bd_ref:
            notes.append(f"reference breakdown {bd_ref:.3f}")
        rows.append({"1-alpha": f"{conf:.2f}", "B": B, "r": d.r, "s": d.s,
                     "lower_bound_confidence_level": f"{level:.3f}",
                     "finite_sample_breakdown_point": f"{bd:.3f}",
                     "note": "; ".join(notes)})
    return rows


def _tolerance_rows() -> list[dict]:
    rows = []
    for gamma, beta, B_ref, r, s_ref, prob_ref, bd_ref in REFERENCE_TOLERANCE_ROWS:
        d = design_tolerance(gamma, beta, r)
        prob = round_down(d.level, 4)
        bd = round_half_up(d.breakdown, 3)
        notes = []
        if (d.B, d.s) != (B_ref, s_ref):
            notes.append(f"reference B={B_ref}, s={s_ref}")
        if prob != prob_ref:
            notes.append(f"reference prob {prob_ref:.4f}")
        if bd != bd_ref:
            notes.append(f"reference breakdown {bd_ref:.3f}")
        rows.append({"gamma": f"{gamma:g}", "beta": f"{beta:g}", "B": d.B, "r": r, "s": d.s,
                     "prob_ge": f"{prob:.4f}",
                     "finite_sample_breakdown_point": f"{bd:.3f}",
                     "note": "; ".join(notes)})
    return rows


def emit_tables(kind: IntervalKind | str) -> list[dict]:
    """Recompute every row of the reference confidence or tolerance table.

    Rows whose recomputed values differ from the reference carry a ``note``.
    """
    kind = IntervalKind(kind)
    return _ci_rows() if kind is IntervalKind.MEDIAN_CI else _tolerance_rows()


def write_table_csv(kind: IntervalKind | str, path) -> list[dict]:
    kind = IntervalKind(kind)
    rows = emit_tables(kind)
    columns = CI_COLUMNS if kind is IntervalKind.MEDIAN_CI else TOLERANCE_COLUMNS
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return rows
