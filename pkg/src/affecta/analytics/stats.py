"""Hypothesis tests and effect sizes, implemented from first principles."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .special import normal_ppf, normal_sf, t_two_sided_p

__all__ = [
    "EXACT_U_MAX_N",
    "TestResult",
    "cohens_d",
    "cohens_d_from_summary",
    "mann_whitney_u",
    "mean_impute",
    "midranks",
    "rank_biserial",
    "shapiro_wilk",
    "t_test",
    "t_test_from_summary",
    "u_null_distribution",
]

EXACT_U_MAX_N = 10
ALPHA = 0.05


@dataclass(frozen=True, slots=True)
class TestResult:
    __test__ = False  # keep pytest from collecting this class

    kind: str  # "mann-whitney-u" | "t-independent" | "t-paired" | "shapiro-wilk"
    statistic: float
    p_value: float
    effect_size: float | None = None
    effect_name: str | None = None  # "rank-biserial" | "cohens-d"
    df: float | None = None
    exact: bool = False

    @property
    def significant(self) -> bool:
        return self.p_value < ALPHA

    def to_dict(self) -> dict[str, object]:
        return {
            "kind": self.kind,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "effect_size": self.effect_size,
            "effect_name": self.effect_name,
            "df": self.df,
            "exact": self.exact,
        }


def _mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs)


def _var(xs: Sequence[float]) -> float:
    m = _mean(xs)
    return math.fsum((x - m) ** 2 for x in xs) / (len(xs) - 1)


# ---------------------------------------------------------------------------
# Mann-Whitney U


def midranks(values: Sequence[float]) -> list[float]:
    """1-based ranks with ties sharing the average of their positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j + 2) / 2.0
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def u_null_distribution(ranks: Sequence[float], n_a: int) -> dict[float, int]:
    """Count of size-``n_a`` subsets of ``ranks`` by the U statistic they give.

    Midranks are doubled so every rank sum is an integer; the subset-sum table
    is then built one observation at a time.
    """
    doubled = [int(round(2 * r)) for r in ranks]
    # table[k] maps doubled rank sum -> number of k-subsets reaching it
    table: list[Counter[int]] = [Counter({0: 1})] + [Counter() for _ in range(n_a)]
    for r2 in doubled:
        for k in range(n_a, 0, -1):
            prev = table[k - 1]
            if prev:
                cur = table[k]
                for s, c in prev.items():
                    cur[s + r2] += c
    offset = n_a * (n_a + 1)  # doubled n_a(n_a+1)/2
    return {(s - offset) / 2.0: c for s, c in table[n_a].items()}


def rank_biserial(u: float, n_a: int, n_b: int) -> float:
    return 1.0 - 2.0 * u / (n_a * n_b)


def mann_whitney_u(a: Sequence[float], b: Sequence[float], exact: bool | None = None) -> TestResult:
    """Two-sided Mann-Whitney U test with rank-biserial effect size.

    Exact p (from the permutation distribution of the observed midranks) when
    both groups have at most ``EXACT_U_MAX_N`` members, otherwise the normal
    approximation with tie and continuity corrections. The exact two-sided p
    is twice the smaller tail mass, capped at 1.
    """
    n_a, n_b = len(a), len(b)
    if n_a == 0 or n_b == 0:
        raise ValueError("both groups must be non-empty")
    ranks = midranks([*a, *b])
    u_a = math.fsum(ranks[:n_a]) - n_a * (n_a + 1) / 2.0
    u_b = n_a * n_b - u_a
    u = min(u_a, u_b)
    if exact is None:
        exact = n_a <= EXACT_U_MAX_N and n_b <= EXACT_U_MAX_N

    if exact:
        dist = u_null_distribution(ranks, n_a)
        total = sum(dist.values())
        lower = sum(c for v, c in dist.items() if v <= u_a + 1e-9)
        upper = sum(c for v, c in dist.items() if v >= u_a - 1e-9)
        p = min(1.0, 2.0 * min(lower, upper) / total)
    else:
        n = n_a + n_b
        ties = Counter(ranks).values()
        tie_term = sum(t**3 - t for t in ties) / (n * (n - 1))
        sigma = math.sqrt(n_a * n_b / 12.0 * ((n + 1) - tie_term))
        if sigma == 0.0:
            p = 1.0
        else:
            z = (abs(u_a - n_a * n_b / 2.0) - 0.5) / sigma
            p = min(1.0, 2.0 * normal_sf(max(z, 0.0)))
    return TestResult(
        kind="mann-whitney-u",
        statistic=u,
        p_value=p,
        effect_size=rank_biserial(u, n_a, n_b),
        effect_name="rank-biserial",
        exact=exact,
    )


# ---------------------------------------------------------------------------
# t tests and Cohen's d


def cohens_d_from_summary(
    mean_a: float, sd_a: float, n_a: int, mean_b: float, sd_b: float, n_b: int
) -> float:
    """Standardized mean difference (a - b) over the pooled SD."""
    pooled = math.sqrt(((n_a - 1) * sd_a**2 + (n_b - 1) * sd_b**2) / (n_a + n_b - 2))
    if pooled == 0:
        raise ValueError("pooled standard deviation is zero")
    return (mean_a - mean_b) / pooled


def cohens_d(a: Sequence[float], b: Sequence[float], paired: bool = False) -> float:
    if paired:
        diffs = [x - y for x, y in zip(a, b, strict=True)]
        sd = math.sqrt(_var(diffs))
        if sd == 0:
            if _mean(diffs) == 0:
                return 0.0
            raise ValueError("differences have zero variance")
        return _mean(diffs) / sd
    return cohens_d_from_summary(
        _mean(a), math.sqrt(_var(a)), len(a), _mean(b), math.sqrt(_var(b)), len(b)
    )


def t_test_from_summary(
    mean_a: float, sd_a: float, n_a: int, mean_b: float, sd_b: float, n_b: int
) -> TestResult:
    """Pooled-variance independent t test from group summaries."""
    if n_a < 2 or n_b < 2:
        raise ValueError("each group needs at least two observations")
    if sd_a == 0 and sd_b == 0:
        raise ValueError("both groups have zero variance")
    df = n_a + n_b - 2
    pooled = math.sqrt(((n_a - 1) * sd_a**2 + (n_b - 1) * sd_b**2) / df)
    t = (mean_a - mean_b) / (pooled * math.sqrt(1.0 / n_a + 1.0 / n_b))
    return TestResult(
        kind="t-independent",
        statistic=t,
        p_value=t_two_sided_p(t, df),
        effect_size=(mean_a - mean_b) / pooled,
        effect_name="cohens-d",
        df=float(df),
        exact=True,
    )


def t_test(a: Sequence[float], b: Sequence[float], mode: str = "independent") -> TestResult:
    if mode == "independent":
        if len(a) < 2 or len(b) < 2:
            raise ValueError("each group needs at least two observations")
        return t_test_from_summary(
            _mean(a), math.sqrt(_var(a)), len(a), _mean(b), math.sqrt(_var(b)), len(b)
        )
    if mode != "paired":
        raise ValueError(f"unknown t test mode {mode!r}")
    if len(a) != len(b) or len(a) < 2:
        raise ValueError("paired samples need equal lengths of at least two")
    diffs = [x - y for x, y in zip(a, b)]
    n = len(diffs)
    mean = _mean(diffs)
    sd = math.sqrt(_var(diffs))
    if sd == 0:
        if mean == 0:
            return TestResult("t-paired", 0.0, 1.0, 0.0, "cohens-d", float(n - 1), True)
        raise ValueError("paired differences have zero variance")
    t = mean / (sd / math.sqrt(n))
    return TestResult(
        kind="t-paired",
        statistic=t,
        p_value=t_two_sided_p(t, n - 1),
        effect_size=mean / sd,
        effect_name="cohens-d",
        df=float(n - 1),
        exact=True,
    )


# ---------------------------------------------------------------------------
# Shapiro-Wilk (Royston's AS R94 approximations)

_C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)
_SMALL = 1e-19


def _poly(coef: Sequence[float], x: float) -> float:
    result = 0.0
    for c in reversed(coef):
        result = result * x + c
    return result


def _sw_coefficients(n: int) -> list[float]:
    """Upper-half coefficients a_1..a_{n//2}, largest first."""
    half = n // 2
    if n == 3:
        return [math.sqrt(0.5)]
    m = [normal_ppf((i - 0.375) / (n + 0.25)) for i in range(1, half + 1)]
    summ2 = 2.0 * math.fsum(mi * mi for mi in m)
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a1 = _poly(_C1, rsn) - m[0] / ssumm2
    coef = [0.0] * half
    if n > 5:
        first = 2
        a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2) / (1.0 - 2.0 * a1**2 - 2.0 * a2**2))
        coef[1] = a2
    else:
        first = 1
        fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1**2))
    coef[0] = a1
    for i in range(first, half):
        coef[i] = -m[i] / fac
    return coef


def shapiro_wilk(sample: Sequence[float]) -> TestResult:
    x = sorted(float(v) for v in sample)
    n = len(x)
    if not 3 <= n <= 50:
        raise ValueError(f"Shapiro-Wilk supports 3 <= n <= 50, got n={n}")
    span = x[-1] - x[0]
    if span < _SMALL:
        raise ValueError("sample is constant; W is undefined")

    half = _sw_coefficients(n)
    weights = [0.0] * n
    for i, c in enumerate(half):
        weights[i] = -c
        weights[n - 1 - i] = c
    scaled = [v / span for v in x]
    mean = math.fsum(scaled) / n
    ssa = math.fsum(w * w for w in weights)
    ssx = math.fsum((v - mean) ** 2 for v in scaled)
    sax = math.fsum(w * (v - mean) for w, v in zip(weights, scaled))
    root = math.sqrt(ssa * ssx)
    w = 1.0 - (root - sax) * (root + sax) / (ssa * ssx)

    if n == 3:
        p = max(0.0, 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.pi / 3.0))
        return TestResult("shapiro-wilk", w, min(1.0, p), exact=True)

    y = math.log1p(-w)
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return TestResult("shapiro-wilk", w, 1e-99)
        y = -math.log(gamma - y)
        mu = _poly(_C3, n)
        sigma = math.exp(_poly(_C4, n))
    else:
        ln_n = math.log(n)
        mu = _poly(_C5, ln_n)
        sigma = math.exp(_poly(_C6, ln_n))
    return TestResult("shapiro-wilk", w, normal_sf((y - mu) / sigma))


# ---------------------------------------------------------------------------
# Imputation


def _missing(v: float | None) -> bool:
    return v is None or (isinstance(v, float) and math.isnan(v))


def mean_impute(groups: Mapping[str, Sequence[float | None]]) -> dict[str, list[float]]:
    """Fill gaps with the mean of the observed values in the same group.

    ``None`` and NaN both count as missing.
    """
    out: dict[str, list[float]] = {}
    for name, values in groups.items():
        observed = [float(v) for v in values if not _missing(v)]  # type: ignore[arg-type]
        if not observed:
            raise ValueError(f"group {name!r} has no observed values to impute from")
        fill = math.fsum(observed) / len(observed)
        out[name] = [fill if _missing(v) else float(v) for v in values]  # type: ignore[arg-type]
    return out
