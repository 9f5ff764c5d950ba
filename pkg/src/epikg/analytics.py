"""Dataset statistics, per-outbreak time series, and OLS regression."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .voting import EnsembleRecord, SynonymDictionary


class AnalyticsError(Exception):
    pass


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    stderr: float
    ci95_low: float
    ci95_high: float
    p_value: float
    r: float
    n: int


def _canonical(value: str | None, dictionary: SynonymDictionary | None) -> str | None:
    if value is None or dictionary is None:
        return value
    return dictionary.canonical_for(value)


def top_counts(records: Sequence[EnsembleRecord], key: str, n: int,
               disease_dict: SynonymDictionary | None = None,
               country_dict: SynonymDictionary | None = None) -> list[tuple[str, int]]:
    """Most frequent diseases, countries, or country-disease pairs."""
    counts: Counter[str] = Counter()
    for r in records:
        disease = _canonical(r.disease, disease_dict)
        country = _canonical(r.country, country_dict)
        if key == "disease":
            if disease is not None:
                counts[disease] += 1
        elif key == "country":
            if country is not None:
                counts[country] += 1
        elif key == "pair":
            if disease is not None and country is not None:
                counts[f"{country} - {disease}"] += 1
        else:
            raise ValueError(f"unknown key {key!r}")
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:n]


def dataset_summary(records: Sequence[EnsembleRecord],
                    disease_dict: SynonymDictionary | None = None,
                    country_dict: SynonymDictionary | None = None) -> dict[str, int]:
    """Entry and distinct-label counts after dropping rows missing both labels."""
    kept = [r for r in records if r.disease is not None or r.country is not None]
    diseases = {_canonical(r.disease, disease_dict) for r in kept if r.disease is not None}
    countries = {_canonical(r.country, country_dict) for r in kept if r.country is not None}
    return {
        "entries": len(kept),
        "unique_diseases": len(diseases),
        "unique_countries": len(countries),
    }


def time_series(records: Sequence[EnsembleRecord], disease: str, country: str,
                disease_dict: SynonymDictionary | None = None,
                country_dict: SynonymDictionary | None = None) -> list[tuple]:
    """(date, cases) points for one disease/country, sorted by date then fileid."""
    want_disease = _canonical(disease, disease_dict)
    want_country = _canonical(country, country_dict)
    points = []
    for r in records:
        if r.date is None or r.cases is None:
            continue
        if _canonical(r.disease, disease_dict) != want_disease:
            continue
        if _canonical(r.country, country_dict) != want_country:
            continue
        points.append((r.date, r.cases, r.fileid))
    points.sort(key=lambda p: (p[0], p[2]))
    return [(d, c) for d, c, _ in points]


def yearly_aggregate(series: Sequence[tuple]) -> list[tuple[int, int]]:
    totals: dict[int, int] = {}
    for when, cases in series:
        totals[when.year] = totals.get(when.year, 0) + cases
    return sorted(totals.items())


# --- t distribution ----------------------------------------------------------
# Regularized incomplete beta via the Lentz continued fraction, the classical
# route to Student-t tail probabilities.

_BETAINC_EPS = 1e-14
_BETAINC_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETAINC_TINY:
        d = _BETAINC_TINY
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETAINC_TINY:
            d = _BETAINC_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETAINC_TINY:
            c = _BETAINC_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETAINC_TINY:
            d = _BETAINC_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETAINC_TINY:
            c = _BETAINC_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETAINC_EPS:
            return h
    raise AnalyticsError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf2(t: float, dof: int) -> float:
    """Two-sided tail probability P(|T| >= |t|) for Student-t."""
    if dof <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    x = dof / (dof + t * t)
    return betainc(dof / 2.0, 0.5, x)


def t_quantile(p: float, dof: int) -> float:
    """Inverse CDF by bisection on the two-sided tail; p in (0.5, 1)."""
    if not 0.5 < p < 1.0:
        raise ValueError("quantile expects p in (0.5, 1)")
    target = 2.0 * (1.0 - p)  # two-sided tail mass at the quantile
    lo, hi = 0.0, 1.0
    while t_sf2(hi, dof) > target:
        hi *= 2.0
        if hi > 1e12:
            raise AnalyticsError("t quantile bracket failed")
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if t_sf2(mid, dof) > target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def ols_regression(x: Sequence[float], y: Sequence[float]) -> RegressionResult:
    """Least-squares line with 95% CI on the slope and a two-sided p-value."""
    n = len(x)
    if n != len(y):
        raise AnalyticsError("x and y must have equal length")
    if n < 3:
        raise AnalyticsError("regression needs at least 3 points")
    mean_x = sum(x) / n
    mean_y = sum(y) / n
    sxx = sum((xi - mean_x) ** 2 for xi in x)
    if sxx == 0.0:
        raise AnalyticsError("x is constant; slope undefined")
    sxy = sum((xi - mean_x) * (yi - mean_y) for xi, yi in zip(x, y))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x

    dof = n - 2
    ss_res = sum((yi - (intercept + slope * xi)) ** 2 for xi, yi in zip(x, y))
    stderr = math.sqrt((ss_res / dof) / sxx) if ss_res > 0 else 0.0

    syy = sum((yi - mean_y) ** 2 for yi in y)
    r = sxy / math.sqrt(sxx * syy) if syy > 0 else 0.0

    if stderr == 0.0:
        p_value = 0.0 if slope != 0.0 else 1.0
        ci_low = ci_high = slope
    else:
        t_stat = slope / stderr
        p_value = t_sf2(t_stat, dof)
        t_crit = t_quantile(0.975, dof)
        ci_low = slope - t_crit * stderr
        ci_high = slope + t_crit * stderr
    return RegressionResult(slope=slope, intercept=intercept, stderr=stderr,
                            ci95_low=ci_low, ci95_high=ci_high,
                            p_value=p_value, r=r, n=n)
