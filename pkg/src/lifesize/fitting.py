"""Polynomial fitting with monotone order selection, plus correlation.

Fits are ordinary (unweighted, unconstrained) least squares. Monotonicity is
enforced only by rejecting candidate orders: starting at ``max_order`` the
first degree whose curve does not change direction on [0, 180] wins, and a
straight line is always acceptable.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateDesign, InsufficientData, InvalidInput, ZeroVariance
from .models import MODEL_FOV_RANGE, SCHEMA_ID, TARGETS, PlacementModel

MONOTONE_RANGE = (0.0, 180.0)
MAX_SUPPORTED_ORDER = 3
CSV_COLUMNS = ("fov_deg", "scenario", "target", "value")


@dataclass(frozen=True)
class Sample:
    fov_deg: float
    value: float
    scenario: int
    target: str

    def __post_init__(self) -> None:
        if not (0.0 < self.fov_deg <= 180.0):
            raise InvalidInput(f"fov_deg must be in (0, 180], got {self.fov_deg}")
        if not math.isfinite(self.value):
            raise InvalidInput(f"sample value must be finite, got {self.value}")
        if self.target not in TARGETS:
            raise InvalidInput(f"unknown target {self.target!r}")


@dataclass(frozen=True)
class FitResult:
    coefficients: tuple[float, ...]
    order: int
    rss: float
    verdicts: dict[int, bool] = field(default_factory=dict)
    n_samples: int = 0

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coefficients)

    def to_model(self, target: str, scenario: int) -> PlacementModel:
        return PlacementModel(target, scenario, self.coefficients, MODEL_FOV_RANGE)


def _derivative_roots(coefficients: Sequence[float]) -> list[float]:
    """Real roots of p' where p' changes sign (odd multiplicity), order <= 3."""
    c = [float(v) for v in coefficients]
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    if len(c) <= 2:
        return []
    # p' coefficients, ascending
    d = [k * c[k] for k in range(1, len(c))]
    if len(d) == 2:
        return [-d[0] / d[1]]
    if len(d) == 3:
        a, b, cc = d[2], d[1], d[0]
        disc = b * b - 4 * a * cc
        if disc <= 0:
            # no real root, or a double root where p' touches zero without crossing
            return []
        sq = math.sqrt(disc)
        # numerically stable pair
        q = -0.5 * (b + math.copysign(sq, b))
        return sorted([q / a, cc / q])
    raise InvalidInput(f"monotone check supports order <= {MAX_SUPPORTED_ORDER}")


def monotone_on_range(
    coefficients: Sequence[float], lo: float = MONOTONE_RANGE[0], hi: float = MONOTONE_RANGE[1]
) -> bool:
    """True if the polynomial never changes direction on [lo, hi].

    Exact: the derivative has degree <= 2, so it changes sign only at a real
    root of odd multiplicity. A root on the closed boundary does not count.
    """
    if len(coefficients) - 1 > MAX_SUPPORTED_ORDER:
        raise InvalidInput(f"monotone check supports order <= {MAX_SUPPORTED_ORDER}")
    return not any(lo < r < hi for r in _derivative_roots(coefficients))


def monotone_by_sampling(
    coefficients: Sequence[float], lo: float = 0.0, hi: float = 180.0, step: float = 0.1
) -> bool:
    """Brute-force check: the sampled derivative never takes both signs."""
    xs = np.linspace(lo, hi, int(round((hi - lo) / step)) + 1)
    deriv = np.polynomial.polynomial.polyder(np.asarray(coefficients, dtype=float))
    vals = np.polynomial.polynomial.polyval(xs, deriv)
    scale = max(1.0, float(np.max(np.abs(vals))))
    tol = 1e-12 * scale
    return not (np.any(vals > tol) and np.any(vals < -tol))


def least_squares_poly(xs: Sequence[float], ys: Sequence[float], order: int) -> np.ndarray:
    """Ascending coefficients of the ordinary least-squares polynomial fit."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    # center and scale before solving; the raw Vandermonde on degrees is poorly conditioned
    mid = 0.5 * (x.max() + x.min())
    half = 0.5 * (x.max() - x.min())
    t = (x - mid) / half
    V = np.vander(t, order + 1, increasing=True)
    ct, *_ = np.linalg.lstsq(V, y, rcond=None)
    # map back to coefficients in x: p(x) = sum ct_k ((x - mid)/half)^k
    shifted = np.polynomial.Polynomial(ct, domain=[mid - half, mid + half], window=[-1, 1])
    coef = shifted.convert().coef
    out = np.zeros(order + 1)
    out[: len(coef)] = coef
    return out


def fit_monotone_poly(
    samples: Iterable[Sample] | tuple[Sequence[float], Sequence[float]],
    max_order: int = 2,
    lo: float = MONOTONE_RANGE[0],
    hi: float = MONOTONE_RANGE[1],
) -> FitResult:
    if isinstance(samples, tuple) and len(samples) == 2 and not isinstance(samples[0], Sample):
        xs, ys = (np.asarray(v, dtype=float) for v in samples)
    else:
        pts = list(samples)
        xs = np.array([s.fov_deg for s in pts], dtype=float)
        ys = np.array([s.value for s in pts], dtype=float)
    if len(xs) != len(ys):
        raise InvalidInput("xs and ys differ in length")
    if not 1 <= max_order <= MAX_SUPPORTED_ORDER:
        raise InvalidInput(f"max_order must be in 1..{MAX_SUPPORTED_ORDER}, got {max_order}")

    distinct = len(np.unique(xs))
    if distinct == 1 and len(xs) > 1:
        raise DegenerateDesign("all FoV values are equal; slope is undetermined")
    if distinct < max_order + 1:
        raise InsufficientData(
            f"order {max_order} needs at least {max_order + 1} distinct FoV values, got {distinct}"
        )

    verdicts: dict[int, bool] = {}
    chosen = None
    for k in range(max_order, 0, -1):
        coef = least_squares_poly(xs, ys, k)
        ok = k == 1 or monotone_on_range(coef, lo, hi)
        verdicts[k] = ok
        if ok:
            chosen = (k, coef)
            break
    k, coef = chosen
    resid = ys - np.polynomial.polynomial.polyval(xs, coef)
    return FitResult(
        coefficients=tuple(float(c) for c in coef),
        order=k,
        rss=float(resid @ resid),
        verdicts=verdicts,
        n_samples=len(xs),
    )


def _check_pair(xs: Sequence[float], ys: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInput("inputs must be 1-D sequences of equal length")
    if len(x) < 3:
        raise InvalidInput(f"correlation needs at least 3 pairs, got {len(x)}")
    return x, y


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x, y = _check_pair(xs, ys)
    # compare values directly: a float mean of identical values can leave residue
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ZeroVariance("correlation undefined for a constant input")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("correlation undefined for a constant input")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks; tied values share the mean of the positions they occupy."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(len(v), dtype=float)
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    x, y = _check_pair(xs, ys)
    return pearson(average_ranks(x), average_ranks(y))


def read_samples_csv(text: str) -> list[Sample]:
    """Parse the fit CSV: header ``fov_deg,scenario,target,value``, one observation per row."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(f.strip() for f in reader.fieldnames) != CSV_COLUMNS:
        raise InvalidInput(f"CSV header must be {','.join(CSV_COLUMNS)}, got {reader.fieldnames}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        try:
            out.append(
                Sample(
                    fov_deg=float(row["fov_deg"]),
                    value=float(row["value"]),
                    scenario=int(row["scenario"]),
                    target=row["target"].strip().lower(),
                )
            )
        except (TypeError, ValueError) as exc:
            raise InvalidInput(f"line {lineno}: {exc}") from None
    return out


def write_samples_csv(samples: Iterable[Sample]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s in samples:
        w.writerow([repr(s.fov_deg), s.scenario, s.target, repr(s.value)])
    return buf.getvalue()


def fit_document(result: FitResult, target: str, scenario: int, xs, ys) -> dict:
    """Fit output in the placement-models JSON schema, with fit diagnostics attached."""
    doc = {"schema": SCHEMA_ID, "models": [result.to_model(target, scenario).to_dict()]}
    doc["fit"] = {
        "order": result.order,
        "rss": result.rss,
        "n_samples": result.n_samples,
        "monotone_by_order": {str(k): v for k, v in sorted(result.verdicts.items())},
        "pearson": _maybe(pearson, xs, ys),
        "spearman": _maybe(spearman, xs, ys),
    }
    return doc


def _maybe(fn, xs, ys) -> float | None:
    try:
        return fn(xs, ys)
    except (ZeroVariance, InvalidInput):
        return None
