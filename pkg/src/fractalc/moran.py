"""Dimension algebra for composition schedules.

Closed-form composite dimensions for uniform components, the generalized
Moran-product root solver for multifractal components, the binary-multifractal
analytic special case, dimension bounds, and the rational-dimension limit
construction.

Everything here is a pure function over immutable values; all arithmetic is
double precision on logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import SolverError

DEFAULT_TOL = 1e-12
MAX_BISECT_ITER = 200
_MAX_DOUBLINGS = 64


def _validated_ratios(ratios: Iterable[float]) -> tuple[float, ...]:
    out = tuple(float(r) for r in ratios)
    if not out:
        raise ValueError("component needs at least one scale factor")
    for r in out:
        if not 0.0 < r < 1.0:
            raise ValueError(f"scale factor {r!r} outside (0, 1)")
    return out


@dataclass(frozen=True)
class UniformFractal:
    """An IFS whose contractions share one scale factor: `copies` pieces at `ratio`."""

    copies: int
    ratio: float

    def __post_init__(self):
        if not (isinstance(self.copies, int) and self.copies >= 1):
            raise ValueError(f"copies must be a positive integer, got {self.copies!r}")
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"ratio {self.ratio!r} outside (0, 1)")

    @property
    def dimension(self) -> float:
        return single_dimension(self)


@dataclass(frozen=True)
class ScaleSpectrum:
    """Canonical multiset of (scale factors, repeat count) per component.

    The spectrum is the sole input to the Moran solver: substage order carries
    no dimensional information, so construction canonicalizes it away. Ratios
    are sorted within each component, identical components are merged by
    summing repeats, and components are sorted. Two schedules that differ only
    by permutation or by splitting a repeated component therefore produce
    bit-identical spectra.
    """

    components: tuple[tuple[tuple[float, ...], int], ...]

    def __init__(self, components: Iterable[tuple[Sequence[float], int]]):
        merged: dict[tuple[float, ...], int] = {}
        for ratios, repeat in components:
            if not (isinstance(repeat, int) and repeat >= 1):
                raise ValueError(f"repeat count must be a positive integer, got {repeat!r}")
            key = tuple(sorted(_validated_ratios(ratios)))
            merged[key] = merged.get(key, 0) + repeat
        if not merged:
            raise ValueError("spectrum needs at least one component")
        canon = tuple(sorted((ratios, n) for ratios, n in merged.items()))
        object.__setattr__(self, "components", canon)

    def moran_product(self, alpha: float) -> float:
        """Evaluate the product of per-component ratio-power sums at `alpha`."""
        value = 1.0
        for ratios, repeat in self.components:
            s = 0.0
            for r in ratios:
                s += r**alpha
            value *= s**repeat
        return value

    @property
    def is_degenerate(self) -> bool:
        """True when every component keeps a single piece (dimension 0)."""
        return all(len(ratios) == 1 for ratios, _ in self.components)

    def component_dimensions(self) -> tuple[float, ...]:
        return tuple(component_dimension(ratios) for ratios, _ in self.components)


@dataclass(frozen=True)
class DimensionReport:
    """Solved composite dimension plus how it was obtained."""

    alpha: float
    method: str  # "closed-form" | "moran-numeric" | "binary-analytic"
    residual: float  # Moran product minus 1, evaluated at alpha
    bracket: tuple[float, float]
    iterations: int


def single_dimension(f: UniformFractal) -> float:
    """Box dimension of one uniform fractal: ln N / ln(1/rho). Zero when N=1."""
    if f.copies == 1:
        return 0.0
    return math.log(f.copies) / math.log(1.0 / f.ratio)


def composite_dimension_uniform(parts: Sequence[tuple[UniformFractal, int]]) -> float:
    """Composite dimension of uniform components, each repeated n_i times per stage.

    Returns sum(n_i ln N_i) / sum(n_i ln(1/rho_i)); the barycentric-average
    form over component dimensions is the same number by algebra.
    """
    if not parts:
        raise ValueError("need at least one component")
    num = 0.0
    den = 0.0
    for fractal, repeat in parts:
        if repeat < 1:
            raise ValueError("repeat count must be >= 1")
        num += repeat * math.log(fractal.copies)
        den += repeat * math.log(1.0 / fractal.ratio)
    return num / den


def component_dimension(ratios: Sequence[float]) -> float:
    """Unique alpha with sum_j r_j^alpha = 1; zero for a single ratio."""
    spectrum = ScaleSpectrum([(ratios, 1)])
    return solve_moran(spectrum).alpha


def solve_moran(s: ScaleSpectrum, tol: float = DEFAULT_TOL) -> DimensionReport:
    """Solve the generalized Moran product prod_i (sum_j r_ij^alpha)^n_i = 1.

    Each factor is strictly decreasing in alpha (all ratios below 1), so the
    product crosses 1 exactly once. Bisection on [0, hi], hi found by doubling;
    chosen over Newton because it is unconditionally convergent. Iterates until
    the bracket cannot shrink in double precision, so the residual is far below
    `tol` in practice; `tol` is the acceptance threshold on the final residual.

    Conditioning degrades as ratios approach 1 (the product flattens); inputs
    with ratios above ~0.999 may need more of the iteration budget.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if s.is_degenerate:
        # Every factor is r^0 = 1 at alpha = 0; the product never exceeds 1.
        return DimensionReport(0.0, "closed-form", s.moran_product(0.0) - 1.0, (0.0, 0.0), 0)

    f = s.moran_product
    hi = 1.0
    doublings = 0
    while f(hi) > 1.0:
        hi *= 2.0
        doublings += 1
        if doublings > _MAX_DOUBLINGS:
            raise SolverError("could not bracket the Moran root by doubling")

    lo = 0.0
    iterations = 0
    for _ in range(MAX_BISECT_ITER):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        iterations += 1
        if f(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    alpha = 0.5 * (lo + hi)
    residual = f(alpha) - 1.0
    if abs(residual) > tol:
        raise SolverError(f"residual {residual} above tolerance {tol} after bisection")
    return DimensionReport(alpha, "moran-numeric", residual, (lo, hi), iterations)


def binary_special_dimension(r1: float, f: UniformFractal) -> float:
    """Analytic composite dimension for a binary multifractal with r2 = r1^2 * rho.

    Composing [r1, r1^2*rho] with a uniform (N, rho) fractal reduces the Moran
    product to a quadratic in (r1*rho)^alpha, giving
    alpha = ln((-1 + sqrt(1 + 4/N)) / 2) / ln(r1*rho).
    """
    if not 0.0 < r1 < 1.0:
        raise ValueError(f"r1 {r1!r} outside (0, 1)")
    x = (-1.0 + math.sqrt(1.0 + 4.0 / f.copies)) / 2.0
    return math.log(x) / math.log(r1 * f.ratio)


def dimension_bounds(component_dimensions: Sequence[float]) -> tuple[float, float]:
    """(min, max) of the component dimensions; the composite always lies inside."""
    if not component_dimensions:
        raise ValueError("need at least one component dimension")
    return (min(component_dimensions), max(component_dimensions))


def rational_limit_dimension(base: UniformFractal, a1: int, a2: int, n: int) -> float:
    """Composite dimension of `base` with an (N = n^a1, rho = n^-a2) fractal.

    As n grows the value tends to a1/a2, so any rational dimension can be
    approached from any starting fractal. Computed with logarithms directly
    (a1 * ln n), never by materializing n^a1.
    """
    if a1 < 1 or a2 < 1:
        raise ValueError("a1 and a2 must be positive integers")
    if n < 2:
        raise ValueError("n must be >= 2")
    log_n = math.log(n)
    num = math.log(base.copies) + a1 * log_n
    den = math.log(1.0 / base.ratio) + a2 * log_n
    return num / den
