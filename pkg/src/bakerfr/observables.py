"""Phase-space contraction observables and trajectory bookkeeping.

The per-step contraction -ln J only takes values in {0, +u, -u} where u is
the log of a rational expansion factor fixed by the family (l/(1-l) for the
two-branch map, 2(1-2l) for the four-branch map).  Trajectory averages are
therefore tracked as an integer count g of net expanding-region visits, and
every identity is checked on g rather than on accumulated float logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from bakerfr.maps import (
    PhasePoint,
    PiecewiseAffineMap,
    RegionLabel,
    as_fraction,
    gm_region_conjugacy,
)
from bakerfr.transfer import ConsistencyError, StepDensity, region_measures

_ZERO = Fraction(0)

#: exact-backend iteration guard; rational coordinates grow geometrically
#: with the step count, so long runs belong to the float backend.
MAX_EXACT_STEPS = 64


class UndefinedValueError(ValueError):
    """A requested observable is undefined at this point or parameter."""


def allowed_transitions(family: str) -> set[tuple[RegionLabel, RegionLabel]]:
    if family == "map1":
        labels = (RegionLabel.A, RegionLabel.B)
        return {(i, j) for i in labels for j in labels}
    if family == "map2":
        away = {RegionLabel.A: (RegionLabel.C, RegionLabel.D),
                RegionLabel.B: (RegionLabel.A, RegionLabel.B),
                RegionLabel.C: (RegionLabel.C, RegionLabel.D),
                RegionLabel.D: (RegionLabel.A, RegionLabel.B)}
        return {(i, j) for i, outs in away.items() for j in outs}
    raise ValueError(f"unknown family {family!r}")


def g_increment(family: str, label: RegionLabel) -> int:
    """Contribution of one visited region to the net count g."""
    if family == "map1":
        return {RegionLabel.A: 1, RegionLabel.B: -1}[label]
    if family == "map2":
        return {RegionLabel.A: 0, RegionLabel.B: 1,
                RegionLabel.C: -1, RegionLabel.D: 0}[label]
    raise ValueError(f"unknown family {family!r}")


def contraction_unit_base(family: str, l) -> Fraction:
    """Rational base whose log is the contraction quantum per unit of g."""
    l = as_fraction(l)
    if family == "map1":
        return l / (1 - l)
    if family == "map2":
        return 2 * (1 - 2 * l)
    raise ValueError(f"unknown family {family!r}")


def mean_g_per_step(family: str, l) -> Fraction:
    """Steady-state expectation of the per-step g increment."""
    l = as_fraction(l)
    if family == "map1":
        # x-marginal of the invariant measure is Lebesgue: mu_A = l
        return 2 * l - 1
    if family == "map2":
        mu = region_measures(l)
        return mu[RegionLabel.B] - mu[RegionLabel.C]
    raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True)
class SymbolSequence:
    labels: tuple[RegionLabel, ...]
    family: str
    admissible: bool = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        allowed = allowed_transitions(self.family)
        ok = all((a, b) in allowed for a, b in zip(self.labels, self.labels[1:]))
        if self.admissible is None:
            object.__setattr__(self, "admissible", ok)
        elif self.admissible != ok:
            raise ValueError("declared admissibility contradicts the labels")

    def __len__(self):
        return len(self.labels)

    def g(self, count: Optional[int] = None) -> int:
        """Net count over the first `count` labels (all by default)."""
        labels = self.labels if count is None else self.labels[:count]
        return sum(g_increment(self.family, lab) for lab in labels)

    def text(self) -> str:
        return "".join(lab.value for lab in self.labels)


@dataclass(frozen=True)
class TrajectorySegment:
    initial: PhasePoint
    steps: int
    symbols: SymbolSequence
    points: Optional[tuple[PhasePoint, ...]] = None


def trajectory_segment(m: PiecewiseAffineMap, x0: PhasePoint, n: int,
                       keep_points: bool = False,
                       max_exact_steps: int = MAX_EXACT_STEPS) -> TrajectorySegment:
    """Evolve n steps and record the n+1 visited region labels."""
    if n < 0:
        raise ValueError("need n >= 0")
    if x0.is_rational() and n > max_exact_steps:
        raise ValueError(
            f"{n} exact-rational steps exceed the cap {max_exact_steps}; "
            "raise max_exact_steps explicitly or use float coordinates")
    orbit = m.iterate(x0, n)
    labels = tuple(m.region_of(p) for p in orbit)
    seq = SymbolSequence(labels, m.family)
    return TrajectorySegment(x0, n, seq, tuple(orbit) if keep_points else None)


@dataclass(frozen=True)
class ContractionStats:
    """Time-averaged contraction over a trajectory segment, held in exact
    integer-times-log form."""

    family: str
    l: Fraction
    g: int
    steps: int

    @property
    def unit_base(self) -> Fraction:
        return contraction_unit_base(self.family, self.l)

    @property
    def phi(self) -> float:
        return math.log(self.unit_base)

    @property
    def lambda_bar(self) -> float:
        return self.g * self.phi / self.steps

    @property
    def mean_is_zero(self) -> bool:
        return mean_g_per_step(self.family, self.l) == 0

    @property
    def e_n(self) -> Optional[Fraction]:
        """Normalized contraction; exactly rational, None in the
        zero-dissipation cases (l = 1/2 resp. l = 1/4)."""
        psi = mean_g_per_step(self.family, self.l)
        if psi == 0:
            return None
        return Fraction(self.g, self.steps) / psi


def average_contraction(m: PiecewiseAffineMap, x0: PhasePoint, n: int,
                        max_exact_steps: int = MAX_EXACT_STEPS) -> ContractionStats:
    """Average contraction over the n labels of x_0 .. x_{n-1}."""
    if n < 1:
        raise ValueError("need n >= 1")
    seg = trajectory_segment(m, x0, n - 1, max_exact_steps=max_exact_steps)
    g = seg.symbols.g()
    return ContractionStats(m.family, m.l, g, n)


def lambda_at(m: PiecewiseAffineMap, p: PhasePoint) -> float:
    """Local contraction rate -ln J at p."""
    return -math.log(m.jacobian_at(p))


def mean_lambda_exact(family: str, l) -> tuple[Fraction, Fraction]:
    """Steady-state mean contraction as (coefficient, base) with
    <Lambda> = coefficient * ln(base), verified across two independent
    derivations (current formula in the bias parameter; region measures)."""
    l = as_fraction(l)
    base = contraction_unit_base(family, l)
    if family == "map1":
        coeff = 2 * l - 1  # (l - r), paired with base l/r
        return coeff, base
    if family == "map2":
        from bakerfr.multibaker import analytic_current

        coeff_measures = mean_g_per_step(family, l)
        coeff_current = analytic_current(l)
        if coeff_measures != coeff_current:
            raise ConsistencyError(
                f"current route {coeff_current} != measure route {coeff_measures}")
        return coeff_measures, base
    raise ValueError(f"unknown family {family!r}")


def mean_lambda_analytic(family: str, l) -> float:
    coeff, base = mean_lambda_exact(family, l)
    return float(coeff) * math.log(base)


def reversed_initial(m: PiecewiseAffineMap, involution: PiecewiseAffineMap,
                     x0: PhasePoint, n: int, check: bool = True,
                     max_exact_steps: int = MAX_EXACT_STEPS) -> PhasePoint:
    """Initial condition of the time-reversed segment: the involution
    applied to the point one step past the forward segment.  In exact mode
    the equivalent backward construction (n inverse steps from the
    reversed start) is asserted to agree."""
    if x0.is_rational() and n > max_exact_steps:
        raise ValueError(f"{n} exact steps exceed the cap {max_exact_steps}")
    forward_end = x0
    for _ in range(n):
        forward_end = m.apply(forward_end)
    rev = involution.apply(forward_end)
    if check and x0.is_rational():
        back = involution.apply(x0)
        for _ in range(n):
            back = m.apply_inverse(back)
        if back != rev:
            raise ConsistencyError(
                "forward and backward constructions of the reversed initial "
                f"condition disagree at n={n}: {rev} vs {back}")
    return rev


def reversed_symbol_sequence(seq: SymbolSequence) -> SymbolSequence:
    """Symbols of the time-reversed segment: read backwards with the
    expanding and contracting regions swapped (A, D fixed)."""
    conj = gm_region_conjugacy(seq.family)
    return SymbolSequence(tuple(conj[lab] for lab in reversed(seq.labels)),
                          seq.family)


def dissipation_function(m: PiecewiseAffineMap, rho: Optional[StepDensity],
                         p: PhasePoint,
                         involution: Optional[PiecewiseAffineMap] = None) -> float:
    """ln(rho(p) / rho(reversed image of p)) plus the local contraction.

    `rho` is the projected x-density (None means uniform, for which the
    output equals the local contraction rate)."""
    from bakerfr.maps import build_involution

    if involution is None:
        involution = build_involution(m.family)
    gmp = involution.apply(m.apply(p))
    lam = lambda_at(m, p)
    if rho is None:
        return lam
    rho_here = rho.value_at(p.x)
    rho_there = rho.value_at(gmp.x)
    if rho_here == 0 or rho_there == 0:
        raise UndefinedValueError(
            f"density vanishes at x={p.x} or x={gmp.x}; dissipation undefined")
    return math.log(rho_here / rho_there) + lam


def write_trajectory_csv(m: PiecewiseAffineMap, x0: PhasePoint, n: int, path,
                         max_exact_steps: int = MAX_EXACT_STEPS) -> None:
    """Rows (k, x, y, region, cumulative g)."""
    seg = trajectory_segment(m, x0, n, keep_points=True,
                             max_exact_steps=max_exact_steps)

    def fmt(v):
        return f"{v.numerator}/{v.denominator}" if isinstance(v, Fraction) else repr(v)

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k,x,y,region,cumulative_g\n")
        g = 0
        for k, (pt, lab) in enumerate(zip(seg.points, seg.symbols.labels)):
            g += g_increment(m.family, lab)
            fh.write(f"{k},{fmt(pt.x)},{fmt(pt.y)},{lab.value},{g}\n")
