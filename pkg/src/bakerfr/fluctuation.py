"""Finite-time fluctuation statistics of the contraction observable.

The distribution of the net expanding-visit count g over an n-symbol
window is computed three ways: dynamic programming over (region, g) with
exact rationals, explicit enumeration of admissible symbol sequences (the
oracle), and Monte-Carlo sampling.  The fluctuation ratio P(g)/P(-g) is
compared against base^g with the multiplicative correction confined to
[4l, 1/(4l)] for the four-branch family, and required to be exactly
base^g for the two-branch family.  All pass/fail decisions in exact mode
are rational comparisons; no logarithm is ever tested against a tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from bakerfr.maps import (
    PiecewiseAffineMap,
    RegionLabel,
    as_fraction,
    build_generalized_baker,
    build_perturbation,
    gm_region_conjugacy,
    random_rational_points,
)
from bakerfr.observables import (
    UndefinedValueError,
    contraction_unit_base,
    g_increment,
    mean_g_per_step,
)
from bakerfr.transfer import ConsistencyError, region_measures, transition_matrix

_ZERO = Fraction(0)
_ONE = Fraction(1)

MAX_DP_STEPS = 10_000
MAX_BRUTE_FORCE = 12


# ---------------------------------------------------------------------------
# symbolic Markov chains of the two families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainSpec:
    family: str
    l: Fraction
    labels: tuple[RegionLabel, ...]
    initial: dict[RegionLabel, Fraction]
    trans: dict[tuple[RegionLabel, RegionLabel], Fraction]

    def delta(self, label: RegionLabel) -> int:
        return g_increment(self.family, label)

    def successors(self, label: RegionLabel) -> list[RegionLabel]:
        return [j for j in self.labels if self.trans.get((label, j), _ZERO) > 0]


def chain_spec(family: str, l, start: str = "stationary") -> ChainSpec:
    """Symbol process of the family: region labels with their one-step
    transition probabilities and either the stationary region measures or
    the Lebesgue widths ("uniform") as initial weights."""
    l = as_fraction(l)
    if start not in ("stationary", "uniform"):
        raise ValueError(f"unknown start {start!r}")
    if family == "map1":
        labels = (RegionLabel.A, RegionLabel.B)
        mu = {RegionLabel.A: l, RegionLabel.B: 1 - l}
        trans = {(i, j): mu[j] for i in labels for j in labels}
        return ChainSpec(family, l, labels, dict(mu), trans)
    if family == "map2":
        labels = (RegionLabel.A, RegionLabel.B, RegionLabel.C, RegionLabel.D)
        p = transition_matrix(l)
        trans = {(i, j): p.prob(i, j) for i in labels for j in labels}
        if start == "stationary":
            mu = dict(region_measures(l).mu)
        else:
            mu = {RegionLabel.A: l, RegionLabel.B: Fraction(1, 2) - l,
                  RegionLabel.C: Fraction(1, 4), RegionLabel.D: Fraction(1, 4)}
        return ChainSpec(family, l, labels, mu, trans)
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# exact distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymbolDistribution:
    """Exact law of g over an n-symbol window."""

    family: str
    l: Fraction
    n: int
    probs: dict[int, Fraction]

    def __post_init__(self):
        nonzero = {g: p for g, p in self.probs.items() if p != 0}
        object.__setattr__(self, "probs", nonzero)
        total = sum(nonzero.values())
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        if any(not -self.n <= g <= self.n for g in nonzero):
            raise ValueError("support escapes [-n, n]")
        if any(-g not in nonzero for g in nonzero):
            raise ValueError("support is not symmetric around 0")

    def prob(self, g: int) -> Fraction:
        return self.probs.get(g, _ZERO)

    def support(self) -> list[int]:
        return sorted(self.probs)

    def mean_g(self) -> Fraction:
        return sum(Fraction(g) * p for g, p in self.probs.items())


def exact_distribution(family: str, l, n: int,
                       start: str = "stationary") -> SymbolDistribution:
    """Forward dynamic programming over (region, g)."""
    if n < 1:
        raise ValueError("need n >= 1")
    if n > MAX_DP_STEPS:
        raise ValueError(f"n={n} exceeds the DP guard {MAX_DP_STEPS}")
    spec = chain_spec(family, l, start)
    state: dict[tuple[RegionLabel, int], Fraction] = {}
    for lab, w in spec.initial.items():
        if w > 0:
            key = (lab, spec.delta(lab))
            state[key] = state.get(key, _ZERO) + w
    for _ in range(n - 1):
        nxt: dict[tuple[RegionLabel, int], Fraction] = {}
        for (lab, g), w in state.items():
            for succ in spec.successors(lab):
                key = (succ, g + spec.delta(succ))
                nxt[key] = nxt.get(key, _ZERO) + w * spec.trans[(lab, succ)]
        state = nxt
    probs: dict[int, Fraction] = {}
    for (_lab, g), w in state.items():
        probs[g] = probs.get(g, _ZERO) + w
    return SymbolDistribution(family, spec.l, n, probs)


def sequence_measure(spec: ChainSpec, labels) -> Fraction:
    """Steady-state cylinder measure of an explicit symbol sequence;
    zero when any transition is forbidden."""
    w = spec.initial.get(labels[0], _ZERO)
    for a, b in zip(labels, labels[1:]):
        w *= spec.trans.get((a, b), _ZERO)
        if w == 0:
            return _ZERO
    return w


def admissible_sequences(spec: ChainSpec, n: int) -> Iterator[tuple[RegionLabel, ...]]:
    """All positive-measure symbol sequences of length n, depth first."""

    def extend(prefix: tuple[RegionLabel, ...]) -> Iterator[tuple[RegionLabel, ...]]:
        if len(prefix) == n:
            yield prefix
            return
        for succ in spec.successors(prefix[-1]):
            yield from extend(prefix + (succ,))

    for lab in spec.labels:
        if spec.initial.get(lab, _ZERO) > 0:
            yield from extend((lab,))


def brute_force_distribution(family: str, l, n: int,
                             start: str = "stationary") -> SymbolDistribution:
    """Oracle: accumulate the cylinder measure of every admissible symbol
    sequence individually.  Exponential in n; guarded accordingly."""
    if not 1 <= n <= MAX_BRUTE_FORCE:
        raise ValueError(f"brute force supports 1 <= n <= {MAX_BRUTE_FORCE}")
    spec = chain_spec(family, l, start)
    probs: dict[int, Fraction] = {}
    for seq in admissible_sequences(spec, n):
        w = sequence_measure(spec, seq)
        g = sum(spec.delta(lab) for lab in seq)
        probs[g] = probs.get(g, _ZERO) + w
    return SymbolDistribution(family, spec.l, n, probs)


# ---------------------------------------------------------------------------
# fluctuation-ratio reports (exact)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FRRow:
    g: int
    p_plus: Fraction
    p_minus: Fraction
    alpha: Fraction          # P(g) / (P(-g) * base^g)
    lhs: float               # ln(P(g)/P(-g))
    target: float            # g * ln(base)
    bound: float             # ln(alpha_max)
    e_n: Optional[Fraction]
    passed: bool


@dataclass(frozen=True)
class FRReport:
    family: str
    l: Fraction
    n: int
    unit_base: Fraction
    alpha_min: Fraction
    alpha_max: Fraction
    mean_lambda: float
    rows: tuple[FRRow, ...]

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self) -> dict:
        n_lambda = self.n * self.mean_lambda
        return {
            "schema_version": 1,
            "family": self.family,
            "l": f"{self.l.numerator}/{self.l.denominator}",
            "n": self.n,
            "alpha_min": str(self.alpha_min),
            "alpha_max": str(self.alpha_max),
            "all_pass": self.all_pass,
            "rows": [
                {"g": r.g, "p_plus": str(r.p_plus), "p_minus": str(r.p_minus),
                 "alpha": str(r.alpha), "lhs": r.lhs, "target": r.target,
                 "bound": r.bound,
                 "lhs_over_n_mean": r.lhs / n_lambda,
                 "bound_over_n_mean": r.bound / n_lambda,
                 "e_n": None if r.e_n is None else str(r.e_n),
                 "pass": r.passed}
                for r in self.rows
            ],
        }


def fr_alpha_bounds(family: str, l) -> tuple[Fraction, Fraction]:
    l = as_fraction(l)
    if family == "map1":
        return _ONE, _ONE
    if family == "map2":
        return 4 * l, 1 / (4 * l)
    raise ValueError(f"unknown family {family!r}")


def fr_report(dist: SymbolDistribution) -> FRReport:
    """Check the ratio P(g)/P(-g) against base^g for every attainable
    positive g.  The two-branch family must satisfy the identity exactly;
    the four-branch family must have its multiplicative correction within
    [4l, 1/(4l)].  Exact rational comparisons throughout."""
    psi = mean_g_per_step(dist.family, dist.l)
    if psi == 0:
        raise UndefinedValueError(
            f"mean contraction vanishes at l={dist.l}; the ratio test is undefined")
    base = contraction_unit_base(dist.family, dist.l)
    if dist.family == "map2":
        p = transition_matrix(dist.l)
        if p.prob(RegionLabel.B, RegionLabel.B) / p.prob(RegionLabel.C, RegionLabel.C) != base:
            raise ConsistencyError("stay-probability ratio must equal the unit base")
    a_min, a_max = fr_alpha_bounds(dist.family, dist.l)
    mean_lambda = float(psi) * math.log(base)
    rows = []
    for g in dist.support():
        if g <= 0:
            continue
        p_plus, p_minus = dist.prob(g), dist.prob(-g)
        alpha = (p_plus / p_minus) / base ** g
        passed = a_min <= alpha <= a_max
        rows.append(FRRow(
            g=g, p_plus=p_plus, p_minus=p_minus, alpha=alpha,
            lhs=math.log(p_plus / p_minus), target=g * math.log(base),
            bound=math.log(a_max),
            e_n=Fraction(g, dist.n) / psi, passed=passed,
        ))
    return FRReport(dist.family, dist.l, dist.n, base, a_min, a_max,
                    mean_lambda, tuple(rows))


@dataclass(frozen=True)
class BinnedFRRow:
    p: Fraction               # bin center on the normalized-contraction axis
    prob_plus: Fraction
    prob_minus: Fraction
    lhs_normalized: float     # ln(ratio) / (n <Lambda>)
    slack: float              # delta + ln(alpha_max) / (n <Lambda>)
    passed: bool


@dataclass(frozen=True)
class BinnedFRReport:
    family: str
    l: Fraction
    n: int
    delta: Fraction
    rows: tuple[BinnedFRRow, ...]

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "delta": str(self.delta),
            "all_pass": self.all_pass,
            "rows": [
                {"p": str(r.p), "prob_plus": str(r.prob_plus),
                 "prob_minus": str(r.prob_minus),
                 "lhs_normalized": r.lhs_normalized, "slack": r.slack,
                 "pass": r.passed}
                for r in self.rows
            ],
        }


def binned_fr_report(dist: SymbolDistribution, delta) -> BinnedFRReport:
    """Interval form of the ratio test on the normalized-contraction axis.

    The attainable normalized values form the lattice {g/(n psi)}; for each
    positive lattice point p the probabilities of the windows (p-delta,
    p+delta) and (-p-delta, -p+delta) are aggregated exactly, and the
    normalized log-ratio must land within delta plus the band width of the
    window center.  With delta below the lattice spacing this reduces to
    the per-g report; wider windows aggregate neighbouring lattice points."""
    delta = as_fraction(delta)
    if delta <= 0:
        raise ValueError("need delta > 0")
    psi = mean_g_per_step(dist.family, dist.l)
    if psi == 0:
        raise UndefinedValueError(
            f"mean contraction vanishes at l={dist.l}; binning is undefined")
    base = contraction_unit_base(dist.family, dist.l)
    _a_min, a_max = fr_alpha_bounds(dist.family, dist.l)
    n_lambda = dist.n * float(psi) * math.log(base)
    lattice = {g: Fraction(g, dist.n) / psi for g in dist.support()}
    rows = []
    for g0 in dist.support():
        if g0 <= 0:
            continue
        p = lattice[g0]
        plus = sum((dist.prob(g) for g in lattice if abs(lattice[g] - p) < delta),
                   _ZERO)
        minus = sum((dist.prob(g) for g in lattice if abs(lattice[g] + p) < delta),
                    _ZERO)
        lhs = math.log(plus / minus) / n_lambda
        slack = float(delta) + math.log(a_max) / n_lambda
        passed = float(p) - slack - 1e-12 <= lhs <= float(p) + slack + 1e-12
        rows.append(BinnedFRRow(p, plus, minus, lhs, slack, passed))
    return BinnedFRReport(dist.family, dist.l, dist.n, delta, tuple(rows))


# ---------------------------------------------------------------------------
# exhaustive per-sequence correction bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlphaBoundsReport:
    l: Fraction
    n: int
    sequences: int
    attained_min: Fraction
    attained_max: Fraction
    bound_min: Fraction
    bound_max: Fraction
    violations: tuple[str, ...] = ()

    @property
    def all_within(self) -> bool:
        return not self.violations

    @property
    def extrema_attained(self) -> bool:
        return self.attained_min == self.bound_min and self.attained_max == self.bound_max


def _alpha_direct(spec: ChainSpec, seq) -> Fraction:
    """Per-sequence correction from the boundary terms alone: measure
    ratio of the first symbols times the stay/jump factors created by the
    window ends."""
    conj = gm_region_conjugacy("map2")
    mu = spec.initial
    p = spec.trans
    first, last = seq[0], seq[-1]

    def ind(lab, want):
        return 1 if lab == want else 0

    d_aa = ind(first, RegionLabel.A) - ind(last, RegionLabel.A)
    d_bc = ind(first, RegionLabel.B) - ind(last, RegionLabel.C)
    d_cb = ind(first, RegionLabel.C) - ind(last, RegionLabel.B)
    d_dd = ind(first, RegionLabel.D) - ind(last, RegionLabel.D)
    alpha = mu[first] / mu[conj[last]]
    alpha *= p[(RegionLabel.D, RegionLabel.A)] ** (-d_aa)
    alpha *= p[(RegionLabel.B, RegionLabel.B)] ** (-d_bc)
    alpha *= p[(RegionLabel.C, RegionLabel.C)] ** (-d_cb)
    alpha *= p[(RegionLabel.A, RegionLabel.D)] ** (-d_dd)
    return alpha


def alpha_bounds_check(l, n: int) -> AlphaBoundsReport:
    """Enumerate every admissible n-symbol sequence of the four-branch
    family, pair it with its time reversal (read backwards, expanding and
    contracting regions swapped), and verify that the measure ratio divided
    by base^g stays within [4l, 1/(4l)].  The boundary-term formula for the
    correction is recomputed per sequence and must match the ratio."""
    l = as_fraction(l)
    if not 1 <= n <= MAX_BRUTE_FORCE:
        raise ValueError(f"exhaustive check supports 1 <= n <= {MAX_BRUTE_FORCE}")
    spec = chain_spec("map2", l)
    base = contraction_unit_base("map2", l)
    conj = gm_region_conjugacy("map2")
    bound_min, bound_max = fr_alpha_bounds("map2", l)
    attained = []
    violations = []
    count = 0
    for seq in admissible_sequences(spec, n):
        count += 1
        fwd = sequence_measure(spec, seq)
        rev_seq = tuple(conj[lab] for lab in reversed(seq))
        rev = sequence_measure(spec, rev_seq)
        if rev == 0:
            violations.append("".join(s.value for s in seq) + ": reversal inadmissible")
            continue
        g = sum(spec.delta(lab) for lab in seq)
        alpha = (fwd / rev) / base ** g
        direct = _alpha_direct(spec, seq)
        if alpha != direct:
            violations.append(
                "".join(s.value for s in seq) +
                f": ratio {alpha} != boundary formula {direct}")
        if not bound_min <= alpha <= bound_max:
            violations.append("".join(s.value for s in seq) + f": alpha {alpha}")
        attained.append(alpha)
    return AlphaBoundsReport(l, n, count, min(attained), max(attained),
                             bound_min, bound_max, tuple(violations))


# ---------------------------------------------------------------------------
# Monte-Carlo distributions and empirical reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalDistribution:
    family: str
    l: Fraction
    n: int
    counts: dict[int, int]
    total: int
    seed: int

    def prob(self, g: int) -> float:
        return self.counts.get(g, 0) / self.total

    def support(self) -> list[int]:
        return sorted(self.counts)

    def mean_g(self) -> float:
        return sum(g * c for g, c in self.counts.items()) / self.total

    def wilson(self, g: int, z: float = 1.0) -> tuple[float, float]:
        """Wilson score interval (lo, hi) for the bin proportion."""
        k, total = self.counts.get(g, 0), self.total
        phat = k / total
        denom = 1 + z * z / total
        center = (phat + z * z / (2 * total)) / denom
        half = z * math.sqrt(phat * (1 - phat) / total
                             + z * z / (4 * total * total)) / denom
        return center - half, center + half


def monte_carlo_distribution(m: PiecewiseAffineMap, n: int, ensemble: int,
                             transient: int, seed: int) -> EmpiricalDistribution:
    """Histogram of g over `ensemble` independent trajectories started
    uniformly on the square and relaxed for `transient` steps."""
    from bakerfr.ensembles import sample_g

    g = sample_g(m, n, ensemble, transient, seed)
    values, counts = _bincount(g)
    return EmpiricalDistribution(m.family, m.l, n,
                                 dict(zip(values, counts)), ensemble, seed)


def _bincount(g) -> tuple[list[int], list[int]]:
    import numpy as np

    values, counts = np.unique(g, return_counts=True)
    return [int(v) for v in values], [int(c) for c in counts]


@dataclass(frozen=True)
class EmpiricalFRRow:
    g: int
    count_plus: int
    count_minus: int
    lhs: float
    target: float
    bound: float
    sigma: float
    passed: bool


@dataclass(frozen=True)
class EmpiricalFRReport:
    family: str
    l: Fraction
    n: int
    total: int
    seed: int
    z: float
    min_count: int
    rows: tuple[EmpiricalFRRow, ...]
    notes: tuple[str, ...] = ()

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "family": self.family,
            "l": f"{self.l.numerator}/{self.l.denominator}",
            "n": self.n,
            "samples": self.total,
            "seed": self.seed,
            "z": self.z,
            "min_count": self.min_count,
            "all_pass": self.all_pass,
            "notes": list(self.notes),
            "rows": [
                {"g": r.g, "count_plus": r.count_plus, "count_minus": r.count_minus,
                 "lhs": r.lhs, "target": r.target, "bound": r.bound,
                 "sigma": r.sigma, "pass": r.passed}
                for r in self.rows
            ],
        }


def empirical_fr_report(emp: EmpiricalDistribution, z: float = 4.0,
                        min_count: int = 25,
                        notes: tuple[str, ...] = ()) -> EmpiricalFRReport:
    """Statistical version of the ratio test: a populated +/-g pair passes
    when |ln ratio - g ln(base)| <= ln(alpha_max) + z standard errors of
    the log ratio.  Pairs with fewer than `min_count` counts on either
    side are excluded as too noisy to test."""
    base = contraction_unit_base(emp.family, emp.l)
    _a_min, a_max = fr_alpha_bounds(emp.family, emp.l)
    log_base = math.log(base)
    rows = []
    for g in emp.support():
        if g <= 0:
            continue
        k_plus, k_minus = emp.counts.get(g, 0), emp.counts.get(-g, 0)
        if min(k_plus, k_minus) < min_count:
            continue
        p_plus, p_minus = k_plus / emp.total, k_minus / emp.total
        lhs = math.log(k_plus / k_minus)
        sigma = math.sqrt((1 - p_plus) / k_plus + (1 - p_minus) / k_minus)
        bound = math.log(a_max)
        passed = abs(lhs - g * log_base) <= bound + z * sigma
        rows.append(EmpiricalFRRow(g, k_plus, k_minus, lhs, g * log_base,
                                   bound, sigma, passed))
    return EmpiricalFRReport(emp.family, emp.l, emp.n, emp.total, emp.seed,
                             z, min_count, tuple(rows), notes)


def verify_fr_irreversible(k_map: PiecewiseAffineMap, n: int, ensemble: int,
                           transient: int, seed: int, z: float = 4.0,
                           min_count: int = 25) -> EmpiricalFRReport:
    """Ratio test under the non-invertible composite map.

    First verifies the structural claims that make the test meaningful:
    the perturbation factor leaves x untouched (so region occupancy
    statistics coincide with the reversible map's) and only folds the
    strip inside the contracting region; the composite agrees pointwise
    with perturbation-then-map on random rational points."""
    if k_map.eps is None or k_map.x_tilde is None or k_map.l is None:
        raise ValueError("expected a composite map carrying strip parameters")
    pert = build_perturbation(k_map.l, k_map.x_tilde, k_map.eps)
    baker = build_generalized_baker(k_map.l)
    for b in pert.branches:
        if b.linear[0] != (_ONE, _ZERO) or b.offset[0] != 0:
            raise ConsistencyError("perturbation must act on y only")
        is_identity = b.linear == ((_ONE, _ZERO), (_ZERO, _ONE)) and b.offset == (_ZERO, _ZERO)
        if not is_identity and not (k_map.l <= b.x_lo and b.x_hi <= Fraction(1, 2)):
            raise ConsistencyError("perturbation strip must sit inside region B")
    for p in random_rational_points(32, seed=seed ^ 0x5F5F):
        if k_map.apply(p) != baker.apply(pert.apply(p)):
            raise ConsistencyError(f"composite disagrees with factor maps at {p}")
    emp = monte_carlo_distribution(k_map, n, ensemble, transient, seed)
    notes = ("perturbation preserves x and folds only inside region B; "
             "region statistics match the reversible map",)
    return empirical_fr_report(emp, z=z, min_count=min_count, notes=notes)


def write_fr_csv(report, path) -> None:
    """Flat CSV (g, p_plus, p_minus, lhs, target, bound, pass) for either
    the exact report (exact rationals) or the empirical one (proportions)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("g,p_plus,p_minus,lhs,target,bound,pass\n")
        for r in report.rows:
            if isinstance(r, FRRow):
                plus, minus = str(r.p_plus), str(r.p_minus)
            else:
                plus = repr(r.count_plus / report.total)
                minus = repr(r.count_minus / report.total)
            fh.write(f"{r.g},{plus},{minus},{r.lhs!r},{r.target!r},"
                     f"{r.bound!r},{r.passed}\n")
