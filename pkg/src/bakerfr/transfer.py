"""Transfer-operator machinery for the expanding (horizontal) direction.

The vertical coordinate never enters the contraction statistics, so the
invariant measure only matters through its projection on the x axis.  That
projection is piecewise constant for both map families, and the projected
Frobenius-Perron operator acts exactly on step densities with rational
breakpoints.  The stationary density is obtained from exact linear algebra
on the cell-transfer matrix of the natural Markov partition; power
iteration in floats is kept as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from bakerfr.maps import (
    MapConstructionError,
    PiecewiseAffineMap,
    RegionLabel,
    as_fraction,
)

Scalar = Union[Fraction, float]

_ZERO = Fraction(0)
_ONE = Fraction(1)
_HALF = Fraction(1, 2)


class ConsistencyError(AssertionError):
    """Two supposedly-equivalent computations disagreed."""


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


# ---------------------------------------------------------------------------
# one-dimensional projection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Branch1D:
    lo: Fraction
    hi: Fraction
    slope: Fraction
    intercept: Fraction

    def __call__(self, x):
        return self.slope * x + self.intercept

    def image(self) -> tuple[Fraction, Fraction]:
        a, b = self(self.lo), self(self.hi)
        return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class Map1D:
    name: str
    branches: tuple[Branch1D, ...]

    def breakpoints(self) -> list[Fraction]:
        pts = {_ZERO, _ONE}
        for b in self.branches:
            pts.update((b.lo, b.hi))
        return sorted(pts)

    def apply(self, x):
        for b in self.branches:
            if b.lo <= x < b.hi or (x == b.hi == 1):
                return b(x)
        raise ValueError(f"x={x} not in any branch of {self.name}")


def project_unstable(m: PiecewiseAffineMap) -> Map1D:
    """Project a map onto its expanding direction.

    Requires every branch to act on x independently of y and to span the
    full height of the square; the perturbation map fails both.
    """
    branches = []
    for b in m.branches:
        if b.linear[0][1] != 0:
            raise MapConstructionError(
                f"{m.name}: branch x-action depends on y; not projectable")
        if not (b.y_lo == 0 and b.y_hi == 1):
            raise MapConstructionError(
                f"{m.name}: branch domain is split in y; not projectable")
        branches.append(Branch1D(b.x_lo, b.x_hi, b.linear[0][0], b.offset[0]))
    branches.sort(key=lambda b: b.lo)
    return Map1D(m.name + "_x", tuple(branches))


# ---------------------------------------------------------------------------
# step densities and the exact Frobenius-Perron step
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepDensity:
    """Piecewise-constant probability density on [0, 1]."""

    breakpoints: tuple[Scalar, ...]
    values: tuple[Scalar, ...]

    def __post_init__(self):
        bp, vals = tuple(self.breakpoints), tuple(self.values)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if len(bp) < 2 or len(vals) != len(bp) - 1:
            raise ValueError("need k+1 breakpoints for k values")
        if bp[0] != 0 or bp[-1] != 1 or any(a >= b for a, b in zip(bp, bp[1:])):
            raise ValueError(f"breakpoints must increase strictly from 0 to 1: {bp}")
        if any(v < 0 for v in vals):
            raise ValueError("density values must be non-negative")
        total = self.integral()
        if isinstance(total, Fraction):
            if total != 1:
                raise ValueError(f"density integrates to {total}, not 1")
        elif abs(total - 1.0) > 1e-12:
            raise ValueError(f"density integrates to {total}, not 1")

    def integral(self):
        return sum(v * (b - a)
                   for a, b, v in zip(self.breakpoints, self.breakpoints[1:], self.values))

    def value_at(self, x):
        if not 0 <= x <= 1:
            raise ValueError(f"x={x} outside [0, 1]")
        for a, b, v in zip(self.breakpoints, self.breakpoints[1:], self.values):
            if a <= x < b or (x == b == 1):
                return v
        raise AssertionError("unreachable")

    def simplify(self) -> "StepDensity":
        """Merge adjacent intervals with equal values."""
        bp = [self.breakpoints[0]]
        vals = []
        for b, v in zip(self.breakpoints[1:], self.values):
            if vals and v == vals[-1]:
                bp[-1] = b
            else:
                vals.append(v)
                bp.append(b)
        return StepDensity(tuple(bp), tuple(vals))

    def to_float(self) -> "StepDensity":
        return StepDensity(tuple(float(b) for b in self.breakpoints),
                           tuple(float(v) for v in self.values))

    def rows(self) -> list[tuple[Scalar, Scalar]]:
        """(breakpoint, value) rows for CSV output; the final breakpoint 1
        repeats the last value so step plots close."""
        out = list(zip(self.breakpoints, self.values))
        out.append((self.breakpoints[-1], self.values[-1]))
        return out


def uniform_density() -> StepDensity:
    return StepDensity((_ZERO, _ONE), (_ONE,))


def _push(map1d: Map1D, breakpoints: Sequence, values: Sequence):
    """Raw Frobenius-Perron action on a (possibly unnormalized) step
    function: each affine branch transports its slice of the input with
    weight 1/|slope|.  Returns refined breakpoints and per-cell values."""
    pieces = []  # (img_lo, img_hi, contribution)
    for br in map1d.branches:
        for a, b, v in zip(breakpoints, breakpoints[1:], values):
            lo, hi = max(a, br.lo), min(b, br.hi)
            if lo >= hi:
                continue
            za, zb = br(lo), br(hi)
            if za > zb:
                za, zb = zb, za
            pieces.append((za, zb, v / abs(br.slope)))
    cuts = {_ZERO, _ONE}
    for za, zb, _v in pieces:
        cuts.add(za)
        cuts.add(zb)
    new_bp = sorted(cuts)
    new_vals = []
    for a, b in zip(new_bp, new_bp[1:]):
        total = _ZERO
        for za, zb, v in pieces:
            if za <= a and b <= zb:
                total += v
        new_vals.append(total)
    return tuple(new_bp), tuple(new_vals)


def frobenius_perron_step(map1d: Map1D, rho: StepDensity) -> StepDensity:
    bp, vals = _push(map1d, rho.breakpoints, rho.values)
    return StepDensity(bp, vals)


# ---------------------------------------------------------------------------
# exact stationary density via the Markov-cell transfer matrix
# ---------------------------------------------------------------------------


def _nullspace_vector(mat: list[list[Fraction]]) -> list[Fraction]:
    """One exact nullspace vector of a square rational matrix whose
    nullity must be exactly 1."""
    n = len(mat)
    a = [row[:] for row in mat]
    pivot_cols = []
    row = 0
    for col in range(n):
        pivot = next((r for r in range(row, n) if a[r][col] != 0), None)
        if pivot is None:
            continue
        a[row], a[pivot] = a[pivot], a[row]
        inv = a[row][col]
        a[row] = [x / inv for x in a[row]]
        for r in range(n):
            if r != row and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[row])]
        pivot_cols.append(col)
        row += 1
        if row == n:
            break
    free = [c for c in range(n) if c not in pivot_cols]
    if len(free) != 1:
        raise ConsistencyError(f"expected a one-dimensional nullspace, got {len(free)}")
    v = [_ZERO] * n
    v[free[0]] = _ONE
    for r, c in enumerate(pivot_cols):
        v[c] = -a[r][free[0]]
    return v


def markov_cells(map1d: Map1D) -> list[Fraction]:
    """Branch-domain breakpoints, verified to be a Markov partition
    (every branch image is a union of cells)."""
    edges = map1d.breakpoints()
    edge_set = set(edges)
    for br in map1d.branches:
        lo, hi = br.image()
        if lo not in edge_set or hi not in edge_set:
            raise MapConstructionError(
                f"branch image ({lo}, {hi}) does not align with the partition")
    return edges


def _values_on_interval(bp, vals, a, b) -> set:
    """Values a step function takes on the interval [a, b)."""
    out = set()
    for za, zb, v in zip(bp, bp[1:], vals):
        if max(a, za) < min(b, zb):
            out.add(v)
    return out


def cell_transfer_matrix(map1d: Map1D) -> list[list[Fraction]]:
    """k x k matrix of the projected operator on cell-wise constant
    densities, built by pushing each cell indicator through one exact
    Frobenius-Perron step."""
    edges = markov_cells(map1d)
    k = len(edges) - 1
    cols = []
    for j in range(k):
        vals = [_ONE if i == j else _ZERO for i in range(k)]
        bp, pushed = _push(map1d, edges, vals)
        col = []
        for a, b in zip(edges, edges[1:]):
            cell_vals = _values_on_interval(bp, pushed, a, b)
            if len(cell_vals) != 1:
                raise MapConstructionError(
                    "pushed indicator is not constant per cell; partition not Markov")
            col.append(cell_vals.pop())
        cols.append(col)
    return [[cols[j][i] for j in range(k)] for i in range(k)]


def invariant_density(map1d: Map1D, tol: float = 1e-12,
                      max_iter: int = 10_000) -> StepDensity:
    """Exact stationary density of the projected operator.

    Solves the unit-eigenvalue problem of the cell-transfer matrix with
    rational elimination, asserts the result is an exact fixed point of
    the Frobenius-Perron step, and cross-checks against float power
    iteration (sup-norm residual <= tol within max_iter)."""
    edges = markov_cells(map1d)
    t = cell_transfer_matrix(map1d)
    k = len(t)
    shifted = [[t[i][j] - (_ONE if i == j else _ZERO) for j in range(k)]
               for i in range(k)]
    v = _nullspace_vector(shifted)
    if all(x <= 0 for x in v):
        v = [-x for x in v]
    if any(x < 0 for x in v):
        raise ConsistencyError(f"stationary vector has mixed signs: {v}")
    mass = sum(val * (b - a) for val, a, b in zip(v, edges, edges[1:]))
    v = [val / mass for val in v]
    rho = StepDensity(tuple(edges), tuple(v))
    stepped = frobenius_perron_step(map1d, rho)
    if stepped.simplify() != rho.simplify():
        raise ConsistencyError("eigen-solution is not a fixed point of the operator")
    power = invariant_density_power(map1d, tol=tol, max_iter=max_iter)
    worst = max(abs(float(a) - b) for a, b in zip(v, power.values))
    if worst > 100 * tol:
        raise ConsistencyError(
            f"power iteration disagrees with the exact solution by {worst:.3e}")
    return rho.simplify()


def invariant_density_power(map1d: Map1D, tol: float = 1e-12,
                            max_iter: int = 10_000) -> StepDensity:
    """Stationary density by float power iteration on the cell values;
    independent of the exact eigen-solve."""
    edges = markov_cells(map1d)
    widths = [float(b - a) for a, b in zip(edges, edges[1:])]
    t = [[float(x) for x in row] for row in cell_transfer_matrix(map1d)]
    k = len(t)
    v = [1.0] * k
    residual = float("inf")
    for _ in range(max_iter):
        new = [sum(t[i][j] * v[j] for j in range(k)) for i in range(k)]
        mass = sum(val * w for val, w in zip(new, widths))
        new = [val / mass for val in new]
        residual = max(abs(a - b) for a, b in zip(new, v))
        v = new
        if residual <= tol:
            return StepDensity(tuple(float(e) for e in edges), tuple(v))
    raise ConvergenceError(f"power iteration did not reach {tol} in {max_iter} steps",
                           residual)


def srb_density(l) -> StepDensity:
    """Closed-form stationary density of the generalized map: constant
    2/(1+4l) on the left half and 8l/(1+4l) on the right half."""
    l = as_fraction(l)
    if not 0 < l <= Fraction(1, 4):
        raise ValueError(f"need 0 < l <= 1/4, got {l}")
    rho_l = 2 / (1 + 4 * l)
    rho_r = 8 * l / (1 + 4 * l)
    if rho_l == rho_r:
        return StepDensity((_ZERO, _ONE), (rho_l,))
    return StepDensity((_ZERO, _HALF, _ONE), (rho_l, rho_r))


# ---------------------------------------------------------------------------
# half-interval transfer matrix (generalized map)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransferMatrix:
    """2x2 operator on the density values over {[0,1/2), [1/2,1]}."""

    l: Fraction
    entries: tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]

    def column_sums(self) -> tuple[Fraction, Fraction]:
        e = self.entries
        return (e[0][0] + e[1][0], e[0][1] + e[1][1])

    def apply(self, rho_l, rho_r):
        e = self.entries
        return (e[0][0] * rho_l + e[0][1] * rho_r,
                e[1][0] * rho_l + e[1][1] * rho_r)


def transfer_matrix(l) -> TransferMatrix:
    """Half-interval transfer matrix [[1-2l, 1/2], [2l, 1/2]] of the
    generalized map, reproduced from branch data by pushing the two
    half-interval indicators through the exact operator."""
    l = as_fraction(l)
    from bakerfr.maps import build_generalized_baker

    closed_form = ((1 - 2 * l, _HALF), (2 * l, _HALF))
    map1d = project_unstable(build_generalized_baker(l))
    halves = [_ZERO, _HALF, _ONE]
    cols = []
    for j in range(2):
        vals = [_ONE if i == j else _ZERO for i in range(2)]
        bp, pushed = _push(map1d, halves, vals)
        col = []
        for a, b in zip(halves, halves[1:]):
            cell_vals = _values_on_interval(bp, pushed, a, b)
            if len(cell_vals) != 1:
                raise ConsistencyError("half intervals are not Markov cells")
            col.append(cell_vals.pop())
        cols.append(col)
    rebuilt = ((cols[0][0], cols[1][0]), (cols[0][1], cols[1][1]))
    if rebuilt != closed_form:
        raise ConsistencyError(
            f"transfer matrix from branch data {rebuilt} != closed form {closed_form}")
    tm = TransferMatrix(l, closed_form)
    if tm.column_sums() != (_ONE, _ONE):
        raise ConsistencyError("transfer matrix columns must sum to 1")
    return tm


# ---------------------------------------------------------------------------
# region-level stochastic matrix and invariant measures
# ---------------------------------------------------------------------------


LABELS4 = (RegionLabel.A, RegionLabel.B, RegionLabel.C, RegionLabel.D)


@dataclass(frozen=True)
class StochasticMatrix:
    """Region-to-region transition probabilities of the generalized map."""

    l: Fraction
    rows: tuple[tuple[Fraction, Fraction, Fraction, Fraction], ...]

    def prob(self, i: RegionLabel, j: RegionLabel) -> Fraction:
        return self.rows[LABELS4.index(i)][LABELS4.index(j)]

    def successors(self, i: RegionLabel) -> list[RegionLabel]:
        return [j for j in LABELS4 if self.prob(i, j) > 0]


_FORBIDDEN = {
    (RegionLabel.A, RegionLabel.A), (RegionLabel.A, RegionLabel.B),
    (RegionLabel.C, RegionLabel.A), (RegionLabel.C, RegionLabel.B),
    (RegionLabel.B, RegionLabel.C), (RegionLabel.B, RegionLabel.D),
    (RegionLabel.D, RegionLabel.C), (RegionLabel.D, RegionLabel.D),
}


def transition_matrix(l) -> StochasticMatrix:
    """Rows (A, B, C, D): A and C jump to C or D with probability 1/2 each;
    B and D jump to A with probability 2l and to B with probability 1-2l.

    The rows are rebuilt from the map geometry (overlap of each branch
    image with the region strips) and checked against the closed form,
    including the column equalities p_ij = p_kj shared by the two rows
    that can reach column j."""
    l = as_fraction(l)
    if not 0 < l <= Fraction(1, 4):
        raise ValueError(f"need 0 < l <= 1/4, got {l}")
    closed = (
        (_ZERO, _ZERO, _HALF, _HALF),
        (2 * l, 1 - 2 * l, _ZERO, _ZERO),
        (_ZERO, _ZERO, _HALF, _HALF),
        (2 * l, 1 - 2 * l, _ZERO, _ZERO),
    )
    from bakerfr.maps import build_generalized_baker

    m = build_generalized_baker(l)
    strips = {label: (lo, hi) for lo, hi, label in m.partition}
    map1d = project_unstable(m)
    geo_rows = []
    for src in LABELS4:
        br = next(b for b in map1d.branches if strips[src] == (b.lo, b.hi))
        img_lo, img_hi = br.image()
        width = img_hi - img_lo
        row = []
        for dst in LABELS4:
            lo, hi = strips[dst]
            overlap = max(_ZERO, min(hi, img_hi) - max(lo, img_lo))
            row.append(overlap / width)
        geo_rows.append(tuple(row))
    if tuple(geo_rows) != closed:
        raise ConsistencyError(
            f"geometric transition rows {geo_rows} != closed form {closed}")
    for row in closed:
        if sum(row) != 1:
            raise ConsistencyError("transition rows must sum to 1")
    for i, j in _FORBIDDEN:
        if closed[LABELS4.index(i)][LABELS4.index(j)] != 0:
            raise ConsistencyError(f"transition {i}->{j} should be forbidden")
    for j in range(4):
        nonzero = {closed[i][j] for i in range(4) if closed[i][j] != 0}
        if len(nonzero) > 1:
            raise ConsistencyError(
                f"column {LABELS4[j]} has unequal entries across source rows")
    return StochasticMatrix(l, closed)


@dataclass(frozen=True)
class RegionMeasures:
    l: Fraction
    mu: dict[RegionLabel, Fraction]

    def __getitem__(self, label: RegionLabel) -> Fraction:
        return self.mu[label]


def region_measures(l) -> RegionMeasures:
    """Invariant region probabilities of the generalized map, computed two
    independent ways (left unit-eigenvector of the transition matrix;
    stationary density times strip widths) and required to agree exactly."""
    l = as_fraction(l)
    p = transition_matrix(l)
    # route (a): left eigenvector, i.e. nullspace of (P^T - I)
    pt_minus_i = [[p.rows[j][i] - (_ONE if i == j else _ZERO) for j in range(4)]
                  for i in range(4)]
    v = _nullspace_vector(pt_minus_i)
    if all(x <= 0 for x in v):
        v = [-x for x in v]
    total = sum(v)
    eig = {lab: val / total for lab, val in zip(LABELS4, v)}
    # route (b): stationary density times region widths
    from bakerfr.maps import build_generalized_baker

    m = build_generalized_baker(l)
    rho = invariant_density(project_unstable(m))
    by_width = {}
    for lo, hi, label in m.partition:
        mid = (lo + hi) / 2
        by_width[label] = rho.value_at(mid) * (hi - lo)
    if eig != by_width:
        raise ConsistencyError(
            f"eigenvector route {eig} != density-times-width route {by_width}")
    closed = {
        RegionLabel.A: 2 * l / (1 + 4 * l),
        RegionLabel.B: (1 - 2 * l) / (1 + 4 * l),
        RegionLabel.C: 2 * l / (1 + 4 * l),
        RegionLabel.D: 2 * l / (1 + 4 * l),
    }
    if eig != closed:
        raise ConsistencyError(f"measures {eig} != closed form {closed}")
    if sum(eig.values()) != 1:
        raise ConsistencyError("region measures must sum to 1")
    # stationarity under P
    for j, lab_j in enumerate(LABELS4):
        back = sum(eig[lab_i] * p.rows[i][j] for i, lab_i in enumerate(LABELS4))
        if back != eig[lab_j]:
            raise ConsistencyError(f"measures not stationary at {lab_j}")
    return RegionMeasures(l, eig)


def write_density_csv(rho: StepDensity, path) -> None:
    """CSV rows (breakpoint, value); rationals as num/den text."""
    def fmt(v):
        return f"{v.numerator}/{v.denominator}" if isinstance(v, Fraction) else repr(v)

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("breakpoint,value\n")
        for bp, val in rho.rows():
            fh.write(f"{fmt(bp)},{fmt(val)}\n")
