"""Separation sweeps: sign boundaries, extrema and power-law exponents.

Every refinement step (bisection of a sign change, golden-section search
for an extremum) calls :func:`free_energy` at full accuracy; nothing is
interpolated from the grid.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .free_energy import EnergyMode, IntegrationSettings, free_energy

BOUNDARY_RTOL = 1e-4
EXTREMUM_RTOL = 1e-4
_GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)

COLUMNS = {"ret": "F_ret", "nonret": "F_nonret", "n0": "F_n0"}
_COLUMN_MODE = {"ret": EnergyMode.RETARDED, "nonret": EnergyMode.NONRETARDED,
                "n0": EnergyMode.ZERO_FREQUENCY}


def column_key(column):
    """Normalise a column name (``ret``, ``retarded``, ``n0`` ...) to a key of COLUMNS."""
    key = str(column).lower()
    if key in COLUMNS:
        return key
    try:
        mode = EnergyMode.parse(key)
    except ValueError:
        raise ValueError(f"unknown column {column!r}; expected one of {sorted(COLUMNS)}") from None
    return {v: k for k, v in _COLUMN_MODE.items()}[mode]


@dataclass
class SweepPoint:
    R: float
    F_ret: float
    F_nonret: float
    F_n0: float
    converged_ret: bool
    converged_nonret: bool
    converged_n0: bool = True

    @property
    def converged(self):
        return self.converged_ret and self.converged_nonret and self.converged_n0

    @property
    def ratio(self):
        """``|F_ret / F_nonret|``; NaN when the nonretarded value is zero."""
        return abs(self.F_ret / self.F_nonret) if self.F_nonret != 0.0 else math.nan


@dataclass
class Extremum:
    R: float
    F: float
    kind: str  # "max" or "min"


@dataclass
class SweepReport:
    grid: list
    boundaries: list = field(default_factory=list)
    extrema: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    column: str = "ret"

    @property
    def R(self):
        return np.array([p.R for p in self.grid])

    def values(self, column):
        return np.array([getattr(p, COLUMNS[column_key(column)]) for p in self.grid])

    @property
    def ratio(self):
        return [(p.R, p.ratio) for p in self.grid]

    @property
    def converged(self):
        return all(p.converged for p in self.grid)

    @property
    def n_regions(self):
        return len(self.boundaries) + 1

    def region_signs(self):
        """Sign of the analysed column in each region, from small to large R."""
        vals = self.values(self.column)
        R = self.R
        edges = [0.0] + list(self.boundaries) + [math.inf]
        signs = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            inside = vals[(R > lo) & (R < hi) & (vals != 0)]
            signs.append(int(np.sign(inside[0])) if inside.size else 0)
        return signs


def log_grid(R_min, R_max, points_per_decade):
    """Logarithmic grid from R_min to R_max inclusive."""
    if not (0 < R_min < R_max) or not all(map(math.isfinite, (R_min, R_max))):
        raise ValueError(f"need 0 < R_min < R_max, got {R_min!r}, {R_max!r}")
    if int(points_per_decade) < 4:
        raise ValueError("points_per_decade must be >= 4")
    decades = math.log10(R_max / R_min)
    n = max(int(math.ceil(points_per_decade * decades - 1e-9)), 1)
    steps = np.arange(n + 1) / n
    grid = R_min * (R_max / R_min) ** steps
    grid[0], grid[-1] = R_min, R_max
    return grid


def _evaluate_point(system, env, R, settings):
    ret = free_energy(system, env, R, EnergyMode.RETARDED, settings)
    nonret = free_energy(system, env, R, EnergyMode.NONRETARDED, settings)
    n0 = free_energy(system, env, R, EnergyMode.ZERO_FREQUENCY, settings)
    point = SweepPoint(R, ret.F, nonret.F, n0.F, ret.converged, nonret.converged, n0.converged)
    notes = []
    for res in (ret, nonret, n0):
        notes.extend(w for w in res.warnings if w not in notes)
    return point, notes


class _Evaluator:
    """Full-accuracy evaluation of one column with a small memo."""

    def __init__(self, system, env, settings, column):
        self.system, self.env, self.settings = system, env, settings
        self.mode = _COLUMN_MODE[column]
        self.memo = {}
        self.failed = []

    def __call__(self, R):
        if R not in self.memo:
            res = free_energy(self.system, self.env, R, self.mode, self.settings)
            if not res.converged:
                self.failed.append(R)
            self.memo[R] = res.F
        return self.memo[R]


def _bisect_boundary(f, lo, hi, f_lo, rtol=BOUNDARY_RTOL):
    while hi / lo - 1.0 > rtol:
        mid = math.sqrt(lo * hi)
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def _golden_extremum(f, lo, hi, kind, rtol=EXTREMUM_RTOL):
    """Golden-section search in ln R for a max or min of ``f`` on [lo, hi]."""
    sgn = -1.0 if kind == "max" else 1.0
    a, b = math.log(lo), math.log(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = sgn * f(math.exp(c)), sgn * f(math.exp(d))
    while b - a > rtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = sgn * f(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = sgn * f(math.exp(d))
    R = math.exp(0.5 * (a + b))
    return Extremum(R, f(R), kind)


def sweep(system, env, R_min, R_max, points_per_decade=16, settings=None, column="ret"):
    """Free energies on a log grid plus sign boundaries and extrema.

    Parameters
    ----------
    system : RodSystem
    env : ThermalEnvironment
    R_min, R_max : float
        Separation range in metres.
    points_per_decade : int
        Grid density, at least 4.
    settings : IntegrationSettings, optional
        ``settings.workers`` grid points are evaluated concurrently.
    column : str
        Column used for boundary and extremum detection; the retarded
        energy by default.

    Returns
    -------
    SweepReport
    """
    settings = settings or IntegrationSettings()
    column = column_key(column)
    grid = log_grid(R_min, R_max, points_per_decade)
    workers = int(settings.workers)
    inner = replace(settings, workers=1) if workers > 1 else settings

    def work(R):
        return _evaluate_point(system, env, float(R), inner)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outs = list(pool.map(work, grid))
    else:
        outs = [work(R) for R in grid]

    points = [o[0] for o in outs]
    report = SweepReport(grid=points, column=column)
    thin = [p.R for p, notes in outs if any("thin-rod" in w for w in notes)]
    if thin:
        report.warnings.append(f"thin-rod approximation questionable for {len(thin)} grid point(s) "
                               f"with R <= {max(thin):.3e} m")
    for p, notes in outs:
        if not p.converged:
            detail = "; ".join(w for w in notes if "thin-rod" not in w) or "not converged"
            report.warnings.append(f"R = {p.R:.6e} m excluded: {detail}")

    f = _Evaluator(system, env, inner, column)
    name = COLUMNS[column]
    vals = [getattr(p, name) for p in points]
    ok = [getattr(p, "converged_" + column) for p in points]
    for p, v in zip(points, vals):
        f.memo[p.R] = v

    for i in range(len(points) - 1):
        if not (ok[i] and ok[i + 1]):
            continue
        if vals[i] * vals[i + 1] < 0:
            report.boundaries.append(_bisect_boundary(f, points[i].R, points[i + 1].R, vals[i]))

    for i in range(1, len(points) - 1):
        if not (ok[i - 1] and ok[i] and ok[i + 1]):
            continue
        left, mid, right = vals[i - 1], vals[i], vals[i + 1]
        if mid > left and mid > right:
            kind = "max"
        elif mid < left and mid < right:
            kind = "min"
        else:
            continue
        report.extrema.append(_golden_extremum(f, points[i - 1].R, points[i + 1].R, kind))

    if f.failed:
        report.warnings.append(f"{len(f.failed)} refinement evaluation(s) did not converge")
    return report


def local_exponent(report, column, R):
    """``d ln|F| / d ln R`` by a centred difference on the sweep grid.

    The stencil is centred on the grid point nearest to ``R`` (in ln R),
    which must be an interior point.

    Raises
    ------
    ValueError
        If ``R`` is outside the grid interior or the column is zero or
        changes sign within the stencil.
    """
    grid = report.R
    if grid.size < 3 or not (grid[0] < R < grid[-1]):
        raise ValueError(f"R = {R!r} is not strictly inside the sweep grid")
    i = int(np.argmin(np.abs(np.log(grid) - math.log(R))))
    i = min(max(i, 1), grid.size - 2)
    vals = report.values(column)
    lo, mid, hi = vals[i - 1], vals[i], vals[i + 1]
    if lo == 0 or mid == 0 or hi == 0 or not (np.sign(lo) == np.sign(mid) == np.sign(hi)):
        raise ValueError(f"column {column!r} changes sign or vanishes near R = {R:.6e} m; "
                         "exponent undefined")
    return float((math.log(abs(hi)) - math.log(abs(lo))) / (math.log(grid[i + 1]) - math.log(grid[i - 1])))
