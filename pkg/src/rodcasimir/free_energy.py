"""Interaction free energy per unit length between two thin rods.

``F = sum'_n g(omega_n)`` with ``g(omega_n) = (1/beta) int_0^inf dk/(2 pi) G``.
The k-integral is done in ``u = k R`` up to ``u_max = k_upper_multiplier``;
beyond that the integrand is below ``exp(-2 u_max)`` of its peak and is
dropped.

Zero-frequency and nonretarded terms do not depend on ``omega_n R / c``, so
their u-integrals reduce to three universal moments of ``K_i^2`` computed
once; retarded terms with ``n >= 1`` are integrated one by one.
"""
import enum
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .quadrature import integrate, integrate_jobs
from .rod_kernel import reduced_kernel
from .special_functions import bessel_k012_scaled

STOP_RUN = 20
RESONANCE_FACTOR = 10.0
_UNDERFLOW_ARG = 745.0  # exp(-x) == 0.0 in double precision beyond this


class EnergyMode(str, enum.Enum):
    RETARDED = "retarded"
    NONRETARDED = "nonretarded"
    ZERO_FREQUENCY = "zero_frequency_only"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"n0": cls.ZERO_FREQUENCY, "zero_frequency": cls.ZERO_FREQUENCY,
                   "ret": cls.RETARDED, "nonret": cls.NONRETARDED}
        key = str(value).lower()
        return aliases.get(key) or cls(key)


@dataclass(frozen=True)
class IntegrationSettings:
    rel_tol: float = 1e-8
    abs_floor: float = 1e-35  # J/m
    max_matsubara_n: int = 20000
    k_upper_multiplier: float = 60.0
    max_panels: int = 400
    workers: int = 1

    def __post_init__(self):
        if not (0 < self.rel_tol <= 1e-2):
            raise ValueError(f"rel_tol must lie in (0, 1e-2], got {self.rel_tol!r}")
        if not self.abs_floor >= 0:
            raise ValueError("abs_floor must be >= 0")
        if int(self.max_matsubara_n) < 1:
            raise ValueError("max_matsubara_n must be >= 1")
        if not self.k_upper_multiplier > 0:
            raise ValueError("k_upper_multiplier must be > 0")
        if int(self.workers) < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class TermResult:
    """One Matsubara term ``g(omega_n)`` in J/m with quadrature diagnostics."""

    n: int
    value: float
    abs_error: float
    converged: bool
    k_evals: int

    def __float__(self):
        return self.value


@dataclass
class EnergyResult:
    R: float
    F: float
    mode: EnergyMode
    n_terms_used: int
    k_evals: int
    converged: bool
    warnings: list = field(default_factory=list)
    tail_estimate: float = 0.0
    terms: np.ndarray = field(default=None, repr=False)

    @property
    def repulsive(self):
        return self.F > 0


# ---------------------------------------------------------------------------
# k-integrals


def _panel_breaks(q3, u_max):
    """Initial panels: log-graded towards u = 0 down to a tenth of q3."""
    lo = min(max(0.1 * q3, 1e-8), 0.5)
    ndec = math.log10(1.0 / lo)
    inner = np.logspace(math.log10(lo), 0.0, int(math.ceil(2 * ndec)) + 1)
    outer = [x for x in (1.5, 2, 3, 4, 6, 8, 12, 16, 24, 32, 45) if x < u_max]
    pts = np.concatenate([[0.0], inner, outer, [u_max]])
    pts = pts[pts <= u_max]
    if pts[-1] != u_max:
        pts = np.append(pts, u_max)
    return np.unique(pts)


@lru_cache(maxsize=8)
def universal_moments(u_max=60.0, rel_tol=1e-13):
    """``int_0^u_max u^4 K_i(u)^2 du`` for K0^2, K1^2 and K2^2 + K0^2.

    Returns ``((J0, J1, J2), evaluations)``.
    """
    def integrand(order):
        def f(u):
            k0, k1, k2 = bessel_k012_scaled(u)
            sq = {0: k0 * k0, 1: k1 * k1, 2: k2 * k2 + k0 * k0}[order]
            return u ** 4 * sq * np.exp(-2.0 * u)
        return f

    breaks = _panel_breaks(0.0, u_max)
    vals = []
    for order in (0, 1, 2):
        v, _, ok = integrate(integrand(order), breaks, rel_tol, max_panels=2000)
        if not ok:  # pragma: no cover
            raise RuntimeError("universal Bessel moments did not converge")
        vals.append(v)
    return tuple(vals), 3 * 15 * (len(breaks) - 1)


def _prefactor(system, env, R):
    a2b2 = (system.radius_a * system.radius_b) ** 2
    return a2b2 / (2.0 * math.pi * env.beta * R ** 5)


def static_term_values(e1, e2, e3, prefactor, u_max=60.0):
    """``g`` for terms with ``omega_n R / c = 0`` (n = 0 or nonretarded)."""
    (j0, j1, j2), _ = universal_moments(float(u_max))
    e1, e2, e3 = (np.asarray(e, dtype=float) for e in (e1, e2, e3))
    dd = (e3 - e1) * (e3 - e2)
    h = (j0 / (4.0 * e3 * e3)
         + 0.5 * j1 * (1.0 / (e3 * (e3 + e2)) + 1.0 / (e3 * (e3 + e1)))
         + 0.5 * j2 / ((e3 + e1) * (e3 + e2)))
    return -prefactor * dd * h


def _retarded_terms(system, env, R, ns, settings):
    """Quadrature of the retarded kernel for Matsubara indices ``ns >= 1``."""
    ns = np.asarray(ns, dtype=np.int64)
    xi = ns * env.spacing
    e1, e2, e3 = (np.asarray(v, dtype=float) for v in system.epsilons(xi))
    s = xi * R / env.c
    q3 = s * np.sqrt(e3)
    dd = (e3 - e1) * (e3 - e2)
    pref = _prefactor(system, env, R)
    u_max = float(settings.k_upper_multiplier)

    values = np.zeros(ns.size)
    errors = np.zeros(ns.size)
    conv = np.ones(ns.size, dtype=bool)
    evals = np.zeros(ns.size, dtype=np.int64)
    # identically zero kernel, or exp(-2 gamma_3 R) underflows everywhere
    live = np.flatnonzero((dd != 0) & (2.0 * q3 < _UNDERFLOW_ARG))
    if live.size:
        ls, l1, l2, l3 = s[live], e1[live], e2[live], e3[live]

        def f(u, job):
            return reduced_kernel(u, ls[job], l1[job], l2[job], l3[job])

        breaks = [_panel_breaks(q, u_max) for q in q3[live]]
        abs_tol = 1e-3 * settings.abs_floor / pref
        res = integrate_jobs(f, breaks, settings.rel_tol, abs_tol, settings.max_panels)
        values[live] = pref * res.value
        errors[live] = pref * res.error
        conv[live] = res.converged
        evals[live] = res.evaluations
    return values, errors, conv, evals


def g_term(system, env, n, R, mode=EnergyMode.RETARDED, settings=None):
    """Matsubara term ``g(omega_n)`` in J/m.

    ``mode`` may be retarded or nonretarded; the zero-frequency-only mode is
    treated like either for ``n = 0``.
    """
    settings = settings or IntegrationSettings()
    mode = EnergyMode.parse(mode)
    if not R > 0:
        raise ValueError(f"separation R must be > 0, got {R!r}")
    if n < 0:
        raise ValueError("Matsubara index must be nonnegative")
    pref = _prefactor(system, env, R)
    if n == 0 or mode is not EnergyMode.RETARDED:
        xi = n * env.spacing
        e1, e2, e3 = system.epsilons(xi)
        value = float(static_term_values(e1, e2, e3, pref, settings.k_upper_multiplier))
        _, ev = universal_moments(float(settings.k_upper_multiplier))
        return TermResult(n, value, 0.0, True, ev)
    v, e, c, ev = _retarded_terms(system, env, R, [n], settings)
    return TermResult(n, float(v[0]), float(e[0]), bool(c[0]), int(ev[0]))


# ---------------------------------------------------------------------------
# Matsubara sum


class _StopTracker:
    """Running primed sum with the truncation rules.

    Stops once (a) omega_n is beyond ``RESONANCE_FACTOR`` times the highest
    material resonance, (b) ``STOP_RUN`` consecutive terms were each below
    ``rel_tol |F|`` and (c) the geometric tail estimate is within tolerance.
    """

    def __init__(self, rel_tol, abs_floor, n_resonance, use_tail=True):
        self.rel_tol = rel_tol
        self.abs_floor = abs_floor
        self.n_resonance = n_resonance
        self.use_tail = use_tail
        self.total = 0.0
        self.run = 0
        self.window = deque(maxlen=STOP_RUN)
        self.tail = math.inf

    def tail_estimate(self):
        w = self.window
        last = abs(w[-1])
        if last == 0.0:
            return 0.0
        if len(w) < 2 or w[0] == 0.0:
            return math.inf
        r = (last / abs(w[0])) ** (1.0 / (len(w) - 1))
        return last * r / (1.0 - r) if r < 1.0 else math.inf

    def tolerance(self):
        return self.rel_tol * abs(self.total) + self.abs_floor

    def add(self, n, term):
        self.total += term
        self.window.append(term)
        self.run = self.run + 1 if abs(term) <= self.rel_tol * abs(self.total) else 0
        self.tail = self.tail_estimate()
        if n < self.n_resonance or self.run < STOP_RUN:
            return False
        return not self.use_tail or self.tail <= self.tolerance()


def _resonance_index(system, env):
    res = system.highest_resonance
    return int(math.ceil(RESONANCE_FACTOR * res / env.spacing)) if res > 0 else 0


def _chunks(start, stop):
    size = 16
    n = start
    while n <= stop:
        hi = min(n + size, stop + 1)
        yield np.arange(n, hi)
        n = hi
        size = min(2 * size, 256)


def _sum_retarded(system, env, R, settings, result):
    u_max = settings.k_upper_multiplier
    pref = _prefactor(system, env, R)
    g0 = float(static_term_values(*system.epsilons(0.0), pref, u_max))
    tracker = _StopTracker(settings.rel_tol, settings.abs_floor, _resonance_index(system, env))
    tracker.add(0, 0.5 * g0)
    terms = [0.5 * g0]
    result.k_evals += universal_moments(float(u_max))[1]
    quad_ok = True
    cap = int(settings.max_matsubara_n)
    workers = int(settings.workers)
    stopped = False
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for batch in _chunks(1, cap):
            if pool is not None and batch.size > 1:
                parts = [p for p in np.array_split(batch, min(workers, batch.size)) if p.size]
                outs = list(pool.map(lambda p: _retarded_terms(system, env, R, p, settings), parts))
                vals = np.concatenate([o[0] for o in outs])
                conv = np.concatenate([o[2] for o in outs])
                evs = np.concatenate([o[3] for o in outs])
            else:
                vals, _, conv, evs = _retarded_terms(system, env, R, batch, settings)
            for i, n in enumerate(batch):
                terms.append(vals[i])
                result.k_evals += int(evs[i])
                quad_ok &= bool(conv[i])
                if tracker.add(int(n), float(vals[i])):
                    stopped = True
                    break
            if stopped:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    result.F = tracker.total
    result.n_terms_used = len(terms)
    result.tail_estimate = tracker.tail
    result.terms = np.array(terms)
    result.converged = quad_ok and tracker.tail <= tracker.tolerance()
    if not quad_ok:
        result.warnings.append("k-integral hit the subdivision limit for at least one Matsubara term")
    if not stopped:
        result.warnings.append(f"Matsubara sum truncated at n = {cap} before the stopping rule was met")


def _sum_nonretarded(system, env, R, settings, result):
    u_max = settings.k_upper_multiplier
    pref = _prefactor(system, env, R)
    cap = int(settings.max_matsubara_n)
    ns = np.arange(cap + 1)
    xi = ns * env.spacing
    g = static_term_values(*system.epsilons(xi), pref, u_max)
    g[0] *= 0.5
    result.k_evals += universal_moments(float(u_max))[1]
    tracker = _StopTracker(settings.rel_tol, settings.abs_floor, _resonance_index(system, env), use_tail=False)
    stop = None
    for n in range(cap + 1):
        if tracker.add(n, float(g[n])):
            stop = n
            break
    partial = tracker.total
    if stop is None:
        result.F = partial
        result.n_terms_used = cap + 1
        result.tail_estimate = math.inf
        result.terms = g
        result.converged = False
        result.warnings.append(
            f"nonretarded Matsubara sum not converged at n = {cap} "
            "(frequency-independent dielectrics make it diverge)")
        return
    # remaining terms by the midpoint Euler-Maclaurin integral from n + 1/2
    spacing = env.spacing
    xi_a = (stop + 0.5) * spacing

    def integrand(t):
        x = xi_a / t
        return static_term_values(*system.epsilons(x), pref, u_max) * xi_a / (t * t)

    tail, qerr, ok = integrate(integrand, [0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.3, 1.0],
                               settings.rel_tol, settings.abs_floor * 1e-3 * spacing)
    tail /= spacing
    em_error = abs(g[stop] - g[stop - 1]) / 24.0 + qerr / spacing
    result.F = partial + tail
    result.n_terms_used = stop + 1
    result.tail_estimate = em_error
    result.terms = g[: stop + 1]
    result.converged = ok and em_error <= settings.rel_tol * abs(result.F) + settings.abs_floor


def free_energy(system, env, R, mode=EnergyMode.RETARDED, settings=None):
    """Free energy per unit length ``F(R)`` in J/m (positive = repulsive)."""
    settings = settings or IntegrationSettings()
    mode = EnergyMode.parse(mode)
    if not (isinstance(R, (int, float, np.floating)) and R > 0 and math.isfinite(R)):
        raise ValueError(f"separation R must be a positive finite number, got {R!r}")
    R = float(R)
    result = EnergyResult(R=R, F=0.0, mode=mode, n_terms_used=0, k_evals=0, converged=False)
    note = system.thin_rod_warning(R)
    if note:
        result.warnings.append(note)
    if mode is EnergyMode.ZERO_FREQUENCY:
        pref = _prefactor(system, env, R)
        g0 = float(static_term_values(*system.epsilons(0.0), pref, settings.k_upper_multiplier))
        result.F = 0.5 * g0
        result.n_terms_used = 1
        result.k_evals = universal_moments(float(settings.k_upper_multiplier))[1]
        result.terms = np.array([result.F])
        result.converged = True
    elif mode is EnergyMode.NONRETARDED:
        _sum_nonretarded(system, env, R, settings, result)
    else:
        _sum_retarded(system, env, R, settings, result)
    return result


def force_per_length(system, env, R, mode=EnergyMode.RETARDED, settings=None):
    """``-dF/dR`` in N/m by a 3-point central difference with step R/1000."""
    h = R / 1000.0
    hi = free_energy(system, env, R + h, mode, settings)
    lo = free_energy(system, env, R - h, mode, settings)
    return -(hi.F - lo.F) / (2.0 * h)
