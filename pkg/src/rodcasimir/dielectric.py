"""Dielectric functions on the imaginary frequency axis.

A :class:`DielectricModel` wraps one of three sources:

* :class:`OscillatorModel` -- damped oscillator sum
  ``eps(i xi) = 1 + sum_j C_j / (1 + (xi/w_j)^2 + g_j xi / w_j^2)``
* :class:`TabulatedLossData` -- real-axis loss ``eps''(w)`` turned into
  ``eps(i xi)`` through the Kramers-Kronig relation
* :class:`ConstantModel` -- frequency independent value, for model systems

All frequencies are angular frequencies in rad/s.
"""
import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator


class MaterialCardError(ValueError):
    """A material card or loss table failed validation."""

    def __init__(self, path, field_name, message):
        self.path = str(path)
        self.field = field_name
        super().__init__(f"{self.path}: field '{field_name}': {message}")


# --------------------------------------------------------------------------
# sources


@dataclass(frozen=True)
class Oscillator:
    strength: float
    omega: float
    damping: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.strength) and self.strength >= 0):
            raise ValueError(f"oscillator strength must be >= 0, got {self.strength!r}")
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ValueError(f"oscillator resonance must be > 0, got {self.omega!r}")
        if not (math.isfinite(self.damping) and self.damping >= 0):
            raise ValueError(f"oscillator damping must be >= 0, got {self.damping!r}")


@dataclass(frozen=True)
class OscillatorModel:
    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(
            t if isinstance(t, Oscillator) else Oscillator(*t) for t in self.terms))

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        eps = np.ones_like(xi)
        for t in self.terms:
            r = xi / t.omega
            eps = eps + t.strength / (1.0 + r * r + t.damping * xi / (t.omega * t.omega))
        return eps

    @property
    def static(self):
        return 1.0 + sum(t.strength for t in self.terms)

    @property
    def highest_resonance(self):
        return max((t.omega for t in self.terms), default=0.0)


@dataclass(frozen=True)
class ConstantModel:
    value: float

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 1.0):
            raise ValueError(f"constant dielectric value must be >= 1, got {self.value!r}")

    def __call__(self, xi):
        return np.full(np.shape(xi), float(self.value))

    @property
    def highest_resonance(self):
        return 0.0


class TabulatedLossData:
    """Real-axis loss ``eps''(w)`` sampled on a strictly increasing grid."""

    def __init__(self, frequencies, loss):
        w = np.array(frequencies, dtype=float)
        e = np.array(loss, dtype=float)
        if w.ndim != 1 or e.shape != w.shape:
            raise ValueError("frequencies and loss must be 1-d arrays of equal length")
        if w.size < 2:
            raise ValueError("a loss table needs at least 2 points")
        if not np.all(np.isfinite(w)) or not np.all(np.isfinite(e)):
            raise ValueError("loss table contains non-finite values")
        if w[0] <= 0:
            raise ValueError("tabulated frequencies must be > 0")
        if np.any(np.diff(w) <= 0):
            raise ValueError("tabulated frequencies must be strictly increasing")
        if np.any(e < 0):
            raise ValueError("loss eps'' must be >= 0 (passive medium)")
        w.setflags(write=False)
        e.setflags(write=False)
        self.frequencies = w
        self.loss = e

    def __len__(self):
        return self.frequencies.size

    def __eq__(self, other):
        if not isinstance(other, TabulatedLossData):
            return NotImplemented
        return (np.array_equal(self.frequencies, other.frequencies)
                and np.array_equal(self.loss, other.loss))

    __hash__ = None

    @property
    def highest_resonance(self):
        """Frequency of the highest-lying local maximum of the loss."""
        e = self.loss
        peaks = np.flatnonzero((e[1:-1] > e[:-2]) & (e[1:-1] >= e[2:])) + 1
        if peaks.size:
            return float(self.frequencies[peaks[-1]])
        return float(self.frequencies[np.argmax(e)]) if np.any(e > 0) else 0.0


# --------------------------------------------------------------------------
# Kramers-Kronig transform

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


def _t_minus_atan(t):
    """t - arctan(t) without cancellation for small t."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    small = t < 0.05
    ts = t[small]
    t2 = ts * ts
    # alternating series t^3/3 - t^5/5 + ...
    out[small] = ts * t2 * (1 / 3 - t2 * (1 / 5 - t2 * (1 / 7 - t2 * (1 / 9 - t2 / 11))))
    tl = t[~small]
    out[~small] = tl - np.arctan(tl)
    return out


def kk_transform(data, xi, chunk=256):
    """``eps(i xi)`` from tabulated loss by direct quadrature.

    Computes ``1 + (2/pi) int_0^inf w eps''(w) / (w^2 + xi^2) dw`` with the
    loss linearly interpolated between table points (4-point Gauss-Legendre
    per interval) and analytic tails: ``eps'' ~ w`` below the table and
    ``eps'' ~ w^-3`` above it.
    """
    if not isinstance(data, TabulatedLossData):
        raise TypeError("kk_transform expects TabulatedLossData")
    scalar = np.ndim(xi) == 0
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(~(xi >= 0)):
        raise ValueError("imaginary frequency xi must be >= 0")
    w, e = data.frequencies, data.loss
    wa, wb = w[:-1], w[1:]
    half = 0.5 * (wb - wa)
    mid = 0.5 * (wb + wa)
    nodes = (mid[:, None] + half[:, None] * _GL_NODES).ravel()
    frac = ((nodes.reshape(-1, 4) - wa[:, None]) / (wb - wa)[:, None])
    loss_nodes = (e[:-1, None] * (1 - frac) + e[1:, None] * frac).ravel()
    weights = (half[:, None] * _GL_WEIGHTS).ravel()
    numer = weights * nodes * loss_nodes
    nodes2 = nodes * nodes

    out = np.empty_like(xi)
    for i in range(0, xi.size, chunk):
        x = xi[i:i + chunk]
        out[i:i + chunk] = (numer / (nodes2 + (x * x)[:, None])).sum(axis=1)

    w0, e0 = w[0], e[0]
    wn, en = w[-1], e[-1]
    pos = xi > 0
    safe = np.where(pos, xi, 1.0)
    # below the table eps'' = e0 w/w0: int_0^w0 (e0/w0) w^2/(w^2+xi^2) dw
    low = np.where(pos, e0 * safe / w0 * _t_minus_atan(w0 / safe), e0)
    # above the table eps'' = en (wn/w)^3: int_wn^inf en wn^3 / (w^2 (w^2+xi^2)) dw
    t = safe / wn
    high = np.where(pos, en * _t_minus_atan(t) / t**3, en / 3.0)
    eps = 1.0 + (2.0 / math.pi) * (out + low + high)
    return float(eps[0]) if scalar else eps


class _KKCache:
    """Monotone cubic interpolant of log(eps-1) against log(xi)."""

    def __init__(self, data, points_per_decade=400, pad_decades=3.0):
        w = data.frequencies
        lo = math.log10(w[0]) - pad_decades
        hi = math.log10(w[-1]) + pad_decades
        n = int(math.ceil((hi - lo) * points_per_decade)) + 1
        self.log_xi = np.linspace(lo, hi, n) * math.log(10.0)
        self.xi_min = math.exp(self.log_xi[0])
        self.xi_max = math.exp(self.log_xi[-1])
        excess = kk_transform(data, np.exp(self.log_xi)) - 1.0
        self.usable = bool(np.all(excess > 0))
        if self.usable:
            self._interp = PchipInterpolator(self.log_xi, np.log(excess), extrapolate=False)

    def __call__(self, xi):
        return 1.0 + np.exp(self._interp(np.log(xi)))


# --------------------------------------------------------------------------
# model wrapper


@dataclass(frozen=True, eq=False)
class DielectricModel:
    """Evaluable ``eps(i xi)`` for one material.

    Tabulated sources are transformed once into a cached interpolant; set
    ``cached=False`` to always use the direct quadrature.
    """

    source: object
    label: str = "material"
    tag: str = ""
    cached: bool = True
    cache_points_per_decade: int = 400
    _cache: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.source, (OscillatorModel, TabulatedLossData, ConstantModel)):
            raise TypeError(f"unsupported dielectric source {type(self.source).__name__}")

    @property
    def kind(self):
        return {OscillatorModel: "oscillators", TabulatedLossData: "tabulated",
                ConstantModel: "constant"}[type(self.source)]

    @property
    def highest_resonance(self):
        return self.source.highest_resonance

    def same_response(self, other):
        """True if both models describe the same source data."""
        return self is other or (type(self.source) is type(other.source)
                                 and self.source == other.source)

    def _kk_cache(self):
        if not self._cache:
            self._cache.append(_KKCache(self.source, self.cache_points_per_decade))
        return self._cache[0]

    def __call__(self, xi):
        return eval_epsilon(self, xi)


def eval_epsilon(model, xi):
    """``eps(i xi)`` for ``xi >= 0`` (scalar or array)."""
    scalar = np.ndim(xi) == 0
    xi = np.asarray(xi, dtype=float)
    if np.any(~(xi >= 0)):
        raise ValueError("imaginary frequency xi must be >= 0")
    src = model.source
    if isinstance(src, TabulatedLossData):
        if model.cached:
            cache = model._kk_cache()
        if model.cached and cache.usable:
            flat = np.atleast_1d(xi).ravel()
            out = np.empty_like(flat)
            inside = (flat >= cache.xi_min) & (flat <= cache.xi_max)
            if inside.any():
                out[inside] = cache(flat[inside])
            if (~inside).any():
                out[~inside] = kk_transform(src, flat[~inside])
            eps = out.reshape(np.shape(xi))
        else:
            eps = kk_transform(src, xi)
    else:
        eps = src(xi)
    return float(eps) if scalar else np.asarray(eps)


# --------------------------------------------------------------------------
# crossings


@dataclass
class CrossingReport:
    """Roots of ``eps_a(i xi) - eps_b(i xi)``.

    ``crossings`` holds ``(xi_star, sign_below)`` pairs where ``sign_below``
    is the sign of ``eps_a - eps_b`` just below the crossing.
    """

    label_a: str
    label_b: str
    crossings: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    @property
    def frequencies(self):
        return [x for x, _ in self.crossings]


def find_crossings(a, b, xi_min, xi_max, points_per_decade=64, rtol=1e-10):
    """Locate every sign change of ``eps_a - eps_b`` on ``[xi_min, xi_max]``.

    A logarithmic scan brackets each root, bisection in ``log xi`` refines
    it.  Touching without a sign change is not a crossing; it is only noted
    in ``diagnostics``.
    """
    if not (0 <= xi_min < xi_max):
        raise ValueError("need 0 <= xi_min < xi_max")
    report = CrossingReport(a.label, b.label)
    if a.same_response(b):
        report.diagnostics.append("identical dielectric responses; difference vanishes identically")
        return report

    lo = xi_min if xi_min > 0 else xi_max * 1e-12
    decades = math.log10(xi_max / lo)
    n = max(2, int(math.ceil(decades * points_per_decade)) + 1)
    grid = np.logspace(math.log10(lo), math.log10(xi_max), n)
    if xi_min == 0:
        grid = np.concatenate([[0.0], grid])
    diff = eval_epsilon(a, grid) - eval_epsilon(b, grid)
    sign = np.sign(diff)

    def f(x):
        return eval_epsilon(a, x) - eval_epsilon(b, x)

    i = 0
    last_nonzero = None
    while i < grid.size:
        s = sign[i]
        if s == 0:
            # exact zero on a scan point: crossing only if the sign flips across it
            j = i
            while j < grid.size and sign[j] == 0:
                j += 1
            before = last_nonzero
            after = sign[j] if j < grid.size else None
            if before is not None and after is not None and before != after:
                report.crossings.append((float(grid[i]), int(before)))
            elif before is not None or after is not None:
                report.diagnostics.append(f"tangential contact at xi = {grid[i]:.6e} rad/s (no sign change)")
            i = j
            continue
        if last_nonzero is not None and s != last_nonzero and sign[i - 1] != 0:
            report.crossings.append((_bisect_log(f, grid[i - 1], grid[i], rtol), int(last_nonzero)))
        last_nonzero = s
        i += 1

    # near-tangential approaches: local minima of |diff| without sign change
    mag = np.abs(diff)
    scale = np.maximum(np.abs(eval_epsilon(a, grid)), 1.0)
    for k in range(1, grid.size - 1):
        if (mag[k] < mag[k - 1] and mag[k] <= mag[k + 1] and sign[k - 1] == sign[k + 1] != 0
                and mag[k] < 1e-6 * scale[k]):
            report.diagnostics.append(f"near-tangential approach at xi = {grid[k]:.6e} rad/s")
    return report


def _bisect_log(f, lo, hi, rtol):
    flo = f(lo)
    while hi - lo > rtol * hi:
        mid = math.sqrt(lo * hi) if lo > 0 else 0.5 * hi
        fm = f(mid)
        if fm == 0:
            return float(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return float(math.sqrt(lo * hi) if lo > 0 else 0.5 * (lo + hi))


# --------------------------------------------------------------------------
# files


def read_loss_table(path):
    """Read a two-column (w [rad/s], eps'') whitespace separated table."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise MaterialCardError(path, "loss_table", f"cannot read file ({exc.strerror})") from None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "," in line or line.lower().startswith("xi"):
            raise MaterialCardError(
                path, "loss_table",
                f"line {lineno} looks like an eps(i xi) CSV (e.g. output of the 'epsilon' command); "
                "only real-axis loss tables (w, eps'') can be ingested")
        parts = line.split()
        if len(parts) != 2:
            raise MaterialCardError(path, "loss_table", f"line {lineno}: expected 2 columns, got {len(parts)}")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise MaterialCardError(path, "loss_table", f"line {lineno}: not a number") from None
    if not rows:
        raise MaterialCardError(path, "loss_table", "no data rows")
    arr = np.array(rows)
    try:
        return TabulatedLossData(arr[:, 0], arr[:, 1])
    except ValueError as exc:
        raise MaterialCardError(path, "loss_table", str(exc)) from None


def write_loss_table(path, data, header=None):
    """Write a loss table in the exact format :func:`read_loss_table` accepts."""
    lines = []
    if header:
        lines += [f"# {h}" for h in header.splitlines()]
    lines += [f"{w!r} {e!r}" for w, e in zip(data.frequencies.tolist(), data.loss.tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


def load_material_card(path):
    """Parse a material card into a :class:`DielectricModel`.

    Cards are INI files with a single ``[material]`` section::

        [material]
        name = SiO2
        source_type = oscillators      ; or tabulated, constant
        oscillators =
            0.829  1.5e14  0.0          ; C  omega[rad/s]  g[rad/s]
        loss_table = zno_loss.dat      ; tabulated only, relative to the card
        epsilon = 3.0                  ; constant only
    """
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";",), comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise MaterialCardError(path, "file", f"cannot read card ({exc.strerror})") from None
    except configparser.Error as exc:
        raise MaterialCardError(path, "file", f"malformed card: {exc}") from None
    if not parser.has_section("material"):
        raise MaterialCardError(path, "material", "missing [material] section")
    sec = parser["material"]
    name = sec.get("name", "").strip()
    if not name:
        raise MaterialCardError(path, "name", "missing material name")
    kind = sec.get("source_type", "").strip().lower()
    tag = sec.get("tag", "").strip()

    if kind == "oscillators":
        terms = []
        for lineno, raw in enumerate(sec.get("oscillators", "").splitlines(), 1):
            line = raw.split("#")[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise MaterialCardError(path, "oscillators",
                                        f"entry {lineno}: expected 'C omega_rad_s g_rad_s'")
            try:
                c, w, g = (float(p) for p in parts)
            except ValueError:
                raise MaterialCardError(path, "oscillators", f"entry {lineno}: not a number") from None
            try:
                terms.append(Oscillator(c, w, g))
            except ValueError as exc:
                raise MaterialCardError(path, "oscillators", f"entry {lineno}: {exc}") from None
        source = OscillatorModel(tuple(terms))
    elif kind == "tabulated":
        ref = sec.get("loss_table", "").strip()
        if not ref:
            raise MaterialCardError(path, "loss_table", "tabulated cards need a loss_table path")
        table = Path(ref)
        if not table.is_absolute():
            table = path.parent / table
        source = read_loss_table(table)
    elif kind == "constant":
        try:
            source = ConstantModel(float(sec.get("epsilon", "")))
        except ValueError as exc:
            raise MaterialCardError(path, "epsilon", str(exc) or "not a number") from None
    else:
        raise MaterialCardError(path, "source_type",
                                f"expected oscillators, tabulated or constant, got {kind!r}")
    return DielectricModel(source, label=name, tag=tag)
