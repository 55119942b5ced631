"""Thin-rod interaction kernel G(omega_n, k) for two parallel dielectric rods.

The kernel is written in the reduced variables ``u = k R`` and
``s = omega_n R / c`` so that ``G = (a^2 b^2 / R^4) * reduced_kernel(...)``.
Every bracket of the kernel carries a factor ``(eps3 - eps1)(eps3 - eps2)``;
the bracket differences are formed as

    eps3/g3^2 - eps1/g1^2 = (eps3 - eps1) u^2 / (g1^2 g3^2)
    1/g3^2   - 1/g1^2     = (eps1 - eps3) s^2 / (g1^2 g3^2)

(in reduced units) which is exact algebra and free of cancellation when
``eps1 ~ eps3``.
"""
import enum
from dataclasses import dataclass

import numpy as np

from .matsubara import C_LIGHT
from .special_functions import bessel_k012_scaled

THIN_ROD_FACTOR = 5.0


class KernelMode(str, enum.Enum):
    RETARDED = "retarded"
    NONRETARDED = "nonretarded"


@dataclass(frozen=True)
class RodSystem:
    """Two rods (radii in metres) and the three dielectric responses.

    ``material_1`` and ``material_2`` are the rods, ``material_3`` the
    medium between them.
    """

    radius_a: float
    radius_b: float
    material_1: object
    material_2: object
    material_3: object

    def __post_init__(self):
        for name in ("radius_a", "radius_b"):
            r = getattr(self, name)
            if not (np.isfinite(r) and r > 0):
                raise ValueError(f"{name} must be positive, got {r!r}")

    def epsilons(self, xi):
        return (self.material_1(xi), self.material_2(xi), self.material_3(xi))

    def thin_rod_limit(self):
        """Separation below which the thin-rod approximation is doubtful."""
        return THIN_ROD_FACTOR * 2.0 * max(self.radius_a, self.radius_b)

    def thin_rod_warning(self, R):
        limit = self.thin_rod_limit()
        if R < limit:
            return (f"separation {R:.3e} m is below {THIN_ROD_FACTOR:g} rod diameters "
                    f"({limit:.3e} m); thin-rod approximation is questionable")
        return None

    def swapped(self):
        """The same system with the two rods relabelled."""
        return RodSystem(self.radius_b, self.radius_a, self.material_2, self.material_1, self.material_3)

    @property
    def highest_resonance(self):
        return max(m.highest_resonance for m in (self.material_1, self.material_2, self.material_3))


def gamma(epsilon, k, omega_n, c=C_LIGHT, mode=KernelMode.RETARDED):
    """``sqrt(k^2 + eps (omega_n/c)^2)``; exactly ``k`` in nonretarded mode."""
    if KernelMode(mode) is KernelMode.NONRETARDED:
        return np.asarray(k, dtype=float) * 1.0 if np.ndim(k) else float(k)
    # hypot avoids underflow of k^2 and is exact when omega_n = 0
    return np.hypot(k, np.sqrt(epsilon) * (omega_n / c))


def reduced_kernel(u, s, e1, e2, e3):
    """Dimensionless kernel ``G R^4 / (a^2 b^2)``.

    Parameters
    ----------
    u : array_like
        ``k R`` (>= 0).
    s : array_like
        ``omega_n R / c``; zero gives the nonretarded kernel.
    e1, e2, e3 : array_like
        Dielectric functions of rod 1, rod 2 and medium at ``i omega_n``.

    All arguments broadcast together.  At ``u = s = 0`` the finite limit
    ``-2 (e3-e1)(e3-e2) / ((e3+e1)(e3+e2))`` is returned.
    """
    u, s, e1, e2, e3 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (u, s, e1, e2, e3)))
    u2 = u * u
    w2 = s * s
    g1 = u2 + e1 * w2  # (gamma_1 R)^2
    g2 = u2 + e2 * w2
    g3 = u2 + e3 * w2
    d1 = e3 - e1
    d2 = e3 - e2
    dd = d1 * d2
    den = (e3 + e1) * (e3 + e2)

    out = np.empty(u.shape)
    zero = g3 == 0
    if zero.any():
        out[zero] = -2.0 * dd[zero] / den[zero]
    ok = ~zero
    if not ok.any():
        return out
    u2, w2, g1, g2, g3 = u2[ok], w2[ok], g1[ok], g2[ok], g3[ok]
    e3, d1, d2, dd, den = e3[ok], d1[ok], d2[ok], dd[ok], den[ok]
    e1, e2 = e1[ok], e2[ok]

    x = np.sqrt(g3)
    k0, k1, k2 = bessel_k012_scaled(x)
    with np.errstate(under="ignore"):
        decay = np.exp(-2.0 * x)

    # eps3/g3 - eps_i/g_i and 1/g3 - 1/g_i, each multiplied by g_i g3
    a31 = d1 * u2
    a32 = d2 * u2
    b31 = -d1 * w2
    b32 = -d2 * w2

    term0 = -0.25 * dd / (e3 * e3) * g3 * g3 * k0 * k0
    # (a32/(g2 g3)) d1/(e3(e3+e2)) + (a31/(g1 g3)) d2/(e3(e3+e1)), times g3^3
    term1 = -0.5 * (a32 / g2 * d1 / (e3 * (e3 + e2)) + a31 / g1 * d2 / (e3 * (e3 + e1))) * g3 * g3 * k1 * k1
    # grouped so that relabelling the rods gives bit-identical results
    bracket = ((a31 / g1) * (a32 / g2)
               + e3 * e3 * (b31 * b32 + (a31 * b32 + a32 * b31)) / (g3 * g3)) / den
    term2 = -0.5 * bracket * g3 * g3 * (k2 * k2 + k0 * k0)
    out[ok] = (term0 + term1 + term2) * decay
    return out


def kernel_from_eps(e1, e2, e3, radius_a, radius_b, omega_n, k, R, mode=KernelMode.RETARDED, c=C_LIGHT):
    """Kernel ``G`` for given dielectric values (no material lookup)."""
    if not R > 0:
        raise ValueError(f"separation R must be > 0, got {R!r}")
    s = 0.0 if KernelMode(mode) is KernelMode.NONRETARDED else omega_n * R / c
    u = np.asarray(k, dtype=float) * R
    val = (radius_a * radius_b) ** 2 / R**4 * reduced_kernel(u, s, e1, e2, e3)
    return float(val) if np.ndim(k) == 0 else val


def kernel_G(system, omega_n, k, R, mode=KernelMode.RETARDED, c=C_LIGHT):
    """Interaction kernel ``G(omega_n, k)`` at separation ``R`` (dimensionless).

    Dielectric functions are always taken at ``xi = omega_n``; the
    nonretarded mode only replaces every ``gamma_alpha`` by ``k``.
    """
    if not R > 0:
        raise ValueError(f"separation R must be > 0, got {R!r}")
    e1, e2, e3 = system.epsilons(omega_n)
    return kernel_from_eps(e1, e2, e3, system.radius_a, system.radius_b, omega_n, k, R, mode, c)
