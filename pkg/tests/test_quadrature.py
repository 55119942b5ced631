import math

import numpy as np
import pytest
from scipy import special

from rodcasimir.quadrature import integrate, integrate_jobs


def test_exponential():
    v, err, ok = integrate(lambda u: np.exp(-u), [0.0, 1.0, 5.0, 60.0], 1e-12)
    assert ok
    assert v == pytest.approx(1.0 - math.exp(-60.0), rel=1e-13)
    assert err < 1e-11


def test_bessel_moment_closed_form():
    # int_0^inf x^4 K0(x)^2 dx = sqrt(pi) Gamma(5/2)^3 / (4 Gamma(3)), integrand from scipy
    v, _, ok = integrate(lambda u: u**4 * special.k0e(u) ** 2 * np.exp(-2 * u),
                         [0.0, 1e-3, 1e-2, 0.1, 1.0, 4.0, 16.0, 60.0], 1e-12)
    assert ok
    ref = math.sqrt(math.pi) * math.gamma(2.5) ** 3 / (4 * math.gamma(3.0))
    assert v == pytest.approx(ref, rel=1e-11)


def test_log_singularity():
    v, _, ok = integrate(lambda u: np.log(np.where(u > 0, u, 1.0)), [0.0, 1e-6, 1e-3, 1.0], 1e-10,
                         max_panels=2000)
    assert ok
    assert v == pytest.approx(-1.0, rel=1e-9)


def test_jobs_are_independent_of_batch():
    def f(u, job):
        return np.exp(-(1.0 + job) * u) * np.cos(3.0 * job * u)

    breaks = [np.array([0.0, 0.5, 2.0, 40.0])] * 6
    together = integrate_jobs(f, breaks, 1e-10)
    for j in range(6):
        alone = integrate_jobs(lambda u, job: f(u, job + j), breaks[:1], 1e-10)
        assert alone.value[0] == together.value[j]
        assert alone.evaluations[0] == together.evaluations[j]


def test_nonconvergence_is_flagged():
    res = integrate_jobs(lambda u, job: np.sin(1.0 / np.maximum(u, 1e-300)),
                         [np.array([0.0, 1.0])], 1e-12, max_panels=8)
    assert not res.converged[0]
    assert np.isfinite(res.value[0])


def test_empty_job_list():
    res = integrate_jobs(lambda u, job: u, [], 1e-8)
    assert res.value.size == 0
