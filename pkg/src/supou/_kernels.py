"""Path-evaluation kernels: sum of zeta * f_t(xi, tau) over sampled points.

Two interchangeable backends compute the same quantities:

* ``numba``: compiled loops (``nogil`` so path-level threads run in parallel);
* ``numpy``: vectorized over blocks of points.

The backend is read from the ``SUPOU_KERNEL_BACKEND`` environment variable
(``numba`` by default, ``numpy`` to force the fallback). If numba cannot be
imported the numpy backend is used.

For a point (xi, tau, zeta) and grid time t the contributions are

* tau <= 0:      x_minus  += (zeta/xi) (1 - e^{-xi t}) e^{xi tau}
* 0 < tau <= t:  x_plus1  += zeta/xi,  x_plus2 += (zeta/xi) e^{-xi (t - tau)}

and the total is x_minus + x_plus1 - x_plus2, accumulated separately with
``expm1`` so that it stays accurate when xi (t - tau) is small. Past points
with xi |tau| beyond the double-precision underflow limit are skipped, and
exponentials of future points are skipped once they have underflowed.
"""

from __future__ import annotations

import os

import numpy as np

from ._numeric import EXP_UNDERFLOW

BACKEND_ENV = "SUPOU_KERNEL_BACKEND"
BACKENDS = ("numba", "numpy")

try:  # pragma: no cover - exercised implicitly
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def active_backend() -> str:
    name = os.environ.get(BACKEND_ENV, "numba").strip().lower() or "numba"
    if name not in BACKENDS:
        raise ValueError(f"{BACKEND_ENV} must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


def _evaluate_numpy(xi, tau, zeta, times, block=4096):
    g = times.size
    total = np.zeros(g)
    xm = np.zeros(g)
    xp1 = np.zeros(g)
    xp2 = np.zeros(g)
    past = tau <= 0.0
    keep = past & (xi * -tau <= EXP_UNDERFLOW)
    xi_p, tau_p, z_p = xi[keep], tau[keep], zeta[keep]
    for lo in range(0, xi_p.size, block):
        x = xi_p[lo : lo + block]
        c = z_p[lo : lo + block] / x * np.exp(x * tau_p[lo : lo + block])
        contrib = -np.expm1(-np.outer(times, x)) @ c
        xm += contrib
    total += xm
    fut = ~past
    xi_f, tau_f, z_f = xi[fut], tau[fut], zeta[fut]
    for lo in range(0, xi_f.size, block):
        x = xi_f[lo : lo + block]
        tt = tau_f[lo : lo + block]
        c = z_f[lo : lo + block] / x
        d = x[None, :] * (times[:, None] - tt[None, :])
        active = d >= 0.0
        dd = np.where(active, d, 0.0)
        xp1 += (active * c).sum(axis=1)
        e = np.where(active & (dd <= EXP_UNDERFLOW), np.exp(-np.minimum(dd, EXP_UNDERFLOW)), 0.0)
        xp2 += (e * c).sum(axis=1)
        total += (np.where(active, -np.expm1(-dd), 0.0) * c).sum(axis=1)
    return total, xm, xp1, xp2


if HAVE_NUMBA:

    @numba.njit(nogil=True, cache=True)
    def _evaluate_numba(xi, tau, zeta, times):  # pragma: no cover - compiled
        g = times.size
        total = np.zeros(g)
        xm = np.zeros(g)
        xp1 = np.zeros(g)
        xp2 = np.zeros(g)
        for k in range(xi.size):
            x = xi[k]
            s = tau[k]
            c = zeta[k] / x
            if s <= 0.0:
                if -x * s > EXP_UNDERFLOW:
                    continue
                c = c * np.exp(x * s)
                for j in range(g):
                    v = -c * np.expm1(-x * times[j])
                    xm[j] += v
                    total[j] += v
            else:
                j0 = np.searchsorted(times, s)
                for j in range(j0, g):
                    d = x * (times[j] - s)
                    xp1[j] += c
                    if d <= EXP_UNDERFLOW:
                        xp2[j] += c * np.exp(-d)
                        total[j] += -c * np.expm1(-d)
                    else:
                        total[j] += c
        return total, xm, xp1, xp2


def evaluate_points(xi, tau, zeta, times, backend: str | None = None):
    """Return (total, x_minus, x_plus1, x_plus2) arrays over the grid ``times``.

    ``times`` must be sorted increasingly.
    """
    xi = np.ascontiguousarray(xi, dtype=np.float64)
    tau = np.ascontiguousarray(tau, dtype=np.float64)
    zeta = np.ascontiguousarray(zeta, dtype=np.float64)
    times = np.ascontiguousarray(times, dtype=np.float64)
    backend = backend or active_backend()
    if backend == "numba" and HAVE_NUMBA:
        return _evaluate_numba(xi, tau, zeta, times)
    return _evaluate_numpy(xi, tau, zeta, times)


def kernel_values(xi, tau, t: float) -> np.ndarray:
    """f_t(xi, tau) for arrays of points at one time ``t``."""
    xi = np.asarray(xi, dtype=float)
    tau = np.asarray(tau, dtype=float)
    past = tau <= 0.0
    arg_past = np.where(past, xi * tau, 0.0)
    d = np.where(past | (tau > t), 0.0, xi * (t - tau))
    v_past = -np.expm1(-xi * t) * np.exp(arg_past) / xi
    v_fut = -np.expm1(-d) / xi
    return np.where(past, v_past, np.where(tau <= t, v_fut, 0.0))
