"""Seeded random generation of parameters, markings, and cusps for the
verification battery, the CLI demos, and the test suite."""

import numpy as np

from .cusp_groups import BlownUpWeylPoint, build_marked_cusp

__all__ = ["random_blownup_point", "random_marking", "random_cusp"]


def random_blownup_point(rng, n, t=None, lam_range=(0.3, 2.5)):
    """A valid blown-up parameter of the requested type (uniform over types
    when t is None); kappa entries attached to zero lambda slots are free."""
    if t is None:
        t = int(rng.integers(0, n + 1))
    if not 0 <= t <= n:
        raise ValueError("type must be in [0, n]")
    lo, hi = lam_range
    if t == n:
        lam0 = rng.uniform(lo, hi / 2)
        lam = np.sort(np.concatenate([[lam0], lam0 + rng.uniform(0, hi, n - 1)]))
        kap = lam[0] / lam[1:]
        return BlownUpWeylPoint(n, lam, kap)
    lam = np.zeros(n)
    if t > 0:
        lam[n - t:] = np.sort(rng.uniform(lo, hi, t))
    kap = np.zeros(n - 1)
    u = n - 1 - t
    kap[:u] = rng.uniform(0.0, 1.0, u)
    return BlownUpWeylPoint(n, lam, kap)


def random_marking(rng, dim, cond_max=40.0):
    """Random matrix with |det| = 1 and bounded condition number."""
    for _ in range(64):
        m = rng.standard_normal((dim, dim))
        det = abs(np.linalg.det(m))
        if det < 1e-6:
            continue
        m = m / det ** (1.0 / dim)
        if np.linalg.cond(m) <= cond_max:
            return m
    raise RuntimeError("could not draw a well-conditioned marking")


def random_cusp(rng, n, t=None, orthonormalized=None, identity_marking=False):
    p = random_blownup_point(rng, n, t)
    if orthonormalized is None:
        orthonormalized = bool(rng.integers(0, 2))
    marking = None if identity_marking else random_marking(rng, n - 1)
    return build_marked_cusp(p, marking, orthonormalized=orthonormalized)
