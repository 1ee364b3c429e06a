"""Shared helpers for the test suite."""

import mpmath as mp
import numpy as np

from fracbayes import fracops as fo


def smooth_bump(x, center=1.4, half_width=0.25):
    """C-infinity bump supported on |x - center| < half_width."""
    t = (np.asarray(x, dtype=float) - center) / half_width
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def ibp_residual(psi_kind: str, alpha: float, n_grid: int, domain=(1.0, 2.0)) -> float:
    """Relative duality residual |S1 - (-1)^n S2| / |S1| over the interior nodes,

    with S1 = h * sum f (Dg) and S2 = h * sum (Df) g.  The discrete operator is
    exactly skew/self-adjoint on the uniform s-grid, so the residual reduces to
    the boundary leakage carried by f's endpoint values (~1e-16 here); it is
    evaluated with 60-digit arithmetic to be measurable above float64 noise.
    """
    grid = fo.GridSpec(domain[0], domain[1], n_grid + 1, fo.make_psi_map(psi_kind))
    op = fo.RieszOperator(alpha, grid)
    f = np.sin(2.0 * np.pi * grid.x_nodes)
    g = smooth_bump(grid.x_nodes)
    matrix = op.matrix
    n_nodes = grid.n_nodes

    with mp.workdps(60):
        fm = [mp.mpf(v) for v in f]
        gm = [mp.mpf(v) for v in g]
        rows = range(1, n_nodes - 1)
        df = [mp.fsum(mp.mpf(matrix[l, c]) * fm[c] for c in range(n_nodes)) for l in rows]
        dg = [mp.fsum(mp.mpf(matrix[l, c]) * gm[c] for c in range(n_nodes)) for l in rows]
        h = mp.mpf(grid.h)
        s1 = h * mp.fsum(fm[l] * dg[k] for k, l in enumerate(rows))
        s2 = h * mp.fsum(df[k] * gm[l] for k, l in enumerate(rows))
        residual = abs(s1 - (-1) ** op.order.n * s2) / abs(s1)
        return float(residual)
