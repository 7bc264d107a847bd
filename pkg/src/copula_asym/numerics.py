"""Quadrature, supremum search, special functions and the RNG contract.

Everything else in the package reduces to three numerical primitives:

* ``integrate2d`` -- adaptive tensor-product Gauss/Kronrod quadrature over the
  unit square or one of two triangles, with global error control.
* ``sup_on_square`` -- a coarse lattice scan followed by Lipschitz-pruned
  cell refinement, used for every sup-norm quantity.
* ``incomplete_beta`` -- the non-regularized incomplete beta function.

The fields we integrate are piecewise polynomial or rational with kinks along
lines and parabolas.  Adaptive subdivision concentrates cells along the kinks
without meshing them explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]

REGIONS = ("square", "triangle", "simplex")


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance.

    Attributes
    ----------
    estimate : float
        Best available value of the integral.
    residual : float
        Estimated absolute error of ``estimate``.
    """

    def __init__(self, message: str, estimate: float, residual: float):
        super().__init__(f"{message} (estimate={estimate!r}, residual={residual!r})")
        self.estimate = estimate
        self.residual = residual


@dataclass(frozen=True)
class Tolerance:
    """Accuracy request shared by quadrature and supremum search.

    For ``integrate2d`` the tolerances bound the integral's error.  For
    ``sup_on_square`` ``abs_tol`` is the spatial resolution of the final
    refinement cells.
    """

    abs_tol: float = 1e-9
    rel_tol: float = 0.0
    max_refinements: int = 60

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be nonnegative")
        if not (self.abs_tol > 0 or self.rel_tol > 0):
            raise ValueError("abs_tol or rel_tol must be positive")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be >= 1")


INTEGRAL_TOL = Tolerance(1e-9, 0.0, 60)
SUP_TOL = Tolerance(1e-7, 0.0, 64)


@dataclass(frozen=True)
class SupResult:
    value: float
    argmax: tuple[float, float]
    cell_size: float

    def __post_init__(self):
        x, y = self.argmax
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise ValueError("argmax must lie in the unit square")
        if not (0.0 < self.cell_size <= 1.0):
            raise ValueError("cell_size must be in (0, 1]")


# ---------------------------------------------------------------------------
# Quadrature rule: 3-point Gauss with its 7-point Kronrod extension, on [0, 1].
# ---------------------------------------------------------------------------

_K7_NODES = np.array([
    -0.960491268708020283423507092629080,
    -0.774596669241483377035853079956480,
    -0.434243749346802558002071502844628,
    0.0,
    0.434243749346802558002071502844628,
    0.774596669241483377035853079956480,
    0.960491268708020283423507092629080,
])
_K7_WEIGHTS = np.array([
    0.104656226026467265193823857192073,
    0.268488089868333440728569280666710,
    0.401397414775962222905051818618432,
    0.450916538658474142345110087045571,
    0.401397414775962222905051818618432,
    0.268488089868333440728569280666710,
    0.104656226026467265193823857192073,
])
# Gauss-3 lives on Kronrod nodes 1, 3, 5.
_G3_WEIGHTS = np.array([0.0, 5.0 / 9.0, 0.0, 8.0 / 9.0, 0.0, 5.0 / 9.0, 0.0])

_NODES01 = 0.5 * (_K7_NODES + 1.0)
_WK = np.outer(_K7_WEIGHTS, _K7_WEIGHTS).ravel() / 4.0
_WG = np.outer(_G3_WEIGHTS, _G3_WEIGHTS).ravel() / 4.0
_NU = np.repeat(_NODES01, 7)
_NV = np.tile(_NODES01, 7)


def _mapped_integrand(f: Field, region: str, p: float) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Pull the integrand back to (u, v) in the unit square."""
    if region not in REGIONS:
        raise ValueError(f"region must be one of {REGIONS}, got {region!r}")

    def power(vals):
        vals = np.asarray(vals, dtype=float)
        return vals if p == 1.0 else np.abs(vals) ** p

    if region == "square":
        return lambda u, v: power(f(u, v))
    if region == "triangle":
        # {x <= y}: x = u v, y = v, Jacobian v.
        return lambda u, v: power(f(u * v, v)) * v
    # {x + z <= 1}: x = u, z = (1 - u) v, Jacobian 1 - u.
    return lambda u, v: power(f(u, (1.0 - u) * v)) * (1.0 - u)


def _k7g3(g, x0, y0, h):
    u = x0[:, None] + h[:, None] * _NU[None, :]
    v = y0[:, None] + h[:, None] * _NV[None, :]
    vals = np.asarray(g(u, v), dtype=float).reshape(u.shape)
    area = h * h
    return area * (vals @ _WK), area * (vals @ _WG)


def _apply_rule(g, x0, y0, h):
    """Value and error estimate for each cell.

    The value is the Kronrod rule summed over the four quarter cells.  The
    error is the larger of the summed Gauss/Kronrod discrepancy and the gap
    between the parent-cell and quarter-cell Kronrod values.  The second
    term matters on cells cut by a kink curve, where the Gauss and Kronrod
    errors are of the same size and their difference can be tiny.
    """
    m = x0.size
    k, _ = _k7g3(g, x0, y0, h)
    hs = h / 2.0
    cx = np.concatenate([x0, x0 + hs, x0, x0 + hs])
    cy = np.concatenate([y0, y0, y0 + hs, y0 + hs])
    kc, gc = _k7g3(g, cx, cy, np.concatenate([hs, hs, hs, hs]))
    kc = kc.reshape(4, m)
    embedded = np.abs(kc - gc.reshape(4, m)).sum(axis=0)
    fine = kc.sum(axis=0)
    return fine, np.maximum(embedded, np.abs(fine - k))


def integrate2d(f: Field, region: str = "square", p: float = 1.0,
                tol: Tolerance = INTEGRAL_TOL) -> float:
    """Integrate ``f**p`` over a region of the unit square.

    Parameters
    ----------
    f : callable
        Vectorized field ``f(x, y)``.  For ``p == 1`` the signed integral is
        returned; for ``p > 1`` the integrand is ``|f|**p``.
    region : {"square", "triangle", "simplex"}
        ``"triangle"`` is ``{x <= y}`` and ``"simplex"`` is
        ``{x + y <= 1}``.  Triangles are collapsed onto the square with the
        Duffy map.
    p : float
        Exponent, ``p >= 1``.
    tol : Tolerance
        The loop stops once the summed error estimate is below
        ``max(abs_tol, rel_tol * |I|)``.

    Raises
    ------
    QuadratureError
        After ``tol.max_refinements`` subdivision sweeps without convergence.
    """
    if not p >= 1.0:
        raise ValueError("p must be >= 1")
    g = _mapped_integrand(f, region, float(p))

    # Leaves are squares (x0, y0, h).  Each sweep splits the leaves that
    # carry the bulk of the error, in a fixed order, so results are
    # reproducible bit for bit.
    x0 = np.zeros(1)
    y0 = np.zeros(1)
    h = np.ones(1)
    val, err = _apply_rule(g, x0, y0, h)
    done_val = 0.0
    done_err = 0.0
    for _ in range(tol.max_refinements):
        total = done_val + math.fsum(val)
        total_err = done_err + math.fsum(err)
        target = max(tol.abs_tol, tol.rel_tol * abs(total))
        if total_err <= target:
            return total
        # Cells whose error is negligible even if every leaf had it are frozen.
        budget = 0.01 * target / max(val.size, 1)
        freeze = err <= budget
        if freeze.any():
            done_val += math.fsum(val[freeze])
            done_err += math.fsum(err[freeze])
            keep = ~freeze
            x0, y0, h, val, err = x0[keep], y0[keep], h[keep], val[keep], err[keep]
        order = np.argsort(-err, kind="stable")
        csum = np.cumsum(err[order])
        excess = total_err - 0.5 * target
        n_split = int(np.searchsorted(csum, 0.5 * excess)) + 1
        n_split = min(max(n_split, 1), err.size)
        split = np.zeros(err.size, dtype=bool)
        split[order[:n_split]] = True
        hs = h[split] / 2.0
        xs, ys = x0[split], y0[split]
        cx = np.concatenate([xs, xs + hs, xs, xs + hs])
        cy = np.concatenate([ys, ys, ys + hs, ys + hs])
        ch = np.concatenate([hs, hs, hs, hs])
        cval, cerr = _apply_rule(g, cx, cy, ch)
        keep = ~split
        x0 = np.concatenate([x0[keep], cx])
        y0 = np.concatenate([y0[keep], cy])
        h = np.concatenate([h[keep], ch])
        val = np.concatenate([val[keep], cval])
        err = np.concatenate([err[keep], cerr])
    total = done_val + math.fsum(val)
    total_err = done_err + math.fsum(err)
    if total_err <= max(tol.abs_tol, tol.rel_tol * abs(total)):
        return total
    raise QuadratureError("integrate2d did not converge", total, total_err)


def integrate2d_with_error(f: Field, region: str = "square", p: float = 1.0,
                           tol: Tolerance = INTEGRAL_TOL) -> tuple[float, float]:
    """Like ``integrate2d`` but also return the error bound that was met."""
    value = integrate2d(f, region, p, tol)
    return value, max(tol.abs_tol, tol.rel_tol * abs(value))


# ---------------------------------------------------------------------------
# Supremum search
# ---------------------------------------------------------------------------

def sup_on_square(f: Field, tol: Tolerance = SUP_TOL, *, grid: int = 257,
                  top_k: int = 16, lipschitz: float = 2.0,
                  max_cells: int = 16384) -> SupResult:
    """Maximize a bounded field over the unit square.

    A ``grid x grid`` lattice is scanned first.  The lattice cells are then
    refined by quadrisection.  A cell survives a sweep when its best corner
    value plus ``lipschitz * side`` can still beat the incumbent, which is a
    rigorous bound whenever ``f`` is ``lipschitz``-Lipschitz in the L1 norm
    (copula differences are 2-Lipschitz).  At least ``top_k`` and at most
    ``max_cells`` cells, ranked by corner value, are kept per sweep.
    Refinement stops when the cell side is at most ``tol.abs_tol``.

    The returned value is the maximum over every evaluated sample, so it is
    never below the coarse-lattice maximum.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    t = np.linspace(0.0, 1.0, grid)
    gx, gy = np.meshgrid(t, t, indexing="ij")
    z = np.asarray(f(gx, gy), dtype=float).reshape(gx.shape)
    flat = int(np.argmax(z))
    best = float(z.flat[flat])
    best_pt = (float(gx.flat[flat]), float(gy.flat[flat]))

    side = 1.0 / (grid - 1)
    c00 = z[:-1, :-1].ravel()
    c10 = z[1:, :-1].ravel()
    c01 = z[:-1, 1:].ravel()
    c11 = z[1:, 1:].ravel()
    x0 = gx[:-1, :-1].ravel()
    y0 = gy[:-1, :-1].ravel()

    def select(x0, y0, c00, c10, c01, c11, side, best):
        score = np.maximum(np.maximum(c00, c10), np.maximum(c01, c11))
        order = np.argsort(-score, kind="stable")
        alive = score[order] + lipschitz * side >= best
        n_keep = int(alive.sum())
        n_keep = min(max(n_keep, min(top_k, score.size)), max_cells)
        idx = order[:n_keep]
        return x0[idx], y0[idx], c00[idx], c10[idx], c01[idx], c11[idx]

    x0, y0, c00, c10, c01, c11 = select(x0, y0, c00, c10, c01, c11, side, best)
    for _ in range(tol.max_refinements):
        if side <= tol.abs_tol:
            break
        half = side / 2.0
        xm, ym = x0 + half, y0 + half
        x1, y1 = x0 + side, y0 + side
        px = np.concatenate([xm, x0, xm, x1, xm])
        py = np.concatenate([y0, ym, ym, ym, y1])
        vals = np.asarray(f(px, py), dtype=float).reshape(px.shape)
        m = x0.size
        b_, l_, c_, r_, t_ = (vals[i * m:(i + 1) * m] for i in range(5))
        i = int(np.argmax(vals))
        if vals[i] > best:
            best = float(vals[i])
            best_pt = (float(px[i]), float(py[i]))
        # Children in order: lower-left, lower-right, upper-left, upper-right.
        nx0 = np.concatenate([x0, xm, x0, xm])
        ny0 = np.concatenate([y0, y0, ym, ym])
        n00 = np.concatenate([c00, b_, l_, c_])
        n10 = np.concatenate([b_, c10, c_, r_])
        n01 = np.concatenate([l_, c_, c01, t_])
        n11 = np.concatenate([c_, r_, t_, c11])
        side = half
        x0, y0, c00, c10, c01, c11 = select(nx0, ny0, n00, n10, n01, n11, side, best)
    return SupResult(best, best_pt, side)


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------

def incomplete_beta(z: float, alpha: float, beta: float) -> float:
    """Non-regularized incomplete beta ``B(z; alpha, beta)``.

    ``int_0^z t**(alpha-1) (1-t)**(beta-1) dt``, computed as the regularized
    function from ``scipy.special.betainc`` times the complete beta.
    """
    if not (0.0 <= z <= 1.0):
        raise ValueError(f"z must be in [0, 1], got {z!r}")
    if not (alpha > 0 and beta > 0):
        raise ValueError("alpha and beta must be positive")
    if z == 0.0:
        return 0.0
    return float(special.betainc(alpha, beta, z) * special.beta(alpha, beta))


def complete_beta(alpha: float, beta: float) -> float:
    return incomplete_beta(1.0, alpha, beta)


# ---------------------------------------------------------------------------
# Random numbers
# ---------------------------------------------------------------------------

def rng_stream(seed: int) -> np.random.Generator:
    """Deterministic uniform stream: NumPy's PCG64 seeded directly.

    PCG64 output is specified bit-for-bit, so a given seed yields the same
    variates on every platform.  Independent sub-streams should come from
    ``np.random.PCG64(seed).jumped(k)``.
    """
    if not (0 <= int(seed) < 2 ** 64):
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.Generator(np.random.PCG64(int(seed)))
