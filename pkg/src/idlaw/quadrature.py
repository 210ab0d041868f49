"""Adaptive Simpson quadrature for complex, vector-valued integrands.

The integrators in this package evaluate characteristic exponents on whole
grids of arguments at once, so the integrand maps abscissas to complex
vectors and the refinement decision uses the max norm across components.
Refinement is breadth first: every active panel at a given depth is
evaluated in one integrand call. Nested transforms stay affordable because
an outer integration hands its inner integration one large stacked batch
per level instead of one call per node.
"""

from __future__ import annotations

import math
import os
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError

DEFAULT_TOL = 1e-10
DEFAULT_MAX_DEPTH = 40
TOL_ENV_VAR = "IDLAW_QUAD_TOL"


def default_tol() -> float:
    """Return the default tolerance, honouring the IDLAW_QUAD_TOL override."""
    raw = os.environ.get(TOL_ENV_VAR)
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError as exc:
        raise ValueError(f"{TOL_ENV_VAR} must be a float, got {raw!r}") from exc
    if not tol > 0.0:
        raise ValueError(f"{TOL_ENV_VAR} must be positive, got {tol}")
    return tol


def integrate(
    f: Callable,
    a: float,
    b: float,
    tol: float | None = None,
    max_depth: int = DEFAULT_MAX_DEPTH,
    splits: Sequence[float] = (),
    vectorized: bool = False,
) -> tuple[np.ndarray, float]:
    """Integrate ``f`` over [a, b] with adaptive Simpson refinement.

    Parameters
    ----------
    f : callable
        With ``vectorized=False``, maps a float to a complex scalar or 1-d
        complex array. With ``vectorized=True``, maps a float array of
        shape (m,) to shape (m,) or (m, n); rows must be independent. The
        output shape per abscissa must be constant over the interval.
    a, b : float
        Integration limits, ``a <= b``.
    tol : float, optional
        Absolute max-norm tolerance for the whole interval. Defaults to
        :func:`default_tol`.
    max_depth : int
        Maximum number of interval halvings before a panel is abandoned.
    splits : sequence of float, optional
        Interior break points (e.g. kinks of the integrand). The interval
        is cut there before refinement starts.

    Returns
    -------
    (value, error_estimate)
        ``value`` has the integrand's per-abscissa shape; scalar in,
        scalar out. ``error_estimate`` is the accumulated max-norm
        Richardson estimate.

    Raises
    ------
    QuadratureError
        If some panel hits ``max_depth`` while still above tolerance. The
        exception carries the best value and the achieved error estimate.
    """
    if tol is None:
        tol = default_tol()
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"limits must be finite, got [{a}, {b}]")
    if b < a:
        raise ValueError(f"reversed limits: [{a}, {b}]")

    if vectorized:
        fbatch = lambda xs: np.asarray(f(xs), dtype=complex)
    else:
        fbatch = lambda xs: np.asarray([f(float(x)) for x in xs], dtype=complex)

    probe = fbatch(np.array([a]))
    if probe.ndim not in (1, 2) or probe.shape[0] != 1:
        raise ValueError(
            f"integrand returned shape {probe.shape} for a single abscissa"
        )
    scalar_out = probe.ndim == 1
    ncomp = 1 if scalar_out else probe.shape[1]

    def fv(xs: np.ndarray) -> np.ndarray:
        out = fbatch(xs)
        want = (len(xs),) if scalar_out else (len(xs), ncomp)
        if out.shape != want:
            raise ValueError(
                f"integrand changed output shape: {out.shape} != {want}"
            )
        return out.reshape(len(xs), ncomp)

    if a == b:
        zero = np.zeros(ncomp, dtype=complex)
        return (zero[0] if scalar_out else zero), 0.0

    points = [a]
    for s in sorted(float(s) for s in splits):
        if a < s < b and s != points[-1]:
            points.append(s)
    points.append(b)
    npieces = len(points) - 1
    ltol = tol / npieces

    xl = np.asarray(points[:-1], dtype=float)
    xr = np.asarray(points[1:], dtype=float)
    xm = 0.5 * (xl + xr)
    vals = fv(np.concatenate([xl, xm, np.array([b])]))
    fl = vals[:npieces]
    fm = vals[npieces : 2 * npieces]
    fr = np.concatenate([fl[1:], vals[2 * npieces :]])
    h6 = ((xr - xl) / 6.0)[:, None]
    s_old = h6 * (fl + 4.0 * fm + fr)

    total = np.zeros(ncomp, dtype=complex)
    err_total = 0.0
    unconverged = 0.0
    depth = 0

    while xl.size:
        xlm = 0.5 * (xl + xm)
        xrm = 0.5 * (xm + xr)
        k = xl.size
        new = fv(np.concatenate([xlm, xrm]))
        flm, frm = new[:k], new[k:]
        h12 = ((xr - xl) / 12.0)[:, None]
        s_left = h12 * (fl + 4.0 * flm + fm)
        s_right = h12 * (fm + 4.0 * frm + fr)
        s_new = s_left + s_right
        delta = s_new - s_old
        err = np.abs(delta).max(axis=1) / 15.0
        floor = 2e-16 * (1.0 + np.abs(s_new).max(axis=1))
        done = (err <= np.maximum(ltol, floor)) | (xlm <= xl) | (xrm >= xr)
        if depth >= max_depth:
            unconverged += float(err[~done].sum())
            done = np.ones_like(done)
        total += (s_new[done] + delta[done] / 15.0).sum(axis=0)
        err_total += float(err[done].sum())
        keep = ~done
        xl = np.concatenate([xl[keep], xm[keep]])
        xr = np.concatenate([xm[keep], xr[keep]])
        fl = np.concatenate([fl[keep], fm[keep]])
        fr = np.concatenate([fm[keep], fr[keep]])
        fm = np.concatenate([flm[keep], frm[keep]])
        xm = 0.5 * (xl + xr)
        s_old = np.concatenate([s_left[keep], s_right[keep]])
        ltol *= 0.5
        depth += 1

    if unconverged > tol:
        value = total[0] if scalar_out else total
        raise QuadratureError(
            f"adaptive Simpson did not converge on [{a}, {b}]: "
            f"achieved error {err_total:.3e} > tol {tol:.3e} "
            f"({unconverged:.3e} from panels at max depth {max_depth})",
            value=value,
            error_estimate=err_total,
        )
    return (total[0] if scalar_out else total), err_total
