"""Characteristic exponents as composable evaluation trees.

A CharExponent wraps a node that can evaluate the exponent on a grid of
arguments. Nodes cover triplet-backed laws, registered closed forms,
rescaling (convolution powers), sums (convolution), integral transforms,
and raw callables. Keeping the structure symbolic lets transforms nest
without committing to a measure representation at every level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from .errors import DimensionMismatchError, LawSpecError
from .triplet import LevyTriplet


def as_grid(y, dim: int) -> tuple[np.ndarray, bool]:
    """Normalize one point or a grid to shape (n, dim); flag scalar input."""
    arr = np.asarray(y, dtype=float)
    if arr.ndim == 0:
        if dim != 1:
            raise DimensionMismatchError(f"scalar argument for a dim-{dim} law")
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if dim == 1 and arr.shape[0] != 1:
            # a 1-d batch of scalar arguments
            return arr[:, None], False
        if arr.shape[0] != dim:
            raise DimensionMismatchError(
                f"argument length {arr.shape[0]} does not match dim {dim}"
            )
        return arr[None, :], True
    if arr.ndim == 2:
        if arr.shape[1] != dim:
            raise DimensionMismatchError(
                f"grid shape {arr.shape} does not match dim {dim}"
            )
        return arr, False
    raise DimensionMismatchError(f"argument must be at most 2-d, got shape {arr.shape}")


class _Node:
    def eval(self, Y: np.ndarray, tol: float | None) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class _TripletNode(_Node):
    triplet: LevyTriplet

    def eval(self, Y, tol):
        return self.triplet.exponent_grid(Y, tol)


@dataclass(frozen=True, eq=False)
class _ClosedFormNode(_Node):
    name: str
    params: Mapping[str, Any]
    fn: Callable[[np.ndarray], np.ndarray]

    def eval(self, Y, tol):
        return np.asarray(self.fn(Y), dtype=complex)


@dataclass(frozen=True, eq=False)
class _ScaleNode(_Node):
    factor: float
    inner: _Node

    def eval(self, Y, tol):
        return self.factor * self.inner.eval(Y, tol)


@dataclass(frozen=True, eq=False)
class _SumNode(_Node):
    parts: tuple[_Node, ...]

    def eval(self, Y, tol):
        out = np.zeros(Y.shape[0], dtype=complex)
        for part in self.parts:
            out = out + part.eval(Y, tol)
        return out


@dataclass(frozen=True, eq=False)
class _MappedNode(_Node):
    map: Any  # IntegralMap; typed loosely to avoid an import cycle
    inner: "CharExponent"

    def eval(self, Y, tol):
        from . import maps

        return maps.map_exponent_grid(self.map, self.inner, Y, tol)


@dataclass(frozen=True, eq=False)
class _CallbackNode(_Node):
    fn: Callable[[np.ndarray, float | None], np.ndarray]
    label: str

    def eval(self, Y, tol):
        return np.asarray(self.fn(Y, tol), dtype=complex)


@dataclass(frozen=True, eq=False)
class CharExponent:
    """Characteristic exponent of an infinitely divisible law on R^dim."""

    dim: int
    node: _Node

    def eval_grid(self, Y: np.ndarray, tol: float | None = None) -> np.ndarray:
        """Evaluate on a grid of shape (n, dim); returns (n,) complex."""
        Y = np.asarray(Y, dtype=float)
        if Y.ndim != 2 or Y.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"grid shape {Y.shape} does not match dim {self.dim}"
            )
        return np.asarray(self.node.eval(Y, tol), dtype=complex)

    def __call__(self, y, tol: float | None = None):
        """Evaluate at one point (complex) or a batch (complex array)."""
        Y, single = as_grid(y, self.dim)
        vals = self.eval_grid(Y, tol)
        return complex(vals[0]) if single else vals

    def cf(self, y, tol: float | None = None):
        """Characteristic function exp(exponent)."""
        return np.exp(self.__call__(y, tol))


def from_triplet(triplet: LevyTriplet) -> CharExponent:
    return CharExponent(triplet.dim, _TripletNode(triplet))


def from_callable(fn, dim: int, label: str = "custom") -> CharExponent:
    """Wrap fn(Y, tol) -> (n,) complex as an exponent node."""
    return CharExponent(dim, _CallbackNode(fn, label))


def convolve(*exponents: CharExponent) -> CharExponent:
    """Exponent of the independent sum: pointwise sum of exponents."""
    if not exponents:
        raise ValueError("convolve needs at least one exponent")
    dim = exponents[0].dim
    for e in exponents:
        if e.dim != dim:
            raise DimensionMismatchError(
                f"cannot convolve laws of dims {dim} and {e.dim}"
            )
    if len(exponents) == 1:
        return exponents[0]
    return CharExponent(dim, _SumNode(tuple(e.node for e in exponents)))


def conv_power(exponent: CharExponent, c: float) -> CharExponent:
    """Exponent of the c-th convolution power (c times the exponent), c > 0."""
    c = float(c)
    if not c > 0.0:
        raise ValueError(f"convolution power must be positive, got {c}")
    return CharExponent(exponent.dim, _ScaleNode(c, exponent.node))


def iter_triplets(exponent: CharExponent):
    """Yield every triplet leaf reachable from this exponent's tree."""

    def walk(node: _Node):
        if isinstance(node, _TripletNode):
            yield node.triplet
        elif isinstance(node, _ScaleNode):
            yield from walk(node.inner)
        elif isinstance(node, _SumNode):
            for part in node.parts:
                yield from walk(part)
        elif isinstance(node, _MappedNode):
            yield from walk(node.inner.node)

    yield from walk(exponent.node)


# -- numerically stable scalar kernels used by closed forms ------------------


def xcothx(x: np.ndarray) -> np.ndarray:
    """x * coth(x), even, stable at 0 (limit 1) and for large |x|."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    small = ax < 1e-4
    x2 = x * x
    series = 1.0 + x2 / 3.0 - x2 * x2 / 45.0
    safe = np.where(small, 1.0, ax)
    direct = safe / np.tanh(safe)
    return np.where(small, series, direct)


def log_sinhc(x: np.ndarray) -> np.ndarray:
    """log(sinh(x) / x), even, stable at 0 and safe from overflow."""
    x = np.abs(np.asarray(x, dtype=float))
    x2 = x * x
    small = x < 1e-4
    large = x > 300.0
    mid_safe = np.where(small | large, 1.0, x)
    out = np.log(np.sinh(mid_safe) / mid_safe)
    out = np.where(small, x2 / 6.0 - x2 * x2 / 180.0, out)
    large_safe = np.where(large, x, 1.0)
    out = np.where(large, large_safe - np.log(2.0 * large_safe), out)
    return out


# -- closed-form registry -----------------------------------------------------


class ClosedFormRegistry:
    """Name -> builder map for exponents with analytic formulas.

    A builder takes keyword params and returns (dim, eval_fn, params) where
    eval_fn maps an (n, dim) grid to (n,) complex exponent values.
    """

    def __init__(self):
        self._builders: dict[str, Callable] = {}

    def register(self, name: str, builder: Callable) -> None:
        if name in self._builders:
            raise ValueError(f"closed form {name!r} already registered")
        self._builders[name] = builder

    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self._builders))

    def build(self, name: str, **params) -> CharExponent:
        if name not in self._builders:
            raise LawSpecError(
                f"unknown closed form {name!r}; available: {', '.join(self.names())}"
            )
        dim, fn, canon = self._builders[name](**params)
        return CharExponent(dim, _ClosedFormNode(name, canon, fn))


registry = ClosedFormRegistry()


def closed_form(name: str, **params) -> CharExponent:
    """Look up a registered closed-form exponent."""
    return registry.build(name, **params)


def _build_gaussian(mean=0.0, cov=1.0):
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    dim = mean.shape[0]
    cov = np.asarray(cov, dtype=float)
    if cov.ndim == 0:
        cov = cov * np.eye(dim)
    if cov.shape != (dim, dim):
        raise LawSpecError(f"gaussian cov shape {cov.shape} does not match dim {dim}")

    def fn(Y):
        return 1j * (Y @ mean) - 0.5 * np.einsum("ij,jk,ik->i", Y, cov, Y)

    return dim, fn, {"mean": mean.tolist(), "cov": cov.tolist()}


def _build_dirac(shift):
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    dim = shift.shape[0]

    def fn(Y):
        return 1j * (Y @ shift)

    return dim, fn, {"shift": shift.tolist()}


def _build_compound_poisson(rate, jumps, probs=None):
    rate = float(rate)
    if rate < 0.0:
        raise LawSpecError(f"compound_poisson rate must be >= 0, got {rate}")
    jumps = np.asarray(jumps, dtype=float)
    if jumps.ndim == 1:
        jumps = jumps[:, None]
    if jumps.ndim != 2 or jumps.shape[0] == 0:
        raise LawSpecError("compound_poisson needs a nonempty jump list")
    m, dim = jumps.shape
    if probs is None:
        probs = np.full(m, 1.0 / m)
    else:
        probs = np.asarray(probs, dtype=float)
    if probs.shape != (m,) or np.any(probs < 0.0):
        raise LawSpecError("compound_poisson probs must be nonnegative, one per jump")
    if abs(probs.sum() - 1.0) > 1e-12:
        raise LawSpecError(f"compound_poisson probs sum to {probs.sum()!r}, not 1")

    def fn(Y):
        theta = Y @ jumps.T
        # real cos/sin beat complex exp on the large stacked batches the
        # nested transforms generate
        re = (np.cos(theta) - 1.0) @ probs
        im = np.sin(theta) @ probs
        return rate * (re + 1j * im)

    return dim, fn, {"rate": rate, "jumps": jumps.tolist(), "probs": probs.tolist()}


def _build_levy_area_bdlp(u):
    """Background driving law of the stochastic-area stationary law.

    Exponent 1 - t*u*coth(t*u) at argument t, for area parameter u > 0.
    """
    u = float(u)
    if u <= 0.0:
        raise LawSpecError(f"levy_area_bdlp needs u > 0, got {u}")

    def fn(Y):
        t = Y[:, 0]
        return (1.0 - xcothx(t * u)).astype(complex)

    return 1, fn, {"u": u}


registry.register("gaussian", _build_gaussian)
registry.register("dirac", _build_dirac)
registry.register("compound_poisson", _build_compound_poisson)
registry.register("levy_area_bdlp", _build_levy_area_bdlp)
