"""Exact Monte Carlo for the random integrals of finite-activity laws.

The driving process is drift + Brownian part + compound Poisson jumps, so
both integrals sample without discretization error:

* the power-kernel integral over (0,1): deterministic part gamma*beta/(beta+1),
  Gaussian part with covariance Sigma*beta/(beta+2), and jumps tau**(1/beta)*J
  at uniform times tau with a Poisson count;
* the killed integral of exp(-s) against the time-changed process: jumps
  thinned from a rate-lambda envelope by the clock rate 1 - exp(-beta*s),
  Gaussian and drift parts with closed-form coefficients on [0, s_max].

Randomness is counter based: sample k of a run draws from a Philox stream
keyed by (seed, k), so chunked or parallel execution reproduces the exact
byte stream of a serial run.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import maps, quadrature
from .errors import LawSpecError
from .exponent import CharExponent, as_grid, closed_form, convolve

_PROB_TOL = 1e-12
_PSD_TOL = 1e-10
_TAIL_BOUND = 1e-6
# envelope segments for the thinned jump times live on an absolute grid of
# this pitch, so a larger horizon only appends segments
_SEG_LEN = 10.0

# stream tags: fourth Philox counter word, so the per-purpose streams of one
# (seed, sample) pair never overlap
TAG_JBETA = 1
TAG_TIMECHANGE = 2
TAG_TIMECHANGE_ALT = 3


@dataclass(frozen=True, eq=False)
class SimSpec:
    """Finite-activity driving law: drift + diffusion + compound Poisson."""

    dim: int
    drift: np.ndarray
    diffusion: np.ndarray
    rate: float = 0.0
    jumps: np.ndarray | None = None
    probs: np.ndarray | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise LawSpecError(f"dim must be >= 1, got {self.dim}")
        drift = np.asarray(self.drift, dtype=float).reshape(-1)
        if drift.shape != (self.dim,):
            raise LawSpecError(f"drift shape {drift.shape} != ({self.dim},)")
        diff = np.asarray(self.diffusion, dtype=float)
        if diff.ndim == 0:
            diff = float(diff) * np.eye(self.dim)
        if diff.shape != (self.dim, self.dim):
            raise LawSpecError(f"diffusion shape {diff.shape} != ({self.dim}, {self.dim})")
        if not np.allclose(diff, diff.T, atol=1e-12):
            raise LawSpecError("diffusion matrix must be symmetric")
        eigs = np.linalg.eigvalsh(diff)
        if eigs.min() < -_PSD_TOL:
            raise LawSpecError(f"diffusion matrix not PSD (min eig {eigs.min():.3e})")
        rate = float(self.rate)
        if rate < 0.0:
            raise LawSpecError(f"jump rate must be >= 0, got {rate}")
        jumps = self.jumps
        probs = self.probs
        if rate > 0.0:
            if jumps is None:
                raise LawSpecError("positive jump rate needs a jump atom list")
            jumps = np.asarray(jumps, dtype=float)
            if jumps.ndim == 1:
                jumps = jumps[:, None]
            if jumps.ndim != 2 or jumps.shape[0] == 0 or jumps.shape[1] != self.dim:
                raise LawSpecError(f"jump atoms must have shape (k, {self.dim})")
            k = jumps.shape[0]
            if probs is None:
                probs = np.full(k, 1.0 / k)
            else:
                probs = np.asarray(probs, dtype=float).reshape(-1)
            if probs.shape != (k,) or np.any(probs < 0.0):
                raise LawSpecError("jump probabilities must be nonnegative, one per atom")
            if abs(probs.sum() - 1.0) > _PROB_TOL:
                raise LawSpecError(f"jump probabilities sum to {probs.sum()!r}, not 1")
        else:
            jumps = None if jumps is None else np.asarray(jumps, dtype=float)
            probs = None
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "diffusion", diff)
        object.__setattr__(self, "rate", rate)
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "probs", probs)

    @property
    def has_gaussian(self) -> bool:
        return bool(np.any(self.diffusion != 0.0))

    @property
    def has_jumps(self) -> bool:
        return self.rate > 0.0

    def jump_cdf(self) -> np.ndarray | None:
        if not self.has_jumps:
            return None
        return np.cumsum(self.probs)

    def char_exponent(self) -> CharExponent:
        """Exponent of the law at unit time: log E exp(i <y, X_1>)."""
        parts = []
        if np.any(self.drift != 0.0):
            parts.append(closed_form("dirac", shift=self.drift))
        if self.has_gaussian:
            parts.append(
                closed_form("gaussian", mean=np.zeros(self.dim), cov=self.diffusion)
            )
        if self.has_jumps:
            parts.append(
                closed_form(
                    "compound_poisson",
                    rate=self.rate,
                    jumps=self.jumps,
                    probs=self.probs,
                )
            )
        if not parts:
            parts.append(closed_form("dirac", shift=np.zeros(self.dim)))
        out = parts[0]
        for p in parts[1:]:
            out = convolve(out, p)
        return out


def _cov_factor(cov: np.ndarray) -> np.ndarray:
    """Symmetric square root; tolerates semidefinite matrices."""
    vals, vecs = np.linalg.eigh(cov)
    vals = np.clip(vals, 0.0, None)
    return vecs * np.sqrt(vals) @ vecs.T


def _philox(seed: int, index: int, tag: int) -> np.random.Generator:
    bg = np.random.Philox(
        counter=np.array([0, 0, 0, tag], dtype=np.uint64),
        key=np.array([seed, index], dtype=np.uint64),
    )
    return np.random.Generator(bg)


# -- the power-kernel integral over (0,1) ---------------------------------------


def _jbeta_chunk(spec: SimSpec, beta: float, seed: int, start: int, count: int) -> np.ndarray:
    d = spec.dim
    out = np.empty((count, d))
    det = (beta / (beta + 1.0)) * spec.drift
    chol = None
    if spec.has_gaussian:
        chol = _cov_factor((beta / (beta + 2.0)) * spec.diffusion)
    cdf = spec.jump_cdf()
    atoms = spec.jumps
    inv_beta = 1.0 / beta
    for i in range(count):
        g = _philox(seed, start + i, TAG_JBETA)
        x = det.copy()
        if chol is not None:
            x += chol @ g.standard_normal(d)
        if cdf is not None:
            k = int(g.poisson(spec.rate))
            if k:
                u = g.random(2 * k)
                w = u[:k] ** inv_beta
                idx = np.searchsorted(cdf, u[k:])
                x += w @ atoms[idx]
        out[i] = x
    return out


def sample_jbeta_integral(
    spec: SimSpec,
    beta: float,
    n: int,
    seed: int,
    workers: int = 1,
) -> np.ndarray:
    """Exact samples of the power-kernel integral of the driving process.

    Deterministic part gamma*beta/(beta+1); Gaussian part N(0, Sigma*beta/(beta+2));
    jump part sums tau**(1/beta) * J over a Poisson(rate) number of jumps at
    independent uniform times tau. Returns an (n, dim) array. Sample k is a
    pure function of (spec, beta, seed, k), so worker count never changes
    the output.
    """
    if not beta > 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    if n < 1:
        raise ValueError(f"need n >= 1 samples, got {n}")
    return _run_chunked(_jbeta_chunk, (spec, beta, seed), n, workers)


# -- the killed integral against the time-changed process -----------------------


def time_change_variance_factor(beta: float, s_max: float) -> float:
    """integral of exp(-2s)(1 - exp(-beta s)) over (0, s_max), closed form."""
    return -np.expm1(-2.0 * s_max) / 2.0 + np.expm1(-(beta + 2.0) * s_max) / (beta + 2.0)


def time_change_drift_factor(beta: float, s_max: float) -> float:
    """integral of exp(-s)(1 - exp(-beta s)) over (0, s_max), closed form."""
    return -np.expm1(-s_max) + np.expm1(-(beta + 1.0) * s_max) / (beta + 1.0)


def truncation_tail_bound(
    spec: SimSpec, beta: float, s_max: float, y_scale: float = 5.0
) -> float:
    """Size of the exponent mass discarded by stopping the integral at s_max.

    Bounds |integral over (0, exp(-s_max)] of Phi(u y)(1/u - u**(beta-1)) du|
    by a two-level midpoint estimate, maximized over the coordinate
    directions at radius y_scale.
    """
    u_max = math.exp(-s_max)
    phi = spec.char_exponent()
    Y = y_scale * np.eye(spec.dim)
    kern = lambda u: 1.0 / u - u ** (beta - 1.0)

    def piece(us: np.ndarray) -> np.ndarray:
        vals = phi.eval_grid(
            (us[:, None, None] * Y[None, :, :]).reshape(-1, spec.dim)
        ).reshape(len(us), spec.dim)
        return kern(us)[:, None] * vals

    probe = piece(u_max * np.array([0.25, 0.5, 0.75]))
    est = 0.5 * u_max * (probe[0] + probe[2])
    return float(np.max(np.abs(est)))


def _timechange_chunk(
    spec: SimSpec,
    beta: float,
    s_max: float,
    seed: int,
    start: int,
    count: int,
) -> np.ndarray:
    d = spec.dim
    out = np.empty((count, d))
    det = time_change_drift_factor(beta, s_max) * spec.drift
    chol = None
    if spec.has_gaussian:
        chol = _cov_factor(time_change_variance_factor(beta, s_max) * spec.diffusion)
    cdf = spec.jump_cdf()
    atoms = spec.jumps
    n_seg = int(math.ceil(s_max / _SEG_LEN))
    seg_lo = [j * _SEG_LEN for j in range(n_seg)]
    seg_len = [min((j + 1) * _SEG_LEN, s_max) - j * _SEG_LEN for j in range(n_seg)]
    lam = [spec.rate * L for L in seg_len]
    for i in range(count):
        g = _philox(seed, start + i, TAG_TIMECHANGE)
        x = det.copy()
        if chol is not None:
            x += chol @ g.standard_normal(d)
        if cdf is not None:
            # strictly segment-by-segment draws: the randomness consumed by
            # segment j depends only on segments <= j, so enlarging s_max
            # appends new draws without disturbing earlier ones
            for j in range(n_seg):
                c = int(g.poisson(lam[j]))
                if c == 0:
                    continue
                u = g.random(3 * c)
                s = seg_lo[j] + seg_len[j] * u[:c]
                accept = u[c : 2 * c] < -np.expm1(-beta * s)
                if np.any(accept):
                    idx = np.searchsorted(cdf, u[2 * c :][accept])
                    x += np.exp(-s[accept]) @ atoms[idx]
        out[i] = x
    return out


def sample_time_changed_integral(
    spec: SimSpec,
    beta: float,
    n: int,
    seed: int,
    s_max: float = 30.0,
    workers: int = 1,
) -> np.ndarray:
    """Samples of the exp(-s) integral against the time-changed process.

    The inner clock s + (exp(-beta s) - 1)/beta has rate 1 - exp(-beta s),
    so jumps are thinned from a rate-lambda envelope on [0, s_max]; each
    accepted jump J at time s contributes exp(-s) * J. Drift and Gaussian
    parts use the closed-form kernel integrals over [0, s_max]. Raises if
    the discarded tail beyond s_max is not negligible.
    """
    if not beta > 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    if n < 1:
        raise ValueError(f"need n >= 1 samples, got {n}")
    if not s_max > 0.0:
        raise ValueError(f"s_max must be positive, got {s_max}")
    bound = truncation_tail_bound(spec, beta, s_max)
    if bound >= _TAIL_BOUND:
        raise ValueError(
            f"s_max={s_max} discards exponent mass {bound:.3e} >= {_TAIL_BOUND}; "
            "increase the horizon"
        )
    return _run_chunked(_timechange_chunk, (spec, beta, s_max, seed), n, workers)


# -- second integral form of the defining identity ------------------------------


def _timechange_alt_chunk(
    spec: SimSpec, beta: float, seed: int, start: int, count: int
) -> np.ndarray:
    # integral of t against the process run at clock t**beta on (0, 1):
    # the inner process jumps at uniform times w, contributing w**(1/beta)
    d = spec.dim
    out = np.empty((count, d))
    det = (beta / (beta + 1.0)) * spec.drift
    chol = None
    if spec.has_gaussian:
        chol = _cov_factor((beta / (beta + 2.0)) * spec.diffusion)
    cdf = spec.jump_cdf()
    atoms = spec.jumps
    inv_beta = 1.0 / beta
    for i in range(count):
        g = _philox(seed, start + i, TAG_TIMECHANGE_ALT)
        x = det.copy()
        if chol is not None:
            x += chol @ g.standard_normal(d)
        if cdf is not None:
            k = int(g.poisson(spec.rate))
            if k:
                u = g.random(2 * k)
                w = u[:k] ** inv_beta
                idx = np.searchsorted(cdf, u[k:])
                x += w @ atoms[idx]
        out[i] = x
    return out


def sample_clocked_integral(
    spec: SimSpec, beta: float, n: int, seed: int, workers: int = 1
) -> np.ndarray:
    """Samples of the integral of t against the process at clock t**beta.

    Equal in law to :func:`sample_jbeta_integral` by substitution; drawn
    from an independent sub-stream of the same seed so the two samplers
    give statistically independent sample sets.
    """
    if not beta > 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    if n < 1:
        raise ValueError(f"need n >= 1 samples, got {n}")
    return _run_chunked(_timechange_alt_chunk, (spec, beta, seed), n, workers)


# -- chunked execution -----------------------------------------------------------


def _run_chunked(fn, args: tuple, n: int, workers: int) -> np.ndarray:
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if workers == 1:
        return fn(*args, 0, n)
    chunk = (n + workers - 1) // workers
    starts = list(range(0, n, chunk))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futs = [
            pool.submit(fn, *args, s, min(chunk, n - s))
            for s in starts
        ]
        parts = [f.result() for f in futs]
    return np.concatenate(parts, axis=0)


def samples_to_csv(samples: np.ndarray, path: str) -> None:
    """One row per sample, full double precision."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    header = ",".join(f"x{j}" for j in range(samples.shape[1]))
    np.savetxt(path, samples, delimiter=",", header=header, comments="", fmt="%.17g")


# -- empirical characteristic functions ------------------------------------------


@dataclass(frozen=True, eq=False)
class EmpiricalCF:
    """Empirical characteristic function on a grid, with standard errors."""

    y_grid: np.ndarray
    estimate: np.ndarray
    se_real: np.ndarray
    se_imag: np.ndarray
    n: int
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "rows": [
                {
                    "y": [float(v) for v in np.atleast_1d(self.y_grid[k])],
                    "estimate": [self.estimate[k].real, self.estimate[k].imag],
                    "se": [float(self.se_real[k]), float(self.se_imag[k])],
                }
                for k in range(len(self.estimate))
            ],
        }


def empirical_cf(samples: np.ndarray, y_grid, seed: int | None = None) -> EmpiricalCF:
    """Mean of exp(i <y, X>) over the samples, with componentwise SEs."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.shape[0] == 0:
        raise ValueError("need at least one sample")
    Y, _ = as_grid(y_grid, samples.shape[1])
    if Y.shape[0] == 0:
        raise ValueError("need at least one grid point")
    n = samples.shape[0]
    theta = samples @ Y.T
    re = np.cos(theta)
    im = np.sin(theta)
    est = re.mean(axis=0) + 1j * im.mean(axis=0)
    # one-ulp guard: the mean of unit-modulus terms cannot exceed modulus 1
    mod = np.abs(est)
    est = np.where(mod > 1.0, est / mod, est)
    se_re = re.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(Y.shape[0])
    se_im = im.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(Y.shape[0])
    return EmpiricalCF(Y, est, se_re, se_im, n, seed)


def _z_scores(diff: np.ndarray, se: np.ndarray) -> np.ndarray:
    z = np.zeros_like(diff)
    ok = se > 0.0
    z[ok] = diff[ok] / se[ok]
    z[~ok & (np.abs(diff) > 0.0)] = np.inf
    return z


@dataclass(frozen=True, eq=False)
class MCReport:
    """Empirical CF against a target CF, pointwise z-scores."""

    label: str
    params: dict
    y_grid: np.ndarray
    estimate: np.ndarray
    target: np.ndarray
    z_real: np.ndarray
    z_imag: np.ndarray
    n: int
    seed: int
    z_max: float

    @property
    def worst_z(self) -> float:
        return float(max(np.max(np.abs(self.z_real)), np.max(np.abs(self.z_imag))))

    @property
    def passed(self) -> bool:
        return self.worst_z <= self.z_max

    def rows(self) -> list[dict]:
        out = []
        for k in range(len(self.estimate)):
            out.append(
                {
                    "input": [float(v) for v in np.atleast_1d(self.y_grid[k])],
                    "lhs": [self.estimate[k].real, self.estimate[k].imag],
                    "rhs": [self.target[k].real, self.target[k].imag],
                    "residual": float(abs(self.estimate[k] - self.target[k])),
                    "z": [float(self.z_real[k]), float(self.z_imag[k])],
                }
            )
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "mc",
            "identity": self.label,
            "params": dict(self.params),
            "n": self.n,
            "seed": self.seed,
            "z_max": self.z_max,
            "worst_z": self.worst_z,
            "passed": self.passed,
            "rows": self.rows(),
        }

    def summary(self) -> str:
        word = "pass" if self.passed else "FAIL"
        return f"{self.label}: worst |z| {self.worst_z:.2f} (limit {self.z_max}) {word}"


def mc_vs_quadrature(
    spec: SimSpec,
    m: maps.IntegralMap,
    y_grid,
    n: int,
    seed: int,
    z_max: float = 4.0,
    s_max: float = 30.0,
    workers: int = 1,
    quad_tol: float | None = None,
) -> MCReport:
    """Empirical CF of the sampled integral vs. exp of the mapped exponent.

    The power-kernel map uses the exact unit-interval sampler; the combined
    logarithmic map uses the time-changed sampler. The other maps have no
    exact sampler here.
    """
    if m.kind == "jbeta":
        samples = sample_jbeta_integral(spec, m.beta, n, seed, workers=workers)
        params = {"map": "jbeta", "beta": m.beta, "n": n, "seed": seed}
    elif m.kind == "ijbeta":
        samples = sample_time_changed_integral(
            spec, m.beta, n, seed, s_max=s_max, workers=workers
        )
        params = {"map": "ijbeta", "beta": m.beta, "n": n, "seed": seed, "s_max": s_max}
    else:
        raise ValueError(f"no exact sampler for map kind {m.kind!r}")
    Y, _ = as_grid(y_grid, spec.dim)
    ecf = empirical_cf(samples, Y, seed)
    target = np.exp(maps.map_exponent_grid(m, spec.char_exponent(), Y, quad_tol))
    z_re = _z_scores(ecf.estimate.real - target.real, ecf.se_real)
    z_im = _z_scores(ecf.estimate.imag - target.imag, ecf.se_imag)
    return MCReport(
        f"mc-{m.kind}", params, Y, ecf.estimate, target, z_re, z_im, n, seed, z_max
    )


def time_change_equivalence(
    spec: SimSpec,
    beta: float,
    n: int,
    seed: int,
    y_grid=None,
    z_max: float = 4.0,
    workers: int = 1,
) -> MCReport:
    """Two-sample test of the two integral forms of the defining identity.

    Samples the power-kernel form and the clocked form on independent
    sub-streams of one seed and compares their empirical CFs pointwise
    with two-sample z-scores.
    """
    if y_grid is None:
        from .factor import default_grid

        y_grid = default_grid(spec.dim, n_points=21)
    Y, _ = as_grid(y_grid, spec.dim)
    s1 = sample_jbeta_integral(spec, beta, n, seed, workers=workers)
    s2 = sample_clocked_integral(spec, beta, n, seed, workers=workers)
    e1 = empirical_cf(s1, Y, seed)
    e2 = empirical_cf(s2, Y, seed)
    se_re = np.hypot(e1.se_real, e2.se_real)
    se_im = np.hypot(e1.se_imag, e2.se_imag)
    z_re = _z_scores(e1.estimate.real - e2.estimate.real, se_re)
    z_im = _z_scores(e1.estimate.imag - e2.estimate.imag, se_im)
    return MCReport(
        "eq2-timechange",
        {"beta": beta, "n": n, "seed": seed},
        Y,
        e1.estimate,
        e2.estimate,
        z_re,
        z_im,
        n,
        seed,
        z_max,
    )
