"""Discretised wavefunctions on a uniform grid, their moments and I/O.

States live on a uniform grid of ``n_points`` nodes covering ``[x_min,
x_max)`` (the right endpoint is the periodic image of the left one, which
keeps the FFT conventions clean).  All quadrature is the composite trapezoid
rule of the periodic extension, i.e. uniform weights ``h``; for the strongly
decaying states this package deals with that is spectrally accurate.

Momentum acts spectrally: ``p = -i hbar d/dx`` becomes multiplication by
``hbar k`` on the FFT side.  Mixed centred moments are evaluated in the
symmetric (Weyl-like) sense as the real part of ``<psi| dx^l dp^j |psi>``,
which equals the average of the two extreme operator orderings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import AliasError, GridError, ParseError, ValidationError
from .hamilton_ehrenfest import TrajectoryState

__all__ = [
    "Grid",
    "WaveFunction",
    "MomentSet",
    "default_grid",
    "norm_sq",
    "normalized",
    "inner",
    "boundary_decay_ok",
    "require_concentrated",
    "spectral_tail_fraction",
    "apply_momentum",
    "moments",
    "mixed_moment_unsymmetrized",
    "save_wavefunction",
    "load_wavefunction",
    "WAVEFUNCTION_HEADER",
]

WAVEFUNCTION_HEADER = "# hartree-exact wavefunction v1"

# Fraction of nodes at each edge that must sit below the decay threshold.
BOUNDARY_FRACTION = 0.05
BOUNDARY_DECAY_RTOL = 1e-8

# Spectral mass allowed in the outer 10% of the k-range before derivatives
# are considered aliased.
ALIAS_TAIL_FRACTION = 1e-6
ALIAS_TAIL_BAND = 0.9


@dataclass(frozen=True)
class Grid:
    """Uniform spatial grid with ``n_points`` nodes on ``[x_min, x_max)``."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValidationError(
                f"grid needs x_max > x_min, got [{self.x_min}, {self.x_max}]"
            )
        n = self.n_points
        if n < 16 or (n & (n - 1)) != 0:
            raise ValidationError(
                f"n_points must be a power of two >= 16, got {n}"
            )

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n_points)

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers matching ``np.fft.fft`` ordering."""
        return 2.0 * math.pi * np.fft.fftfreq(self.n_points, d=self.h)


def default_grid(center: float, sigma_max: float, n_points: int = 1024) -> Grid:
    """Grid of ``+-12 sqrt(sigma_max)`` around ``center``.

    Twelve standard deviations leave Gaussian tails far below the boundary
    decay threshold even for moderate excitation numbers.
    """
    if sigma_max <= 0:
        raise ValidationError(f"sigma_max must be > 0, got {sigma_max!r}")
    half = 12.0 * math.sqrt(sigma_max)
    return Grid(x_min=center - half, x_max=center + half, n_points=n_points)


@dataclass(frozen=True)
class WaveFunction:
    """Complex amplitudes sampled on ``grid.x``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (self.grid.n_points,):
            raise ValidationError(
                f"values shape {vals.shape} does not match grid ({self.grid.n_points},)"
            )
        if not np.all(np.isfinite(vals.view(float))):
            raise ValidationError("wavefunction contains non-finite amplitudes")
        object.__setattr__(self, "values", vals)

    def with_values(self, values: np.ndarray) -> "WaveFunction":
        return WaveFunction(grid=self.grid, values=values)


def norm_sq(psi: WaveFunction) -> float:
    """Trapezoid quadrature of ``|psi|^2``."""
    return float(psi.grid.h * np.sum(np.abs(psi.values) ** 2))


def normalized(psi: WaveFunction) -> WaveFunction:
    nsq = norm_sq(psi)
    if nsq <= 0.0:
        raise ValidationError("cannot normalise a zero wavefunction")
    return psi.with_values(psi.values / math.sqrt(nsq))


def inner(phi: WaveFunction, psi: WaveFunction) -> complex:
    """L2 inner product ``<phi, psi>`` (antilinear in the first slot)."""
    if phi.grid != psi.grid:
        raise ValidationError("inner product requires a common grid")
    return complex(phi.grid.h * np.sum(np.conj(phi.values) * psi.values))


def boundary_decay_ok(psi: WaveFunction, rtol: float = BOUNDARY_DECAY_RTOL) -> bool:
    """True if the outer 5% of nodes on each side are below ``rtol * max|psi|``."""
    absv = np.abs(psi.values)
    peak = absv.max()
    if peak == 0.0:
        return True
    n_edge = max(1, int(BOUNDARY_FRACTION * psi.grid.n_points))
    edge = max(absv[:n_edge].max(), absv[-n_edge:].max())
    return bool(edge <= rtol * peak)


def require_concentrated(psi: WaveFunction, what: str = "state"):
    if not boundary_decay_ok(psi):
        raise GridError(
            f"{what} does not decay at the grid boundary "
            f"(outer {BOUNDARY_FRACTION:.0%} of nodes above "
            f"{BOUNDARY_DECAY_RTOL:g} * max|psi|); enlarge the grid"
        )


def spectral_tail_fraction(psi: WaveFunction, values_hat: np.ndarray | None = None) -> float:
    """Fraction of spectral mass in the outer band ``|k| >= 0.9 k_max``."""
    hat = np.fft.fft(psi.values) if values_hat is None else values_hat
    power = np.abs(hat) ** 2
    total = power.sum()
    if total == 0.0:
        return 0.0
    k = psi.grid.k
    band = np.abs(k) >= ALIAS_TAIL_BAND * np.abs(k).max()
    return float(power[band].sum() / total)


def apply_momentum(psi: WaveFunction, hbar: float, order: int = 1) -> WaveFunction:
    """Apply ``(-i hbar d/dx)^order`` spectrally.

    Raises :class:`AliasError` when the spectral tail is not negligible, since
    differentiation amplifies exactly that band.
    """
    hat = np.fft.fft(psi.values)
    tail = spectral_tail_fraction(psi, values_hat=hat)
    if tail > ALIAS_TAIL_FRACTION:
        raise AliasError(
            f"spectral tail fraction {tail:.3e} exceeds {ALIAS_TAIL_FRACTION:g}; "
            "momentum application would alias (refine the grid)"
        )
    out = np.fft.ifft((hbar * psi.grid.k) ** order * hat)
    return psi.with_values(out)


@dataclass(frozen=True)
class MomentSet:
    """Norm, means and centred moments ``alpha[(j, l)]`` up to ``order``.

    Index convention matches :mod:`hartree_exact.hamilton_ehrenfest`:
    ``j`` is the momentum power, ``l`` the position power.
    """

    norm_sq: float
    p_mean: float
    x_mean: float
    order: int
    centered: dict

    @property
    def sigma_pp(self) -> float:
        return self.centered[(2, 0)]

    @property
    def sigma_px(self) -> float:
        return self.centered[(1, 1)]

    @property
    def sigma_xx(self) -> float:
        return self.centered[(0, 2)]

    def to_state(self, t: float) -> TrajectoryState:
        return TrajectoryState(
            t=t,
            P=self.p_mean,
            X=self.x_mean,
            sigma_pp=self.sigma_pp,
            sigma_px=self.sigma_px,
            sigma_xx=self.sigma_xx,
        )


def moments(psi: WaveFunction, hbar: float, order: int = 2) -> MomentSet:
    """Centred moments of ``psi`` up to total degree ``order``.

    Mixed entries are the symmetric real combinations
    ``Re <psi| (x - <x>)^l (p - <p>)^j |psi> / ||psi||^2``; first centred
    moments vanish identically by construction.
    """
    if order < 2:
        raise ValidationError(f"moment order must be >= 2, got {order}")
    h = psi.grid.h
    vals = psi.values
    nsq = norm_sq(psi)
    if nsq <= 0.0:
        raise ValidationError("cannot take moments of a zero wavefunction")

    hat = np.fft.fft(vals)
    tail = spectral_tail_fraction(psi, values_hat=hat)
    if tail > ALIAS_TAIL_FRACTION:
        raise AliasError(
            f"spectral tail fraction {tail:.3e} exceeds {ALIAS_TAIL_FRACTION:g}; "
            "momentum moments would alias (refine the grid)"
        )

    x = psi.grid.x
    dens = np.abs(vals) ** 2
    x_mean = float(h * np.sum(x * dens) / nsq)
    hk = hbar * psi.grid.k
    p_psi = np.fft.ifft(hk * hat)
    p_mean = float(np.real(h * np.sum(np.conj(vals) * p_psi)) / nsq)

    dx = x - x_mean
    centered = {}
    for j in range(order + 1):
        dp_j = np.fft.ifft((hk - p_mean) ** j * hat)
        weight = np.conj(vals) * dp_j
        for l in range(order + 1 - j):
            centered[(j, l)] = float(np.real(h * np.sum(dx**l * weight)) / nsq)
    return MomentSet(norm_sq=nsq, p_mean=p_mean, x_mean=x_mean, order=order, centered=centered)


def mixed_moment_unsymmetrized(psi: WaveFunction, hbar: float) -> complex:
    """Complex ``<(x - <x>)(p - <p>)>`` without symmetrisation.

    Differs from the symmetric mixed moment by ``i hbar / 2`` (commutator).
    """
    ms = moments(psi, hbar, order=2)
    h = psi.grid.h
    hat = np.fft.fft(psi.values)
    dp_psi = np.fft.ifft((hbar * psi.grid.k - ms.p_mean) * hat)
    dx = psi.grid.x - ms.x_mean
    return complex(h * np.sum(np.conj(psi.values) * dx * dp_psi) / ms.norm_sq)


def save_wavefunction(path, psi: WaveFunction, metadata: dict | None = None):
    """Write ``x, re, im`` rows with 17 significant digits.

    Grid bounds are recorded in comment lines so a round trip reproduces the
    grid bit-for-bit.
    """
    with open(path, "w") as fh:
        fh.write(WAVEFUNCTION_HEADER + "\n")
        fh.write(f"# x_min: {psi.grid.x_min:.17g}\n")
        fh.write(f"# x_max: {psi.grid.x_max:.17g}\n")
        fh.write(f"# n_points: {psi.grid.n_points}\n")
        for key, val in (metadata or {}).items():
            fh.write(f"# {key}: {val}\n")
        fh.write("x,re,im\n")
        for xi, vi in zip(psi.grid.x, psi.values):
            fh.write(f"{xi:.17g},{vi.real:.17g},{vi.imag:.17g}\n")


def load_wavefunction(path) -> WaveFunction:
    """Read a wavefunction CSV written by :func:`save_wavefunction`."""
    meta = {}
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if ":" in body:
                    key, _, val = body.partition(":")
                    meta[key.strip()] = val.strip()
                continue
            if line.lower().startswith("x,"):
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ParseError(
                    f"expected 3 comma-separated values, got {len(parts)}",
                    line=lineno,
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise ParseError(f"non-numeric value in row: {exc}", line=lineno)
    if not rows:
        raise ParseError("no data rows found")
    data = np.array(rows)
    xs = data[:, 0]
    n = len(xs)
    if "x_min" in meta and "x_max" in meta and "n_points" in meta:
        grid = Grid(float(meta["x_min"]), float(meta["x_max"]), int(meta["n_points"]))
        if grid.n_points != n:
            raise ParseError(
                f"n_points header says {grid.n_points} but file has {n} rows"
            )
    else:
        diffs = np.diff(xs)
        h = float(diffs.mean())
        if h <= 0 or np.max(np.abs(diffs - h)) > 1e-9 * abs(h):
            raise ParseError("x column is not uniformly increasing")
        grid = Grid(float(xs[0]), float(xs[0] + n * h), n)
    return WaveFunction(grid=grid, values=data[:, 1] + 1j * data[:, 2])
