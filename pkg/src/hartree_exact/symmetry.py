"""Symmetry operators of the nonlinear evolution.

A linear operator ``a`` acting on initial-time data is promoted to a symmetry
of the nonlinear flow by conjugation: carry the state back to ``t = 0`` with
the inverse kernel, apply ``a`` there, and evolve forward again.  Because the
forward/backward maps re-derive their own flow constants from the state they
act on, the composite maps solutions to solutions.

The concrete operators are the ladder pair built from the initial germ,

    a(-)(0) = (dp - i m Omega dx) / sqrt(2 hbar m Omega),
    a(+)(0) = (dp + i m Omega dx) / sqrt(2 hbar m Omega),

with ``dp = p - p_ref`` and ``dx = x - x_ref`` relative to the family's mean
phase-space point at ``t = 0``, and the displacement group generated by them,
applied in the exactly factorised form (constant phase) x (position phase) x
(real shift), the shift acting spectrally.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ClassError, ToleranceError, ValidationError
from .hamilton_ehrenfest import Constants, closed_form
from .model import Frequencies, ModelParams
from .propagator import compose, compose_inverse
from .wavefunction import (
    WaveFunction,
    apply_momentum,
    boundary_decay_ok,
    norm_sq,
    require_concentrated,
)

__all__ = [
    "LadderOp",
    "DisplacementOp",
    "IdentityOp",
    "DisplacementDirection",
    "ZeroGenerator",
    "initial_means",
    "ladder_build",
    "displacement_build",
    "symmetry_apply",
    "displacement_apply",
    "family_generator",
]


def initial_means(params: ModelParams, freqs: Frequencies, consts: Constants):
    """Mean ``(P, X)`` of the flow at ``t = 0`` -- the ladder reference point."""
    g0 = closed_form(params, freqs, consts, 0.0)
    return g0.P, g0.X


@dataclass(frozen=True)
class IdentityOp:
    """Trivial operator; useful as the exponential of a zero generator."""

    def apply(self, params: ModelParams, freqs: Frequencies, psi: WaveFunction) -> WaveFunction:
        return psi.with_values(psi.values.copy())


@dataclass(frozen=True)
class LadderOp:
    """Raising (``sign=+1``) or lowering (``sign=-1``) operator at ``t = 0``."""

    sign: int
    p_ref: float
    x_ref: float

    def __post_init__(self):
        if self.sign not in (+1, -1):
            raise ValidationError(f"ladder sign must be +1 or -1, got {self.sign}")

    def apply(self, params: ModelParams, freqs: Frequencies, psi: WaveFunction) -> WaveFunction:
        mO = params.m * freqs.Omega
        dp_psi = apply_momentum(psi, params.hbar).values - self.p_ref * psi.values
        dx = psi.grid.x - self.x_ref
        vals = (dp_psi + self.sign * 1j * mO * dx * psi.values) / math.sqrt(
            2.0 * params.hbar * mO
        )
        return psi.with_values(vals)


@dataclass(frozen=True)
class DisplacementOp:
    """Exact displacement ``exp(alpha a+ - alpha* a-)`` at ``t = 0``.

    Applied in factorised form: first the argument shift
    ``psi(x) -> psi(x + Im(alpha) sqrt(2 hbar / m Omega))`` (spectral) with its
    momentum-reference phase, then the position phase
    ``exp(i sqrt(2 m Omega / hbar) Re(alpha) (x - x_ref))``, then the constant
    Baker--Campbell--Hausdorff phase ``exp(i Re(alpha) Im(alpha))``.
    """

    alpha: complex
    p_ref: float
    x_ref: float

    def apply(self, params: ModelParams, freqs: Frequencies, psi: WaveFunction) -> WaveFunction:
        mO = params.m * freqs.Omega
        a1, a2 = self.alpha.real, self.alpha.imag
        shift = a2 * math.sqrt(2.0 * params.hbar / mO)
        # psi(x) -> psi(x + shift), spectrally (exact for band-limited data).
        hat = np.fft.fft(psi.values)
        shifted = np.fft.ifft(hat * np.exp(1j * psi.grid.k * shift))
        # exp(beta dp) also carries exp(-beta p_ref) with beta = 2i a2 / sqrt(2 hbar m Omega)
        beta_phase = cmath.exp(-2j * a2 * self.p_ref / math.sqrt(2.0 * params.hbar * mO))
        gamma_phase = np.exp(
            2j * a1 * math.sqrt(mO / (2.0 * params.hbar)) * (psi.grid.x - self.x_ref)
        )
        const_phase = cmath.exp(1j * a1 * a2)
        out = psi.with_values(const_phase * beta_phase * gamma_phase * shifted)
        require_concentrated(out, what=f"state displaced by alpha={self.alpha}")
        return out


@dataclass(frozen=True)
class DisplacementDirection:
    """Generator of the displacement family along a fixed complex direction."""

    direction: complex
    p_ref: float
    x_ref: float

    def exponential(self, alpha: float) -> DisplacementOp:
        return DisplacementOp(
            alpha=alpha * self.direction, p_ref=self.p_ref, x_ref=self.x_ref
        )


@dataclass(frozen=True)
class ZeroGenerator:
    """Zero generator: its exponential is the identity for every alpha."""

    def exponential(self, alpha: float) -> IdentityOp:
        return IdentityOp()


def ladder_build(
    params: ModelParams,
    freqs: Frequencies,
    sign: int,
    p_ref: float = 0.0,
    x_ref: float = 0.0,
) -> LadderOp:
    return LadderOp(sign=sign, p_ref=p_ref, x_ref=x_ref)


def displacement_build(
    params: ModelParams,
    freqs: Frequencies,
    alpha: complex,
    p_ref: float = 0.0,
    x_ref: float = 0.0,
) -> DisplacementOp:
    return DisplacementOp(alpha=complex(alpha), p_ref=p_ref, x_ref=x_ref)


def symmetry_apply(
    params: ModelParams,
    freqs: Frequencies,
    op,
    psi: WaveFunction,
    t: float,
    n_steps: int | None = None,
) -> WaveFunction:
    """Conjugated action ``U(t) o op o U(t)^{-1}`` on a state living at ``t``."""
    phi = compose_inverse(params, freqs, psi, 0.0, t, n_steps)
    chi = op.apply(params, freqs, phi)
    if norm_sq(chi) == 0.0:
        raise ClassError("operator annihilated the state; nothing to evolve")
    if not boundary_decay_ok(chi):
        raise ClassError(
            "operator output is not concentrated on the grid; "
            "it left the admissible class"
        )
    return compose(params, freqs, chi, 0.0, t, n_steps)


def displacement_apply(
    params: ModelParams,
    freqs: Frequencies,
    alpha: complex,
    psi: WaveFunction,
    t: float,
    p_ref: float = 0.0,
    x_ref: float = 0.0,
    n_steps: int | None = None,
) -> WaveFunction:
    """Displacement symmetry ``D(alpha)`` acting on a state at time ``t``."""
    op = displacement_build(params, freqs, alpha, p_ref, x_ref)
    if t == 0.0:
        return op.apply(params, freqs, psi)
    return symmetry_apply(params, freqs, op, psi, t, n_steps)


def family_generator(
    params: ModelParams,
    freqs: Frequencies,
    b_op,
    psi: WaveFunction,
    t: float,
    h: float = 1e-3,
    tol: float = 1e-6,
    n_steps: int | None = None,
) -> WaveFunction:
    """Derivative at ``alpha = 0`` of ``alpha -> U(t) exp(alpha b) U(t)^{-1} psi``.

    Central differences at steps ``h`` and ``h/2`` with Richardson
    extrapolation; raises :class:`ToleranceError` when the two estimates
    disagree beyond ``tol`` in L2.
    """
    if h <= 0:
        raise ValidationError(f"finite-difference step must be > 0, got {h!r}")
    phi = compose_inverse(params, freqs, psi, 0.0, t, n_steps)

    def member(alpha: float) -> np.ndarray:
        chi = b_op.exponential(alpha).apply(params, freqs, phi)
        return compose(params, freqs, chi, 0.0, t, n_steps).values

    d_h = (member(h) - member(-h)) / (2.0 * h)
    d_h2 = (member(0.5 * h) - member(-0.5 * h)) / h
    resid = d_h2 - d_h
    est = math.sqrt(psi.grid.h * float(np.sum(np.abs(resid) ** 2))) / 3.0
    if est > tol:
        raise ToleranceError(
            f"generator finite difference not settled: Richardson residual "
            f"{est:.3e} > tol {tol:g} (try smaller h or finer grid)"
        )
    return psi.with_values(d_h2 + resid / 3.0)
