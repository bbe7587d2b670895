"""Exact nonlinear evolution through the explicit oscillatory kernel.

The evolution operator acts in two stages: the moments of the incoming state
fix the integration constants of the classical flow, and the state is then
pushed through the linear Gaussian kernel attached to that flow.  The kernel
is the driven-oscillator Green function centred on the mean trajectory,

    G(x, y) = pref(theta) * exp{ i [ S(t) - S(s) + P(t) dx - P(s) dy ] / hbar
              - i (m Omega / 2 hbar) (2 dx dy - (dx^2 + dy^2) cos theta) / sin theta },

with ``dx = x - X(t)``, ``dy = y - X(s)``, ``theta = Omega (t - s)``, and the
branch-corrected prefactor

    pref = sqrt(m Omega / (2 pi hbar |sin theta|)) * exp(-i (pi/4 + nu pi/2)),
    nu = floor(theta / pi),

which carries the quarter-wave phase jump across each focal point.  At the
focal points themselves (``sin theta = 0``) the kernel degenerates to a point
map; :func:`compose` steps across them by splitting the interval.

The inverse operator uses the same kernel with the time roles swapped and the
constants pinned from the state at the *final* time, which is exactly what
makes it a left inverse of the forward map.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CausticError, ValidationError
from .exact_states import action
from .hamilton_ehrenfest import Constants, closed_form, constants_from_moments
from .model import Frequencies, ModelParams
from .wavefunction import WaveFunction, moments, require_concentrated

__all__ = [
    "CAUSTIC_TOL",
    "KernelSpec",
    "kernel_spec",
    "green_kernel",
    "kernel_matrix",
    "constants_of",
    "evolve",
    "inverse_evolve",
    "compose",
    "compose_inverse",
]

# |sin(Omega (t-s))| at or below this means the interval hits a focal point.
CAUSTIC_TOL = 1e-6

# Per-substep phase target used by automatic interval splitting.
_SUBSTEP_PHASE = 2.4


@dataclass(frozen=True)
class KernelSpec:
    """Frozen ingredients of one kernel application from ``s`` to ``t``."""

    s: float
    t: float
    constants: Constants
    action_s: float
    action_t: float
    maslov_index: int


def kernel_spec(
    params: ModelParams,
    freqs: Frequencies,
    consts: Constants,
    s: float,
    t: float,
) -> KernelSpec:
    """Precompute the scalar data of the kernel; fails on a focal interval."""
    theta = freqs.Omega * (t - s)
    if abs(math.sin(theta)) <= CAUSTIC_TOL:
        raise CausticError(
            f"|sin(Omega (t-s))| = {abs(math.sin(theta)):.3e} <= {CAUSTIC_TOL:g} "
            f"for t-s = {t - s:g}: interval hits a focal point; "
            "split it (see compose)"
        )
    return KernelSpec(
        s=s,
        t=t,
        constants=consts,
        action_s=action(params, freqs, consts, s),
        action_t=action(params, freqs, consts, t),
        maslov_index=int(math.floor(theta / math.pi)),
    )


def _prefactor(params: ModelParams, freqs: Frequencies, spec: KernelSpec) -> complex:
    theta = freqs.Omega * (spec.t - spec.s)
    amp = math.sqrt(
        params.m * freqs.Omega / (2.0 * math.pi * params.hbar * abs(math.sin(theta)))
    )
    return amp * cmath.exp(-1j * (0.25 * math.pi + 0.5 * math.pi * spec.maslov_index))


def green_kernel(params: ModelParams, freqs: Frequencies, spec: KernelSpec, x, y):
    """Kernel values at broadcastable ``x`` (final) and ``y`` (initial) points."""
    theta = freqs.Omega * (spec.t - spec.s)
    sin_th, cos_th = math.sin(theta), math.cos(theta)
    g_t = closed_form(params, freqs, spec.constants, spec.t)
    g_s = closed_form(params, freqs, spec.constants, spec.s)
    dx = np.asarray(x, dtype=float) - g_t.X
    dy = np.asarray(y, dtype=float) - g_s.X
    mO = params.m * freqs.Omega
    phase = (
        (spec.action_t - spec.action_s + g_t.P * dx - g_s.P * dy) / params.hbar
        - 0.5 * mO / params.hbar * (2.0 * dx * dy - (dx**2 + dy**2) * cos_th) / sin_th
    )
    return _prefactor(params, freqs, spec) * np.exp(1j * phase)


def kernel_matrix(
    params: ModelParams,
    freqs: Frequencies,
    spec: KernelSpec,
    x: np.ndarray,
    y: np.ndarray | None = None,
) -> np.ndarray:
    """Dense ``K[i, j] = G(x_i, y_j)`` via the selected backend."""
    theta = freqs.Omega * (spec.t - spec.s)
    g_t = closed_form(params, freqs, spec.constants, spec.t)
    g_s = closed_form(params, freqs, spec.constants, spec.s)
    return _kernels.build_kernel(
        np.asarray(x, dtype=float),
        np.asarray(x if y is None else y, dtype=float),
        g_t.X,
        g_s.X,
        g_t.P,
        g_s.P,
        spec.action_t - spec.action_s,
        params.hbar,
        params.m * freqs.Omega,
        math.cos(theta),
        math.sin(theta),
        _prefactor(params, freqs, spec),
    )


def constants_of(
    params: ModelParams, freqs: Frequencies, psi: WaveFunction, s: float
) -> Constants:
    """Flow constants matching the first/second moments of ``psi`` at time ``s``."""
    state = moments(psi, params.hbar, order=2).to_state(s)
    return constants_from_moments(params, freqs, state)


def _apply_kernel(
    params: ModelParams,
    freqs: Frequencies,
    consts: Constants,
    psi: WaveFunction,
    s: float,
    t: float,
    what: str,
) -> WaveFunction:
    spec = kernel_spec(params, freqs, consts, s, t)
    K = kernel_matrix(params, freqs, spec, psi.grid.x)
    out = psi.with_values(psi.grid.h * (K @ psi.values))
    require_concentrated(out, what=what)
    return out


def evolve(
    params: ModelParams,
    freqs: Frequencies,
    psi: WaveFunction,
    s: float,
    t: float,
) -> WaveFunction:
    """Exact evolution of ``psi`` from time ``s`` to ``t`` in one kernel hop.

    The flow constants are measured from ``psi`` itself at ``s``, so this is
    the full nonlinear operator.  Raises :class:`CausticError` on focal
    intervals and :class:`GridError` if the result is not contained by the
    grid.
    """
    if t == s:
        return psi.with_values(psi.values.copy())
    require_concentrated(psi, what="evolve input")
    consts = constants_of(params, freqs, psi, s)
    return _apply_kernel(
        params, freqs, consts, psi, s, t, what=f"state evolved to t={t:g}"
    )


def inverse_evolve(
    params: ModelParams,
    freqs: Frequencies,
    psi: WaveFunction,
    s: float,
    t: float,
) -> WaveFunction:
    """Map a state living at time ``t`` back to time ``s``.

    Uses the kernel with the time roles swapped and the constants measured at
    ``t``; composed with :func:`evolve` it acts as the identity on admissible
    states.
    """
    if t == s:
        return psi.with_values(psi.values.copy())
    require_concentrated(psi, what="inverse_evolve input")
    consts = constants_of(params, freqs, psi, t)
    return _apply_kernel(
        params, freqs, consts, psi, t, s, what=f"state mapped back to t={s:g}"
    )


def _breakpoints(freqs: Frequencies, s: float, t: float, n_steps: int | None) -> np.ndarray:
    if n_steps is None:
        theta = abs(freqs.Omega * (t - s))
        n_steps = max(1, int(math.ceil(theta / _SUBSTEP_PHASE)))
    if n_steps < 1:
        raise ValidationError(f"n_steps must be >= 1, got {n_steps}")
    return np.linspace(s, t, n_steps + 1)


def compose(
    params: ModelParams,
    freqs: Frequencies,
    psi: WaveFunction,
    s: float,
    t: float,
    n_steps: int | None = None,
) -> WaveFunction:
    """Evolution by chained kernel hops, re-deriving constants at each node.

    With ``n_steps = None`` the interval is split so each hop stays safely
    between focal points; explicit ``n_steps`` is honoured as given (a hop
    landing on a focal point still raises :class:`CausticError`).
    """
    taus = _breakpoints(freqs, s, t, n_steps)
    cur = psi
    for i in range(len(taus) - 1):
        cur = evolve(params, freqs, cur, float(taus[i]), float(taus[i + 1]))
    return cur


def compose_inverse(
    params: ModelParams,
    freqs: Frequencies,
    psi: WaveFunction,
    s: float,
    t: float,
    n_steps: int | None = None,
) -> WaveFunction:
    """Inverse of :func:`compose`: walk a state at ``t`` back to ``s`` in hops."""
    taus = _breakpoints(freqs, s, t, n_steps)
    cur = psi
    for i in range(len(taus) - 1, 0, -1):
        cur = inverse_evolve(params, freqs, cur, float(taus[i - 1]), float(taus[i]))
    return cur
