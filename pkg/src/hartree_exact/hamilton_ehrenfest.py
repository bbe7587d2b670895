"""First and second moment flow of the driven Hartree oscillator.

For quadratic potentials the mean position/momentum and the centred second
moments close on themselves: the five-vector

    g = (P, X, sigma_pp, sigma_px, sigma_xx)

obeys a linear ODE ``g' = A g + f(t)`` whose solution is available in closed
form.  The centre-of-mass part oscillates at ``OmegaTilde`` around the forced
response to the dipole drive, while the variance block rotates at ``2 Omega``.
Centred moments of order three and higher obey a triangular hierarchy that is
integrated here with a fixed-step RK4 scheme.

Conventions: moment indices are written ``(j, l)`` with ``j`` the momentum
power and ``l`` the position power, so ``sigma_pp = alpha[(2, 0)]``,
``sigma_px = alpha[(1, 1)]`` and ``sigma_xx = alpha[(0, 2)]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import StepError, ValidationError
from .model import Frequencies, ModelParams

__all__ = [
    "TrajectoryState",
    "Constants",
    "HigherMoments",
    "HETrajectory",
    "forced_amplitude",
    "closed_form",
    "system_matrix",
    "drive_vector",
    "constants_from_moments",
    "uncertainty",
    "integrate",
    "higher_moment_rhs",
    "moment_keys",
    "export_trajectory_csv",
]


@dataclass(frozen=True)
class TrajectoryState:
    """Snapshot of the first/second moment vector at time ``t``."""

    t: float
    P: float
    X: float
    sigma_pp: float
    sigma_px: float
    sigma_xx: float

    def as_vector(self) -> np.ndarray:
        """The five-vector ``(P, X, sigma_pp, sigma_px, sigma_xx)``."""
        return np.array(
            [self.P, self.X, self.sigma_pp, self.sigma_px, self.sigma_xx], dtype=float
        )

    @classmethod
    def from_vector(cls, t: float, g) -> "TrajectoryState":
        g = np.asarray(g, dtype=float)
        return cls(t=t, P=g[0], X=g[1], sigma_pp=g[2], sigma_px=g[3], sigma_xx=g[4])


@dataclass(frozen=True)
class Constants:
    """Integration constants ``C1..C5`` of the closed-form moment flow."""

    c1: float
    c2: float
    c3: float
    c4: float
    c5: float

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3, self.c4, self.c5], dtype=float)


@dataclass(frozen=True)
class HigherMoments:
    """Centred moments ``alpha[(j, l)]`` for ``3 <= j + l <= order``."""

    order: int
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.order < 3:
            raise ValidationError(f"higher-moment order must be >= 3, got {self.order}")
        expected = set(moment_keys(self.order))
        if set(self.values) != expected:
            missing = sorted(expected - set(self.values))
            extra = sorted(set(self.values) - expected)
            raise ValidationError(
                f"higher-moment keys do not match order {self.order}: "
                f"missing {missing}, unexpected {extra}"
            )


def moment_keys(order: int):
    """Lexicographically ordered ``(j, l)`` with ``3 <= j + l <= order``."""
    return [
        (j, l)
        for j in range(order + 1)
        for l in range(order + 1 - j)
        if 3 <= j + l <= order
    ]


def forced_amplitude(params: ModelParams, freqs: Frequencies) -> float:
    """Amplitude ``e E / (m (OmegaTilde^2 - omega^2))`` of the driven response."""
    return params.e_charge * params.E_field / (params.m * freqs.detuning(params.omega))


def closed_form(params: ModelParams, freqs: Frequencies, consts: Constants, t):
    """Exact moment flow at time ``t`` (scalar or array) for given constants."""
    t = np.asarray(t, dtype=float)
    m = params.m
    Ot, O = freqs.OmegaTilde, freqs.Omega
    eta = forced_amplitude(params, freqs)
    c1, c2, c3, c4, c5 = consts.as_array()

    X = c1 * np.sin(Ot * t) + c2 * np.cos(Ot * t) + eta * np.cos(params.omega * t)
    P = m * Ot * (c1 * np.cos(Ot * t) - c2 * np.sin(Ot * t)) - m * eta * params.omega * np.sin(
        params.omega * t
    )
    s2, co2 = np.sin(2.0 * O * t), np.cos(2.0 * O * t)
    sigma_xx = c3 * s2 + c4 * co2 + c5
    sigma_px = m * O * (c3 * co2 - c4 * s2)
    sigma_pp = m * m * O * O * (c5 - c3 * s2 - c4 * co2)

    if t.ndim == 0:
        return TrajectoryState(
            t=float(t), P=float(P), X=float(X),
            sigma_pp=float(sigma_pp), sigma_px=float(sigma_px), sigma_xx=float(sigma_xx),
        )
    return TrajectoryState(t=t, P=P, X=X, sigma_pp=sigma_pp, sigma_px=sigma_px, sigma_xx=sigma_xx)


def system_matrix(params: ModelParams, freqs: Frequencies) -> np.ndarray:
    """Generator ``A`` of the homogeneous moment flow ``g' = A g + f``."""
    m = params.m
    Ot2, O2 = freqs.OmegaTilde_sq, freqs.Omega_sq
    return np.array(
        [
            [0.0, -m * Ot2, 0.0, 0.0, 0.0],
            [1.0 / m, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -2.0 * m * O2, 0.0],
            [0.0, 0.0, 1.0 / m, 0.0, -m * O2],
            [0.0, 0.0, 0.0, 2.0 / m, 0.0],
        ]
    )


def drive_vector(params: ModelParams, t: float) -> np.ndarray:
    """Inhomogeneous term ``f(t)``: the dipole force enters only ``P'``."""
    f = np.zeros(5)
    f[0] = params.e_charge * params.E_field * math.cos(params.omega * t)
    return f


def constants_from_moments(
    params: ModelParams, freqs: Frequencies, state: TrajectoryState
) -> Constants:
    """Invert the closed form: constants matching the moments at ``state.t``.

    The centre block and the variance block are each a rotation, so the
    inverse is explicit; at ``t = 0`` it reduces to

        C1 = P/(m OmegaTilde),  C2 = X - eta,
        C3 = sigma_px/(m Omega),
        C4 = (sigma_xx - sigma_pp/(m Omega)^2)/2,
        C5 = (sigma_xx + sigma_pp/(m Omega)^2)/2.
    """
    m = params.m
    Ot, O = freqs.OmegaTilde, freqs.Omega
    s = state.t
    eta = forced_amplitude(params, freqs)

    xt = state.X - eta * math.cos(params.omega * s)
    pt = (state.P + m * eta * params.omega * math.sin(params.omega * s)) / (m * Ot)
    sin1, cos1 = math.sin(Ot * s), math.cos(Ot * s)
    c1 = xt * sin1 + pt * cos1
    c2 = xt * cos1 - pt * sin1

    c5 = 0.5 * (state.sigma_xx + state.sigma_pp / (m * m * O * O))
    u = state.sigma_xx - c5
    v = state.sigma_px / (m * O)
    sin2, cos2 = math.sin(2.0 * O * s), math.cos(2.0 * O * s)
    c3 = u * sin2 + v * cos2
    c4 = u * cos2 - v * sin2
    return Constants(c1=c1, c2=c2, c3=c3, c4=c4, c5=c5)


def uncertainty(state: TrajectoryState) -> float:
    """Invariant ``sigma_pp sigma_xx - sigma_px^2`` of the variance flow."""
    return state.sigma_pp * state.sigma_xx - state.sigma_px**2


def _alpha_lookup(j: int, l: int, g: np.ndarray, alpha: dict) -> float:
    """Value of the centred moment ``(j, l)`` given the current state."""
    if j < 0 or l < 0:
        return 0.0
    order = j + l
    if order == 0:
        return 1.0
    if order == 1:
        return 0.0
    if order == 2:
        if j == 2:
            return g[2]
        if j == 1:
            return g[3]
        return g[4]
    return alpha.get((j, l), 0.0)


def higher_moment_rhs(
    params: ModelParams,
    freqs: Frequencies,
    t: float,
    g: np.ndarray,
    alpha: dict,
) -> dict:
    """Time derivative of each higher centred moment.

    The hierarchy is triangular: the derivative of ``alpha[(j, l)]`` involves
    moments of the same or lower order only, with the order-2 slots supplied
    by the covariance block of ``g`` and order-1 terms vanishing by centring.
    """
    m = params.m
    O2 = freqs.Omega_sq
    force = params.e_charge * params.E_field * math.cos(params.omega * t) - (
        m * freqs.OmegaTilde_sq * g[1]
    )
    out = {}
    for (j, l) in alpha:
        out[(j, l)] = (
            (l / m) * _alpha_lookup(j + 1, l - 1, g, alpha)
            - j * m * O2 * _alpha_lookup(j - 1, l + 1, g, alpha)
            + (l * g[0] / m) * _alpha_lookup(j, l - 1, g, alpha)
            + j * force * _alpha_lookup(j - 1, l, g, alpha)
        )
    return out


@dataclass(frozen=True)
class HETrajectory:
    """Sampled moment flow: ``gs[i]`` is the five-vector at ``times[i]``."""

    times: np.ndarray
    gs: np.ndarray
    higher_keys: tuple
    higher: np.ndarray  # shape (len(times), len(higher_keys))

    def state(self, i: int) -> TrajectoryState:
        return TrajectoryState.from_vector(float(self.times[i]), self.gs[i])

    def higher_moments(self, i: int) -> HigherMoments | None:
        if not self.higher_keys:
            return None
        order = max(j + l for (j, l) in self.higher_keys)
        vals = {k: float(v) for k, v in zip(self.higher_keys, self.higher[i])}
        return HigherMoments(order=order, values=vals)


def integrate(
    params: ModelParams,
    freqs: Frequencies,
    g0: TrajectoryState,
    t1: float,
    dt: float,
    higher0: HigherMoments | None = None,
) -> HETrajectory:
    """RK4 transport of the moment vector (and optional higher moments).

    The step is adjusted downward so that an integer number of steps lands
    exactly on ``t1``.  Raises :class:`StepError` when ``dt`` underresolves
    the fastest frequency of the system.
    """
    if dt <= 0:
        raise ValidationError(f"dt must be > 0, got {dt!r}")
    if dt * max(freqs.Omega, freqs.OmegaTilde) > 0.5:
        raise StepError(
            f"dt = {dt:.3g} too coarse: dt * max(Omega, OmegaTilde) = "
            f"{dt * max(freqs.Omega, freqs.OmegaTilde):.3g} > 0.5"
        )
    t0 = g0.t
    span = t1 - t0
    n_steps = max(1, int(math.ceil(abs(span) / dt - 1e-12)))
    h = span / n_steps

    if uncertainty(g0) < 0.0:
        warnings.warn(
            "initial covariance block has negative determinant; "
            "transporting it anyway",
            stacklevel=2,
        )

    A = system_matrix(params, freqs)
    keys = tuple(sorted(higher0.values)) if higher0 is not None else ()

    def pack(g, alpha):
        return np.concatenate([g, [alpha[k] for k in keys]]) if keys else np.array(g)

    def unpack(y):
        g = y[:5]
        alpha = {k: y[5 + i] for i, k in enumerate(keys)}
        return g, alpha

    def rhs(t, y):
        g, alpha = unpack(y)
        dg = A @ g + drive_vector(params, t)
        if not keys:
            return dg
        dal = higher_moment_rhs(params, freqs, t, g, alpha)
        return np.concatenate([dg, [dal[k] for k in keys]])

    y = pack(g0.as_vector(), higher0.values if higher0 is not None else {})
    times = np.empty(n_steps + 1)
    gs = np.empty((n_steps + 1, 5))
    hs = np.empty((n_steps + 1, len(keys)))
    times[0], gs[0] = t0, y[:5]
    hs[0] = y[5:]
    t = t0
    for i in range(n_steps):
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + (i + 1) * h
        times[i + 1], gs[i + 1], hs[i + 1] = t, y[:5], y[5:]
    return HETrajectory(times=times, gs=gs, higher_keys=keys, higher=hs)


def export_trajectory_csv(path, traj: HETrajectory, metadata: dict | None = None):
    """Write a trajectory as CSV: t, X, P, sigma_xx, sigma_px, sigma_pp, alpha_j_l..."""
    cols = ["t", "X", "P", "sigma_xx", "sigma_px", "sigma_pp"]
    cols += [f"alpha_{j}_{l}" for (j, l) in traj.higher_keys]
    with open(path, "w") as fh:
        fh.write("# hartree-exact trajectory v1\n")
        for key, val in (metadata or {}).items():
            fh.write(f"# {key}: {val}\n")
        fh.write(",".join(cols) + "\n")
        for i in range(len(traj.times)):
            row = [
                traj.times[i],
                traj.gs[i, 1],
                traj.gs[i, 0],
                traj.gs[i, 4],
                traj.gs[i, 3],
                traj.gs[i, 2],
            ]
            row.extend(traj.higher[i])
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
