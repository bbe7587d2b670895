"""Model parameters of the driven Hartree oscillator and derived frequencies.

The model is a 1-D particle of mass ``m`` in a harmonic well ``k x^2 / 2``,
driven by a dipole field ``-e E x cos(omega t)``, with a nonlocal Hartree term
whose kernel is the quadratic form ``(a x^2 + 2 b x y + c y^2) / 2`` weighted
by the density of the state itself and by the coupling ``kappa``.

Because the density enters only through its lowest moments, the mean-field
dynamics is governed by three effective frequencies built from the combination
``kappa_tilde = kappa * ||psi||^2``:

* ``Omega``       -- width (variance) frequency, ``Omega^2 = omega0^2 + kappa_tilde a / m``
* ``OmegaTilde``  -- centre-of-mass frequency, ``OmegaTilde^2 = omega0^2 + kappa_tilde (a+b) / m``
* the reduced combination with ``u = a + 2b + c`` entering the energy bookkeeping.

All states handed to the library are normalised at ingestion, so
``kappa_tilde == kappa`` throughout; :func:`derive_frequencies` still accepts
an explicit ``norm_sq`` for callers that want to study the scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import RegimeError, ResonanceError, ValidationError

__all__ = ["ModelParams", "Frequencies", "derive_frequencies", "RESONANCE_RTOL"]

# Relative half-width of the excluded band around the resonance
# OmegaTilde^2 == omega^2 of the driven centre-of-mass motion.
RESONANCE_RTOL = 1e-9


def _sign(v: float) -> int:
    return (v > 0.0) - (v < 0.0)


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of one model instance.

    ``m``, ``k``, ``hbar`` and ``omega`` must be positive; the nonlinearity
    (``kappa`` with shape coefficients ``a``, ``b``, ``c``) and the drive
    (``e_charge``, ``E_field``) may vanish.  Construction validates that the
    resulting effective frequencies are real and off-resonant for a unit-norm
    state, so an instance that exists is always usable.
    """

    m: float
    k: float
    omega: float
    hbar: float
    e_charge: float = 1.0
    E_field: float = 0.0
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        for name in ("m", "k", "omega", "hbar"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValidationError(f"{name} must be a finite number, got {v!r}")
            if v <= 0:
                raise ValidationError(f"{name} must be > 0, got {v!r}")
        for name in ("e_charge", "E_field", "a", "b", "c", "kappa"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValidationError(f"{name} must be a finite number, got {v!r}")
        # Fail fast: an instance whose unit-norm frequencies are unstable or
        # resonant is unusable by every downstream routine.
        derive_frequencies(self, 1.0)

    @property
    def drive_period(self) -> float:
        """Period ``2 pi / omega`` of the external drive."""
        return 2.0 * math.pi / self.omega

    def frequencies(self, norm_sq: float = 1.0) -> "Frequencies":
        return derive_frequencies(self, norm_sq)


@dataclass(frozen=True)
class Frequencies:
    """Effective frequencies derived from :class:`ModelParams` and a norm.

    ``nl_sq_*`` are the signed squares ``kappa_tilde * u / m`` for
    ``u in {a, a + b, a + 2b + c}``; ``omega_nl_*`` are their absolute square
    roots and ``zeta_*`` the signs, so ``zeta * omega_nl**2`` recovers the
    signed square.  ``Omega_sq``/``OmegaTilde_sq`` are stored directly (not
    recomputed from the roots) to keep the defining sums exact.
    """

    omega0: float
    omega_nl_a: float
    omega_nl_ab: float
    omega_nl_abc: float
    zeta_a: int
    zeta_ab: int
    zeta_abc: int
    Omega: float
    OmegaTilde: float
    omega0_sq: float
    nl_sq_a: float
    nl_sq_ab: float
    nl_sq_abc: float
    Omega_sq: float
    OmegaTilde_sq: float
    kappa_tilde: float

    def detuning(self, omega: float) -> float:
        """Signed distance ``OmegaTilde^2 - omega^2`` from the drive resonance."""
        return self.OmegaTilde_sq - omega * omega


def derive_frequencies(params: ModelParams, norm_sq: float = 1.0) -> Frequencies:
    """Build the :class:`Frequencies` of ``params`` for a state of given norm.

    Raises :class:`RegimeError` if either effective square frequency is
    non-positive (the quadratic flow would be hyperbolic) and
    :class:`ResonanceError` if the drive sits within ``RESONANCE_RTOL``
    (relative) of the centre-of-mass resonance.
    """
    if norm_sq < 0 or not math.isfinite(norm_sq):
        raise ValidationError(f"norm_sq must be finite and >= 0, got {norm_sq!r}")
    kt = params.kappa * norm_sq
    omega0_sq = params.k / params.m
    nl_sq_a = kt * params.a / params.m
    nl_sq_ab = kt * (params.a + params.b) / params.m
    nl_sq_abc = kt * (params.a + 2.0 * params.b + params.c) / params.m

    Omega_sq = omega0_sq + nl_sq_a
    OmegaTilde_sq = omega0_sq + nl_sq_ab
    if Omega_sq <= 0.0:
        raise RegimeError(
            f"Omega^2 = k/m + kappa_tilde*a/m = {Omega_sq:.6g} <= 0: "
            "width dynamics is not oscillatory"
        )
    if OmegaTilde_sq <= 0.0:
        raise RegimeError(
            f"OmegaTilde^2 = k/m + kappa_tilde*(a+b)/m = {OmegaTilde_sq:.6g} <= 0: "
            "centre-of-mass dynamics is not oscillatory"
        )
    if abs(OmegaTilde_sq - params.omega**2) < RESONANCE_RTOL * OmegaTilde_sq:
        raise ResonanceError(
            f"drive resonant: |OmegaTilde^2 - omega^2| = "
            f"{abs(OmegaTilde_sq - params.omega**2):.3g} < "
            f"{RESONANCE_RTOL:g} * OmegaTilde^2"
        )

    return Frequencies(
        omega0=math.sqrt(omega0_sq),
        omega_nl_a=math.sqrt(abs(nl_sq_a)),
        omega_nl_ab=math.sqrt(abs(nl_sq_ab)),
        omega_nl_abc=math.sqrt(abs(nl_sq_abc)),
        zeta_a=_sign(nl_sq_a),
        zeta_ab=_sign(nl_sq_ab),
        zeta_abc=_sign(nl_sq_abc),
        Omega=math.sqrt(Omega_sq),
        OmegaTilde=math.sqrt(OmegaTilde_sq),
        omega0_sq=omega0_sq,
        nl_sq_a=nl_sq_a,
        nl_sq_ab=nl_sq_ab,
        nl_sq_abc=nl_sq_abc,
        Omega_sq=Omega_sq,
        OmegaTilde_sq=OmegaTilde_sq,
        kappa_tilde=kt,
    )
