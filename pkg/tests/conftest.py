"""Shared fixtures: one driven, fully coupled configuration.

The numbers keep all three effective frequencies O(1), well separated from
the drive resonance, so individual tests can pick evolution times freely.
The session grid is wide enough for excitation indices up to ~12 plus the
forced excursion and the displacements exercised by the symmetry tests.
"""

import pytest

from hartree_exact import ModelParams, default_grid


@pytest.fixture(scope="session")
def params():
    return ModelParams(
        m=1.0,
        k=1.0,
        omega=0.9,
        hbar=1.0,
        e_charge=1.0,
        E_field=0.1,
        a=0.5,
        b=0.3,
        c=0.2,
        kappa=0.4,
    )


@pytest.fixture(scope="session")
def freqs(params):
    return params.frequencies()


@pytest.fixture(scope="session")
def grid(params, freqs):
    sigma_hi = params.hbar * 13.0 / (2.0 * params.m * freqs.Omega)
    return default_grid(0.0, sigma_hi, n_points=1024)
