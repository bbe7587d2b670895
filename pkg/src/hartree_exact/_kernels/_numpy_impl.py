"""NumPy reference implementation of the kernel assembly.

The phase separates as ``A_i + B_j + coup * dx_i * dy_j``, so the matrix is a
rank-one product of edge phases times one dense ``exp`` of the outer product.
"""

import numpy as np


def build_kernel(x, y, X_t, X_s, P_t, P_s, dS, hbar, m_omega, cos_th, sin_th, pref):
    dx = np.asarray(x, dtype=float) - X_t
    dy = np.asarray(y, dtype=float) - X_s
    half = 0.5 * m_omega * cos_th / (hbar * sin_th)
    coup = -m_omega / (hbar * sin_th)
    A = (dS + P_t * dx) / hbar + half * dx * dx
    B = -P_s * dy / hbar + half * dy * dy
    cross = np.exp(1j * coup * np.outer(dx, dy))
    return (pref * np.exp(1j * A))[:, None] * np.exp(1j * B)[None, :] * cross
