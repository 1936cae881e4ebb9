"""Pure-numpy sinusoid-bank kernels (fallback for the compiled core).

Arrays are laid out samples x units. Outputs are written into the
caller's buffers so both backends share one calling convention.
"""

import numpy as np


def bank_forward(t, amp, omega, phi, sines, cosines, periodic):
    """sines/cosines of omega*t + phi, and periodic = sum_k amp * sin."""
    theta = np.multiply.outer(t, omega)
    theta += phi
    np.sin(theta, out=sines)
    np.cos(theta, out=cosines)
    np.einsum("ik,ik->i", amp, sines, out=periodic)


def bank_backward(t, g, amp, sines, cosines, d_amp, d_omega, d_phi):
    """Backpropagate the per-sample output gradient ``g`` through the bank."""
    np.multiply(g[:, None], sines, out=d_amp)
    q = amp * cosines
    q *= g[:, None]
    d_phi[:] = q.sum(axis=0)
    d_omega[:] = t @ q
