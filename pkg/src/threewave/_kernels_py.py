"""Pure-Python/numpy implementations of the hot kernels.

These are the reference semantics; the compiled module ``_kernels`` must
agree with them to rounding.  ``kernels`` picks the compiled version when it
imports and falls back to this module otherwise.
"""
import numpy as np


def _soliton_rhs(r, w, dw):
    # W'' = W - W^2 - (2/r) W', with the r -> 0 limit (W - W^2)/3
    if r == 0.0:
        return dw, (w - w * w) / 3.0
    return dw, w - w * w - 2.0 * dw / r


def shoot_soliton(w0, dr, nsteps, w_out, dw_out):
    """RK4 march of the soliton ODE from ``W(0) = w0``, ``W'(0) = 0``.

    Samples at ``r = i*dr`` are written to ``w_out[i]``, ``dw_out[i]`` for
    ``i = 0..stop``.  Returns ``(status, stop)`` where status is ``+1`` when
    the trajectory crosses zero (initial height too large), ``-1`` when it
    turns back up before crossing (too small) and ``0`` if neither happened
    within ``nsteps`` steps.
    """
    w = float(w0)
    dw = 0.0
    w_out[0] = w
    dw_out[0] = dw
    h = float(dr)
    for i in range(nsteps):
        r = i * h
        k1w, k1d = _soliton_rhs(r, w, dw)
        k2w, k2d = _soliton_rhs(r + 0.5 * h, w + 0.5 * h * k1w, dw + 0.5 * h * k1d)
        k3w, k3d = _soliton_rhs(r + 0.5 * h, w + 0.5 * h * k2w, dw + 0.5 * h * k2d)
        k4w, k4d = _soliton_rhs(r + h, w + h * k3w, dw + h * k3d)
        w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
        dw += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
        w_out[i + 1] = w
        dw_out[i + 1] = dw
        if w < 0.0:
            return 1, i + 1
        if dw > 0.0:
            return -1, i + 1
    return 0, nsteps


def _three_wave_rhs(p1, p2, p3, alpha):
    a1 = np.abs(p1) ** 2
    a2 = np.abs(p2) ** 2
    a3 = np.abs(p3) ** 2
    return (
        1j * (a1 * a1 * p1 + alpha * p3 * np.conj(p2)),
        1j * (a2 * a2 * p2 + alpha * p3 * np.conj(p1)),
        1j * (a3 * a3 * p3 + alpha * p1 * p2),
    )


def nonlinear_substeps(psi, alpha, h, m):
    """``m`` classical RK4 steps of size ``h`` of the pointwise flow

    ``d/dt psi1 = i(|psi1|^4 psi1 + alpha psi3 conj(psi2))`` (and cyclically,
    ``psi3`` driven by ``psi1 psi2``), applied in place to the (3, n) array.
    """
    p1, p2, p3 = psi[0].copy(), psi[1].copy(), psi[2].copy()
    for _ in range(int(m)):
        k1 = _three_wave_rhs(p1, p2, p3, alpha)
        k2 = _three_wave_rhs(p1 + 0.5 * h * k1[0], p2 + 0.5 * h * k1[1], p3 + 0.5 * h * k1[2], alpha)
        k3 = _three_wave_rhs(p1 + 0.5 * h * k2[0], p2 + 0.5 * h * k2[1], p3 + 0.5 * h * k2[2], alpha)
        k4 = _three_wave_rhs(p1 + h * k3[0], p2 + h * k3[1], p3 + h * k3[2], alpha)
        p1 = p1 + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        p2 = p2 + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        p3 = p3 + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    psi[0] = p1
    psi[1] = p2
    psi[2] = p3
    return psi
