"""Compiled minibatch kernels for training.

They operate on the flat parameter vector of ``icnn.IcnnParams.to_vector``
with ``offs = params.layer_offsets()`` and replicate the numpy reference
in ``icnn``, which the tests use as the oracle.

Record arrays: ``X`` (R, m, n_in) network inputs, ``D`` (R, m, n_in, 9)
input derivatives with the 1/m weight folded in, ``P`` (R, 9) target
stresses, ``psi`` (R,) target energies.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _sp(a):
    if a > 0.0:
        return a + math.log1p(math.exp(-a))
    return math.log1p(math.exp(a))


@njit(cache=True, inline="always")
def _sig(a):
    if a >= 0.0:
        return 1.0 / (1.0 + math.exp(-a))
    e = math.exp(a)
    return e / (1.0 + e)


@njit(cache=True)
def _trace(theta, offs, hs, x, A, Z):
    L = hs.shape[0]
    n = x.shape[0]
    for i in range(L):
        h = hs[i]
        oz, ox, oxa, ob = offs[i, 0], offs[i, 1], offs[i, 2], offs[i, 3]
        for r in range(h):
            s = theta[ob + r]
            for c in range(n):
                w = theta[ox + r * n + c]
                if oxa >= 0:
                    w += theta[oxa + r * n + c]
                s += w * x[c]
            if i > 0:
                hp = hs[i - 1]
                for c in range(hp):
                    s += theta[oz + r * hp + c] * Z[i - 1, c]
            A[i, r] = s
            Z[i, r] = _sp(s)
    o = offs[L, 0]
    y = 0.0
    for c in range(hs[L - 1]):
        y += theta[o + c] * Z[L - 1, c]
    return y


@njit(cache=True)
def _grad_input(theta, offs, hs, n, A, g, zbar, tmp):
    L = hs.shape[0]
    o = offs[L, 0]
    for c in range(hs[L - 1]):
        zbar[c] = theta[o + c]
    for c in range(n):
        g[c] = 0.0
    for i in range(L - 1, -1, -1):
        h = hs[i]
        oz, ox, oxa = offs[i, 0], offs[i, 1], offs[i, 2]
        if i > 0:
            for c in range(hs[i - 1]):
                tmp[c] = 0.0
        for r in range(h):
            ab = zbar[r] * _sig(A[i, r])
            for c in range(n):
                w = theta[ox + r * n + c]
                if oxa >= 0:
                    w += theta[oxa + r * n + c]
                g[c] += ab * w
            if i > 0:
                hp = hs[i - 1]
                for c in range(hp):
                    tmp[c] += ab * theta[oz + r * hp + c]
        if i > 0:
            for c in range(hs[i - 1]):
                zbar[c] = tmp[c]


@njit(cache=True)
def _grad_value(theta, offs, hs, x, A, Z, adj, G, zbar, tmp):
    """G += adj * d y / d theta."""
    L = hs.shape[0]
    n = x.shape[0]
    o = offs[L, 0]
    for c in range(hs[L - 1]):
        G[o + c] += adj * Z[L - 1, c]
        zbar[c] = adj * theta[o + c]
    for i in range(L - 1, -1, -1):
        h = hs[i]
        oz, ox, oxa, ob = offs[i, 0], offs[i, 1], offs[i, 2], offs[i, 3]
        if i > 0:
            for c in range(hs[i - 1]):
                tmp[c] = 0.0
        for r in range(h):
            ab = zbar[r] * _sig(A[i, r])
            G[ob + r] += ab
            for c in range(n):
                G[ox + r * n + c] += ab * x[c]
                if oxa >= 0:
                    G[oxa + r * n + c] += ab * x[c]
            if i > 0:
                hp = hs[i - 1]
                for c in range(hp):
                    G[oz + r * hp + c] += ab * Z[i - 1, c]
                    tmp[c] += ab * theta[oz + r * hp + c]
        if i > 0:
            for c in range(hs[i - 1]):
                zbar[c] = tmp[c]


@njit(cache=True)
def _grad_dir(theta, offs, hs, x, u, A, Z, Ad, Zd, G, zbar, zdbar, tmp, tmpd):
    """G += d (u . dy/dx) / d theta (forward tangent, reverse sweep)."""
    L = hs.shape[0]
    n = x.shape[0]
    for i in range(L):
        h = hs[i]
        oz, ox, oxa = offs[i, 0], offs[i, 1], offs[i, 2]
        for r in range(h):
            t = 0.0
            for c in range(n):
                w = theta[ox + r * n + c]
                if oxa >= 0:
                    w += theta[oxa + r * n + c]
                t += w * u[c]
            if i > 0:
                hp = hs[i - 1]
                for c in range(hp):
                    t += theta[oz + r * hp + c] * Zd[i - 1, c]
            Ad[i, r] = t
            Zd[i, r] = _sig(A[i, r]) * t
    o = offs[L, 0]
    for c in range(hs[L - 1]):
        G[o + c] += Zd[L - 1, c]
        zdbar[c] = theta[o + c]
        zbar[c] = 0.0
    for i in range(L - 1, -1, -1):
        h = hs[i]
        oz, ox, oxa, ob = offs[i, 0], offs[i, 1], offs[i, 2], offs[i, 3]
        if i > 0:
            for c in range(hs[i - 1]):
                tmp[c] = 0.0
                tmpd[c] = 0.0
        for r in range(h):
            s1 = _sig(A[i, r])
            s2 = s1 * (1.0 - s1)
            adb = zdbar[r] * s1
            ab = zdbar[r] * s2 * Ad[i, r] + zbar[r] * s1
            G[ob + r] += ab
            for c in range(n):
                gx = ab * x[c] + adb * u[c]
                G[ox + r * n + c] += gx
                if oxa >= 0:
                    G[oxa + r * n + c] += gx
            if i > 0:
                hp = hs[i - 1]
                for c in range(hp):
                    w = theta[oz + r * hp + c]
                    G[oz + r * hp + c] += ab * Z[i - 1, c] + adb * Zd[i - 1, c]
                    tmp[c] += ab * w
                    tmpd[c] += adb * w
        if i > 0:
            for c in range(hs[i - 1]):
                zbar[c] = tmp[c]
                zdbar[c] = tmpd[c]


@njit(cache=True)
def stress_batch(theta, offs, hs, X, D, P, idx, G, want_grad):
    """Mean squared Frobenius stress error over records ``idx``; adds its gradient to G."""
    m = X.shape[1]
    n = X.shape[2]
    L = hs.shape[0]
    hmax = hs.max()
    B = idx.shape[0]
    A = np.empty((m, L, hmax))
    Z = np.empty((m, L, hmax))
    Ad = np.empty((L, hmax))
    Zd = np.empty((L, hmax))
    g = np.empty((m, n))
    u = np.empty(n)
    zbar = np.empty(hmax)
    zdbar = np.empty(hmax)
    tmp = np.empty(hmax)
    tmpd = np.empty(hmax)
    pnn = np.empty(9)
    loss = 0.0
    for b in range(B):
        rec = idx[b]
        for k in range(9):
            pnn[k] = 0.0
        for j in range(m):
            _trace(theta, offs, hs, X[rec, j], A[j], Z[j])
            _grad_input(theta, offs, hs, n, A[j], g[j], zbar, tmp)
            for c in range(n):
                gc = g[j, c]
                for k in range(9):
                    pnn[k] += gc * D[rec, j, c, k]
        for k in range(9):
            res = pnn[k] - P[rec, k]
            loss += res * res
            pnn[k] = 2.0 * res / B  # reused as dL/dP
        if want_grad:
            for j in range(m):
                for c in range(n):
                    s = 0.0
                    for k in range(9):
                        s += pnn[k] * D[rec, j, c, k]
                    u[c] = s
                _grad_dir(theta, offs, hs, X[rec, j], u, A[j], Z[j], Ad, Zd, G, zbar, zdbar, tmp, tmpd)
    return loss / B


@njit(cache=True)
def hull_batch(theta, offs, hs, X, psi, offset, alpha, idx, G, want_grad):
    """(1/B) sum (psi - E)^2 + alpha * sum max(E - psi, 0) over records ``idx``."""
    m = X.shape[1]
    L = hs.shape[0]
    hmax = hs.max()
    B = idx.shape[0]
    A = np.empty((m, L, hmax))
    Z = np.empty((m, L, hmax))
    zbar = np.empty(hmax)
    tmp = np.empty(hmax)
    loss = 0.0
    for b in range(B):
        rec = idx[b]
        e = 0.0
        for j in range(m):
            e += _trace(theta, offs, hs, X[rec, j], A[j], Z[j])
        e = e / m - offset
        diff = e - psi[rec]
        loss += diff * diff / B
        dl = 2.0 * diff / B
        if diff > 0.0:
            loss += alpha * diff
            dl += alpha
        if want_grad:
            for j in range(m):
                _grad_value(theta, offs, hs, X[rec, j], A[j], Z[j], dl / m, G, zbar, tmp)
    return loss


@njit(cache=True)
def energies(theta, offs, hs, X):
    R = X.shape[0]
    m = X.shape[1]
    L = hs.shape[0]
    hmax = hs.max()
    A = np.empty((L, hmax))
    Z = np.empty((L, hmax))
    out = np.empty(R)
    for rec in range(R):
        e = 0.0
        for j in range(m):
            e += _trace(theta, offs, hs, X[rec, j], A, Z)
        out[rec] = e / m
    return out


@njit(cache=True)
def _project(theta, mask_idx):
    for q in range(mask_idx.shape[0]):
        k = mask_idx[q]
        if theta[k] < 0.0:
            theta[k] = 0.0


@njit(cache=True)
def sgd_update(theta, G, lr, mask_idx):
    """One projected plain-SGD step, in place."""
    for k in range(theta.shape[0]):
        theta[k] -= lr * G[k]
    _project(theta, mask_idx)


# Epoch kernels return the record-weighted mean of the minibatch losses
# evaluated before each update.


@njit(cache=True)
def stress_epoch(theta, offs, hs, X, D, P, order, batch, lr, mask_idx):
    G = np.zeros(theta.shape[0])
    R = order.shape[0]
    total = 0.0
    for start in range(0, R, batch):
        stop = min(start + batch, R)
        G[:] = 0.0
        total += (stop - start) * stress_batch(theta, offs, hs, X, D, P, order[start:stop], G, True)
        sgd_update(theta, G, lr, mask_idx)
    return total / R


@njit(cache=True)
def hull_epoch(theta, offs, hs, X, psi, offset, alpha, order, batch, lr, mask_idx):
    G = np.zeros(theta.shape[0])
    R = order.shape[0]
    total = 0.0
    for start in range(0, R, batch):
        stop = min(start + batch, R)
        G[:] = 0.0
        total += (stop - start) * hull_batch(theta, offs, hs, X, psi, offset, alpha, order[start:stop], G, True)
        sgd_update(theta, G, lr, mask_idx)
    return total / R
