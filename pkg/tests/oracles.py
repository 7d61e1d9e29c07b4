"""Reference computations that avoid the library's coordinate machinery.

Everything here works with complex vectorizations ``vec(A) = A.ravel()``
and explicit loops, so agreement with the library is a genuine cross-check.
"""
import numpy as np


def gram(ops):
    n = len(ops)
    g = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            g[i, j] = np.trace(ops[i] @ ops[j]).real
    return g


def complex_frame_operator(elements, weights):
    """``sum w vec(F) vec(F)^dag``, which maps vec(A) to vec(sum w tr(FA) F)."""
    d = elements.shape[1]
    s = np.zeros((d * d, d * d), dtype=complex)
    for w, f in zip(weights, elements):
        v = f.ravel()
        s += w * np.outer(v, v.conj())
    return s


def canonical_dual_elements(elements, weights):
    d = elements.shape[1]
    s = complex_frame_operator(elements, weights)
    cols = np.linalg.solve(s, np.array([f.ravel() for f in elements]).T)
    return cols.T.reshape(-1, d, d)


def reconstruct_loop(elements, weights, values):
    out = np.zeros(elements.shape[1:], dtype=complex)
    for w, v, e in zip(weights, values, elements):
        out += w * v * e
    return out


def partial_transpose_loop(m, d):
    out = np.zeros_like(m)
    for i in range(d):
        for k in range(d):
            for j in range(d):
                for l in range(d):
                    out[i * d + l, j * d + k] = m[i * d + k, j * d + l]
    return out


def haar_unitary(d, rng):
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
