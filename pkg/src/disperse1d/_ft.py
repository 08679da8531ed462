"""Discrete Fourier transform pair between a symmetric k-grid and a p-grid.

Convention: f(k) = c + int e^{ikp} g(p) dp and g(p) = (1/2pi) int (f - c) e^{-ikp} dk.
The discrete pair below is exactly invertible on the k-nodes.
"""

import numpy as np

PAD = 4


def p_grid(k, pad=PAD):
    k = np.asarray(k)
    dk = k[1] - k[0]
    M = pad * k.size
    dp = 2.0 * np.pi / (M * dk)
    m = np.arange(M) - M // 2
    return m * dp


def inverse(f, k, pad=PAD, axis=-1):
    """Samples of g on ``p_grid(k)`` (along ``axis``)."""
    f = np.moveaxis(np.asarray(f, dtype=complex), axis, -1)
    k = np.asarray(k, dtype=float)
    dk = k[1] - k[0]
    n = k.size
    M = pad * n
    p = p_grid(k, pad)
    spec = np.fft.fft(f, n=M, axis=-1)
    spec = np.fft.fftshift(spec, axes=-1)
    g = spec * np.exp(-1j * k[0] * p) * (dk / (2.0 * np.pi))
    return p, np.moveaxis(g, -1, axis)


def forward(g, p, k):
    """Evaluate int e^{ikp} g(p) dp as the discrete sum over the p-grid."""
    g = np.asarray(g, dtype=complex)
    dp = p[1] - p[0]
    k = np.atleast_1d(np.asarray(k, dtype=float))
    out = np.empty(k.shape + g.shape[:-1], dtype=complex)
    for i0 in range(0, k.size, 32):
        ks = k[i0:i0 + 32]
        out[i0:i0 + 32] = (np.exp(1j * np.outer(ks, p)) @ g.T * dp).reshape(ks.shape + g.shape[:-1])
    return out
