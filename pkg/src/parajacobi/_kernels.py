"""Compiled inner loops for long recurrence streams.

Every kernel takes plain float64 coefficient arrays so the compiled code is
shared across models. The three-term step for generalized eigenvectors is

    u_{n+1} = ((x - b_n) u_n - a_{n-1} u_{n-1}) / a_n

with a_{-1} taken as 1 so that the pair (eta_1, eta_2) seeds (u_{-1}, u_0).
Magnitude guards trip once values pass 1e200; callers translate the flag
into a growth-regime error.
"""
import numpy as np
from numba import njit

GUARD = 1e200


@njit(cache=True)
def stream_checkpoints(a, b, xs, ns, eta1, eta2):
    """Pairs (u_{n-1}, u_n) at the sorted checkpoint indices ns, per grid point.

    Returns (out, bad) with out[k, 0|1, ix] the pair at ns[k] for xs[ix] and
    bad[ix] True when the magnitude guard tripped before the last checkpoint.
    """
    m = xs.shape[0]
    k = ns.shape[0]
    out = np.zeros((k, 2, m))
    bad = np.zeros(m, np.bool_)
    if k == 0:
        return out, bad
    nmax = ns[k - 1]
    for ix in range(m):
        x = xs[ix]
        up = eta1
        uc = eta2
        ptr = 0
        for n in range(nmax + 1):
            while ptr < k and ns[ptr] == n:
                out[ptr, 0, ix] = up
                out[ptr, 1, ix] = uc
                ptr += 1
            if ptr >= k:
                break
            am1 = 1.0 if n == 0 else a[n - 1]
            un = ((x - b[n]) * uc - am1 * up) / a[n]
            up = uc
            uc = un
            if (n & 255) == 0 and not (abs(uc) < GUARD):
                bad[ix] = True
                break
    return out, bad


@njit(cache=True)
def cd_kernel_matrix(a, b, xs, nmax):
    """Christoffel-Darboux matrix K[i, j] = sum_{n<=nmax} p_n(xs[i]) p_n(xs[j]).

    Kahan-compensated accumulation; the sum has nmax comparable-magnitude
    terms, so plain accumulation error would grow linearly with nmax.
    """
    m = xs.shape[0]
    K = np.zeros((m, m))
    C = np.zeros((m, m))
    up = np.zeros(m)
    uc = np.ones(m)
    bad = False
    for n in range(nmax + 1):
        for i in range(m):
            pi = uc[i]
            for j in range(i, m):
                y = pi * uc[j] - C[i, j]
                t = K[i, j] + y
                C[i, j] = (t - K[i, j]) - y
                K[i, j] = t
        if n == nmax:
            break
        am1 = 1.0 if n == 0 else a[n - 1]
        for i in range(m):
            un = ((xs[i] - b[n]) * uc[i] - am1 * up[i]) / a[n]
            up[i] = uc[i]
            uc[i] = un
        if (n & 255) == 0:
            for i in range(m):
                if not (abs(uc[i]) < GUARD):
                    bad = True
        if bad:
            break
    for i in range(m):
        for j in range(i + 1, m):
            K[j, i] = K[i, j]
    return K, bad


@njit(cache=True)
def diag_square_sum(a, b, x, nmax):
    """Kahan-compensated sum of p_n(x)^2 for n <= nmax at a single point."""
    s = 0.0
    c = 0.0
    up = 0.0
    uc = 1.0
    for n in range(nmax + 1):
        y = uc * uc - c
        t = s + y
        c = (t - s) - y
        s = t
        if n == nmax:
            break
        am1 = 1.0 if n == 0 else a[n - 1]
        un = ((x - b[n]) * uc - am1 * up) / a[n]
        up = uc
        uc = un
        if (n & 255) == 0 and not (abs(uc) < GUARD):
            return s, True
    return s, False


@njit(cache=True)
def compensated_sum(values):
    """Kahan sum of a 1-d array."""
    s = 0.0
    c = 0.0
    for i in range(values.shape[0]):
        y = values[i] - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


def warm_up():
    """Trigger compilation of all kernels on tiny inputs."""
    a = np.ones(8)
    b = np.zeros(8)
    xs = np.array([0.1])
    stream_checkpoints(a, b, xs, np.array([2, 4], dtype=np.int64), 0.0, 1.0)
    cd_kernel_matrix(a, b, xs, 4)
    diag_square_sum(a, b, 0.1, 4)
    compensated_sum(a)
