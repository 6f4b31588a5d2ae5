"""Numba kernels for the Monte Carlo engines.

All kernels draw randomness from an inline splitmix64 stream seeded per
shot, so results are a pure function of the seed regardless of how shots
are scheduled across workers.  Spin arrays are int8 with values +-1.

Energy convention (see cqie.schedule):
    E = bz * sum_i s_i - jz * sum_(ij) w_ij s_i s_j
"""

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(inline="always")
def _next_u64(state):
    state[0] = state[0] + _GOLDEN
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(inline="always")
def _next_uniform(state):
    return float(_next_u64(state) >> np.uint64(11)) * _INV53


@njit(cache=True, nogil=True)
def random_spins(n, seed):
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    out = np.empty(n, dtype=np.int8)
    for i in range(n):
        out[i] = 1 if _next_u64(state) & np.uint64(1) else -1
    return out


@njit(inline="always")
def _classical_sweep_inplace(spins, indptr, indices, weights, bz, jz, beta, state):
    n = spins.shape[0]
    for _ in range(n):
        site = int(_next_u64(state) % np.uint64(n))
        h = 0.0
        for e in range(indptr[site], indptr[site + 1]):
            h += weights[e] * spins[indices[e]]
        d_e = -2.0 * spins[site] * (bz - jz * h)
        if d_e <= 0.0 or _next_uniform(state) < np.exp(-beta * d_e):
            spins[site] = -spins[site]


@njit(cache=True, nogil=True)
def classical_evolve(spins, indptr, indices, weights, bz_t, jz_t, beta, seed):
    """Run one Metropolis sweep per entry of (bz_t, jz_t), in place."""
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    for step in range(bz_t.shape[0]):
        _classical_sweep_inplace(spins, indptr, indices, weights,
                                 bz_t[step], jz_t[step], beta, state)


@njit(cache=True, nogil=True)
def classical_shot(n, indptr, indices, weights, bz_t, jz_t, beta, seed):
    """Random initial state, then the full schedule; returns the final state."""
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    spins = np.empty(n, dtype=np.int8)
    for i in range(n):
        spins[i] = 1 if _next_u64(state) & np.uint64(1) else -1
    for step in range(bz_t.shape[0]):
        _classical_sweep_inplace(spins, indptr, indices, weights,
                                 bz_t[step], jz_t[step], beta, state)
    return spins


@njit(cache=True, nogil=True)
def classical_sample(spins, indptr, indices, weights, bz, jz, beta,
                     burn_in, n_samples, thinning, seed):
    """Equilibrium sampling at fixed parameters; returns (n_samples, n)."""
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    out = np.empty((n_samples, spins.shape[0]), dtype=np.int8)
    for _ in range(burn_in):
        _classical_sweep_inplace(spins, indptr, indices, weights, bz, jz, beta, state)
    for s in range(n_samples):
        for _ in range(thinning):
            _classical_sweep_inplace(spins, indptr, indices, weights, bz, jz, beta, state)
        out[s] = spins
    return out


@njit(inline="always")
def _pimc_sweep_inplace(slices, indptr, indices, weights, bx, bz, jz, beta, state):
    """One sweep over all N*P sites of the Suzuki-Trotter action.

    Intra-slice terms carry beta/P; adjacent slices couple with
    K_perp = -(1/2) ln tanh(beta*bx/P), periodic in the slice index.
    """
    n_slices, n = slices.shape
    beta_p = beta / n_slices
    k_perp = -0.5 * np.log(np.tanh(beta * bx / n_slices))
    total = n * n_slices
    for _ in range(total):
        r = int(_next_u64(state) % np.uint64(total))
        k = r // n
        site = r - k * n
        h = 0.0
        for e in range(indptr[site], indptr[site + 1]):
            h += weights[e] * slices[k, indices[e]]
        k_prev = n_slices - 1 if k == 0 else k - 1
        k_next = 0 if k == n_slices - 1 else k + 1
        s_adj = slices[k_prev, site] + slices[k_next, site]
        d_s = -2.0 * slices[k, site] * (beta_p * (bz - jz * h) - k_perp * s_adj)
        if d_s <= 0.0 or _next_uniform(state) < np.exp(-d_s):
            slices[k, site] = -slices[k, site]


@njit(cache=True, nogil=True)
def pimc_evolve(slices, indptr, indices, weights, bx_t, bz_t, jz_t, beta,
                seed, bx_tol):
    """One sweep per schedule step.  Steps with bx <= bx_tol delegate to
    per-slice classical dynamics at the full inverse temperature (the
    bx -> 0 limit, where every slice marginal is the classical Gibbs
    state and the inter-slice log-coupling is singular)."""
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    n_slices = slices.shape[0]
    for step in range(bx_t.shape[0]):
        if bx_t[step] <= bx_tol:
            for k in range(n_slices):
                _classical_sweep_inplace(slices[k], indptr, indices, weights,
                                         bz_t[step], jz_t[step], beta, state)
        else:
            _pimc_sweep_inplace(slices, indptr, indices, weights, bx_t[step],
                                bz_t[step], jz_t[step], beta, state)


@njit(cache=True, nogil=True)
def pimc_shot(n, n_slices, indptr, indices, weights, bx_t, bz_t, jz_t, beta,
              seed, bx_tol):
    """Random initial slices, full schedule, returns the slice-0 readout."""
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    slices = np.empty((n_slices, n), dtype=np.int8)
    for k in range(n_slices):
        for i in range(n):
            slices[k, i] = 1 if _next_u64(state) & np.uint64(1) else -1
    for step in range(bx_t.shape[0]):
        if bx_t[step] <= bx_tol:
            for k in range(n_slices):
                _classical_sweep_inplace(slices[k], indptr, indices, weights,
                                         bz_t[step], jz_t[step], beta, state)
        else:
            _pimc_sweep_inplace(slices, indptr, indices, weights, bx_t[step],
                                bz_t[step], jz_t[step], beta, state)
    return slices[0].copy()


@njit(cache=True, nogil=True)
def pimc_sample(slices, indptr, indices, weights, bx, bz, jz, beta,
                burn_in, n_samples, thinning, seed):
    """Equilibrium PIMC sampling at fixed parameters with bx > 0.

    Returns (slice-0 samples, transverse-magnetization estimator per
    sample).  The estimator averages tanh(a)/coth(a) over aligned and
    anti-aligned adjacent-slice pairs, a = beta*bx/P.
    """
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    n_slices, n = slices.shape
    a = beta * bx / n_slices
    tanh_a = np.tanh(a)
    coth_a = 1.0 / tanh_a
    out = np.empty((n_samples, n), dtype=np.int8)
    x_est = np.empty(n_samples, dtype=np.float64)
    for _ in range(burn_in):
        _pimc_sweep_inplace(slices, indptr, indices, weights, bx, bz, jz, beta, state)
    for s in range(n_samples):
        for _ in range(thinning):
            _pimc_sweep_inplace(slices, indptr, indices, weights, bx, bz, jz, beta, state)
        out[s] = slices[0]
        acc = 0.0
        for k in range(n_slices):
            k_next = 0 if k == n_slices - 1 else k + 1
            for i in range(n):
                if slices[k, i] == slices[k_next, i]:
                    acc += tanh_a
                else:
                    acc += coth_a
        x_est[s] = acc / (n_slices * n)
    return out, x_est
