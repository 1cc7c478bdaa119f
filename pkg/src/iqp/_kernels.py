"""Compiled enumeration kernels.

All kernels split the enumeration into independent segments indexed in a
fixed order. Integer results are reduced order-free; float results are summed
per fixed-size chunk and the chunk sums are combined pairwise in index order,
so outputs do not depend on the thread count.
"""

import warnings

import numpy as np
from numba import njit, prange, uint64

# numba probes an outdated system TBB and falls back to another layer on its own
warnings.filterwarnings("ignore", message="The TBB threading layer")

FLOAT_CHUNK_LOG2 = 14


@njit(cache=True, inline="always")
def _popcount64(x):
    x = x - ((x >> uint64(1)) & uint64(0x5555555555555555))
    x = (x & uint64(0x3333333333333333)) + ((x >> uint64(2)) & uint64(0x3333333333333333))
    x = (x + (x >> uint64(4))) & uint64(0x0F0F0F0F0F0F0F0F)
    return (x * uint64(0x0101010101010101)) >> uint64(56)


@njit(cache=True, inline="always")
def _ctz(x):
    c = 0
    while (x & 1) == 0:
        x >>= 1
        c += 1
    return c


@njit(cache=True)
def pairwise_sum(a):
    """Pairwise sum in index order; the tree shape depends only on len(a)."""
    m = a.shape[0]
    if m == 0:
        return 0j
    if m <= 8:
        s = 0j
        for i in range(m):
            s += a[i]
        return s
    h = m // 2
    return pairwise_sum(a[:h]) + pairwise_sum(a[h:])


# ---------------------------------------------------------------------------
# gap of a degree-3 F2 polynomial

@njit(cache=True)
def _reseed(h, H, low_word, high, n_high, W_out, D, DD):
    """Evaluate f and its first/second high-variable derivatives at high assignment h."""
    W = uint64(0)
    for u in range(H):
        D[u] = uint64(0)
        for w in range(H):
            DD[u, w] = uint64(0)
    for m in range(low_word.shape[0]):
        k = n_high[m]
        word = low_word[m]
        # bits of the monomial's high variables that are currently 0
        missing = 0
        miss_idx0 = -1
        miss_idx1 = -1
        for a in range(k):
            v = high[m, a]
            if (h >> v) & 1 == 0:
                if missing == 0:
                    miss_idx0 = v
                else:
                    miss_idx1 = v
                missing += 1
        if missing == 0:
            W ^= word
        # D[v]: monomials containing v whose other high vars are all set
        for a in range(k):
            v = high[m, a]
            others_set = missing == 0 or (missing == 1 and miss_idx0 == v)
            if others_set:
                D[v] ^= word
        # DD[u, w]: monomials containing u, w with the remaining high vars set
        for a in range(k):
            for b in range(a + 1, k):
                u = high[m, a]
                w = high[m, b]
                ok = True
                if missing == 1:
                    ok = miss_idx0 == u or miss_idx0 == w
                elif missing == 2:
                    ok = (miss_idx0 == u and miss_idx1 == w) or (miss_idx0 == w and miss_idx1 == u)
                elif missing == 3:
                    ok = False
                if ok:
                    DD[u, w] ^= word
                    DD[w, u] ^= word
    W_out[0] = W


@njit(cache=True, parallel=True)
def gap_gray_kernel(H, lanes, low_word, high, n_high, tri_ptr, tri_u, tri_w, tri_word, n_seg_log2):
    """Signed gap of f over 2**H high assignments x ``lanes`` packed low assignments.

    Monomial m contributes ``low_word[m]`` (its truth table over the packed low
    variables) whenever its high variables high[m, :n_high[m]] are all 1. The
    high assignments are visited in Gray-code order; each step flips one
    variable v and updates f, its derivatives D[u] and second derivatives
    DD[u, w] incrementally. Third derivatives are constant and are stored per v
    as the pair lists tri_*[tri_ptr[v]:tri_ptr[v+1]].
    """
    lane_mask = uint64(0xFFFFFFFFFFFFFFFF) if lanes == 64 else (uint64(1) << uint64(lanes)) - uint64(1)
    n_seg = 1 << n_seg_log2
    seg_len = (1 << H) >> n_seg_log2
    partial = np.zeros(n_seg, dtype=np.int64)
    for s in prange(n_seg):
        D = np.zeros(max(H, 1), dtype=np.uint64)
        DD = np.zeros((max(H, 1), max(H, 1)), dtype=np.uint64)
        Wbox = np.zeros(1, dtype=np.uint64)
        g0 = s * seg_len
        _reseed(g0 ^ (g0 >> 1), H, low_word, high, n_high, Wbox, D, DD)
        W = Wbox[0]
        acc = 0
        for g in range(g0, g0 + seg_len):
            acc += lanes - 2 * np.int64(_popcount64(W & lane_mask))
            if g + 1 == g0 + seg_len:
                break
            v = _ctz(g + 1)
            W ^= D[v]
            for u in range(H):
                D[u] ^= DD[u, v]
            for p in range(tri_ptr[v], tri_ptr[v + 1]):
                u = tri_u[p]
                w = tri_w[p]
                DD[u, w] ^= tri_word[p]
                DD[w, u] ^= tri_word[p]
        partial[s] = acc
    return partial.sum()


# ---------------------------------------------------------------------------
# diagonal-phase histogram for amplitude sums

@njit(cache=True, parallel=True)
def phase_histogram(n, masks, units, yprime, n_seg_log2):
    """hist[k] = #{x : phase units of D(x) + 8*(x.y') == k mod 16}."""
    n_seg = 1 << n_seg_log2
    seg_len = (1 << n) >> n_seg_log2
    hist = np.zeros((n_seg, 16), dtype=np.int64)
    G = masks.shape[0]
    for s in prange(n_seg):
        start = s * seg_len
        for x in range(start, start + seg_len):
            e = 0
            for g in range(G):
                if (x & masks[g]) == masks[g]:
                    e += units[g]
            par = _popcount64(uint64(x & yprime)) & uint64(1)
            e += 8 * np.int64(par)
            hist[s, e & 15] += 1
    return hist.sum(axis=0)


# ---------------------------------------------------------------------------
# Ising partition function via Gray-code spin flips

@njit(cache=True)
def _ising_seed(x, n, W, v):
    """Energy and local fields at spin configuration z_i = 1 - 2*bit_i(x)."""
    z = np.empty(n, dtype=np.int64)
    for i in range(n):
        z[i] = 1 - 2 * ((x >> i) & 1)
    field = np.empty(n, dtype=np.int64)
    E = 0
    for i in range(n):
        f = v[i]
        for j in range(n):
            if j != i:
                f += W[i, j] * z[j]
        field[i] = f
        E += v[i] * z[i]
        for j in range(i + 1, n):
            E += W[i, j] * z[i] * z[j]
    return E, z, field


@njit(cache=True)
def _ising_flip(k, n, W, z, field, E):
    zk = z[k]
    E -= 2 * zk * field[k]
    for j in range(n):
        if j != k:
            field[j] -= 2 * W[j, k] * zk
    z[k] = -zk
    return E


@njit(cache=True, parallel=True)
def ising_histogram(n, W, v, two_t, n_seg_log2):
    """hist[e] = #{z : energy(z) == e mod two_t}."""
    n_seg = 1 << n_seg_log2
    seg_len = (1 << n) >> n_seg_log2
    hist = np.zeros((n_seg, two_t), dtype=np.int64)
    for s in prange(n_seg):
        g0 = s * seg_len
        E, z, field = _ising_seed(g0 ^ (g0 >> 1), n, W, v)
        for g in range(g0, g0 + seg_len):
            hist[s, E % two_t] += 1
            if g + 1 == g0 + seg_len:
                break
            E = _ising_flip(_ctz(g + 1), n, W, z, field, E)
    return hist.sum(axis=0)


@njit(cache=True)
def ising_block_table(L, W, v, table):
    """T[h] = sum over the first L spins of table[E_low + sum_i z_i h_i], h in radix len(table)."""
    two_t = table.shape[0]
    size = 1
    for _ in range(L):
        size *= two_t
    T = np.zeros(size, dtype=np.complex128)
    e_low = np.zeros(1 << L, dtype=np.int64)
    for x in range(1 << L):
        E = 0
        for i in range(L):
            zi = 1 - 2 * ((x >> i) & 1)
            E += v[i] * zi
            for j in range(i + 1, L):
                E += W[i, j] * zi * (1 - 2 * ((x >> j) & 1))
        e_low[x] = E
    for idx in range(size):
        r = idx
        acc = 0j
        hs = np.empty(L, dtype=np.int64)
        for i in range(L):
            hs[i] = r % two_t
            r //= two_t
        for x in range(1 << L):
            E = e_low[x]
            for i in range(L):
                E += (1 - 2 * ((x >> i) & 1)) * hs[i]
            acc += table[E % two_t]
        T[idx] = acc
    return T


@njit(cache=True)
def _block_seed(x, n, L, W, v):
    """High-spin state at high assignment x: energy, high fields and cross fields on the low spins."""
    H = n - L
    z = np.empty(n, dtype=np.int64)
    for i in range(L):
        z[i] = 0
    for a in range(H):
        z[L + a] = 1 - 2 * ((x >> a) & 1)
    field = np.zeros(n, dtype=np.int64)
    E = 0
    for i in range(n):
        f = v[i] if i >= L else 0
        for j in range(L, n):
            if j != i:
                f += W[i, j] * z[j]
        field[i] = f
    for i in range(L, n):
        E += v[i] * z[i]
        for j in range(i + 1, n):
            E += W[i, j] * z[i] * z[j]
    return E, z, field


@njit(cache=True, parallel=True)
def ising_float_chunks(n, W, v, table, L):
    """Per-chunk complex sums of Z, enumerating the high n - L spins in Gray order.

    The first L spins are summed out through ``ising_block_table``; each high
    assignment contributes table[E_high] * T[cross fields on the low spins].
    """
    two_t = table.shape[0]
    T = ising_block_table(L, W, v, table)
    H = n - L
    chunk_log2 = min(FLOAT_CHUNK_LOG2, H)
    n_chunk = 1 << (H - chunk_log2)
    chunk_len = 1 << chunk_log2
    sums = np.zeros(n_chunk, dtype=np.complex128)
    for c in prange(n_chunk):
        g0 = c * chunk_len
        E, z, field = _block_seed(g0 ^ (g0 >> 1), n, L, W, v)
        acc = 0j
        for g in range(g0, g0 + chunk_len):
            idx = 0
            for i in range(L - 1, -1, -1):
                idx = idx * two_t + field[i] % two_t
            acc += table[E % two_t] * T[idx]
            if g + 1 == g0 + chunk_len:
                break
            k = L + _ctz(g + 1)
            zk = z[k]
            E -= 2 * zk * field[k]
            for j in range(n):
                if j != k:
                    field[j] -= 2 * W[j, k] * zk
            z[k] = -zk
        sums[c] = acc
    return sums
