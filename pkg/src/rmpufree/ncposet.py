"""The non-crossing partition poset inside S_k.

A permutation sigma lies on a geodesic between the identity e and the full
cycle gamma iff dist(e, sigma) + dist(sigma, gamma) = k - 1; those elements
are in bijection with the non-crossing partitions NC(k) (each cycle is a
block). This module provides membership, the Kreweras complement, the Moebius
function of the poset, geodesic multichains, and the enumeration of
"genus-one" pairs whose chain length exceeds the geodesic value by exactly 2.
"""

from __future__ import annotations

import math

from .symgroup import (
    COUNT_CAP,
    ENUM_CAP,
    EnumerationCapError,
    Permutation,
    cayley_distance,
    compose,
    cyclic,
    enumerate_sk,
    identity,
)


def catalan(n):
    """C_n = binom(2n, n) / (n+1), exact."""
    return math.comb(2 * n, n) // (n + 1)


def fuss_catalan(k):
    """Number of 2-chains in NC(k): binom(3k, k) / (2k+1), exact."""
    return math.comb(3 * k, k) // (2 * k + 1)


def geodesic_excess(a, b):
    """dist(e,a) + dist(a,b) + dist(b,gamma) - (k-1); non-negative and even."""
    k = a.k
    e, g = identity(k), cyclic(k)
    return (
        cayley_distance(e, a)
        + cayley_distance(a, b)
        + cayley_distance(b, g)
        - (k - 1)
    )


def is_noncrossing(p):
    """True iff p lies on a geodesic from e to the full cycle gamma."""
    k = p.k
    return cayley_distance(identity(k), p) + cayley_distance(p, cyclic(k)) == k - 1


_NC_CACHE = {}


def enumerate_nc(k):
    """All non-crossing elements of S_k, in canonical S_k order; |NC(k)| = C_k."""
    if k > ENUM_CAP:
        raise EnumerationCapError(f"k={k} exceeds enumeration cap {ENUM_CAP}")
    if k not in _NC_CACHE:
        _NC_CACHE[k] = tuple(p for p in enumerate_sk(k) if is_noncrossing(p))
    return _NC_CACHE[k]


def kreweras(s):
    """Kreweras complement s^{-1} gamma of a non-crossing element."""
    if not is_noncrossing(s):
        raise ValueError(f"{s!r} is crossing; Kreweras complement undefined")
    return compose(s.inverse(), cyclic(s.k))


def mobius_of(p):
    """Moebius coefficient of a single permutation.

    Factorizes over disjoint cycles; a single m-cycle contributes
    (-1)^{m-1} C_{m-1}.
    """
    out = 1
    for c in p.cycles():
        m = len(c)
        out *= (-1) ** (m - 1) * catalan(m - 1)
    return out


def mobius(a, b):
    """mu(a, b) = mu(a^{-1} b); the leading Weingarten coefficient."""
    return mobius_of(compose(a.inverse(), b))


def enumerate_multichains(k, m):
    """All m-tuples (p_1 <= ... <= p_m <= gamma) saturating the geodesic sum.

    Saturation of dist(e,p_1) + dist(p_1,p_2) + ... + dist(p_m,gamma) = k-1
    forces every consecutive step onto a geodesic, so candidates are drawn
    from NC(k) and extended depth-first with the geodesic constraint.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    nc = enumerate_nc(k)
    gamma = cyclic(k)
    dist_to_gamma = {p: cayley_distance(p, gamma) for p in nc}
    out = []
    chain = []

    def extend(prev):
        if len(chain) == m:
            out.append(tuple(chain))
            return
        d_prev = dist_to_gamma[prev] if chain else k - 1
        for s in nc:
            if cayley_distance(prev, s) + dist_to_gamma[s] == d_prev:
                chain.append(s)
                extend(s)
                chain.pop()

    extend(identity(k))
    return out


def enumerate_genus_one_pairs(k):
    """All pairs (p, s) with dist(e,p) + dist(p,s) + dist(s,gamma) = k+1.

    These are the pairs one step (genus one) beyond the 2-chain condition;
    brute force over S_k x S_k, feasible to k = 7.
    """
    if k > 7:
        raise EnumerationCapError(
            f"k={k}: pair enumeration is brute force over (k!)^2, capped at 7"
        )
    return list(_iter_genus_one_pairs(k))


def _iter_genus_one_pairs(k):
    perms = enumerate_sk(k)
    e, gamma = identity(k), cyclic(k)
    d_e = [cayley_distance(e, p) for p in perms]
    d_g = [cayley_distance(p, gamma) for p in perms]
    target = k + 1
    for i, p in enumerate(perms):
        rem_after_p = target - d_e[i]
        if rem_after_p < 0:
            continue
        pinv = p.inverse()
        pinv_images = pinv.images
        for j, s in enumerate(perms):
            need = rem_after_p - d_g[j]
            if need < 0 or need > k - 1:
                continue
            # dist(p, s) = k - #(p^{-1} s), inlined for the hot loop
            bi = s.images
            seen = [False] * k
            ncyc = 0
            for start in range(k):
                if seen[start]:
                    continue
                ncyc += 1
                t = start
                while not seen[t]:
                    seen[t] = True
                    t = pinv_images[bi[t] - 1] - 1
            if k - ncyc == need:
                yield (p, s)


def count_genus_one_pairs(k):
    """Streaming count of genus-one pairs (no materialization).

    Uses a vectorized pass for larger k. Practical runtime: seconds up to
    k = 7, minutes at k = 8; the nominal cap is COUNT_CAP.
    """
    if k > COUNT_CAP:
        raise EnumerationCapError(f"k={k} exceeds counting cap {COUNT_CAP}")
    if k <= 5:
        return sum(1 for _ in _iter_genus_one_pairs(k))
    return _count_genus_one_vectorized(k)


def _count_genus_one_vectorized(k):
    import numpy as np
    import itertools

    perms = np.array(list(itertools.permutations(range(k))), dtype=np.int64)
    nperm = perms.shape[0]
    ncyc = _num_cycles_rows(perms)
    d_e = k - ncyc
    # dist(p, gamma) = dist(e, p^{-1} gamma); gamma maps i -> i+1 mod k
    inv = np.empty_like(perms)
    rows = np.arange(nperm)[:, None]
    inv[rows, perms] = np.arange(k)[None, :]
    gamma = np.roll(np.arange(k), -1)
    d_g = k - _num_cycles_rows(inv[:, gamma])
    target = k + 1
    total = 0
    for i in range(nperm):
        need = target - d_e[i] - d_g
        ok = (need >= 0) & (need <= k - 1)
        if not ok.any():
            continue
        tau = inv[i][perms[ok]]
        total += int(np.count_nonzero(k - _num_cycles_rows(tau) == need[ok]))
    return total


def _num_cycles_rows(arr):
    """Cycle counts of many 0-based permutations stacked as rows."""
    import numpy as np

    n, k = arr.shape
    cur = np.broadcast_to(np.arange(k), (n, k)).copy()
    orbit_min = cur.copy()
    for _ in range(k):
        cur = np.take_along_axis(arr, cur, axis=1)
        np.minimum(orbit_min, cur, out=orbit_min)
    return (orbit_min == np.arange(k)).sum(axis=1)
