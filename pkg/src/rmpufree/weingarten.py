"""Gram and Weingarten matrices for the unitary group at finite dimension.

The Gram matrix G(D,k) has entries D^{k - dist(pi, sigma)} over the canonical
S_k order; the Weingarten matrix is its exact inverse (D > k keeps it
invertible). Both are class functions of pi^{-1} sigma, so the inversion is
done on a p(k) x p(k) cycle-type-reduced system in exact rational arithmetic
and then broadcast back to the full (k!) x (k!) table.

Also provides the 1/D series coefficients of Wg (leading = Moebius, first
subleading extracted symbolically) and the exact Haar twirl of an explicit
replica-space operator.
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache

from . import exactlin
from .ncposet import mobius_of
from .symgroup import (
    EnumerationCapError,
    Permutation,
    cayley_distance,
    compose,
    enumerate_sk,
    identity,
)

# Full (k!) x (k!) tables in exact arithmetic are kept to k <= 6; the
# class-reduced values remain available beyond that.
TABLE_CAP = 6
TWIRL_DIM_CAP = 4096


def gram(dim, k, mode="exact"):
    """Gram matrix G(D,k)[pi,sigma] = D^(k - dist(pi,sigma)), canonical order."""
    if k > TABLE_CAP:
        raise EnumerationCapError(f"k={k} exceeds full-table cap {TABLE_CAP}")
    perms = enumerate_sk(k)
    ints = [
        [dim ** (k - cayley_distance(p, q)) for q in perms] for p in perms
    ]
    if mode == "float":
        return [[float(x) for x in row] for row in ints]
    return ints


@lru_cache(maxsize=None)
def cycle_classes(k):
    """All cycle types (partitions of k) in a fixed canonical order."""
    seen = []
    for p in _partitions(k):
        seen.append(tuple(sorted(p, reverse=True)))
    return tuple(sorted(set(seen), reverse=True))


def _partitions(n, largest=None):
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def class_representative(cycle_type):
    """A canonical permutation with the given cycle type."""
    images = []
    start = 1
    for length in cycle_type:
        images.extend(list(range(start + 1, start + length)) + [start])
        start += length
    return Permutation(tuple(images))


@lru_cache(maxsize=None)
def _count_tensor(k):
    """counts[mu][lam][c] = #{tau of type lam : #(tau^{-1} g_mu) = c + 1}.

    mu, lam index cycle_classes(k); g_mu is the class representative. This is
    the only k!-sized loop behind the class-reduced Gram inversion.
    """
    classes = cycle_classes(k)
    cindex = {t: i for i, t in enumerate(classes)}
    reps = [class_representative(t) for t in classes]
    counts = [[[0] * k for _ in classes] for _ in classes]
    for tau in enumerate_sk(k):
        lam = cindex[tau.cycle_type()]
        tinv = tau.inverse()
        for mu, g in enumerate(reps):
            ncyc = compose(tinv, g).num_cycles()
            counts[mu][lam][ncyc - 1] += 1
    return counts


@lru_cache(maxsize=None)
def wg_class_values(dim, k):
    """Exact Weingarten values by cycle type of pi^{-1} sigma.

    Solves the class-reduced system sum_tau Wg(e,tau) G(tau, g_mu) =
    delta_{e, g_mu} over the p(k) unknowns h(lambda) = Wg by class.
    """
    if dim <= k:
        raise ValueError(f"dim={dim} <= k={k}: Gram matrix may be singular")
    classes = cycle_classes(k)
    counts = _count_tensor(k)
    a = [
        [
            Fraction(sum(counts[mu][lam][c] * dim ** (c + 1) for c in range(k)))
            for lam in range(len(classes))
        ]
        for mu in range(len(classes))
    ]
    rhs = [Fraction(1 if t == (1,) * k else 0) for t in classes]
    h = exactlin.solve(a, rhs)
    return {t: h[i] for i, t in enumerate(classes)}


def weingarten(dim, k, mode="exact"):
    """Weingarten matrix Wg(D,k), the exact inverse of gram(dim, k)."""
    if k > TABLE_CAP:
        raise EnumerationCapError(f"k={k} exceeds full-table cap {TABLE_CAP}")
    values = wg_class_values(dim, k)
    perms = enumerate_sk(k)
    invs = [p.inverse() for p in perms]
    out = [
        [values[compose(pi, q).cycle_type()] for q in perms] for pi in invs
    ]
    if mode == "float":
        return [[float(x) for x in row] for row in out]
    return out


def wg_entry(pi, sigma, dim):
    """Single exact Weingarten entry Wg_{pi,sigma}(dim, k)."""
    values = wg_class_values(dim, pi.k)
    return values[compose(pi.inverse(), sigma).cycle_type()]


@lru_cache(maxsize=None)
def wg_series(k, orders=None):
    """Exact large-D series of Wg by cycle type, in powers of x = 1/D.

    Writing the class-reduced system as D^k (I + A_1 x + ... + A_k x^k) u =
    D^k rhs (the x^0 coefficient matrix is the identity because only tau =
    g_mu contributes k cycles to tau^{-1} g_mu), the series of u solves a
    trivial recursion in exact rationals. Wg_{pi,sigma}(D) = D^{-k} u(x) with
    u_lambda = mu x^dist + Wg^(1) x^(dist+2) + ..., dist = k - #parts.

    Returns {cycle_type: [u_0, u_1, ...]} with orders terms (default k + 3).
    """
    if orders is None:
        orders = k + 3
    classes = cycle_classes(k)
    counts = _count_tensor(k)
    p = len(classes)
    coefs = [
        [[Fraction(counts[mu][lam][k - j - 1]) for lam in range(p)] for mu in range(p)]
        for j in range(k)
    ]
    rhs = [Fraction(1 if t == (1,) * k else 0) for t in classes]
    series = [rhs]
    for j in range(1, orders):
        nxt = [Fraction(0)] * p
        for i in range(1, min(j, k - 1) + 1):
            a, prev = coefs[i], series[j - i]
            for mu in range(p):
                nxt[mu] -= sum(a[mu][lam] * prev[lam] for lam in range(p) if prev[lam])
        series.append(nxt)
    out = {}
    for idx, t in enumerate(classes):
        dist = k - len(t)
        terms = [series[j][idx] for j in range(orders)]
        mob = mobius_of(class_representative(t))
        if any(terms[j] != 0 for j in range(min(dist, orders))) or (
            dist < orders and terms[dist] != mob
        ):
            raise AssertionError(f"series leading term disagrees with Moebius for {t}")
        out[t] = terms
    return out


def wg_subleading_class_values(k):
    """Wg^(1) by cycle type: the D^-(k + dist + 2) series coefficient."""
    series = wg_series(k)
    out = {}
    for t, terms in series.items():
        dist = k - len(t)
        out[t] = terms[dist + 2]
    return out


def wg_asymptotic_coeff(pi, sigma, k, order):
    """Series coefficient Wg^(order) for the pair (pi, sigma).

    order 0 is the Moebius function; order 1 is extracted symbolically;
    higher orders are not supported.
    """
    if pi.k != k or sigma.k != k:
        raise ValueError("permutation degree does not match k")
    rel = compose(pi.inverse(), sigma)
    if order == 0:
        return Fraction(mobius_of(rel))
    if order == 1:
        return wg_subleading_class_values(k)[rel.cycle_type()]
    raise ValueError(f"series order {order} not supported (only 0 and 1)")


def replica_index_map(p, dim):
    """Column map of T_p on the dim^k replica space.

    T_p |x_1 .. x_k> = |x_{p^{-1}(1)} .. x_{p^{-1}(k)}>; returns the integer
    array t with T_p e_j = e_{t[j]} (x_1 is the most significant digit).
    """
    import numpy as np

    k = p.k
    pinv = p.inverse().images
    idx = np.arange(dim ** k)
    digits = [(idx // dim ** (k - 1 - i)) % dim for i in range(k)]
    target = np.zeros_like(idx)
    for i in range(k):
        target = target * dim + digits[pinv[i] - 1]
    return target


def replica_permutation_matrix(p, dim):
    """Dense T_p as a 0/1 matrix (for tests and small twirls)."""
    import numpy as np

    t = replica_index_map(p, dim)
    out = np.zeros((len(t), len(t)))
    out[t, np.arange(len(t))] = 1.0
    return out


def haar_twirl_exact(x, dim, k):
    """Exact k-fold Haar twirl of the replica-space operator x.

    Returns sum_{pi,sigma} Wg_{pi,sigma} tr[x T_{sigma^{-1}}] T_pi without
    materializing any T as a full matrix: traces are fancy-indexed sums and
    the output is accumulated by fancy assignment.
    """
    import numpy as np

    if dim ** k > TWIRL_DIM_CAP:
        raise ValueError(f"replica dimension {dim ** k} exceeds cap {TWIRL_DIM_CAP}")
    x = np.asarray(x)
    perms = enumerate_sk(k)
    maps = [replica_index_map(p, dim) for p in perms]
    inv_index = {p: i for i, p in enumerate(perms)}
    traces = []
    rows = np.arange(dim ** k)
    for p in perms:
        t = maps[inv_index[p.inverse()]]
        # tr[x T] = sum_i x[i, t[i]] since column i of T has its 1 in row t[i]
        traces.append(x[rows, t].sum())
    values = wg_class_values(dim, k)
    out = np.zeros_like(x, dtype=complex)
    for i, pi in enumerate(perms):
        coef = 0.0
        pi_inv = pi.inverse()
        for j, sigma in enumerate(perms):
            coef += float(values[compose(pi_inv, sigma).cycle_type()]) * traces[j]
        out[maps[i], rows] += coef
    return out


def save_table(path, dim, k):
    """Write the exact Wg class values for (dim, k) as numerator/denominator JSON."""
    values = wg_class_values(dim, k)
    payload = {
        "dim": dim,
        "k": k,
        "classes": [
            {"cycle_type": list(t), "numerator": str(v.numerator), "denominator": str(v.denominator)}
            for t, v in values.items()
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)


def load_table(path):
    """Read back a table written by save_table; returns (dim, k, class dict)."""
    with open(path) as fh:
        payload = json.load(fh)
    values = {
        tuple(entry["cycle_type"]): Fraction(int(entry["numerator"]), int(entry["denominator"]))
        for entry in payload["classes"]
    }
    return payload["dim"], payload["k"], values
