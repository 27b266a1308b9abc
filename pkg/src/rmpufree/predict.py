"""Exact and asymptotic analytic predictions: OTOCs and frame potentials.

Everything here is a finite sum over permutations. The Haar OTOC is the
two-fold Weingarten sum at full dimension D; the staircase ensemble's OTOC is
the same network repeated n times and folded into a chain of (k!) x (k!)
transfer matrices over the local dimension chi*d. Subleading (chi^-2 or D^-2)
coefficients come from the genus-one corrections: the Wg^(1) series term on
2-chains plus the geodesic-breaking permutation sums. Rational moments give
exact rational outputs throughout; floats only enter via float moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exactlin import mat_vec
from .freeprob import (
    cumulants_from_moments,
    free_otoc_prediction,
    partitioned_moment,
)
from .ncposet import (
    enumerate_genus_one_pairs,
    enumerate_multichains,
    kreweras,
    mobius,
    mobius_of,
)
from .symgroup import (
    cayley_distance,
    compose,
    cyclic,
    enumerate_sk,
    identity,
)
from .weingarten import (
    wg_class_values,
    wg_subleading_class_values,
    weingarten,
)


@dataclass(frozen=True)
class RmpuGeometry:
    """Staircase ensemble parameters: local dimension d, overlap exponent r
    (bond dimension chi = d^r), layer count n."""

    d: int
    r: int
    n: int
    variant: str = "staircase"

    def __post_init__(self):
        if self.d < 2 or self.r < 1 or self.n < 1:
            raise ValueError("require d >= 2, r >= 1, n >= 1")
        if self.variant not in ("staircase", "two_floor"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == "two_floor" and self.n < 2:
            raise ValueError("two_floor variant requires n >= 2")

    @property
    def chi(self):
        return self.d ** self.r

    @property
    def sites(self):
        return self.r + self.n

    @property
    def dim(self):
        return self.d ** (self.r + self.n)


@dataclass(frozen=True)
class OtocPrediction:
    value: float
    order_tag: str  # exact | leading | subleading
    error_scale: str = ""


def haar_otoc_exact(mA, mB, dim, k):
    """Exact Haar-averaged 2k-point OTOC at total dimension dim.

    (1/D) sum_{pi,sigma} Wg_{pi,sigma}(D,k) D^{#(pi)} <A>_pi
    D^{#(sigma^{-1} gamma)} <B>_{sigma^{-1} gamma}.
    """
    if dim <= k:
        raise ValueError(f"dim={dim} <= k={k}")
    values = wg_class_values(dim, k)
    perms = enumerate_sk(k)
    gamma = cyclic(k)
    va = [dim ** p.num_cycles() * partitioned_moment(mA, p) for p in perms]
    vb = [
        dim ** compose(s.inverse(), gamma).num_cycles()
        * partitioned_moment(mB, compose(s.inverse(), gamma))
        for s in perms
    ]
    total = 0
    for i, pi in enumerate(perms):
        if va[i] == 0:
            continue
        pinv = pi.inverse()
        row = 0
        for j, sigma in enumerate(perms):
            if vb[j]:
                row += values[compose(pinv, sigma).cycle_type()] * vb[j]
        total += va[i] * row
    return _div(total, dim)


def tensor_perm_trace(ops, p):
    """tr[(A_1 x ... x A_k) T_p] via the cycle factorization.

    Each cycle (c_1 ... c_m) of p contributes tr[A_{c_1} A_{c_m} ... A_{c_2}].
    """
    import numpy as np

    total = 1.0
    for cyc in p.cycles():
        prod = ops[cyc[0] - 1]
        for i in reversed(cyc[1:]):
            prod = prod @ ops[i - 1]
        total = total * np.trace(prod)
    return total


def haar_multi_otoc_exact(opsA, opsB, dim):
    """Haar average of (1/D) tr[A1_U B1 ... Ak_U Bk] for explicit matrices."""
    k = len(opsA)
    if len(opsB) != k:
        raise ValueError("need equally many A and B operators")
    if dim <= k:
        raise ValueError(f"dim={dim} <= k={k}")
    values = {t: float(v) for t, v in wg_class_values(dim, k).items()}
    perms = enumerate_sk(k)
    gamma = cyclic(k)
    ta = [tensor_perm_trace(opsA, p) for p in perms]
    tb = [tensor_perm_trace(opsB, compose(gamma, s.inverse())) for s in perms]
    total = 0.0
    for i, pi in enumerate(perms):
        if ta[i] == 0:
            continue
        pinv = pi.inverse()
        row = 0.0
        for j in range(len(perms)):
            if tb[j]:
                row += values[compose(pinv, perms[j]).cycle_type()] * tb[j]
        total += ta[i] * row
    return total / dim


def _div(x, y):
    if isinstance(x, (int, Fraction)):
        return Fraction(x, y) if isinstance(x, int) else x / y
    return x / y


def _rmpu_otoc_chain(mA, mB, d, chi, n, k):
    """Exact staircase OTOC as a transfer-matrix chain at bond dimension chi.

    chi is an arbitrary positive integer here (not necessarily a power of d);
    the public entry point goes through RmpuGeometry.
    """
    local = chi * d
    if local <= k:
        raise ValueError(f"local dimension chi*d={local} <= k={k}")
    values = wg_class_values(local, k)
    perms = enumerate_sk(k)
    gamma = cyclic(k)
    wg = [
        [values[compose(p.inverse(), q).cycle_type()] for q in perms]
        for p in perms
    ]
    va = [local ** p.num_cycles() * partitioned_moment(mA, p) for p in perms]
    vb = [
        local ** compose(s.inverse(), gamma).num_cycles()
        * partitioned_moment(mB, compose(s.inverse(), gamma))
        for s in perms
    ]
    if n > 1:
        bond = [
            [
                chi ** (k - cayley_distance(s, p))
                * d ** compose(s.inverse(), gamma).num_cycles()
                * d ** p.num_cycles()
                for p in perms
            ]
            for s in perms
        ]
    cur = mat_vec(wg, vb)
    for _ in range(n - 1):
        cur = mat_vec(wg, mat_vec(bond, cur))
    total = sum(a * c for a, c in zip(va, cur))
    return _div(total, chi * d ** n)


def rmpu_otoc_exact(mA, mB, geom, k):
    """Exact staircase-RMPU-averaged OTOC; A on the first r+1 sites, B on
    the last r+1 sites. Reduces to the Haar value at D = chi*d when n = 1."""
    if geom.variant != "staircase":
        raise ValueError("exact contraction implemented for the staircase variant")
    return _rmpu_otoc_chain(mA, mB, geom.d, geom.chi, geom.n, k)


def _partial_twirl(x, m, q, k):
    """E_U[(U (x) 1_q)^(t k-fold dag) x (U (x) 1_q)^(k-fold)] for Haar U on
    C^m; x is a dense operator on (C^m)^k (x) (C^q)^k with the m-factors
    leading. Standard two-fold Weingarten sum with partial traces."""
    import numpy as np

    from .weingarten import replica_permutation_matrix

    perms = enumerate_sk(k)
    values = wg_class_values(m, k)
    mk, qk = m ** k, q ** k
    xr = x.reshape(mk, qk, mk, qk)
    tmats = {p: replica_permutation_matrix(p, m) for p in perms}
    partials = {
        s: np.einsum("ab,bras->rs", tmats[s.inverse()], xr) for s in perms
    }
    out = np.zeros_like(x)
    for pi in perms:
        acc = np.zeros((qk, qk), dtype=complex)
        pi_inv = pi.inverse()
        for s in perms:
            acc += float(values[compose(pi_inv, s).cycle_type()]) * partials[s]
        out += np.kron(tmats[pi], acc)
    return out


def _gather_block(x, d, nsite, k, block):
    """Reorder a (d^nsite)^k replica operator so the chosen sites of every
    replica come first. Returns (reordered, m, q, undo)."""
    import numpy as np

    rest = [i for i in range(nsite) if i not in block]
    order = [rep * nsite + i for rep in range(k) for i in block] + [
        rep * nsite + i for rep in range(k) for i in rest
    ]
    total = nsite * k
    dim = d ** total
    xt = np.transpose(
        x.reshape([d] * (2 * total)), order + [total + o for o in order]
    ).reshape(dim, dim)
    inv = np.argsort(order)
    undo_perm = list(inv) + [total + int(i) for i in inv]

    def undo(y):
        return np.transpose(y.reshape([d] * (2 * total)), undo_perm).reshape(dim, dim)

    return xt, d ** len(block), d ** len(rest), undo


def rmpu_otoc_placed(geom, a_matrix, a_start, b_matrix, b_start, k):
    """Exact staircase OTOC for arbitrary single-block placements.

    Twirls A^(x)k through the staircase gate by gate with exact local
    Weingarten sums, then closes against B and the cyclic replica shift.
    Dense in the replica space, so limited to small dim^k; this is the
    reference for placement-dependent (light-cone) behaviour: when both
    observables attach to the same gate the result equals the Haar value at
    the single-gate dimension chi*d, while the worst-case placement (A on the
    first block, B on the last) equals the transfer-chain value.
    """
    import numpy as np

    from .weingarten import TWIRL_DIM_CAP, replica_permutation_matrix

    if geom.variant != "staircase":
        raise ValueError("placed contraction implemented for the staircase variant")
    d, r, n = geom.d, geom.r, geom.n
    nsite, dim = geom.sites, geom.dim
    if dim ** k > TWIRL_DIM_CAP:
        raise ValueError(f"replica dimension {dim ** k} exceeds cap {TWIRL_DIM_CAP}")

    def embed(mat, start):
        span = round(math.log(mat.shape[0], d))
        left, right = d ** (start - 1), d ** (nsite - start + 1 - span)
        if right < 1:
            raise ValueError("support does not fit the chain")
        return np.kron(np.eye(left), np.kron(np.asarray(mat, dtype=complex), np.eye(right)))

    def kron_power(mat):
        out = mat
        for _ in range(k - 1):
            out = np.kron(out, mat)
        return out

    rho = kron_power(embed(a_matrix, a_start))
    for g in range(1, n + 1):
        block = list(range(g - 1, g + r))
        xt, m, q, undo = _gather_block(rho, d, nsite, k, block)
        rho = undo(_partial_twirl(xt, m, q, k))
    closure = kron_power(embed(b_matrix, b_start)) @ replica_permutation_matrix(
        cyclic(k), dim
    )
    return float(np.real(np.trace(rho @ closure)) / dim)


def rmpu_otoc_leading(mA, mB, n, k):
    """Leading large-chi OTOC: the 2n-multichain Moebius sum.

    Evaluates sum over pi_1 <= sigma_1 <= ... <= sigma_n <= gamma of
    prod_i mu(pi_i, sigma_i) <A>_{pi_1} <B>_{sigma_n^{-1} gamma} and checks
    that the Moebius delta identity collapses it to the free prediction.
    """
    total = 0
    for chain in enumerate_multichains(k, 2 * n):
        term = partitioned_moment(mA, chain[0]) * partitioned_moment(
            mB, kreweras(chain[-1])
        )
        for i in range(n):
            term *= mobius(chain[2 * i], chain[2 * i + 1])
        total += term
    reference = free_otoc_prediction(mA, mB, k)
    if isinstance(total, (int, Fraction)) and isinstance(reference, (int, Fraction)):
        assert total == reference, "multichain sum failed to collapse"
    else:
        assert math.isclose(float(total), float(reference), rel_tol=1e-9, abs_tol=1e-12)
    return total


def subleading_coeff_haar(mA, mB, k):
    """c_k(A,B): the D^-2 coefficient of the Haar OTOC about the free value.

    Sum of the Wg^(1) series term over 2-chains plus the Moebius-weighted sum
    over pairs breaking the geodesic condition by exactly 2.
    """
    gamma = cyclic(k)
    wg1 = wg_subleading_class_values(k)
    total = 0
    for pi, sigma in enumerate_multichains(k, 2):
        total += (
            wg1[compose(pi.inverse(), sigma).cycle_type()]
            * partitioned_moment(mA, pi)
            * partitioned_moment(mB, kreweras(sigma))
        )
    for pi, sigma in enumerate_genus_one_pairs(k):
        total += (
            mobius(pi, sigma)
            * partitioned_moment(mA, pi)
            * partitioned_moment(mB, compose(sigma.inverse(), gamma))
        )
    return total


def subleading_coeff_haar_closed(mA, mB, k):
    """Closed-form c_k in free cumulants, k <= 4 (cross-check path)."""
    if k > 4:
        raise ValueError("closed forms available for k <= 4 only")
    if k == 1:
        return 0
    ka = cumulants_from_moments(list(mA[:k]))
    kb = cumulants_from_moments(list(mB[:k]))
    a1, a2 = ka[0], ka[1]
    b1, b2 = kb[0], kb[1]
    if k == 2:
        return -a2 * b2
    a3, b3 = ka[2], kb[2]
    if k == 3:
        return a3 * (-3 * b1 * b2 + b3) - 3 * a1 * a2 * (2 * b1 * b2 + b3)
    a4, b4 = ka[3], kb[3]
    return (
        a4 * (-6 * b1 ** 2 * b2 + b2 ** 2 + 4 * b1 * b3)
        + a2 ** 2 * (-10 * b1 ** 2 * b2 + b4)
        + 4 * a1 * a3 * (-5 * b1 ** 2 * b2 + b4)
        - 2
        * a1 ** 2
        * a2
        * (5 * (2 * b1 ** 2 * b2 + b2 ** 2 + 2 * b1 * b3) + 3 * b4)
    )


def _broken_chains(k, n, excess):
    """All (pi_1, sigma_1, ..., pi_n, sigma_n) in S_k^{2n} whose chained
    distance sum e -> pi_1 -> sigma_1 -> ... -> sigma_n -> gamma equals
    (k - 1) + excess. Depth-first with triangle-inequality pruning."""
    perms = enumerate_sk(k)
    e, gamma = identity(k), cyclic(k)
    budget = k - 1 + excess
    dist_g = {p: cayley_distance(p, gamma) for p in perms}
    chain = []
    out = []

    def extend(prev, used):
        if len(chain) == 2 * n:
            if used + dist_g[prev] == budget:
                out.append(tuple(chain))
            return
        for s in perms:
            u = used + cayley_distance(prev, s)
            if u + dist_g[s] <= budget:
                chain.append(s)
                extend(s, u)
                chain.pop()

    extend(e, 0)
    return out


def subleading_coeff_rmpu(mA, mB, n, d, k):
    """c_tilde_{k,n}(A,B): the chi^-2 coefficient of the staircase OTOC.

    First term: each of the n local Weingarten functions expanded to its
    series correction (a (chi d)^-2 per layer, hence the n/d^2 prefactor
    after the Moebius collapse). Second term: single breaking of the chained
    geodesic condition by 2, weighted by d^-g with g the summed per-layer
    excess dist(e,pi_i) + dist(pi_i,sigma_i) + dist(sigma_i,gamma) - (k-1).
    """
    gamma = cyclic(k)
    e = identity(k)
    wg1 = wg_subleading_class_values(k)
    first = 0
    for pi, sigma in enumerate_multichains(k, 2):
        first += (
            wg1[compose(pi.inverse(), sigma).cycle_type()]
            * partitioned_moment(mA, pi)
            * partitioned_moment(mB, kreweras(sigma))
        )
    first = first * Fraction(n, d * d)
    second = 0
    for chain in _broken_chains(k, n, 2):
        g_exp = 0
        coef = 1
        for i in range(n):
            pi, sigma = chain[2 * i], chain[2 * i + 1]
            coef *= mobius(pi, sigma)
            g_exp += (
                1
                - k
                + cayley_distance(e, pi)
                + cayley_distance(pi, sigma)
                + cayley_distance(sigma, gamma)
            )
        second += (
            Fraction(coef, d ** g_exp)
            * partitioned_moment(mA, chain[0])
            * partitioned_moment(mB, compose(chain[-1].inverse(), gamma))
        )
    return first + second


def subleading_coeff_rmpu_closed(mA, mB, n, d, k):
    """Closed-form c_tilde_{k,n} in free cumulants, 2 <= k <= 4."""
    if not 2 <= k <= 4:
        raise ValueError("closed forms available for 2 <= k <= 4 only")
    ka = cumulants_from_moments(list(mA[:k]))
    kb = cumulants_from_moments(list(mB[:k]))
    pref = -Fraction(n, d * d) + (n - 1)
    inner = Fraction(1, d ** (2 * n))
    a1, a2 = ka[0], ka[1]
    b1, b2 = kb[0], kb[1]
    if k == 2:
        return pref * a2 * b2
    a3, b3 = ka[2], kb[2]
    if k == 3:
        return (
            pref * (3 * a1 * a2 * (2 * b1 * b2 + b3) + 3 * a3 * b1 * b2)
            + inner * a3 * b3
        )
    a4, b4 = ka[3], kb[3]
    return pref * (
        6 * a4 * b1 ** 2 * b2
        + 2 * a2 ** 2 * b1 * (5 * b1 * b2 + 2 * b3)
        + 4 * a1 * a3 * (b2 * (5 * b1 ** 2 + b2) + 2 * b1 * b3)
        + 2 * a1 ** 2 * a2 * (10 * b1 ** 2 * b2 + 5 * b2 ** 2 + 10 * b1 * b3 + 3 * b4)
    ) + inner * (
        a4 * (b2 ** 2 + 4 * b1 * b3)
        + 4 * a1 * a3 * (b2 ** 2 + 2 * b1 * b3 + b4)
        + a2 ** 2 * (4 * b1 * b3 + b4)
    )


def rmpu_chi2_coefficient(mA, mB, d, n, k, base_chi=8, levels=5):
    """Extract the chi^-2 coefficient from the exact chain numerically.

    Richardson extrapolation of (C_R(chi) - C_FP) chi^2 over chi = base * 2^j
    in exact rational arithmetic; error decays like base_chi^-(levels+1)."""
    free = free_otoc_prediction(mA, mB, k)
    chis = [base_chi * 2 ** j for j in range(levels)]
    vals = [
        (_rmpu_otoc_chain(mA, mB, d, chi, n, k) - free) * chi ** 2 for chi in chis
    ]
    # Neville elimination of successive 1/chi powers.
    for order in range(1, levels):
        nxt = []
        for j in range(len(vals) - 1):
            ratio = Fraction(chis[j + order], chis[j])
            nxt.append((ratio * vals[j + 1] - vals[j]) / (ratio - 1))
        vals = nxt
    return vals[0]


def rmpu_otoc_nonlocal_leading(mA, mB, n, k):
    """Leading large-chi OTOC for product observables A^(x)N, B^(x)N.

    Every layer sees its own copy of A and B, so the multichain sum carries
    per-layer moment factors and no longer collapses to the free prediction.
    """
    total = 0
    for chain in enumerate_multichains(k, 2 * n):
        term = 1
        for i in range(n):
            pi, sigma = chain[2 * i], chain[2 * i + 1]
            term *= (
                mobius(pi, sigma)
                * partitioned_moment(mA, pi)
                * partitioned_moment(mB, kreweras(sigma))
            )
        total += term
    return total


def frame_potential_haar(k):
    """k!: the Haar frame potential."""
    return math.factorial(k)


FRAME_TRANSFER_CAP = 5


def frame_potential_rmpu_exact(geom, k):
    """Exact staircase frame potential by pair-space transfer contraction.

    The two independent staircases are folded simultaneously; the state after
    i layers is a (k!) x (k!) matrix V over permutation pairs, updated as
    V -> Wg (Gd o (Gchi (Gd o V) Gchi)) Wg and closed with the elementwise
    Gram overlap at local dimension chi*d ('o' is the elementwise product).
    """
    if geom.variant != "staircase":
        raise ValueError("frame potential contraction requires the staircase variant")
    if k > FRAME_TRANSFER_CAP:
        raise ValueError(f"k={k} exceeds transfer cap {FRAME_TRANSFER_CAP}")
    d, chi, n = geom.d, geom.chi, geom.n
    local = chi * d
    if local <= k:
        raise ValueError(f"local dimension {local} <= k={k}")
    perms = enumerate_sk(k)
    wg = weingarten(local, k)
    gd = gram_matrix(d, k)
    gchi = gram_matrix(chi, k)
    glocal = gram_matrix(local, k)
    v = wg
    for _ in range(n - 1):
        inner = _hadamard(gd, v)
        inner = _mat_mul(_mat_mul(gchi, inner), gchi)
        inner = _hadamard(gd, inner)
        v = _mat_mul(_mat_mul(wg, inner), wg)
    total = 0
    for i in range(len(perms)):
        vi, gi = v[i], glocal[i]
        total += sum(vi[j] * gi[j] for j in range(len(perms)))
    return total


def gram_matrix(dim, k):
    """Integer Gram matrix D^{k-dist} over canonical S_k order."""
    perms = enumerate_sk(k)
    return [
        [dim ** (k - cayley_distance(p, q)) for q in perms] for p in perms
    ]


def _hadamard(a, b):
    return [[x * y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def _mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    out = [[0] * p for _ in range(n)]
    for i in range(n):
        ai, oi = a[i], out[i]
        for t in range(m):
            v = ai[t]
            if v:
                bt = b[t]
                for j in range(p):
                    oi[j] += v * bt[j]
    return out


def frame_potential_rmpu_asymptotic(geom, k):
    """k! (1 + k(k-1)/(2 chi^2) (n - 1 - n/d^2 + d^-2n)): large-chi form."""
    d, chi, n = geom.d, geom.chi, geom.n
    bracket = n - 1 - Fraction(n, d * d) + Fraction(1, d ** (2 * n))
    return math.factorial(k) * (1 + Fraction(k * (k - 1), 2 * chi ** 2) * bracket)


def verify_frame_otoc_identity(dim=4, k=2):
    """Exhaustively check the frame-potential/OTOC sum rule for the Haar
    ensemble on two qubits: summing (C/D^2k)^2 over all Pauli-string
    assignments of the 2k slots must give k!/D^(2(k+1))."""
    import itertools
    import numpy as np

    if dim != 4 or k != 2:
        raise ValueError("exhaustive verification implemented for dim=4, k=2")
    paulis = _pauli_basis(2)
    values = {t: float(v) for t, v in wg_class_values(dim, k).items()}
    wg_ee = values[(1, 1)]
    wg_es = values[(2,)]
    # k = 2 specialization of haar_multi_otoc_exact: the A-side traces are
    # (tr A1 tr A2, tr[A1 A2]) for (e, swap), and the B side sees gamma
    # sigma^{-1}, i.e. the roles exchanged.
    tr1 = np.array([np.trace(p).real for p in paulis])
    tr2 = np.array(
        [[np.trace(p @ q).real for q in paulis] for p in paulis]
    )
    lhs = 0.0
    for ia1, ia2, ib1, ib2 in itertools.product(range(len(paulis)), repeat=4):
        ta_e = tr1[ia1] * tr1[ia2]
        ta_s = tr2[ia1, ia2]
        tb_e = tr2[ib1, ib2]
        tb_s = tr1[ib1] * tr1[ib2]
        c = (
            wg_ee * (ta_e * tb_e + ta_s * tb_s)
            + wg_es * (ta_e * tb_s + ta_s * tb_e)
        ) / dim
        lhs += (c / dim ** (2 * k)) ** 2
    rhs = frame_potential_haar(k) / dim ** (2 * (k + 1))
    rel = abs(lhs - rhs) / abs(rhs)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "relative_error": rel,
        "passed": bool(rel < 1e-10),
    }


def _pauli_basis(nqubits):
    """All 4^n Pauli strings on n qubits as dense matrices."""
    import itertools
    import numpy as np

    single = [
        np.eye(2, dtype=complex),
        np.array([[0, 1], [1, 0]], dtype=complex),
        np.array([[0, -1j], [1j, 0]], dtype=complex),
        np.array([[1, 0], [0, -1]], dtype=complex),
    ]
    out = []
    for combo in itertools.product(single, repeat=nqubits):
        m = combo[0]
        for f in combo[1:]:
            m = np.kron(m, f)
        out.append(m)
    return out


def fit_power_law(xs, ys):
    """Log-log least squares fit |y| ~ c x^alpha; returns (alpha, c, stderr)."""
    import numpy as np

    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.abs(np.asarray(ys, dtype=float)))
    coeffs, cov = np.polyfit(lx, ly, 1, cov=True)
    alpha, logc = coeffs
    return float(alpha), float(np.exp(logc)), float(np.sqrt(cov[0, 0]))
