"""Free-probability transforms on moment sequences.

A moment sequence is any sequence (m_1, ..., m_K) of normalized moments
m_j = <A^j> (exact Fractions or floats). Free cumulants are obtained by
Moebius inversion over the non-crossing partition poset, and the
free-independence mixed-moment formula gives the leading-order (large-D)
value of the 2k-point OTOC.
"""

from __future__ import annotations

from .ncposet import enumerate_multichains, enumerate_nc, kreweras, mobius
from .symgroup import cyclic, identity


def partitioned_moment(m, p):
    """<A>_p = product over cycles c of p of m_{|c|}."""
    out = 1
    for c in p.cycles():
        if len(c) > len(m):
            raise ValueError(
                f"cycle of length {len(c)} needs moment m_{len(c)}, have {len(m)}"
            )
        out *= m[len(c) - 1]
    return out


def cumulants_from_moments(m):
    """Free cumulants kappa_1..kappa_K via Moebius inversion on NC(k)."""
    kappas = []
    for k in range(1, len(m) + 1):
        gamma = cyclic(k)
        total = 0
        for sigma in enumerate_nc(k):
            total += partitioned_moment(m, sigma) * mobius(sigma, gamma)
        kappas.append(total)
    return kappas


def moments_from_cumulants(kappas):
    """m_k = sum over NC(k) of the cumulant product on the cycles."""
    moments = []
    for k in range(1, len(kappas) + 1):
        total = 0
        for pi in enumerate_nc(k):
            term = 1
            for c in pi.cycles():
                term *= kappas[len(c) - 1]
            total += term
        moments.append(total)
    return moments


def free_otoc_prediction(mA, mB, k):
    """Leading-order OTOC for freely independent A_U and B.

    C_FP = sum over 2-chains pi <= sigma <= gamma of
    mu(pi, sigma) <A>_pi <B>_{sigma^{-1} gamma}.
    """
    total = 0
    for pi, sigma in enumerate_multichains(k, 2):
        total += (
            mobius(pi, sigma)
            * partitioned_moment(mA, pi)
            * partitioned_moment(mB, kreweras(sigma))
        )
    return total


def matrix_moments(a, kmax):
    """Normalized moments <A^j>, j = 1..kmax, of an explicit matrix."""
    import numpy as np

    a = np.asarray(a)
    d = a.shape[0]
    out = []
    power = np.eye(d, dtype=a.dtype)
    for _ in range(kmax):
        power = power @ a
        val = np.trace(power) / d
        out.append(float(val.real) if np.iscomplexobj(power) else float(val))
    return out
