"""Small exact linear algebra over Fractions.

Dense Gaussian elimination on lists of lists of Fraction (or int). Sizes here
are tiny — at most a few hundred — so simplicity beats cleverness; the point
is zero-residual arithmetic for the rational Weingarten tables and transfer
contractions.
"""

from __future__ import annotations

from fractions import Fraction


def mat_identity(n):
    return [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    out = [[Fraction(0)] * p for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for t in range(m):
            v = ai[t]
            if v:
                bt = b[t]
                for j in range(p):
                    oi[j] += v * bt[j]
    return out


def mat_vec(a, v):
    return [sum(ai[j] * v[j] for j in range(len(v))) for ai in a]


def vec_dot(u, v):
    return sum(x * y for x, y in zip(u, v))


def solve(a, b):
    """Solve a x = b exactly; b may be a vector or a matrix of columns."""
    n = len(a)
    vector = not isinstance(b[0], (list, tuple))
    aug = [
        [Fraction(x) for x in a[i]] + ([Fraction(b[i])] if vector else [Fraction(x) for x in b[i]])
        for i in range(n)
    ]
    w = len(aug[0])
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    if vector:
        return [row[n] for row in aug]
    return [row[n:w] for row in aug]


def invert(a):
    return solve(a, mat_identity(len(a)))


def is_identity(a):
    n = len(a)
    return all(a[i][j] == (1 if i == j else 0) for i in range(n) for j in range(n))
