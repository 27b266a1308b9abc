"""Symmetric group machinery: permutations, cycles, Cayley distance, enumeration.

Everything downstream (Gram/Weingarten tables, the non-crossing partition
poset, transfer matrices) is indexed by elements of S_k, so this module fixes
the conventions once:

  * a permutation is stored as its image word, 1-based: ``images[i-1] = p(i)``;
  * composition is ``(a * b)(i) = a(b(i))`` (apply b first);
  * the canonical full cycle is ``gamma = (1 2 ... k)``, i.e. gamma(i) = i+1.
"""

from __future__ import annotations

import itertools
import math

# Full enumeration of S_k is capped here; counting-only loops may go higher.
ENUM_CAP = 8
COUNT_CAP = 10


class ReplicaMismatchError(ValueError):
    """Operands live in symmetric groups of different degree."""


class EnumerationCapError(ValueError):
    """Requested k exceeds the enumeration (or counting) cap."""


class Permutation:
    """An element of S_k, stored as a 1-based image word."""

    __slots__ = ("images", "_cycles")

    def __init__(self, images):
        images = tuple(images)
        k = len(images)
        if k < 1 or sorted(images) != list(range(1, k + 1)):
            raise ValueError(f"not a bijection on 1..{k}: {images!r}")
        self.images = images
        self._cycles = None

    @classmethod
    def _make(cls, images):
        # Internal fast path: caller guarantees `images` is a valid tuple.
        p = object.__new__(cls)
        p.images = images
        p._cycles = None
        return p

    @property
    def k(self):
        return len(self.images)

    def __call__(self, i):
        return self.images[i - 1]

    def __mul__(self, other):
        return compose(self, other)

    def inverse(self):
        inv = [0] * len(self.images)
        for i, v in enumerate(self.images):
            inv[v - 1] = i + 1
        return Permutation._make(tuple(inv))

    def cycles(self):
        """Disjoint cycles, each starting at its minimum, sorted by minimum."""
        if self._cycles is None:
            images = self.images
            seen = [False] * len(images)
            out = []
            for start in range(1, len(images) + 1):
                if seen[start - 1]:
                    continue
                cyc = []
                i = start
                while not seen[i - 1]:
                    seen[i - 1] = True
                    cyc.append(i)
                    i = images[i - 1]
                out.append(tuple(cyc))
            self._cycles = tuple(out)
        return self._cycles

    def num_cycles(self):
        return len(self.cycles())

    def cycle_type(self):
        """Cycle lengths in decreasing order (a partition of k)."""
        return tuple(sorted((len(c) for c in self.cycles()), reverse=True))

    def is_identity(self):
        return all(v == i + 1 for i, v in enumerate(self.images))

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def __repr__(self):
        return f"Permutation({cycle_string(self)!r})"


def identity(k):
    return Permutation._make(tuple(range(1, k + 1)))


def cyclic(k):
    """The canonical full cycle gamma = (1 2 ... k)."""
    return Permutation._make(tuple(range(2, k + 1)) + (1,))


def transposition(k, i, j):
    images = list(range(1, k + 1))
    images[i - 1], images[j - 1] = j, i
    return Permutation._make(tuple(images))


def compose(a, b):
    """(a o b)(i) = a(b(i)); b acts first."""
    if a.k != b.k:
        raise ReplicaMismatchError(f"cannot compose S_{a.k} with S_{b.k}")
    ai = a.images
    return Permutation._make(tuple(ai[v - 1] for v in b.images))


def num_cycles(p):
    return p.num_cycles()


def cayley_distance(a, b):
    """Minimal number of transpositions from a to b: k - #(a^{-1} b)."""
    if a.k != b.k:
        raise ReplicaMismatchError(f"cannot compare S_{a.k} with S_{b.k}")
    # #(a^{-1} b) without building the product: cycles of i -> a^{-1}(b(i)).
    ainv = [0] * a.k
    for i, v in enumerate(a.images):
        ainv[v - 1] = i + 1
    bi = b.images
    seen = [False] * a.k
    ncyc = 0
    for start in range(a.k):
        if seen[start]:
            continue
        ncyc += 1
        i = start
        while not seen[i]:
            seen[i] = True
            i = ainv[bi[i] - 1] - 1
    return a.k - ncyc


def adjacency_indicator(a, b, alpha):
    """1 iff a and b are at Cayley distance alpha, else 0."""
    return 1 if cayley_distance(a, b) == alpha else 0


_SK_CACHE = {}


def enumerate_sk(k):
    """All of S_k in lexicographic image-word order (deterministic)."""
    if k > ENUM_CAP:
        raise EnumerationCapError(f"k={k} exceeds enumeration cap {ENUM_CAP}")
    if k not in _SK_CACHE:
        _SK_CACHE[k] = tuple(
            Permutation._make(imgs)
            for imgs in itertools.permutations(range(1, k + 1))
        )
    return _SK_CACHE[k]


def rank(p):
    """Position of p in the lexicographic order of S_k (0-based)."""
    k = p.k
    pool = list(range(1, k + 1))
    r = 0
    for i, v in enumerate(p.images):
        j = pool.index(v)
        r += j * math.factorial(k - 1 - i)
        pool.pop(j)
    return r


def unrank(r, k):
    """Inverse of rank: the r-th permutation of S_k lexicographically."""
    if not 0 <= r < math.factorial(k):
        raise ValueError(f"rank {r} out of range for S_{k}")
    pool = list(range(1, k + 1))
    images = []
    for i in range(k):
        f = math.factorial(k - 1 - i)
        j, r = divmod(r, f)
        images.append(pool.pop(j))
    return Permutation._make(tuple(images))


def cycle_string(p):
    """Cycle-notation text, fixed points included, e.g. '(123)(4)'.

    Elements above 9 are space-separated inside each cycle.
    """
    sep = " " if p.k > 9 else ""
    return "".join("(" + sep.join(str(i) for i in c) + ")" for c in p.cycles())


def parse_cycles(text, k=None):
    """Parse cycle notation back into a Permutation.

    Single-digit elements may be juxtaposed ('(123)(4)'); multi-digit
    elements must be separated by spaces or commas. If k is omitted it is
    inferred from the largest element mentioned.
    """
    text = text.strip()
    if not text:
        raise ValueError("empty cycle string")
    cycles = []
    for chunk in text.replace(")(", ")|(").split("|"):
        chunk = chunk.strip()
        if not (chunk.startswith("(") and chunk.endswith(")")):
            raise ValueError(f"malformed cycle notation: {text!r}")
        body = chunk[1:-1].replace(",", " ")
        if " " in body.strip():
            elems = [int(t) for t in body.split()]
        else:
            elems = [int(ch) for ch in body.strip()]
        if not elems:
            raise ValueError(f"empty cycle in {text!r}")
        cycles.append(elems)
    flat = [i for c in cycles for i in c]
    if len(set(flat)) != len(flat):
        raise ValueError(f"repeated element in {text!r}")
    kmax = max(flat)
    if k is None:
        k = kmax
    elif kmax > k:
        raise ValueError(f"element {kmax} out of range for S_{k}")
    images = list(range(1, k + 1))
    for c in cycles:
        for a, b in zip(c, c[1:] + c[:1]):
            images[a - 1] = b
    p = Permutation(tuple(images))
    return p
