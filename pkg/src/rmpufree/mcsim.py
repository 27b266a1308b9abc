"""Monte Carlo ground truth: dense Haar/staircase sampling and estimators.

Unitaries are sampled densely (cap D <= 256) with a counter-based RNG keyed
by (seed, sample index), so estimates are bit-reproducible and independent of
any parallel scheduling. The staircase applies gate i on sites i..i+r in
ascending order (gate 1 acts first); the two-floor variant follows with a
descending second staircase of n-1 gates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .predict import RmpuGeometry

DENSE_CAP = 256


@dataclass(frozen=True)
class EnsembleConfig:
    """A unitary distribution to sample: global Haar at dimension dim, or a
    staircase/two-floor ensemble described by geometry."""

    kind: str  # "global_haar" | "rmpu"
    seed: int
    samples: int
    geometry: RmpuGeometry | None = None
    dim: int | None = None

    def __post_init__(self):
        if self.kind not in ("global_haar", "rmpu"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.kind == "rmpu" and self.geometry is None:
            raise ValueError("rmpu ensemble requires a geometry")
        if self.kind == "global_haar" and self.dim is None:
            raise ValueError("global_haar ensemble requires dim")
        if self.total_dim > DENSE_CAP:
            raise ValueError(f"dimension {self.total_dim} exceeds dense cap {DENSE_CAP}")
        if self.samples < 2:
            raise ValueError("need at least 2 samples")

    @property
    def total_dim(self):
        return self.dim if self.kind == "global_haar" else self.geometry.dim

    @property
    def local_d(self):
        return self.total_dim if self.kind == "global_haar" else self.geometry.d

    @property
    def num_sites(self):
        return 1 if self.kind == "global_haar" else self.geometry.sites


@dataclass(frozen=True)
class ObservableSpec:
    """Hermitian observable on a contiguous block of sites, implicitly
    extended by identity on the rest of the chain."""

    matrix: np.ndarray = field(repr=False)
    start: int  # first support site, 1-based
    local_d: int

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("observable must be a square matrix")
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ValueError("observable must be Hermitian")

    @property
    def support_sites(self):
        return round(math.log(self.matrix.shape[0], self.local_d))

    @property
    def traceless(self):
        return abs(np.trace(self.matrix)) <= 1e-12

    @property
    def norm(self):
        return float(np.linalg.norm(self.matrix, 2))

    def embedded(self, num_sites):
        """Dense operator on the full chain of num_sites sites."""
        left = self.local_d ** (self.start - 1)
        right = self.local_d ** (num_sites - (self.start - 1) - self.support_sites)
        if right < 1 or left < 1:
            raise ValueError("support does not fit the chain")
        out = np.kron(np.eye(left), np.kron(self.matrix, np.eye(right)))
        return out.astype(complex)


@dataclass(frozen=True)
class EstimateRecord:
    mean: float
    stderr: float
    samples: int
    seed: int
    quantity: str


def derived_rng(seed, index):
    """Counter-based per-sample stream; reproducible regardless of ordering."""
    return np.random.Generator(np.random.Philox(key=[seed, index]))


def sample_haar_unitary(dim, rng):
    """Haar unitary via QR of a complex Ginibre matrix with phase fix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    phase = np.diagonal(r).copy()
    phase /= np.abs(phase)
    return q * phase


def _embed_gate(gate, first_site, d, num_sites, span):
    left = d ** (first_site - 1)
    right = d ** (num_sites - (first_site - 1) - span)
    return np.kron(np.eye(left), np.kron(gate, np.eye(right)))


def build_rmpu(geom, rng):
    """Dense staircase unitary U = E_1 E_2 ... E_n, gate E_i on sites i..i+r.

    As an operator product the last gate acts first on states; this is the
    orientation under which the exact transfer-matrix OTOC (A on the first
    r+1 sites, B on the last r+1) reproduces the Monte Carlo average. The
    two-floor variant appends a descending second staircase of n-1
    independent gates (U = E_1..E_n F_{n-1}..F_1), which restores the
    spatial symmetry the single staircase breaks.
    """
    d, r, n = geom.d, geom.r, geom.n
    num_sites = geom.sites
    span = r + 1
    local = d ** span
    u = np.eye(geom.dim, dtype=complex)
    for i in range(1, n + 1):
        gate = sample_haar_unitary(local, rng)
        u = u @ _embed_gate(gate, i, d, num_sites, span)
    if geom.variant == "two_floor":
        for j in range(n - 1, 0, -1):
            gate = sample_haar_unitary(local, rng)
            u = u @ _embed_gate(gate, j, d, num_sites, span)
    return u


def sample_unitary(config, index):
    rng = derived_rng(config.seed, index)
    if config.kind == "global_haar":
        return sample_haar_unitary(config.dim, rng)
    return build_rmpu(config.geometry, rng)


def mc_otoc(config, a_spec, b_spec, k):
    """Monte Carlo estimate of (1/D) tr[(U^dag A U B)^k]."""
    dim = config.total_dim
    a_full = a_spec.embedded(config.num_sites)
    b_full = b_spec.embedded(config.num_sites)
    vals = np.empty(config.samples)
    for i in range(config.samples):
        u = sample_unitary(config, i)
        au = u.conj().T @ a_full @ u
        m = au @ b_full
        prod = m
        for _ in range(k - 1):
            prod = prod @ m
        val = np.trace(prod) / dim
        if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
            raise AssertionError(f"OTOC estimate has imaginary part {val.imag}")
        vals[i] = val.real
    return _record(vals, config.seed, f"otoc_k{k}")


def mc_frame_potential(config, k):
    """Monte Carlo estimate of |tr(U V^dag)|^2k over disjoint (U, V) pairs.

    The estimator is heavy-tailed; a guidance note is attached to the record
    quantity tag when the relative standard error exceeds 10%.
    """
    vals = np.empty(config.samples)
    for i in range(config.samples):
        u = sample_unitary(config, 2 * i)
        v = sample_unitary(config, 2 * i + 1)
        w = abs(np.trace(u @ v.conj().T)) ** 2
        vals[i] = w ** k
    rec = _record(vals, config.seed, f"frame_potential_k{k}")
    if rec.stderr > 0.1 * abs(rec.mean):
        rec = EstimateRecord(
            rec.mean, rec.stderr, rec.samples, rec.seed,
            rec.quantity + " (relative stderr > 10%: increase samples)",
        )
    return rec


def _record(vals, seed, quantity):
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
    return EstimateRecord(mean, stderr, len(vals), seed, quantity)


def make_observable(kind, params, start, local_d):
    """Standard observable families used across the tests and CLI.

    kinds: 'pauli_string' (params: e.g. 'XZ', qubits only), 'random_hermitian'
    (params: dict with dim and seed; spectral norm scaled to 1), 'projector'
    (params: dict with dim and rank), 'shifted_projector' (rank-dim/2
    projector minus half the identity: spectrum +-1/2, traceless).
    """
    if kind == "pauli_string":
        if local_d != 2:
            raise ValueError("pauli_string observables require qubit sites")
        single = {
            "I": np.eye(2, dtype=complex),
            "X": np.array([[0, 1], [1, 0]], dtype=complex),
            "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
            "Z": np.array([[1, 0], [0, -1]], dtype=complex),
        }
        m = np.eye(1, dtype=complex)
        for ch in params:
            if ch not in single:
                raise ValueError(f"unknown Pauli letter {ch!r}")
            m = np.kron(m, single[ch])
    elif kind == "random_hermitian":
        rng = derived_rng(params["seed"], 0)
        dim = params["dim"]
        z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        m = (z + z.conj().T) / 2
        m = m / np.linalg.norm(m, 2)
    elif kind == "projector":
        dim, rank = params["dim"], params["rank"]
        m = np.diag([1.0 + 0j] * rank + [0.0 + 0j] * (dim - rank))
    elif kind == "shifted_projector":
        dim = params["dim"]
        rank = params.get("rank", dim // 2)
        m = np.diag([0.5 + 0j] * rank + [-0.5 + 0j] * (dim - rank))
    else:
        raise ValueError(f"unknown observable kind {kind!r}")
    return ObservableSpec(matrix=m, start=start, local_d=local_d)
