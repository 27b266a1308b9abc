import math

import numpy as np
import pytest

from rmpufree.freeprob import free_otoc_prediction, matrix_moments
from rmpufree.predict import (
    RmpuGeometry,
    fit_power_law,
    frame_potential_haar,
    haar_otoc_exact,
    rmpu_otoc_exact,
)
from rmpufree.mcsim import (
    DENSE_CAP,
    EnsembleConfig,
    ObservableSpec,
    build_rmpu,
    derived_rng,
    make_observable,
    mc_frame_potential,
    mc_otoc,
    sample_haar_unitary,
    sample_unitary,
)


def test_config_validation():
    with pytest.raises(ValueError):
        EnsembleConfig(kind="brickwork", seed=0, samples=10, dim=4)
    with pytest.raises(ValueError):
        EnsembleConfig(kind="rmpu", seed=0, samples=10)
    with pytest.raises(ValueError):
        EnsembleConfig(kind="global_haar", seed=0, samples=10)
    with pytest.raises(ValueError):
        EnsembleConfig(kind="global_haar", seed=0, samples=1, dim=4)
    with pytest.raises(ValueError):
        EnsembleConfig(kind="global_haar", seed=0, samples=10, dim=DENSE_CAP * 2)


def test_observable_validation():
    with pytest.raises(ValueError):
        ObservableSpec(matrix=np.array([[0, 1], [0, 0]]), start=1, local_d=2)
    with pytest.raises(ValueError):
        ObservableSpec(matrix=np.ones((2, 3)), start=1, local_d=2)
    spec = make_observable("pauli_string", "XZ", start=1, local_d=2)
    assert spec.support_sites == 2
    assert spec.traceless
    assert spec.norm == pytest.approx(1.0)
    emb = spec.embedded(3)
    assert emb.shape == (8, 8)
    with pytest.raises(ValueError):
        spec.embedded(1)


def test_make_observable_kinds():
    with pytest.raises(ValueError):
        make_observable("pauli_string", "XQ", start=1, local_d=2)
    with pytest.raises(ValueError):
        make_observable("pauli_string", "X", start=1, local_d=3)
    with pytest.raises(ValueError):
        make_observable("unknown", {}, start=1, local_d=2)
    proj = make_observable("projector", {"dim": 4, "rank": 2}, start=1, local_d=2)
    assert np.trace(proj.matrix) == 2
    shifted = make_observable("shifted_projector", {"dim": 4}, start=1, local_d=2)
    assert shifted.traceless
    assert set(np.diag(shifted.matrix).real) == {0.5, -0.5}
    rh = make_observable("random_hermitian", {"dim": 4, "seed": 9}, start=1, local_d=2)
    assert rh.norm == pytest.approx(1.0)


def test_haar_sample_is_unitary():
    u = sample_haar_unitary(8, derived_rng(0, 0))
    assert np.allclose(u @ u.conj().T, np.eye(8), atol=1e-12)


def test_derived_rng_streams_are_reproducible_and_distinct():
    a = derived_rng(5, 3).standard_normal(4)
    b = derived_rng(5, 3).standard_normal(4)
    c = derived_rng(5, 4).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_build_rmpu_is_unitary_both_variants():
    for variant in ("staircase", "two_floor"):
        geom = RmpuGeometry(d=2, r=1, n=3, variant=variant)
        u = build_rmpu(geom, derived_rng(1, 0))
        assert u.shape == (16, 16)
        assert np.allclose(u @ u.conj().T, np.eye(16), atol=1e-12)


def test_seed_determinism():
    geom = RmpuGeometry(d=2, r=1, n=2)
    config = EnsembleConfig(kind="rmpu", seed=3, samples=50, geometry=geom)
    a = make_observable("random_hermitian", {"dim": 4, "seed": 1}, start=1, local_d=2)
    b = make_observable("random_hermitian", {"dim": 4, "seed": 2}, start=2, local_d=2)
    r1 = mc_otoc(config, a, b, 2)
    r2 = mc_otoc(config, a, b, 2)
    assert r1 == r2
    # sample order must not matter for any single unitary
    u5 = sample_unitary(config, 5)
    _ = sample_unitary(config, 0)
    assert np.array_equal(u5, sample_unitary(config, 5))


def test_haar_left_invariance():
    # two-sample Kolmogorov-Smirnov on |tr U|^2 for U vs V U at fixed V
    dim, nsamp = 8, 400
    v = sample_haar_unitary(dim, derived_rng(99, 0))
    tr_u = np.array(
        [
            abs(np.trace(sample_haar_unitary(dim, derived_rng(7, i)))) ** 2
            for i in range(nsamp)
        ]
    )
    tr_vu = np.array(
        [
            abs(np.trace(v @ sample_haar_unitary(dim, derived_rng(8, i)))) ** 2
            for i in range(nsamp)
        ]
    )
    both = np.sort(np.concatenate([tr_u, tr_vu]))
    cdf_u = np.searchsorted(np.sort(tr_u), both, side="right") / nsamp
    cdf_vu = np.searchsorted(np.sort(tr_vu), both, side="right") / nsamp
    ks = np.max(np.abs(cdf_u - cdf_vu))
    # critical value at significance 0.01 for equal sample sizes
    critical = 1.628 * math.sqrt(2 / nsamp)
    assert ks < critical


def test_mc_otoc_matches_haar_oracle():
    dim, k = 8, 2
    config = EnsembleConfig(kind="global_haar", seed=21, samples=4000, dim=dim)
    a = make_observable("random_hermitian", {"dim": dim, "seed": 31}, start=1, local_d=dim)
    b = make_observable("random_hermitian", {"dim": dim, "seed": 32}, start=1, local_d=dim)
    rec = mc_otoc(config, a, b, k)
    exact = float(
        haar_otoc_exact(matrix_moments(a.matrix, k), matrix_moments(b.matrix, k), dim, k)
    )
    assert abs(rec.mean - exact) <= 4 * rec.stderr


def test_mc_otoc_matches_staircase_transfer_value():
    geom = RmpuGeometry(d=2, r=1, n=2)
    config = EnsembleConfig(kind="rmpu", seed=17, samples=4000, geometry=geom)
    k = 2
    a = make_observable("random_hermitian", {"dim": 4, "seed": 41}, start=1, local_d=2)
    b = make_observable("random_hermitian", {"dim": 4, "seed": 42}, start=2, local_d=2)
    rec = mc_otoc(config, a, b, k)
    exact = float(
        rmpu_otoc_exact(
            matrix_moments(a.matrix, k), matrix_moments(b.matrix, k), geom, k
        )
    )
    assert abs(rec.mean - exact) <= 4 * rec.stderr


def test_out_of_cone_factorization_is_deterministic():
    # A on the last site, B on the first: the staircase cannot connect them,
    # so every sample returns exactly <A^k><B^k>
    geom = RmpuGeometry(d=2, r=1, n=2)
    config = EnsembleConfig(kind="rmpu", seed=23, samples=20, geometry=geom)
    k = 2
    a = make_observable("random_hermitian", {"dim": 2, "seed": 51}, start=3, local_d=2)
    b = make_observable("random_hermitian", {"dim": 2, "seed": 52}, start=1, local_d=2)
    rec = mc_otoc(config, a, b, k)
    product = matrix_moments(a.matrix, k)[k - 1] * matrix_moments(b.matrix, k)[k - 1]
    assert rec.stderr < 1e-12
    assert rec.mean == pytest.approx(product, abs=1e-12)


def test_two_floor_restores_placement_symmetry():
    geom = RmpuGeometry(d=2, r=1, n=2, variant="two_floor")
    k = 2
    a1 = make_observable("random_hermitian", {"dim": 2, "seed": 51}, start=1, local_d=2)
    a3 = make_observable("random_hermitian", {"dim": 2, "seed": 51}, start=3, local_d=2)
    b1 = make_observable("random_hermitian", {"dim": 2, "seed": 52}, start=1, local_d=2)
    b3 = make_observable("random_hermitian", {"dim": 2, "seed": 52}, start=3, local_d=2)
    r1 = mc_otoc(
        EnsembleConfig(kind="rmpu", seed=61, samples=6000, geometry=geom), a1, b3, k
    )
    r2 = mc_otoc(
        EnsembleConfig(kind="rmpu", seed=62, samples=6000, geometry=geom), a3, b1, k
    )
    # both placements are inside the cone and statistically indistinguishable
    assert r1.stderr > 1e-6 and r2.stderr > 1e-6
    gap = abs(r1.mean - r2.mean)
    assert gap <= 4 * math.hypot(r1.stderr, r2.stderr)


def test_mc_frame_potential_haar():
    config = EnsembleConfig(kind="global_haar", seed=13, samples=4000, dim=8)
    rec = mc_frame_potential(config, 2)
    assert abs(rec.mean - frame_potential_haar(2)) <= 5 * rec.stderr


def test_mc_convergence_toward_free_prediction():
    # |mc - free| over chi in {2, 4, 8} fits a power law near chi^-2.
    # The chi = 16 point needs ~1e6 samples to resolve, so the fit here uses
    # three points with a generous exponent window.
    d, n, k = 2, 2, 2
    a_local = make_observable("random_hermitian", {"dim": 2, "seed": 71}, 1, 2)
    devs = []
    chis = [2, 4, 8]
    for chi in chis:
        r = round(math.log2(chi))
        geom = RmpuGeometry(d=d, r=r, n=n)
        a = ObservableSpec(a_local.matrix, 1, 2)
        b = ObservableSpec(a_local.matrix, geom.sites, 2)
        config = EnsembleConfig(kind="rmpu", seed=80 + r, samples=20000, geometry=geom)
        rec = mc_otoc(config, a, b, k)
        mom = matrix_moments(a_local.matrix, k)
        devs.append(abs(rec.mean - float(free_otoc_prediction(mom, mom, k))))
    alpha, _, _ = fit_power_law(chis, devs)
    assert abs(alpha + 2) <= 0.3


def test_frame_potential_heavy_tail_note():
    config = EnsembleConfig(kind="global_haar", seed=13, samples=3, dim=4)
    rec = mc_frame_potential(config, 3)
    assert rec.samples == 3
