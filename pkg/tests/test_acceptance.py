"""End-to-end acceptance checks.

Each test covers one acceptance criterion and prints a single PASS/FAIL line
(through the capture-disabled channel, so the lines appear in the live pytest
output) before asserting.
"""

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from rmpufree import exactlin
from rmpufree.freeprob import (
    cumulants_from_moments,
    free_otoc_prediction,
    matrix_moments,
    moments_from_cumulants,
)
from rmpufree.mcsim import (
    EnsembleConfig,
    ObservableSpec,
    make_observable,
    mc_frame_potential,
    mc_otoc,
)
from rmpufree.ncposet import (
    catalan,
    count_genus_one_pairs,
    enumerate_genus_one_pairs,
    enumerate_multichains,
    enumerate_nc,
    fuss_catalan,
    kreweras,
    mobius,
    mobius_of,
)
from rmpufree.predict import (
    RmpuGeometry,
    fit_power_law,
    frame_potential_haar,
    frame_potential_rmpu_asymptotic,
    frame_potential_rmpu_exact,
    haar_otoc_exact,
    rmpu_otoc_exact,
    rmpu_otoc_nonlocal_leading,
    rmpu_otoc_placed,
    subleading_coeff_haar,
    subleading_coeff_haar_closed,
    subleading_coeff_rmpu,
    verify_frame_otoc_identity,
)
from rmpufree.symgroup import cayley_distance, cyclic, enumerate_sk, identity
from rmpufree.weingarten import gram, weingarten

MA = [Fraction(1, 2), Fraction(2, 3), Fraction(3, 4), Fraction(4, 5)]
MB = [Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(5, 6)]

TABLE_FUSS_CATALAN = [1, 3, 12, 55, 273, 1428, 7752, 43263, 246675, 1430715]
TABLE_GENUS_ONE = {2: 1, 3: 21, 4: 270, 5: 2860, 6: 27300}


def report(capsys, num, desc, ok, detail=""):
    line = f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}: {desc}"
    if detail:
        line += f" ({detail})"
    with capsys.disabled():
        print(line, flush=True)
    assert ok, line


def test_criterion_01_exact_weingarten_inverse(capsys):
    ok = True
    for k in range(2, 6):
        for dim in sorted({k + 1, 2 * k, 10}):
            product = exactlin.mat_mul(weingarten(dim, k), gram(dim, k))
            ok = ok and exactlin.is_identity(product)
    report(
        capsys, 1,
        "rational Weingarten times Gram is the identity for k=2..5, "
        "D in {k+1, 2k, 10}",
        ok,
    )


def test_criterion_02_partition_count_table(capsys):
    formula_ok = all(
        fuss_catalan(k) == TABLE_FUSS_CATALAN[k - 1] for k in range(1, 11)
    )
    genus_ok = all(
        len(enumerate_genus_one_pairs(k)) == TABLE_GENUS_ONE[k]
        for k in range(2, 7)
    )
    report(
        capsys, 2,
        "Fuss-Catalan column matches (2k+1)^-1 binom(3k,k) for k<=10 and the "
        "genus-one column {1,21,270,2860,27300} is reproduced by enumeration",
        formula_ok and genus_ok,
    )


def test_criterion_03_mobius_machinery(capsys):
    ok = True
    for k in range(1, 7):
        gamma = cyclic(k)
        nc = enumerate_nc(k)
        ok = ok and mobius_of(gamma) == (-1) ** (k - 1) * catalan(k - 1)
        for p in nc:
            ok = ok and mobius(p, p) == 1
            # cycle factorization against per-cycle values
            expected = 1
            for c in p.cycles():
                expected *= (-1) ** (len(c) - 1) * catalan(len(c) - 1)
            ok = ok and mobius_of(p) == expected
        # delta identity over every interval [pi, gamma]
        for pi in nc:
            d_pi = cayley_distance(pi, gamma)
            total = sum(
                mobius(pi, s)
                for s in nc
                if cayley_distance(pi, s) + cayley_distance(s, gamma) == d_pi
            )
            ok = ok and total == (1 if pi == gamma else 0)
    kreweras_ok = True
    for k in range(1, 9):
        for s in enumerate_nc(k):
            kreweras_ok = (
                kreweras_ok and s.num_cycles() + kreweras(s).num_cycles() == k + 1
            )
    report(
        capsys, 3,
        "Moebius values, cycle factorization and delta identity hold for "
        "k<=6; Kreweras cycle-count identity holds for k<=8",
        ok and kreweras_ok,
    )


def test_criterion_04_moment_cumulant_round_trip(capsys):
    rng = random.Random(4)
    ok = True
    for _ in range(25):
        length = rng.randint(1, 8)
        moments = [
            Fraction(rng.randint(-20, 20), rng.randint(1, 12))
            for _ in range(length)
        ]
        ok = ok and moments_from_cumulants(cumulants_from_moments(moments)) == moments
    semicircle = cumulants_from_moments([0, 1, 0, 2, 0, 5])
    ok = ok and semicircle == [0, 1, 0, 0, 0, 0]
    report(
        capsys, 4,
        "moment/cumulant transforms invert exactly on random rational "
        "sequences (K<=8) and the semicircle moments 1,2,5 give kappa_2=1",
        ok,
    )


def test_criterion_05_haar_monte_carlo_oracle(capsys):
    dim, samples = 8, 10_000
    worst = 0.0
    ok = True
    for k in (2, 3):
        for draw in range(5):
            a = make_observable(
                "random_hermitian", {"dim": dim, "seed": 100 + draw}, 1, dim
            )
            b = make_observable(
                "random_hermitian", {"dim": dim, "seed": 200 + draw}, 1, dim
            )
            config = EnsembleConfig(
                kind="global_haar", seed=500 + 10 * k + draw, samples=samples, dim=dim
            )
            rec = mc_otoc(config, a, b, k)
            exact = float(
                haar_otoc_exact(
                    matrix_moments(a.matrix, k), matrix_moments(b.matrix, k), dim, k
                )
            )
            dev = abs(rec.mean - exact) / rec.stderr
            worst = max(worst, dev)
            ok = ok and dev <= 4.0
    report(
        capsys, 5,
        "global-Haar Monte Carlo OTOC matches the exact Weingarten value "
        "within 4 stderr for k=2,3 across 5 observable draws",
        ok, f"worst deviation {worst:.2f} sigma",
    )


def test_criterion_06_haar_subleading_coefficient(capsys):
    ok = True
    detail = []
    for k in (2, 3, 4):
        coeff = subleading_coeff_haar(MA, MB, k)
        ok = ok and coeff == subleading_coeff_haar_closed(MA, MB, k)
        free = free_otoc_prediction(MA, MB, k)
        rels = []
        for dim in (16, 32, 64):
            measured = (haar_otoc_exact(MA, MB, dim, k) - free) * dim ** 2
            rels.append(abs(float((measured - coeff) / coeff)))
        ok = ok and rels[-1] <= 0.05 and rels[0] > rels[-1]
        detail.append(f"k={k}: {rels[-1]:.3%} at D=64")
    report(
        capsys, 6,
        "(Haar - free) * D^2 converges to the genus-one coefficient "
        "(<=5% at D=64) and the generic sum equals the closed forms exactly",
        ok, "; ".join(detail),
    )


def test_criterion_07_rmpu_freeness_scaling(capsys):
    d, n = 2, 2
    ok = True
    details = []
    for k in (2, 3):
        free = free_otoc_prediction(MA, MB, k)
        chis, devs = [2, 4, 8, 16], []
        for chi in chis:
            geom = RmpuGeometry(d=d, r=round(math.log2(chi)), n=n)
            devs.append(abs(float(rmpu_otoc_exact(MA, MB, geom, k) - free)))
        alpha, _, _ = fit_power_law(chis, devs)
        ok = ok and abs(alpha + 2) <= 0.3
        coeff = abs(float(subleading_coeff_rmpu(MA, MB, n, d, k)))
        measured = devs[-1] * 16 ** 2
        rel = abs(measured - coeff) / coeff
        ok = ok and rel <= 0.10
        details.append(f"k={k}: exponent {alpha:.2f}, coeff dev {rel:.1%}")
    # Monte Carlo confirmation of the chi=2 point at k=2
    k = 2
    geom = RmpuGeometry(d=2, r=1, n=2)
    a = make_observable("random_hermitian", {"dim": 4, "seed": 301}, 1, 2)
    b = make_observable("random_hermitian", {"dim": 4, "seed": 302}, geom.n, 2)
    config = EnsembleConfig(kind="rmpu", seed=303, samples=10_000, geometry=geom)
    rec = mc_otoc(config, a, b, k)
    exact = float(
        rmpu_otoc_exact(
            matrix_moments(a.matrix, k), matrix_moments(b.matrix, k), geom, k
        )
    )
    mc_dev = abs(rec.mean - exact) / rec.stderr
    ok = ok and mc_dev <= 4.0
    report(
        capsys, 7,
        "|C_R - C_FP| scales as chi^-2 with the predicted coefficient "
        "(10% at chi=16) and Monte Carlo confirms the chi=2 point",
        ok, "; ".join(details) + f"; MC {mc_dev:.2f} sigma",
    )


def test_criterion_08_traceless_scaling(capsys):
    d, n = 2, 2
    mA = [0, Fraction(1, 2), Fraction(1, 3)]
    mB = [0, Fraction(1, 3), Fraction(1, 4)]
    # k = 3: the surviving chi^-2 term is kappa_3(A) kappa_3(B) / d^(2n)
    k = 3
    target = float(
        cumulants_from_moments(mA)[2] * cumulants_from_moments(mB)[2]
    )
    rels3 = []
    for chi in (16, 32):
        geom = RmpuGeometry(d=d, r=round(math.log2(chi)), n=n)
        value = float(rmpu_otoc_exact(mA, mB, geom, k)) * d ** (2 * n) * chi ** 2
        rels3.append(abs(value - target) / abs(target))
    ok = all(r <= 0.10 for r in rels3)
    # k = 2: the coefficient of chi^-2 is (n/d^2 - (n-1)) * c_2 instead
    k = 2
    c2 = subleading_coeff_haar(mA, mB, k)
    target2 = float((Fraction(n, d * d) - (n - 1)) * c2)
    rels2 = []
    for chi in (16, 32):
        geom = RmpuGeometry(d=d, r=round(math.log2(chi)), n=n)
        value = float(rmpu_otoc_exact(mA, mB, geom, k)) * chi ** 2
        rels2.append(abs(value - target2) / abs(target2))
    ok = ok and all(r <= 0.10 for r in rels2)
    report(
        capsys, 8,
        "traceless observables: k=3 OTOC * d^2n chi^2 approaches "
        "kappa_3 kappa_3 and the k=2 coefficient is (n/d^2-(n-1)) c_2",
        ok,
        f"k=3 dev {max(rels3):.2%}, k=2 dev {max(rels2):.2%} at chi>=16",
    )


def test_criterion_09_frame_potential(capsys):
    d, n = 2, 3
    ok = True
    details = []
    for k in (2, 3):
        chis, resids = [8, 16, 32, 64], []
        exacts = []
        for chi in chis:
            geom = RmpuGeometry(d=d, r=round(math.log2(chi)), n=n)
            exact = frame_potential_rmpu_exact(geom, k)
            exacts.append(exact)
            resids.append(
                abs(float(exact - frame_potential_rmpu_asymptotic(geom, k)))
            )
        alpha, _, _ = fit_power_law(chis, resids)
        ok = ok and alpha <= -3.0 + 0.5
        # exact Vandermonde fit of F - k! to sum_j c_j chi^-j: the chi^-1
        # coefficient must be negligible against the chi^-2 term
        a = [
            [Fraction(1, chi ** j) for j in range(1, 5)] for chi in chis
        ]
        rhs = [f - math.factorial(k) for f in exacts]
        c1, c2, _, _ = exactlin.solve(a, rhs)
        ratio = abs(float(c1 / c2)) if c2 else float("inf")
        ok = ok and ratio < 0.01
        details.append(f"k={k}: exponent {alpha:.2f}, |c1/c2|={ratio:.1e}")
    # Monte Carlo at D=8: Haar gives k! and the staircase the transfer value
    k, pairs = 2, 100_000
    haar_cfg = EnsembleConfig(kind="global_haar", seed=901, samples=pairs, dim=8)
    rec_h = mc_frame_potential(haar_cfg, k)
    dev_h = abs(rec_h.mean - frame_potential_haar(k)) / rec_h.stderr
    geom = RmpuGeometry(d=2, r=1, n=2)
    rmpu_cfg = EnsembleConfig(kind="rmpu", seed=902, samples=pairs, geometry=geom)
    rec_r = mc_frame_potential(rmpu_cfg, k)
    exact_r = float(frame_potential_rmpu_exact(geom, k))
    dev_r = abs(rec_r.mean - exact_r) / rec_r.stderr
    ok = ok and dev_h <= 5.0 and dev_r <= 5.0
    report(
        capsys, 9,
        "frame potential: residual to the asymptotic form decays at least "
        "as chi^-3 with no chi^-1 term, and Monte Carlo reproduces both the "
        "Haar and staircase values at D=8",
        ok,
        "; ".join(details) + f"; MC {dev_h:.2f}/{dev_r:.2f} sigma",
    )


def test_criterion_10_frame_otoc_identity(capsys):
    result = verify_frame_otoc_identity(dim=4, k=2)
    report(
        capsys, 10,
        "exhaustive Pauli-string sum rule ties the squared OTOCs to the "
        "frame potential at D=4, k=2 to 1e-10 relative",
        result["passed"], f"relative error {result['relative_error']:.1e}",
    )


def test_criterion_11_structural_otoc_properties(capsys):
    k = 2
    geom = RmpuGeometry(d=2, r=1, n=2)  # chi = 2
    rng = np.random.default_rng(11)
    z = rng.standard_normal((2, 2))
    a = (z + z.T) / 2
    z = rng.standard_normal((2, 2))
    b = (z + z.T) / 2
    mA = matrix_moments(a, k)
    mB = matrix_moments(b, k)
    # light-cone reduction: B within the same gate as A (separation M <= chi)
    # gives exactly the Haar value of a single gate of dimension chi*d
    haar_gate = float(haar_otoc_exact(mA, mB, geom.chi * geom.d, k))
    cone_ok = all(
        abs(rmpu_otoc_placed(geom, a, sa, b, sb, k) - haar_gate) < 1e-10
        for sa, sb in [(1, 1), (2, 1), (3, 2), (3, 3)]
    )
    # out-of-cone factorization (Monte Carlo; in fact deterministic)
    a_spec = ObservableSpec(a, geom.sites, 2)
    b_spec = ObservableSpec(b, 1, 2)
    config = EnsembleConfig(kind="rmpu", seed=111, samples=200, geometry=geom)
    rec = mc_otoc(config, a_spec, b_spec, k)
    product = mA[k - 1] * mB[k - 1]
    out_ok = abs(rec.mean - product) <= max(4 * rec.stderr, 1e-10)
    # two-floor variant restores the placement symmetry
    tf = RmpuGeometry(d=2, r=1, n=2, variant="two_floor")
    r1 = mc_otoc(
        EnsembleConfig(kind="rmpu", seed=112, samples=8000, geometry=tf),
        ObservableSpec(a, 1, 2), ObservableSpec(b, tf.sites, 2), k,
    )
    r2 = mc_otoc(
        EnsembleConfig(kind="rmpu", seed=113, samples=8000, geometry=tf),
        ObservableSpec(a, tf.sites, 2), ObservableSpec(b, 1, 2), k,
    )
    tf_ok = (
        r1.stderr > 1e-6
        and r2.stderr > 1e-6
        and abs(r1.mean - r2.mean) <= 4 * math.hypot(r1.stderr, r2.stderr)
    )
    # nonlocal product observables: order-one gap from the free prediction
    gap = rmpu_otoc_nonlocal_leading(MA, MB, 2, k) - free_otoc_prediction(
        MA, MB, k
    )
    nonlocal_ok = gap != 0 and abs(float(gap)) > 1e-3
    report(
        capsys, 11,
        "light-cone reduction to the single-gate Haar value, out-of-cone "
        "factorization, two-floor placement symmetry, and the O(1) nonlocal "
        "discrepancy",
        cone_ok and out_ok and tf_ok and nonlocal_ok,
        f"nonlocal gap {float(gap):.4f}",
    )
