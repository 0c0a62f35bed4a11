import math

import numpy as np
import pytest

from feec.complexes import DiscreteComplex
from feec.hodge import (
    MixedPair,
    fit_rates,
    measure_infsup,
    solve_B_star,
    solve_eigen,
    solve_source,
    source_error_norms,
)
from feec.mesh import generate, refine_uniform
from feec.spaces import FESpace, FormSampler


def _interval_problem(N):
    """Mixed form of -u'' = (pi/2)^2 cos(pi x/2) on (-1,1), natural bc on u."""
    m = generate("interval", N, -1.0, 1.0)
    cx = DiscreteComplex(m, 1)
    f = FormSampler(1, 1, lambda p: (np.pi / 2) ** 2 * np.cos(np.pi * p[:, :1] / 2), degree=8)
    exact = {
        "sigma": FormSampler(1, 0, lambda p: (np.pi / 2) * np.sin(np.pi * p[:, :1] / 2), degree=8),
        "u": FormSampler(1, 1, lambda p: np.cos(np.pi * p[:, :1] / 2), degree=8),
    }
    return cx, f, exact


def test_solve_source_1d_accuracy():
    cx, f, exact = _interval_problem(32)
    sol = solve_source(cx, 1, f)
    assert sol.residual < 1e-10
    errs = source_error_norms(cx, 1, sol, exact)
    assert errs["sigma"] < 5e-3
    assert errs["u"] < 5e-2


def test_solve_source_1d_convergence():
    hs, table = [], {"sigma": [], "u": []}
    for N in (8, 16, 32):
        cx, f, exact = _interval_problem(N)
        sol = solve_source(cx, 1, f)
        errs = source_error_norms(cx, 1, sol, exact)
        hs.append(cx.mesh.h())
        table["sigma"].append(errs["sigma"])
        table["u"].append(errs["u"])
    rates = fit_rates(hs, table)
    assert rates["sigma"] > 1.5
    assert rates["u"] > 0.9


def test_solve_source_rejects_bad_degree():
    m = generate("interval", 4)
    cx = DiscreteComplex(m, 1)
    with pytest.raises(ValueError):
        solve_source(cx, 5, np.zeros(3))


def test_solve_source_annulus_orthogonal_to_harmonics(rng):
    m = refine_uniform(generate("annulus", 1))
    cx = DiscreteComplex(m, 1)
    f = FormSampler(2, 1, lambda p: np.column_stack([np.zeros(len(p)), p[:, 0]]), degree=4)
    sol = solve_source(cx, 1, f)
    H = cx.harmonic_basis(1)
    M = cx.mass(1)
    assert np.abs(H.T @ (M @ sol.u)).max() < 1e-10
    # harmonic moments of the load land in the multiplier, not in u
    assert np.linalg.norm(sol.p) > 1e-3


def test_solve_B_star_drops_noncoexact():
    m = refine_uniform(generate("annulus", 1))
    cx = DiscreteComplex(m, 1)
    f = FormSampler(2, 1, lambda p: np.column_stack([np.zeros(len(p)), p[:, 0]]), degree=4)
    sol, info = solve_B_star(cx, 1, f)
    assert info["dropped_norm"] > 0.0
    vB, vH, vS = cx.hodge_decompose(1, sol.u)
    assert cx.norm(1, vB) < 1e-8
    assert cx.norm(1, vH) < 1e-10


def test_eigen_scalar_dirichlet_unit_eigenvalue():
    # first Dirichlet eigenvalue of -u'' on (0, pi) is 1
    m = generate("interval", 64, 0.0, math.pi)
    cx = DiscreteComplex(m, 1, bc="essential")
    res = solve_eigen(cx, 0, count=4)
    lam = res.of_type("bstar")[0]
    assert abs(lam - 1.0) < 1e-3


def test_eigen_b_branch_reproduces_scalar_spectrum():
    m = generate("square", 6, 0.0, math.pi)
    cx = DiscreteComplex(m, 1, bc="essential")
    res0 = solve_eigen(cx, 0, count=6)
    res1 = solve_eigen(cx, 1, count=14)
    b1 = np.sort(res1.of_type("b"))
    assert len(b1) >= 3
    b0 = np.sort(res0.of_type("bstar"))[: len(b1)]
    assert np.allclose(b0, b1[: len(b0)], rtol=1e-8)


def test_eigen_zero_modes_match_betti():
    m = generate("annulus", 1)
    cx = DiscreteComplex(m, 1)
    res = solve_eigen(cx, 1, count=6)
    assert len(res.zero_values) == 1


def test_measure_infsup_positive_and_stable():
    vals = []
    for N in (2, 4):
        m = generate("square", N)
        cx = DiscreteComplex(m, 1)
        vals.append(measure_infsup(cx, 2))
    assert vals[0] > 0.05
    assert vals[1] > 0.5 * vals[0]


def test_mixed_pair_p1_p1_singular():
    m = generate("interval", 14, -1.0, 1.0)
    sig = FESpace(m, ("P", 1, 0))
    u = FESpace(m, ("P", 1, 1))
    pair = MixedPair([sig], u)
    f = FormSampler(1, 1, lambda p: (np.pi / 2) ** 2 * np.cos(np.pi * p[:, :1] / 2), degree=8)
    _, _, diag = pair.solve(f)
    assert diag["singular"] is True


def test_mixed_pair_stable_pair_solves():
    m = generate("interval", 14, -1.0, 1.0)
    sig = FESpace(m, ("P", 1, 0))
    u = FESpace(m, ("P", 0, 1))
    pair = MixedPair([sig], u)
    f = FormSampler(1, 1, lambda p: (np.pi / 2) ** 2 * np.cos(np.pi * p[:, :1] / 2), degree=8)
    sigma, uh, diag = pair.solve(f)
    assert diag["singular"] is False
    assert diag["residual"] < 1e-10
    exact_u = FormSampler(1, 1, lambda p: np.cos(np.pi * p[:, :1] / 2), degree=8)
    assert u.l2_error(uh, exact_u) < 0.1


def test_fit_rates_synthetic():
    hs = [0.5, 0.25, 0.125]
    table = {
        "quadratic": [h**2 for h in hs],
        "linear": [3 * h for h in hs],
        "exact": [0.0, 0.0, 0.0],
    }
    rates = fit_rates(hs, table)
    assert abs(rates["quadratic"] - 2.0) < 1e-10
    assert abs(rates["linear"] - 1.0) < 1e-10
    assert rates["exact"] == math.inf


def test_fit_rates_validates():
    with pytest.raises(ValueError):
        fit_rates([0.5], {"a": [1.0]})
    with pytest.raises(ValueError):
        fit_rates([0.5, 0.25], {"a": [1.0]})
