import numpy as np
import pytest

from fairsel import (
    ContractError,
    FairPolytope,
    FeasibilityError,
    WorkerPool,
    is_feasible,
    maximize_linear,
)
from fairsel.presets import demo_fairness

from conftest import make_random_floors, water_fill_brute


def test_feasibility_examples():
    assert is_feasible(demo_fairness(0.42), 6)  # floors sum to 4.2 < 6
    assert is_feasible(np.zeros(4), 1)
    assert not is_feasible([0.9, 0.9, 0.9], 2)
    assert is_feasible([0.5, 0.5, 1.0], 2)  # boundary: sum exactly k


def test_water_filling_hand_example():
    poly = FairPolytope(np.array([0.2, 0.2, 0.2]), k=2)
    x = maximize_linear(poly, [3.0, 1.0, 2.0])
    assert x.coords == pytest.approx([1.0, 0.2, 0.8], abs=1e-9)


def test_water_filling_top_k_at_zero_floors():
    poly = FairPolytope(np.zeros(3), k=2)
    x = maximize_linear(poly, [5.0, 1.0, 3.0])
    assert x.coords == pytest.approx([1.0, 0.0, 1.0], abs=0)


def test_water_filling_singleton_polytope():
    r = np.array([0.5, 0.5, 1.0])
    x = maximize_linear(FairPolytope(r, k=2), [9.0, 1.0, 5.0])
    assert x.coords == pytest.approx(r, abs=1e-12)


def test_water_filling_tie_breaks_toward_lower_id():
    x = maximize_linear(FairPolytope(np.zeros(3), k=1), [1.0, 1.0, 1.0])
    assert x.coords.tolist() == [1.0, 0.0, 0.0]


def test_water_filling_output_always_sums_to_budget():
    rng = np.random.default_rng(17)
    for _ in range(50):
        n = int(rng.integers(2, 10))
        k = int(rng.integers(1, n + 1))
        poly = FairPolytope(make_random_floors(rng, n, k), k=k)
        x = maximize_linear(poly, rng.uniform(0.0, 3.0, n))
        assert abs(x.sum() - k) <= 1e-9
        assert poly.contains(x)


def test_water_filling_matches_vertex_enumeration():
    rng = np.random.default_rng(23)
    for trial in range(60):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, n + 1))
        r = make_random_floors(rng, n, k)
        w = rng.uniform(0.0, 2.0, n)
        if trial % 3 == 0:
            w = np.round(w, 1)  # force ties
        got = float(w @ maximize_linear(FairPolytope(r, k=k), w).coords)
        assert got == pytest.approx(water_fill_brute(r, k, w), abs=1e-9)


def test_water_filling_errors():
    with pytest.raises(FeasibilityError):
        maximize_linear(FairPolytope(np.array([0.9, 0.9]), k=1), [1.0, 1.0])
    poly = FairPolytope(np.zeros(2), k=1)
    with pytest.raises(ContractError):
        maximize_linear(poly, [1.0, -0.5])
    with pytest.raises(ValueError):
        maximize_linear(poly, [1.0, 1.0, 1.0])


def test_polytope_validation_and_membership():
    with pytest.raises(ValueError):
        FairPolytope(np.array([0.5, 1.3]), k=1)
    with pytest.raises(ValueError):
        FairPolytope(np.array([0.5, 0.5]), k=3)
    poly = FairPolytope(np.array([0.3, 0.1, 0.0]), k=2)
    assert poly.contains([0.5, 0.5, 1.0])
    assert not poly.contains([0.2, 0.5, 1.0])  # below the first floor
    assert not poly.contains([1.0, 1.0, 0.5])  # budget exceeded
    assert poly.membership_slack([0.5, 0.5, 1.0]) == 0.0
    assert poly.membership_slack([0.2, 0.5, 1.0]) == pytest.approx(0.1, abs=1e-12)
    assert poly.membership_slack([1.0, 1.0, 0.5]) == pytest.approx(0.5, abs=1e-12)


def test_from_pool_round_trip():
    pool = WorkerPool(n=3, k=2, fairness=np.array([0.1, 0.2, 0.3]))
    poly = FairPolytope.from_pool(pool)
    assert poly.k == 2 and poly.n == 3
    assert poly.fairness == pytest.approx(pool.fairness)
