import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schottky_gaps.errors import InvariantError
from schottky_gaps.gaps import Ecdf, compute_gaps, default_s_grid, gap_cdf, power_law_normalizer
from schottky_gaps.orbit import count_profile, enumerate_naive

from conftest import T_FIG

INTERVAL = (0.695204, 2.980334)


def test_single_point_cyclic():
    t = compute_gaps([1.0], 10.0)
    assert t.gaps.tolist() == [2 * math.pi]
    assert t.scaled.tolist() == [2 * math.pi * 100.0]


def test_two_antipodal_points():
    assert compute_gaps([0.0, math.pi], 1.0).gaps.tolist() == [math.pi, math.pi]


def test_interval_mode_drops_truncated_gaps():
    t = compute_gaps([1.0, 1.5, 2.5], 1.0, (0.5, 3.0))
    assert t.gaps.tolist() == [0.5, 1.0] and not t.cyclic


def test_unsorted_input_is_sorted_and_duplicates_rejected():
    assert compute_gaps([2.0, 1.0], 1.0).points.tolist() == [1.0, 2.0]
    with pytest.raises(InvariantError):
        compute_gaps([1.0, 1.0], 1.0)
    with pytest.raises(ValueError):
        compute_gaps([], 1.0)


def test_gaps_match_naive_enumeration(cfg, orbit_cache):
    T = 50.0
    pruned = compute_gaps(orbit_cache(T), T)
    # independent path: unpruned matrix enumeration, plain numpy sort and difference
    th = np.sort([p.theta for p in enumerate_naive(cfg, T)])
    oracle = np.append(np.diff(th), th[0] + 2 * math.pi - th[-1]) * T * T
    np.testing.assert_allclose(np.sort(pruned.scaled), np.sort(oracle), rtol=1e-9, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 2 * math.pi, exclude_max=True), min_size=1, max_size=60, unique=True))
def test_cyclic_gaps_sum_to_two_pi(angles):
    th = np.sort(angles)
    if len(th) > 1 and np.diff(th).min() <= 0:
        return
    t = compute_gaps(angles, 3.0)
    assert abs(t.gaps.sum() - 2 * math.pi) <= 1e-9
    assert len(t.gaps) == len(angles)


@pytest.mark.parametrize("T", [250.0, 500.0, 1000.0])
def test_orbit_gap_normalization(orbit_cache, T):
    t = compute_gaps(orbit_cache(T), T)
    assert abs(t.gaps.sum() - 2 * math.pi) <= 1e-9
    assert t.words is not None and len(t.words) == t.n_points


# ---------------------------------------------------------------- Ecdf

def test_equal_gaps_give_single_step():
    n, T = 8, 3.0
    t = compute_gaps(np.arange(n) * 2 * math.pi / n, T)
    F = gap_cdf(t)
    g = 2 * math.pi / n * T * T
    assert F(g * (1 - 1e-12)) == 0.0 and F(g) == 1.0


def test_below_minimum_is_zero_and_right_continuity():
    F = Ecdf([1.0, 2.0, 2.0, 5.0])
    assert F(0.999) == 0.0
    assert F(2.0) == 0.75 and F(1.9999) == 0.25
    assert F(5.0) == 1.0 and F.total == 1.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=50), st.lists(st.floats(0, 1e6), min_size=2, max_size=10))
def test_ecdf_is_nondecreasing(values, probes):
    F = Ecdf(values)
    s = np.sort(probes)
    assert np.all(np.diff(F(s)) >= 0)
    assert F(max(values)) == 1.0


def test_sup_distance_is_exact():
    A, B = Ecdf([1.0, 2.0]), Ecdf([1.5, 2.5])
    assert A.sup_distance(B) == 0.5
    assert A.sup_distance(A) == 0.0


def test_histogram_density_integrates_to_mass_in_range():
    F = Ecdf([0.1, 0.3, 0.5, 0.5, 10.0], normalizer=10)
    edges, dens = F.histogram(0.2, 1.0)
    assert len(edges) == 6 and edges[1] == pytest.approx(0.2)
    assert (dens * 0.2).sum() == pytest.approx(0.4)


def test_power_law_normalizer_on_exact_power_law():
    from schottky_gaps.orbit import CountProfile
    grid = (100.0, 200.0, 400.0, 800.0)
    counts = tuple(int(round(3.0 * t**1.2)) for t in grid)
    prof = CountProfile(grid, counts, counts)
    assert power_law_normalizer(prof, 0.6, 1600.0) == pytest.approx(3.0 * 1600.0**1.2, rel=1e-3)


def test_power_law_normalizer_close_to_count(cfg, orbit_cache):
    T = 1000.0
    prof = count_profile(cfg, np.geomspace(T / 10, T, 8))
    c = power_law_normalizer(prof, 0.62627635, T, use_interval=False)
    assert c == pytest.approx(len(orbit_cache(T)), rel=0.05)


def test_default_grid():
    s = default_s_grid()
    assert s[0] == 0.0 and s[-1] == pytest.approx(1e5) and np.all(np.diff(s) > 0)


# ---------------------------------------------------------------- scale and support

@pytest.mark.slow
def test_support_away_from_zero_and_median_window(orbit_cache):
    Ts = [250.0, 500.0, 1000.0, T_FIG]
    mins, meds = [], []
    for T in Ts:
        t = compute_gaps(orbit_cache(T), T)
        mins.append(t.scaled.min())
        meds.append(np.median(t.scaled))
    assert min(mins) > 0 and max(mins) / min(mins) < 2
    assert max(meds) / min(meds) < 2


@pytest.mark.slow
def test_interval_and_full_circle_cdfs_agree(cfg, orbit_cache):
    full = gap_cdf(compute_gaps(orbit_cache(T_FIG), T_FIG))
    part = gap_cdf(compute_gaps(orbit_cache(T_FIG, INTERVAL), T_FIG, INTERVAL))
    assert full.sup_distance(part) <= 0.1
