import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from irka import ShiftSet, detect_cycle, flip_unstable, hausdorff_distance, matching_assignment, matching_distance, reflect, separate
from irka.errors import EmptySet, SizeMismatch
from support import random_working_set


def brute_matching(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return min(max(abs(a[list(p)] - b)) for p in itertools.permutations(range(len(a))))


def test_layout_and_closure():
    s = ShiftSet([3.0, 1.0], [2 + 1j])
    assert list(s.values) == [3, 1, 2 + 1j, 2 - 1j]
    np.testing.assert_array_equal(s.values[s.conj_partner()], np.conj(s.values))
    assert s.pair_slices() == [[0], [1], [2, 3]]
    with pytest.raises(ValueError):
        ShiftSet([], [1 - 1j])


def test_from_values_pairs_partners():
    s = ShiftSet.from_values([1 - 2j, 4.0, 1 + 2j])
    assert list(s.reals) == [4.0] and list(s.uppers) == [1 + 2j]


def test_json_round_trip():
    s = ShiftSet([0.1, 7.25], [1 / 3 + 2j])
    text = s.to_json()
    assert json.loads(text)[2] == [1 / 3, 2.0]
    assert ShiftSet.from_json(text) == s


def test_immutable():
    s = ShiftSet([1.0])
    with pytest.raises(ValueError):
        s.values[0] = 2.0


def test_matching_examples():
    assert matching_distance(ShiftSet([1, 2]), ShiftSet([1, 2])) == 0
    assert matching_distance(ShiftSet([1, 2]), ShiftSet([2, 3])) == 1
    a = ShiftSet([], [1 + 1j])
    b = np.array([1.1 + 1j, 1 - 1j])
    assert matching_distance(a, b) == pytest.approx(0.1)
    with pytest.raises(SizeMismatch):
        matching_distance([1, 2], [1])


def test_hausdorff_examples():
    assert hausdorff_distance([1, 2], [1, 2]) == 0
    assert hausdorff_distance([1, 2], [2, 3]) == 1
    assert hausdorff_distance([1, 2, 3], [1]) == 2
    with pytest.raises(EmptySet):
        hausdorff_distance([], [1])


def test_matching_equals_brute_force(rng):
    for _ in range(300):
        r = int(rng.integers(1, 8))
        a = random_working_set(rng, r)
        b = random_working_set(rng, r)
        assert matching_distance(a, b) == brute_matching(a.values, b.values)


def test_assignment_realizes_distance(rng):
    for _ in range(100):
        r = int(rng.integers(1, 8))
        a, b = rng.standard_normal(r) + 1j * rng.standard_normal(r), rng.standard_normal(r)
        d, perm = matching_assignment(a, b)
        assert sorted(perm) == list(range(r))
        assert np.max(np.abs(a[perm] - b)) == d == matching_distance(a, b)


@given(st.integers(1, 7), st.integers(0, 2**32 - 1))
def test_metric_axioms(r, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_working_set(rng, r) for _ in range(3))
    assert matching_distance(a, b) == matching_distance(b, a)
    assert matching_distance(a, a) == 0
    assert matching_distance(a, c) <= matching_distance(a, b) + matching_distance(b, c) + 1e-12
    assert hausdorff_distance(a, b) <= matching_distance(a, b)


def test_reflect():
    assert reflect(ShiftSet([-1, -2])) == ShiftSet([1, 2])
    s = reflect(ShiftSet([], [-1 + 1j]))
    assert set(s.values) == {1 - 1j, 1 + 1j}
    t = ShiftSet([1.5], [2 + 3j])
    assert reflect(reflect(t)) == t
    assert -t == reflect(t)


def test_flip_unstable_examples():
    s, k, mask = flip_unstable(ShiftSet([1.0, -0.5]))
    assert s == ShiftSet([1.0, 0.5]) and k == 1 and list(mask) == [False, True]
    s, k, _ = flip_unstable(ShiftSet([], [-1 + 2j]))
    assert s == ShiftSet([], [1 + 2j]) and k == 2
    t = ShiftSet([1.0], [2 + 1j])
    s, k, mask = flip_unstable(t)
    assert s == t and k == 0 and not mask.any()


def test_flip_boundary_and_idempotent():
    s, k, _ = flip_unstable(ShiftSet([0.0, 4.0], [0 + 1j]))
    assert k == 3 and np.all(s.values.real > 0)
    assert s.reals[0] == pytest.approx(1e-8 * 4.0)
    again, k2, _ = flip_unstable(s)
    assert again == s and k2 == 0


def test_separate_pulls_apart():
    s = separate(ShiftSet([1.0, 1.0, 2.0]))
    assert s.is_distinct() and len(s) == 3
    assert s.reals[1] == 1.0 * (1 + 1e-8 * 2)
    nearly_real_pair = ShiftSet([], [3 + 1e-12j])
    out = separate(nearly_real_pair)
    assert out.n_real == 2 and out.is_distinct()


def test_cycle_alternating():
    a, b = ShiftSet([1, 2]), ShiftSet([3, 4])
    assert detect_cycle([a, b] * 4, 4, 1e-10) == (2, 0.0)


def test_cycle_constant_history_is_convergence():
    assert detect_cycle([ShiftSet([1, 2])] * 8, 4, 1e-10) is None


def test_cycle_random_walk_none(rng):
    hist = [ShiftSet(np.sort(rng.uniform(1, 10, 3))) for _ in range(10)]
    assert detect_cycle(hist, 4, 1e-8) is None


def test_cycle_period_three():
    sets = [ShiftSet([1.0]), ShiftSet([2.0]), ShiftSet([5.0])]
    assert detect_cycle(sets * 3, 3, 1e-12)[0] == 3


def test_cycle_short_history_raises():
    with pytest.raises(ValueError):
        detect_cycle([ShiftSet([1.0])] * 3, 2, 1e-8)
