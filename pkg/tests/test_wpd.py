import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wheelflat.wpd import DB2, child_length, decompose, decompose_step

LENGTH_CHAIN = [378, 190, 96, 49, 26, 14, 8]


def brute_force_step(x, f):
    """Odd-phase samples of the zero-extended full convolution, summed directly."""
    n_out = (len(x) + len(f) - 1) // 2
    out = np.zeros(n_out)
    for k in range(n_out):
        i = 2 * k + 1
        out[k] = sum(f[m] * x[i - m] for m in range(len(f)) if 0 <= i - m < len(x))
    return out


def energy(a):
    return float(np.sum(np.asarray(a) ** 2))


def test_db2_closed_form():
    s3, d = math.sqrt(3), 4 * math.sqrt(2)
    expected = [(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d]
    assert np.max(np.abs(DB2.lowpass - expected)) <= 1e-15


def test_quadrature_mirror_relation():
    g, h = DB2.lowpass, DB2.highpass
    for k in range(4):
        assert h[k] == (-1) ** k * g[3 - k]


def test_orthonormality_and_moments():
    g, h = DB2.lowpass, DB2.highpass
    assert abs(np.sum(g**2) - 1) < 1e-14
    assert abs(g[2] * g[0] + g[3] * g[1]) < 1e-14  # even-shift orthogonality
    assert abs(np.sum(g) - math.sqrt(2)) < 1e-14
    assert abs(np.sum(h)) < 1e-14
    assert abs(np.sum(np.arange(4) * h)) < 1e-14  # second vanishing moment
    assert abs(np.dot(g, h)) < 1e-14


def test_step_lengths():
    a, d = decompose_step(np.ones(378))
    assert len(a) == len(d) == 190 == (378 + 3) // 2


def test_step_of_zeros():
    a, d = decompose_step(np.zeros(51))
    assert not a.any() and not d.any()


def test_step_of_lowpass_filter_conserves_unit_energy():
    a, d = decompose_step(DB2.lowpass)
    assert abs(energy(a) + energy(d) - 1.0) < 1e-12


@pytest.mark.parametrize("length", [2, 3, 17, 378])
def test_step_matches_brute_force(rng, length):
    x = rng.standard_normal(length)
    a, d = decompose_step(x)
    np.testing.assert_allclose(a, brute_force_step(x, DB2.lowpass), atol=1e-14)
    np.testing.assert_allclose(d, brute_force_step(x, DB2.highpass), atol=1e-14)


def test_step_rejects_short_parent():
    with pytest.raises(ValueError):
        decompose_step(np.ones(1))


def test_level_six_shapes():
    tree = decompose(np.ones(378), 6)
    assert len(tree.leaves) == 64
    assert all(len(leaf) == 8 for leaf in tree.leaves)
    for level, expected in enumerate(LENGTH_CHAIN):
        assert len(tree.nodes[level]) == 2**level
        assert {len(node) for node in tree.nodes[level]} == {expected}
    assert tree.subspaces().shape == (64, 8)


def test_level_zero_is_identity(rng):
    x = rng.standard_normal(100)
    tree = decompose(x, 0)
    assert len(tree.leaves) == 1
    np.testing.assert_array_equal(tree.leaves[0], x)


def test_natural_order_children(rng):
    x = rng.standard_normal(378)
    tree = decompose(x, 2)
    a, d = decompose_step(x)
    da, dd = decompose_step(d)
    np.testing.assert_array_equal(tree.nodes[1][1], d)
    np.testing.assert_array_equal(tree.nodes[2][2], da)
    np.testing.assert_array_equal(tree.nodes[2][3], dd)


def test_energy_conserved_at_every_level(rng):
    x = rng.standard_normal(378)
    tree = decompose(x, 6)
    for level in range(7):
        total = sum(energy(node) for node in tree.nodes[level])
        assert abs(total / energy(x) - 1) < 1e-9


def test_linearity(rng):
    x, y = rng.standard_normal((2, 378))
    a, b = 1.7, -0.3
    lhs = decompose(a * x + b * y, 6).subspaces()
    rhs = a * decompose(x, 6).subspaces() + b * decompose(y, 6).subspaces()
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


@given(length=st.integers(16, 4096), level=st.integers(0, 4), seed=st.integers(0, 2**16))
def test_counts_lengths_and_energy_for_random_lengths(length, level, seed):
    x = np.random.default_rng(seed).standard_normal(length)
    tree = decompose(x, level)
    expected_len = length
    for _ in range(level):
        expected_len = child_length(expected_len)
    assert len(tree.leaves) == 2**level
    assert {len(leaf) for leaf in tree.leaves} == {expected_len}
    total = sum(energy(leaf) for leaf in tree.leaves)
    assert abs(total / energy(x) - 1) < 1e-9


@pytest.mark.parametrize("level", [-1, 7])
def test_rejects_bad_level(level):
    with pytest.raises(ValueError, match="level"):
        decompose(np.ones(378), level)


def test_rejects_too_short_input():
    with pytest.raises(ValueError, match="too short"):
        decompose(np.ones(20), 6)


def test_leaf_csv(tmp_path, rng):
    tree = decompose(rng.standard_normal(378), 6)
    path = tmp_path / "leaves.csv"
    tree.to_csv(path)
    rows = path.read_text().splitlines()
    assert len(rows) == 65
    assert rows[0].split(",") == ["node"] + [f"k{i}" for i in range(8)]
    back = np.array([[float(v) for v in r.split(",")[1:]] for r in rows[1:]])
    np.testing.assert_array_equal(back, tree.subspaces())
