import numpy as np
import pytest

from lineshape import hs
from conftest import random_op


@pytest.mark.parametrize("n", [2, 4, 8])
def test_sandwich_matches_direct_product(rng, n):
    o1, o2, rho = (random_op(rng, n) for _ in range(3))
    lhs = hs.sandwich_superop(o1, o2) @ hs.vectorize(rho)
    assert np.allclose(lhs, hs.vectorize(o1 @ rho @ o2.conj().T), atol=1e-12)


def test_vectorize_round_trip_is_row_major(rng):
    op = random_op(rng, 4)
    vec = hs.vectorize(op)
    assert np.array_equal(vec[:4], op[0])
    assert np.array_equal(hs.devectorize(vec), op)


def test_inner_product_is_trace(rng):
    v, o = random_op(rng, 4), random_op(rng, 4)
    assert np.isclose(hs.hs_inner(v, o), np.trace(v.conj().T @ o))


def test_commutator_superop_acts_as_commutator(rng):
    h, rho = random_op(rng, 4), random_op(rng, 4)
    got = hs.devectorize(hs.commutator_superop(h) @ hs.vectorize(rho))
    assert np.allclose(got, h @ rho - rho @ h)


def test_spin_algebra_on_two_sites():
    for site in (1, 2):
        s = hs.spin_ops(2, site)
        assert np.allclose(s["x"] @ s["y"] - s["y"] @ s["x"], 1j * s["z"])
        assert np.allclose(s["+"], s["x"] + 1j * s["y"])
    # site 1 is the leftmost tensor factor, |+> is the first basis state
    assert np.isclose(hs.spin_ops(2, 1)["z"][0, 0], 0.5)
    assert np.isclose(hs.spin_ops(2, 1)["z"][1, 1], 0.5)
    assert np.isclose(hs.spin_ops(2, 2)["z"][1, 1], -0.5)


def test_total_spin_commutes_with_itself():
    tot = hs.total_spin_ops(3)
    assert np.allclose(tot["z"], sum(hs.spin_ops(3, k)["z"] for k in (1, 2, 3)))
    assert hs.is_hermitian(tot["x"])
    assert not hs.is_hermitian(tot["+"])


def test_non_square_input_rejected():
    with pytest.raises(ValueError):
        hs.vectorize(np.zeros((2, 3)))
