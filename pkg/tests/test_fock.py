import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wwitness.fock import (
    FockSpace,
    FockSpaceError,
    FockState,
    MixedState,
    fidelity_to_pure,
    inner_product,
    make_basis_state,
    permute_modes,
    photon_number_distribution,
    tensor_product,
    total_quanta_probability,
    vacuum,
    w_state,
)


class TestFockSpace:
    @pytest.mark.parametrize("modes,cap,dim", [(1, 2, 3), (3, 2, 10), (4, 1, 5), (5, 0, 1)])
    def test_dimension(self, modes, cap, dim):
        assert FockSpace(modes, cap).dim == math.comb(modes + cap, cap) == dim

    def test_basis_order(self):
        assert FockSpace(2, 2).basis == ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0))

    def test_default_cap(self):
        assert FockSpace(3).cap == 2

    def test_index(self):
        space = FockSpace(3, 2)
        for i, occ in enumerate(space.basis):
            assert space.index(occ) == i

    def test_cap_exceeded(self):
        with pytest.raises(FockSpaceError, match="cap exceeded"):
            FockSpace(3, 2).index((1, 1, 1))

    def test_invalid(self):
        with pytest.raises(FockSpaceError):
            FockSpace(0)
        with pytest.raises(FockSpaceError):
            FockSpace(2, -1)

    def test_mismatch(self):
        with pytest.raises(FockSpaceError, match="Dimension mismatch"):
            inner_product(vacuum(FockSpace(2)), vacuum(FockSpace(3)))


class TestStates:
    def test_basis_state(self):
        psi = make_basis_state((1, 0, 0))
        assert psi.amplitude((1, 0, 0)) == 1
        assert psi.norm() == 1
        assert inner_product(psi, make_basis_state((0, 1, 0))) == 0

    def test_w_state(self):
        psi = w_state([1 / math.sqrt(3)] * 3)
        for occ in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
            assert psi.amplitude(occ) == pytest.approx(1 / math.sqrt(3))
        assert psi.amplitude((0, 0, 0)) == 0

    def test_not_normalized(self):
        with pytest.raises(FockSpaceError, match="not normalized"):
            w_state([1, 1])
        state = FockState(FockSpace(2), [0, 1, 1, 0, 0, 0], normalized=False)
        assert state.renormalized().norm() == pytest.approx(1)

    def test_immutable(self):
        psi = make_basis_state((0, 1))
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 1

    def test_tensor_product(self):
        product = tensor_product(make_basis_state((1,)), make_basis_state((0, 1)))
        assert product.modes == 3
        assert product.amplitude((1, 0, 1)) == 1

    def test_tensor_product_cap(self):
        two = make_basis_state((2,), FockSpace(1))
        with pytest.raises(FockSpaceError, match="cap exceeded"):
            tensor_product(two, make_basis_state((1,), FockSpace(1)))

    def test_json(self):
        psi = w_state([0.6, 0.8j])
        back = FockState.from_dict(psi.to_dict())
        assert back.allclose(psi, atol=1e-15)


class TestMixedStates:
    def test_weights(self):
        with pytest.raises(FockSpaceError, match="sum to"):
            MixedState([(0.5, vacuum(FockSpace(2)))])
        with pytest.raises(FockSpaceError, match="Negative"):
            MixedState([(1.5, vacuum(FockSpace(2))), (-0.5, vacuum(FockSpace(2)))])

    def test_fidelity(self):
        w = w_state([1 / math.sqrt(3)] * 3)
        rho = MixedState([(0.8, w), (0.2, vacuum(w.space))])
        assert fidelity_to_pure(rho, w) == pytest.approx(0.8, abs=1e-12)
        assert fidelity_to_pure(w, w) == pytest.approx(1, abs=1e-12)

    def test_biseparable_mixture(self, rho123):
        w = w_state([1 / math.sqrt(3)] * 3)
        assert fidelity_to_pure(rho123, w) == pytest.approx(2 / 3, abs=1e-12)

    def test_distribution(self):
        w = w_state([1 / math.sqrt(3)] * 3)
        rho = MixedState([(0.9, w), (0.1, vacuum(w.space))])
        dist = photon_number_distribution(rho)
        assert set(dist) == {(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0)}
        assert dist[(0, 0, 0)] == pytest.approx(0.1)
        assert dist[(0, 1, 0)] == pytest.approx(0.3)
        assert total_quanta_probability(rho, 0) == pytest.approx(0.1)
        assert total_quanta_probability(rho, 2) == pytest.approx(1)

    def test_json(self, rho123):
        back = MixedState.from_dict(rho123.to_dict())
        assert len(back) == 3
        np.testing.assert_allclose(back.weights, rho123.weights)


class TestPermuteModes:
    def test_relabel(self):
        psi = permute_modes(make_basis_state((1, 0, 0)), (2, 0, 1))
        assert psi.amplitude((0, 1, 0)) == 1

    def test_inverse(self):
        psi = w_state([0.6, 0.0, 0.8])
        order = (1, 2, 0)
        back = permute_modes(permute_modes(psi, order), np.argsort(order))
        assert back.allclose(psi)

    def test_not_a_permutation(self):
        with pytest.raises(FockSpaceError):
            permute_modes(vacuum(FockSpace(3)), (0, 0, 1))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), modes=st.integers(1, 5))
def test_distribution_normalized(seed, modes):
    rng = np.random.default_rng(seed)
    space = FockSpace(modes, 2)
    vec = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    psi = FockState(space, vec / np.linalg.norm(vec))
    assert sum(photon_number_distribution(psi).values()) == pytest.approx(1, abs=1e-12)


class TestOverlaps:
    def test_asymmetric_overlap(self):
        symmetric = w_state([1 / math.sqrt(3)] * 3)
        asymmetric = w_state([0.5, 0.5, 1 / math.sqrt(2)])
        assert abs(inner_product(symmetric, asymmetric)) == pytest.approx((1 + 1 / math.sqrt(2)) / math.sqrt(3))
        assert inner_product(asymmetric, symmetric) == pytest.approx(np.conj(inner_product(symmetric, asymmetric)))

    def test_product_of_pairs(self):
        pair = w_state([1 / math.sqrt(2)] * 2)
        product = tensor_product(pair, pair)
        assert product.modes == 4
        assert dict(product.items(atol=1e-15)) == pytest.approx(
            {(1, 0, 1, 0): 0.5, (1, 0, 0, 1): 0.5, (0, 1, 1, 0): 0.5, (0, 1, 0, 1): 0.5}
        )

    def test_hong_ou_mandel_distribution(self):
        space = FockSpace(2)
        psi = FockState.from_mapping(space, {(2, 0): -1 / math.sqrt(2), (0, 2): 1 / math.sqrt(2)})
        assert photon_number_distribution(psi) == pytest.approx({(0, 2): 0.5, (2, 0): 0.5})
