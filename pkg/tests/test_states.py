import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state
from mems_forge.errors import ContractError, DomainError, ShapeError
from mems_forge.measures import concurrence, linear_entropy
from mems_forge.reduced import steady_state, DynamicsParams
from mems_forge.states import (
    FLIP_Q2,
    apply_local_unitaries,
    basis_state,
    bell_phi_plus,
    bit_phase_flip_q2,
    dephase_qubits,
    maximally_mixed,
    mems,
    state_from_json,
    state_to_json,
    validate_state,
    werner,
)


class TestMems:
    def test_rho2_at_two_thirds(self):
        expected = np.diag([1, 1, 0, 1]) / 3 + 0j
        expected[0, 3] = expected[3, 0] = 1 / 3
        assert np.allclose(mems(2 / 3, "rho2"), expected, atol=1e-15)

    def test_rho2_at_zero_is_separable(self):
        rho = mems(0.0, "rho2")
        assert np.allclose(rho, np.diag(np.diag(rho)))
        assert concurrence(rho) == pytest.approx(0.0, abs=1e-9)

    def test_rho1_at_one_is_bell(self):
        assert np.allclose(mems(1.0, "rho1"), bell_phi_plus())
        assert concurrence(mems(1.0, "rho1")) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("family,r", [("rho1", 0.5), ("rho1", 1.01), ("rho2", 0.7), ("rho2", -0.1)])
    def test_out_of_range(self, family, r):
        with pytest.raises(DomainError):
            mems(r, family)

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            mems(0.5, "rho3")

    @pytest.mark.parametrize("r", np.linspace(2 / 3, 1, 20))
    def test_rho1_closed_forms(self, r):
        rho = mems(r, "rho1")
        assert concurrence(rho) == pytest.approx(r, abs=1e-9)
        assert linear_entropy(rho) == pytest.approx(4 / 3 * (1 - r**2 - (1 - r) ** 2), abs=1e-12)

    @pytest.mark.parametrize("r", np.linspace(0, 2 / 3, 20))
    def test_rho2_closed_forms(self, r):
        rho = mems(r, "rho2")
        assert concurrence(rho) == pytest.approx(r, abs=1e-9)
        assert linear_entropy(rho) == pytest.approx(4 / 3 * (2 / 3 - r**2 / 2), abs=1e-12)

    def test_families_meet_at_two_thirds(self):
        assert np.allclose(mems(2 / 3, "rho1"), mems(2 / 3, "rho2"), atol=1e-15)


class TestWerner:
    def test_endpoints(self):
        assert concurrence(werner(1.0)) == pytest.approx(1.0, abs=1e-9)
        assert linear_entropy(werner(1.0)) == pytest.approx(0.0, abs=1e-12)
        assert concurrence(werner(0.0)) == pytest.approx(0.0, abs=1e-9)
        assert linear_entropy(werner(0.0)) == pytest.approx(1.0, abs=1e-12)

    def test_separability_threshold(self):
        assert concurrence(werner(1 / 3)) == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("p", [0.4, 0.6, 0.9])
    def test_concurrence_formula(self, p):
        assert concurrence(werner(p)) == pytest.approx((3 * p - 1) / 2, abs=1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            werner(1.5)


class TestFlip:
    def test_ground_to_01(self):
        assert np.allclose(bit_phase_flip_q2(basis_state("00")), basis_state("01"))

    def test_invariants(self, rng):
        for _ in range(10):
            rho = random_state(rng)
            out = bit_phase_flip_q2(rho)
            assert concurrence(out) == pytest.approx(concurrence(rho), abs=1e-10)
            assert linear_entropy(out) == pytest.approx(linear_entropy(rho), abs=1e-10)

    def test_involution(self, rng):
        rho = random_state(rng)
        assert np.max(np.abs(bit_phase_flip_q2(bit_phase_flip_q2(rho)) - rho)) <= 1e-12

    def test_moves_steady_coherence_to_corner(self):
        out = bit_phase_flip_q2(steady_state(DynamicsParams(lam=0.8)))
        assert abs(out[1, 2]) <= 1e-14
        assert abs(out[0, 3]) == pytest.approx(0.8 / 1.64**2, abs=1e-12)
        assert out[0, 3].real > 0
        assert out[2, 2].real == pytest.approx(0.0, abs=1e-14)

    def test_flip_matrix_is_local(self):
        z_x = np.array([[0, 1], [-1, 0]])
        assert np.array_equal(FLIP_Q2, np.kron(np.eye(2), z_x))


class TestDephasing:
    def test_identity_and_full(self, rng):
        rho = random_state(rng)
        assert np.allclose(dephase_qubits(rho, 1.0), rho)
        assert np.allclose(dephase_qubits(rho, 0.0), np.diag(np.diag(rho)))

    def test_hamming_weights(self):
        rho = np.full((4, 4), 0.01, dtype=complex) + np.eye(4) * 0.24
        out = dephase_qubits(rho, 0.5)
        assert out[0, 1] == pytest.approx(0.005)
        assert out[0, 3] == pytest.approx(0.0025)
        assert out[1, 2] == pytest.approx(0.0025)

    @settings(max_examples=40, deadline=None)
    @given(r=st.floats(0, 2 / 3), q=st.floats(0, 1))
    def test_rho2_closed_under_dephasing(self, r, q):
        assert np.max(np.abs(dephase_qubits(mems(r, "rho2"), q) - mems(r * q * q, "rho2"))) <= 1e-15

    def test_domain(self):
        with pytest.raises(DomainError):
            dephase_qubits(maximally_mixed(), 1.2)


class TestValidation:
    def test_rejects_bad_shape(self):
        with pytest.raises(ShapeError):
            validate_state(np.eye(3) / 3)

    def test_rejects_bad_trace(self):
        with pytest.raises(ContractError):
            validate_state(np.eye(4) / 2)

    def test_rejects_negative(self):
        with pytest.raises(ContractError):
            validate_state(np.diag([0.6, 0.6, -0.2, 0.0]))

    def test_rejects_non_hermitian(self):
        rho = maximally_mixed()
        rho[0, 1] = 0.1
        with pytest.raises(ContractError):
            validate_state(rho)

    def test_stack(self, rng):
        stack = np.array([random_state(rng) for _ in range(5)])
        assert validate_state(stack).shape == (5, 4, 4)


def test_local_unitaries_preserve_concurrence(rng):
    from scipy.stats import unitary_group

    for _ in range(5):
        rho = random_state(rng)
        u1 = unitary_group.rvs(2, random_state=rng)
        u2 = unitary_group.rvs(2, random_state=rng)
        assert concurrence(apply_local_unitaries(rho, u1, u2)) == pytest.approx(concurrence(rho), abs=1e-9)


def test_json_round_trip(rng):
    rho = random_state(rng)
    text = state_to_json(rho)
    data = json.loads(text)
    assert data["basis"] == "q1q2" and len(data["re"]) == 16 and len(data["im"]) == 16
    assert np.max(np.abs(state_from_json(text) - rho)) == 0.0


def test_json_rejects_wrong_basis():
    with pytest.raises(ContractError):
        state_from_json(json.dumps({"basis": "q2q1", "re": [0] * 16, "im": [0] * 16}))
    with pytest.raises(ShapeError):
        state_from_json(json.dumps({"basis": "q1q2", "re": [0] * 9, "im": [0] * 9}))
