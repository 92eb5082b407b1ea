import numpy as np
import pytest

import fock
from conftest import random_gradient, random_mixed_state, random_state_with_gradient, random_symplectic
from coltherm import (
    BoseOccupation,
    CovarianceMatrix,
    InteractionParams,
    InvalidStateError,
    StateWithGradient,
    ThermalChannelParams,
    WilliamsonDecomposition,
    build_interaction_symplectic,
    build_thermal_channel,
    compute_qfi,
    d_superoperator,
    direct_sum,
    partial_trace,
    qfi_dense_inverse,
    qfi_dense_solve,
    qfi_fast,
    simulate_chain,
    squeezed_vacuum,
    symplectic_form,
    symplectic_residual,
    thermal_state,
    transform_gradient,
    vacuum_state,
    williamson,
)
from coltherm.qfi import KAPPA, vec, unvec

METHODS = (qfi_dense_inverse, qfi_dense_solve, qfi_fast)


def thermal_qfi_exact(temperature, frequency=1.0):
    occ = BoseOccupation.from_temperature(temperature, frequency)
    return occ.derivative**2 / (occ.value * (occ.value + 1.0))


def thermal_state_with_gradient(temperature, frequency=1.0):
    occ = BoseOccupation.from_temperature(temperature, frequency)
    return StateWithGradient(thermal_state(occ), occ.derivative * np.eye(2))


class TestWilliamson:
    def test_thermal_normal_form(self):
        decomp = williamson(thermal_state(1.0))
        assert decomp.nu == pytest.approx([1.5], rel=1e-14)
        assert np.allclose(decomp.s @ np.diag(decomp.w) @ decomp.s.T, 1.5 * np.eye(2), atol=1e-13)

    def test_squeezed_vacuum_is_pure(self):
        for r in (0.2, 1.0, 1.8):
            decomp = williamson(squeezed_vacuum(r))
            assert decomp.nu == pytest.approx([0.5], abs=1e-12)
            assert symplectic_residual(decomp.s) < 1e-10

    def test_random_states_reconstruct(self, rng):
        for _ in range(100):
            modes = int(rng.integers(1, 7))
            cm = random_mixed_state(rng, modes)
            decomp = williamson(cm)
            scale = np.abs(cm.data).max()
            recon = decomp.s @ np.diag(decomp.w) @ decomp.s.T
            assert np.abs(recon - cm.data).max() <= 1e-9 * scale
            assert symplectic_residual(decomp.s) <= 1e-9 * max(scale, 1.0)
            assert np.all(np.diff(decomp.nu) <= 1e-12)  # descending

    def test_degenerate_spectrum(self, rng):
        # equal symplectic eigenvalues across many modes
        base = direct_sum(*[thermal_state(0.8)] * 5)
        s = random_symplectic(rng, 5)
        cm = CovarianceMatrix(5, s @ base.data @ s.T)
        decomp = williamson(cm)
        assert decomp.nu == pytest.approx([1.3] * 5, rel=1e-10)
        recon = decomp.s @ np.diag(decomp.w) @ decomp.s.T
        assert np.abs(recon - cm.data).max() <= 1e-10 * np.abs(cm.data).max()

    def test_rejects_unphysical(self):
        with pytest.raises(InvalidStateError):
            williamson(CovarianceMatrix(1, 0.4 * np.eye(2)))
        with pytest.raises(InvalidStateError):
            williamson(CovarianceMatrix(1, np.diag([1.0, -0.2])))


class TestTransformGradient:
    def test_identity_decomposition_fixes_gradient(self, rng):
        grad = random_gradient(rng, 1)
        decomp = WilliamsonDecomposition(s=np.eye(2), nu=np.array([1.0]))
        assert np.allclose(transform_gradient(grad, decomp), grad, atol=1e-15)

    def test_pure_squeezer_hand_value(self):
        r = 0.7
        s = np.diag([np.exp(-r), np.exp(r)])
        decomp = WilliamsonDecomposition(s=s, nu=np.array([0.5]))
        grad = np.array([[1.0, 2.0], [2.0, -3.0]])
        m = -np.diag([np.exp(r), np.exp(-r)])  # Omega S^T Omega for this S
        assert np.allclose(transform_gradient(grad, decomp), m @ grad @ m.T, atol=1e-14)

    def test_untransform_recovers(self, rng):
        cm = random_mixed_state(rng, 3)
        grad = random_gradient(rng, 3)
        decomp = williamson(cm)
        back = decomp.s @ transform_gradient(grad, decomp) @ decomp.s.T
        assert np.abs(back - grad).max() <= 1e-10 * np.abs(grad).max()

    def test_vec_round_trip(self, rng):
        mat = rng.standard_normal((6, 6))
        assert np.array_equal(unvec(vec(mat)), mat)


class TestSuperoperatorConvention:
    def test_dense_matrix_action(self, rng):
        # kron-built matrix must act as V -> cov V cov + kappa Omega V Omega^T
        cm = random_mixed_state(rng, 2)
        v = random_gradient(rng, 2)
        omega = symplectic_form(2)
        direct = cm.data @ v @ cm.data + KAPPA * omega @ v @ omega.T
        assert np.allclose(unvec(d_superoperator(cm.data) @ vec(v)), direct, atol=1e-12)

    def test_positive_semidefinite_on_symmetric(self, rng):
        cm = random_mixed_state(rng, 2)
        d = d_superoperator(cm.data)
        eigs = np.linalg.eigvalsh(0.5 * (d + d.T))
        assert eigs.min() >= -1e-10 * abs(eigs).max()


class TestAgainstAnalyticThermal:
    @pytest.mark.parametrize("temperature", [0.1, 0.5, 1.0, 5.0])
    @pytest.mark.parametrize("method", METHODS, ids=lambda f: f.__name__)
    def test_single_mode_thermal(self, temperature, method):
        state = thermal_state_with_gradient(temperature)
        assert method(state) == pytest.approx(thermal_qfi_exact(temperature), rel=1e-10)

    @pytest.mark.parametrize("method", METHODS, ids=lambda f: f.__name__)
    def test_zero_gradient_gives_zero(self, method):
        state = StateWithGradient(thermal_state(0.7), np.zeros((2, 2)))
        assert method(state) == 0.0

    def test_two_copies_double(self):
        single = thermal_state_with_gradient(0.5)
        double = StateWithGradient(
            direct_sum(single.cm, single.cm),
            np.kron(np.eye(2), single.grad),
        )
        for method in METHODS:
            assert method(double) == pytest.approx(2.0 * method(single), rel=1e-10)


class TestAgainstFockOracle:
    @pytest.mark.parametrize("temperature", [0.5, 1.0])
    def test_thermal(self, temperature):
        expected = fock.squeezed_thermal_qfi(temperature, 1.0, r=0.0, dim=60)
        state = thermal_state_with_gradient(temperature)
        for method in METHODS:
            assert method(state) == pytest.approx(expected, rel=1e-4)

    @pytest.mark.parametrize("r", [0.3, 0.5])
    def test_squeezed_thermal(self, r):
        temperature = 0.5
        occ = BoseOccupation.from_temperature(temperature, 1.0)
        squeezer = np.diag([np.exp(-r), np.exp(r)])
        cm = CovarianceMatrix(1, squeezer @ thermal_state(occ).data @ squeezer.T)
        grad = squeezer @ (occ.derivative * np.eye(2)) @ squeezer.T
        state = StateWithGradient(cm, grad)
        expected = fock.squeezed_thermal_qfi(temperature, 1.0, r=r, dim=60)
        for method in METHODS:
            assert method(state) == pytest.approx(expected, rel=1e-4)


class TestMethodEquivalence:
    def test_random_states(self, rng):
        for _ in range(30):
            modes = int(rng.integers(1, 7))
            state = random_state_with_gradient(rng, modes)
            reference = qfi_dense_inverse(state)
            assert qfi_dense_solve(state) == pytest.approx(reference, rel=1e-10)
            assert qfi_fast(state) == pytest.approx(reference, rel=1e-8)

    def test_chain_state_cross_method(self):
        occ = BoseOccupation.from_temperature(0.1, 1.0)
        ch = build_thermal_channel(ThermalChannelParams(1.0, occ))
        s = build_interaction_symplectic(InteractionParams(np.pi / 3, 0.0))
        state = simulate_chain(ch, s, squeezed_vacuum(0.5), 3)
        reference = qfi_dense_solve(state)
        assert qfi_fast(state) == pytest.approx(reference, rel=1e-8)
        assert qfi_dense_inverse(state) == pytest.approx(reference, rel=1e-8)

    def test_dispatch_table(self):
        state = thermal_state_with_gradient(0.5)
        for name in ("dense_inverse", "dense_solve", "williamson_fast"):
            assert compute_qfi(state, name) == pytest.approx(thermal_qfi_exact(0.5), rel=1e-10)
        with pytest.raises(ValueError):
            compute_qfi(state, "unknown")


class TestStructuralProperties:
    def test_additivity_over_direct_sums(self, rng):
        a = random_state_with_gradient(rng, 2)
        b = random_state_with_gradient(rng, 3)
        joint_grad = np.zeros((10, 10))
        joint_grad[:4, :4] = a.grad
        joint_grad[4:, 4:] = b.grad
        joint = StateWithGradient(direct_sum(a.cm, b.cm), joint_grad)
        assert qfi_fast(joint) == pytest.approx(qfi_fast(a) + qfi_fast(b), rel=1e-10)

    def test_symplectic_invariance(self, rng):
        state = random_state_with_gradient(rng, 3)
        t = random_symplectic(rng, 3)
        moved = StateWithGradient(
            CovarianceMatrix(3, t @ state.cm.data @ t.T), t @ state.grad @ t.T
        )
        assert qfi_fast(moved) == pytest.approx(qfi_fast(state), rel=1e-10)
        assert qfi_dense_solve(moved) == pytest.approx(qfi_dense_solve(state), rel=1e-10)

    def test_monotone_under_partial_trace(self):
        occ = BoseOccupation.from_temperature(0.1, 1.0)
        ch = build_thermal_channel(ThermalChannelParams(1.0, occ))
        s = build_interaction_symplectic(InteractionParams(np.pi / 3, 0.2))
        state = simulate_chain(ch, s, squeezed_vacuum(0.4), 8)
        values = []
        for n in range(1, 9):
            keep = list(range(n))
            sub_cm = partial_trace(state.cm, keep)
            rows = np.array([[2 * m, 2 * m + 1] for m in keep]).reshape(-1)
            sub = StateWithGradient(sub_cm, state.grad[np.ix_(rows, rows)])
            values.append(qfi_fast(sub))
        diffs = np.diff(values)
        assert np.all(diffs >= -1e-10 * max(values))

    def test_pure_state_zero_over_zero(self):
        state = StateWithGradient(vacuum_state(1), np.zeros((2, 2)))
        value, diag = qfi_fast(state, return_diagnostics=True)
        assert value == 0.0
        assert diag.regularized_blocks == 2  # both vacuum blocks hit the cutoff

    def test_mixed_plus_pure_mode(self, rng):
        # a pure ancilla direct-summed onto a mixed probe must not break the solve
        probe = thermal_state_with_gradient(0.5)
        joint_grad = np.zeros((4, 4))
        joint_grad[:2, :2] = probe.grad
        joint = StateWithGradient(direct_sum(probe.cm, squeezed_vacuum(0.6)), joint_grad)
        expected = thermal_qfi_exact(0.5)
        assert qfi_fast(joint) == pytest.approx(expected, rel=1e-9)
        assert qfi_dense_inverse(joint) == pytest.approx(expected, rel=1e-9)
        assert qfi_dense_solve(joint) == pytest.approx(expected, rel=1e-9)
