import numpy as np
import pytest
import scipy.linalg

from autoqec.lindblad import (
    FidelityTrace,
    IntegrationError,
    IntegratorOptions,
    LindbladModel,
    bare_qubit_fidelity,
    baseline_three_qubit,
    integrate,
    liouvillian,
    rhs,
    steady_state,
    stiffness_scale,
)
from autoqec.spaces import CompositeSpace, Operator, pauli_library

from conftest import assert_matrix_close


def random_density(rng, d):
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = m @ m.conj().T
    return rho / np.trace(rho)


def random_model(rng, space, n_ops=2, scale=1.0):
    d = space.total_dim
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = Operator(space, scale * (a + a.conj().T) / 2)
    ops = tuple(
        Operator(space, scale * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))))
        for _ in range(n_ops)
    )
    return LindbladModel(space, h, ops)


@pytest.fixture(scope="module")
def qubit_space():
    return CompositeSpace.of(("A", 2))


class TestRhs:
    def test_zero_generator(self, qubit_space):
        model = LindbladModel(qubit_space, qubit_space.zero(), ())
        rho = np.array([[0.25, 0.1], [0.1, 0.75]], dtype=complex)
        assert_matrix_close(rhs(model, rho), np.zeros((2, 2)))

    def test_flip_channel_dissipator(self, qubit_space):
        gamma = 0.4
        x = pauli_library(qubit_space, ("A",))["A"].x
        model = LindbladModel(qubit_space, qubit_space.zero(), (np.sqrt(gamma) * x,))
        rng = np.random.default_rng(0)
        rho = random_density(rng, 2)
        assert_matrix_close(rhs(model, rho), gamma * (x.matrix @ rho @ x.matrix - rho))

    def test_output_traceless_and_hermitian(self):
        rng = np.random.default_rng(1)
        space = CompositeSpace.of(("A", 2), ("B", 3))
        model = random_model(rng, space, n_ops=3)
        for _ in range(5):
            rho = random_density(rng, 6)
            out = rhs(model, rho)
            assert abs(np.trace(out)) < 1e-12
            assert np.max(np.abs(out - out.conj().T)) < 1e-12

    def test_matches_vectorized_superoperator(self):
        rng = np.random.default_rng(2)
        space = CompositeSpace.of(("A", 2), ("B", 2))
        model = random_model(rng, space, n_ops=3)
        sup = liouvillian(model)
        for _ in range(5):
            rho = random_density(rng, 4)
            assert np.max(np.abs(sup @ rho.ravel() - rhs(model, rho).ravel())) < 1e-12

    def test_nonhermitian_hamiltonian_rejected(self, qubit_space):
        h = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(ValueError, match="Hermitian"):
            LindbladModel(qubit_space, Operator(qubit_space, h), ())


class TestIntegrateAgainstExactPropagation:
    @pytest.mark.parametrize("method,kwargs", [
        ("adaptive", {"rtol": 1e-10, "atol": 1e-13}),
        ("fixed", {"dt": 1e-4}),
    ])
    def test_matches_matrix_exponential(self, method, kwargs):
        rng = np.random.default_rng(5)
        space = CompositeSpace.of(("A", 2), ("B", 2))
        model = random_model(rng, space, n_ops=2, scale=0.8)
        psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        psi /= np.linalg.norm(psi)
        rho0 = np.outer(psi, psi.conj())
        t_max = 1.5
        opts = IntegratorOptions(t_max=t_max, method=method, n_samples=30, **kwargs)
        trace = integrate(model, rho0, opts, psi)
        sup = liouvillian(model)
        proj = np.outer(psi, psi.conj())
        for i in (10, 30):
            exact = scipy.linalg.expm(sup * trace.t[i]) @ rho0.ravel()
            fid_exact = np.einsum("ij,ji->", proj, exact.reshape(4, 4)).real
            assert abs(trace.fidelity[i] - fid_exact) < 1e-8

    def test_zero_generator_keeps_fidelity_constant(self, qubit_space):
        model = LindbladModel(qubit_space, qubit_space.zero(), ())
        psi = np.array([1.0, 1.0]) / np.sqrt(2)
        rho0 = np.outer(psi, psi)
        trace = integrate(model, rho0, IntegratorOptions(t_max=3.0, n_samples=10), psi)
        assert np.max(np.abs(trace.fidelity - 1.0)) < 1e-12

    def test_bare_qubit_flip_decay(self, qubit_space):
        gamma = 0.1
        x = pauli_library(qubit_space, ("A",))["A"].x
        model = LindbladModel(qubit_space, qubit_space.zero(), (np.sqrt(gamma) * x,))
        psi = np.array([1.0, -1j]) / np.sqrt(2)
        rho0 = np.outer(psi, psi.conj())
        opts = IntegratorOptions(t_max=20.0, n_samples=80, rtol=1e-10, atol=1e-13)
        trace = integrate(model, rho0, opts, psi)
        expected = bare_qubit_fidelity(gamma, trace.t)
        assert np.max(np.abs(trace.fidelity - expected)) < 1e-8

    def test_zero_horizon_returns_single_row(self, qubit_space):
        model = LindbladModel(qubit_space, qubit_space.zero(), ())
        psi = np.array([1.0, 0.0])
        trace = integrate(model, np.outer(psi, psi), IntegratorOptions(t_max=0.0), psi)
        assert len(trace.t) == 1
        assert trace.fidelity[0] == pytest.approx(1.0, abs=1e-14)

    def test_methods_agree_on_sample_grid(self):
        rng = np.random.default_rng(8)
        space = CompositeSpace.of(("A", 2), ("B", 2))
        model = random_model(rng, space, n_ops=2, scale=0.6)
        psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        psi /= np.linalg.norm(psi)
        rho0 = np.outer(psi, psi.conj())
        t_adapt = integrate(model, rho0,
                            IntegratorOptions(t_max=2.0, rtol=1e-11, atol=1e-13, n_samples=20), psi)
        t_fixed = integrate(model, rho0,
                            IntegratorOptions(t_max=2.0, method="fixed", dt=2e-4, n_samples=20), psi)
        assert np.array_equal(t_adapt.t, t_fixed.t)
        assert np.max(np.abs(t_adapt.fidelity - t_fixed.fidelity)) < 1e-8


class TestIntegrationFailureModes:
    def test_stability_guard(self, qubit_space):
        x = pauli_library(qubit_space, ("A",))["A"].x
        model = LindbladModel(qubit_space, qubit_space.zero(), (10.0 * x,))
        psi = np.array([1.0, 0.0])
        opts = IntegratorOptions(t_max=1.0, method="fixed", dt=0.05, n_samples=1)
        with pytest.raises(IntegrationError, match="stability guard"):
            integrate(model, np.outer(psi, psi), opts, psi)

    def test_guard_scale_combines_hamiltonian_and_dissipators(self, qubit_space):
        lib = pauli_library(qubit_space, ("A",))["A"]
        model = LindbladModel(qubit_space, 2.0 * lib.z, (3.0 * lib.x,))
        assert stiffness_scale(model) == pytest.approx(2.0 + 9.0)

    def test_step_underflow(self, qubit_space):
        x = pauli_library(qubit_space, ("A",))["A"].x
        model = LindbladModel(qubit_space, qubit_space.zero(), (1e4 * x,))
        psi = np.array([1.0, 0.0])
        opts = IntegratorOptions(t_max=1e7, n_samples=1, rtol=1e-10, atol=1e-12)
        with pytest.raises(IntegrationError, match="underflow"):
            integrate(model, np.outer(psi, psi), opts, psi)

    def test_invalid_options(self):
        with pytest.raises(ValueError, match="dt"):
            IntegratorOptions(t_max=1.0, method="fixed")
        with pytest.raises(ValueError, match="method"):
            IntegratorOptions(t_max=1.0, method="rk8")

    def test_trace_invariants_on_trace_object(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            FidelityTrace(
                t=np.array([0.0, 0.0]),
                fidelity=np.array([1.0, 1.0]),
                trace_error=np.zeros(2),
                min_eigenvalue=np.zeros(2),
                max_hermiticity_error=0.0,
                method="adaptive",
                n_steps=1,
                n_rejected=0,
            )
        with pytest.raises(ValueError, match="fidelity"):
            FidelityTrace(
                t=np.array([0.0, 1.0]),
                fidelity=np.array([1.0, 1.5]),
                trace_error=np.zeros(2),
                min_eigenvalue=np.zeros(2),
                max_hermiticity_error=0.0,
                method="adaptive",
                n_steps=1,
                n_rejected=0,
            )


class TestThreeQubitBaseline:
    def test_t_zero_is_unity(self):
        assert baseline_three_qubit(0.1, 0.0) == pytest.approx(1.0)

    def test_long_time_limit_is_one_eighth(self):
        # for the stored codeword, the triple-flip overlap vanishes, so
        # the infinite-time fidelity is exactly (1/2)^3
        assert baseline_three_qubit(0.1, 1e6) == pytest.approx(0.125, abs=1e-12)

    def test_matches_brute_force_channel(self):
        # oracle: exact propagation of the 8-dim register under three
        # independent flip dissipators
        gamma = 0.1
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        eye2 = np.eye(2, dtype=complex)

        def lift(op, slot):
            mats = [eye2] * 3
            mats[slot] = op
            return np.kron(np.kron(mats[0], mats[1]), mats[2])

        sup = np.zeros((64, 64), dtype=complex)
        eye8 = np.eye(8, dtype=complex)
        for slot in range(3):
            l = np.sqrt(gamma) * lift(x, slot)
            ldl = l.conj().T @ l
            sup += np.kron(l, l.conj()) - 0.5 * (np.kron(ldl, eye8) + np.kron(eye8, ldl.T))
        psi = np.zeros(8, dtype=complex)
        psi[0] = 1 / np.sqrt(2)
        psi[7] = -1j / np.sqrt(2)
        rho0 = np.outer(psi, psi.conj())
        proj = rho0.copy()
        for t in (0.0, 0.5, 2.0, 7.5, 30.0):
            exact = scipy.linalg.expm(sup * t) @ rho0.ravel()
            fid = np.einsum("ij,ji->", proj, exact.reshape(8, 8)).real
            assert baseline_three_qubit(gamma, t) == pytest.approx(fid, abs=1e-12)

    def test_general_state_overlap_form(self):
        # a register state with nonzero triple-flip overlap keeps a
        # larger floor; cross-check against the same brute-force channel
        gamma = 0.2
        psi = np.zeros(8, dtype=complex)
        psi[0] = 1 / np.sqrt(2)
        psi[7] = 1 / np.sqrt(2)  # +|hhh> component: triple flip maps psi to itself
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        eye2 = np.eye(2, dtype=complex)
        sup = np.zeros((64, 64), dtype=complex)
        eye8 = np.eye(8, dtype=complex)
        for slot in range(3):
            mats = [eye2] * 3
            mats[slot] = x
            l = np.sqrt(gamma) * np.kron(np.kron(mats[0], mats[1]), mats[2])
            ldl = l.conj().T @ l
            sup += np.kron(l, l.conj()) - 0.5 * (np.kron(ldl, eye8) + np.kron(eye8, ldl.T))
        rho0 = np.outer(psi, psi.conj())
        t = 3.0
        exact = scipy.linalg.expm(sup * t) @ rho0.ravel()
        fid = np.einsum("ij,ji->", rho0, exact.reshape(8, 8)).real
        assert baseline_three_qubit(gamma, t, psi0=psi) == pytest.approx(fid, abs=1e-12)


class TestSteadyState:
    def test_zero_generator_reports_degeneracy(self, qubit_space):
        model = LindbladModel(qubit_space, qubit_space.zero(), ())
        result = steady_state(model)
        assert result.degenerate
        assert result.rho is None
        assert len(result.basis) == 4

    def test_flip_channel_conserves_x_and_degenerates(self, qubit_space):
        x = pauli_library(qubit_space, ("A",))["A"].x
        model = LindbladModel(qubit_space, qubit_space.zero(), (x,))
        result = steady_state(model)
        assert result.degenerate
        assert len(result.basis) == 2

    def test_damped_driven_qubit_unique_state(self, qubit_space):
        lib = pauli_library(qubit_space, ("A",))["A"]
        h = 0.5 * lib.x
        model = LindbladModel(qubit_space, h, (lib.sigma_gh,))  # decay h -> g
        result = steady_state(model)
        assert not result.degenerate
        assert result.residual < 1e-9
        assert np.trace(result.rho) == pytest.approx(1.0, abs=1e-12)
        # cross-check against long-time exact propagation
        sup = liouvillian(model)
        rho0 = np.diag([1.0, 0.0]).astype(complex)
        longtime = (scipy.linalg.expm(sup * 200.0) @ rho0.ravel()).reshape(2, 2)
        assert_matrix_close(result.rho, longtime, tol=1e-9)

    def test_network_plateau_matches_conserved_quantity_projection(self):
        # flipped-register relaxation: the long-time fidelity equals the
        # projection of the start state onto the stationary subspace
        # along the decaying directions (computed from left/right
        # nullspaces), exercised on the error-free memory network
        from autoqec import network

        params = network.MemoryParams(omega=6.0, alpha=3.0, gamma_flip=0.0)
        model = network.assemble_memory(params)
        reg = network.register_basis_state("ghg")  # one flip on Q2 from ggg
        rho0 = network.initial_density(reg)
        from autoqec.lindblad import null_space

        sup = liouvillian(model)
        right = null_space(sup, rcond=1e-9)
        left = null_space(sup.conj().T, rcond=1e-9)
        overlap = left.conj().T @ right
        coeffs = np.linalg.solve(overlap, left.conj().T @ rho0.ravel())
        rho_inf = (right @ coeffs).reshape(32, 32)
        target = network.fidelity_projector(network.register_basis_state("ggg"))
        fid_inf = np.einsum("ij,ji->", target.matrix, rho_inf).real
        opts = IntegratorOptions(t_max=12.0, n_samples=60, rtol=1e-9, atol=1e-12)
        trace = integrate(model, rho0, opts, target)
        assert trace.fidelity[-1] == pytest.approx(fid_inf, abs=1e-6)
