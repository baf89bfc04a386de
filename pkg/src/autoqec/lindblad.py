"""Lindblad master-equation right-hand side, integration, and observables.

The generator is ``rho' = -i[H, rho] + sum_j (L_j rho L_j† - (1/2){L_j† L_j, rho})``.
Two integrators are provided: an adaptive embedded Dormand-Prince 5(4)
pair (the default) and a fixed-step classical 4th-order method kept for
cross-validation.  Both propagate the row-major vectorized density
matrix through a precomputed superoperator; the commutator-form
:func:`rhs` is the reference implementation and the two must agree to
1e-12 on random states.

The density matrix is never renormalized mid-run: trace drift,
hermiticity error and the minimum eigenvalue are monitored so that
integration error is surfaced rather than hidden.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .spaces import CompositeSpace, Operator, SpaceMismatchError

__all__ = [
    "LindbladModel",
    "IntegratorOptions",
    "FidelityTrace",
    "IntegrationError",
    "rhs",
    "liouvillian",
    "stiffness_scale",
    "integrate",
    "baseline_three_qubit",
    "bare_qubit_fidelity",
    "steady_state",
    "SteadyStateResult",
]

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-7


class IntegrationError(RuntimeError):
    """Raised when a run violates its accuracy contract or cannot proceed.

    Carries the partial trace accumulated so far, if any, so callers can
    persist flagged partial output.
    """

    def __init__(self, message: str, partial: "FidelityTrace | None" = None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Hamiltonian plus collapse operators on a shared space."""

    space: CompositeSpace
    h: Operator
    collapse_ops: tuple[Operator, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "collapse_ops", tuple(self.collapse_ops))
        if self.h.space != self.space:
            raise SpaceMismatchError("Hamiltonian lives on a different space")
        if not self.h.is_hermitian(HERMITICITY_TOL):
            raise ValueError("Hamiltonian must be Hermitian")
        for op in self.collapse_ops:
            if op.space != self.space:
                raise SpaceMismatchError("collapse operator lives on a different space")


def rhs(model: LindbladModel, rho: np.ndarray) -> np.ndarray:
    """Reference commutator-form generator applied to a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    h = model.h.matrix
    out = -1j * (h @ rho - rho @ h)
    for op in model.collapse_ops:
        l = op.matrix
        ld = l.conj().T
        ldl = ld @ l
        out += l @ rho @ ld - 0.5 * (ldl @ rho + rho @ ldl)
    return out


def liouvillian(model: LindbladModel) -> np.ndarray:
    """Superoperator matrix for the row-major vectorization of rho.

    With vec taken in C order, vec(A X B) = (A ⊗ B^T) vec(X); the
    returned matrix satisfies ``liouvillian @ rho.ravel() ==
    rhs(rho).ravel()``.
    """
    d = model.space.total_dim
    eye = np.eye(d, dtype=complex)
    h = model.h.matrix
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for op in model.collapse_ops:
        l = op.matrix
        ldl = l.conj().T @ l
        sup += np.kron(l, l.conj())
        sup -= 0.5 * (np.kron(ldl, eye) + np.kron(eye, ldl.T))
    return sup


def stiffness_scale(model: LindbladModel) -> float:
    """Spectral-norm rate scale ||H|| + sum_j ||L_j† L_j||."""
    scale = np.linalg.norm(model.h.matrix, 2)
    for op in model.collapse_ops:
        l = op.matrix
        scale += np.linalg.norm(l.conj().T @ l, 2)
    return float(scale)


@dataclass(frozen=True)
class IntegratorOptions:
    """Integration controls.

    method "adaptive" uses the embedded 5(4) pair with (rtol, atol);
    method "fixed" uses classical RK4 with step ``dt``, subject to the
    stability guard dt * stiffness_scale(model) < 0.1.  Samples are
    taken on the uniform grid t_i = i * t_max / n_samples, which both
    methods hit exactly so traces from the two are directly comparable.
    """

    t_max: float
    method: str = "adaptive"
    rtol: float = 1e-8
    atol: float = 1e-10
    dt: float | None = None
    n_samples: int = 200

    def __post_init__(self) -> None:
        if self.method not in ("adaptive", "fixed"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.t_max < 0:
            raise ValueError("t_max must be nonnegative")
        if self.method == "fixed":
            if self.dt is None or self.dt <= 0:
                raise ValueError("fixed-step method requires dt > 0")
        else:
            if self.rtol <= 0 or self.atol <= 0:
                raise ValueError("adaptive method requires positive tolerances")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")


@dataclass(frozen=True)
class FidelityTrace:
    """Sampled (t, fidelity, trace error, min eigenvalue) time series."""

    t: np.ndarray
    fidelity: np.ndarray
    trace_error: np.ndarray
    min_eigenvalue: np.ndarray
    max_hermiticity_error: float
    method: str
    n_steps: int
    n_rejected: int
    flags: tuple[str, ...] = ()
    final_rho: np.ndarray | None = None

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("sample times must be strictly increasing")
        f = np.asarray(self.fidelity, dtype=float)
        if np.any(f < -1e-8) or np.any(f > 1 + 1e-8):
            raise ValueError("fidelity left [0, 1] beyond tolerance")

    def rows(self):
        return zip(self.t, self.fidelity, self.trace_error, self.min_eigenvalue)


# Dormand-Prince 5(4) tableau; row 7 equals the 5th-order weights (FSAL).
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_ERR = _DP_B5 - np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)

_MIN_STEP_FRACTION = 1e-14


def _fidelity_observable(target, space: CompositeSpace) -> np.ndarray:
    if isinstance(target, Operator):
        if target.space != space:
            raise SpaceMismatchError("fidelity observable lives on a different space")
        return target.matrix
    vec = np.asarray(target, dtype=complex).ravel()
    if vec.shape != (space.total_dim,):
        raise ValueError("fidelity target must be an Operator or a state vector on the space")
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"fidelity state vector not normalized (norm {norm})")
    return np.outer(vec, vec.conj())


class _Sampler:
    """Accumulates per-sample observables and enforces run invariants."""

    def __init__(self, proj: np.ndarray, d: int, method: str):
        self.proj = proj
        self.d = d
        self.method = method
        self.t: list[float] = []
        self.fidelity: list[float] = []
        self.trace_error: list[float] = []
        self.min_eig: list[float] = []
        self.max_herm = 0.0
        self.positivity_violated = False

    def record(self, t: float, y: np.ndarray) -> None:
        rho = y.reshape(self.d, self.d)
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        tr_err = float(abs(np.trace(rho) - 1.0))
        if tr_err > TRACE_TOL:
            self._fail(f"trace drift {tr_err:.2e} exceeds {TRACE_TOL} at t={t:g}",
                       "trace-drift")
        if herm > HERMITICITY_TOL:
            self._fail(f"hermiticity error {herm:.2e} exceeds {HERMITICITY_TOL} at t={t:g}",
                       "hermiticity")
        self.max_herm = max(self.max_herm, herm)
        fid = float(np.einsum("ij,ji->", self.proj, rho).real)
        min_eig = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0])
        self.t.append(t)
        self.fidelity.append(fid)
        self.trace_error.append(tr_err)
        self.min_eig.append(min_eig)
        if min_eig < -POSITIVITY_TOL:
            self.positivity_violated = True

    def _fail(self, message: str, flag: str) -> None:
        # partial trace of the valid prefix, attached for salvage output
        try:
            partial = self.finish(0, 0, extra_flags=(flag,))
        except ValueError:
            partial = None
        raise IntegrationError(message, partial=partial)

    def finish(self, n_steps: int, n_rejected: int,
               extra_flags: tuple[str, ...] = (),
               final_y: np.ndarray | None = None) -> FidelityTrace:
        flags = extra_flags
        if self.positivity_violated:
            flags = flags + ("positivity",)
        return FidelityTrace(
            t=np.array(self.t),
            fidelity=np.array(self.fidelity),
            trace_error=np.array(self.trace_error),
            min_eigenvalue=np.array(self.min_eig),
            max_hermiticity_error=self.max_herm,
            method=self.method,
            n_steps=n_steps,
            n_rejected=n_rejected,
            flags=flags,
            final_rho=None if final_y is None else final_y.reshape(self.d, self.d).copy(),
        )


def integrate(model: LindbladModel, rho0: np.ndarray, opts: IntegratorOptions,
              fidelity_target) -> FidelityTrace:
    """Propagate rho0 and sample fidelity, trace error and min eigenvalue.

    ``fidelity_target`` is either a normalized state vector (fidelity
    <psi|rho|psi>) or an Operator observable such as a codeword
    projector tensored with identities.  Raises
    :class:`IntegrationError` on stability-guard violation, step-size
    underflow, or when trace/hermiticity monitoring exceeds tolerance.
    """
    d = model.space.total_dim
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (d, d):
        raise ValueError(f"rho0 shape {rho0.shape} does not match space dim {d}")
    proj = _fidelity_observable(fidelity_target, model.space)
    sup = liouvillian(model)
    y = rho0.ravel().astype(complex)

    sampler = _Sampler(proj, d, opts.method)
    sampler.record(0.0, y)
    if opts.t_max == 0:
        return sampler.finish(0, 0, final_y=y)

    grid = np.linspace(0.0, opts.t_max, opts.n_samples + 1)
    if opts.method == "fixed":
        return _integrate_rk4(model, sup, y, grid, opts, sampler)
    return _integrate_dp54(sup, y, grid, opts, sampler)


def _integrate_rk4(model: LindbladModel, sup: np.ndarray, y: np.ndarray,
                   grid: np.ndarray, opts: IntegratorOptions,
                   sampler: _Sampler) -> FidelityTrace:
    interval = grid[1] - grid[0]
    steps_per_interval = max(1, int(np.ceil(interval / opts.dt)))
    h = interval / steps_per_interval
    guard = h * stiffness_scale(model)
    if guard >= 0.1:
        raise IntegrationError(
            f"stability guard violated: dt * rate scale = {guard:.3g} >= 0.1; "
            "the problem is stiffer than configured"
        )
    n_steps = 0
    for i in range(1, len(grid)):
        for _ in range(steps_per_interval):
            k1 = sup @ y
            k2 = sup @ (y + 0.5 * h * k1)
            k3 = sup @ (y + 0.5 * h * k2)
            k4 = sup @ (y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            n_steps += 1
        sampler.record(grid[i], y)
    return sampler.finish(n_steps, 0, final_y=y)


def _integrate_dp54(sup: np.ndarray, y: np.ndarray, grid: np.ndarray,
                    opts: IntegratorOptions, sampler: _Sampler) -> FidelityTrace:
    rtol, atol = opts.rtol, opts.atol
    t_end = grid[-1]
    t = 0.0
    f0 = sup @ y
    # conservative first step from the initial derivative scale
    scale0 = atol + rtol * np.max(np.abs(y))
    rate = np.max(np.abs(f0)) / scale0 if np.max(np.abs(f0)) > 0 else 0.0
    h = min(grid[1] - grid[0], 0.1 / rate) if rate > 0 else grid[1] - grid[0]
    min_step = _MIN_STEP_FRACTION * t_end

    k = np.empty((7, y.size), dtype=complex)
    k[0] = f0
    n_steps = 0
    n_rejected = 0
    next_sample = 1
    while t < t_end:
        t_next_sample = grid[next_sample]
        h = min(h, t_next_sample - t)
        if h < min_step:
            raise IntegrationError(
                f"step size underflow at t={t:g}; the problem is stiffer than configured",
                partial=sampler.finish(n_steps, n_rejected, extra_flags=("underflow",)),
            )
        for i in range(1, 7):
            yi = y + h * (_DP_A[i] @ k[:i])
            k[i] = sup @ yi
        y_new = y + h * (_DP_B5 @ k)
        err_vec = h * (_DP_ERR @ k)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.sqrt(np.mean(np.abs(err_vec / scale) ** 2))
        if err <= 1.0:
            t += h
            y = y_new
            k[0] = k[6]  # FSAL
            n_steps += 1
            if t >= t_next_sample - 1e-15 * t_end:
                sampler.record(t_next_sample, y)
                next_sample += 1
                if next_sample >= len(grid):
                    break
            factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        else:
            n_rejected += 1
            factor = max(0.1, 0.9 * err ** -0.2)
        h *= factor
    return sampler.finish(n_steps, n_rejected, final_y=y)


def bare_qubit_fidelity(gamma_flip: float, t: np.ndarray | float) -> np.ndarray | float:
    """Closed-form fidelity of a single qubit under a bit-flip channel.

    For a state on the Bloch y axis, (1 + exp(-2 Gamma t)) / 2.
    """
    return 0.5 * (1.0 + np.exp(-2.0 * gamma_flip * np.asarray(t, dtype=float)))


def baseline_three_qubit(gamma_flip: float, t: np.ndarray | float,
                         psi0: np.ndarray | None = None) -> np.ndarray | float:
    """Analytic fidelity of three qubits under independent flip channels.

    Each qubit's channel mixes the state with its flipped image with
    probability p(t) = (1 - exp(-2 Gamma t))/2, so
    F(t) = sum over flip patterns s of w_s(t) |<psi0|X_s|psi0>|^2.
    The default psi0 is the stored codeword (|ggg> - i|hhh>)/sqrt(2),
    for which every flipped overlap vanishes and F = (1 - p)^3.
    """
    t = np.asarray(t, dtype=float)
    p = 0.5 * (1.0 - np.exp(-2.0 * gamma_flip * t))
    if psi0 is None:
        return (1.0 - p) ** 3
    psi0 = np.asarray(psi0, dtype=complex).ravel()
    if psi0.shape != (8,):
        raise ValueError("psi0 must be an 8-dim register state")
    x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    eye = np.eye(2, dtype=complex)
    total = np.zeros_like(p)
    for s1 in (0, 1):
        for s2 in (0, 1):
            for s3 in (0, 1):
                flip = np.kron(np.kron(x if s1 else eye, x if s2 else eye), x if s3 else eye)
                overlap = abs(np.vdot(psi0, flip @ psi0)) ** 2
                n_flips = s1 + s2 + s3
                total = total + p ** n_flips * (1 - p) ** (3 - n_flips) * overlap
    return total


@dataclass(frozen=True)
class SteadyStateResult:
    """Nullspace of the generator: a unique state, or the reported basis."""

    rho: np.ndarray | None
    basis: tuple[np.ndarray, ...]
    degenerate: bool
    residual: float


def null_space(mat: np.ndarray, rcond: float) -> np.ndarray:
    """SVD nullspace with a fallback driver for hard-to-converge inputs."""
    try:
        u, s, vh = scipy.linalg.svd(mat, full_matrices=True)
    except np.linalg.LinAlgError:
        u, s, vh = scipy.linalg.svd(mat, full_matrices=True, lapack_driver="gesvd")
    tol = np.max(s) * max(mat.shape) * np.finfo(float).eps if s.size else 0.0
    tol = max(tol, rcond * (np.max(s) if s.size else 1.0))
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def steady_state(model: LindbladModel, null_tol: float = 1e-9) -> SteadyStateResult:
    """Stationary state from the nullspace of the vectorized generator.

    If the nullspace is one-dimensional the vector is reshaped,
    Hermitized and trace-normalized, and the generator residual is
    checked below 1e-9.  A higher-dimensional nullspace is reported as a
    basis rather than guessed at.
    """
    sup = liouvillian(model)
    d = model.space.total_dim
    basis = null_space(sup, rcond=null_tol)
    n_null = basis.shape[1]
    mats = tuple(basis[:, i].reshape(d, d) for i in range(n_null))
    if n_null != 1:
        return SteadyStateResult(rho=None, basis=mats, degenerate=True, residual=float("nan"))
    rho = mats[0]
    rho = (rho + rho.conj().T) / 2
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        return SteadyStateResult(rho=None, basis=mats, degenerate=True, residual=float("nan"))
    rho = rho / tr
    residual = float(np.linalg.norm(rhs(model, rho)))
    if residual > 1e-9:
        raise RuntimeError(f"steady-state residual {residual:.2e} exceeds 1e-9")
    return SteadyStateResult(rho=rho, basis=mats, degenerate=False, residual=residual)
