"""Assembly of the autonomous error-correcting memory network.

The memory cell stores one logical qubit in three register qubits
(Q1, Q2, Q3) and keeps the two-qubit parities mirrored in two relays
(R1, R2).  Two probe subnets interferometrically write the parities
(Q1 Q2) and (Q3 Q2) into the relay states; two feedback subnets route
Raman beams so that exactly the qubit singled out by the relay pattern
is coherently flipped back, while every correctly-tracked configuration
accrues the same aggregate level shift.

Everything here is built from the component catalog via the SLH
composition algebra on the 32-dimensional space
Q1 x Q2 x Q3 x R1 x R2.  The feedback subnets additionally exist in a
pre-limit form on three-level qubits; their strong-drive limit is the
flip-plus-shift Hamiltonian of :func:`feedback_limit_hamiltonian`.
Hand-transcribed closed forms of the composed subnets are provided as
independent oracles for the composition algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .components import (
    beamsplitter,
    error_channel,
    raman_subsystem,
    relay_routing,
    relay_set,
)
from .lindblad import LindbladModel
from .slh import (
    SlhTriple,
    coherent_drive,
    concatenate,
    identity_triple,
    pad,
    series,
)
from .spaces import (
    CompositeSpace,
    Operator,
    QubitOps,
    level_projector,
    operator_im,
    pauli_library,
    product_state,
    transition,
)

__all__ = [
    "MemoryParams",
    "ParityOperators",
    "StarkRow",
    "memory_space",
    "prelimit_feedback_space",
    "parity_ops",
    "build_probe_subnet",
    "probe_subnet_closed_form",
    "build_feedback_subnet_prelimit",
    "feedback_subnet_closed_form",
    "feedback_inner_closed_form",
    "feedback_limit_hamiltonian",
    "stark_shift_terms",
    "stark_shift_table",
    "assemble_memory",
    "codeword_state",
    "initial_density",
    "fidelity_projector",
    "variant_exchange_unitary",
]

QUBITS = ("Q1", "Q2", "Q3")
RELAYS = ("R1", "R2")

#: Relay level that tracks even parity of its qubit pair; the probe
#: collapse operators pump the relay here whenever the pair parities
#: agree, so the no-error codeword corresponds to relays in |h, h>.
EVEN_PARITY_LEVEL = "h"


@dataclass(frozen=True)
class MemoryParams:
    """Network parameters: feedback strength, probe amplitude, flip rate."""

    omega: float
    alpha: float
    gamma_flip: float
    variant: str = "bitflip"
    stark_compensated: bool = False

    def __post_init__(self) -> None:
        if self.omega < 0 or self.alpha < 0 or self.gamma_flip < 0:
            raise ValueError("omega, alpha and gamma_flip must be nonnegative")
        if self.variant not in ("bitflip", "phaseflip"):
            raise ValueError(f"unknown variant {self.variant!r}")


def memory_space() -> CompositeSpace:
    """Three register qubits plus two relays, 32 dimensions."""
    return CompositeSpace.of(("Q1", 2), ("Q2", 2), ("Q3", 2), ("R1", 2), ("R2", 2))


def prelimit_feedback_space() -> CompositeSpace:
    """Register qubits with their Raman level (g, h, r) retained."""
    return CompositeSpace.of(("Q1", 3), ("Q2", 3), ("Q3", 3), ("R1", 2), ("R2", 2))


@dataclass(frozen=True)
class ParityOperators:
    """Shifted two-qubit parity combinations E = PP + 1 and O = PP - 1."""

    e12: Operator
    o12: Operator
    e32: Operator
    o32: Operator


def parity_ops(space: CompositeSpace, variant: str = "bitflip") -> ParityOperators:
    lib = pauli_library(space, QUBITS)
    cond = {q: (lib[q].z if variant == "bitflip" else lib[q].x) for q in QUBITS}
    ident = space.identity()
    pp12 = cond["Q1"] @ cond["Q2"]
    pp32 = cond["Q3"] @ cond["Q2"]
    return ParityOperators(
        e12=pp12 + ident, o12=pp12 - ident, e32=pp32 + ident, o32=pp32 - ident
    )


_PROBE_WIRING = {
    "left": ("Q1", "Q2", "R1"),
    "right": ("Q3", "Q2", "R2"),
}

_FEEDBACK_WIRING = {
    # (full-beam target, its transition), then the two half-beam targets
    "left": (("Q1", "gr"), ("Q3", "gr"), ("Q2", "hr"), "R1"),
    "right": (("Q2", "gr"), ("Q1", "hr"), ("Q3", "hr"), "R2"),
}


def _probe_scatterer(space: CompositeSpace, label: str, variant: str) -> SlhTriple:
    """Single-channel conditional-sign reflector of a probed qubit.

    The probe cavity's decoupled vacuum channel is dropped; only the
    channel that picks up the qubit-conditioned phase enters the
    network.
    """
    ops = pauli_library(space, (label,))[label]
    cond = ops.z if variant == "bitflip" else ops.x
    return SlhTriple(space, ((cond,),), (space.zero(),), space.zero())


def build_probe_subnet(side: str, params: MemoryParams,
                       space: CompositeSpace | None = None) -> SlhTriple:
    """Compose one parity-probe chain from catalog components.

    An input displaced to sqrt(2) alpha is split, one arm reflects off
    the inner then the outer qubit cavity, the arms are recombined, and
    the even/odd interference outputs drive the set/reset inputs of the
    side's relay.
    """
    if space is None:
        space = memory_space()
    outer, inner, relay = _PROBE_WIRING[side]
    drive = coherent_drive(
        identity_triple(space, 2), (np.sqrt(2.0) * params.alpha, 0.0)
    )
    splitter = beamsplitter(space)
    probed_pair = series(
        _probe_scatterer(space, outer, params.variant),
        _probe_scatterer(space, inner, params.variant),
    )
    probe_arm = concatenate(probed_pair, identity_triple(space, 1))
    chain = series(splitter, drive)
    chain = series(probe_arm, chain)
    chain = series(splitter, chain)
    return series(relay_set(space, relay), chain)


def probe_subnet_closed_form(side: str, params: MemoryParams,
                             space: CompositeSpace | None = None) -> SlhTriple:
    """Hand-transcribed closed form of the composed probe subnet.

    Written out independently of the composition algebra and used as an
    oracle against :func:`build_probe_subnet`.
    """
    if space is None:
        space = memory_space()
    _, _, relay = _PROBE_WIRING[side]
    par = parity_ops(space, params.variant)
    e, o = (par.e12, par.o12) if side == "left" else (par.e32, par.o32)
    r = pauli_library(space, (relay,))[relay]
    alpha = params.alpha
    s = (
        (0.5 * (o @ r.pi_g + e @ r.sigma_hg), 0.5 * (e @ r.pi_g + o @ r.sigma_hg)),
        (0.5 * (-e @ r.pi_h - o @ r.sigma_gh), 0.5 * (-o @ r.pi_h - e @ r.sigma_gh)),
    )
    l = (
        (alpha / np.sqrt(2.0)) * (r.pi_g @ o + r.sigma_hg @ e),
        (alpha / np.sqrt(2.0)) * (-r.sigma_gh @ o - r.pi_h @ e),
    )
    return SlhTriple(space, s, l, space.zero())


def build_feedback_subnet_prelimit(
    side: str,
    beta: complex,
    gamma: float,
    delta: float,
    k: float = 1.0,
    variant: str = "bitflip",
    space: CompositeSpace | None = None,
) -> SlhTriple:
    """Compose one correction chain on the pre-limit three-level space.

    A beam of amplitude k beta enters the side's routing relay; the
    relay state steers it either entirely onto the full-beam qubit or
    through a splitter onto the two half-beam qubits, where it drives
    the weak Raman channels.  The detuning scales as k^2 delta.  With
    beta = 0 this is the vacuum chain used for displacement extraction.
    """
    if space is None:
        space = prelimit_feedback_space()
    (full_q, full_t), (half_a, half_t_a), (half_b, half_t_b), relay = (
        _FEEDBACK_WIRING[side][0],
        _FEEDBACK_WIRING[side][1],
        _FEEDBACK_WIRING[side][2],
        _FEEDBACK_WIRING[side][3],
    )
    ramans = concatenate(
        concatenate(
            raman_subsystem(space, full_q, full_t, gamma, delta, variant, k),
            raman_subsystem(space, half_a, half_t_a, gamma, delta, variant, k),
        ),
        raman_subsystem(space, half_b, half_t_b, gamma, delta, variant, k),
    )
    split = pad(beamsplitter(space), at=2, count=1)
    router = concatenate(relay_routing(space, relay), identity_triple(space, 1))
    chain = coherent_drive(identity_triple(space, 3), (k * beta, 0.0, 0.0))
    chain = series(router, chain)
    chain = series(split, chain)
    return series(ramans, chain)


def _feedback_ops(side: str, space: CompositeSpace):
    (full_q, full_t), (ha, hta), (hb, htb), relay = _FEEDBACK_WIRING[side]
    def lower(q: str, t: str) -> Operator:
        return transition(space, q, 0 if t == "gr" else 1, 2)
    r = pauli_library(space, (relay,))[relay]
    pi_r_sum = sum(
        (level_projector(space, q, 2) for q in QUBITS), start=space.zero()
    )
    return lower(full_q, full_t), lower(ha, hta), lower(hb, htb), r, pi_r_sum


def feedback_subnet_closed_form(
    side: str, beta: complex, gamma: float, delta: float, k: float = 1.0,
    space: CompositeSpace | None = None,
) -> SlhTriple:
    """Hand-transcribed closed form of the composed feedback chain."""
    if space is None:
        space = prelimit_feedback_space()
    full, half_a, half_b, r, pi_r_sum = _feedback_ops(side, space)
    rt2 = np.sqrt(2.0)
    ident = space.identity()
    kb = k * beta
    s = (
        ((1 / rt2) * r.pi_g, (-1 / rt2) * r.pi_h, (1 / rt2) * ident),
        (-r.pi_h, r.pi_g, space.zero()),
        ((-1 / rt2) * r.pi_g, (1 / rt2) * r.pi_h, (1 / rt2) * ident),
    )
    l = (
        np.sqrt(gamma) * full + (kb / rt2) * r.pi_g,
        np.sqrt(gamma) * half_a - kb * r.pi_h,
        np.sqrt(gamma) * half_b - (kb / rt2) * r.pi_g,
    )
    drive = np.sqrt(gamma / 2.0) * kb * (
        full.adjoint() @ r.pi_g
        - half_b.adjoint() @ r.pi_g
        - rt2 * (half_a.adjoint() @ r.pi_h)
    )
    h = (0.5 * k**2 * delta) * pi_r_sum + operator_im(drive)
    return SlhTriple(space, s, l, h)


def feedback_inner_closed_form(
    side: str, beta: complex, gamma: float, delta: float, k: float = 1.0,
    space: CompositeSpace | None = None,
) -> SlhTriple:
    """Closed form of the feedback chain after displacement extraction.

    All drive amplitude sits in the Hamiltonian; the couplings are the
    back-rotated weak Raman operators.
    """
    if space is None:
        space = prelimit_feedback_space()
    full, half_a, half_b, r, pi_r_sum = _feedback_ops(side, space)
    rt2 = np.sqrt(2.0)
    root = np.sqrt(gamma / 2.0)
    kb = k * beta
    l = (
        root * (full @ r.pi_g - rt2 * (half_a @ r.pi_h) - half_b @ r.pi_g),
        root * (-(full @ r.pi_h) + rt2 * (half_a @ r.pi_g) + half_b @ r.pi_h),
        root * (full + half_b),
    )
    drive = np.sqrt(gamma / 2.0) * kb * (
        full.adjoint() @ r.pi_g
        - half_b.adjoint() @ r.pi_g
        - rt2 * (half_a.adjoint() @ r.pi_h)
    )
    h = (0.5 * k**2 * delta) * pi_r_sum + 2.0 * operator_im(drive)
    return SlhTriple(space, identity_triple(space, 3).s, l, h)


@dataclass(frozen=True)
class _VariantOps:
    """Per-qubit operators after the bit-flip/phase-flip substitution."""

    flip: Operator
    lo: Operator   # projector onto the level shifted by the g-targeting beam
    hi: Operator   # projector onto the level shifted by the h-targeting beam


def _variant_qubit_ops(space: CompositeSpace, variant: str) -> dict[str, _VariantOps]:
    lib = pauli_library(space, QUBITS)
    ident = space.identity()
    out = {}
    for q in QUBITS:
        ops: QubitOps = lib[q]
        if variant == "bitflip":
            out[q] = _VariantOps(flip=ops.x, lo=ops.pi_g, hi=ops.pi_h)
        else:
            # under the X <-> Z exchange, 2 Pi_h -> 1 + X and 2 Pi_g -> 1 - X
            out[q] = _VariantOps(
                flip=ops.z,
                lo=0.5 * (ident - ops.x),
                hi=0.5 * (ident + ops.x),
            )
    return out


def _relay_projectors(space: CompositeSpace) -> dict[str, QubitOps]:
    return pauli_library(space, RELAYS)


def flip_terms(params: MemoryParams, space: CompositeSpace | None = None) -> Operator:
    """Syndrome-conditioned corrective flip part of the limit Hamiltonian.

    Each term flips one qubit and is active only for the relay pattern
    that singles that qubit out as the flipped one.
    """
    if space is None:
        space = memory_space()
    q = _variant_qubit_ops(space, params.variant)
    r = _relay_projectors(space)
    rt2 = np.sqrt(2.0)
    return (
        rt2 * (q["Q1"].flip @ r["R1"].pi_g @ r["R2"].pi_h)
        + q["Q2"].flip @ r["R1"].pi_g @ r["R2"].pi_g
        - rt2 * (q["Q3"].flip @ r["R1"].pi_h @ r["R2"].pi_g)
    )


def stark_shift_terms(params: MemoryParams,
                      space: CompositeSpace | None = None) -> dict[str, Operator]:
    """Per-qubit drive-induced level-shift operators (in units of omega).

    Each feedback beam shifts the level it targets on the qubit it is
    routed to: a full beam by -2, a split beam by -1 on each of its two
    targets.  The sum over qubits is the Stark part of the limit
    Hamiltonian; keyed per qubit so diagnostics can attribute shifts.
    """
    if space is None:
        space = memory_space()
    q = _variant_qubit_ops(space, params.variant)
    r = _relay_projectors(space)
    return {
        "Q1": -(r["R1"].pi_g @ q["Q1"].lo) - 2.0 * (r["R2"].pi_h @ q["Q1"].hi),
        "Q2": -(r["R1"].pi_g @ q["Q2"].hi) - (r["R2"].pi_g @ q["Q2"].lo),
        "Q3": -2.0 * (r["R1"].pi_h @ q["Q3"].lo) - (r["R2"].pi_g @ q["Q3"].hi),
    }


def feedback_limit_hamiltonian(params: MemoryParams,
                               space: CompositeSpace | None = None) -> Operator:
    """Strong-drive limit Hamiltonian of the two feedback chains.

    Three syndrome-conditioned flip terms plus, unless compensated, the
    four per-qubit groups of drive-induced level shifts, all scaled by
    the feedback parameter omega.
    """
    if space is None:
        space = memory_space()
    h = flip_terms(params, space)
    if not params.stark_compensated:
        for term in stark_shift_terms(params, space).values():
            h = h + term
    return params.omega * h


@dataclass(frozen=True)
class StarkRow:
    """One register basis state with its tracking relay pattern and shifts."""

    qubits: tuple[str, str, str]
    relays: tuple[str, str]
    shifts: tuple[float, float, float]


#: Register basis states ordered by syndrome group: no error, then the
#: states reached from each codeword branch by a single flip of Q1, Q2, Q3.
STARK_ROW_ORDER: tuple[tuple[str, str, str], ...] = (
    ("h", "h", "h"),
    ("g", "g", "g"),
    ("h", "g", "g"),
    ("g", "h", "h"),
    ("h", "g", "h"),
    ("g", "h", "g"),
    ("h", "h", "g"),
    ("g", "g", "h"),
)


def tracking_relay_levels(qubits: tuple[str, str, str]) -> tuple[str, str]:
    """Relay levels that correctly reflect the two pair parities."""
    q1, q2, q3 = qubits
    odd = "g" if EVEN_PARITY_LEVEL == "h" else "h"
    return (
        EVEN_PARITY_LEVEL if q1 == q2 else odd,
        EVEN_PARITY_LEVEL if q2 == q3 else odd,
    )


def stark_shift_table(params: MemoryParams) -> tuple[StarkRow, ...]:
    """Per-qubit diagonal level shifts for every correctly-tracked state.

    For each register basis state paired with the relay pattern that
    reflects its parities, reads the expectation of each qubit's shift
    operator directly from the Hamiltonian terms.  Shifts are reported
    in absolute units (integer multiples of omega).
    """
    if params.variant != "bitflip" or params.stark_compensated:
        raise ValueError("shift table is defined for the uncompensated bit-flip network")
    space = memory_space()
    terms = stark_shift_terms(params, space)
    level_index = {"g": 0, "h": 1}
    rows = []
    for qubits in STARK_ROW_ORDER:
        relays = tracking_relay_levels(qubits)
        levels = {name: level_index[lv] for name, lv in zip(QUBITS, qubits)}
        levels.update({name: level_index[lv] for name, lv in zip(RELAYS, relays)})
        vec = product_state(space, levels)
        shifts = tuple(
            float(params.omega * np.real(np.vdot(vec, terms[q].matrix @ vec)))
            for q in QUBITS
        )
        rows.append(StarkRow(qubits=qubits, relays=relays, shifts=shifts))
    return tuple(rows)


def _relay_dephasing_ops(space: CompositeSpace, amplitude: complex) -> tuple[Operator, ...]:
    r = _relay_projectors(space)
    rt2 = np.sqrt(2.0)
    ops = []
    for name in RELAYS:
        ops.extend(
            [
                (amplitude / rt2) * r[name].pi_g,
                -amplitude * r[name].pi_h,
                -(amplitude / rt2) * r[name].pi_g,
            ]
        )
    return tuple(ops)


def assemble_memory(params: MemoryParams,
                    relay_dephasing_amplitude: complex | None = None) -> LindbladModel:
    """Full closed-loop generator of the memory cell.

    Hamiltonian from the feedback limit; collapse operators L1..L4 from
    the two composed probe subnets and L5..L7 from the per-qubit flip
    error channels.  The strong relay-dephasing channels of the driven
    feedback chains are omitted by default -- they have no effect when
    the relays start in level eigenstates -- but can be re-enabled with
    a finite amplitude for sensitivity studies.
    """
    space = memory_space()
    h = feedback_limit_hamiltonian(params, space)
    left = build_probe_subnet("left", params, space)
    right = build_probe_subnet("right", params, space)
    kind = "X" if params.variant == "bitflip" else "Z"
    errors = tuple(
        error_channel(space, q, kind, params.gamma_flip).l[0] for q in QUBITS
    )
    collapse = left.l + right.l + errors
    if relay_dephasing_amplitude is not None:
        collapse = collapse + _relay_dephasing_ops(space, relay_dephasing_amplitude)
    return LindbladModel(space, h, collapse)


def codeword_state(variant: str = "bitflip") -> np.ndarray:
    """The stored logical state on the 8-dim register.

    (|ggg> - i |hhh>)/sqrt(2) for the bit-flip code; its image under
    the per-qubit X <-> Z exchange rotation for the phase-flip code.
    """
    psi = np.zeros(8, dtype=complex)
    psi[0] = 1.0 / np.sqrt(2.0)
    psi[7] = -1j / np.sqrt(2.0)
    if variant == "bitflip":
        return psi
    if variant == "phaseflip":
        u = _exchange_rotation_2x2()
        u3 = np.kron(np.kron(u, u), u)
        return u3 @ psi
    raise ValueError(f"unknown variant {variant!r}")


def register_basis_state(labels: str) -> np.ndarray:
    """Register basis vector from a three-letter g/h string."""
    if len(labels) != 3 or any(c not in "gh" for c in labels):
        raise ValueError(f"register state must be three letters over g/h, got {labels!r}")
    idx = int("".join("0" if c == "g" else "1" for c in labels), 2)
    vec = np.zeros(8, dtype=complex)
    vec[idx] = 1.0
    return vec


def initial_density(register_state: np.ndarray,
                    relay_levels: tuple[str, str] = ("h", "h")) -> np.ndarray:
    """Density matrix: register state tensored with relay level eigenstates."""
    register_state = np.asarray(register_state, dtype=complex).ravel()
    if register_state.shape != (8,):
        raise ValueError("register state must be 8-dimensional")
    relay_vec = np.array([1.0 + 0j])
    for lv in relay_levels:
        local = np.zeros(2, dtype=complex)
        local[0 if lv == "g" else 1] = 1.0
        relay_vec = np.kron(relay_vec, local)
    full = np.kron(register_state, relay_vec)
    return np.outer(full, full.conj())


def fidelity_projector(register_state: np.ndarray) -> Operator:
    """Observable <psi|rho_register|psi> as a projector on the full space."""
    register_state = np.asarray(register_state, dtype=complex).ravel()
    if register_state.shape != (8,):
        raise ValueError("register state must be 8-dimensional")
    proj = np.outer(register_state, register_state.conj())
    return Operator(memory_space(), np.kron(proj, np.eye(4, dtype=complex)))


def _exchange_rotation_2x2() -> np.ndarray:
    """Self-inverse rotation exchanging the flip and parity axes, (X+Z)/sqrt(2)."""
    return np.array([[-1.0, 1.0], [1.0, 1.0]], dtype=complex) / np.sqrt(2.0)


def variant_exchange_unitary() -> np.ndarray:
    """Unitary conjugating the bit-flip network into the phase-flip one.

    Acts as (X+Z)/sqrt(2) on each register qubit and trivially on the
    relays.
    """
    u = _exchange_rotation_2x2()
    out = np.kron(np.kron(u, u), u)
    return np.kron(out, np.eye(4, dtype=complex))
