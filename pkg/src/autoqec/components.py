"""Catalog of component models for the memory-cell network.

Two kinds of models live here.  The limit models (probe scatterers,
relays, beamsplitters, Raman subsystems, error channels) are the
small-volume abstractions composed into the 32-dimensional network:
cavity and excited-state dynamics have been eliminated, leaving simple
scattering or weak-coupling triples.  The physical pre-limit models
(driven Jaynes-Cummings cavity, three-level Raman system) retain the
eliminated degrees of freedom and exist only for numerical convergence
checks against the limit behavior; they are never composed into the
full network.

Qubit subsystems carry levels (g, h) = (0, 1); where a Raman transition
level is needed the subsystem is three-dimensional with r = 2.  The
pre-limit probe atom orders its levels (g, h, e).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lindblad import LindbladModel
from .slh import SlhTriple, coherent_drive, to_lindblad
from .spaces import (
    CompositeSpace,
    Operator,
    embed,
    level_projector,
    pauli_library,
    transition,
)

__all__ = [
    "ProbePhysicalParams",
    "RamanPhysicalParams",
    "probe_limit",
    "probe_physical",
    "probe_output_amplitude",
    "relay_routing",
    "relay_set",
    "beamsplitter",
    "raman_subsystem",
    "raman_physical",
    "error_channel",
]

LEVEL_G, LEVEL_H, LEVEL_R = 0, 1, 2
_LEVEL_E = 2  # pre-limit probe atom: (g, h, e)


def probe_limit(space: CompositeSpace, label: str, variant: str = "bitflip") -> SlhTriple:
    """Two-channel scatterer imprinting a qubit's state on the probe phase.

    Channel 1 reflects with a conditional sign (Z for the bit-flip
    variant, X for phase-flip); channel 2 passes through.  Phases are
    relative to the bare-cavity reflection, so |h> gives +1 and |g>
    gives -1 in the bit-flip variant.  No coupling, no Hamiltonian: in
    the strong-coupling limit the cavity acts as a pure scattering
    object.
    """
    ops = pauli_library(space, (label,))[label]
    cond = ops.z if variant == "bitflip" else ops.x
    zero = space.zero()
    ident = space.identity()
    return SlhTriple(space, ((cond, zero), (zero, ident)), (zero, zero), zero)


@dataclass(frozen=True)
class ProbePhysicalParams:
    """Driven cavity-QED model parameters.

    The scaling parameter k sends the vacuum Rabi coupling and cavity
    decay to the strong-coupling regime together: g -> k^2 g_c,
    kappa -> k^2 kappa, with atomic decay and drive held fixed.
    """

    g_c: float
    kappa: float
    gamma_perp: float
    alpha: complex
    k: float = 1.0
    n_fock: int = 8
    variant: str = "bitflip"

    def __post_init__(self) -> None:
        if min(self.g_c, self.kappa, self.gamma_perp) <= 0:
            raise ValueError("rates must be positive")
        if self.k < 1:
            raise ValueError("scaling parameter k must be >= 1")
        if self.n_fock < 3:
            raise ValueError("cavity truncation must keep at least 3 Fock states")
        if self.variant not in ("bitflip", "phaseflip"):
            raise ValueError(f"unknown variant {self.variant!r}")


def _probe_space(n_fock: int) -> CompositeSpace:
    return CompositeSpace.of(("atom", 3), ("cavity", n_fock))


def probe_physical(params: ProbePhysicalParams) -> LindbladModel:
    """Coherently driven Jaynes-Cummings system on atom (g,h,e) x cavity.

    H = k^2 i g_c (sigma† a - sigma a†) plus the drive term produced by
    displacing the cavity input, L1 = k sqrt(2 kappa) a + alpha,
    L2 = sqrt(2 gamma_perp) sigma.  The bit-flip variant couples only
    |g><e|; the phase-flip variant couples (|g>+|h>)<e|/sqrt(2).
    Raises if the truncation is too small for the expected intracavity
    amplitude.
    """
    p = params
    # steady intracavity photon number of the worst (empty-cavity) case
    n_bar = 2.0 * abs(p.alpha) ** 2 / (p.k**2 * p.kappa) ** 1
    if n_bar > (p.n_fock - 2) / 6.0:
        raise ValueError(
            f"cavity truncation n_fock={p.n_fock} too small for expected "
            f"photon number {n_bar:.3g}"
        )
    space = _probe_space(p.n_fock)
    a_local = np.diag(np.sqrt(np.arange(1, p.n_fock, dtype=float)), k=1)
    a = embed(a_local, "cavity", space)
    if p.variant == "bitflip":
        sigma = transition(space, "atom", LEVEL_G, _LEVEL_E)
    else:
        sigma = (
            transition(space, "atom", LEVEL_G, _LEVEL_E)
            + transition(space, "atom", LEVEL_H, _LEVEL_E)
        ) / np.sqrt(2.0)
    h = (1j * p.k**2 * p.g_c) * (sigma.adjoint() @ a - sigma @ a.adjoint())
    l_cavity = (p.k * np.sqrt(2.0 * p.kappa)) * a
    l_atom = np.sqrt(2.0 * p.gamma_perp) * sigma
    vacuum = SlhTriple(
        space,
        ((space.identity(), space.zero()), (space.zero(), space.identity())),
        (l_cavity, l_atom),
        h,
        check="warn",
    )
    return to_lindblad(coherent_drive(vacuum, (p.alpha, 0.0)))


def probe_output_amplitude(params: ProbePhysicalParams, rho: np.ndarray) -> complex:
    """Mean reflected amplitude <L1> = alpha + k sqrt(2 kappa) <a> in a state."""
    p = params
    space = _probe_space(p.n_fock)
    a_local = np.diag(np.sqrt(np.arange(1, p.n_fock, dtype=float)), k=1)
    a = embed(a_local, "cavity", space)
    return complex(p.alpha + p.k * np.sqrt(2.0 * p.kappa) * np.trace(a.matrix @ rho))


def relay_routing(space: CompositeSpace, label: str) -> SlhTriple:
    """Relay block whose internal state routes its two field inputs.

    With the relay in |g> the channels pass straight through; in |h>
    they are swapped with a sign.  Purely scattering.
    """
    ops = pauli_library(space, (label,))[label]
    zero = space.zero()
    s = ((ops.pi_g, -ops.pi_h), (-ops.pi_h, ops.pi_g))
    return SlhTriple(space, s, (zero, zero), zero)


def relay_set(space: CompositeSpace, label: str) -> SlhTriple:
    """Relay block whose field inputs set/reset the internal state.

    A signal on channel 1 pumps the relay toward |h>, a signal on
    channel 2 toward |g>; the scattering is state-dependent and
    operator-valued.
    """
    ops = pauli_library(space, (label,))[label]
    zero = space.zero()
    s = ((ops.pi_g, -ops.sigma_hg), (-ops.sigma_gh, ops.pi_h))
    return SlhTriple(space, s, (zero, zero), zero)


def beamsplitter(space: CompositeSpace) -> SlhTriple:
    """50/50 splitter mixing two channels with a real orthogonal matrix."""
    r = 1.0 / np.sqrt(2.0)
    return SlhTriple(space, ((r, r), (-r, r)), (0.0, 0.0), 0.0)


def raman_subsystem(
    space: CompositeSpace,
    qubit_label: str,
    transition_kind: str,
    gamma: float,
    delta: float,
    variant: str = "bitflip",
    k: float = 1.0,
) -> SlhTriple:
    """Single weak Raman coupling channel of a three-level qubit.

    Returns (1, sqrt(gamma) sigma_{.r}, (k^2 delta / 2) Pi_r) where the
    lowering operator targets the requested ground level ("gr" or "hr").
    Each physical qubit hosts two such subsystems, so their Hamiltonians
    sum to the full detuning k^2 delta Pi_r.  The phase-flip variant
    substitutes the symmetric/antisymmetric combinations
    sigma_hr -> (sigma_hr + sigma_gr)/sqrt(2),
    sigma_gr -> (sigma_hr - sigma_gr)/sqrt(2).
    """
    if space.dim_of(qubit_label) < 3:
        raise ValueError(f"subsystem {qubit_label!r} has no Raman level (needs dim 3)")
    sigma_gr = transition(space, qubit_label, LEVEL_G, LEVEL_R)
    sigma_hr = transition(space, qubit_label, LEVEL_H, LEVEL_R)
    if variant == "phaseflip":
        sigma_hr, sigma_gr = (
            (sigma_hr + sigma_gr) / np.sqrt(2.0),
            (sigma_hr - sigma_gr) / np.sqrt(2.0),
        )
    if transition_kind == "gr":
        lower = sigma_gr
    elif transition_kind == "hr":
        lower = sigma_hr
    else:
        raise ValueError(f"unknown transition {transition_kind!r}")
    pi_r = level_projector(space, qubit_label, LEVEL_R)
    return SlhTriple(
        space,
        ((space.identity(),),),
        (np.sqrt(gamma) * lower,),
        (0.5 * k**2 * delta) * pi_r,
    )


@dataclass(frozen=True)
class RamanPhysicalParams:
    """Three-level Raman model parameters.

    Drive amplitudes scale as k beta and the detuning as k^2 delta; the
    regime gamma << gamma_par is assumed but not enforced.  With
    ``compensated`` the drive-induced ground-level shifts are cancelled
    by an equal and opposite static shift, the effect extra
    oppositely-detuned levels would provide.
    """

    gamma: float
    gamma_par: float
    delta: float
    beta1: complex
    beta2: complex
    k: float = 1.0
    compensated: bool = False

    def __post_init__(self) -> None:
        if min(self.gamma, self.gamma_par, self.delta) <= 0:
            raise ValueError("rates must be positive")
        if self.k < 1:
            raise ValueError("scaling parameter k must be >= 1")


def raman_physical(params: RamanPhysicalParams) -> LindbladModel:
    """Driven three-level system whose ground manifold Rabi-oscillates.

    Modes 1 and 2 couple |h>,|g> to the far-detuned |r> with rate gamma
    and are displaced to amplitudes k beta1, k beta2; two more channels
    aggregate spontaneous emission at rate gamma_par.  For large k the
    ground states exchange population at angular frequency
    2 gamma |beta1 beta2| / delta while |r> occupation scales as 1/k^2.
    """
    p = params
    space = CompositeSpace.of(("atom", 3))
    sigma_hr = transition(space, "atom", LEVEL_H, LEVEL_R)
    sigma_gr = transition(space, "atom", LEVEL_G, LEVEL_R)
    pi_r = level_projector(space, "atom", LEVEL_R)
    ident = space.identity()
    zero = space.zero()
    s = tuple(
        tuple(ident if i == j else zero for j in range(4)) for i in range(4)
    )
    vacuum = SlhTriple(
        space,
        s,
        (
            np.sqrt(p.gamma) * sigma_hr,
            np.sqrt(p.gamma) * sigma_gr,
            np.sqrt(p.gamma_par) * sigma_hr,
            np.sqrt(p.gamma_par) * sigma_gr,
        ),
        (p.k**2 * p.delta) * pi_r,
    )
    driven = coherent_drive(vacuum, (p.k * p.beta1, p.k * p.beta2, 0.0, 0.0))
    model = to_lindblad(driven)
    if p.compensated:
        pi_h = level_projector(space, "atom", LEVEL_H)
        pi_g = level_projector(space, "atom", LEVEL_G)
        counter = (p.gamma / p.delta) * (
            abs(p.beta1) ** 2 * pi_h + abs(p.beta2) ** 2 * pi_g
        )
        model = LindbladModel(space, model.h + counter, model.collapse_ops)
    return model


def error_channel(
    space: CompositeSpace, qubit_label: str, kind: str, gamma_flip: float
) -> SlhTriple:
    """Random flip process (I, sqrt(Gamma) P, 0) with P = X or Z."""
    if gamma_flip < 0:
        raise ValueError("flip rate must be nonnegative")
    ops = pauli_library(space, (qubit_label,))[qubit_label]
    if kind == "X":
        pauli = ops.x
    elif kind == "Z":
        pauli = ops.z
    else:
        raise ValueError(f"unknown error kind {kind!r}")
    return SlhTriple(
        space,
        ((space.identity(),),),
        (np.sqrt(gamma_flip) * pauli,),
        space.zero(),
    )
