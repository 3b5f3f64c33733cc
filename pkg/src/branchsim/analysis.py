"""Post-run analysis: branch decomposition, marginals, separability.

Branches are labeled by the concatenated memory bit string; projecting
onto a string and renormalizing yields the branch's pure substate over
the remaining (control, system, policy) registers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LayoutError, ValidationError
from .linalg import partial_trace, purity, validate_density_matrix
from .machine import RegisterLayout, StateVector

# Branch entries below this weight are floating-point dust and omitted.
PRUNE_THRESHOLD = 1e-12

# Marginal purity at or above this counts as pure / separable.
PURITY_ONE = 1.0 - 1e-9

_RESIDUAL_LAYOUT = RegisterLayout(
    control=0, memories=(), system=1, policy=2, total_qubits=3
)


@dataclass(frozen=True)
class BranchEntry:
    probability: float
    substate: StateVector  # over (C, S, P), normalized


@dataclass(frozen=True)
class BranchTable:
    entries: dict[str, BranchEntry]

    def probabilities(self) -> dict[str, float]:
        return {b: e.probability for b, e in self.entries.items()}


@dataclass(frozen=True)
class MarginalReport:
    register: str
    matrix: np.ndarray
    max_offdiag: float
    diagonal_probs: list[float]


def branch_decompose(state: StateVector) -> BranchTable:
    """Probability and normalized substate for every populated memory string."""
    layout = state.layout
    if layout.n_memories == 0:
        raise LayoutError("state has no memory slots to decompose over")
    n = layout.total_qubits
    psi = state.amplitudes.reshape([2] * n)
    mem_axes = list(layout.memories)
    other_axes = tuple(ax for ax in range(n) if ax not in mem_axes)
    weights = np.sum(np.abs(psi) ** 2, axis=other_axes)

    entries: dict[str, BranchEntry] = {}
    for flat in range(weights.size):
        bits = tuple((flat >> (layout.n_memories - 1 - j)) & 1
                     for j in range(layout.n_memories))
        p = float(weights[bits])
        if p <= PRUNE_THRESHOLD:
            continue
        index = [slice(None)] * n
        for axis, bit in zip(mem_axes, bits):
            index[axis] = bit
        sub = psi[tuple(index)].reshape(-1) / np.sqrt(p)
        label = "".join(str(b) for b in bits)
        entries[label] = BranchEntry(p, StateVector(_RESIDUAL_LAYOUT, sub))
    return BranchTable(dict(sorted(entries.items())))


def memory_marginal(state: StateVector, k: int) -> MarginalReport:
    """Reduced state of memory slot k with diagonality metrics."""
    if k < 1 or k > state.layout.n_memories:
        raise LayoutError(
            f"memory slot M{k} not in layout (1..{state.layout.n_memories})"
        )
    name = f"M{k}"
    rho = validate_density_matrix(partial_trace(state, {name}, state.layout))
    return MarginalReport(
        register=name,
        matrix=rho,
        max_offdiag=float(abs(rho[0, 1])),
        diagonal_probs=[float(rho[0, 0].real), float(rho[1, 1].real)],
    )


def register_marginal(state: StateVector, regs) -> np.ndarray:
    """Reduced density matrix over ``regs``, ordered by layout position."""
    return validate_density_matrix(partial_trace(state, regs, state.layout))


def outcome_probability(state: StateVector, register: str, outcome: int) -> float:
    """Born probability of reading ``outcome`` on a single register."""
    state.layout.position(register)
    return state.probability(register, outcome)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Qubit pairs use the closed form; a pure argument reduces to an
    overlap; only mixed higher-dimensional pairs need the matrix root.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    sigma = np.asarray(sigma, dtype=np.complex128)
    if rho.shape != sigma.shape:
        raise ValidationError(f"fidelity shape mismatch: {rho.shape} vs {sigma.shape}")
    if rho.shape[0] == 2:
        tr = float(np.real(np.trace(rho @ sigma)))
        det_r = max(float(np.real(np.linalg.det(rho))), 0.0)
        det_s = max(float(np.real(np.linalg.det(sigma))), 0.0)
        return tr + 2.0 * np.sqrt(det_r * det_s)
    if purity(rho) >= PURITY_ONE or purity(sigma) >= PURITY_ONE:
        return max(float(np.real(np.trace(rho @ sigma))), 0.0)
    w, v = np.linalg.eigh(rho)
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    inner = np.linalg.eigvalsh(root @ sigma @ root)
    return float(np.sum(np.sqrt(np.clip(inner, 0.0, None))) ** 2)


def _pair_marginals(rho_pair: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r4 = rho_pair.reshape(2, 2, 2, 2)  # (ket_a, ket_b, bra_a, bra_b)
    return np.einsum("ijkj->ik", r4), np.einsum("ijik->jk", r4)


def no_cloning_witness(
    state: StateVector, a: str, b: str
) -> tuple[bool, float]:
    """Detect whether two registers are correlated rather than a product.

    For a pure pair state, marginal purity is a complete entanglement
    witness; for a mixed pair, deviation from the product of its own
    marginals is used.  Returns (entangled, fidelity with that product).
    """
    if a == b:
        raise LayoutError(f"witness needs two distinct registers, got {a!r} twice")
    rho_pair = register_marginal(state, {a, b})
    rho_first, rho_second = _pair_marginals(rho_pair)
    product = np.kron(rho_first, rho_second)
    product_fidelity = min(fidelity(rho_pair, product), 1.0)
    if purity(rho_pair) >= PURITY_ONE:
        entangled = purity(rho_first) < PURITY_ONE
    else:
        entangled = product_fidelity < PURITY_ONE
    return entangled, product_fidelity


def separability_check(state: StateVector, register: str) -> tuple[bool, float]:
    """A register factors out of the global pure state iff its marginal is pure."""
    p = purity(register_marginal(state, {register}))
    return p >= PURITY_ONE, p
