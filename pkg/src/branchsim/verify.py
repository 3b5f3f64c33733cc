"""Self-verification: golden scenario checks and randomized property checks.

The oracle here is deliberately naive: controlled gates are materialized
as explicit Kronecker-built global unitaries and applied by matrix
arithmetic, never through the engine's strided kernels.  Agreement
between the two routes is the core correctness check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import analysis, machine
from .errors import ValidationError
from .gates import GateSpec, IDENTITY, raw_gate
from .linalg import DEFAULT_TOLERANCES, Tolerances, kron, mat_mul
from .machine import (
    InitSpec,
    IterationSpec,
    RegisterLayout,
    build_layout,
    build_controlled_dilation,
    initialize,
    iterate,
    iterate_extended,
    measure_control,
)
from .scenario import Scenario, builtin_scenario

DEFAULT_SEED = 1729

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_PROJ = (
    np.array([[1, 0], [0, 0]], dtype=np.complex128),
    np.array([[0, 0], [0, 1]], dtype=np.complex128),
)
_EYE2 = np.eye(2, dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    deviation: float
    tolerance: float


# ---------------------------------------------------------------------------
# Oracle construction (global matrices built with kron / mat_mul only)

def controlled_unitary_matrix(
    layout: RegisterLayout, control: str, target: str, g0: np.ndarray, g1: np.ndarray
) -> np.ndarray:
    """Sum over control values of projector (x) gate (x) identities."""
    c_pos, t_pos = layout.position(control), layout.position(target)
    total = np.zeros((1 << layout.total_qubits,) * 2, dtype=np.complex128)
    for value, gate in ((0, g0), (1, g1)):
        factors = [_EYE2] * layout.total_qubits
        factors[c_pos] = _PROJ[value]
        factors[t_pos] = gate
        block = factors[0]
        for f in factors[1:]:
            block = kron(block, f)
        total += block
    return total


def iteration_matrix(layout: RegisterLayout, k: int, spec: IterationSpec) -> np.ndarray:
    """Explicit global unitary of one round: V . F . CNOT . U (plus R)."""
    u = controlled_unitary_matrix(layout, "C", "S", spec.u0.matrix(), spec.u1.matrix())
    cnot = controlled_unitary_matrix(layout, "C", f"M{k}", _EYE2, _X)
    f = controlled_unitary_matrix(layout, "P", "S", spec.f0.matrix(), spec.f1.matrix())
    v = controlled_unitary_matrix(layout, f"M{k}", "P", spec.v0.matrix(), spec.v1.matrix())
    w = mat_mul(v, mat_mul(f, mat_mul(cnot, u)))
    if spec.extended:
        r = controlled_unitary_matrix(layout, "P", "C", spec.r0.matrix(), spec.r1.matrix())
        w = mat_mul(r, w)
    return w


def oracle_run(scenario: Scenario, compose: bool = True) -> np.ndarray:
    """Run a scenario by explicit global-matrix arithmetic.

    With ``compose`` the four controlled factors are multiplied into one
    iteration matrix first; otherwise they are applied to the vector one
    factor at a time (same operator, cheaper at large sizes).
    """
    layout = build_layout(len(scenario.iterations))
    amps = initialize(scenario.init, layout).amplitudes.copy()
    for k, spec in enumerate(scenario.iterations, start=1):
        if compose:
            amps = iteration_matrix(layout, k, spec) @ amps
            continue
        factors = [
            controlled_unitary_matrix(layout, "C", "S", spec.u0.matrix(), spec.u1.matrix()),
            controlled_unitary_matrix(layout, "C", f"M{k}", _EYE2, _X),
            controlled_unitary_matrix(layout, "P", "S", spec.f0.matrix(), spec.f1.matrix()),
            controlled_unitary_matrix(layout, f"M{k}", "P", spec.v0.matrix(), spec.v1.matrix()),
        ]
        if spec.extended:
            factors.append(
                controlled_unitary_matrix(layout, "P", "C", spec.r0.matrix(), spec.r1.matrix())
            )
        for factor in factors:
            amps = factor @ amps
    return amps


def expansion_one_iteration(init: InitSpec, spec: IterationSpec) -> np.ndarray:
    """Closed-form single-round state for correlated initialization.

    Built directly from the matrix elements V[j][l, q] of the policy
    updates, independent of any gate-application machinery.
    """
    e0 = np.array([1, 0], dtype=np.complex128)
    e1 = np.array([0, 1], dtype=np.complex128)
    psi = init.system_init.matrix() @ e0
    u0, u1 = spec.u0.matrix(), spec.u1.matrix()
    f0, f1 = spec.f0.matrix(), spec.f1.matrix()
    v0, v1 = spec.v0.matrix(), spec.v1.matrix()
    a, b, g, d = init.alpha, init.beta, init.gamma, init.delta
    s0, s1 = u0 @ psi, u1 @ psi

    def term(coeff, c_vec, m_vec, s_vec, p_vec):
        return coeff * np.kron(np.kron(np.kron(c_vec, m_vec), s_vec), p_vec)

    out = term(a, e0, e0, (g * v0[0, 0] * (f0 @ s0) + d * v0[0, 1] * (f1 @ s0)), e0)
    out += term(a, e0, e0, (g * v0[1, 0] * (f0 @ s0) + d * v0[1, 1] * (f1 @ s0)), e1)
    out += term(b, e1, e1, (d * v1[0, 0] * (f0 @ s1) + g * v1[0, 1] * (f1 @ s1)), e0)
    out += term(b, e1, e1, (d * v1[1, 0] * (f0 @ s1) + g * v1[1, 1] * (f1 @ s1)), e1)
    return out


# ---------------------------------------------------------------------------
# Random draws

def random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_gate(rng: np.random.Generator) -> GateSpec:
    return raw_gate(random_unitary(rng))


def random_amplitude_pair(
    rng: np.random.Generator, min_weight: float = 0.05
) -> tuple[complex, complex]:
    """Normalized (a, b) with |a|^2 bounded away from 0 and 1."""
    w = rng.uniform(min_weight, 1.0 - min_weight)
    pa, pb = rng.uniform(0.0, 2.0 * math.pi, size=2)
    return (
        complex(math.sqrt(w) * math.cos(pa), math.sqrt(w) * math.sin(pa)),
        complex(math.sqrt(1 - w) * math.cos(pb), math.sqrt(1 - w) * math.sin(pb)),
    )


def random_init(rng: np.random.Generator, mode: str | None = None) -> InitSpec:
    alpha, beta = random_amplitude_pair(rng)
    if mode is None:
        mode = ("uncorrelated", "correlated_c_to_p", "copy_c_to_p_from_zero")[
            rng.integers(0, 3)
        ]
    if mode == "copy_c_to_p_from_zero":
        gamma, delta = 1.0 + 0j, 0j
    else:
        gamma, delta = random_amplitude_pair(rng)
    return InitSpec(
        alpha=alpha, beta=beta, gamma=gamma, delta=delta, mode=mode,
        system_init=random_gate(rng),
    )


def random_canonical_scenario(
    rng: np.random.Generator, n_iterations: int, mode: str | None = None
) -> Scenario:
    iterations = tuple(
        IterationSpec(
            u0=random_gate(rng), u1=random_gate(rng),
            f0=random_gate(rng), f1=random_gate(rng),
            v0=random_gate(rng), v1=random_gate(rng),
        )
        for _ in range(n_iterations)
    )
    return Scenario(name="random-canonical", init=random_init(rng, mode),
                    iterations=iterations)


def random_extended_scenario(rng: np.random.Generator, n_iterations: int) -> Scenario:
    base = random_canonical_scenario(rng, n_iterations)
    iterations = tuple(
        replace(it, r0=random_gate(rng), r1=random_gate(rng))
        for it in base.iterations
    )
    return replace(base, iterations=iterations)


# ---------------------------------------------------------------------------
# Individual checks.  Each returns (max deviation, tolerance); a check
# passes when deviation <= tolerance.  Boolean conditions map to 0/1
# deviations against a 0.5 tolerance.

def _bool_dev(condition: bool) -> float:
    return 0.0 if condition else 1.0


def _check_golden_pauli_flips(rng, tol: Tolerances):
    state = machine.run(builtin_scenario("pauli-flips"))
    expected = np.zeros(64, dtype=np.complex128)
    expected[0] = expected[63] = _INV_SQRT2
    infidelity = 1.0 - abs(np.vdot(expected, state.amplitudes)) ** 2
    dev = max(infidelity / 1e-10, 0.0)
    for k in (1, 2, 3):
        rep = analysis.memory_marginal(state, k)
        dev = max(dev, rep.max_offdiag / tol.diagonality)
        dev = max(dev, max(abs(p - 0.5) for p in rep.diagonal_probs) / 1e-10)
    return dev, 1.0


def _check_golden_rotations_nofeedback(rng, tol: Tolerances):
    state = machine.run(builtin_scenario("rotations-nofeedback"))
    dev = abs(analysis.outcome_probability(state, "S", 1) - 1.0) / 1e-10
    _, pur = analysis.separability_check(state, "S")
    dev = max(dev, abs(pur - 1.0) / 1e-9)
    expected = np.zeros(64, dtype=np.complex128)
    expected[0b000010] = -1j * _INV_SQRT2
    expected[0b111111] = +1j * _INV_SQRT2
    dev = max(dev, float(np.max(np.abs(state.amplitudes - expected))) / 1e-10)
    return dev, 1.0


def _check_golden_rotations_feedback(rng, tol: Tolerances):
    state = machine.run(builtin_scenario("rotations-feedback"))
    expected_p = (2.0 + math.sqrt(2.0)) / 4.0
    dev = abs(analysis.outcome_probability(state, "S", 1) - expected_p) / 1e-9
    table = analysis.branch_decompose(state)
    c, s = math.cos(5 * math.pi / 8), math.sin(5 * math.pi / 8)
    # substates are over (C, S, P); P follows C on each branch
    sub0 = table.entries["000"].substate.amplitudes
    sub1 = table.entries["111"].substate.amplitudes
    dev = max(dev, abs(sub0[0b000] - c) / 1e-10, abs(sub0[0b010] - (-1j * s)) / 1e-10)
    dev = max(dev, abs(sub1[0b101] - c) / 1e-10, abs(sub1[0b111] - (+1j * s)) / 1e-10)
    _, pur = analysis.separability_check(state, "S")
    dev = max(dev, _bool_dev(pur < 1.0 - 1e-3) * 2.0)
    return dev, 1.0


def _check_golden_reinforce_two_step(rng, tol: Tolerances):
    state = machine.run(builtin_scenario("reinforce-two-step"))
    probs = analysis.branch_decompose(state).probabilities()
    expected = {"00": 0.5, "10": 0.25, "11": 0.25}
    dev = _bool_dev(set(probs) == set(expected)) * 2.0
    for label, p in expected.items():
        dev = max(dev, abs(probs.get(label, 0.0) - p) / 1e-10)
    return dev, 1.0


def _check_oracle_equivalence(rng, tol: Tolerances):
    dev = 0.0
    for trial in range(100):
        scenario = random_canonical_scenario(rng, int(rng.integers(1, 5)))
        engine = machine.run(scenario).amplitudes
        dev = max(dev, float(np.max(np.abs(engine - oracle_run(scenario)))))
    # a few larger draws cover the documented sizes up to 10 qubits
    for n in (5, 6, 7):
        scenario = random_extended_scenario(rng, n)
        engine = machine.run(scenario).amplitudes
        dev = max(dev, float(np.max(np.abs(engine - oracle_run(scenario, compose=False)))))
    return dev, 1e-10


def _check_symbolic_expansion(rng, tol: Tolerances):
    dev = 0.0
    for _ in range(20):
        scenario = random_canonical_scenario(rng, 1, mode="correlated_c_to_p")
        engine = machine.run(scenario).amplitudes
        oracle = expansion_one_iteration(scenario.init, scenario.iterations[0])
        dev = max(dev, float(np.max(np.abs(engine - oracle))))
    return dev, 1e-10


def _check_marginal_diagonality(rng, tol: Tolerances):
    dev = 0.0
    for _ in range(50):
        scenario = random_canonical_scenario(rng, int(rng.integers(1, 4)))
        state = machine.run(scenario)
        wa = abs(scenario.init.alpha) ** 2
        wb = abs(scenario.init.beta) ** 2
        for k in range(1, len(scenario.iterations) + 1):
            rep = analysis.memory_marginal(state, k)
            dev = max(dev, rep.max_offdiag / tol.diagonality)
            dev = max(dev, abs(rep.diagonal_probs[0] - wa) / 1e-10)
            dev = max(dev, abs(rep.diagonal_probs[1] - wb) / 1e-10)
    return dev, 1.0


def _check_phase_blindness(rng, tol: Tolerances):
    dev = 0.0
    for _ in range(20):
        scenario = random_canonical_scenario(rng, int(rng.integers(1, 4)))
        t = rng.uniform(0, 2 * math.pi)
        phase = complex(math.cos(t), math.sin(t))
        shifted = replace(
            scenario, init=replace(scenario.init, beta=scenario.init.beta * phase)
        )
        base_state, shifted_state = machine.run(scenario), machine.run(shifted)
        for k in range(1, len(scenario.iterations) + 1):
            m1 = analysis.memory_marginal(base_state, k).matrix
            m2 = analysis.memory_marginal(shifted_state, k).matrix
            dev = max(dev, float(np.max(np.abs(m1 - m2))))
    return dev, 1e-12


def _check_no_cloning(rng, tol: Tolerances):
    dev = 0.0
    for _ in range(50):
        scenario = random_canonical_scenario(rng, int(rng.integers(1, 4)))
        state = machine.run(scenario)
        entangled, _ = analysis.no_cloning_witness(state, "C", "M1")
        dev = max(dev, _bool_dev(entangled))
    return dev, 0.5


def _check_branch_conservation(rng, tol: Tolerances):
    dev = 0.0
    for trial in range(20):
        n = int(rng.integers(1, 4))
        scenario = (random_extended_scenario(rng, n) if trial % 2
                    else random_canonical_scenario(rng, n))
        state = machine.run(scenario)
        table = analysis.branch_decompose(state)
        dev = max(dev, abs(sum(table.probabilities().values()) - 1.0))
        # reconstruction: sqrt(p_b) |b>_M (x) substate re-interleaved
        layout = state.layout
        rebuilt = np.zeros_like(state.amplitudes)
        shape = [2] * layout.total_qubits
        for label, entry in table.entries.items():
            index = [slice(None)] * layout.total_qubits
            for axis, ch in zip(layout.memories, label):
                index[axis] = int(ch)
            rebuilt.reshape(shape)[tuple(index)] = (
                math.sqrt(entry.probability)
                * entry.substate.amplitudes.reshape(2, 2, 2)
            )
        dev = max(dev, float(np.max(np.abs(rebuilt - state.amplitudes))))
        # branch weights equal the joint memory marginal diagonal
        joint = analysis.register_marginal(
            state, {f"M{k}" for k in range(1, n + 1)}
        )
        diag = np.real(np.diag(joint))
        for label, p in table.probabilities().items():
            dev = max(dev, abs(p - diag[int(label, 2)]))
    return dev, 1e-10


def _check_norm_preservation(rng, tol: Tolerances):
    dev = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 4))
        scenario = random_extended_scenario(rng, n)
        layout = build_layout(n)
        state = initialize(scenario.init, layout)
        dev = max(dev, abs(state.norm() - 1.0))
        for k, spec in enumerate(scenario.iterations, start=1):
            state = iterate_extended(state, k, spec)
            dev = max(dev, abs(state.norm() - 1.0))
    return dev, tol.norm


def _check_extended_identity(rng, tol: Tolerances):
    dev = 0.0
    for _ in range(20):
        scenario = random_canonical_scenario(rng, 1)
        layout = build_layout(1)
        state = initialize(scenario.init, layout)
        spec = scenario.iterations[0]
        plain = iterate(state, 1, spec)
        wrapped = iterate_extended(
            state, 1, replace(spec, r0=IDENTITY, r1=IDENTITY)
        )
        dev = max(dev, float(np.max(np.abs(plain.amplitudes - wrapped.amplitudes))))
    return dev, 1e-12


def _check_measurement(rng, tol: Tolerances):
    dev = 0.0
    for trial in range(20):
        scenario = random_extended_scenario(rng, int(rng.integers(1, 4)))
        state = machine.run(scenario)
        _, c0, p0 = measure_control(state, 0, force=0)
        _, c1, p1 = measure_control(state, 0, force=1)
        dev = max(dev, abs(p0 + p1 - 1.0))
        dev = max(dev, abs(np.vdot(c0.amplitudes, c1.amplitudes)))
        seed = int(rng.integers(0, 2**32))
        first = measure_control(state, seed)[0]
        second = measure_control(state, seed)[0]
        dev = max(dev, _bool_dev(first == second))
    return dev, 1e-10


def _check_dilation_blocks(rng, tol: Tolerances):
    dev = 0.0
    for env_dims in ((2,), (2, 2), (3,)):
        env = int(np.prod(env_dims))
        u0, u1 = random_unitary(rng, 2 * env), random_unitary(rng, 2 * env)
        full = build_controlled_dilation(u0, u1, env_dims)
        d = 2 * env
        dev = max(dev, float(np.max(np.abs(full[:d, d:]))))
        dev = max(dev, float(np.max(np.abs(full[d:, :d]))))
        alpha, beta = random_amplitude_pair(rng)
        psi = random_unitary(rng, 2)[:, 0]
        env0 = np.zeros(env, dtype=np.complex128)
        env0[0] = 1.0
        se = np.kron(psi, env0)
        product = np.kron(np.array([alpha, beta]), se)
        expected = np.concatenate([alpha * (u0 @ se), beta * (u1 @ se)])
        dev = max(dev, float(np.max(np.abs(full @ product - expected))))
    return dev, 1e-10


def _check_canonical_branch_support(rng, tol: Tolerances):
    dev = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 4))
        scenario = random_canonical_scenario(rng, n)
        probs = analysis.branch_decompose(machine.run(scenario)).probabilities()
        dev = max(dev, _bool_dev(set(probs) <= {"0" * n, "1" * n}))
        dev = max(dev, abs(probs.get("0" * n, 0.0) - abs(scenario.init.alpha) ** 2))
        dev = max(dev, abs(probs.get("1" * n, 0.0) - abs(scenario.init.beta) ** 2))
    return dev, 1e-10


CHECKS: dict[str, Callable] = {
    "golden_pauli_flips": _check_golden_pauli_flips,
    "golden_reinforce_two_step": _check_golden_reinforce_two_step,
    "golden_rotations_feedback": _check_golden_rotations_feedback,
    "golden_rotations_nofeedback": _check_golden_rotations_nofeedback,
    "oracle_equivalence": _check_oracle_equivalence,
    "property_branch_conservation": _check_branch_conservation,
    "property_canonical_branch_support": _check_canonical_branch_support,
    "property_dilation_blocks": _check_dilation_blocks,
    "property_extended_identity": _check_extended_identity,
    "property_marginal_diagonality": _check_marginal_diagonality,
    "property_measurement": _check_measurement,
    "property_no_cloning": _check_no_cloning,
    "property_norm_preservation": _check_norm_preservation,
    "property_phase_blindness": _check_phase_blindness,
    "property_symbolic_expansion": _check_symbolic_expansion,
}

SUITES = {
    "golden": lambda name: name.startswith("golden_"),
    "oracle": lambda name: name == "oracle_equivalence",
    "properties": lambda name: name.startswith("property_"),
}


def run_checks(
    only: str | None = None,
    seed: int = DEFAULT_SEED,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> list[CheckResult]:
    """Run the (optionally filtered) check suite in sorted name order."""
    if only is not None and only not in SUITES:
        raise ValidationError(
            f"unknown suite {only!r}; choose from {sorted(SUITES)}"
        )
    selected = sorted(
        name for name in CHECKS if only is None or SUITES[only](name)
    )
    results = []
    for name in selected:
        # fresh generator per check: draws are independent of suite filtering
        rng = np.random.Generator(np.random.Philox(seed))
        deviation, tolerance = CHECKS[name](rng, tolerances)
        results.append(
            CheckResult(name, passed=deviation <= tolerance,
                        deviation=float(deviation), tolerance=float(tolerance))
        )
    return results
