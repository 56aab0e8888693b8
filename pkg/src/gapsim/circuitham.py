"""Circuits, unary clocks and the circuit-to-Hamiltonian map.

Site order in every assembled Hamiltonian: the circuit's own sites (system
then ancilla) followed by T clock qubits, clock qubit t (1-based) at index
c.space.n + t - 1. The legal clock state for time t is |1^t 0^(T-t)>.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constructions.common import ConstructionOutput
from .constructions.diluters import tree_layout, tree_site
from .constructions.examples import build_HA
from .encver import trivial_encoding, verify_gap_sim
from .hamcore import (
    DENSE_CAP_DIM,
    PROJ0,
    PROJ1,
    CapExceeded,
    Hamiltonian,
    LocalTerm,
    SiteSpace,
    assemble_dense,
    matrix_from_json,
    matrix_to_json,
)
from .spectral import eig_dense, ground_data

UNITARY_TOL = 1e-10
IDLE_CAP = 10**6
WEIGHT_CAP_FACTOR = 2**30


@dataclass(frozen=True)
class Gate:
    support: tuple[int, ...]
    unitary: np.ndarray = field(repr=False)

    def __post_init__(self):
        support = tuple(int(s) for s in self.support)
        if len(set(support)) != len(support):
            raise ValueError(f"gate support has repeated sites: {support}")
        U = np.array(self.unitary, dtype=complex)
        if U.ndim != 2 or U.shape[0] != U.shape[1]:
            raise ValueError("gate matrix must be square")
        if np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])), initial=0.0) > UNITARY_TOL:
            raise ValueError("gate matrix is not unitary")
        U.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "unitary", U)

    @property
    def dagger(self) -> "Gate":
        return Gate(self.support, self.unitary.conj().T)

    @property
    def is_idle(self) -> bool:
        return not self.support


IDLE = Gate((), np.eye(1))


@dataclass(frozen=True)
class Circuit:
    space: SiteSpace
    n_system: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        gates = tuple(self.gates)
        if not 0 <= self.n_system <= self.space.n:
            raise ValueError("system register larger than the circuit space")
        for g in gates:
            for s in g.support:
                if not 0 <= s < self.space.n:
                    raise ValueError(f"gate site {s} outside the circuit space")
            expect = int(np.prod([self.space.dims[s] for s in g.support], dtype=np.int64))
            if g.unitary.shape[0] != expect:
                raise ValueError(f"gate on {g.support} has dimension {g.unitary.shape[0]}, "
                                 f"expected {expect}")
        object.__setattr__(self, "gates", gates)

    @property
    def T(self) -> int:
        return len(self.gates)

    @property
    def system_sites(self) -> tuple[int, ...]:
        return tuple(range(self.n_system))

    @property
    def ancilla_sites(self) -> tuple[int, ...]:
        return tuple(range(self.n_system, self.space.n))

    @property
    def degree(self) -> int:
        """Largest number of gates acting on one site."""
        counts = [0] * self.space.n
        for g in self.gates:
            for s in g.support:
                counts[s] += 1
        return max(counts, default=0)

    def first_use(self, site: int) -> int | None:
        """1-based time of the first gate touching `site`, or None."""
        for t, g in enumerate(self.gates, start=1):
            if site in g.support:
                return t
        return None

    def with_gates(self, gates: Sequence[Gate]) -> "Circuit":
        return Circuit(self.space, self.n_system, tuple(gates))

    def unitary(self) -> np.ndarray:
        N = self.space.total_dim
        U = np.eye(N, dtype=complex)
        for g in self.gates:
            U = apply_gate(g, U, self.space.dims)
        return U


@dataclass(frozen=True)
class ClockRegister:
    T: int

    def legal_index(self, t: int) -> int:
        if not 0 <= t <= self.T:
            raise ValueError(f"time {t} outside 0..{self.T}")
        return 2**self.T - 2 ** (self.T - t)

    def legal_indices(self) -> list[int]:
        return [self.legal_index(t) for t in range(self.T + 1)]

    def legal_state(self, t: int) -> np.ndarray:
        v = np.zeros(2**self.T)
        v[self.legal_index(t)] = 1.0
        return v

    def illegal_projector(self) -> np.ndarray:
        diag = np.ones(2**self.T)
        diag[self.legal_indices()] = 0.0
        return np.diag(diag)


def apply_gate(g: Gate, state: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Apply a gate to a vector or to every column of a matrix."""
    if g.is_idle:
        return state * g.unitary[0, 0]
    cols = state.ndim == 2
    X = state if cols else state[:, None]
    n = len(dims)
    k = X.shape[1]
    t = X.reshape(tuple(dims) + (k,))
    sub = [dims[s] for s in g.support]
    U = g.unitary.reshape(sub + sub)
    m = len(g.support)
    out = np.tensordot(U, t, axes=(list(range(m, 2 * m)), list(g.support)))
    rest = [i for i in range(n + 1) if i not in g.support]
    order = [0] * (n + 1)
    for pos, s in enumerate(g.support):
        order[s] = pos
    for pos, s in enumerate(rest):
        order[s] = m + pos
    out = np.transpose(out, order).reshape(X.shape)
    return out if cols else out[:, 0]


# --- history states ----------------------------------------------------------

def history_state(c: Circuit, psi: np.ndarray) -> np.ndarray:
    """(T+1)^(-1/2) sum_t (U_t...U_1 psi) ⊗ |1^t 0^(T-t)>; psi itself when T = 0."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (c.space.total_dim,):
        raise ValueError(f"input has shape {psi.shape}, expected ({c.space.total_dim},)")
    if abs(np.linalg.norm(psi) - 1) > 1e-10:
        raise ValueError("input state is not normalized")
    if c.T == 0:
        return psi
    clock = ClockRegister(c.T)
    out = np.zeros(psi.size * 2**c.T, dtype=complex)
    cur = psi
    for t in range(c.T + 1):
        if t:
            cur = apply_gate(c.gates[t - 1], cur, c.space.dims)
        out += np.kron(cur, clock.legal_state(t))
    return out / math.sqrt(c.T + 1)


def history_basis(c: Circuit, inputs: np.ndarray) -> np.ndarray:
    """History states of each column of `inputs`."""
    return np.column_stack([history_state(c, inputs[:, j]) for j in range(inputs.shape[1])])


# --- H_clock, H_prop, H_in -----------------------------------------------------

def _full_space(c: Circuit) -> SiteSpace:
    return SiteSpace(c.space.dims + (2,) * c.T)


def clock_site(c: Circuit, t: int) -> int:
    return c.space.n + t - 1


def _require_clock(c: Circuit):
    if c.T < 1:
        raise ValueError("circuit Hamiltonians need at least one gate")


def clock_hamiltonian_terms(c: Circuit) -> list[LocalTerm]:
    p01 = np.kron(PROJ0, PROJ1)
    return [LocalTerm((clock_site(c, t), clock_site(c, t + 1)), p01) for t in range(1, c.T)]


def clock_hamiltonian(c: Circuit) -> Hamiltonian:
    """Sum of |01><01| over neighbouring clock qubits; legal states cost zero."""
    _require_clock(c)
    return Hamiltonian(_full_space(c), tuple(clock_hamiltonian_terms(c)))


def _ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits))
    v[int(bits, 2)] = 1.0
    return v


def _prop_block(U: np.ndarray, before: str, after: str) -> np.ndarray:
    """1⊗|b><b| - U⊗|a><b| - U†⊗|b><a| + 1⊗|a><a| on gate ⊗ clock."""
    b, a = _ket(before), _ket(after)
    I = np.eye(U.shape[0])
    return (np.kron(I, np.outer(b, b)) - np.kron(U, np.outer(a, b))
            - np.kron(U.conj().T, np.outer(b, a)) + np.kron(I, np.outer(a, a)))


def prop_terms(c: Circuit) -> list[LocalTerm]:
    _require_clock(c)
    T = c.T
    terms = []
    for t, g in enumerate(c.gates, start=1):
        if T == 1:
            clk, before, after = (1,), "0", "1"
        elif t == 1:
            clk, before, after = (1, 2), "00", "10"
        elif t == T:
            clk, before, after = (T - 1, T), "10", "11"
        else:
            clk, before, after = (t - 1, t, t + 1), "100", "110"
        support = g.support + tuple(clock_site(c, s) for s in clk)
        terms.append(LocalTerm(support, _prop_block(g.unitary, before, after)))
    return terms


def prop_hamiltonian(c: Circuit) -> Hamiltonian:
    """Propagation checks from time t-1 to t, with the boundary forms at t = 1 and T."""
    return Hamiltonian(_full_space(c), tuple(prop_terms(c)))


def input_terms(c: Circuit) -> list[LocalTerm]:
    """(1 - |0><0|) on each ancilla while clock qubit t_min is still 0.

    Ancillas no gate touches are penalized at t = 0 through clock qubit 1.
    """
    _require_clock(c)
    terms = []
    for a in c.ancilla_sites:
        d = c.space.dims[a]
        t_min = c.first_use(a) or 1
        n_hat = np.eye(d)
        n_hat[0, 0] = 0.0
        terms.append(LocalTerm((a, clock_site(c, t_min)), np.kron(n_hat, PROJ0)))
    return terms


def input_penalty(c: Circuit) -> Hamiltonian:
    return Hamiltonian(_full_space(c), tuple(input_terms(c)))


def clock_projector(c: Circuit, t: int) -> tuple[tuple[int, ...], np.ndarray]:
    """Support and matrix of the local projector selecting legal time t."""
    T = c.T
    if not 1 <= t <= T:
        raise ValueError(f"time {t} outside 1..{T}")
    if T == 1:
        return (clock_site(c, 1),), PROJ1.copy()
    if t == 1:
        return (clock_site(c, 1), clock_site(c, 2)), np.outer(_ket("10"), _ket("10"))
    if t == T:
        return (clock_site(c, T - 1), clock_site(c, T)), np.outer(_ket("11"), _ket("11"))
    sup = (clock_site(c, t - 1), clock_site(c, t), clock_site(c, t + 1))
    return sup, np.outer(_ket("110"), _ket("110"))


# --- assembly ------------------------------------------------------------------

@dataclass(frozen=True)
class CircuitWeights:
    J_clock: float
    J_prop: float
    J_in: float

    def __post_init__(self):
        if not (self.J_clock > 0 and self.J_prop > 0 and self.J_in > 0):
            raise ValueError("circuit Hamiltonian weights must be positive")

    def scaled(self, f: float) -> "CircuitWeights":
        return CircuitWeights(self.J_clock * f, self.J_prop * f, self.J_in * f)

    def as_dict(self) -> dict:
        return {"J_clock": self.J_clock, "J_prop": self.J_prop, "J_in": self.J_in}


def schedule_weights(c: Circuit, delta: float, constants: Sequence[float] = (1.0, 1.0, 1.0),
                     K: float = 1.0) -> CircuitWeights:
    """J_in = c1 Δ(T+1), J_prop = c2 K T² J_in² m², J_clock = c3 K J_prop² T²."""
    if not delta > 0:
        raise ValueError("target gap must be positive")
    c1, c2, c3 = constants
    T = c.T
    m = max(len(c.ancilla_sites), 1)
    J_in = c1 * delta * (T + 1)
    J_prop = c2 * K * T**2 * J_in**2 * m**2
    J_clock = c3 * K * J_prop**2 * T**2
    return CircuitWeights(J_clock, J_prop, J_in)


def assemble_circuit_hamiltonian(c: Circuit, H_out: Hamiltonian | None = None,
                                 weights: CircuitWeights | dict | None = None,
                                 delta: float | None = None, **schedule) -> Hamiltonian:
    """J_clock H_clock + J_prop H_prop + J_in H_in + H_out.

    Pass explicit weights, or a target gap `delta` to use schedule_weights.
    """
    _require_clock(c)
    if weights is None:
        if delta is None:
            raise ValueError("give weights or a target gap")
        weights = schedule_weights(c, delta, **schedule)
    elif isinstance(weights, dict):
        weights = CircuitWeights(**weights)
    space = _full_space(c)
    terms = [t.scaled(weights.J_clock) for t in clock_hamiltonian_terms(c)]
    terms += [t.scaled(weights.J_prop) for t in prop_terms(c)]
    terms += [t.scaled(weights.J_in) for t in input_terms(c)]
    if H_out is not None:
        if H_out.space != space:
            raise ValueError("H_out must live on circuit sites plus clock")
        terms += list(H_out.terms)
    return Hamiltonian(space, tuple(terms))


# --- idling ----------------------------------------------------------------------

def idling_chi(D: int, L: int) -> float:
    return math.sqrt(D / (D + L + 1))


def idling_bound(D: int, L: int) -> float:
    """sqrt(2) chi / sqrt(1 - chi²), which simplifies to sqrt(2D/(L+1))."""
    return math.sqrt(2 * D / (L + 1))


def idle_count(D: int, eps: float, cap: int = IDLE_CAP) -> int:
    if not eps > 0:
        raise ValueError("target incoherence must be positive")
    L = max(0, math.ceil(2 * D / eps**2 - 1 - 1e-9))
    while L > 0 and idling_bound(D, L - 1) <= eps:
        L -= 1
    while idling_bound(D, L) > eps:
        L += 1
    if L > cap:
        raise CapExceeded(f"{L} idle gates needed, cap is {cap}")
    return L


@dataclass
class PaddedCircuit:
    circuit: Circuit
    D: int
    L: int
    chi: float
    bound: float


def idling_pad(c: Circuit, eps: float, cap: int = IDLE_CAP) -> PaddedCircuit:
    """Append the fewest identity gates that push the idling bound below eps."""
    D = c.T
    L = idle_count(D, eps, cap)
    return PaddedCircuit(c.with_gates(c.gates + (IDLE,) * L), D, L,
                         idling_chi(D, L), idling_bound(D, L))


def idle_ancilla_state(c: Circuit, D: int) -> np.ndarray:
    """|0^m> ⊗ (L+1)^(-1/2) sum_{t=D}^{T} |t>_clock over ancilla ⊗ clock."""
    m_dim = int(np.prod([c.space.dims[a] for a in c.ancilla_sites], dtype=np.int64))
    anc = np.zeros(m_dim)
    anc[0] = 1.0
    clock = ClockRegister(c.T)
    ts = range(D, c.T + 1)
    clk = sum(clock.legal_state(t) for t in ts) / math.sqrt(len(ts))
    return np.kron(anc, clk)


# --- counting circuit for H_A ----------------------------------------------------

def counting_gate(dl: int, dr: int, root: bool) -> np.ndarray:
    """Children (x, y) with a qutrit flag z below them.

    Non-root: 00 keeps z, 10 and 01 add one mod 3, anything else maps z to 2-z.
    Root: 00, 01 and 10 keep z, anything else adds one mod 3.
    """
    D = dl * dr * 3
    U = np.zeros((D, D))
    for x in range(dl):
        for y in range(dr):
            for z in range(3):
                xy = (x, y)
                if xy == (0, 0) or (root and xy in ((0, 1), (1, 0))):
                    z2 = z
                elif root or xy in ((0, 1), (1, 0)):
                    z2 = (z + 1) % 3
                else:
                    z2 = 2 - z
                i = (x * dr + y) * 3 + z
                U[(x * dr + y) * 3 + z2, i] = 1.0
    return U


def counting_circuit(n: int) -> Circuit:
    """U_1† ... U_(n-2)† U_(n-1) U_(n-2) ... U_1 on the left-heavy tree.

    Sites: n system qubits, then one qutrit per internal node.
    """
    if n < 2:
        raise ValueError("counting circuit needs n >= 2")
    nodes = tree_layout(n)
    dims = (2,) * n + (3,) * (n - 1)
    fwd = []
    for nd in nodes:
        sup = (tree_site(n, nd.left), tree_site(n, nd.right), tree_site(n, ("node", nd.index)))
        U = counting_gate(dims[sup[0]], dims[sup[1]], root=nd.index == n - 1)
        fwd.append(Gate(sup, U))
    gates = fwd + [g.dagger for g in reversed(fwd[:-1])]
    return Circuit(SiteSpace(dims), n, tuple(gates))


def ha_output_term(c: Circuit, n: int, J_out: float) -> LocalTerm:
    """J_out (|1><1| + |2><2|) on the root ⊗ |1><1| on clock qubit n-1."""
    root = tree_site(n, ("node", n - 1))
    return LocalTerm((root, clock_site(c, n - 1)), J_out * np.kron(np.diag([0.0, 1.0, 1.0]), PROJ1))


def accepted_inputs(n: int) -> np.ndarray:
    """|x>|0...0> for the n+1 strings with at most one excitation."""
    m_dim = 3 ** (n - 1)
    cols = []
    for x in [0] + [1 << (n - 1 - i) for i in range(n)]:
        v = np.zeros(2**n * m_dim)
        v[x * m_dim] = 1.0
        cols.append(v)
    return np.column_stack(cols)


def _gap(vals: np.ndarray, q: int) -> float:
    return float(vals[q] - vals[0]) if len(vals) > q else math.inf


def ha_circuit_diluter(n: int, eps: float, J_out: float = 2.0,
                       weights: CircuitWeights | None = None, min_gap: float = 1.0,
                       cap_dim: int = DENSE_CAP_DIM, cap_factor: float = WEIGHT_CAP_FACTOR):
    """Padded counting circuit turned into a Hamiltonian whose ground space is
    the history span of the accepted inputs.

    Without explicit weights, a common scale J (all three weights equal) is
    doubled from 1 until the gap above the n+1 ground states reaches min_gap.
    """
    base = counting_circuit(n)
    pad = idling_pad(base, eps)
    c = pad.circuit
    space = _full_space(c)
    if space.total_dim > cap_dim:
        raise CapExceeded(f"circuit Hamiltonian has dimension {space.total_dim} > cap {cap_dim}")
    H_out = Hamiltonian(space, (ha_output_term(c, n, J_out),))
    q = n + 1
    tuning = []
    if weights is None:
        J = 1.0
        while True:
            w = CircuitWeights(J, J, J)
            Ht = assemble_circuit_hamiltonian(c, H_out, w)
            g = _gap(eig_dense(Ht, cap_dim).eigenvalues, q)
            tuning.append({"J": J, "gap": g})
            if g >= min_gap:
                break
            J *= 2
            if J > cap_factor:
                raise CapExceeded(f"gap {g} below {min_gap} at weight cap")
        weights = w
    else:
        Ht = assemble_circuit_hamiltonian(c, H_out, weights)
    m_anc = n - 1
    P_anc = idle_ancilla_state(c, pad.D)[:, None]
    notes = {
        "construction": "ha_circuit_diluter",
        "n": n, "D": pad.D, "L": pad.L, "T": c.T, "degree": c.degree,
        "J_out": J_out, "weights": weights.as_dict(), "tuning": tuning,
        "ancilla_qutrits": m_anc,
        "predicted": {"epsilon_bound": pad.bound, "chi": pad.chi, "w_tilde": 0.0,
                      "gamma_tilde_limit": J_out * (n - 1 + pad.L) / (2 * (n - 1) + pad.L)},
    }
    return ConstructionOutput(Ht, trivial_encoding((2,) * n, Ht.dims), P_anc, notes)


# --- toy phase-estimation degree reducer ------------------------------------------

def _hadamard() -> np.ndarray:
    return np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def _iqft(s: int) -> np.ndarray:
    N = 2**s
    k = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(k, k) / N) / math.sqrt(N)


def _controlled(U: np.ndarray) -> np.ndarray:
    d = U.shape[0]
    out = np.eye(2 * d, dtype=complex)
    out[d:, d:] = U
    return out


def _evolution(Hm: np.ndarray, tau: float) -> np.ndarray:
    w, V = np.linalg.eigh(Hm)
    return (V * np.exp(1j * tau * w)) @ V.conj().T


def pe_gates(Hm: np.ndarray, n: int, s: int, tau: float, fuse: bool) -> list[Gate]:
    """Phase estimation of exp(i Hm tau) into s readout qubits on sites n..n+s-1.

    Readout bit b (1-based) ends holding the b-th binary digit of Eτ/2π.
    """
    sys = tuple(range(n))
    bits = tuple(range(n, n + s))
    gates = [Gate((b,), _hadamard()) for b in bits]
    U = _evolution(Hm, tau)
    for j, b in enumerate(bits):
        gates.append(Gate((b,) + sys, _controlled(np.linalg.matrix_power(U, 2 ** (s - 1 - j)))))
    gates.append(Gate(bits, _iqft(s)))
    if not fuse:
        return gates
    dims = (2,) * (n + s)
    M = np.eye(2 ** (n + s), dtype=complex)
    for g in gates:
        M = apply_gate(g, M, dims)
    return [Gate(tuple(range(n + s)), M)]


def pe_circuit(H: Hamiltonian, s: int, tau: float, L: int = 0, fuse: bool = False):
    """PE → s idles → PE† → L idles on system ⊗ s readout qubits.

    The phase estimated is that of H - E_min, so readouts are nonnegative.
    Returns (circuit, t0, shift).
    """
    n = H.n
    Hm = assemble_dense(H)
    shift = float(np.linalg.eigvalsh(Hm)[0])
    Hm = Hm - shift * np.eye(Hm.shape[0])
    fwd = pe_gates(Hm, n, s, tau, fuse)
    gates = fwd + [IDLE] * s + [g.dagger for g in reversed(fwd)] + [IDLE] * L
    return Circuit(SiteSpace((2,) * (n + s)), n, tuple(gates)), len(fwd), shift


def pe_output_terms(c: Circuit, n: int, s: int, t0: int, tau: float) -> list[LocalTerm]:
    """(T+1) Σ_b (2π/τ) 2^(-b) |1><1|_b ⊗ P_clock(t0 + b)."""
    terms = []
    for b in range(1, s + 1):
        csup, P = clock_projector(c, t0 + b)
        coef = (c.T + 1) * (2 * math.pi / tau) * 2.0**-b
        terms.append(LocalTerm((n + b - 1,) + csup, coef * np.kron(PROJ1, P)))
    return terms


def pe_degree_reducer(H: Hamiltonian, s: int = 1, eps: float | None = None,
                      tau: float | None = None, fuse: bool = False,
                      weights: CircuitWeights | None = None, q: int | None = None,
                      cap_dim: int = DENSE_CAP_DIM, cap_factor: float = WEIGHT_CAP_FACTOR):
    """Toy-scale circuit Hamiltonian reading out the energy of H by phase estimation.

    The readout term makes the history span reproduce H - E_min. Without
    explicit weights a common scale J is doubled until the gap above the
    target's q ground states reaches 3/4 of the target gap, then the whole
    Hamiltonian is multiplied by 4/3.
    """
    if not H.space.is_qubit() or H.n > 2:
        raise ValueError("toy phase estimation takes at most two qubits")
    if not 1 <= s <= 2:
        raise ValueError("precision bits s must be 1 or 2")
    Hm = assemble_dense(H)
    vals = np.linalg.eigvalsh(Hm)
    span = float(vals[-1] - vals[0])
    if tau is None:
        tau = math.pi / span if span > 1e-12 else math.pi
    probe, t0, _ = pe_circuit(H, s, tau, 0, fuse)
    D = probe.T
    L = 0 if eps is None else idle_count(D, eps)
    c, t0, shift = pe_circuit(H, s, tau, L, fuse)
    space = _full_space(c)
    if space.total_dim > cap_dim:
        raise CapExceeded(f"circuit Hamiltonian has dimension {space.total_dim} > cap {cap_dim}")
    H_out = Hamiltonian(space, tuple(pe_output_terms(c, H.n, s, t0, tau)))
    target = ground_data(eig_dense(H), q=q) if q else ground_data(eig_dense(H), w_max=0.0)
    Q = target.rank_q
    gamma = target.gamma
    tuning = []
    alpha = 4.0 / 3.0
    if weights is None:
        J = 1.0
        while True:
            w = CircuitWeights(J, J, J)
            Ht = assemble_circuit_hamiltonian(c, H_out, w)
            g = _gap(eig_dense(Ht, cap_dim).eigenvalues, Q)
            tuning.append({"J": J, "gap": g})
            if alpha * g >= gamma:
                break
            J *= 2
            if J > cap_factor:
                raise CapExceeded(f"gap {g} too small at weight cap")
        weights = w
    Ht = assemble_circuit_hamiltonian(c, H_out, weights).scaled(alpha)
    P_anc = idle_ancilla_state(c, D)[:, None]
    notes = {
        "construction": "pe_degree_reducer",
        "s": s, "tau": tau, "shift": shift, "t0": t0, "D": D, "L": L, "T": c.T,
        "fuse": fuse, "weights": weights.as_dict(), "rescale": alpha, "tuning": tuning,
        "predicted": {"epsilon_bound": idling_bound(D, L) if L else None},
    }
    return ConstructionOutput(Ht, trivial_encoding(H.dims, Ht.dims), P_anc, notes)


# --- projection lemma --------------------------------------------------------------

def projection_lemma_check(H1: np.ndarray, H2: np.ndarray, tol: float = 1e-9) -> dict:
    """Bracket the lowest eigenvalue of H1 + H2 given the null space S of H2."""
    H1 = np.asarray(H1, dtype=complex)
    H2 = np.asarray(H2, dtype=complex)
    w2, V2 = np.linalg.eigh(H2)
    scale = max(1.0, float(np.max(np.abs(w2))))
    null = w2 <= tol * scale
    if not null.any():
        raise ValueError("H2 has no zero-energy eigenspace")
    if w2[null].min() < -tol * scale:
        raise ValueError("H2 must be positive semidefinite")
    S = V2[:, null]
    J = float(w2[~null].min()) if (~null).any() else math.inf
    norm1 = float(np.max(np.abs(np.linalg.eigvalsh(H1))))
    upper = float(np.linalg.eigvalsh(S.conj().T @ H1 @ S)[0])
    lam = float(np.linalg.eigvalsh(H1 + H2)[0])
    applicable = J > 2 * norm1
    lower = upper - norm1**2 / (J - 2 * norm1) if applicable else -math.inf
    K = (J - 2 * norm1) / norm1**2 if applicable and norm1 > 0 else math.inf
    slack = 1e-9 * max(1.0, abs(lam))
    return {"lambda": lam, "lower": lower, "upper": upper, "J": J, "norm_H1": norm1, "K": K,
            "applicable": applicable,
            "holds": bool(applicable and lower - slack <= lam <= upper + slack)}


# --- serialization --------------------------------------------------------------------

def circuit_to_json(c: Circuit) -> dict:
    return {
        "dims": list(c.space.dims),
        "registers": {"system": list(c.system_sites), "ancilla": list(c.ancilla_sites)},
        "gates": [{"support": list(g.support), "matrix": matrix_to_json(g.unitary)}
                  for g in c.gates],
    }


def circuit_from_json(data: dict) -> Circuit:
    try:
        space = SiteSpace(tuple(data["dims"]))
        system = list(data["registers"]["system"])
        if system != list(range(len(system))):
            raise ValueError("system register must be the leading sites")
        gates = []
        for g in data["gates"]:
            support = tuple(g["support"])
            for s in support:
                if not 0 <= s < space.n:
                    raise ValueError(f"gate site {s} outside space")
            dim = int(np.prod([space.dims[s] for s in support], dtype=np.int64))
            gates.append(Gate(support, matrix_from_json(g["matrix"], dim)))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed circuit JSON: {exc}") from exc
    return Circuit(space, len(system), tuple(gates))


def circuit_dumps(c: Circuit) -> str:
    return json.dumps(circuit_to_json(c), sort_keys=True)


def circuit_loads(text: str) -> Circuit:
    return circuit_from_json(json.loads(text))


def verify_ha_circuit(n: int, out: ConstructionOutput, **kw):
    """verify_gap_sim of the circuit diluter against H_A(n) with the idling ancilla state."""
    return verify_gap_sim(build_HA(n), out.hamiltonian, out.encoding, P_anc=out.known_P_anc, **kw)
