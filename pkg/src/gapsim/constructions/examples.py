"""The two model Hamiltonians and the vertex-cover corpus generator."""
from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from ..hamcore import PROJ0, PROJ1, Hamiltonian, LocalTerm, SiteSpace, pauli_string_matrix


def build_HA(n: int) -> Hamiltonian:
    """Sum over pairs of |1><1| ⊗ |1><1|: penalizes every pair of excitations."""
    if n < 2:
        raise ValueError("H_A needs n >= 2")
    pair = np.kron(PROJ1, PROJ1)
    terms = [LocalTerm((i, j), pair) for i, j in itertools.combinations(range(n), 2)]
    return Hamiltonian(SiteSpace((2,) * n), tuple(terms))


def ha_ground_basis(n: int) -> np.ndarray:
    """Columns |0...0> and the n one-hot strings, in that order."""
    if n < 2:
        raise ValueError("H_A needs n >= 2")
    out = np.zeros((2**n, n + 1))
    out[0, 0] = 1.0
    for i in range(n):
        out[1 << (n - 1 - i), i + 1] = 1.0
    return out


def hb_pair_offset(n: int) -> float:
    """Constant per pair term so the ground energy is exactly zero."""
    b_n = n * (n + 2) / 8
    return (b_n - n / 8) / (n * (n - 1) / 2)


def build_HB(n: int) -> Hamiltonian:
    """Quarter sum over pairs of (ZZ - XX - YY), shifted so the Dicke state sits at zero.

    The constant is spread evenly over the pair terms, keeping M = n(n-1)/2.
    """
    if n < 2 or n % 2:
        raise ValueError("H_B needs an even n >= 2")
    c = hb_pair_offset(n)
    pair = 0.25 * (pauli_string_matrix("ZZ") - pauli_string_matrix("XX")
                   - pauli_string_matrix("YY")) + c * np.eye(4)
    terms = [LocalTerm((i, j), pair) for i, j in itertools.combinations(range(n), 2)]
    return Hamiltonian(SiteSpace((2,) * n), tuple(terms))


def dicke_state(n: int, k: int | None = None) -> np.ndarray:
    """Equal superposition of all n-bit strings of Hamming weight k (default n/2)."""
    if k is None:
        if n % 2:
            raise ValueError("default weight n/2 needs even n")
        k = n // 2
    v = np.zeros(2**n)
    for idx in range(2**n):
        if bin(idx).count("1") == k:
            v[idx] = 1.0
    return v / math.sqrt(math.comb(n, k))


def collective_ops(n: int) -> dict:
    """Total spin components J_a = (1/2) sum_i sigma_a^(i)."""
    out = {}
    for a in "XYZ":
        M = np.zeros((2**n, 2**n), dtype=complex)
        for i in range(n):
            s = "I" * i + a + "I" * (n - i - 1)
            M += pauli_string_matrix(s)
        out[a] = M / 2
    return out


def vertex_cover_hamiltonian(n: int, edges: Sequence[Sequence[int]]) -> Hamiltonian:
    """2 * (uncovered-edge penalties) + (number of chosen vertices).

    Ground states are indicator strings of minimum vertex covers.
    """
    if n < 1:
        raise ValueError("need at least one vertex")
    edges = [tuple(sorted(set(e))) for e in edges]
    sizes = {len(e) for e in edges}
    if len(sizes) > 1:
        raise ValueError("hypergraph must be uniform")
    for e in edges:
        if any(not 0 <= v < n for v in e):
            raise ValueError(f"edge {e} has a vertex outside 0..{n - 1}")
    terms = []
    for e in edges:
        m = np.eye(1)
        for _ in e:
            m = np.kron(m, PROJ0)
        terms.append(LocalTerm(e, 2 * m))
    for v in range(n):
        terms.append(LocalTerm((v,), PROJ1))
    return Hamiltonian(SiteSpace((2,) * n), tuple(terms))

