"""Diluters of H_A: the binary-tree counter and the weak star-graph diluter."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..encver import trivial_encoding
from ..hamcore import PAULI, PROJ0, PROJ1, Hamiltonian, LocalTerm, SiteSpace
from .common import ConstructionOutput

TREE_ZERO_COST = {(0, 0, 0), (0, 1, 1), (1, 0, 1)}


@dataclass(frozen=True)
class TreeNode:
    index: int  # internal nodes are numbered 1..n-1 bottom-up, root = n-1
    left: tuple  # ("leaf", i) or ("node", t)
    right: tuple


def tree_layout(n: int) -> list[TreeNode]:
    """Internal nodes of the left-heavy binary tree over leaves 0..n-1.

    The left subtree of every node is a perfect tree holding the largest power
    of two strictly below the leaf count (for a power of two, half of it); the
    remainder goes right. Nodes come back in post-order, so children always
    precede their parent and the root is last.
    """
    if n < 2:
        raise ValueError("tree needs n >= 2")
    nodes: list[TreeNode] = []

    def build(lo: int, hi: int) -> tuple:
        m = hi - lo
        if m == 1:
            return ("leaf", lo)
        left_size = 2 ** (math.ceil(math.log2(m)) - 1)
        lt = build(lo, lo + left_size)
        rt = build(lo + left_size, hi)
        node = TreeNode(len(nodes) + 1, lt, rt)
        nodes.append(node)
        return ("node", node.index)

    build(0, n)
    return nodes


def tree_site(n: int, ref: tuple) -> int:
    """Site index of a leaf (system qubit) or internal node (ancilla after the leaves)."""
    kind, i = ref
    return i if kind == "leaf" else n + i - 1


def tree_cost_matrix() -> np.ndarray:
    diag = np.ones(8)
    for l, r, b in TREE_ZERO_COST:
        diag[4 * l + 2 * r + b] = 0.0
    return np.diag(diag).astype(complex)


def tree_diluter(n: int):
    nodes = tree_layout(n)
    h = tree_cost_matrix()
    terms = [LocalTerm((tree_site(n, nd.left), tree_site(n, nd.right), tree_site(n, ("node", nd.index))), h)
             for nd in nodes]
    H = Hamiltonian(SiteSpace((2,) * (2 * n - 1)), tuple(terms))
    notes = {
        "construction": "tree_diluter",
        "layout": [{"node": nd.index, "left": list(nd.left), "right": list(nd.right)} for nd in nodes],
        "predicted": {"delta": 0.0, "gamma_tilde": 1.0, "w_tilde": 0.0,
                      "epsilon_lower_bound": math.sqrt(1 - 1 / (1 + math.ceil(n / 2)))},
    }
    return ConstructionOutput(H, trivial_encoding((2,) * n, H.dims), None, notes)


def _parents(n: int) -> dict:
    par = {}
    for nd in tree_layout(n):
        par[nd.left] = nd.index
        par[nd.right] = nd.index
    return par


def tree_ground_states(n: int) -> list[tuple[int, ...]]:
    """Digit strings of the n+1 zero-energy states: all zero, then leaf i excited."""
    par = _parents(n)
    out = [tuple([0] * (2 * n - 1))]
    for i in range(n):
        digits = [0] * (2 * n - 1)
        digits[i] = 1
        ref = ("leaf", i)
        while ref in par:
            t = par[ref]
            digits[tree_site(n, ("node", t))] = 1
            ref = ("node", t)
        out.append(tuple(digits))
    return out


# --- star-graph weak diluter -------------------------------------------------

def star_levels(m: int, delta: float) -> tuple[float, float]:
    """(E_m^+, E_m^-) for m excitations."""
    root = math.sqrt(m * m * delta + delta * delta / 4)
    return -delta / 2 - m + root, -delta / 2 - m - root


def star_spectrum(n: int, delta: float) -> list[dict]:
    rows = []
    for m in range(n + 1):
        ep, em = star_levels(m, delta)
        theta = math.atan2(2 * m, math.sqrt(delta))
        rows.append({"m": m, "E_plus": ep, "E_minus": em, "theta": theta,
                     "multiplicity": math.comb(n, m)})
    return rows


def star_band_isolated(n: int, delta: float, gamma: float = 1.0) -> bool:
    """Whether the m <= 1 band is isolated by gamma above and below."""
    rows = star_spectrum(n, delta)
    band = [rows[0]["E_plus"], rows[1]["E_plus"]]
    lo, hi = min(band), max(band)
    others = [r["E_plus"] for r in rows[2:]] + [r["E_minus"] for r in rows]
    return hi - lo < gamma and all(e >= lo + gamma or e <= lo - gamma for e in others)


def star_weak_diluter(n: int, delta: float):
    """-Δ|0><0|_anc - N_e + sqrt(Δ) N_e ⊗ X_anc with the ancilla on site n.

    Each system site carries one 2-local term |1><1|_i ⊗ (sqrt(Δ) X - 1).
    """
    if n < 2:
        raise ValueError("star diluter needs n >= 2")
    if not star_band_isolated(n, delta):
        raise ValueError(f"Delta={delta} too small for band isolation at n={n}")
    anc = n
    coupling = np.kron(PROJ1, math.sqrt(delta) * PAULI["X"] - np.eye(2))
    terms = [LocalTerm((anc,), -delta * PROJ0)]
    terms += [LocalTerm((i, anc), coupling) for i in range(n)]
    H = Hamiltonian(SiteSpace((2,) * (n + 1)), tuple(terms))
    p_anc = np.array([[0.0], [1.0]])
    theta1 = math.atan2(2, math.sqrt(delta))
    notes = {
        "construction": "star_weak_diluter",
        "delta": delta,
        "predicted": {"epsilon_bound": math.sqrt(2 / delta), "sin_theta1": math.sin(theta1),
                      "w_tilde": abs(star_levels(1, delta)[0])},
        "weak": True,
    }
    return ConstructionOutput(H, trivial_encoding((2,) * n, H.dims), p_anc, notes)
