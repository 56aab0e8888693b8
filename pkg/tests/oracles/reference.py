"""Independent reference computations for frozen test values.

Nothing here imports the package under test: operators are built from
explicit Kronecker products, bit strings are enumerated directly, and closed
forms are evaluated with sympy.
"""
from __future__ import annotations

import itertools
import math
from functools import reduce

import numpy as np
import sympy as sp

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
N1 = np.diag([0.0, 1.0]).astype(complex)
LETTERS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def op(n, placed):
    """Product of single-site matrices {site: matrix} on n qubits, site 0 leftmost."""
    return reduce(np.kron, [placed.get(i, I2) for i in range(n)])


def word(s):
    return reduce(np.kron, [LETTERS[c] for c in s])


def low(M, k):
    return np.linalg.eigvalsh(M)[:k]


def ground_projector(M, q):
    w, v = np.linalg.eigh(M)
    return v[:, :q] @ v[:, :q].conj().T


# --- model Hamiltonians ------------------------------------------------------------

def hb_eigenvalues_n2():
    """Quarter (ZZ - XX - YY) plus the shift b_2 = 1 minus the n/8 = 1/4 offset."""
    H = 0.25 * (word("ZZ") - word("XX") - word("YY")) + 0.75 * np.eye(4)
    return sorted(np.linalg.eigvalsh(H).round(12).tolist())


def ha_energy(bits):
    k = sum(bits)
    return k * (k - 1) // 2


def ha_ground_degeneracy(n):
    return sum(1 for b in itertools.product((0, 1), repeat=n) if ha_energy(b) == 0)


def vertex_cover_levels(n, edges):
    out = {}
    for b in itertools.product((0, 1), repeat=n):
        e = 2 * sum(1 for ed in edges if all(b[v] == 0 for v in ed)) + sum(b)
        out["".join(map(str, b))] = e
    return out


# --- closed forms -----------------------------------------------------------------

def lemma1(delta):
    d = sp.nsimplify(delta)
    return sp.sqrt(2) * d / sp.sqrt(1 - d**2)


def star_levels_symbolic(m, Delta):
    """Eigenvalues of the 2x2 block [[-Δ-m, m√Δ], [m√Δ, -m]]."""
    D = sp.nsimplify(Delta)
    M = sp.Matrix([[-D - m, m * sp.sqrt(D)], [m * sp.sqrt(D), -m]])
    ev = sorted(M.eigenvals().keys(), key=lambda e: float(e))
    return [sp.nsimplify(e) for e in ev]


def tree_incoherence_lb(n):
    return sp.sqrt(1 - sp.Rational(1, 1 + sp.ceiling(sp.Rational(n, 2))))


def idle_L(D, eps):
    """Smallest integer L with sqrt(2D/(L+1)) <= eps."""
    L = sp.Symbol("L", positive=True)
    root = sp.solve(sp.Eq(sp.sqrt(2 * D / (L + 1)), sp.nsimplify(eps)), L)[0]
    return int(sp.ceiling(root))


def dicke_xx(n):
    return sp.Rational(2 * sp.binomial(n - 2, n // 2 - 1), sp.binomial(n, n // 2))


def projector_angle_distance(theta):
    P1 = np.diag([1.0, 0.0])
    v = np.array([math.cos(theta), math.sin(theta)])
    return float(np.linalg.norm(P1 - np.outer(v, v), 2))


# --- gadgets, written from the operator identities ----------------------------------

def subdivision_xxxx(Delta):
    """Δ|1><1|_a + sqrt(Δ/2)(X0X1 - X2X3)⊗X_a + 1 on 4+1 qubits."""
    n = 5
    A = op(n, {0: X, 1: X})
    B = op(n, {2: X, 3: X})
    return Delta * op(n, {4: N1}) + math.sqrt(Delta / 2) * (A - B) @ op(n, {4: X}) + np.eye(2**n)


def three_to_two_zzz(Delta, c=1.0):
    """Δ|1><1| + ½Δ^{1/3}(A-B)² + Δ^{2/3}/√2 (A-B)X_a + c C(|0><0| - Δ^{2/3}|1><1|)."""
    n = 4
    A, B, C = op(n, {0: Z}), op(n, {1: Z}), op(n, {2: Z})
    P0, P1 = op(n, {3: np.diag([1.0, 0.0])}), op(n, {3: N1})
    d13, d23 = Delta ** (1 / 3), Delta ** (2 / 3)
    return (Delta * P1 + 0.5 * d13 * (A - B) @ (A - B)
            + d23 / math.sqrt(2) * (A - B) @ op(n, {3: X}) + c * C @ (P0 - d23 * P1))


def fork_star(Delta):
    """Z0X1 + Z0X2 + Z0X3 + Z0X4 with pairs (1,2) and (3,4) forked through ancillas 5, 6.

    Each pair contributes Δ|1><1|_a + sqrt(Δ/2) S⊗X_a + X_k1 X_k2 + 3/2 with
    S = Z0 - X_k1 - X_k2; the second-order shift -S²/2 leaves Z0X_k1 + Z0X_k2.
    """
    n = 7
    H = np.zeros((2**n, 2**n), dtype=complex)
    for (k1, k2), a in (((1, 2), 5), ((3, 4), 6)):
        S = op(n, {0: Z}) - op(n, {k1: X}) - op(n, {k2: X})
        H += (Delta * op(n, {a: N1}) + math.sqrt(Delta / 2) * S @ op(n, {a: X})
              + op(n, {k1: X, k2: X}) + 1.5 * np.eye(2**n))
    return H


def fork_target():
    return sum(op(5, {0: Z, k: X}) for k in range(1, 5))


def band_errors(Ht, Hs, n_anc, q):
    """(max eigenvalue error over q+1 levels, ‖P̃ - P⊗|0><0|‖)."""
    et, es = low(Ht, q + 1), low(Hs, q + 1)
    P = ground_projector(Hs, q)
    zero = np.zeros((2**n_anc, 2**n_anc))
    zero[0, 0] = 1.0
    Pt = ground_projector(Ht, q)
    return float(np.max(np.abs(et - es))), float(np.linalg.norm(Pt - np.kron(P, zero), 2))


# --- circuits ------------------------------------------------------------------------

def _tree(n):
    """Post-order (left, right) children of the left-heavy tree, leaves as ("leaf", i)."""
    nodes = []

    def build(lo, hi):
        m = hi - lo
        if m == 1:
            return ("leaf", lo)
        half = 1
        while 2 * half < m:
            half *= 2
        left, right = build(lo, lo + half), build(lo + half, hi)
        nodes.append((left, right))
        return ("node", len(nodes))

    build(0, n)
    return nodes


def counting_degree(n):
    """Max number of gates touching one site for U_1..U_{n-1}, U_{n-2}^dag..U_1^dag."""
    def site(ref):
        return ref[1] if ref[0] == "leaf" else n + ref[1] - 1

    supports = [(site(l), site(r), n + t) for t, (l, r) in enumerate(_tree(n))]
    order = supports + supports[-2::-1]
    count = {}
    for sup in order:
        for x in sup:
            count[x] = count.get(x, 0) + 1
    return max(count.values())


def pe_z_readout():
    """One-bit phase estimation of exp(iτ(Z+1)) at τ = π/2: readout for |0> and |1>."""
    Hm = np.diag([2.0, 0.0])
    U = np.diag(np.exp(1j * np.pi / 2 * np.diag(Hm)))
    Hd = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    CU = np.block([[np.eye(2), np.zeros((2, 2))], [np.zeros((2, 2)), U]])
    # readout first, system second
    circ = np.kron(Hd, I2) @ CU @ np.kron(Hd, I2)
    out = {}
    for s in (0, 1):
        v = np.zeros(4)
        v[s] = 1.0
        w = circ @ v
        out[s] = float(np.sum(np.abs(w[2:]) ** 2))
    return out


def star_dense(n, Delta):
    """-Δ|0><0|_a + Σ_i |1><1|_i ⊗ (sqrt(Δ) X_a - 1), ancilla last."""
    P0 = np.diag([1.0, 0.0])
    H = -Delta * op(n + 1, {n: P0}).astype(complex)
    for i in range(n):
        H += op(n + 1, {i: N1}) @ (math.sqrt(Delta) * op(n + 1, {n: X}) - np.eye(2 ** (n + 1)))
    return H
