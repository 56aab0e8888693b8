"""Local Hamiltonians on mixed-dimension qudit registers.

A Hamiltonian is a list of dense local terms, each acting on an ordered
support of sites. Terms are never merged; the resource metrics (k, r, M, J)
count them as given.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

HERMITIAN_TOL = 1e-12
DENSE_CAP_DIM = 4096
ENUM_CAP = 2**24

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
PROJ0 = np.array([[1, 0], [0, 0]], dtype=complex)
PROJ1 = np.array([[0, 0], [0, 1]], dtype=complex)


class CapExceeded(RuntimeError):
    """Raised when an operation would exceed a configured size cap."""


@dataclass(frozen=True)
class SiteSpace:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if any(d < 2 for d in dims):
            raise ValueError(f"every site dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.dims else 1

    def is_qubit(self) -> bool:
        return all(d == 2 for d in self.dims)


@dataclass(frozen=True)
class LocalTerm:
    support: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        support = tuple(int(s) for s in self.support)
        if len(set(support)) != len(support):
            raise ValueError(f"support has repeated sites: {support}")
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("term matrix must be square")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("term matrix is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "matrix", m)

    @property
    def locality(self) -> int:
        return len(self.support)

    def norm(self) -> float:
        if self.matrix.size == 0:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvalsh(self.matrix))))

    def scaled(self, c: float) -> "LocalTerm":
        return LocalTerm(self.support, c * self.matrix)


@dataclass(frozen=True)
class Hamiltonian:
    space: SiteSpace
    terms: tuple[LocalTerm, ...] = ()

    def __post_init__(self):
        terms = tuple(self.terms)
        for t in terms:
            for s in t.support:
                if not 0 <= s < self.space.n:
                    raise ValueError(f"support site {s} outside space of {self.space.n} sites")
            expect = int(np.prod([self.space.dims[s] for s in t.support], dtype=np.int64))
            if t.matrix.shape[0] != expect:
                raise ValueError(
                    f"term on {t.support} has dimension {t.matrix.shape[0]}, expected {expect}"
                )
        object.__setattr__(self, "terms", terms)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def dims(self) -> tuple[int, ...]:
        return self.space.dims

    def __add__(self, other: "Hamiltonian") -> "Hamiltonian":
        if other.space != self.space:
            raise ValueError("cannot add Hamiltonians on different spaces")
        return Hamiltonian(self.space, self.terms + other.terms)

    def scaled(self, c: float) -> "Hamiltonian":
        return Hamiltonian(self.space, tuple(t.scaled(c) for t in self.terms))

    def extended(self, extra_dims: Sequence[int]) -> "Hamiltonian":
        """Same terms on a space with extra sites appended."""
        return Hamiltonian(SiteSpace(self.dims + tuple(extra_dims)), self.terms)

    def with_terms(self, terms: Iterable[LocalTerm]) -> "Hamiltonian":
        return Hamiltonian(self.space, tuple(terms))


@dataclass(frozen=True)
class HamMetrics:
    locality_k: int
    degree_r: int
    term_count_M: int
    strength_J: float

    def as_list(self) -> list:
        return [self.degree_r, self.term_count_M, self.strength_J]


def pauli_string_matrix(s: str) -> np.ndarray:
    return reduce(np.kron, [PAULI[c] for c in s], np.eye(1, dtype=complex))


def build_from_pauli(n: int, pauli_terms: Sequence[tuple[float, str]], dims=None) -> Hamiltonian:
    """Qubit Hamiltonian from (coefficient, Pauli string) pairs.

    Each term keeps only its non-identity factors as support; an all-identity
    string becomes a constant term with empty support.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if dims is not None and any(d != 2 for d in dims):
        raise ValueError("Pauli strings require a qubit site space")
    terms = []
    for coef, s in pauli_terms:
        if not s:
            raise ValueError("empty Pauli string")
        if len(s) != n:
            raise ValueError(f"Pauli string {s!r} has length {len(s)}, expected {n}")
        if any(c not in PAULI for c in s):
            raise ValueError(f"bad Pauli letter in {s!r}")
        support = tuple(i for i, c in enumerate(s) if c != "I")
        local = "".join(s[i] for i in support)
        terms.append(LocalTerm(support, float(coef) * pauli_string_matrix(local)))
    return Hamiltonian(SiteSpace((2,) * n), tuple(terms))


def pauli_term(coef: float, ops: Sequence[tuple[int, str]]) -> LocalTerm:
    """Term coef * prod_j P_j on the listed (site, letter) pairs."""
    ops = sorted(ops)
    return LocalTerm(tuple(s for s, _ in ops), coef * pauli_string_matrix("".join(c for _, c in ops)))


def constant_term(c: float) -> LocalTerm:
    return LocalTerm((), np.array([[c]], dtype=complex))


def _embed_tensor(matrix: np.ndarray, support: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Dense embedding of a local matrix into the full space."""
    n = len(dims)
    total = int(np.prod(dims, dtype=np.int64)) if n else 1
    if not support:
        return matrix[0, 0] * np.eye(total, dtype=complex)
    rest = [i for i in range(n) if i not in support]
    drest = int(np.prod([dims[i] for i in rest], dtype=np.int64)) if rest else 1
    full = np.kron(matrix, np.eye(drest, dtype=complex))
    order = list(support) + rest
    shape = [dims[i] for i in order]
    full = full.reshape(shape + shape)
    inv = np.argsort(order)
    full = full.transpose(list(inv) + [n + i for i in inv])
    return full.reshape(total, total)


def embed(matrix: np.ndarray, support: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    return _embed_tensor(np.asarray(matrix, dtype=complex), tuple(support), tuple(dims))


def assemble_dense(H: Hamiltonian, cap_dim: int = DENSE_CAP_DIM) -> np.ndarray:
    N = H.space.total_dim
    if N > cap_dim:
        raise CapExceeded(f"dense dimension {N} exceeds cap {cap_dim}")
    out = np.zeros((N, N), dtype=complex)
    n = H.n
    shape = list(H.dims)
    view = out.reshape(shape + shape)
    for t in H.terms:
        if not t.support:
            out += t.matrix[0, 0] * np.eye(N)
            continue
        # add term ⊗ identity directly into the tensor view
        k = len(t.support)
        rest = [i for i in range(n) if i not in t.support]
        local = t.matrix.reshape([H.dims[s] for s in t.support] * 2)
        idx_in = list(t.support)
        # move supported axes to the front, add, move back
        perm = idx_in + rest + [n + i for i in idx_in] + [n + i for i in rest]
        v = view.transpose(perm)
        drest = [H.dims[i] for i in rest]
        eye_rest = np.eye(int(np.prod(drest, dtype=np.int64)) if rest else 1).reshape(drest * 2)
        contrib = np.multiply.outer(local, eye_rest)
        # contrib axes: (s_out.., s_in.., r_out.., r_in..) -> (s_out, r_out, s_in, r_in)
        a = list(range(k)) + list(range(2 * k, 2 * k + len(rest))) + list(
            range(k, 2 * k)) + list(range(2 * k + len(rest), 2 * k + 2 * len(rest)))
        v += contrib.transpose(a)
    return out


def assemble_sparse(H: Hamiltonian, cap_dim: int = 2**20) -> sp.csr_matrix:
    """Sparse assembly for matrix-free checks on spaces too large for dense."""
    N = H.space.total_dim
    if N > cap_dim:
        raise CapExceeded(f"sparse dimension {N} exceeds cap {cap_dim}")
    dims = np.array(H.dims, dtype=np.int64)
    strides = np.ones(len(dims), dtype=np.int64)
    for i in range(len(dims) - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    idx = np.arange(N, dtype=np.int64)
    out = sp.csr_matrix((N, N), dtype=complex)
    for t in H.terms:
        if not t.support:
            out = out + t.matrix[0, 0] * sp.identity(N, dtype=complex, format="csr")
            continue
        sup = list(t.support)
        digits = [(idx // strides[s]) % dims[s] for s in sup]
        loc = np.zeros(N, dtype=np.int64)
        for s, d in zip(sup, digits):
            loc = loc * dims[s] + d
        base = idx.copy()
        for s, d in zip(sup, digits):
            base -= d * strides[s]
        dl = t.matrix.shape[0]
        rows, cols, vals = [], [], []
        for a in range(dl):
            # column states with local index a map to local index b
            sel = np.nonzero(loc == a)[0]
            for b in range(dl):
                v = t.matrix[b, a]
                if v == 0:
                    continue
                # digits of b
                rem, target = b, base[sel].copy()
                for s in reversed(sup):
                    target += (rem % dims[s]) * strides[s]
                    rem //= dims[s]
                rows.append(target)
                cols.append(sel)
                vals.append(np.full(sel.size, v))
        if rows:
            out = out + sp.csr_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    return out.tocsr()


def metrics(H: Hamiltonian) -> HamMetrics:
    k = max((t.locality for t in H.terms), default=0)
    deg = [0] * H.n
    for t in H.terms:
        for s in t.support:
            deg[s] += 1
    r = max(deg, default=0)
    J = max((t.norm() for t in H.terms), default=0.0)
    return HamMetrics(k, r, len(H.terms), J)


def site_degrees(H: Hamiltonian) -> list[int]:
    deg = [0] * H.n
    for t in H.terms:
        for s in t.support:
            deg[s] += 1
    return deg


@dataclass(frozen=True)
class InteractionGraph:
    n: int
    hyperedges: tuple[tuple[int, ...], ...]
    adjacency: tuple[frozenset, ...]


def interaction_graph(H: Hamiltonian) -> InteractionGraph:
    adj = [set() for _ in range(H.n)]
    for t in H.terms:
        for a in t.support:
            for b in t.support:
                if a != b:
                    adj[a].add(b)
    return InteractionGraph(H.n, tuple(t.support for t in H.terms),
                            tuple(frozenset(a) for a in adj))


def graph_distance(G: InteractionGraph, x: int, y: int) -> float:
    return set_distance(G, [x], [y])


def set_distance(G: InteractionGraph, xs: Iterable[int], ys: Iterable[int]) -> float:
    """Breadth-first distance between two site sets; inf if disconnected."""
    xs, ys = set(xs), set(ys)
    if xs & ys:
        return 0
    seen = set(xs)
    queue = deque((x, 0) for x in xs)
    while queue:
        v, d = queue.popleft()
        for u in G.adjacency[v]:
            if u in ys:
                return d + 1
            if u not in seen:
                seen.add(u)
                queue.append((u, d + 1))
    return float("inf")


def is_diagonal(H: Hamiltonian) -> bool:
    for t in H.terms:
        m = t.matrix
        if np.max(np.abs(m - np.diag(np.diag(m))), initial=0.0) > HERMITIAN_TOL:
            return False
    return True


def diagonal_energy(H: Hamiltonian, basis_state: Sequence[int] | str) -> float:
    if not is_diagonal(H):
        raise ValueError("diagonal_energy requires a diagonal Hamiltonian")
    digits = [int(c) for c in basis_state]
    if len(digits) != H.n:
        raise ValueError(f"basis state has {len(digits)} digits, expected {H.n}")
    e = 0.0
    for t in H.terms:
        loc = 0
        for s in t.support:
            if not 0 <= digits[s] < H.dims[s]:
                raise ValueError(f"digit {digits[s]} out of range at site {s}")
            loc = loc * H.dims[s] + digits[s]
        e += t.matrix[loc, loc].real
    return float(e)


def diagonal_energies(H: Hamiltonian, cap: int = ENUM_CAP) -> np.ndarray:
    """Energies of all computational basis states, in row-major order."""
    if not is_diagonal(H):
        raise ValueError("diagonal_energies requires a diagonal Hamiltonian")
    N = H.space.total_dim
    if N > cap:
        raise CapExceeded(f"enumeration of {N} states exceeds cap {cap}")
    dims = np.array(H.dims, dtype=np.int64)
    strides = np.ones(len(dims), dtype=np.int64)
    for i in range(len(dims) - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    idx = np.arange(N, dtype=np.int64)
    out = np.zeros(N)
    for t in H.terms:
        diag = np.diag(t.matrix).real
        loc = np.zeros(N, dtype=np.int64)
        for s in t.support:
            loc = loc * dims[s] + (idx // strides[s]) % dims[s]
        out += diag[loc]
    return out


def _site_order(H: Hamiltonian) -> list[int]:
    """Greedy site order that completes terms as early as possible."""
    remaining = set(range(H.n))
    placed: set[int] = set()
    order = []
    while remaining:
        def score(s):
            done = sum(1 for t in H.terms if s in t.support and set(t.support) - {s} <= placed)
            return (done, -s)
        s = max(remaining, key=score)
        order.append(s)
        placed.add(s)
        remaining.discard(s)
    return order


def diagonal_states_below(H: Hamiltonian, threshold: float,
                          cap: int = ENUM_CAP) -> tuple[np.ndarray, np.ndarray]:
    """(energies, basis indices) of every basis state with energy <= threshold.

    Partial assignments are extended one site at a time and dropped as soon as
    the energy of their completed terms plus the minimum of every open term
    exceeds the threshold, so only the low window is ever materialized.
    """
    if not is_diagonal(H):
        raise ValueError("diagonal_states_below requires a diagonal Hamiltonian")
    order = _site_order(H)
    pos = {s: i for i, s in enumerate(order)}
    diags = [np.diag(t.matrix).real for t in H.terms]
    done_at: list[list[int]] = [[] for _ in order]
    for j, t in enumerate(H.terms):
        step = max((pos[s] for s in t.support), default=0)
        done_at[step].append(j)
    open_min = sum(float(d.min()) for d in diags if d.size)
    dims = [H.dims[s] for s in order]
    digits = np.zeros((1, 0), dtype=np.int64)
    energy = np.zeros(1)
    for step, d in enumerate(dims):
        digits = np.concatenate([np.repeat(digits, d, axis=0),
                                 np.tile(np.arange(d, dtype=np.int64), len(energy))[:, None]], axis=1)
        energy = np.repeat(energy, d)
        for j in done_at[step]:
            t = H.terms[j]
            loc = np.zeros(len(energy), dtype=np.int64)
            for s in t.support:
                loc = loc * H.dims[s] + digits[:, pos[s]]
            energy = energy + diags[j][loc]
            open_min -= float(diags[j].min()) if diags[j].size else 0.0
        keep = energy + open_min <= threshold + 1e-12 * max(1.0, abs(threshold))
        digits, energy = digits[keep], energy[keep]
        if len(energy) > cap:
            raise CapExceeded(f"more than {cap} states below {threshold}")
    strides = np.ones(H.n, dtype=np.int64)
    for i in range(H.n - 2, -1, -1):
        strides[i] = strides[i + 1] * H.dims[i + 1]
    index = np.zeros(len(energy), dtype=np.int64)
    for s in range(H.n):
        index += digits[:, pos[s]] * strides[s]
    return energy, index


def index_to_digits(index: int, dims: Sequence[int]) -> tuple[int, ...]:
    out = []
    for d in reversed(dims):
        out.append(index % d)
        index //= d
    return tuple(reversed(out))


def digits_to_index(digits: Sequence[int], dims: Sequence[int]) -> int:
    idx = 0
    for x, d in zip(digits, dims):
        idx = idx * d + int(x)
    return idx


def pauli_product_of(term: LocalTerm, tol: float = 1e-10) -> tuple[float, str] | None:
    """Return (c, letters) if a qubit term equals c times one Pauli product."""
    k = term.locality
    if term.matrix.shape[0] != 2**k:
        return None
    if k == 0:
        return float(term.matrix[0, 0].real), ""
    found = None
    for letters in _pauli_words(k):
        P = pauli_string_matrix(letters)
        c = np.trace(P @ term.matrix).real / 2**k
        if abs(c) > tol:
            if found is not None:
                return None
            found = (float(c), letters)
    if found is None:
        return None
    c, letters = found
    if "I" in letters or np.max(np.abs(term.matrix - c * pauli_string_matrix(letters))) > tol:
        return None
    return found


def _pauli_words(k: int):
    if k == 0:
        yield ""
        return
    for w in _pauli_words(k - 1):
        for c in "IXYZ":
            yield w + c


def pauli_decompose(H: Hamiltonian, tol: float = 1e-12) -> dict[tuple[tuple[int, str], ...], float]:
    """Pauli-basis expansion of a qubit Hamiltonian, merged over terms.

    Keys are sorted tuples of (site, letter) with identities dropped; the
    empty key holds the constant.
    """
    if not H.space.is_qubit():
        raise ValueError("Pauli decomposition requires qubits")
    out: dict[tuple[tuple[int, str], ...], float] = {}
    for t in H.terms:
        k = t.locality
        for letters in _pauli_words(k):
            c = np.trace(pauli_string_matrix(letters) @ t.matrix).real / 2**k
            if abs(c) <= tol:
                continue
            key = tuple(sorted((s, L) for s, L in zip(t.support, letters) if L != "I"))
            out[key] = out.get(key, 0.0) + float(c)
    return {k: v for k, v in out.items() if abs(v) > tol}


def from_pauli_dict(n: int, d: dict) -> Hamiltonian:
    terms = []
    const = 0.0
    for key in sorted(d):
        if not key:
            const += d[key]
        else:
            terms.append(pauli_term(d[key], key))
    if const:
        terms.append(constant_term(const))
    return Hamiltonian(SiteSpace((2,) * n), tuple(terms))


# --- serialization -----------------------------------------------------------

def matrix_to_json(m: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(m).reshape(-1)]


def matrix_from_json(flat: list, dim: int) -> np.ndarray:
    arr = np.array([complex(re, im) for re, im in flat], dtype=complex)
    if arr.size != dim * dim:
        raise ValueError(f"matrix has {arr.size} entries, expected {dim * dim}")
    return arr.reshape(dim, dim)


def to_json(H: Hamiltonian) -> dict:
    return {
        "dims": list(H.dims),
        "terms": [{"support": list(t.support), "matrix": matrix_to_json(t.matrix)} for t in H.terms],
    }


def from_json(data: dict) -> Hamiltonian:
    try:
        space = SiteSpace(tuple(data["dims"]))
        terms = []
        for t in data["terms"]:
            support = tuple(t["support"])
            for s in support:
                if not 0 <= s < space.n:
                    raise ValueError(f"support site {s} outside space")
            dim = int(np.prod([space.dims[s] for s in support], dtype=np.int64))
            terms.append(LocalTerm(support, matrix_from_json(t["matrix"], dim)))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed Hamiltonian JSON: {exc}") from exc
    return Hamiltonian(space, tuple(terms))


def dumps(H: Hamiltonian) -> str:
    return json.dumps(to_json(H), sort_keys=True)


def loads(text: str) -> Hamiltonian:
    return from_json(json.loads(text))
