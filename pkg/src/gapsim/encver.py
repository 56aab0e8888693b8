"""Encodings and the gap-simulation verifier."""
from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .hamcore import (DENSE_CAP_DIM, Hamiltonian, LocalTerm, dumps,
                      embed, is_diagonal, metrics)
from .spectral import (PENALTY_SCHUR_MIN, QuasiGroundspace, Spectrum, diag_low_spectrum,
                       diag_spectrum, eig_dense, fix_phases, ground_data, lemma_bound, low_ground,
                       low_spectrum, penalty_hierarchy, projector_distance, residual_norm,
                       spectrum)

DEFAULT_THRESHOLDS = {"eps_max": 0.1, "delta_max": 0.1, "w_max": 0.5}
BLOCK_TOL = 1e-8
ANCILLA_SEARCH_CAP = 4096


def _prod(xs) -> int:
    return int(np.prod(list(xs), dtype=np.int64)) if len(xs) else 1


def _strides(dims):
    out = [1] * len(dims)
    for i in range(len(dims) - 2, -1, -1):
        out[i] = out[i + 1] * dims[i + 1]
    return out


@dataclass(frozen=True)
class Encoding:
    """Isometry V from system ⊗ ancilla into the simulator space.

    variant is one of trivial, tensor_local, layered_circuit, explicit.
    For trivial and layered_circuit, system_sites lists where each system site
    lands; the remaining simulator sites, in ascending order, form the ancilla.
    """
    variant: str
    system_dims: tuple[int, ...]
    ancilla_dims: tuple[int, ...]
    simulator_dims: tuple[int, ...]
    system_sites: tuple[int, ...] = ()
    blocks: tuple = ()  # tensor_local: (block sites, isometry) per system site
    layers: tuple = ()  # layered_circuit: tuple of layers of (support, unitary)
    explicit: np.ndarray | None = field(default=None, repr=False)

    @property
    def ancilla_sites(self) -> tuple[int, ...]:
        used = set(self.system_sites)
        return tuple(i for i in range(len(self.simulator_dims)) if i not in used)

    @property
    def is_unitary(self) -> bool:
        return _prod(self.simulator_dims) == _prod(self.system_dims) * _prod(self.ancilla_dims)

    @property
    def is_trivial(self) -> bool:
        return self.variant == "trivial"

    @property
    def is_identity(self) -> bool:
        return self.is_trivial and self.system_sites == tuple(range(len(self.system_dims)))

    def placement_index(self) -> np.ndarray:
        """Simulator basis index of every (system, ancilla) basis index."""
        in_dims = list(self.system_dims) + list(self.ancilla_dims)
        N_in = _prod(in_dims)
        idx = np.arange(N_in, dtype=np.int64)
        in_str = _strides(in_dims)
        out_str = _strides(list(self.simulator_dims))
        target_sites = list(self.system_sites) + list(self.ancilla_sites)
        out = np.zeros(N_in, dtype=np.int64)
        for pos, site in enumerate(target_sites):
            digit = (idx // in_str[pos]) % in_dims[pos]
            out += digit * out_str[site]
        return out

    def matrix(self) -> np.ndarray:
        N_out = _prod(self.simulator_dims)
        N_in = _prod(self.system_dims) * _prod(self.ancilla_dims)
        if self.variant == "explicit":
            return np.asarray(self.explicit, dtype=complex)
        if self.variant in ("trivial", "layered_circuit"):
            V = np.zeros((N_out, N_in), dtype=complex)
            V[self.placement_index(), np.arange(N_in)] = 1.0
            for layer in self.layers:
                for support, U in layer:
                    V = embed(U, support, self.simulator_dims) @ V
            return V
        if self.variant == "tensor_local":
            V = np.eye(1, dtype=complex)
            for _, Vi in self.blocks:
                V = np.kron(V, np.asarray(Vi, dtype=complex))
            # V maps (s1 a1)(s2 a2)... onto the blocks in listed order
            n_sys = len(self.system_dims)
            in_dims = []
            for i, d in enumerate(self.system_dims):
                in_dims += [d, self.ancilla_dims[i]]
            order = [s for b, _ in self.blocks for s in b]
            out_dims = [self.simulator_dims[s] for s in order]
            no = len(order)
            Vt = V.reshape(out_dims + in_dims)
            in_perm = [no + 2 * i for i in range(n_sys)] + [no + 2 * i + 1 for i in range(n_sys)]
            out_perm = list(np.argsort(order))
            return Vt.transpose(out_perm + in_perm).reshape(N_out, N_in)
        raise ValueError(f"unknown encoding variant {self.variant!r}")

    def check_isometry(self, tol: float = 1e-10) -> bool:
        V = self.matrix()
        return bool(np.max(np.abs(V.conj().T @ V - np.eye(V.shape[1])), initial=0.0) <= tol)


def trivial_encoding(system_dims: Sequence[int], simulator_dims: Sequence[int],
                     system_sites: Sequence[int] | None = None) -> Encoding:
    system_dims = tuple(system_dims)
    simulator_dims = tuple(simulator_dims)
    if system_sites is None:
        system_sites = tuple(range(len(system_dims)))
    system_sites = tuple(system_sites)
    for s, d in zip(system_sites, system_dims):
        if simulator_dims[s] != d:
            raise ValueError(f"system site lands on simulator site {s} of different dimension")
    used = set(system_sites)
    anc = tuple(simulator_dims[i] for i in range(len(simulator_dims)) if i not in used)
    return Encoding("trivial", system_dims, anc, simulator_dims, system_sites)


def tensor_local_encoding(system_dims, ancilla_dims, simulator_dims, blocks) -> Encoding:
    """blocks[i] = (target sites, isometry of shape (block dim, d_i * a_i))."""
    blocks = tuple((tuple(b), np.asarray(V, dtype=complex)) for b, V in blocks)
    covered = sorted(s for b, _ in blocks for s in b)
    if covered != list(range(len(simulator_dims))):
        raise ValueError("tensor_local blocks must partition the simulator sites")
    return Encoding("tensor_local", tuple(system_dims), tuple(ancilla_dims),
                    tuple(simulator_dims), blocks=blocks)


def layered_circuit_encoding(system_dims, simulator_dims, layers, system_sites=None) -> Encoding:
    base = trivial_encoding(system_dims, simulator_dims, system_sites)
    layers = tuple(tuple((tuple(s), np.asarray(U, dtype=complex)) for s, U in layer)
                   for layer in layers)
    for layer in layers:
        seen = set()
        for s, U in layer:
            if seen & set(s):
                raise ValueError("gates within a layer must be disjoint")
            seen |= set(s)
            if np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) > 1e-10:
                raise ValueError("layer gate is not unitary")
    return Encoding("layered_circuit", base.system_dims, base.ancilla_dims, base.simulator_dims,
                    base.system_sites, layers=layers)


def explicit_encoding(system_dims, ancilla_dims, simulator_dims, V) -> Encoding:
    V = np.asarray(V, dtype=complex)
    enc = Encoding("explicit", tuple(system_dims), tuple(ancilla_dims), tuple(simulator_dims),
                   explicit=V)
    if V.shape != (_prod(simulator_dims), _prod(system_dims) * _prod(ancilla_dims)):
        raise ValueError("explicit encoding has wrong shape")
    if not enc.check_isometry():
        raise ValueError("explicit encoding is not an isometry")
    return enc


def apply_encoding(V: Encoding, op) -> tuple[np.ndarray, frozenset]:
    """V (op ⊗ 1_anc) V† and the simulator support of the encoded operator.

    op is a LocalTerm on system sites or a dense system-space operator.
    """
    n_sys = len(V.system_dims)
    if isinstance(op, LocalTerm):
        for s in op.support:
            if not 0 <= s < n_sys:
                raise ValueError(f"support site {s} is outside the system register")
        dense = embed(op.matrix, op.support, V.system_dims)
        sys_support = set(op.support)
    else:
        dense = np.asarray(op, dtype=complex)
        if dense.shape[0] != _prod(V.system_dims):
            raise ValueError("operator does not act on the system register")
        sys_support = set(range(n_sys))
    full_in = np.kron(dense, np.eye(_prod(V.ancilla_dims)))
    M = V.matrix()
    out = M @ full_in @ M.conj().T
    if V.variant == "trivial":
        S = {V.system_sites[i] for i in sys_support}
    elif V.variant == "layered_circuit":
        S = {V.system_sites[i] for i in sys_support}
        for layer in reversed(V.layers):
            for support, _ in layer:
                if S & set(support):
                    S |= set(support)
    elif V.variant == "tensor_local":
        S = set()
        for i in sys_support:
            S |= set(V.blocks[i][0])
    else:
        S = set(range(len(V.simulator_dims)))
    return out, frozenset(S)


# --- verification -----------------------------------------------------------

@dataclass
class GapSimReport:
    delta: float
    epsilon: float | None
    epsilon_lb: float
    epsilon_ub: float
    gamma: float
    gamma_tilde: float
    w_tilde: float
    E_g_tilde: float
    rank_q: int
    band_start: int
    weak: bool
    condition1: bool
    classification: dict
    thresholds: dict
    passed: bool
    coherent: bool
    faithful: bool
    unitary_encoding: bool
    notes: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _sys_anc_digits(labels: np.ndarray, V: Encoding) -> tuple[np.ndarray, np.ndarray]:
    """Split simulator basis labels into (system index, ancilla index)."""
    dims = list(V.simulator_dims)
    st = _strides(dims)
    sys_idx = np.zeros(len(labels), dtype=np.int64)
    for s in V.system_sites:
        sys_idx = sys_idx * dims[s] + (labels // st[s]) % dims[s]
    anc_idx = np.zeros(len(labels), dtype=np.int64)
    for s in V.ancilla_sites:
        anc_idx = anc_idx * dims[s] + (labels // st[s]) % dims[s]
    return sys_idx, anc_idx


def _diag_ok(P: QuasiGroundspace, Pt: QuasiGroundspace, V: Encoding) -> bool:
    return P.labels is not None and Pt.labels is not None and V.variant == "trivial"


def _encoded_system_basis(P_basis: np.ndarray, V: Encoding, anc_basis: np.ndarray | None):
    A = np.eye(_prod(V.ancilla_dims), dtype=complex) if anc_basis is None else anc_basis
    W = np.kron(P_basis, A)
    if V.is_identity:
        return W
    if V.variant == "trivial":
        out = np.zeros((_prod(V.simulator_dims), W.shape[1]), dtype=complex)
        out[V.placement_index()] = W
        return out
    return V.matrix() @ W


def unfaithfulness(P: QuasiGroundspace, Ptilde: QuasiGroundspace, V: Encoding) -> float:
    """delta = ||P̃ - V(P ⊗ 1)V† P̃||."""
    if _diag_ok(P, Ptilde, V):
        sys_idx, _ = _sys_anc_digits(Ptilde.labels, V)
        return 0.0 if np.isin(sys_idx, P.labels).all() else 1.0
    N = _prod(V.simulator_dims)
    Pb = P.dense_basis(_prod(V.system_dims))
    if Pb.shape[0] != _prod(V.system_dims):
        raise ValueError("target groundspace does not match the encoding's system register")
    Bt = Ptilde.dense_basis(N)
    if Bt.shape[0] != N:
        raise ValueError("simulator groundspace does not match the encoding's simulator space")
    W = _encoded_system_basis(Pb, V, None)
    return residual_norm(W, Bt)


def incoherence(P: QuasiGroundspace, Ptilde: QuasiGroundspace, V: Encoding,
                P_anc: np.ndarray) -> float:
    """epsilon = ||P̃ - V(P ⊗ P_anc)V†|| for an ancilla projector given by its basis."""
    P_anc = np.asarray(P_anc, dtype=complex)
    if P_anc.ndim == 1:
        P_anc = P_anc[:, None]
    if P_anc.shape[0] != _prod(V.ancilla_dims):
        raise ValueError("ancilla projector has the wrong dimension")
    N = _prod(V.simulator_dims)
    if _diag_ok(P, Ptilde, V) and _is_basis_set(P_anc):
        anc_labels = np.nonzero(np.abs(P_anc).sum(axis=1) > 0.5)[0]
        sys_idx, anc_idx = _sys_anc_digits(Ptilde.labels, V)
        mine = set(zip(sys_idx.tolist(), anc_idx.tolist()))
        theirs = {(int(s), int(a)) for s in P.labels for a in anc_labels}
        return 0.0 if mine == theirs else 1.0
    W = _encoded_system_basis(P.dense_basis(_prod(V.system_dims)), V, P_anc)
    return projector_distance(Ptilde.dense_basis(N), W)


def _is_basis_set(B: np.ndarray) -> bool:
    mags = np.abs(B)
    return bool(np.all((mags < 1e-12) | (np.abs(mags - 1) < 1e-12))
                and np.all((mags > 0.5).sum(axis=0) == 1))


def _pull_back(Ptilde: QuasiGroundspace, V: Encoding) -> np.ndarray:
    """Basis of V† P̃ V's range (exact when V is unitary)."""
    N = _prod(V.simulator_dims)
    Bt = Ptilde.dense_basis(N)
    if V.is_identity:
        return Bt
    if V.variant == "trivial":
        return Bt[V.placement_index()]
    return V.matrix().conj().T @ Bt


def block_lower_bound(P: QuasiGroundspace, Ptilde: QuasiGroundspace, V: Encoding,
                      seed: int = 0) -> tuple[float, int]:
    """Incoherence lower bound from a detected P̃ = sum_nu P_nu ⊗ |a_nu><a_nu| structure.

    Returns (bound, number of blocks inside P); (0, 0) when no structure is found.
    Needs a unitary encoding so that P̃ pulls back exactly.
    """
    if not V.is_unitary:
        return 0.0, 0
    d_s, d_a = _prod(V.system_dims), _prod(V.ancilla_dims)
    if _diag_ok(P, Ptilde, V):
        sys_idx, anc_idx = _sys_anc_digits(Ptilde.labels, V)
        groups: dict[int, set] = {}
        for s, a in zip(sys_idx.tolist(), anc_idx.tolist()):
            groups.setdefault(a, set()).add(s)
        inP = set(P.labels.tolist())
        if any(not (g & inP) for g in groups.values()):
            return 1.0, 0
        # blocks are orthogonal iff their label sets are disjoint
        members = [g for g in groups.values() if g <= inP]
        flat = [s for g in members for s in g]
        if len(flat) != len(set(flat)):
            return 0.0, 0
        B = len(members)
        return (math.sqrt(1 - 1 / B) if B else 0.0), B
    if d_s * d_a > DENSE_CAP_DIM or d_a > ANCILLA_SEARCH_CAP:
        return 0.0, 0
    Q = _pull_back(Ptilde, V)  # d_s*d_a x q
    Qt = Q.reshape(d_s, d_a, -1)
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((d_s, d_s)) + 1j * rng.standard_normal((d_s, d_s))
    Wpos = G @ G.conj().T + np.eye(d_s)
    # rho = Tr_sys[(W ⊗ 1) Q Q†]
    rho = np.einsum("sak,st,tbk->ab", Qt.conj(), Wpos, Qt).conj()
    rho = (rho + rho.conj().T) / 2
    vals, vecs = np.linalg.eigh(rho)
    keep = vals > BLOCK_TOL * max(1.0, vals.max(initial=0.0))
    avecs = vecs[:, keep]
    Qproj = (Q @ Q.conj().T)
    Qproj4 = Qproj.reshape(d_s, d_a, d_s, d_a)
    recon = np.zeros(Qproj4.shape, dtype=complex)
    blocks = []
    for a in avecs.T:
        Pnu = np.einsum("a,satb,b->st", a.conj(), Qproj4, a)
        if np.max(np.abs(Pnu @ Pnu - Pnu)) > 1e-6:
            return 0.0, 0
        blocks.append(Pnu)
        recon += np.einsum("st,a,b->satb", Pnu, a, a.conj())
    if np.max(np.abs(recon - Qproj4), initial=0.0) > 1e-6:
        return 0.0, 0
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            if np.max(np.abs(blocks[i] @ blocks[j])) > 1e-6:
                return 0.0, 0
    Pb = P.dense_basis(d_s)
    PP = Pb @ Pb.conj().T
    inside = 0
    for Pnu in blocks:
        if np.trace(Pnu).real < 0.5:
            continue
        if np.max(np.abs(PP @ Pnu)) <= 1e-6:
            return 1.0, 0
        if np.max(np.abs(Pnu - PP @ Pnu)) <= 1e-6:
            inside += 1
    return (math.sqrt(1 - 1 / inside) if inside else 0.0), inside


def best_product_ancilla(P: QuasiGroundspace, Ptilde: QuasiGroundspace, V: Encoding):
    """Candidate rank-one P_anc from the compressed ancilla operator.

    Compresses V† P̃ V against P's basis on the system factor and returns its
    top eigenvector. Rank one is forced because P̃ and P ⊗ P_anc must have equal
    rank for the distance to drop below one.
    """
    d_s, d_a = _prod(V.system_dims), _prod(V.ancilla_dims)
    if _diag_ok(P, Ptilde, V):
        sys_idx, anc_idx = _sys_anc_digits(Ptilde.labels, V)
        inP = np.isin(sys_idx, P.labels)
        if not inP.any():
            return None
        vals, counts = np.unique(anc_idx[inP], return_counts=True)
        a = int(vals[np.argmax(counts)])
        vec = np.zeros((d_a, 1))
        vec[a, 0] = 1.0
        return vec
    if d_a > ANCILLA_SEARCH_CAP or d_s * d_a > DENSE_CAP_DIM * 4:
        return None
    Q = _pull_back(Ptilde, V).reshape(d_s, d_a, -1)
    Pb = P.dense_basis(d_s)
    C = np.einsum("si,sak->iak", Pb.conj(), Q)
    R = np.einsum("iak,ibk->ab", C, C.conj())
    vals, vecs = np.linalg.eigh((R + R.conj().T) / 2)
    return fix_phases(vecs[:, [-1]])


def incoherence_interval(P: QuasiGroundspace, Ptilde: QuasiGroundspace, V: Encoding,
                         delta: float | None = None) -> dict:
    if delta is None:
        delta = unfaithfulness(P, Ptilde, V)
    lb = delta if V.is_unitary else delta / 2
    block_lb, nblocks = block_lower_bound(P, Ptilde, V)
    lb = max(lb, block_lb)
    witness = best_product_ancilla(P, Ptilde, V)
    ub = 1.0 if witness is None else incoherence(P, Ptilde, V, witness)
    return {"lb": float(min(lb, 1.0)), "ub": float(ub), "witness": witness, "blocks": nblocks}


def _hash(H) -> str:
    if isinstance(H, Hamiltonian):
        data = dumps(H).encode()
    else:
        data = np.ascontiguousarray(H).tobytes()
    return hashlib.sha256(data).hexdigest()


def _target_quasi(H, target, q, cut_w):
    if isinstance(target, QuasiGroundspace):
        return target
    if _strong_penalties(H) and (q is not None or cut_w == 0):
        return low_ground(H, q)[1]
    if isinstance(H, Hamiltonian):
        # diagonal targets keep basis labels so diagonal simulators never go dense
        s = diag_spectrum(H) if is_diagonal(H) else spectrum(H)
    else:
        s = _dense_spec(H)
    if q is not None:
        return ground_data(s, q=q)
    return ground_data(s, w_max=cut_w)


def _strong_penalties(H) -> bool:
    return isinstance(H, Hamiltonian) and bool(penalty_hierarchy(H, PENALTY_SCHUR_MIN))


def _dense_spec(M):
    return eig_dense(M)


def _band_metrics(vals: np.ndarray, b: int, q: int, gamma: float):
    Eg = float(vals[b])
    spread = float(vals[b + q - 1] - Eg)
    above = float(vals[b + q] - Eg) if b + q < len(vals) else math.inf
    below = float(Eg - vals[b - 1]) if b > 0 else math.inf
    return Eg, spread, min(above, below)


def find_weak_band(vals: np.ndarray, q: int, gamma: float, tol: float) -> int | None:
    """Lowest start index of a q-eigenvalue band isolated by gamma on both sides."""
    for b in range(0, len(vals) - q + 1):
        Eg, spread, iso = _band_metrics(vals, b, q, gamma)
        if iso >= gamma - tol and spread / gamma < 1:
            return b
    return None


def verify_gap_sim(H, Htilde, V: Encoding, target=None, q: int | None = None,
                   cut_w: float = 0.0, thresholds: dict | None = None,
                   P_anc: np.ndarray | None = None, weak: bool = False,
                   band: int | None = None, require_coherence: bool = False,
                   spec_tilde: Spectrum | None = None, interval: bool = True) -> GapSimReport:
    """Check whether Htilde gap-simulates (H, P) under encoding V.

    P is taken from `target` (a QuasiGroundspace) or computed from H with rank
    q or spread threshold cut_w. P̃ is the lowest rank(P) eigenstates of
    Htilde; with weak=True it is the band starting at `band`, or the lowest
    band isolated by gamma from both sides.
    """
    th = dict(DEFAULT_THRESHOLDS)
    th.update(thresholds or {})
    P = _target_quasi(H, target, q, cut_w)
    gamma = P.gamma
    Q = P.rank_q
    if spec_tilde is not None:
        st = spec_tilde
    elif _strong_penalties(Htilde) and not weak:
        st = low_spectrum(Htilde, min(Q + 1, Htilde.space.total_dim))
    elif isinstance(Htilde, Hamiltonian) and not weak and Htilde.space.total_dim > 64 \
            and is_diagonal(Htilde):
        st = diag_low_spectrum(Htilde, Q)
    else:
        st = spectrum(Htilde) if isinstance(Htilde, Hamiltonian) else _dense_spec(Htilde)
    vals = st.eigenvalues
    if Q > len(vals):
        raise ValueError("simulator space too small for the target groundspace")
    tol = 1e-9 * st.scale()
    notes = []
    if weak:
        b = band if band is not None else find_weak_band(vals, Q, gamma, tol)
        if b is None:
            notes.append("no isolated band of the required rank")
            b = 0
    else:
        b = 0
    if b + Q > len(vals):
        raise ValueError("band exceeds the simulator spectrum")
    Eg, spread, iso = _band_metrics(vals, b, Q, gamma)
    if spread <= 1e-8 * st.scale():
        spread = 0.0
    w_t = spread / gamma
    cond1 = bool(w_t < 1 and iso >= gamma - tol)
    idx = np.arange(b, b + Q)
    if st.is_diagonal:
        Pt = QuasiGroundspace(None, Eg, iso, w_t, Q, st.labels[idx])
    else:
        Pt = QuasiGroundspace(st.eigenvectors[:, idx], Eg, iso, w_t, Q)
    delta = unfaithfulness(P, Pt, V)
    eps_exact = incoherence(P, Pt, V, P_anc) if P_anc is not None else None
    if interval:
        iv = incoherence_interval(P, Pt, V, delta)
        lb, ub = iv["lb"], iv["ub"]
        if iv["blocks"]:
            notes.append(f"block structure with {iv['blocks']} blocks inside P")
    else:
        lb, ub = (delta if V.is_unitary else delta / 2), 1.0
    if eps_exact is not None:
        ub = min(ub, eps_exact)
        if eps_exact + 1e-9 < lb:
            notes.append("exact epsilon below certified lower bound")
    eps_val = eps_exact if eps_exact is not None else ub
    mh = metrics(H) if isinstance(H, Hamiltonian) else None
    mt = metrics(Htilde) if isinstance(Htilde, Hamiltonian) else None
    classification = {}
    if mh and mt:
        classification = {
            "r": mt.degree_r, "M": mt.term_count_M, "J": mt.strength_J, "k": mt.locality_k,
            "r0": mh.degree_r, "M0": mh.term_count_M, "J0": mh.strength_J, "k0": mh.locality_k,
            "M_ratio": mt.term_count_M / mh.term_count_M if mh.term_count_M else None,
            "is_degree_reducer": mt.degree_r < mh.degree_r,
            "is_diluter": mt.term_count_M < mh.term_count_M,
            "note": "dilution judged at this size only",
        }
    faithful = bool(delta <= th["delta_max"])
    coherent = bool(eps_val <= th["eps_max"])
    passed = cond1 and faithful and w_t <= th["w_max"]
    if require_coherence:
        passed = passed and coherent
    if not cond1:
        notes.append("condition 1 failed: band not a quasi-groundspace with gap >= gamma")
    prov = {
        "target_sha256": _hash(H),
        "simulator_sha256": _hash(Htilde),
        "thresholds": th,
        "version": __version__,
    }
    return GapSimReport(
        delta=float(delta), epsilon=None if eps_exact is None else float(eps_exact),
        epsilon_lb=float(lb), epsilon_ub=float(ub), gamma=float(gamma), gamma_tilde=float(iso),
        w_tilde=float(w_t), E_g_tilde=Eg, rank_q=Q, band_start=int(b), weak=weak,
        condition1=cond1, classification=classification, thresholds=th, passed=bool(passed),
        coherent=coherent, faithful=faithful, unitary_encoding=V.is_unitary, notes=notes,
        provenance=prov)


def verify_weak_gap_sim(H, Htilde, V: Encoding, **kw) -> GapSimReport:
    kw["weak"] = True
    return verify_gap_sim(H, Htilde, V, **kw)


def compose_bounds(r1: GapSimReport, r2: GapSimReport) -> dict:
    """Bounds for the composed simulation H -> H̃1 -> H̃2."""
    if r2.rank_q != r1.rank_q:
        raise ValueError("chain mismatch: stages simulate groundspaces of different rank")
    e1 = r1.epsilon if r1.epsilon is not None else r1.epsilon_ub
    e2 = r2.epsilon if r2.epsilon is not None else r2.epsilon_ub
    return {
        "epsilon_bound": e1 + e2,
        "delta_bound": 2 * r2.delta + r1.delta,
        "w_tilde": r2.w_tilde,
        "encoding": "V2 (V1 ⊗ 1)",
    }


def compose_chain(reports: Sequence[GapSimReport]) -> dict:
    acc = None
    for r in reports:
        if acc is None:
            e = r.epsilon if r.epsilon is not None else r.epsilon_ub
            acc = {"epsilon_bound": e, "delta_bound": r.delta, "w_tilde": r.w_tilde}
        else:
            e = r.epsilon if r.epsilon is not None else r.epsilon_ub
            acc = {"epsilon_bound": acc["epsilon_bound"] + e,
                   "delta_bound": 2 * r.delta + acc["delta_bound"], "w_tilde": r.w_tilde}
    return acc


def coherence_from_faithfulness(delta: float) -> float:
    if delta >= 1:
        raise ValueError("delta must be < 1")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    return lemma_bound(delta)
