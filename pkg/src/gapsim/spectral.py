"""Exact spectral engine: eigendecomposition, quasi-groundspaces, projector lemmas."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .hamcore import (DENSE_CAP_DIM, ENUM_CAP, CapExceeded, Hamiltonian, assemble_dense,
                      diagonal_energies, diagonal_states_below, is_diagonal)

ORTHO_TOL = 1e-8
SVD_NORM_MAX_DIM = 2048


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    labels: np.ndarray | None = None  # basis-state indices for diagonal spectra
    dims: tuple[int, ...] | None = None

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def is_diagonal(self) -> bool:
        return self.labels is not None

    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.eigenvalues), initial=0.0)))

    def vectors(self, idx) -> np.ndarray:
        """Dense eigenvector columns for the given indices."""
        if self.eigenvectors is not None:
            return self.eigenvectors[:, idx]
        cols = np.zeros((self.dim, len(np.atleast_1d(idx))), dtype=complex)
        for c, i in enumerate(np.atleast_1d(idx)):
            cols[self.labels[i], c] = 1.0
        return cols


@dataclass(frozen=True)
class QuasiGroundspace:
    basis: np.ndarray | None
    E_g: float
    gamma: float
    w: float
    rank_q: int
    labels: np.ndarray | None = None

    def dense_basis(self, dim: int | None = None) -> np.ndarray:
        if self.basis is not None:
            return self.basis
        out = np.zeros((dim, self.rank_q), dtype=complex)
        out[self.labels, np.arange(self.rank_q)] = 1.0
        return out


def fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of every column real positive."""
    if vecs.size == 0:
        return vecs
    idx = np.argmax(np.abs(vecs), axis=0)
    ph = vecs[idx, np.arange(vecs.shape[1])]
    ph = ph / np.abs(ph)
    return vecs / ph


def eig_dense(H, cap_dim: int = DENSE_CAP_DIM) -> Spectrum:
    M = H if isinstance(H, np.ndarray) else assemble_dense(H, cap_dim)
    if M.shape[0] > cap_dim:
        raise CapExceeded(f"dense dimension {M.shape[0]} exceeds cap {cap_dim}")
    if np.max(np.abs(M - M.conj().T), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(M), initial=0.0)):
        raise ValueError("operator is not Hermitian")
    M = (M + M.conj().T) / 2
    vals, vecs = sla.eigh(M, driver="evd")
    dims = None if isinstance(H, np.ndarray) else H.dims
    return Spectrum(vals, fix_phases(vecs), None, dims)


def diag_spectrum(H: Hamiltonian, cap: int = ENUM_CAP) -> Spectrum:
    if not is_diagonal(H):
        raise ValueError("diag_spectrum requires a diagonal Hamiltonian")
    e = diagonal_energies(H, cap)
    order = np.argsort(e, kind="stable")
    return Spectrum(e[order], None, order, H.dims)


def diag_low_spectrum(H: Hamiltonian, k: int, cap: int = ENUM_CAP) -> Spectrum:
    """Exact bottom of a diagonal spectrum, without enumerating the whole space.

    Widens an energy window until it holds more than k states spanning at
    least two distinct levels; every state inside the window is returned.
    """
    if not is_diagonal(H):
        raise ValueError("diag_low_spectrum requires a diagonal Hamiltonian")
    floor = sum(float(np.diag(t.matrix).real.min()) for t in H.terms if t.matrix.size)
    width = 1.0
    while True:
        e, idx = diagonal_states_below(H, floor + width, cap)
        if len(e) > k and e.max() - e.min() > 1e-8 * max(1.0, abs(e.min())):
            break
        if len(e) == H.space.total_dim:
            break
        width *= 2
    order = np.lexsort((idx, e))
    return Spectrum(e[order], None, idx[order], H.dims)


def spectrum(H: Hamiltonian, cap_dim: int = DENSE_CAP_DIM, cap_enum: int = ENUM_CAP) -> Spectrum:
    """Diagonal fast path when possible, dense otherwise."""
    if is_diagonal(H) and H.space.total_dim > 64:
        return diag_spectrum(H, cap_enum)
    return eig_dense(H, cap_dim)


# --- low band of Hamiltonians with strong ancilla penalties -------------------------
#
# Gadget Hamiltonians carry penalties Δ|1><1| whose size swamps double precision
# in a dense eigensolver (absolute error ~1e-16·Δ). The low band is instead found
# from the exact self-energy Σ(z) = A + B (z − C)^{-1} B†, eliminating one
# penalty level at a time from the strongest down, and solving z = λ_j(Σ(z)).

PENALTY_SCHUR_MIN = 1e5
_SCHUR_MAX_ITER = 100


def penalty_hierarchy(H: Hamiltonian, min_penalty: float = 0.0) -> list[tuple[float, list[int]]]:
    """Qubit sites whose 1-local part is p|1><1| with p > min_penalty, grouped by p (ascending)."""
    local: dict[int, np.ndarray] = {}
    for t in H.terms:
        if t.locality == 1 and H.dims[t.support[0]] == 2:
            s = t.support[0]
            local[s] = local.get(s, 0) + t.matrix
    groups: list[tuple[float, list[int]]] = []
    for s in sorted(local):
        m = local[s]
        p = float(m[1, 1].real)
        if p <= min_penalty or abs(m[0, 0]) + abs(m[0, 1]) > 1e-12 * p:
            continue
        for g in groups:
            if abs(g[0] - p) <= 1e-9 * p:
                g[1].append(s)
                break
        else:
            groups.append((p, [s]))
    return sorted(groups)


def _zero_mask(sites, dims) -> np.ndarray:
    digits = np.indices(dims).reshape(len(dims), -1)
    return np.all(digits[list(sites)] == 0, axis=0)


def _clusters(z: np.ndarray) -> list[list[int]]:
    out = [[0]]
    for j in range(1, len(z)):
        if z[j] - z[j - 1] <= 1e-9 * max(1.0, abs(z[j])):
            out[-1].append(j)
        else:
            out.append([j])
    return out


def schur_low_band(M: np.ndarray, masks: list[np.ndarray], k: int):
    """Lowest k eigenpairs of Hermitian M, eliminating sectors ~masks[0], ~masks[1], ... in turn.

    masks[i] marks the basis states kept at level i (strongest penalty first).
    """
    if not masks:
        vals, vecs = sla.eigh(M, driver="evd")
        return vals[:k], vecs[:, :k]
    lo, hi = np.flatnonzero(masks[0]), np.flatnonzero(~masks[0])
    inner = [m[lo] for m in masks[1:]]
    if len(hi) == 0:
        return schur_low_band(M, inner, k)
    if k > len(lo):
        raise ValueError("requested band is larger than the kept sector")
    A, B, C = M[np.ix_(lo, lo)], M[np.ix_(lo, hi)], M[np.ix_(hi, hi)]
    Bh = B.conj().T
    c_min = float(sla.eigvalsh(C, subset_by_index=[0, 0])[0])
    cache: dict[float, tuple] = {}

    def sigma(z: float):
        if z not in cache:
            X = sla.solve(z * np.eye(len(hi)) - C, Bh, assume_a="her")
            S = A + B @ X
            vals, vecs = schur_low_band((S + S.conj().T) / 2, inner, k)
            cache[z] = (vals, vecs, X)
        return cache[z]

    z0 = min(float(sla.eigvalsh(A, subset_by_index=[0, 0])[0]), c_min - 1.0)
    z = np.array(sigma(z0)[0], dtype=float)
    for _ in range(_SCHUR_MAX_ITER):
        new = z.copy()
        for j in range(k):
            vals, vecs, X = sigma(float(z[j]))
            slope = float(np.linalg.norm(X @ vecs[:, j]) ** 2)
            new[j] = z[j] + (vals[j] - z[j]) / (1.0 + slope)
        done = np.max(np.abs(new - z)) <= 1e-14 * max(1.0, float(np.max(np.abs(z))))
        z = new
        if done:
            break
    else:
        raise RuntimeError("self-energy iteration did not converge")
    if np.any(z >= c_min):
        raise ValueError("eliminated sector reaches into the requested band")
    vecs_out = np.zeros((M.shape[0], k), dtype=complex)
    for cl in _clusters(z):
        vals, vecs, X = sigma(float(np.mean(z[cl])))
        for j in cl:
            v = vecs[:, j]
            vecs_out[lo, j] = v
            vecs_out[hi, j] = X @ v
    Q, _ = np.linalg.qr(vecs_out)
    return z, Q


def low_spectrum(H: Hamiltonian, k: int, min_penalty: float = PENALTY_SCHUR_MIN,
                 cap_dim: int = DENSE_CAP_DIM) -> Spectrum:
    """Lowest k eigenpairs, exact even when ancilla penalties exceed double-precision range.

    Without penalties above min_penalty this is the dense solver truncated to k.
    """
    groups = penalty_hierarchy(H, min_penalty)
    if not groups:
        s = eig_dense(H, cap_dim)
        return Spectrum(s.eigenvalues[:k], s.eigenvectors[:, :k], None, H.dims)
    M = assemble_dense(H, cap_dim)
    M = (M + M.conj().T) / 2
    masks = [_zero_mask(sites, H.dims) for _, sites in reversed(groups)]
    vals, vecs = schur_low_band(M, masks, k)
    return Spectrum(np.asarray(vals), fix_phases(vecs), None, H.dims)


def low_ground(H: Hamiltonian, q: int | None = None, min_penalty: float = PENALTY_SCHUR_MIN):
    """(spectrum with at least q+1 levels, exact-degenerate or rank-q quasi-groundspace)."""
    dim = H.space.total_dim
    k = min(dim, 16 if q is None else q + 1)
    while True:
        s = low_spectrum(H, k, min_penalty)
        if q is not None:
            return s, ground_data(s, q=q)
        vals = s.eigenvalues
        split = np.flatnonzero(np.diff(vals) > degeneracy_tol(s))
        if len(split) or k == dim:
            return s, ground_data(s, w_max=0.0)
        k = min(dim, 2 * k)


def degeneracy_tol(s: Spectrum) -> float:
    return 1e-8 * s.scale()


def _quasi(s: Spectrum, q: int, snap: bool) -> QuasiGroundspace:
    vals = s.eigenvalues
    E_g = float(vals[0])
    gamma = float(vals[q] - E_g) if q < s.dim else math.inf
    spread = float(vals[q - 1] - E_g)
    if snap and spread <= degeneracy_tol(s):
        spread = 0.0
    w = spread / gamma if gamma > 0 and math.isfinite(gamma) else (0.0 if spread == 0 else math.inf)
    idx = np.arange(q)
    if s.is_diagonal:
        return QuasiGroundspace(None, E_g, gamma, w, q, s.labels[idx])
    return QuasiGroundspace(s.eigenvectors[:, idx], E_g, gamma, w, q)


def ground_data(s: Spectrum, q: int | None = None, w_max: float | None = None) -> QuasiGroundspace:
    """Quasi-groundspace from an explicit rank q or a spread threshold w_max.

    With w_max the cut is chosen among ranks that do not split a degenerate
    cluster; ties go to the cut maximizing gamma * (1 - w).
    """
    if (q is None) == (w_max is None):
        raise ValueError("give exactly one of q or w_max")
    tol = degeneracy_tol(s)
    if q is not None:
        if not 1 <= q <= s.dim:
            raise ValueError(f"rank {q} outside 1..{s.dim}")
        out = _quasi(s, q, snap=True)
        if not out.w < 1:
            raise ValueError(f"no valid cut at rank {q}: spread {out.w} >= 1")
        return out
    vals = s.eigenvalues
    best, best_score = None, -math.inf
    for cut in range(1, s.dim):
        if vals[cut] - vals[cut - 1] <= tol:
            continue
        cand = _quasi(s, cut, snap=True)
        if cand.w < 1 and cand.w <= w_max + 1e-15:
            score = cand.gamma * (1 - cand.w)
            if score > best_score + 1e-12:
                best, best_score = cand, score
        if w_max == 0:
            break
    if best is None:
        if vals[-1] - vals[0] <= tol:
            return _quasi(s, s.dim, snap=True)
        raise ValueError("no valid quasi-groundspace cut (spectrum too compressed)")
    return best


def check_orthonormal(B: np.ndarray, tol: float = ORTHO_TOL):
    if B.size and np.max(np.abs(B.conj().T @ B - np.eye(B.shape[1]))) > tol:
        raise ValueError("basis columns are not orthonormal")


def spectral_norm(M: np.ndarray, tol: float = 1e-10) -> float:
    """Largest singular value: full SVD on small inputs, power iteration otherwise."""
    if M.size == 0:
        return 0.0
    if max(M.shape) <= SVD_NORM_MAX_DIM:
        return float(np.linalg.norm(M, 2))
    rng = np.random.default_rng(0)
    x = rng.standard_normal(M.shape[1]) + 0j
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(10 * M.shape[1]):
        y = M.conj().T @ (M @ x)
        new = math.sqrt(np.linalg.norm(y))
        x = y / np.linalg.norm(y) if np.linalg.norm(y) > 0 else x
        if abs(new - est) <= tol * max(1.0, new):
            return new
        est = new
    return est


def residual_norm(A: np.ndarray, B: np.ndarray) -> float:
    """||(1 - P_A) P_B|| for orthonormal bases A, B."""
    if B.shape[1] == 0:
        return 0.0
    if A.shape[1] == 0:
        return 1.0
    R = B - A @ (A.conj().T @ B)
    return min(1.0, spectral_norm(R))


def projector_distance(B1: np.ndarray, B2: np.ndarray) -> float:
    """Spectral norm of P1 - P2 for projectors given by orthonormal bases."""
    if B1.shape[0] != B2.shape[0]:
        raise ValueError("bases live in different ambient dimensions")
    check_orthonormal(B1)
    check_orthonormal(B2)
    r1, r2 = B1.shape[1], B2.shape[1]
    if r1 != r2:
        return 0.0 if r1 == r2 == 0 else 1.0
    return max(residual_norm(B1, B2), residual_norm(B2, B1))


def projector_basis(P: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the range of an orthogonal projector."""
    vals, vecs = np.linalg.eigh((P + P.conj().T) / 2)
    return vecs[:, vals > 0.5]


def perturbation_check(H, H_perturbed, quasi: QuasiGroundspace, kappa: float) -> dict:
    """Check the perturbed-groundspace bounds for a perturbation of norm <= kappa."""
    M0 = H if isinstance(H, np.ndarray) else assemble_dense(H)
    M1 = H_perturbed if isinstance(H_perturbed, np.ndarray) else assemble_dense(H_perturbed)
    actual = spectral_norm(M1 - M0)
    gamma, w = quasi.gamma, quasi.w
    certified = (actual <= kappa * (1 + 1e-9) + 1e-12 and w <= 0.5
                 and kappa <= (1 - w) * gamma / 8 * (1 + 1e-12))
    s1 = eig_dense(M1)
    q = quasi.rank_q
    new = _quasi(s1, q, snap=False)
    base = quasi.dense_basis(M0.shape[0])
    proj_err = projector_distance(base, new.basis)
    gamma_ok = new.gamma > gamma - 2 * kappa - 1e-12
    spread_ok = new.w * new.gamma <= w * gamma + 2 * kappa + 1e-12
    proj_ok = proj_err < 32 * kappa / gamma if kappa > 0 else proj_err <= 1e-9
    return {
        "gamma_new": new.gamma,
        "spread_new": new.w,
        "proj_err": proj_err,
        "perturbation_norm": actual,
        "certified": bool(certified),
        "bound_ok": bool(certified and gamma_ok and spread_ok and proj_ok),
        "gamma_ok": bool(gamma_ok),
        "spread_ok": bool(spread_ok),
        "proj_ok": bool(proj_ok),
        "ratio": proj_err / (kappa / gamma) if kappa > 0 else 0.0,
        "note": "" if certified else "bound not certified",
    }


def lemma_bound(delta: float) -> float:
    """sqrt(2) delta / sqrt(1 - delta^2); infinite for delta >= 1."""
    if delta >= 1:
        return math.inf
    return math.sqrt(2) * delta / math.sqrt(1 - delta * delta)


def projector_difference_property(A: np.ndarray, B: np.ndarray) -> dict:
    """Per-vector deviation of A from B against the projector-difference bound."""
    check_orthonormal(A)
    check_orthonormal(B)
    if A.shape[1] > B.shape[1]:
        raise ValueError("rank(A) must not exceed rank(B)")
    delta = residual_norm(A, B)
    norm = projector_distance(A, B)
    bound = lemma_bound(delta)
    return {
        "max_per_vector_dev": delta,
        "norm": norm,
        "bound": bound,
        "norm_bound_ok": bool(norm <= bound + 1e-10),
    }
