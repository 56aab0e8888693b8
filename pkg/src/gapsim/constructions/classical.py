"""Degree reduction for classical (diagonal) Hamiltonians by variable cloning."""
from __future__ import annotations

import numpy as np

from ..encver import trivial_encoding
from ..hamcore import Hamiltonian, LocalTerm, SiteSpace, is_diagonal
from ..spectral import diag_spectrum, ground_data
from .common import ConstructionOutput


def mismatch_penalty(d: int, strength: float) -> np.ndarray:
    """strength * (1 - sum_z |zz><zz|) on two d-level sites."""
    diag = np.full(d * d, strength)
    for z in range(d):
        diag[z * d + z] = 0.0
    return np.diag(diag).astype(complex)


def classical_dr(H: Hamiltonian, gamma: float | None = None,
                 strength: float | None = None) -> ConstructionOutput:
    """Give every term its own copy of each site and tie copies with equality chains.

    Site i with r_i incident terms becomes r_i copies; copy 0 keeps index i and
    the other copies are appended. Neighbouring copies in a cluster pay
    `strength` when their digits differ. By default strength = E_g + gamma, so
    every inconsistent configuration sits at least gamma above the ground energy.
    """
    if not is_diagonal(H):
        raise ValueError("classical degree reduction needs a diagonal Hamiltonian")
    for t in H.terms:
        d = np.diag(t.matrix).real
        if d.size and (d.min() < -1e-12 or d.max() > 1 + 1e-12):
            raise ValueError(f"term on {t.support} has costs outside [0, 1]")
    if strength is None:
        g = ground_data(diag_spectrum(H), w_max=0.0)
        if gamma is None:
            gamma = g.gamma
        strength = g.E_g + gamma
    n = H.n
    dims = list(H.dims)
    copies: list[list[int]] = [[i] for i in range(n)]
    used = [0] * n
    new_terms = []
    for t in H.terms:
        support = []
        for s in t.support:
            if used[s] == len(copies[s]):
                copies[s].append(len(dims))
                dims.append(H.dims[s])
            support.append(copies[s][used[s]])
            used[s] += 1
        new_terms.append(LocalTerm(tuple(support), t.matrix))
    chain = []
    for i in range(n):
        for a, b in zip(copies[i], copies[i][1:]):
            chain.append(LocalTerm((a, b), mismatch_penalty(H.dims[i], strength)))
    out = Hamiltonian(SiteSpace(tuple(dims)), tuple(new_terms + chain))
    enc = trivial_encoding(H.dims, out.dims)
    notes = {
        "construction": "classical_dr",
        "penalty_strength": float(strength),
        "gamma": None if gamma is None else float(gamma),
        "clusters": copies,
        "predicted": {"delta": 0.0, "w_tilde": 0.0},
    }
    return ConstructionOutput(out, enc, None, notes)
