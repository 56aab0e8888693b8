"""Ground-space correlation scores and their decay with graph distance.

The score of a ground state psi for commuting A, B is
    |<AB> - (<A P0 B> + <B P0 A>) / 2|,
which stays of order one when the ground space carries long-range order.
Two representations are supported: dense vectors, and sparse states stored
as {digit tuple: amplitude} with single-site observables, for simulators too
large to hold as dense vectors.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .encver import Encoding, apply_encoding
from .hamcore import Hamiltonian, LocalTerm, interaction_graph, set_distance

MEMBERSHIP_TOL = 1e-8
COMMUTE_TOL = 1e-10
FIT_FLOOR = 1e-10
CSV_COLUMNS = ("i", "j", "distance", "score", "state_id")


@dataclass(frozen=True)
class CorrelationRecord:
    i: int
    j: int
    distance: float
    score: float
    state_id: int

    def __post_init__(self):
        if self.score < -1e-12:
            raise ValueError("correlation score must be nonnegative")
        if self.distance < 0:
            raise ValueError("distance must be nonnegative")


@dataclass
class DecayProfile:
    records: list[CorrelationRecord]
    fit: dict | None
    reason: str | None = None

    def to_json(self) -> dict:
        return {"records": [asdict(r) for r in self.records], "fit": self.fit,
                "reason": self.reason}


def _as_basis(P0: np.ndarray) -> np.ndarray:
    """Orthonormal columns of P0, given either as a basis or a square projector."""
    P0 = np.asarray(P0, dtype=complex)
    if P0.ndim == 1:
        return P0[:, None]
    if P0.shape[0] == P0.shape[1] and np.allclose(P0 @ P0, P0, atol=1e-10) \
            and np.allclose(P0, P0.conj().T, atol=1e-10):
        w, v = np.linalg.eigh(P0)
        return v[:, w > 0.5]
    return P0


def correlation_score(psi: np.ndarray, A: np.ndarray, B: np.ndarray, P0: np.ndarray) -> float:
    psi = np.asarray(psi, dtype=complex)
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if abs(np.linalg.norm(psi) - 1) > 1e-10:
        raise ValueError("state is not normalized")
    G = _as_basis(P0)
    if G.shape[0] != psi.size:
        raise ValueError("ground space and state have different dimensions")
    if np.linalg.norm(G @ (G.conj().T @ psi) - psi) > MEMBERSHIP_TOL:
        raise ValueError("state is not in the ground space")
    if np.max(np.abs(A @ B - B @ A), initial=0.0) > COMMUTE_TOL:
        raise ValueError("observables do not commute")
    Ap, Bp = A @ psi, B @ psi
    ab = np.vdot(psi, A @ Bp)
    apb = np.vdot(G.conj().T @ (A.conj().T @ psi), G.conj().T @ Bp)
    bpa = np.vdot(G.conj().T @ (B.conj().T @ psi), G.conj().T @ Ap)
    return float(abs(ab - 0.5 * (apb + bpa)))


# --- sparse label states -----------------------------------------------------------

LabelState = Mapping[tuple, complex]


def label_state(entries: Iterable[tuple[Sequence[int], complex]]) -> dict:
    """Normalized {digits: amplitude} from (digits, amplitude) pairs."""
    out: dict = {}
    for digits, amp in entries:
        key = tuple(int(d) for d in digits)
        out[key] = out.get(key, 0) + complex(amp)
    norm = math.sqrt(sum(abs(a) ** 2 for a in out.values()))
    if norm == 0:
        raise ValueError("empty state")
    return {k: a / norm for k, a in out.items() if a != 0}


def _apply_site(op: np.ndarray, site: int, psi: LabelState) -> dict:
    out: dict = {}
    for digits, amp in psi.items():
        col = op[:, digits[site]]
        for k in np.nonzero(col)[0]:
            key = digits[:site] + (int(k),) + digits[site + 1:]
            out[key] = out.get(key, 0) + col[k] * amp
    return out


def _vdot(a: LabelState, b: LabelState) -> complex:
    if len(a) > len(b):
        return np.conj(_vdot(b, a))
    return sum(np.conj(x) * b.get(k, 0) for k, x in a.items())


def correlation_score_labels(psi: LabelState, A: tuple[int, np.ndarray],
                             B: tuple[int, np.ndarray], P0: Sequence[LabelState]) -> float:
    """Same score with single-site observables (site, matrix) and an orthonormal ground basis."""
    if abs(_vdot(psi, psi) - 1) > 1e-10:
        raise ValueError("state is not normalized")
    overlaps = [_vdot(g, psi) for g in P0]
    if abs(sum(abs(o) ** 2 for o in overlaps) - 1) > MEMBERSHIP_TOL:
        raise ValueError("state is not in the ground space")
    (sa, ma), (sb, mb) = A, B
    ma = np.asarray(ma, dtype=complex)
    mb = np.asarray(mb, dtype=complex)
    if sa == sb and np.max(np.abs(ma @ mb - mb @ ma), initial=0.0) > COMMUTE_TOL:
        raise ValueError("observables do not commute")
    Ap, Bp = _apply_site(ma, sa, psi), _apply_site(mb, sb, psi)
    Adp = _apply_site(ma.conj().T, sa, psi)
    Bdp = _apply_site(mb.conj().T, sb, psi)
    ab = _vdot(psi, _apply_site(ma, sa, Bp))
    apb = sum(np.conj(_vdot(g, Adp)) * _vdot(g, Bp) for g in P0)
    bpa = sum(np.conj(_vdot(g, Bdp)) * _vdot(g, Ap) for g in P0)
    return float(abs(ab - 0.5 * (apb + bpa)))


# --- decay profiles ----------------------------------------------------------------

def fit_decay(records: Sequence[CorrelationRecord]) -> tuple[dict | None, str | None]:
    """Least squares of log(score) against distance: score ≈ C exp(-mu d)."""
    use = [r for r in records if r.score > FIT_FLOOR and math.isfinite(r.distance)]
    if len(use) < 3:
        return None, f"{len(use)} usable records, need 3"
    d = np.array([r.distance for r in use], dtype=float)
    y = np.log([r.score for r in use])
    if np.ptp(d) == 0:
        return None, "all usable records share one distance"
    slope, intercept = np.polyfit(d, y, 1)
    resid = y - (slope * d + intercept)
    return {"C": float(math.exp(intercept)), "mu": float(-slope),
            "residual_rms": float(math.sqrt(np.mean(resid**2))), "points": len(use)}, None


def decay_profile(Htilde: Hamiltonian, P0, V: Encoding, observable: np.ndarray,
                  pairs: Sequence[tuple[int, int]], states=None) -> DecayProfile:
    """Scores of observable_i observable_j for each pair of system sites and each state.

    P0 is either a dense basis of the simulator ground space, or a list of
    label states; the label route needs a trivial encoding. States default to
    the ground basis itself, numbered in order.
    """
    G = interaction_graph(Htilde)
    observable = np.asarray(observable, dtype=complex)
    labels = isinstance(P0, (list, tuple)) and (not P0 or isinstance(P0[0], Mapping))
    if labels and not V.is_trivial:
        raise ValueError("label states need a trivial encoding")
    if labels:
        basis = list(P0)
        states = basis if states is None else list(states)
    else:
        basis = _as_basis(P0)
        states = [basis[:, k] for k in range(basis.shape[1])] if states is None else \
            [np.asarray(s, dtype=complex) for s in states]
    encoded = {}

    def enc(i):
        if i not in encoded:
            if labels:
                encoded[i] = ((V.system_sites[i], observable), frozenset({V.system_sites[i]}))
            else:
                encoded[i] = apply_encoding(V, LocalTerm((i,), observable))
        return encoded[i]

    records = []
    for i, j in pairs:
        (A, Si), (B, Sj) = enc(i), enc(j)
        dist = set_distance(G, Si, Sj)
        for sid, psi in enumerate(states):
            if labels:
                sc = correlation_score_labels(psi, A, B, basis)
            else:
                sc = correlation_score(psi, A, B, basis)
            records.append(CorrelationRecord(i, j, float(dist), max(sc, 0.0), sid))
    records.sort(key=lambda r: (r.distance, r.i, r.j, r.state_id))
    fit, reason = fit_decay(records)
    return DecayProfile(records, fit, reason)


def profile_csv(records: Sequence[CorrelationRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([r.i, r.j, f"{r.distance:.12g}", f"{r.score:.12g}", r.state_id])
    return buf.getvalue()
