"""Coherent degree reduction of a k-local qubit Hamiltonian by chained gadgets.

Stages: subdivision rounds down to 3-local terms that each carry an ancilla X,
one 3-to-2 round, one subdivision round isolating original qubits from each
other, then fork rounds until every (site, Pauli) pair has at most two
couplings. Each stage is tuned against the previous stage's output.
"""
from __future__ import annotations

from ..encver import compose_chain, trivial_encoding, verify_gap_sim
from ..hamcore import DENSE_CAP_DIM, Hamiltonian, metrics
from ..spectral import eig_dense, ground_data
from .common import ConstructionOutput, zero_ancilla
from .gadgets import (
    _fork_raw,
    _subdivision_raw,
    _three_to_two_raw,
    fork_couplings,
    gadget_3to2,
    gadget_fork,
    gadget_subdivision,
    pauli_targets,
)

MAX_PAULI_DEGREE = 2  # per (site, Pauli); at most 6 couplings per original site
SITE_CAP = 14


def compose_outputs(first: ConstructionOutput, second: ConstructionOutput) -> ConstructionOutput:
    """Chain two stages whose encodings only append |0> ancillas."""
    if not (first.encoding.is_trivial and second.encoding.is_trivial):
        raise ValueError("only trivial encodings compose here")
    sys_dims = first.encoding.system_dims
    H = second.hamiltonian
    n_anc = H.n - len(sys_dims)
    notes = {"stages": first.notes.get("stages", [first.notes]) + [second.notes]}
    return ConstructionOutput(H, trivial_encoding(sys_dims, H.dims), zero_ancilla(n_anc), notes)


def identity_output(H: Hamiltonian) -> ConstructionOutput:
    return ConstructionOutput(H, trivial_encoding(H.dims, H.dims), zero_ancilla(0),
                              {"stages": []})


def _part1_targets(H: Hamiltonian, n_orig: int) -> list[int]:
    out = []
    for t in pauli_targets(H):
        if t.locality >= 4:
            out.append(t.index)
        elif t.locality == 3 and not any(s >= n_orig and L == "X" for s, L in t.ops):
            out.append(t.index)
    return out


def _part3_targets(H: Hamiltonian, n_orig: int) -> list[int]:
    return [t.index for t in pauli_targets(H)
            if t.locality == 2 and all(s < n_orig for s, _ in t.ops)]


def _needs_fork(H: Hamiltonian, n_orig: int) -> bool:
    return any(len(v) > MAX_PAULI_DEGREE for v in fork_couplings(H, range(n_orig)).values())


_RAW = {
    "subdivision": lambda H, d, kw: _subdivision_raw(H, d, kw["targets"], kw.get("split")),
    "isolation": lambda H, d, kw: _subdivision_raw(H, d, kw["targets"], kw.get("split")),
    "three_to_two": lambda H, d, kw: _three_to_two_raw(H, d, None, kw["n_orig"]),
    "fork": lambda H, d, kw: _fork_raw(H, d, kw["original"]),
}


def _walk(H: Hamiltonian, n_orig: int, apply) -> Hamiltonian:
    """Run the stage sequence; apply(kind, H, kwargs) returns the next Hamiltonian."""
    cur = H
    for _ in range(32):
        tg = _part1_targets(cur, n_orig)
        if not tg:
            break
        cur = apply("subdivision", cur, {"targets": tg})
    if any(t.locality == 3 for t in pauli_targets(cur)):
        cur = apply("three_to_two", cur, {"n_orig": n_orig})
    tg = _part3_targets(cur, n_orig)
    if tg:
        cur = apply("isolation", cur, {"targets": tg, "split": 1})
    for _ in range(32):
        if not _needs_fork(cur, n_orig):
            break
        cur = apply("fork", cur, {"original": list(range(n_orig))})
    return cur


def already_reduced(H: Hamiltonian) -> bool:
    m = metrics(H)
    return m.locality_k <= 2 and m.degree_r <= 6


def plan_pipeline(H: Hamiltonian) -> list[dict]:
    """Stage list with site counts, built with placeholder Δ = 1."""
    if already_reduced(H):
        return []
    plan = []

    def apply(kind, cur, kw):
        out = _RAW[kind](cur, 1.0, kw)
        plan.append({"stage": kind, "sites": out.hamiltonian.n,
                     "new_ancillas": out.hamiltonian.n - cur.n})
        return out.hamiltonian

    _walk(H, H.n, apply)
    return plan


_TUNED = {
    "subdivision": lambda H, e, kw: gadget_subdivision(H, target_error=e, targets=kw["targets"],
                                                       split=kw.get("split"), q=kw["q"]),
    "three_to_two": lambda H, e, kw: gadget_3to2(H, target_error=e, n_orig=kw["n_orig"], q=kw["q"]),
    "fork": lambda H, e, kw: gadget_fork(H, target_error=e, original=kw["original"], q=kw["q"]),
}
_TUNED["isolation"] = _TUNED["subdivision"]


def full_dr_pipeline(H: Hamiltonian, target_eps: float, site_cap: int = SITE_CAP,
                     cap_dim: int = DENSE_CAP_DIM, execute: bool = True):
    """Run the gadget chain with per-stage error target_eps / (number of stages).

    Returns (ConstructionOutput, stage reports + end-to-end report). When the
    plan exceeds site_cap or cap_dim, or execute is False, nothing runs: the
    output wraps H itself, its notes carry the plan, and the report list is empty.
    """
    if not target_eps > 0:
        raise ValueError("target ε must be positive")
    plan = plan_pipeline(H)
    summary = {"plan": plan, "target_eps": target_eps}
    if not plan:
        out = identity_output(H)
        out.notes.update(summary)
        return out, []
    sites = plan[-1]["sites"]
    if sites > site_cap or 2**sites > cap_dim or not execute:
        summary["executed"] = False
        summary["reason"] = "plan only" if not execute else f"{sites} sites exceed the cap"
        return ConstructionOutput(H, trivial_encoding(H.dims, H.dims), None, summary), []
    q = ground_data(eig_dense(H), w_max=0.0).rank_q
    per_stage = target_eps / len(plan)
    chain = identity_output(H)
    reports = []

    def apply(kind, cur, kw):
        nonlocal chain
        out = _TUNED[kind](cur, per_stage, {**kw, "q": q})
        rep = verify_gap_sim(cur, out.hamiltonian, out.encoding, q=q, P_anc=out.known_P_anc)
        reports.append(rep)
        chain = compose_outputs(chain, out) if chain.notes["stages"] else \
            ConstructionOutput(out.hamiltonian, out.encoding, out.known_P_anc, {"stages": [out.notes]})
        return out.hamiltonian

    _walk(H, H.n, apply)
    end = verify_gap_sim(H, chain.hamiltonian, chain.encoding, q=q, P_anc=chain.known_P_anc)
    bound = compose_chain(reports)
    chain.notes.update(summary)
    chain.notes.update({
        "executed": True,
        "per_stage_target": per_stage,
        "composed_bound": bound,
        "end_to_end": {"epsilon": end.epsilon, "delta": end.delta, "pass": end.passed,
                       "gamma_tilde": end.gamma_tilde, "w_tilde": end.w_tilde},
        "bound_respected": bool(end.epsilon <= bound["epsilon_bound"] + 1e-6
                                and end.delta <= bound["delta_bound"] + 1e-6),
    })
    return chain, reports + [end]
