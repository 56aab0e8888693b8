"""Perturbative gadgets: subdivision, 3-to-2-local and fork, with a Δ auto-tuner.

Gadgets act on terms that are single Pauli products c·σ⊗σ⊗...; anything else
is carried through untouched. Every emitted Pauli component is its own term,
ancilla penalties Δ|1><1| are single-site terms, and all constants end up in
one empty-support term so spectra line up without offsets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..encver import incoherence, trivial_encoding
from ..hamcore import (
    PROJ1,
    CapExceeded,
    Hamiltonian,
    LocalTerm,
    SiteSpace,
    constant_term,
    pauli_product_of,
    pauli_string_matrix,
    pauli_term,
)
from ..spectral import QuasiGroundspace, low_ground, low_spectrum
from .common import ConstructionOutput, GadgetPlan, zero_ancilla

DELTA_CAP_FACTOR = 2**40


@dataclass(frozen=True)
class PauliTarget:
    index: int  # position in H.terms
    coef: float
    ops: tuple[tuple[int, str], ...]  # (site, letter) in the term's support order

    @property
    def locality(self) -> int:
        return len(self.ops)


def pauli_targets(H: Hamiltonian) -> list[PauliTarget]:
    """Terms of H that are single Pauli products."""
    out = []
    if not H.space.is_qubit():
        return out
    for idx, t in enumerate(H.terms):
        if t.locality == 0:
            continue
        pp = pauli_product_of(t)
        if pp is not None:
            c, letters = pp
            out.append(PauliTarget(idx, c, tuple(zip(t.support, letters))))
    return out


@dataclass
class _Builder:
    """Accumulates the rewritten Hamiltonian of one gadget round."""
    base: Hamiltonian
    kept: list = field(default_factory=list)
    new: list = field(default_factory=list)
    const: float = 0.0
    n_anc: int = 0

    def ancilla(self) -> int:
        site = self.base.n + self.n_anc
        self.n_anc += 1
        return site

    def pauli(self, coef: float, ops: Sequence[tuple[int, str]]):
        if coef != 0.0:
            self.new.append(pauli_term(coef, ops))

    def penalty(self, site: int, delta: float):
        self.new.append(LocalTerm((site,), delta * PROJ1))

    def finish(self, kind: str, delta: float, plan_targets: list, ancilla_map: dict,
               notes: dict) -> ConstructionOutput:
        terms = []
        for t in self.kept:
            if t.locality == 0:
                self.const += float(t.matrix[0, 0].real)
            else:
                terms.append(t)
        terms += self.new
        if self.const != 0.0:
            terms.append(constant_term(self.const))
        dims = tuple(self.base.dims) + (2,) * self.n_anc
        H = Hamiltonian(SiteSpace(dims), tuple(terms))
        plan = GadgetPlan(kind, plan_targets, delta, ancilla_map)
        notes = {"construction": kind, "delta": delta, "plan": plan.to_json(), **notes}
        return ConstructionOutput(H, trivial_encoding(self.base.dims, dims),
                                  zero_ancilla(self.n_anc), notes)


def _select(H: Hamiltonian, targets, default: Callable[[PauliTarget], bool]):
    found = {t.index: t for t in pauli_targets(H)}
    if targets is None:
        return [t for t in found.values() if default(t)]
    chosen = []
    for idx in targets:
        if idx not in found:
            raise ValueError(f"term {idx} is not a single Pauli product")
        chosen.append(found[idx])
    return chosen


# --- subdivision ----------------------------------------------------------------

def _subdivision_raw(H: Hamiltonian, delta: float, targets=None, split=None) -> ConstructionOutput:
    chosen = [t for t in _select(H, targets, lambda t: t.locality >= 3) if t.coef != 0.0]
    chosen_idx = {t.index for t in chosen}
    b = _Builder(H, [t for i, t in enumerate(H.terms) if i not in chosen_idx])
    amap, plan = {}, []
    for t in chosen:
        ops = sorted(t.ops)
        k = len(ops)
        j = math.ceil(k / 2) if split is None else int(split)
        if not 1 <= j < k:
            raise ValueError(f"term {t.index} cannot be split at {j}")
        A, B = ops[:j], ops[j:]
        a = b.ancilla()
        s = 1.0 if t.coef > 0 else -1.0
        g = math.sqrt(abs(t.coef) * delta / 2)
        b.penalty(a, delta)
        b.pauli(s * g, A + [(a, "X")])
        b.pauli(-g, B + [(a, "X")])
        b.const += abs(t.coef)
        amap[t.index] = [a]
        plan.append(t.index)
    return b.finish("subdivision", delta, plan, amap, {})


# --- 3-to-2 ---------------------------------------------------------------------

def _choose_c(t: PauliTarget, n_orig: int | None) -> int:
    """Index within t.ops of the factor that couples to the new ancilla's diagonal."""
    if n_orig is not None:
        for pos, (site, letter) in enumerate(t.ops):
            if site >= n_orig and letter == "X":
                return pos
    return len(t.ops) - 1


def _three_to_two_raw(H: Hamiltonian, delta: float, targets=None,
                      n_orig: int | None = None) -> ConstructionOutput:
    chosen = _select(H, targets, lambda t: t.locality == 3)
    for t in chosen:
        if t.locality != 3:
            raise ValueError(f"term {t.index} is not a 3-local Pauli product")
    chosen = [t for t in chosen if t.coef != 0.0]
    chosen_idx = {t.index for t in chosen}
    b = _Builder(H, [t for i, t in enumerate(H.terms) if i not in chosen_idx])
    d13, d23 = delta ** (1 / 3), delta ** (2 / 3)
    amap, plan = {}, []
    for t in chosen:
        pc = _choose_c(t, n_orig)
        A, B = [op for pos, op in enumerate(t.ops) if pos != pc]
        C = t.ops[pc]
        a = b.ancilla()
        b.penalty(a, delta)
        # ½Δ^{1/3}(A−B)² = Δ^{1/3}(1 − AB)
        b.pauli(-d13, [A, B])
        b.const += d13
        b.pauli(d23 / math.sqrt(2), [A, (a, "X")])
        b.pauli(-d23 / math.sqrt(2), [B, (a, "X")])
        # c·C⊗|0><0| − Δ^{2/3} c·C⊗|1><1| merged into one 2-local term
        m = t.coef * np.kron(pauli_string_matrix(C[1]), np.diag([1.0, -d23]))
        b.new.append(LocalTerm((C[0], a), m))
        amap[t.index] = [a]
        plan.append(t.index)
    coefs = [abs(t.coef) for t in chosen]
    notes = {"delta0": max(coefs) ** 2 if coefs else 0.0,
             "coefficient_bound_ok": all(c <= math.sqrt(delta) for c in coefs)}
    return b.finish("three_to_two", delta, plan, amap, notes)


# --- fork -----------------------------------------------------------------------

def fork_couplings(H: Hamiltonian, original: Sequence[int]) -> dict:
    """Couplings λ σ_α^(i) ⊗ X^(κ) grouped by (i, α), sorted by κ."""
    orig = set(original)
    groups: dict[tuple[int, str], list[tuple[int, int, float]]] = {}
    for t in pauli_targets(H):
        if t.locality != 2:
            continue
        (s1, l1), (s2, l2) = t.ops
        if s1 in orig and s2 not in orig and l2 == "X":
            i, alpha, kappa = s1, l1, s2
        elif s2 in orig and s1 not in orig and l1 == "X":
            i, alpha, kappa = s2, l2, s1
        else:
            continue
        groups.setdefault((i, alpha), []).append((kappa, t.index, t.coef))
    return {k: sorted(v) for k, v in sorted(groups.items())}


def pauli_degrees(H: Hamiltonian, original: Sequence[int]) -> dict:
    return {f"{i}{a}": len(v) for (i, a), v in fork_couplings(H, original).items()}


def _fork_raw(H: Hamiltonian, delta: float, original: Sequence[int]) -> ConstructionOutput:
    groups = fork_couplings(H, original)
    pairs = []
    for (i, alpha), cs in groups.items():
        for p in range(0, len(cs) - 1, 2):
            pairs.append((i, alpha, cs[p], cs[p + 1]))
    used = {c[1] for _, _, c1, c2 in pairs for c in (c1, c2)}
    b = _Builder(H, [t for idx, t in enumerate(H.terms) if idx not in used])
    g = math.sqrt(delta / 2)
    amap, plan = {}, []
    for i, alpha, (k1, idx1, l1), (k2, idx2, l2) in pairs:
        a = b.ancilla()
        b.penalty(a, delta)
        b.pauli(l1 * l2, [(k1, "X"), (k2, "X")])
        b.const += 0.5 * (l1 * l1 + l2 * l2 + 1)
        b.pauli(g, [(i, alpha), (a, "X")])
        b.pauli(-g * l1, [(k1, "X"), (a, "X")])
        b.pauli(-g * l2, [(k2, "X"), (a, "X")])
        amap[f"{idx1},{idx2}"] = [a]
        plan += [idx1, idx2]
    before = {f"{i}{a}": len(v) for (i, a), v in groups.items()}
    after = {k: math.ceil(v / 2) for k, v in before.items()}
    return b.finish("fork", delta, plan, amap,
                    {"original": list(original), "pauli_degree_before": before,
                     "pauli_degree_after": after})


# --- error measures and tuning ----------------------------------------------------

@dataclass(frozen=True)
class GadgetErrors:
    eig_err: float  # max |λ_j(gadget) − λ_j(target)| over the lowest q+1 levels
    proj_err: float  # ‖P̃ − P ⊗ |0..0><0..0|_anc‖
    gamma: float  # target gap above the rank-q band
    q: int

    @property
    def worst(self) -> float:
        return max(self.eig_err, self.proj_err)


def _target_band(H: Hamiltonian, q: int | None):
    s, quasi = low_ground(H, q)
    q = quasi.rank_q
    if len(s.eigenvalues) <= q and q < H.space.total_dim:
        s = low_spectrum(H, q + 1)
    vals = s.eigenvalues
    gamma = float(vals[q] - vals[0]) if q < len(vals) else math.inf
    P = QuasiGroundspace(s.eigenvectors[:, :q], float(vals[0]), gamma, 0.0, q)
    return vals, P, q, gamma


def gadget_errors(H: Hamiltonian, out: ConstructionOutput, q: int | None = None,
                  _target=None) -> GadgetErrors:
    vals, P, q, gamma = _target if _target is not None else _target_band(H, q)
    G = out.hamiltonian
    m = min(q + 1, len(vals))
    s = low_spectrum(G, max(m, q))
    eig_err = float(np.max(np.abs(s.eigenvalues[:m] - vals[:m])))
    Pt = QuasiGroundspace(s.eigenvectors[:, :q], float(s.eigenvalues[0]), 1.0, 0.0, q)
    proj = incoherence(P, Pt, out.encoding, out.known_P_anc)
    return GadgetErrors(eig_err, float(proj), gamma, q)


@dataclass
class TuneResult:
    delta: float
    output: ConstructionOutput
    errors: GadgetErrors
    steps: list


def _tune(builder: Callable[[float], ConstructionOutput], H: Hamiltonian, target_error: float,
          delta0: float, q: int | None = None,
          cap_factor: float = DELTA_CAP_FACTOR) -> TuneResult:
    if not delta0 > 0:
        raise ValueError("delta0 must be positive")
    target = _target_band(H, q)
    steps = []
    d = float(delta0)
    while d <= delta0 * cap_factor:
        out = builder(d)
        err = gadget_errors(H, out, _target=target)
        steps.append({"delta": d, "eig_err": err.eig_err, "proj_err": err.proj_err})
        if err.worst <= target_error and err.gamma - 2 * err.eig_err > 0:
            return TuneResult(d, out, err, steps)
        d *= 2
    raise CapExceeded(f"no Δ up to {delta0 * cap_factor:g} reaches error {target_error}")


def tune_delta(builder: Callable[[float], ConstructionOutput], H: Hamiltonian,
               target_error: float, delta0: float, q: int | None = None,
               cap_factor: float = DELTA_CAP_FACTOR) -> float:
    """Smallest Δ = Δ₀·2^i whose gadget meets target_error on eigenvalues and projector."""
    return _tune(builder, H, target_error, delta0, q, cap_factor).delta


def rescale(out: ConstructionOutput, factor: float) -> ConstructionOutput:
    H = out.hamiltonian.scaled(factor)
    notes = dict(out.notes)
    notes["rescale"] = factor
    return ConstructionOutput(H, out.encoding, out.known_P_anc, notes)


def _default_delta0(H: Hamiltonian) -> float:
    return max(1.0, sum(t.norm() for t in H.terms if t.locality > 0))


def _run(builder, H, delta, target_error, delta0, q) -> ConstructionOutput:
    if delta is not None:
        if not delta > 0:
            raise ValueError("Δ must be positive")
        out = builder(delta)
        out.notes["rescale"] = 1.0
        return out
    if target_error is None:
        raise ValueError("give either Δ or a target error")
    res = _tune(builder, H, target_error, delta0 or _default_delta0(H), q)
    e = res.errors
    c = e.gamma / (e.gamma - 2 * e.eig_err) if math.isfinite(e.gamma) else 1.0
    out = rescale(res.output, c)
    out.notes.update({"target_error": target_error, "measured": {
        "eig_err": e.eig_err, "proj_err": e.proj_err}, "tuning": res.steps})
    return out


def gadget_subdivision(H: Hamiltonian, delta: float | None = None, target_error: float | None = None,
                       split: int | None = None, targets=None, delta0: float | None = None,
                       q: int | None = None) -> ConstructionOutput:
    """Split each targeted c·A⊗B into A⊗X_a and B⊗X_a couplings to a new ancilla a.

    By default every Pauli product of locality ≥ 3 is split with |A| = ⌈k/2⌉
    over ascending site ids.
    """
    return _run(lambda d: _subdivision_raw(H, d, targets, split), H, delta, target_error, delta0, q)


def gadget_3to2(H: Hamiltonian, delta: float | None = None, target_error: float | None = None,
                targets=None, n_orig: int | None = None, delta0: float | None = None,
                q: int | None = None) -> ConstructionOutput:
    """Replace each 3-local c·A⊗B⊗C by 2-local couplings through one ancilla.

    C is the factor acting by X on a site ≥ n_orig when there is one, otherwise
    the last factor.
    """
    return _run(lambda d: _three_to_two_raw(H, d, targets, n_orig), H, delta, target_error, delta0, q)


def gadget_fork(H: Hamiltonian, delta: float | None = None, original: Sequence[int] = (0,),
                target_error: float | None = None, delta0: float | None = None,
                q: int | None = None) -> ConstructionOutput:
    """One fork round: pairs of σ_α^(i)⊗X^(κ) couplings on the same (i, α) share a new ancilla."""
    return _run(lambda d: _fork_raw(H, d, original), H, delta, target_error, delta0, q)


def limit_check(H: Hamiltonian, builder: Callable[[float], ConstructionOutput],
                deltas: tuple[float, float], q: int | None = None) -> dict:
    """Extrapolate the ground-band eigenvalues of two large-Δ gadgets to Δ → ∞.

    Uses a linear fit in 1/Δ^p with p fitted from the two error magnitudes.
    """
    vals, P, q, gamma = _target_band(H, q)
    bands = []
    for d in deltas:
        s = low_spectrum(builder(d).hamiltonian, q)
        bands.append(s.eigenvalues[:q])
    d1, d2 = deltas
    e1, e2 = bands
    # Richardson in x = 1/Δ^p, p estimated from the error ratio of the worst level
    r1 = np.max(np.abs(e1 - vals[:q]))
    r2 = np.max(np.abs(e2 - vals[:q]))
    p = math.log(r1 / r2) / math.log(d2 / d1) if r1 > 0 and r2 > 0 and r1 != r2 else 1.0
    x1, x2 = d1 ** -p, d2 ** -p
    limit = (e2 * x1 - e1 * x2) / (x1 - x2)
    return {"exponent": p, "limit": limit.tolist(), "target": vals[:q].tolist(),
            "max_dev": float(np.max(np.abs(limit - vals[:q]))), "raw_dev": float(max(r1, r2))}


__all__ = [
    "PauliTarget", "pauli_targets", "fork_couplings", "pauli_degrees", "GadgetErrors",
    "gadget_errors", "tune_delta", "rescale", "gadget_subdivision", "gadget_3to2",
    "gadget_fork", "limit_check",
]
