"""Acceptance criteria, one test each, with runtime limits.

Each test logs a PASS/FAIL line that the terminal summary prints. Report
producers are cached so the consistency sweep reuses the reports of the
earlier criteria, or regenerates them when run on its own.
"""
import math
import time
from contextlib import contextmanager
from functools import lru_cache

import numpy as np

from gapsim.circuitham import ha_circuit_diluter, verify_ha_circuit
from gapsim.correlation import correlation_score
from gapsim.encver import trivial_encoding, verify_gap_sim, verify_weak_gap_sim
from gapsim.hamcore import (
    PAULI,
    Hamiltonian,
    LocalTerm,
    SiteSpace,
    assemble_dense,
    build_from_pauli,
    diagonal_states_below,
    embed,
    metrics,
)
from gapsim.spectral import (
    diag_spectrum,
    eig_dense,
    ground_data,
    lemma_bound,
    perturbation_check,
    projector_difference_property,
    spectrum,
)
from gapsim.constructions import (
    build_HA,
    build_HB,
    classical_dr,
    dicke_state,
    full_dr_pipeline,
    gadget_3to2,
    gadget_errors,
    gadget_fork,
    gadget_subdivision,
    ha_ground_basis,
    pauli_degrees,
    star_weak_diluter,
    tree_diluter,
)
from gapsim.constructions.gadgets import _fork_raw, _subdivision_raw, _three_to_two_raw

X, Z = PAULI["X"], PAULI["Z"]
XXXX = build_from_pauli(4, [(1.0, "XXXX")])
ZZZ = build_from_pauli(3, [(1.0, "ZZZ")])
STAR4 = build_from_pauli(5, [(1.0, "ZXIII"), (1.0, "ZIXII"), (1.0, "ZIIXI"), (1.0, "ZIIIX")])
STAR_DELTAS = (25, 100, 400)


@contextmanager
def criterion(log, num, title, limit):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - t0
        ok = ok and dt < limit
        log.append((num, f"{'PASS' if ok else 'FAIL'}  {num:2d}  {title}  [{dt:.2f} s, limit {limit:g} s]"))
    assert dt < limit, f"criterion {num} took {dt:.1f} s"


def loglog_slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def random_unit_hermitian(rng, dim):
    V = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    V = V + V.conj().T
    return V / np.linalg.norm(V, 2)


def random_basis(rng, dim, rank):
    M = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    return np.linalg.qr(M)[0]


def random_diagonal_3local(rng):
    n = int(rng.integers(3, 7))
    terms = []
    for _ in range(int(rng.integers(2, 5))):
        sup = tuple(sorted(rng.choice(n, 3, replace=False).tolist()))
        terms.append(LocalTerm(sup, np.diag(rng.integers(0, 3, 8) / 2.0)))
    return Hamiltonian(SiteSpace((2,) * n), tuple(terms))


# --- cached report producers ------------------------------------------------------

@lru_cache(maxsize=None)
def tree_runs():
    out = {}
    for n in range(4, 11):
        o = tree_diluter(n)
        out[n] = (o, verify_gap_sim(build_HA(n), o.hamiltonian, o.encoding, cut_w=0.0))
    return out


@lru_cache(maxsize=None)
def star_runs():
    out = {}
    for n in (4, 5, 6):
        for d in STAR_DELTAS:
            o = star_weak_diluter(n, d)
            r = verify_weak_gap_sim(build_HA(n), o.hamiltonian, o.encoding, cut_w=0.0,
                                    P_anc=o.known_P_anc)
            out[n, d] = (o, r)
    return out


@lru_cache(maxsize=None)
def classical_runs():
    rng = np.random.default_rng(2024)
    instances = [build_HA(n) for n in (4, 5, 6)] + [random_diagonal_3local(rng) for _ in range(20)]
    out = []
    for H in instances:
        o = classical_dr(H)
        out.append((H, o, verify_gap_sim(H, o.hamiltonian, o.encoding, cut_w=0.0)))
    return out


@lru_cache(maxsize=None)
def subdivision_runs():
    tuned = gadget_subdivision(XXXX, target_error=0.05)
    rep = verify_gap_sim(XXXX, tuned.hamiltonian, tuned.encoding, cut_w=0.0, P_anc=tuned.known_P_anc)
    sweep = {d: gadget_errors(XXXX, _subdivision_raw(XXXX, d)) for d in (1e2, 1e3, 1e4, 1e5)}
    return tuned, rep, sweep


@lru_cache(maxsize=None)
def three_to_two_runs():
    tuned = gadget_3to2(ZZZ, target_error=0.1)
    rep = verify_gap_sim(ZZZ, tuned.hamiltonian, tuned.encoding, cut_w=0.0, P_anc=tuned.known_P_anc,
                         require_coherence=True)
    sweep = {d: gadget_errors(ZZZ, _three_to_two_raw(ZZZ, d)) for d in (1e3, 1e4, 1e5, 1e6)}
    return tuned, rep, sweep


@lru_cache(maxsize=None)
def fork_runs():
    tuned = gadget_fork(STAR4, original=[0], target_error=0.1)
    rep = verify_gap_sim(STAR4, tuned.hamiltonian, tuned.encoding, cut_w=0.0, P_anc=tuned.known_P_anc)
    return tuned, rep


@lru_cache(maxsize=None)
def pipeline_runs():
    return full_dr_pipeline(XXXX, 0.1)


@lru_cache(maxsize=None)
def circuit_runs():
    out = ha_circuit_diluter(2, 0.6)
    return out, verify_ha_circuit(2, out, cut_w=0.0)


@lru_cache(maxsize=None)
def unique_ground_runs():
    """Simulations whose target has a single ground state."""
    reps = []
    HB = build_HB(4)
    rng = np.random.default_rng(7)
    for _ in range(5):
        extra = tuple(LocalTerm((i, i + 1), 0.02 * random_unit_hermitian(rng, 4)) for i in range(3))
        Ht = Hamiltonian(HB.space, HB.terms + extra)
        reps.append(verify_gap_sim(HB, Ht, trivial_encoding(HB.dims, HB.dims), q=1))
    H = build_from_pauli(4, [(1.0, "XXXX"), (0.4, "ZIII"), (0.3, "IZII"), (0.2, "IIZI"), (0.1, "IIIZ")])
    o = gadget_subdivision(H, target_error=0.05, q=1)
    reps.append(verify_gap_sim(H, o.hamiltonian, o.encoding, q=1, P_anc=o.known_P_anc))
    H = build_from_pauli(3, [(1.0, "ZZZ"), (0.6, "XII"), (0.4, "IXI"), (0.2, "IIX")])
    o = gadget_3to2(H, target_error=0.05, q=1)
    reps.append(verify_gap_sim(H, o.hamiltonian, o.encoding, q=1, P_anc=o.known_P_anc))
    return reps


# --- criteria --------------------------------------------------------------------

def test_c01_ha_ground_structure(acceptance):
    with criterion(acceptance, 1, "H_A ground structure, n = 2..10", 10):
        for n in range(2, 11):
            g = ground_data(spectrum(build_HA(n)), w_max=0.0)
            assert g.rank_q == n + 1
            assert abs(g.gamma - 1) <= 1e-10
            assert g.w == 0


def test_c02_hb_ground_structure(acceptance):
    with criterion(acceptance, 2, "H_B unique Dicke ground state, even n = 2..10", 30):
        for n in range(2, 11, 2):
            s = eig_dense(build_HB(n))
            g = ground_data(s, q=1)
            assert s.eigenvalues[1] - s.eigenvalues[0] > 1e-6
            overlap = abs(np.vdot(dicke_state(n), g.basis[:, 0])) ** 2
            assert overlap >= 1 - 1e-10
            assert g.gamma >= 1 - 1e-10


def test_c03_tree_diluter(acceptance):
    with criterion(acceptance, 3, "tree diluter, n = 4..10", 30):
        for n, (o, r) in tree_runs().items():
            assert r.passed and r.delta <= 1e-9
            assert abs(r.gamma_tilde - 1) <= 1e-10 and r.w_tilde == 0
            assert metrics(o.hamiltonian).as_list() == [2, n - 1, 1.0]
            lb = math.sqrt(1 - 1 / (1 + math.ceil(n / 2)))
            assert r.epsilon_lb >= lb - 1e-6


def test_c04_star_weak_diluter(acceptance, frozen):
    with criterion(acceptance, 4, "star weak diluter, n = 4..6, Δ ∈ {25, 100, 400}", 60):
        runs = star_runs()
        for (n, d), (o, r) in runs.items():
            assert r.passed and r.weak
            assert r.epsilon <= math.sqrt(2 / d) * 1.05
            expect = []
            for m in range(n + 1):
                expect += frozen["star_levels"][f"{m},{d}"] * math.comb(n, m)
            vals = eig_dense(o.hamiltonian).eigenvalues
            assert np.allclose(vals, sorted(expect), atol=1e-8)
        for n in (4, 5, 6):
            eps = [runs[n, d][1].epsilon for d in STAR_DELTAS]
            assert abs(loglog_slope(STAR_DELTAS, eps) + 0.5) <= 0.1


def test_c05_classical_dr(acceptance):
    with criterion(acceptance, 5, "classical degree reduction, H_A(4..6) and 20 random", 60):
        for H, o, r in classical_runs():
            assert r.passed and r.delta <= 1e-9
            assert metrics(o.hamiltonian).degree_r <= 3
            strength = o.notes["penalty_strength"]
            a = diag_spectrum(H).eigenvalues
            b, _ = diagonal_states_below(o.hamiltonian, strength - 1e-6)
            a = np.sort(a[a < strength - 1e-6])
            b = np.sort(b)
            assert a.shape == b.shape and np.allclose(a, b, atol=1e-9, rtol=0)


def test_c06_perturbation_bound(acceptance):
    with criterion(acceptance, 6, "perturbed ground projector, H_A(4) and H_B(4)", 60):
        rng = np.random.default_rng(11)
        for H, g in ((build_HA(4), None), (build_HB(4), 1)):
            M = assemble_dense(H)
            quasi = ground_data(eig_dense(M), q=g, w_max=None if g else 0.0)
            kappa = (1 - quasi.w) * quasi.gamma / 8
            for _ in range(100):
                scale = rng.uniform(0.1, 1.0)
                r = perturbation_check(M, M + scale * kappa * random_unit_hermitian(rng, 16), quasi, kappa)
                assert r["certified"]
                assert r["proj_err"] < 32 * kappa / quasi.gamma


def test_c07_projector_difference(acceptance):
    with criterion(acceptance, 7, "projector difference bound, 500 random pairs", 30):
        rng = np.random.default_rng(5)
        for k in range(500):
            dim = int(rng.integers(2, 17))
            rb = int(rng.integers(1, dim))
            ra = int(rng.integers(1, rb + 1))
            B = random_basis(rng, dim, rb)
            if k % 2:
                A = random_basis(rng, dim, ra)
            else:
                t = 10 ** rng.uniform(-4, -0.5)
                A = np.linalg.qr(B[:, :ra] + t * random_basis(rng, dim, ra))[0]
            r = projector_difference_property(A, B)
            assert r["norm"] <= lemma_bound(r["max_per_vector_dev"]) + 1e-10


def test_c08_subdivision(acceptance):
    with criterion(acceptance, 8, "subdivision gadget on XXXX", 60):
        tuned, rep, sweep = subdivision_runs()
        m = tuned.notes["measured"]
        assert m["eig_err"] <= 0.05 and m["proj_err"] <= 0.1
        assert rep.passed
        ds = list(sweep)
        assert abs(loglog_slope(ds, [sweep[d].proj_err for d in ds]) + 0.5) <= 0.15


def test_c09_three_to_two(acceptance):
    with criterion(acceptance, 9, "3-to-2 gadget on ZZZ", 60):
        tuned, rep, sweep = three_to_two_runs()
        ds = list(sweep)
        assert abs(loglog_slope(ds, [sweep[d].eig_err for d in ds]) + 0.33) <= 0.15
        assert rep.passed and rep.coherent and rep.epsilon <= 0.1


def test_c10_fork(acceptance):
    with criterion(acceptance, 10, "fork gadget on a 4-coupling star", 120):
        assert pauli_degrees(STAR4, [0]) == {"0Z": 4}
        one = _fork_raw(STAR4, 100.0, [0]).hamiltonian
        assert pauli_degrees(one, [0]) == {"0Z": 2}
        assert pauli_degrees(_fork_raw(one, 100.0, [0]).hamiltonian, [0]) == {"0Z": 1}
        tuned, rep = fork_runs()
        assert tuned.notes["measured"]["eig_err"] <= 0.1
        assert tuned.notes["measured"]["proj_err"] <= 0.1
        assert rep.passed


def test_c11_pipeline(acceptance):
    with criterion(acceptance, 11, "full degree-reduction pipeline on XXXX", 600):
        out, reps = pipeline_runs()
        end = out.notes["end_to_end"]
        assert end["pass"]
        assert end["epsilon"] <= 10 * 0.1
        assert out.notes["bound_respected"]
        assert metrics(out.hamiltonian).locality_k <= 2


def test_c12_circuit_diluter(acceptance):
    with criterion(acceptance, 12, "circuit diluter, n = 2, ε = 0.6", 300):
        out, r = circuit_runs()
        assert r.passed
        assert r.epsilon <= out.notes["predicted"]["epsilon_bound"] + 1e-6
        assert r.w_tilde == 0
        assert r.gamma_tilde >= 1
        assert out.notes["J_out"] == 2.0


def test_c13_correlation_scores(acceptance):
    with criterion(acceptance, 13, "ground-space correlation scores", 30):
        for n in range(4, 9):
            psi = np.zeros(2**n)
            psi[1 << (n - 1)] = psi[1 << (n - 2)] = 1 / math.sqrt(2)
            A = embed(X, [0], [2] * n)
            B = embed(X, [1], [2] * n)
            assert abs(correlation_score(psi, A, B, ha_ground_basis(n)) - 0.5) <= 1e-9
        for n in (4, 6, 8):
            g = dicke_state(n)
            XX = embed(np.kron(X, X), [0, n - 1], [2] * n)
            assert abs(np.vdot(g, XX @ g).real - n / (2 * (n - 1))) <= 1e-9


def all_reports():
    reps = [r for _, r in tree_runs().values()]
    reps += [r for _, r in star_runs().values()]
    reps += [r for _, _, r in classical_runs()]
    reps += [subdivision_runs()[1], three_to_two_runs()[1], fork_runs()[1]]
    reps += pipeline_runs()[1]
    reps.append(circuit_runs()[1])
    return reps


def test_c14_consistency_sweep(acceptance):
    with criterion(acceptance, 14, "consistency of δ, ε and the unique-ground bound", 900):
        reps = all_reports()
        assert len(reps) == 47
        for r in reps:
            eps = r.epsilon if r.epsilon is not None else r.epsilon_ub
            assert r.delta <= 2 * eps + 1e-9
        unique = [r for r in reps + unique_ground_runs() if r.rank_q == 1]
        assert len(unique) >= 7
        for r in unique:
            assert r.epsilon_ub <= lemma_bound(r.delta) + 1e-9
