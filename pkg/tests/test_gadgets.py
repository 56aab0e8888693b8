import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapsim.hamcore import CapExceeded, assemble_dense, build_from_pauli, metrics
from gapsim.spectral import low_spectrum
from gapsim.constructions import (
    GadgetPlan,
    already_reduced,
    build_HA,
    compose_outputs,
    fork_couplings,
    full_dr_pipeline,
    gadget_3to2,
    gadget_errors,
    gadget_fork,
    gadget_subdivision,
    limit_check,
    pauli_degrees,
    pauli_targets,
    plan_pipeline,
    rescale,
    tune_delta,
)
from gapsim.constructions.gadgets import _fork_raw, _subdivision_raw, _three_to_two_raw
from oracles import reference as ref

XXXX = build_from_pauli(4, [(1.0, "XXXX")])
ZZZ = build_from_pauli(3, [(1.0, "ZZZ")])
STAR4 = build_from_pauli(5, [(1.0, "ZXIII"), (1.0, "ZIXII"), (1.0, "ZIIXI"), (1.0, "ZIIIX")])


def slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def test_pauli_targets_detects_products():
    H = build_from_pauli(3, [(2.0, "XZI"), (0.5, "IIY")])
    t = pauli_targets(H)
    assert [(x.coef, x.ops) for x in t] == [(2.0, ((0, "X"), (1, "Z"))), (0.5, ((2, "Y"),))]


def test_gadget_plan_validation():
    with pytest.raises(ValueError):
        GadgetPlan("merge", [], 1.0, {})
    with pytest.raises(ValueError):
        GadgetPlan("fork", [], 0.0, {})


def test_subdivision_matches_oracle(frozen):
    for d in (1e2, 1e3, 1e4):
        vals = np.linalg.eigvalsh(assemble_dense(_subdivision_raw(XXXX, d).hamiltonian))[:9]
        assert np.allclose(vals, frozen["subdivision_xxxx"][str(d)], atol=1e-9)


def test_subdivision_locality_contract():
    out = _subdivision_raw(build_from_pauli(5, [(1.0, "XXXXX")]), 10.0)
    k = sorted(t.locality for t in out.hamiltonian.terms if t.locality > 1)
    assert k == [3, 4]
    with pytest.raises(ValueError):
        _subdivision_raw(XXXX, 10.0, split=4)


@given(st.text(alphabet="XYZ", min_size=4, max_size=4),
       st.floats(0.3, 1.5), st.booleans())
def test_subdivision_reproduces_random_product(word, c, negative):
    coef = -c if negative else c
    H = build_from_pauli(4, [(coef, word)])
    err = gadget_errors(H, _subdivision_raw(H, 1e5))
    assert err.eig_err < 1e-2 and err.proj_err < 5e-2


def test_three_to_two_matches_oracle(frozen):
    for d in (1e3, 1e4, 1e5, 1e6):
        vals = np.linalg.eigvalsh(assemble_dense(_three_to_two_raw(ZZZ, d).hamiltonian))[:5]
        assert np.allclose(vals, frozen["three_to_two_zzz"][str(d)], atol=1e-8)


def test_three_to_two_outputs_two_local():
    out = _three_to_two_raw(ZZZ, 1e3)
    assert metrics(out.hamiltonian).locality_k == 2


def test_three_to_two_rejects_non_three_local():
    with pytest.raises(ValueError):
        _three_to_two_raw(build_from_pauli(3, [(1.0, "ZZI")]), 10.0, targets=[0])


def test_three_to_two_slope(frozen):
    target = np.array(frozen["three_to_two_target"])
    ds = [1e3, 1e4, 1e5, 1e6]
    errs = [np.max(np.abs(np.array(frozen["three_to_two_zzz"][str(d)]) - target)) for d in ds]
    assert slope(ds, errs) == pytest.approx(-1 / 3, abs=0.15)


def test_fork_matches_oracle(frozen):
    for d in (1e2, 1e3, 1e4):
        out = _fork_raw(STAR4, d, [0])
        assert out.hamiltonian.n == 7
        vals = np.linalg.eigvalsh(assemble_dense(out.hamiltonian))[:frozen["fork_rank"] + 1]
        assert np.allclose(vals, frozen["fork_star"][str(d)], atol=1e-9)


def test_fork_halves_degree():
    assert pauli_degrees(STAR4, [0]) == {"0Z": 4}
    one = _fork_raw(STAR4, 100.0, [0]).hamiltonian
    assert pauli_degrees(one, [0]) == {"0Z": 2}
    two = _fork_raw(one, 100.0, [0]).hamiltonian
    assert pauli_degrees(two, [0]) == {"0Z": 1}


def test_fork_single_coupling_is_noop():
    H = build_from_pauli(2, [(1.0, "ZX")])
    out = _fork_raw(H, 100.0, [0])
    assert out.hamiltonian.n == 2
    assert np.allclose(assemble_dense(out.hamiltonian), assemble_dense(H))


def test_fork_couplings_grouping():
    g = fork_couplings(STAR4, [0])
    assert list(g) == [(0, "Z")] and [k for k, _, _ in g[(0, "Z")]] == [1, 2, 3, 4]


def test_tuned_subdivision_meets_target():
    out = gadget_subdivision(XXXX, target_error=0.05)
    m = out.notes["measured"]
    assert m["eig_err"] <= 0.05 and m["proj_err"] <= 0.05
    assert out.notes["rescale"] >= 1


def test_tune_delta_is_power_of_two_multiple():
    d = tune_delta(lambda x: _subdivision_raw(XXXX, x), XXXX, 0.05, 1.0)
    assert math.log2(d) == int(math.log2(d))


def test_tune_delta_cap():
    with pytest.raises(CapExceeded):
        tune_delta(lambda x: _subdivision_raw(XXXX, x), XXXX, 1e-12, 1.0, cap_factor=4)


def test_gadget_needs_delta_or_target():
    with pytest.raises(ValueError):
        gadget_subdivision(XXXX)
    with pytest.raises(ValueError):
        gadget_subdivision(XXXX, delta=-1.0)


def test_rescale_records_factor():
    out = rescale(_subdivision_raw(XXXX, 10.0), 2.0)
    assert out.notes["rescale"] == 2.0
    a = assemble_dense(out.hamiltonian)
    b = assemble_dense(_subdivision_raw(XXXX, 10.0).hamiltonian)
    assert np.allclose(a, 2 * b)


def test_limit_check_extrapolates():
    r = limit_check(ZZZ, lambda d: _three_to_two_raw(ZZZ, d), (1e5, 1e6))
    assert np.allclose(r["limit"], r["target"], atol=5e-3)


def test_low_band_error_decreases_with_delta():
    errs = [gadget_errors(XXXX, _subdivision_raw(XXXX, d)).eig_err for d in (1e2, 1e3, 1e4, 1e5)]
    assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_gadget_3to2_tuned():
    out = gadget_3to2(ZZZ, target_error=0.1)
    assert out.notes["measured"]["eig_err"] <= 0.1


def test_gadget_fork_tuned():
    out = gadget_fork(STAR4, original=[0], target_error=0.1)
    assert out.notes["measured"]["eig_err"] <= 0.1
    assert pauli_degrees(out.hamiltonian, [0]) == {"0Z": 2}


def test_plan_for_four_local_term():
    plan = plan_pipeline(XXXX)
    assert [p["stage"] for p in plan] == ["subdivision", "three_to_two", "isolation"]
    assert plan[-1]["sites"] == 9


def test_already_reduced_models():
    assert already_reduced(build_HA(4)) and plan_pipeline(build_HA(4)) == []
    out, reps = full_dr_pipeline(build_HA(4), 0.1)
    assert reps == [] and out.hamiltonian is not None


def test_pipeline_site_cap_reports_plan_only():
    out, reps = full_dr_pipeline(XXXX, 0.1, site_cap=6)
    assert reps == [] and out.notes["executed"] is False and out.notes["plan"]


def test_pipeline_rejects_nonpositive_target():
    with pytest.raises(ValueError):
        full_dr_pipeline(XXXX, 0.0)


def test_compose_outputs_requires_trivial_encodings():
    a = _subdivision_raw(XXXX, 10.0)
    b = _three_to_two_raw(a.hamiltonian, 10.0)
    c = compose_outputs(a, b)
    assert c.encoding.system_dims == (2,) * 4 and c.known_P_anc.shape == (2**3, 1)
    assert len(c.notes["stages"]) == 2


def test_schur_band_of_tuned_chain_is_finite():
    out = gadget_subdivision(XXXX, target_error=0.05)
    s = low_spectrum(out.hamiltonian, 9)
    assert np.all(np.isfinite(s.eigenvalues))
    assert np.max(np.abs(s.eigenvalues[:8] - ref.low(ref.word("XXXX"), 8))) < 0.06
