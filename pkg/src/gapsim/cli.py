"""Command-line front end.

Exit codes: 0 pass, 1 verification failure, 2 bad input, 3 cap exceeded.
Every option can also be set through a GAPSIM_<COMMAND>_<OPTION> variable.
"""
from __future__ import annotations

import csv
import functools
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import click
import numpy as np

from . import __version__
from .circuitham import circuit_dumps, counting_circuit, ha_circuit_diluter, idling_pad, pe_degree_reducer
from .constructions import (
    ConstructionOutput,
    build_HA,
    build_HB,
    classical_dr,
    dicke_state,
    full_dr_pipeline,
    gadget_3to2,
    gadget_errors,
    gadget_fork,
    gadget_subdivision,
    star_weak_diluter,
    tree_diluter,
    tree_ground_states,
    vertex_cover_hamiltonian,
)
from .correlation import correlation_score, decay_profile, label_state, profile_csv
from .encver import trivial_encoding, verify_gap_sim
from .hamcore import (
    DENSE_CAP_DIM,
    PAULI,
    CapExceeded,
    build_from_pauli,
    dumps,
    embed,
    loads,
    matrix_to_json,
    metrics,
)
from .spectral import ground_data, spectrum

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3
CONSTRUCT_KINDS = ("ha", "hb", "tree", "star", "classical-dr", "vertex-cover", "gadget",
                   "pipeline", "circuit-diluter", "pe-dr")
GADGET_KINDS = ("subdivision", "3to2", "fork")
SWEEP_KINDS = ("star", "subdivision", "3to2")


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    out: str | None = None
    thresholds: dict = field(default_factory=dict)
    cap_dim: int = DENSE_CAP_DIM
    seed: int = 0

    def __post_init__(self):
        if self.cap_dim <= 0:
            raise ValueError("caps must be positive")


# --- output helpers -------------------------------------------------------------------

def clean(x):
    """JSON-safe copy with floats rounded to 12 significant digits."""
    if isinstance(x, dict):
        return {str(k): clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(x, complex):
        return [clean(x.real), clean(x.imag)]
    return x


def fmt(x: float) -> str:
    return f"{x:.12g}"


def emit_json(obj, out: str | None = None):
    text = json.dumps(clean(obj), sort_keys=True, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)


def sidecar_path(out: str) -> Path:
    p = Path(out)
    return p.with_name(p.stem + ".notes.json") if p.suffix == ".json" else Path(out + ".notes.json")


def array_to_json(a) -> dict | None:
    if a is None:
        return None
    a = np.asarray(a)
    return {"shape": list(a.shape), "data": matrix_to_json(a)}


def array_from_json(d) -> np.ndarray | None:
    if d is None:
        return None
    flat = np.array([complex(re, im) for re, im in d["data"]])
    return flat.reshape(d["shape"])


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kw):
        try:
            return fn(*args, **kw)
        except CapExceeded as exc:
            click.echo(f"cap exceeded: {exc}", err=True)
            sys.exit(EXIT_CAP)
        except (ValueError, KeyError, json.JSONDecodeError, OSError) as exc:
            click.echo(f"input error: {exc}", err=True)
            sys.exit(EXIT_INPUT)
    return wrapper


def load_hamiltonian(path: str):
    return loads(Path(path).read_text())


def parse_band(text: str | None) -> tuple[float, float] | None:
    if text is None:
        return None
    try:
        lo, hi = text.split("..")
        return float(lo), float(hi)
    except ValueError:
        raise ValueError(f"band must look like lo..hi, got {text!r}") from None


def parse_floats(text: str | None) -> list[float]:
    if not text:
        return []
    return [float(v) for v in text.split(",") if v.strip()]


def parse_edges(text: str) -> list[tuple[int, ...]]:
    edges = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if chunk:
            edges.append(tuple(int(v) for v in chunk.split("-")))
    return edges


def write_construction(out_obj, out: str | None, cfg: RunConfig):
    H = out_obj.hamiltonian
    m = metrics(H)
    enc = out_obj.encoding
    side = {
        "notes": out_obj.notes,
        "metrics": {"k": m.locality_k, "r": m.degree_r, "M": m.term_count_M, "J": m.strength_J},
        "encoding": {"variant": enc.variant, "system_dims": list(enc.system_dims),
                     "simulator_dims": list(enc.simulator_dims),
                     "system_sites": list(enc.system_sites)},
        "known_P_anc": array_to_json(out_obj.known_P_anc),
        "config": asdict(cfg),
        "version": __version__,
    }
    if out:
        Path(out).write_text(dumps(H) + "\n")
        emit_json(side, str(sidecar_path(out)))
    summary = {"sites": H.n, "dims": list(H.dims), **side["metrics"]}
    for key in ("predicted", "plan", "end_to_end", "bound_respected", "D", "L", "T"):
        if key in out_obj.notes:
            summary[key] = out_obj.notes[key]
    emit_json(summary)


# --- the command group ----------------------------------------------------------------

@click.group(context_settings={"auto_envvar_prefix": "GAPSIM"})
@click.version_option(__version__)
@click.option("--cap-dim", type=int, default=DENSE_CAP_DIM, show_default=True,
              help="Largest dense dimension allowed.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def main(ctx, cap_dim, seed):
    """Build Hamiltonian simulators and verify them by exact diagonalization."""
    ctx.obj = {"cap_dim": cap_dim, "seed": seed}


def _cfg(ctx, command, **kw) -> RunConfig:
    return RunConfig(command, cap_dim=ctx.obj["cap_dim"], seed=ctx.obj["seed"], **kw)


@main.command()
@click.option("--n", type=int, required=True, help="Number of qubits.")
@click.option("--term", "terms", multiple=True, required=True,
              help="coefficient:PAULISTRING, repeatable.")
@click.option("--out", type=click.Path(dir_okay=False))
@handle_errors
def build(n, terms, out):
    """Hamiltonian from Pauli strings."""
    parsed = []
    for t in terms:
        coef, word = t.split(":")
        parsed.append((float(coef), word.strip()))
    H = build_from_pauli(n, parsed)
    if out:
        Path(out).write_text(dumps(H) + "\n")
    m = metrics(H)
    emit_json({"sites": H.n, "k": m.locality_k, "r": m.degree_r, "M": m.term_count_M,
               "J": m.strength_J})


def _gadget(H, kind, delta, eps):
    if delta is None and eps is None:
        raise ValueError("gadgets need --delta or --eps")
    if kind == "subdivision":
        return gadget_subdivision(H, delta=delta, target_error=eps)
    if kind == "3to2":
        return gadget_3to2(H, delta=delta, target_error=eps)
    if kind == "fork":
        return gadget_fork(H, delta=delta, target_error=eps)
    raise ValueError(f"unknown gadget {kind!r}")


def _need(value, flag):
    if value is None:
        raise ValueError(f"this construction needs {flag}")
    return value


@main.command()
@click.argument("kind", type=click.Choice(CONSTRUCT_KINDS))
@click.option("--n", type=int)
@click.option("--delta", type=float)
@click.option("--eps", type=float)
@click.option("--s", "s_bits", type=int, default=1, show_default=True,
              help="Readout bits for pe-dr.")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--gadget", "gadget_kind", type=click.Choice(GADGET_KINDS), default="subdivision")
@click.option("--edges", help="Vertex-cover hyperedges, e.g. 0-1,1-2.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@handle_errors
def construct(ctx, kind, n, delta, eps, s_bits, input_path, gadget_kind, edges, out):
    """Build a simulator (or model) Hamiltonian and its notes sidecar."""
    cfg = _cfg(ctx, f"construct {kind}", inputs=[input_path] if input_path else [], out=out)
    H_in = load_hamiltonian(input_path) if input_path else None
    if kind in ("ha", "hb", "vertex-cover"):
        n = _need(n, "--n")
        if kind == "ha":
            H = build_HA(n)
        elif kind == "hb":
            H = build_HB(n)
        else:
            H = vertex_cover_hamiltonian(n, parse_edges(edges or ""))
        res = ConstructionOutput(H, trivial_encoding(H.dims, H.dims), None, {"construction": kind})
    elif kind == "tree":
        res = tree_diluter(_need(n, "--n"))
    elif kind == "star":
        res = star_weak_diluter(_need(n, "--n"), _need(delta, "--delta"))
    elif kind == "classical-dr":
        res = classical_dr(H_in if H_in is not None else build_HA(_need(n, "--n")))
    elif kind == "gadget":
        res = _gadget(_need(H_in, "--input"), gadget_kind, delta, eps)
    elif kind == "pipeline":
        res, _ = full_dr_pipeline(_need(H_in, "--input"), _need(eps, "--eps"),
                                  cap_dim=cfg.cap_dim)
    elif kind == "circuit-diluter":
        res = ha_circuit_diluter(_need(n, "--n"), _need(eps, "--eps"), cap_dim=cfg.cap_dim)
    else:
        res = pe_degree_reducer(_need(H_in, "--input"), s=s_bits, eps=eps, cap_dim=cfg.cap_dim)
    write_construction(res, out, cfg)


@main.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--kind", "gadget_kind", type=click.Choice(GADGET_KINDS), required=True)
@click.option("--delta", type=float)
@click.option("--eps", type=float, help="Target ground-band error for Δ tuning.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@handle_errors
def gadgetize(ctx, input_path, gadget_kind, delta, eps, out):
    """Apply one perturbative gadget round to a Pauli Hamiltonian."""
    cfg = _cfg(ctx, "gadgetize", inputs=[input_path], out=out)
    write_construction(_gadget(load_hamiltonian(input_path), gadget_kind, delta, eps), out, cfg)


def _encoding_from_sidecar(H, Ht, sidecar):
    if sidecar is None:
        return trivial_encoding(H.dims, Ht.dims), None
    side = json.loads(Path(sidecar).read_text())
    enc = side.get("encoding") or {}
    if enc.get("variant", "trivial") != "trivial":
        raise ValueError("only trivial encodings can be read from a sidecar")
    sites = enc.get("system_sites") or None
    return trivial_encoding(H.dims, Ht.dims, sites), array_from_json(side.get("known_P_anc"))


@main.command()
@click.argument("target", type=click.Path(exists=True, dir_okay=False))
@click.argument("simulator", type=click.Path(exists=True, dir_okay=False))
@click.option("--sidecar", type=click.Path(exists=True, dir_okay=False),
              help="Notes file of the simulator (encoding and ancilla state).")
@click.option("--weak", is_flag=True, help="Allow an interior band isolated on both sides.")
@click.option("--band", help="Energy window lo..hi; the band starts at the first level >= lo.")
@click.option("--q", type=int, help="Rank of the target ground space.")
@click.option("--eps-max", type=float, default=0.1, show_default=True)
@click.option("--delta-max", type=float, default=0.1, show_default=True)
@click.option("--w-max", type=float, default=0.5, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
@click.pass_context
@handle_errors
def verify(ctx, target, simulator, sidecar, weak, band, q, eps_max, delta_max, w_max, out):
    """Check that SIMULATOR gap-simulates TARGET; exit 0 iff it passes."""
    th = {"eps_max": eps_max, "delta_max": delta_max, "w_max": w_max}
    cfg = _cfg(ctx, "verify", inputs=[target, simulator], out=out, thresholds=th)
    H = load_hamiltonian(target)
    Ht = load_hamiltonian(simulator)
    for M in (H, Ht):
        if M.space.total_dim > cfg.cap_dim:
            raise CapExceeded(f"dimension {M.space.total_dim} exceeds cap {cfg.cap_dim}")
    V, P_anc = _encoding_from_sidecar(H, Ht, sidecar)
    band_start = None
    window = parse_band(band)
    if window is not None:
        vals = spectrum(Ht, cfg.cap_dim).eigenvalues
        hits = np.nonzero((vals >= window[0]) & (vals <= window[1]))[0]
        if not hits.size:
            raise ValueError(f"no simulator level inside {band}")
        band_start = int(hits[0])
    rep = verify_gap_sim(H, Ht, V, q=q, thresholds=th, P_anc=P_anc, weak=weak or band_start is not None,
                         band=band_start)
    doc = rep.to_json()
    doc["config"] = asdict(cfg)
    emit_json(doc, out)
    if out:
        click.echo(f"pass={rep.passed} epsilon={fmt(rep.epsilon_ub)} delta={fmt(rep.delta)}")
    sys.exit(EXIT_PASS if rep.passed else EXIT_FAIL)


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--eps", type=float, help="Pad with idle gates to this incoherence bound.")
@click.option("--out", type=click.Path(dir_okay=False))
@handle_errors
def circuit(n, eps, out):
    """Emit the excitation-counting circuit for n system qubits."""
    c = counting_circuit(n)
    info = {"n": n, "D": c.T, "degree": c.degree, "L": 0}
    if eps is not None:
        pad = idling_pad(c, eps)
        c = pad.circuit
        info.update({"L": pad.L, "chi": pad.chi, "epsilon_bound": pad.bound})
    info["T"] = c.T
    if out:
        Path(out).write_text(circuit_dumps(c) + "\n")
    emit_json(info)


@main.command()
@click.argument("model", type=click.Choice(("ha", "hb", "tree")))
@click.option("--n", type=int, required=True)
@click.option("--out", type=click.Path(dir_okay=False), help="CSV destination for tree profiles.")
@handle_errors
def correlate(model, n, out):
    """Ground-space correlation scores of the model Hamiltonians."""
    X = PAULI["X"]
    if model == "ha":
        H = build_HA(n)
        G = spectrum(H)
        P0 = ground_data(G, w_max=0.0).dense_basis(2**n)
        psi = np.zeros(2**n)
        psi[1 << (n - 1)] = psi[1 << (n - 2)] = 1 / math.sqrt(2)
        score = correlation_score(psi, embed(X, [0], [2] * n), embed(X, [1], [2] * n), P0)
        emit_json({"model": "ha", "n": n, "pair": [0, 1], "score": score})
    elif model == "hb":
        g = dicke_state(n)
        A, B = embed(X, [0], [2] * n), embed(X, [n - 1], [2] * n)
        score = correlation_score(g, A, B, g[:, None])
        emit_json({"model": "hb", "n": n, "pair": [0, n - 1], "score": score,
                   "expected": n / (2 * (n - 1))})
    else:
        res = tree_diluter(n)
        basis = [label_state([(s, 1.0)]) for s in tree_ground_states(n)]
        pairs = [(0, j) for j in range(1, n)]
        states = [label_state([(tree_ground_states(n)[1], 1.0), (tree_ground_states(n)[2], 1.0)])]
        prof = decay_profile(res.hamiltonian, basis, res.encoding, X, pairs, states)
        text = profile_csv(prof.records)
        if out:
            Path(out).write_text(text)
        else:
            click.echo(text, nl=False)
        emit_json({"model": "tree", "n": n, "fit": prof.fit, "reason": prof.reason},
                   None if not out else str(Path(out).with_suffix(".fit.json")))


def _sweep_row(kind, n, delta):
    if kind == "star":
        res = star_weak_diluter(n, delta)
        rep = verify_gap_sim(build_HA(n), res.hamiltonian, res.encoding,
                             P_anc=res.known_P_anc, weak=True)
    else:
        H = build_from_pauli(n, [(1.0, "X" * n if kind == "subdivision" else "Z" * n)])
        res = gadget_subdivision(H, delta=delta) if kind == "subdivision" else gadget_3to2(H, delta=delta)
        err = gadget_errors(H, res)
        return {"pass": "", "epsilon": err.proj_err, "delta_unf": "", "eig_err": err.eig_err}
    return {"pass": rep.passed, "epsilon": rep.epsilon, "delta_unf": rep.delta, "eig_err": ""}


@main.command()
@click.argument("kind", type=click.Choice(SWEEP_KINDS))
@click.option("--n", "ns", default="", help="Comma-separated sizes.")
@click.option("--delta", "deltas", default="", help="Comma-separated Δ values.")
@click.option("--out", type=click.Path(dir_okay=False))
@handle_errors
def sweep(kind, ns, deltas, out):
    """One CSV row per (n, Δ) grid point, in grid order."""
    cols = ["kind", "n", "delta", "pass", "epsilon", "delta_unf", "eig_err", "error"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    failed = False
    for n in [int(v) for v in parse_floats(ns)]:
        for d in parse_floats(deltas):
            row = {"kind": kind, "n": n, "delta": fmt(d), "error": ""}
            try:
                res = _sweep_row(kind, n, d)
                row.update({k: (fmt(v) if isinstance(v, float) else v) for k, v in res.items()})
            except (ValueError, CapExceeded) as exc:
                failed = True
                row.update({"pass": "", "epsilon": "", "delta_unf": "", "eig_err": "",
                            "error": str(exc)})
            w.writerow([row[c] for c in cols])
    if out:
        Path(out).write_text(buf.getvalue())
    else:
        click.echo(buf.getvalue(), nl=False)
    sys.exit(EXIT_FAIL if failed else EXIT_PASS)


@main.command()
@click.argument("reports", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@handle_errors
def report(reports):
    """One summary line per verification report; exit 1 if any failed."""
    ok = True
    for path in reports:
        doc = json.loads(Path(path).read_text())
        passed = bool(doc["pass"])
        ok &= passed
        eps = doc.get("epsilon")
        click.echo(f"{'PASS' if passed else 'FAIL'} {path} delta={fmt(float(doc['delta']))} "
                   f"epsilon={'-' if eps is None else fmt(float(eps))} "
                   f"gamma_tilde={fmt(float(doc['gamma_tilde']))} w_tilde={fmt(float(doc['w_tilde']))}")
    sys.exit(EXIT_PASS if ok else EXIT_FAIL)


@main.command("spectrum")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--k", type=int, default=10, show_default=True)
@click.pass_context
@handle_errors
def spectrum_cmd(ctx, input_path, k):
    """Lowest k eigenvalues of a Hamiltonian file."""
    H = load_hamiltonian(input_path)
    s = spectrum(H, ctx.obj["cap_dim"])
    for v in s.eigenvalues[:k]:
        click.echo(fmt(float(v)))


if __name__ == "__main__":
    main()
