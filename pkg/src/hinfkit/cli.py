"""Batch front end: load models, synthesize, verify, compare, report.

Model files are JSON documents with a ``kind`` discriminator:

  {"format": 1, "kind": "descriptor", "A": [[...]], "B": [[...]], "E": [[...]]}
      E optional (identity). Matrices are row-major arrays of arrays.

  {"format": 1, "kind": "rational", "M": [[entry, ...], ...], "N": [[...]]}
      entry = {"num": [c0, c1, ...], "den": [...]} with ascending
      coefficients; a bare array is a polynomial numerator over den = [1].

  {"format": 1, "kind": "network", "network_kind": "buffer", "nodes": 3,
   "edges": [[0, 1], [1, 2]], "params": {"a": [1, 2, 3]}}
      network_kind in {buffer, irrigation, thermal, machine, circulant};
      node indices are 0-based.

Exit codes: 0 ok/optimal, 2 schema violation, 3 model invariant violation,
4 certified suboptimal, 5 unstable, 7 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

import numpy as np

from . import __version__, freqgrid, netgen, synth, verify
from .exceptions import (
    DimensionError,
    HinfkitError,
    HypothesisViolationError,
    InvalidInputError,
    NotRealGainError,
    PoleAtEvaluationError,
    PoleOnAxisError,
    SchemaError,
    SingularMatrixError,
    StandingAssumptionError,
    UnstabilizableError,
)
from .baseline import AreProblem, gamma_bisect
from .netgen import NetworkModel
from .sysmodel import DescriptorPlant, Gain, RationalPlant, close_loop, modal_plant

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_INVARIANT = 3
EXIT_SUBOPTIMAL = 4
EXIT_UNSTABLE = 5
EXIT_INTERNAL = 7

_INVARIANT_ERRORS = (
    InvalidInputError,
    HypothesisViolationError,
    SingularMatrixError,
    StandingAssumptionError,
    DimensionError,
    NotRealGainError,
    UnstabilizableError,
    PoleAtEvaluationError,
    PoleOnAxisError,
)


# ---------------------------------------------------------------------------
# model loading


def _matrix(doc, key, where):
    if key not in doc:
        raise SchemaError(f"missing required field '{where}{key}'", field=where + key)
    try:
        m = np.array(doc[key], dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(f"field '{where}{key}' is not a numeric matrix", field=where + key)
    if m.ndim != 2:
        raise SchemaError(f"field '{where}{key}' must be a 2-d array", field=where + key)
    return m


def _poly_entry(raw, where):
    if isinstance(raw, dict):
        num = raw.get("num")
        den = raw.get("den", [1.0])
    else:
        num, den = raw, [1.0]
    try:
        num = [float(x) for x in num]
        den = [float(x) for x in den]
    except (TypeError, ValueError):
        raise SchemaError(f"entry '{where}' must hold numeric coefficient arrays", field=where)
    return num, den


def _rational_matrix(doc, key):
    if key not in doc:
        raise SchemaError(f"missing required field '{key}'", field=key)
    rows = doc[key]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise SchemaError(f"field '{key}' must be a nonempty array of rows", field=key)
    return [
        [_poly_entry(e, f"{key}[{i}][{j}]") for j, e in enumerate(row)]
        for i, row in enumerate(rows)
    ]


def load_model(path):
    """Parse and validate a model file; returns a plant or a NetworkModel."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read model file {path}: {exc}")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"model file {path} is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise SchemaError("model document must be a JSON object")
    if int(doc.get("format", 1)) != 1:
        raise SchemaError(f"unsupported format version {doc.get('format')}", field="format")
    kind = doc.get("kind")
    if kind == "descriptor":
        A = _matrix(doc, "A", "")
        B = _matrix(doc, "B", "")
        E = _matrix(doc, "E", "") if "E" in doc else np.eye(A.shape[0])
        return DescriptorPlant(E, A, B)
    if kind == "rational":
        plant = RationalPlant(_rational_matrix(doc, "M"), _rational_matrix(doc, "N"))
        plant.check_standing_assumptions()
        return plant
    if kind == "network":
        net = NetworkModel(
            kind=doc.get("network_kind", ""),
            nodes=doc.get("nodes", 0),
            edges=doc.get("edges", []),
            params=doc.get("params", {}),
        )
        _compile_for(net)  # validate invariants now
        return net
    raise SchemaError(f"unknown model kind {kind!r}", field="kind")


def _compile_for(net: NetworkModel):
    if net.kind == "machine":
        return netgen.compile_machine(net)
    return netgen.compile_network(net)


def _digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# ---------------------------------------------------------------------------
# gain synthesis per model kind


def _synthesize(model, args):
    """Canonical gain and the rational plant used to certify it."""
    omega0 = args.omega0
    weighted = getattr(args, "weighted", None)
    if isinstance(model, DescriptorPlant):
        plant = model.to_rational()
        gain = synth.descriptor_gain(model)
    elif isinstance(model, RationalPlant):
        plant = model
        gain = synth.closed_form_gain(model, omega0)
    elif model.kind == "buffer":
        plant = netgen.compile_buffer(model).to_rational()
        gain = synth.buffer_law(model)
    elif model.kind == "machine":
        if weighted:
            raise InvalidInputError("weighted synthesis is not defined for machine networks")
        m, d, L = netgen.compile_machine(model)
        return synth.machine_modal_gains(m, d, L), None
    else:
        descriptor = netgen.compile_network(model)
        plant = descriptor.to_rational()
        gain = synth.descriptor_gain(descriptor)
    if weighted:
        Q = _matrix(_load_json(args.weighted), "Q", "")
        gain = synth.weighted_gain(plant, Q, omega0)
    return gain, plant


def _plant_of(model):
    """Rational plant for certification, without synthesizing any gain."""
    if isinstance(model, DescriptorPlant):
        return model.to_rational()
    if isinstance(model, RationalPlant):
        return model
    if model.kind == "machine":
        return None
    return netgen.compile_network(model).to_rational()


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read JSON file {path}: {exc}")


def _load_gain(path, omega0) -> Gain:
    doc = _load_json(path)
    K = _matrix(doc if isinstance(doc, dict) else {"K": doc}, "K", "")
    return Gain(K, omega0, "external")


# ---------------------------------------------------------------------------
# reports


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.bool_, np.floating, np.integer)):
        return x.item()
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, int, float, str)) or x is None:
        return x
    return str(x)


def _emit(doc, out_path):
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _gain_report(gain: Gain) -> dict:
    pattern = verify.sparsity_pattern(gain)
    return {
        "K": gain.K.tolist(),
        "omega0": gain.omega0,
        "formula": gain.formula,
        "metadata": _jsonable(gain.metadata),
        "sparsity": {"zeros": pattern.zeros, "nonzeros": pattern.nonzeros},
    }


def _model_header(path, model) -> dict:
    kind = (
        "descriptor"
        if isinstance(model, DescriptorPlant)
        else "rational"
        if isinstance(model, RationalPlant)
        else f"network/{model.kind}"
    )
    return {"path": str(path), "digest": _digest(path), "kind": kind}


def _structure_checks(model) -> dict:
    """Descriptor-plant structure tests; the sweep-free route and its fallback."""
    if isinstance(model, NetworkModel):
        if model.kind == "machine":
            return {}
        model = netgen.compile_network(model)
    if not isinstance(model, DescriptorPlant):
        return {}
    sym = verify.symmetric_commuting_check(model)
    out = {
        "symmetric_commuting": {
            "holds": sym.holds,
            "symmetric_E": sym.symmetric_E,
            "positive_definite_E": sym.positive_definite_E,
            "symmetric_A": sym.symmetric_A,
            "negative_definite_A": sym.negative_definite_A,
            "commuting": sym.commuting,
        }
    }
    if not sym.holds:
        dom = verify.zero_peak_inequality(model)
        stab = verify.pencil_stability(model, synth.descriptor_gain(model))
        out["fallback"] = {
            "zero_peak_inequality": {
                "holds": dom.holds,
                "min_eigenvalue": dom.min_eigenvalue,
                "omega_at_min": dom.omega_at_min,
                "checked_up_to": dom.checked_up_to,
                "tail_rule": dom.tail_rule,
            },
            "pencil_stability": {"stable": stab.stable, "abscissa": stab.abscissa},
        }
    return out


# ---------------------------------------------------------------------------
# subcommands


def _cmd_synth(args):
    model = load_model(args.model)
    gain, _ = _synthesize(model, args)
    report = {
        "tool": {"name": "hinfkit", "version": __version__},
        "model": _model_header(args.model, model),
        "gain": _gain_report(gain),
    }
    if isinstance(model, NetworkModel) and model.kind == "irrigation":
        _, H = netgen.compile_irrigation(model, unit_h=args.unit_h)
        report["disturbance_map"] = H.tolist()
    _emit(report, args.out)
    return EXIT_OK


def _grid_from(args):
    return freqgrid.default_grid(args.grid_min, args.grid_max, args.points)


def _cmd_verify(args):
    model = load_model(args.model)
    if args.gain:
        if isinstance(model, NetworkModel) and model.kind == "machine":
            raise InvalidInputError("machine networks certify their own modal law only")
        gain = _load_gain(args.gain, args.omega0)
        plant = _plant_of(model)
    else:
        gain, plant = _synthesize(model, args)

    report = {
        "tool": {"name": "hinfkit", "version": __version__},
        "model": _model_header(args.model, model),
        "gain": _gain_report(gain),
        "tolerances": {"tol": args.tol},
        "checks": _structure_checks(model),
    }

    if isinstance(model, NetworkModel) and model.kind == "machine":
        verdict = _verify_machine(model, gain, args, report)
    else:
        cert = verify.certify_optimality(plant, gain, tol=args.tol, grid=_grid_from(args))
        report["certificate"] = cert.to_dict()
        verdict = cert.verdict
    _emit(report, args.out)
    if verdict == "optimal":
        return EXIT_OK
    return EXIT_UNSTABLE if verdict == "unstable" else EXIT_SUBOPTIMAL


def _verify_machine(model, gain, args, report):
    """Certify every decoupled mode; the overall norm is the worst modal norm."""
    m, d, L = netgen.compile_machine(model)
    certs = []
    for mode in gain.metadata["modes"]:
        plant = modal_plant(m, d, mode["eigenvalue"])
        mode_gain = Gain([[mode["gain"]]], omega0=mode["omega0"], formula="modal")
        certs.append(
            verify.certify_optimality(plant, mode_gain, tol=args.tol, grid=_grid_from(args))
        )
    worst = max(certs, key=lambda c: c.hinf_norm)
    report["certificate"] = worst.to_dict()
    report["modes"] = [c.to_dict() for c in certs]
    if any(c.verdict == "unstable" for c in certs):
        return "unstable"
    if all(c.verdict == "optimal" for c in certs):
        return "optimal"
    return "stable-but-suboptimal"


def _cmd_lower_bound(args):
    model = load_model(args.model)
    plant = _plant_of(model)
    if plant is None:
        raise InvalidInputError("lower-bound requires a model with a single plant form")
    bound = verify.lower_bound(plant, grid=_grid_from(args))
    _emit(
        {
            "tool": {"name": "hinfkit", "version": __version__},
            "model": _model_header(args.model, model),
            "lower_bound": {"value": bound.value, "omega": bound.omega},
        },
        args.out,
    )
    return EXIT_OK


def _cmd_compare(args):
    model = load_model(args.model)
    if isinstance(model, RationalPlant):
        raise InvalidInputError("compare requires a descriptor or network model")
    if isinstance(model, NetworkModel):
        if model.kind == "machine":
            raise InvalidInputError(
                "compare requires a model with a single descriptor form; "
                "machine networks are verified per mode"
            )
        descriptor = netgen.compile_network(model)
    else:
        descriptor = model
    gain, plant = _synthesize(model, args)
    cert = verify.certify_optimality(plant, gain, tol=args.tol, grid=_grid_from(args))
    gamma_star, K_are = gamma_bisect(AreProblem.from_descriptor(descriptor), tol=args.tol)
    are_gain = Gain(K_are, 0.0, "external")
    closed = verify.sparsity_pattern(gain)
    dense = verify.sparsity_pattern(are_gain)
    _emit(
        {
            "tool": {"name": "hinfkit", "version": __version__},
            "model": _model_header(args.model, model),
            "closed_form": {
                "gain": _gain_report(gain),
                "certificate": cert.to_dict(),
            },
            "baseline": {
                "gamma_star": gamma_star,
                "K": K_are.tolist(),
                "sparsity": {"zeros": dense.zeros, "nonzeros": dense.nonzeros},
            },
            "norm_ratio": cert.hinf_norm / gamma_star if gamma_star else None,
            "sparsity_contrast": {"closed_form_zeros": closed.zeros, "baseline_zeros": dense.zeros},
        },
        args.out,
    )
    return EXIT_OK


def _cmd_freqresp(args):
    model = load_model(args.model)
    if args.gain:
        gain = _load_gain(args.gain, args.omega0)
        plant = _plant_of(model)
    else:
        gain, plant = _synthesize(model, args)
    if plant is None:
        raise InvalidInputError("freqresp requires a model with a single plant form")
    grid = _grid_from(args)
    desc = plant.descriptor
    rows = []
    if desc is not None:
        ss = close_loop(desc, gain)
        for w in grid:
            rows.append((float(w), float(np.linalg.norm(ss.transfer(w), 2))))
    else:
        from .sysmodel import eval_closed_rational

        for w in grid:
            try:
                rows.append((float(w), float(np.linalg.norm(eval_closed_rational(plant, gain, w), 2))))
            except PoleAtEvaluationError:
                continue
    vmax = max(v for _, v in rows)
    lines = ["omega,sigma_max,is_peak"]
    marked = False
    for w, v in rows:
        peak = int(not marked and v >= vmax * (1.0 - 1e-9))
        marked = marked or bool(peak)
        lines.append(f"{w!r},{v!r},{peak}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _floats(text):
    return [float(x) for x in str(text).split(",") if x.strip() != ""]


def _pairs(text):
    out = []
    if not str(text).strip():
        return out
    for item in str(text).split(","):
        i, j = item.strip().split("-")
        out.append((int(i), int(j)))
    return out


def _weighted_pairs(text):
    out = []
    if not str(text).strip():
        return out
    for item in str(text).split(","):
        edge, _, w = item.strip().partition(":")
        i, j = edge.split("-")
        out.append((int(i), int(j), float(w) if w else 1.0))
    return out


def _cmd_generate(args):
    kind = args.network_kind
    doc = {"format": 1, "kind": "network", "network_kind": kind}
    if kind == "buffer":
        rates = _floats(args.rates)
        doc.update(
            nodes=args.nodes or len(rates),
            edges=[list(e) for e in _pairs(args.edges)],
            params={"a": rates},
        )
    elif kind == "irrigation":
        alpha, beta, tau = _floats(args.alpha), _floats(args.beta), _floats(args.tau)
        n = args.nodes or max(len(alpha), len(beta), len(tau))
        expand = lambda v: v * n if len(v) == 1 else v
        doc.update(
            nodes=n,
            edges=[],
            params={"alpha": expand(alpha), "beta": expand(beta), "tau": expand(tau)},
        )
    elif kind == "thermal":
        masses = _floats(args.masses)
        leak = _floats(args.leak)
        n = args.nodes or len(masses)
        doc.update(
            nodes=n,
            edges=[],
            params={
                "masses": masses,
                "heat_capacity": args.heat_capacity,
                "leak": leak,
                "conduction": [list(t) for t in _weighted_pairs(args.conduction)],
                "outdoor": args.outdoor,
            },
        )
    elif kind == "machine":
        doc.update(
            nodes=args.nodes,
            edges=[],
            params={
                "mass": args.mass,
                "damping": args.damping,
                "edges": [list(t) for t in _weighted_pairs(args.edges)],
            },
        )
    elif kind == "circulant":
        doc.update(nodes=0, edges=[], params={"row": _floats(args.row)})
    else:
        raise SchemaError(f"unknown network kind {kind!r}")
    net = NetworkModel(
        kind=kind, nodes=doc.get("nodes", 0), edges=doc.get("edges", []), params=doc["params"]
    )
    _compile_for(net)  # validate before writing
    _emit(doc, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p, grid=True):
    p.add_argument("--out", default=None, help="write the report to this path instead of stdout")
    p.add_argument("--tol", type=float, default=1e-6, help="certification tolerance")
    p.add_argument("--omega0", type=float, default=0.0, help="target peak frequency")
    if grid:
        p.add_argument("--grid-min", type=float, default=freqgrid.GRID_MIN)
        p.add_argument("--grid-max", type=float, default=freqgrid.GRID_MAX)
        p.add_argument("--points", type=int, default=freqgrid.GRID_POINTS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hinfkit",
        description="Closed-form H-infinity state feedback: synthesis, certification, reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="emit the closed-form gain for a model")
    p.add_argument("model")
    p.add_argument("--weighted", default=None, help="JSON file with an output weight Q")
    p.add_argument(
        "--unit-h",
        action="store_true",
        help="irrigation: report the unit-entry disturbance map instead of the 1/alpha-scaled one",
    )
    _add_common(p, grid=False)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("verify", help="certify the gain; exit code encodes the verdict")
    p.add_argument("model")
    p.add_argument("--gain", default=None, help="JSON file with a gain matrix K to verify")
    p.add_argument("--weighted", default=None, help=argparse.SUPPRESS)
    _add_common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("lower-bound", help="synthesis lower bound over frequency")
    p.add_argument("model")
    p.add_argument("--weighted", default=None, help=argparse.SUPPRESS)
    _add_common(p)
    p.set_defaults(func=_cmd_lower_bound)

    p = sub.add_parser("compare", help="closed-form gain versus Riccati bisection baseline")
    p.add_argument("model")
    p.add_argument("--weighted", default=None, help=argparse.SUPPRESS)
    _add_common(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("freqresp", help="per-frequency closed-loop gain table (CSV)")
    p.add_argument("model")
    p.add_argument("--gain", default=None, help="JSON file with a gain matrix K")
    p.add_argument("--weighted", default=None, help=argparse.SUPPRESS)
    _add_common(p)
    p.set_defaults(func=_cmd_freqresp)

    p = sub.add_parser("generate", help="write a network model file")
    p.add_argument("network_kind", choices=netgen.NETWORK_KINDS)
    p.add_argument("--nodes", type=int, default=0)
    p.add_argument("--edges", default="", help="comma list like 0-1,1-2 (machine: 0-1:w)")
    p.add_argument("--rates", default="", help="buffer: per-node rates a_i")
    p.add_argument("--alpha", default="", help="irrigation: per-pool alpha (or one value)")
    p.add_argument("--beta", default="", help="irrigation: per-pool beta")
    p.add_argument("--tau", default="", help="irrigation: per-pool tau")
    p.add_argument("--masses", default="", help="thermal: per-room masses")
    p.add_argument("--heat-capacity", type=float, default=1.0)
    p.add_argument("--leak", default="", help="thermal: per-room leak coefficients")
    p.add_argument("--conduction", default="", help="thermal: 0-1:p pairs")
    p.add_argument("--outdoor", type=float, default=0.0)
    p.add_argument("--mass", type=float, default=1.0, help="machine: inertia")
    p.add_argument("--damping", type=float, default=1.0, help="machine: damping")
    p.add_argument("--row", default="", help="circulant: generator row")
    p.add_argument("--unit-h", action="store_true", help="irrigation: unit disturbance columns")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_generate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        field = f" (field: {exc.field})" if exc.field else ""
        print(f"hinfkit: schema error: {exc}{field}", file=sys.stderr)
        return EXIT_SCHEMA
    except _INVARIANT_ERRORS as exc:
        print(f"hinfkit: invalid model: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except HinfkitError as exc:
        print(f"hinfkit: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # pragma: no cover - last-resort mapping to exit 7
        print(f"hinfkit: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
