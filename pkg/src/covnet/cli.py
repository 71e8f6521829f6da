"""Command-line interface.

Subcommands: check, simulate, inflate, embezzle, gauss.  Exit codes form a
stable scripting contract: 0 feasible, 1 infeasible, 2 undecided, 3 input
error.  Every command accepts --json for machine-readable stdout.  Matrix
files are the shared JSON format, or headerless CSV for real matrices.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .decompose import Feasibility, SolverOptions, decompose, fast_check_bipartite
from .embezzle import embezzle_complex, embezzle_real
from .gaussian import GaussianNetworkModel, sample, sample_covariance, write_csv
from .inflate import (
    build_inflation,
    compress_by_vectors,
    fourier_extract,
    hadamard_extract,
    inflated_covariance,
    inflation_spec_from_json,
    shift_inflation,
    sign_inflation,
)
from .linalg import as_hermitian, comparison_matrix, matrix_from_json, matrix_to_json, min_eigenvalue
from .network import load_network
from .simulate import build_joint_distribution, check_independence, covariance_matrix, model_from_json

EXIT_FEASIBLE, EXIT_INFEASIBLE, EXIT_UNDECIDED, EXIT_INPUT = 0, 1, 2, 3

_STATUS_EXIT = {
    Feasibility.FEASIBLE: EXIT_FEASIBLE,
    Feasibility.INFEASIBLE: EXIT_INFEASIBLE,
    Feasibility.UNDECIDED: EXIT_UNDECIDED,
}


class InputError(Exception):
    pass


def _load_matrix_file(path) -> np.ndarray:
    try:
        if str(path).endswith(".csv"):
            data = np.loadtxt(path, delimiter=",", ndmin=2)
            return as_hermitian(data)
        with open(path) as fh:
            return matrix_from_json(json.load(fh))
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read matrix '{path}': {exc}") from exc


def _load_network_file(path):
    try:
        return load_network(path)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read network '{path}': {exc}") from exc


def _load_json_file(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read '{path}': {exc}") from exc


def _emit(doc: dict, as_json: bool, lines) -> None:
    if as_json:
        print(json.dumps(doc, indent=1))
    else:
        for line in lines:
            print(line)


# -- check ---------------------------------------------------------------


def cmd_check(args) -> int:
    net = _load_network_file(args.network)
    m = _load_matrix_file(args.matrix)
    opts = SolverOptions(max_sweeps=args.max_sweeps, feasibility_tol=args.tol)

    certificate = None
    diagnostics = {}
    if args.fast_only or net.all_bipartite():
        try:
            fast = fast_check_bipartite(net, m, args.tol)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    else:
        fast = None

    if args.fast_only:
        status = fast
        comp = comparison_matrix(m)
        certificate = {
            "method": "comparison_matrix",
            "comparison_matrix": matrix_to_json(comp),
            "min_eigenvalue": min_eigenvalue(comp),
        }
    else:
        result = decompose(net, m, opts)
        status = result.status
        diagnostics = {
            "sweeps": result.sweeps,
            "residual": result.residual_norm,
        }
        if result.status is Feasibility.FEASIBLE:
            certificate = {"method": "decomposition", **result.decomposition.to_json()}
        elif result.status is Feasibility.INFEASIBLE:
            certificate = {"method": "witness", **result.witness.to_json()}
            diagnostics["inner_product"] = result.witness.inner_product
        elif fast is not None:
            # The comparison-matrix test is exact on bipartite-source
            # networks, so it can still decide when the solver cannot.
            status = fast
            comp = comparison_matrix(m)
            certificate = {
                "method": "comparison_matrix",
                "comparison_matrix": matrix_to_json(comp),
                "min_eigenvalue": min_eigenvalue(comp),
            }

    cert_path = None
    if certificate is not None:
        cert_path = args.certificate
        with open(cert_path, "w") as fh:
            json.dump(certificate, fh, indent=1)

    doc = {"status": status.value, "certificate": cert_path, "diagnostics": diagnostics}
    _emit(
        doc,
        args.json,
        [f"status: {status.value}"]
        + ([f"certificate: {cert_path}"] if cert_path else [])
        + [f"{k}: {v}" for k, v in diagnostics.items()],
    )
    return _STATUS_EXIT[status]


# -- simulate --------------------------------------------------------------


def cmd_simulate(args) -> int:
    net = _load_network_file(args.network)
    obj = _load_json_file(args.model)
    try:
        sources, responses, functions = model_from_json(obj, net)
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad model: {exc}") from exc
    if args.functions:
        fobj = _load_json_file(args.functions)
        _, _, functions = model_from_json(
            {"sources": obj["sources"], "responses": obj["responses"], "functions": fobj},
            net,
        )
    if functions is None:
        raise InputError("no output functions (provide --functions or a 'functions' section)")
    try:
        p = build_joint_distribution(net, sources, responses)
        cov = covariance_matrix(p, functions)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    violations = check_independence(p, net, 1e-9)
    doc = {
        "covariance": matrix_to_json(cov),
        "summary": {
            "parties": list(net.party_names),
            "alphabets": [int(k) for k in p.alphabets],
            "mass": float(p.table.sum()),
            "independence_violations": [
                {"pair": [a, b], "deviation": dev} for a, b, dev in violations
            ],
        },
    }
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc["covariance"], fh, indent=1)
    _emit(
        doc,
        args.json,
        [
            f"parties: {', '.join(net.party_names)}",
            f"covariance:\n{np.array_str(cov, precision=6)}",
            f"independence violations: {len(violations)}",
        ],
    )
    return EXIT_FEASIBLE


# -- inflate ---------------------------------------------------------------


def _parse_sign_list(net, text):
    vals = [v.strip() for v in text.split(",")]
    if len(vals) != net.n_sources:
        raise InputError(f"--sign needs {net.n_sources} values")
    table = {"+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1}
    try:
        return {nm: table[v] for nm, v in zip(net.source_names, vals)}
    except KeyError as exc:
        raise InputError(f"bad sign value {exc}") from exc


def cmd_inflate(args) -> int:
    net = _load_network_file(args.network)
    chosen = [x is not None for x in (args.spec, args.sign, args.shift)]
    if sum(chosen) != 1:
        raise InputError("provide exactly one of a spec file, --sign, or --shift")
    try:
        if args.spec:
            spec = inflation_spec_from_json(_load_json_file(args.spec))
        elif args.sign:
            spec = sign_inflation(net, _parse_sign_list(net, args.sign))
        else:
            vals = [int(v) for v in args.shift.split(",")]
            if len(vals) != net.n_sources:
                raise InputError(f"--shift needs {net.n_sources} values")
            spec = shift_inflation(net, dict(zip(net.source_names, vals)), args.d)
        infl = build_inflation(net, spec)
    except ValueError as exc:
        raise InputError(str(exc)) from exc

    doc = {"network": infl.network.to_json(), "d": spec.order}
    lines = [f"inflated network: {infl.network.n_parties} parties, "
             f"{infl.network.n_sources} sources (order {spec.order})"]
    if args.covariance:
        c = _load_matrix_file(args.covariance)
        try:
            big = inflated_covariance(net, c, spec, c.diagonal().real)
            if args.sign:
                extracted = hadamard_extract(big, net.n_parties)
            elif args.shift:
                extracted = fourier_extract(big, net.n_parties, spec.order, args.component)
            elif args.vectors:
                vs = [
                    np.asarray(v["re"], dtype=float)
                    + 1j * np.asarray(v.get("im", np.zeros(spec.order)), dtype=float)
                    for v in _load_json_file(args.vectors)
                ]
                extracted = compress_by_vectors(big, vs)
            else:
                extracted = None
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        doc["inflated_covariance"] = matrix_to_json(big)
        lines.append(f"inflated covariance: {big.shape[0]}x{big.shape[1]}")
        if extracted is not None:
            doc["extracted"] = matrix_to_json(extracted)
            lines.append(f"extracted:\n{np.array_str(extracted, precision=6)}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc["network"], fh, indent=1)
    _emit(doc, args.json, lines)
    return EXIT_FEASIBLE


# -- embezzle --------------------------------------------------------------


def cmd_embezzle(args) -> int:
    if (args.phi_file is None) == (not args.uniform):
        raise InputError("provide exactly one of --phi-file or --uniform")
    if args.uniform:
        if not args.d:
            raise InputError("--uniform requires --d")
        phi = np.full(args.d, 1.0 / np.sqrt(args.d))
    else:
        obj = _load_json_file(args.phi_file)
        if isinstance(obj, list):
            phi = np.asarray(obj, dtype=float)
        else:
            phi = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(
                obj.get("im", np.zeros(len(obj["re"]))), dtype=float
            )
    try:
        if args.T is not None:
            result = embezzle_complex(phi, args.T, args.R)
        else:
            result = embezzle_real(phi, args.R)
    except (ValueError, RuntimeError) as exc:
        raise InputError(str(exc)) from exc
    doc = {
        "R": args.R,
        "T": args.T,
        "d": int(len(phi)),
        "overlap_re": float(result.overlap.real),
        "bound": float(result.guaranteed_bound),
    }
    _emit(doc, args.json, [f"overlap_re: {doc['overlap_re']:.9f}", f"bound: {doc['bound']:.9f}"])
    return EXIT_FEASIBLE


# -- gauss -----------------------------------------------------------------


def cmd_gauss(args) -> int:
    net = _load_network_file(args.network)
    obj = _load_json_file(args.decomposition)
    try:
        if "terms" in obj:
            terms = {
                name: matrix_from_json(t).real for name, t in obj["terms"].items()
            }
        else:
            raise InputError("decomposition JSON must contain 'terms'")
        model = GaussianNetworkModel(net, terms, args.seed)
        batch = sample(model, args.count)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    est = sample_covariance(batch) if args.count >= 2 else None
    if args.out:
        write_csv(args.out, batch)
    doc = {
        "count": args.count,
        "seed": args.seed,
        "samples": args.out,
        "covariance_estimate": matrix_to_json(est) if est is not None else None,
    }
    if args.cov_out and est is not None:
        with open(args.cov_out, "w") as fh:
            json.dump(doc["covariance_estimate"], fh, indent=1)
    _emit(
        doc,
        args.json,
        [f"wrote {args.count} samples" + (f" to {args.out}" if args.out else "")]
        + ([f"covariance estimate:\n{np.array_str(est, precision=4)}"] if est is not None else []),
    )
    return EXIT_FEASIBLE


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covnet",
        description="Covariance compatibility tests for causal networks.",
    )
    parser.add_argument("--version", action="version", version=f"covnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide whether a matrix decomposes over a network")
    p.add_argument("network")
    p.add_argument("matrix")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-sweeps", type=int, default=20_000)
    p.add_argument("--fast-only", action="store_true",
                   help="comparison-matrix test only (bipartite sources)")
    p.add_argument("--certificate", default="certificate.json")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="exact classical simulation of a network model")
    p.add_argument("network")
    p.add_argument("model")
    p.add_argument("--functions", help="output functions JSON (overrides the model file)")
    p.add_argument("--out", help="write the covariance matrix JSON here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("inflate", help="build a non-fanout inflation")
    p.add_argument("network")
    p.add_argument("--spec", help="inflation spec JSON file")
    p.add_argument("--sign", help="comma list of +/- signs, one per source")
    p.add_argument("--shift", help="comma list of shifts, one per source")
    p.add_argument("--d", type=int, default=2, help="inflation order for --shift")
    p.add_argument("--component", type=int, default=1,
                   help="diagonal slot extracted after the Fourier step")
    p.add_argument("--covariance", help="base covariance to inflate and extract")
    p.add_argument("--vectors", help="vectors JSON for compression (with --spec)")
    p.add_argument("--out", help="write the inflated network JSON here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_inflate)

    p = sub.add_parser("embezzle", help="permutation extraction overlap report")
    p.add_argument("--d", type=int)
    p.add_argument("--phi-file")
    p.add_argument("--uniform", action="store_true")
    p.add_argument("--R", type=int, required=True)
    p.add_argument("--T", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_embezzle)

    p = sub.add_parser("gauss", help="sample a Gaussian network model")
    p.add_argument("network")
    p.add_argument("decomposition")
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write samples CSV here")
    p.add_argument("--cov-out", help="write the covariance estimate JSON here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gauss)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
