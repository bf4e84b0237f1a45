"""Command-line entry point: sampling, moments, verification, kappa, polymer.

Configs and queries are JSON documents validated against the schemas in
docs/ before any computation; schema violations exit with code 2 and the
JSON-pointer path of the offending field.  Numeric output uses 17 significant
digits so doubles round-trip.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import lattice, qmoments, sampler, verify
from .errors import ValidationError, VertexflowError
from .hecke import Permutation, kappa

SCHEMA_DIR = Path(__file__).resolve().parent / "schemas"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _load_json(path: str, schema_name: str):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"/: cannot read {path}: {exc}") from exc
    _validate_schema(doc, schema_name)
    return doc


class ConfigError(Exception):
    pass


def _validate_schema(doc, schema_name: str) -> None:
    import jsonschema

    with open(SCHEMA_DIR / f"{schema_name}.schema.json") as fh:
        schema = json.load(fh)
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        raise ConfigError(f"{pointer}: {err.message}")


def _semantic(doc, builder, pointer: str):
    from .errors import NonMonotoneColoringError, PathMismatchError, PathOrderError

    try:
        return builder(doc)
    except NonMonotoneColoringError as exc:
        raise ConfigError(f"{pointer}/coloring: {exc}") from exc
    except (PathMismatchError, PathOrderError) as exc:
        raise ConfigError(f"{pointer}/q_steps: {exc}") from exc
    except (ValidationError, KeyError, TypeError) as exc:
        raise ConfigError(f"{pointer}: {exc}") from exc


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get("VERTEXFLOW_WORKERS")
    if env:
        return int(env)
    return 1


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------


def _cmd_sample(args) -> int:
    cfg = _load_json(args.config, "sample_config")
    model = args.model
    count = args.samples
    seed = args.seed
    workers = _workers(args)
    lines = []
    if model == "sc6v":
        domain = _semantic(cfg, lambda d: lattice.domain_from_json(d["domain"]), "/domain")
        params = _semantic(cfg, lambda d: lattice.params_from_json(d["params"]), "/params")
        batch = sampler.sample_sc6v(domain, params, seed, count, workers)
        for i in range(count):
            lines.append(lattice.dumps(lattice.config_to_json(batch.config(i))))
    elif model == "hs":
        params = _semantic(cfg, lambda d: lattice.params_from_json(d["params"]), "/params")
        rect = _semantic(cfg, lambda d: (int(d["rect"][0]), int(d["rect"][1])), "/rect")
        batch = sampler.sample_higher_spin(params, rect, seed, count, workers)
        for i in range(count):
            lines.append(lattice.dumps(lattice.config_to_json(batch.config(i))))
    elif model == "qhahn":
        p = cfg["params"]
        rect = (int(cfg["rect"][0]), int(cfg["rect"][1]))
        batch = sampler.sample_qhahn(p["q"], p["s"], p["z"], rect,
                                     tuple(p["boundary_levels"]), seed, count, workers,
                                     keep_edges=True)
        for i in range(count):
            lines.append(lattice.dumps(lattice.config_to_json(batch.config(i))))
    elif model == "beta":
        p = cfg["params"]
        keep = [tuple(pt) for pt in cfg.get("keep_points", [])] or None
        batch = sampler.simulate_beta_polymer(p["sigma"], p["rho"], int(p["t_max"]),
                                              p["delays"], seed, count, keep, workers)
        for i in range(count):
            row = {f"{k}:{m}:{t}": batch.values[(k, m, t)][i] for (k, m, t) in sorted(batch.values)}
            lines.append(json.dumps({key: _fmt(v) for key, v in row.items()}, sort_keys=True))
    else:
        raise ConfigError(f"/model: unknown model {model}")
    with open(args.out, "w") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))
    print(f"sample: wrote {count} {model} configurations to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# moment
# ---------------------------------------------------------------------------


def _query_from_json(doc) -> qmoments.MomentQuery:
    pi = Permutation(tuple(doc["pi"])) if "pi" in doc else None
    return qmoments.MomentQuery([tuple(p) for p in doc["points"]], list(doc["colors"]), pi)


def _cmd_moment(args) -> int:
    doc = _load_json(args.query, "moment_query")
    theorem = args.theorem
    nodes = doc.get("nodes_per_circle", qmoments.DEFAULT_NODES)
    tol = doc.get("tolerance", qmoments.DEFAULT_TOL)
    query = _semantic(doc, _query_from_json, "/points")
    if theorem == "6.1":
        domain = _semantic(doc, lambda d: lattice.domain_from_json(d["domain"]), "/domain")
        params = _semantic(doc, lambda d: lattice.params_from_json(d["params"]), "/params")
        res = qmoments.qmoment_skew(domain, params, query, nodes, tol)
    elif theorem == "8.1":
        params = _semantic(doc, lambda d: lattice.params_from_json(d["params"]), "/params")
        res = qmoments.qmoment_higher_spin(params, query, nodes, tol)
    elif theorem == "8.4":
        params = _semantic(doc, lambda d: lattice.params_from_json(d["params"]), "/params")
        res = qmoments.shifted_observable(params, query.points, query.colors, query.pi,
                                          exact=True, nodes_per_circle=nodes, tol=tol)
    elif theorem == "8.5":
        p = doc["params"]
        res = qmoments.qmoment_qhahn(p["q"], p["s"], p["z"], tuple(p["boundary_levels"]),
                                     query, nodes, tol)
    elif theorem == "9.2":
        p = doc["params"]
        res = qmoments.beta_moment(p["sigma"], p["rho"], [tuple(pt) for pt in doc["points"]],
                                   list(doc["colors"]), query.pi, nodes, tol)
    else:
        raise ConfigError(f"/theorem: unknown theorem {theorem}")
    out = {
        "theorem": theorem,
        "value_re": res.value.real,
        "value_im": res.value.imag,
        "error_estimate": res.error_estimate,
        "nodes_per_circle": res.nodes_per_circle,
    }
    with open(args.out, "w") as fh:
        json.dump(out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if args.csv:
        with open(args.csv, "a", newline="") as fh:
            writer = csv.writer(fh)
            if fh.tell() == 0:
                writer.writerow(["query", "value_re", "value_im", "err_est", "samples"])
            writer.writerow([args.query, _fmt(res.value.real), _fmt(res.value.imag),
                             _fmt(res.error_estimate), 0])
    print(f"moment[{theorem}]: value = {_fmt(res.value.real)} + {_fmt(res.value.imag)}j "
          f"(est {_fmt(res.error_estimate)})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _suite_local(seed: int):
    reports = []
    for r in range(5):
        reports.append(verify.check_local_relation(r, trials=200, seed=seed + r))
        reports.append(verify.check_local_relation_fused(r, trials=100, seed=seed + r))
    return reports


def _suite_shift(seed: int):
    import random as _random

    rng = _random.Random(seed)
    reports = []
    for i in range(3):
        k = rng.choice([1, 2])
        col_a, col_b, phi, psi = verify.random_shift_pair(rng, 3, 3, k)
        params = lattice.ModelParams(
            q=0.3,
            row_rapidities=tuple(2.0 + 0.11 * i for i in range(3)),
            col_rapidities=tuple(1.0 + 0.05 * i for i in range(3)),
        )
        reports.append(verify.check_shift_invariance(
            col_a, col_b, phi, psi, [1] * k, params, method="enumerate",
            nodes_per_circle=64))
    return reports


def _suite_moments(seed: int):
    from .lattice import ModelParams, rectangle_domain
    from .sampler import enumerate_sc6v

    params = ModelParams(q=0.3, row_rapidities=(1.9, 2.2), col_rapidities=(1.0, 1.12))
    dom = rectangle_domain(2, 2, (0, 1, 1, 2))
    ens = enumerate_sc6v(dom, params)
    reports = []
    pts, cols = [(1.5, 2.5), (2.5, 1.5)], [0, 1]
    for pi in Permutation.all(2):
        got = qmoments.qmoment_skew(dom, params, qmoments.MomentQuery(pts, cols, pi),
                                    nodes_per_circle=64)
        want = ens.moment(pts, pi.act(cols), params.q)
        err = abs(got.value - want)
        reports.append(verify.CheckReport(
            f"moment_vs_enumeration_pi{pi.images}", "pass" if err < 1e-8 else "fail",
            float(err), len(ens.entries), f"seed={seed}"))
    return reports


def _cmd_verify(args) -> int:
    seed = args.seed
    suites = {
        "local": lambda: _suite_local(seed),
        "identities": lambda: verify.check_identity_suite(seed=seed),
        "shift": lambda: _suite_shift(seed),
        "moments": lambda: _suite_moments(seed),
    }
    names = list(suites) if args.suite == "all" else [args.suite]
    reports = []
    for name in names:
        reports.extend(suites[name]())
    doc = {"suite": args.suite, "seed": seed, "checks": [r.as_dict() for r in reports]}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    n_fail = sum(1 for r in reports if not r.passed)
    for r in reports:
        print(f"{r.status.upper():4s} {r.name}: max|err| = {_fmt(r.max_abs_error)} "
              f"({r.samples_or_cases} cases)")
    print(f"verify[{args.suite}]: {len(reports) - n_fail}/{len(reports)} checks passed")
    return EXIT_OK if n_fail == 0 else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# kappa / polymer
# ---------------------------------------------------------------------------


def _cmd_kappa(args) -> int:
    try:
        pi = Permutation(tuple(int(t) for t in args.pi.split(",")))
        rho = Permutation(tuple(int(t) for t in args.rho.split(",")))
        w = [complex(t[0], t[1]) if isinstance(t, list) else complex(t)
             for t in json.loads(args.w)]
    except (ValueError, ValidationError, json.JSONDecodeError) as exc:
        raise ConfigError(f"/: {exc}") from exc
    val = kappa(pi, rho, w, q=args.q)
    val = complex(val)
    print(f"{_fmt(val.real)} {'+' if val.imag >= 0 else '-'} {_fmt(abs(val.imag))}j")
    return EXIT_OK


def _cmd_polymer(args) -> int:
    res = qmoments.beta_moment(args.sigma, args.rho, [(args.m, args.t)], [args.delay])
    exact1 = None
    out = {
        "value_re": res.value.real,
        "value_im": res.value.imag,
        "error_estimate": res.error_estimate,
    }
    if args.m == 1:
        exact1 = ((args.sigma - args.rho) / args.sigma) ** (args.t - 1)
        out["analytic"] = exact1
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(out, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"polymer: E[Z_({args.delay})^({args.m},{args.t})] = {_fmt(res.value.real)} "
          f"(est {_fmt(res.error_estimate)})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vertexflow",
                                description="stochastic colored vertex models")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="draw Monte Carlo samples")
    sp.add_argument("--model", required=True, choices=["sc6v", "hs", "qhahn", "beta"])
    sp.add_argument("--config", required=True)
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_sample)

    mp = sub.add_parser("moment", help="evaluate an exact q-moment integral")
    mp.add_argument("--theorem", required=True, choices=["6.1", "8.1", "8.4", "8.5", "9.2"])
    mp.add_argument("--query", required=True)
    mp.add_argument("--out", required=True)
    mp.add_argument("--csv", default=None)
    mp.set_defaults(func=_cmd_moment)

    vp = sub.add_parser("verify", help="run identity/consistency suites")
    vp.add_argument("--suite", required=True,
                    choices=["local", "shift", "identities", "moments", "all"])
    vp.add_argument("--seed", type=int, default=0)
    vp.add_argument("--out", default=None)
    vp.set_defaults(func=_cmd_verify)

    kp = sub.add_parser("kappa", help="evaluate a kappa coefficient")
    kp.add_argument("--pi", required=True)
    kp.add_argument("--rho", required=True)
    kp.add_argument("--w", required=True, help="JSON list of [re, im] pairs or reals")
    kp.add_argument("--q", type=float, default=0.5)
    kp.set_defaults(func=_cmd_kappa)

    pp = sub.add_parser("polymer", help="Beta polymer moment")
    pp.add_argument("--sigma", type=float, required=True)
    pp.add_argument("--rho", type=float, required=True)
    pp.add_argument("--m", type=int, required=True)
    pp.add_argument("--t", type=int, required=True)
    pp.add_argument("--delay", type=int, default=0)
    pp.add_argument("--out", default=None)
    pp.set_defaults(func=_cmd_polymer)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error at {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VertexflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
