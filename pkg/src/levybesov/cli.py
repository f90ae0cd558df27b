"""Command-line front end.

Subcommands: sample, analyze, indices, moments, phase, selftest.
Exit codes: 0 ok, 2 config error, 3 format error, 4 numeric non-convergence.
Every command is deterministic given its config; LEVY_BESOV_THREADS caps the
worker pool without changing any output.

Model documents are JSON objects {"family": ..., <params>}; families:
  gaussian(variance) drift(mu) sas(alpha) sum_sas(alpha, beta) laplace()
  sym_gamma(c) poisson(rate) inverse_gaussian()
  compound_poisson(rate, jumps={"kind": atoms|gaussian|uniform|pareto,
                                "params": [...]})
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys

import numpy as np

from . import __version__
from .besov import BesovParams, DivergenceError, besov_norm, weight_sum
from .idlaw import (InvalidModelError, QuadratureError, estimate_indices,
                    model_from_dict)
from .lwnf import FormatError, read_field, write_field
from .moments import cell_cf, fractional_moment_cf, fractional_moment_mc
from .phase import PhaseSettings, phase_diagram
from .sampler import (GridSpec, bin_points, sample_compound_poisson_points,
                      sample_field)
from .wavelet import analyze, build_basis

EXIT_CONFIG = 2
EXIT_FORMAT = 3
EXIT_NUMERIC = 4


class ConfigError(Exception):
    pass


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return doc


def _take(doc: dict, required, optional):
    out = {}
    doc = dict(doc)
    for key in required:
        if key not in doc:
            raise ConfigError(f"missing config key {key!r}")
        out[key] = doc.pop(key)
    for key, default in optional.items():
        out[key] = doc.pop(key, default)
    if doc:
        raise ConfigError(f"unknown config keys: {sorted(doc)}")
    return out


def _config_hash(doc) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _provenance(doc, seed) -> dict:
    return {"config_hash": _config_hash(doc), "seed": seed,
            "version": __version__}


def _grid_from(doc) -> GridSpec:
    g = _take(doc, ["d", "J"], {"L": 0.5})
    try:
        return GridSpec(d=int(g["d"]), J=int(g["J"]), L=float(g["L"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _model_from(doc):
    try:
        return model_from_dict(doc)
    except (InvalidModelError, TypeError, KeyError) as exc:
        raise ConfigError(f"invalid model: {exc}") from exc


def _model_arg(ns):
    if ns.model:
        try:
            doc = json.loads(ns.model)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--model is not valid JSON: {exc}") from exc
        return _model_from(doc)
    if ns.config:
        return _model_from(_load_config(ns.config).get("model", {}))
    raise ConfigError("give --model JSON or --config FILE")


# --------------------------------------------------------------------------
# subcommands


def _cmd_sample(ns):
    doc = _load_config(ns.config)
    cfg = _take(doc, ["model", "grid", "seed", "out"], {"points_out": None})
    model = _model_from(cfg["model"])
    spec = _grid_from(cfg["grid"])
    seed = int(cfg["seed"])
    out_path = ns.out or cfg["out"]
    points_out = ns.points or cfg["points_out"]

    if points_out is not None:
        if model.family != "compound_poisson":
            raise ConfigError("--points requires a compound_poisson model")
        rate, jump = model.params
        cloud = sample_compound_poisson_points(rate, jump, spec, seed)
        field = bin_points(cloud, model_tag=model.tag)
        field.seed = seed
        with open(points_out, "w") as fh:
            fh.write(",".join(f"x{i}" for i in range(spec.d)) + ",amplitude\n")
            for pt, amp in zip(cloud.points, cloud.amplitudes):
                coords = ",".join(f"{v!r}" for v in pt)
                fh.write(f"{coords},{amp!r}\n")
    else:
        field = sample_field(model, spec, seed)
    write_field(out_path, field)
    print(json.dumps({"out": str(out_path), "cells": spec.n_cells,
                      **_provenance(cfg, seed)}))
    return 0


def _cmd_analyze(ns):
    field = read_field(ns.field)
    basis = build_basis(ns.basis)
    pyramid = analyze(field, basis, levels=ns.levels)
    params = BesovParams(p=ns.p, q=ns.q, tau=ns.tau, mu=ns.mu)
    report = besov_norm(pyramid, params)
    doc = {
        "params": {"p": ns.p, "q": ns.q, "tau": ns.tau, "mu": ns.mu,
                   "basis": ns.basis},
        "total": report.total,
        "growth_slope": report.growth_slope,
        "field": {"tag": field.model_tag, "seed": field.seed,
                  "d": field.spec.d, "J": field.spec.J, "L": field.spec.L},
        "version": __version__,
    }
    if ns.out_json:
        with open(ns.out_json, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
    if ns.out_csv:
        with open(ns.out_csv, "w") as fh:
            fh.write("j,S_j\n")
            for j in sorted(report.per_level):
                fh.write(f"{j},{report.per_level[j]!r}\n")
    print(json.dumps(doc))
    return 0


def _cmd_indices(ns):
    model = _model_arg(ns)
    est = estimate_indices(model, xi_grid_decades=ns.decades,
                           p_resolution=ns.resolution)
    doc = {"beta0": est.value.beta0, "beta_inf": est.value.beta_inf,
           "beta0_capped": est.beta0_capped, "inconclusive": est.inconclusive,
           "tolerance": est.tolerance, "model": model.tag,
           "version": __version__}
    if ns.curves_csv:
        with open(ns.curves_csv, "w") as fh:
            fh.write("p,stat_zero,stat_inf\n")
            c = est.curves
            for p, s0, si in zip(c["p"], c["stat_zero"], c["stat_inf"]):
                fh.write(f"{p!r},{s0!r},{si!r}\n")
    print(json.dumps(doc))
    return 0


def _cmd_moments(ns):
    model = _model_arg(ns)
    spec = GridSpec(d=1, J=0, L=0.5)
    out = {"p": ns.p, "model": model.tag, "version": __version__}
    if ns.method in ("cf", "both"):
        est = fractional_moment_cf(cell_cf(model, spec.cell_volume), ns.p)
        out["cf"] = est.to_dict()
    if ns.method in ("mc", "both"):
        est = fractional_moment_mc(model, np.ones(spec.shape), spec, ns.p,
                                   ns.draws, ns.seed)
        out["mc"] = est.to_dict()
    print(json.dumps(out))
    return 0


def _cmd_phase(ns):
    doc = _load_config(ns.config)
    cfg = _take(doc, ["model", "d", "p_grid"], {
        "kind": "weighted", "tau_grid": None, "tau_offsets": [-0.15, 0.15],
        "ensemble": 100, "j_range": [4, 11], "seed": 0, "L": 0.5, "basis": 1,
        "out_csv": None, "boundary_out": None,
    })
    model = _model_from(cfg["model"])
    settings = PhaseSettings(
        ensemble=int(cfg["ensemble"]),
        j_range=tuple(int(v) for v in cfg["j_range"]),
        seed=int(cfg["seed"]), L=float(cfg["L"]),
        basis_moments=int(cfg["basis"]),
        tau_offsets=tuple(float(v) for v in cfg["tau_offsets"]))
    rows, boundary = phase_diagram(
        model, int(cfg["d"]), [float(p) for p in cfg["p_grid"]],
        tau_grid=cfg["tau_grid"], kind=cfg["kind"], settings=settings)
    lines = ["inv_p,tau,predicted,slope,verdict"]
    lines += [row.as_csv() for row in rows]
    text = "\n".join(lines) + "\n"
    if cfg["out_csv"]:
        with open(cfg["out_csv"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg["boundary_out"]:
        with open(cfg["boundary_out"], "w") as fh:
            json.dump({"boundary": boundary, **_provenance(cfg, cfg["seed"])},
                      fh, indent=1)
    print(json.dumps({"cells": len(rows), **_provenance(cfg, cfg["seed"])}))
    return 0


def _cmd_selftest(ns):
    from .idlaw import gaussian, laplace, sas
    from .moments import c_p_closed, lemma3_scaling
    from .sampler import GridField
    from .wavelet import qmf_residual

    checks = []

    def check(name, ok):
        checks.append(ok)
        print(f"{'PASS' if ok else 'FAIL'} {name}")

    check("exponent gaussian", abs(gaussian(1.0).exponent(2.0) + 2.0) < 1e-12)
    check("exponent cauchy", abs(sas(1.0).exponent(3.0) + 3.0) < 1e-12)
    res = max(qmf_residual(build_basis(n).h) for n in range(1, 11))
    check("qmf residuals", res < 1e-12)
    spec = GridSpec(d=1, J=8)
    field = sample_field(gaussian(1.0), spec, seed=7)
    pyr = analyze(field, build_basis(4))
    from .wavelet import synthesize
    back = synthesize(pyr, build_basis(4))
    check("reconstruction", float(np.max(np.abs(back.values - field.values))) < 1e-10)
    check("parseval", abs(pyr.energy() - float(np.sum(field.values**2))) <
          1e-10 * float(np.sum(field.values**2)))
    check("c_p(1) = 1/pi", abs(c_p_closed(1.0) - 1.0 / math.pi) < 1e-12)
    lhs, rhs = lemma3_scaling(1.0, 0.5, 2.0)
    check("stable scaling identity", abs(lhs - rhs) < 1e-6 * rhs)
    ws = weight_sum(0, 2.0, 1.0, 1)
    check("weight sum", abs(ws.value - math.pi / math.tanh(math.pi)) < 1e-3)
    est = estimate_indices(laplace())
    check("laplace indices", abs(est.value.beta0 - 2) <= 0.05
          and abs(est.value.beta_inf) <= 0.05)
    ok = all(checks)
    print(f"selftest: {sum(checks)}/{len(checks)} passed")
    return 0 if ok else 1


# --------------------------------------------------------------------------


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="levybesov",
        description="Levy white noise simulation and Besov-regularity analysis")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="draw a noise field into an LWNF file")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=None, help="override config out path")
    s.add_argument("--points", default=None,
                   help="also write the impulse cloud CSV (compound Poisson)")
    s.set_defaults(fn=_cmd_sample)

    s = sub.add_parser("analyze", help="Besov norm report of an LWNF field")
    s.add_argument("--field", required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--q", type=float, required=True)
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--mu", type=float, default=0.0)
    s.add_argument("--levels", type=int, default=None)
    s.add_argument("--basis", type=int, default=4, help="DB-N moments")
    s.add_argument("--out-json", default=None)
    s.add_argument("--out-csv", default=None)
    s.set_defaults(fn=_cmd_analyze)

    s = sub.add_parser("indices", help="Blumenthal-Getoor index estimate")
    s.add_argument("--model", default=None, help="model JSON")
    s.add_argument("--config", default=None)
    s.add_argument("--decades", type=int, default=100)
    s.add_argument("--resolution", type=float, default=0.01)
    s.add_argument("--curves-csv", default=None)
    s.set_defaults(fn=_cmd_indices)

    s = sub.add_parser("moments", help="fractional moment of a unit-cell increment")
    s.add_argument("--model", default=None, help="model JSON")
    s.add_argument("--config", default=None)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--method", choices=("cf", "mc", "both"), default="cf")
    s.add_argument("--draws", type=int, default=100000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(fn=_cmd_moments)

    s = sub.add_parser("phase", help="phase-diagram experiment from a config")
    s.add_argument("--config", required=True)
    s.set_defaults(fn=_cmd_phase)

    s = sub.add_parser("selftest", help="fast deterministic sanity checks")
    s.set_defaults(fn=_cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = _build_parser()
    ns = ap.parse_args(argv)
    try:
        return ns.fn(ns)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidModelError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (QuadratureError, DivergenceError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
