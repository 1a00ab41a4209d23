"""Command-line front end with reproducible, replayable runs.

Every successful command appends a RunRecord (JSON Lines) to the run log:
the command name, a sha256 digest of its canonicalized parameters, the
parameters themselves, and the result payload. `replay` re-executes a
recorded run and byte-compares the payloads (timestamps excluded).

Exit codes: 0 success, 2 config/usage error, 3 numeric/precision error,
4 domain error, 5 replay determinism violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone

import jsonschema
import numpy as np

from . import __version__
from .approx import ScanJob, fit_finite_product, scan_continuous, scan_discrete
from .characters import build_character_group, character, phi
from .config import (
    canonical_json,
    config_digest,
    get_typed,
    load_config,
    parse_character_ref,
    parse_family_line,
    parse_target_line,
    rect_from_params,
    _split_lines,
)
from .equidist import SequenceSpec, harmonics_box, ud_report
from .errors import ConfigError, DomainError, PrecisionError, UnivlabError
from .euler_product import PrimeSet
from .lfunc import EvalParams, l_value_with_error
from .moments import (
    empirical_mean_square_shifted,
    empirical_mean_square_vertical,
    gallagher_check,
)
from .shifts import parse_alpha_spec, pathology_summary

RUN_SCHEMA = "univlab/run/v1"
DEFAULT_LOG = "univlab_runs.jsonl"

_NUM = {"type": "number"}
_STR = {"type": "string"}
_INT = {"type": "integer"}

SCHEMAS = {
    "characters": {
        "type": "object",
        "required": ["schema", "modulus", "phi", "characters"],
        "properties": {"modulus": _INT, "phi": _INT, "characters": {"type": "array"}},
    },
    "lvalue": {
        "type": "object",
        "required": ["schema", "value", "error_bound"],
        "properties": {
            "value": {"type": "array", "items": _NUM},
            "error_bound": _NUM,
        },
    },
    "pathology": {
        "type": "object",
        "required": ["schema", "alpha", "exact"],
    },
    "ud-test": {
        "type": "object",
        "required": ["schema", "report"],
    },
    "moments": {
        "type": "object",
        "required": ["schema", "kind", "result"],
    },
    "scan": {
        "type": "object",
        "required": ["schema", "report"],
    },
    "fit": {
        "type": "object",
        "required": ["schema", "result"],
    },
}


def _runlog_path(args):
    if getattr(args, "log", None):
        return args.log
    return os.environ.get("UNIVLAB_LOG", DEFAULT_LOG)


def _append_record(path, record):
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# executors: params dict -> (payload dict, aux exports); replay re-runs these


def _exec_characters(params):
    q = params["modulus"]
    chars = build_character_group(q)
    rows = []
    for c in chars:
        row = {
            "index": c.index,
            "conductor": c.conductor,
            "is_primitive": c.is_primitive,
            "is_principal": c.is_principal,
        }
        if q <= 60:
            table = {}
            for n in range(1, q + 1):
                r = c.exponent_at(n)
                table[str(n)] = (
                    None if r is None else [r.numerator, r.denominator]
                )
            row["exponent_table"] = table
        rows.append(row)
    payload = {
        "schema": "univlab/characters/v1",
        "modulus": q,
        "phi": phi(q),
        "characters": rows,
    }
    return payload, None


def _exec_lvalue(params):
    chi = character(params["modulus"], params["char_index"])
    s = complex(params["sigma"], params["t"])
    value, err = l_value_with_error(
        s, chi, EvalParams(abs_tol=params.get("abs_tol", 1e-10))
    )
    payload = {
        "schema": "univlab/lvalue/v1",
        "sigma": params["sigma"],
        "t": params["t"],
        "modulus": params["modulus"],
        "char_index": params["char_index"],
        "value": [value.real, value.imag],
        "error_bound": err,
    }
    return payload, None


def _exec_pathology(params):
    alpha = parse_alpha_spec(params["alpha"])
    pd = pathology_summary(alpha)
    payload = {
        "schema": "univlab/pathology/v1",
        "alpha": alpha.spec_string(),
        "exact": alpha.is_exact,
    }
    if pd is not None:
        payload.update(pd.to_json())
    return payload, None


def _build_sequence_spec(sec):
    mode = sec.get("mode", "discrete")
    components = []
    exclusions = {}
    for line in _split_lines(sec.get("families", "")):
        fam, primes, exclude = parse_family_line(line)
        if not primes:
            raise ConfigError(f"family {fam.label!r} lists no primes")
        for p in primes:
            components.append((fam, p))
        if exclude:
            exclusions[fam.label] = tuple(exclude)
    if not components:
        raise ConfigError("ud-test config declares no components")
    return SequenceSpec(tuple(components), mode=mode, exclusions=exclusions)


def _exec_ud_test(params):
    sec = params["section"]
    spec = _build_sequence_spec(sec)
    max_h = get_typed(sec, "max_abs_harmonic", int, 2)
    harmonics = harmonics_box(spec.dimension, max_h)
    n_or_t = (
        get_typed(sec, "n_max", int, 100000)
        if spec.mode == "discrete"
        else get_typed(sec, "t_max", float, 1000.0)
    )
    rep = ud_report(
        spec,
        harmonics,
        n_or_t,
        threshold=get_typed(sec, "threshold", float, 0.05),
        quad_step=get_typed(sec, "quad_step", float, 0.05),
    )
    payload = {"schema": "univlab/ud-test/v1", "report": rep.to_json()}
    csv_rows = [
        (" ".join(map(str, h)), s) for h, (s, _) in rep.weyl.items()
    ]
    return payload, {"csv": (("harmonic", "abs_weyl_sum"), csv_rows)}


def _trig_poly_samples(seed, degree, t0, t_len, nodes):
    """Seeded random trigonometric polynomial on [t0, t0 + t_len], sampled
    with its exact derivative (the gallagher test function)."""
    rng = np.random.default_rng(seed)
    coeff = rng.normal(size=2 * degree + 1) + 1j * rng.normal(size=2 * degree + 1)
    freqs = (np.arange(-degree, degree + 1)) * (2.0 * np.pi / t_len)
    xs = np.linspace(t0, t0 + t_len, nodes)
    ph = np.exp(1j * np.outer(xs, freqs))
    fs = ph @ coeff
    dfs = ph @ (1j * freqs * coeff)
    return xs, fs, dfs


def _exec_moments(params):
    sec = params["section"]
    kind = params["kind"]
    chi = character(
        get_typed(sec, "modulus", int, 1), get_typed(sec, "char_index", int, 0)
    )
    s0 = complex(get_typed(sec, "sigma", float, 2.0), get_typed(sec, "t0", float, 0.0))
    y = get_typed(sec, "y", int, 100)
    if kind == "vertical":
        rep = empirical_mean_square_vertical(
            s0, chi, y,
            get_typed(sec, "t_max", float, 500.0),
            get_typed(sec, "step", float, 0.25),
        )
        result = rep.to_json()
    elif kind == "shifted":
        fam, _, _ = parse_family_line(get_typed(sec, "family", str, required=True))
        rep = empirical_mean_square_shifted(
            s0, chi, y, fam, get_typed(sec, "x", float, 1000.0)
        )
        result = rep.to_json()
    elif kind == "gallagher":
        t0 = get_typed(sec, "t0_window", float, 1.0)
        t_len = get_typed(sec, "t_len", float, 40.0)
        xs, fs, dfs = _trig_poly_samples(
            get_typed(sec, "seed", int, 1),
            get_typed(sec, "degree", int, 12),
            t0, t_len,
            get_typed(sec, "nodes", int, 20001),
        )
        delta = get_typed(sec, "delta", float, 0.5)
        npts = get_typed(sec, "npoints", int, 30)
        pts = np.linspace(t0 + delta, t0 + t_len - delta, npts)
        res = gallagher_check(xs, fs, pts, delta, dfs)
        result = res.to_json()
    else:
        raise ConfigError(f"unknown moments kind {kind!r}")
    payload = {"schema": "univlab/moments/v1", "kind": kind, "result": result}
    return payload, None


def _build_scan(params):
    sec = params["section"]
    rect = rect_from_params(sec)
    fam_lines = _split_lines(sec.get("families", ""))
    chi_refs = _split_lines(sec.get("characters", ""))
    tgt_lines = _split_lines(sec.get("targets", ""))
    if not (len(fam_lines) == len(chi_refs) == len(tgt_lines)) or not fam_lines:
        raise ConfigError(
            "families, characters and targets must align one per line"
        )
    jobs = []
    for fl, cr, tl in zip(fam_lines, chi_refs, tgt_lines):
        fam, _, _ = parse_family_line(fl)
        chi = parse_character_ref(cr)
        jobs.append(ScanJob(fam, chi, parse_target_line(tl, chi, rect)))
    return jobs, rect


def _exec_scan(params):
    sec = params["section"]
    jobs, rect = _build_scan(params)
    mode = params["mode"]
    kwargs = dict(
        workers=get_typed(sec, "workers", int, 1),
        chunk=get_typed(sec, "chunk", int, 2048),
        override_classification=get_typed(sec, "override_classification", bool, False),
    )
    epsilon = get_typed(sec, "epsilon", float, required=True)
    if mode == "discrete":
        outcome = scan_discrete(
            jobs, rect, epsilon, get_typed(sec, "n_max", int, required=True), **kwargs
        )
    else:
        outcome = scan_continuous(
            jobs, rect, epsilon,
            get_typed(sec, "t_max", float, required=True),
            get_typed(sec, "step", float, required=True),
            **kwargs,
        )
    payload = {"schema": "univlab/scan/v1", "report": outcome.report.to_json()}
    aux = {
        "jsonl": outcome,
        "csv": (
            ("shift", "max_distance"),
            list(zip(outcome.shifts_axis.tolist(), outcome.max_distance.tolist())),
        ),
    }
    return payload, aux


def _exec_fit(params):
    sec = params["section"]
    rect = rect_from_params(sec)
    chi = character(
        get_typed(sec, "modulus", int, 1), get_typed(sec, "char_index", int, 0)
    )
    limit = get_typed(sec, "prime_limit", int, 31)
    m_set = PrimeSet.up_to(limit)
    target = parse_target_line(get_typed(sec, "target", str, required=True), chi, rect)
    res = fit_finite_product(
        chi, m_set, rect, target, sweeps=get_typed(sec, "sweeps", int, 50)
    )
    result = res.to_json()
    if target.kind == "product":
        worst = 0.0
        for p in target.m_set:
            d = abs(res.twist.angle(p) - target.twist.angle(p))
            worst = max(worst, min(d, 1.0 - d))
        result["planted_max_angle_error"] = worst
    payload = {"schema": "univlab/fit/v1", "result": result}
    return payload, None


_EXECUTORS = {
    "characters": _exec_characters,
    "lvalue": _exec_lvalue,
    "pathology": _exec_pathology,
    "ud-test": _exec_ud_test,
    "moments": _exec_moments,
    "scan": _exec_scan,
    "fit": _exec_fit,
}


def _print_characters_table(payload):
    print(f"character group mod {payload['modulus']} (phi = {payload['phi']})")
    print(f"{'index':>6} {'conductor':>10} {'primitive':>10} {'principal':>10}")
    for row in payload["characters"]:
        print(
            f"{row['index']:>6} {row['conductor']:>10} "
            f"{str(row['is_primitive']):>10} {str(row['is_principal']):>10}"
        )


def _emit(payload, args):
    text = json.dumps(payload, indent=2, sort_keys=True)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    elif getattr(args, "command", "") == "characters" and not getattr(args, "json", False):
        _print_characters_table(payload)
    else:
        print(text)


def _write_aux(args, aux):
    if not aux:
        return
    csv_path = getattr(args, "csv", None)
    if csv_path and "csv" in aux:
        header, rows = aux["csv"]
        _write_csv(csv_path, header, rows)
    jsonl_path = getattr(args, "jsonl_out", None)
    if jsonl_path and "jsonl" in aux:
        outcome = aux["jsonl"]
        with open(jsonl_path, "w", encoding="utf-8") as fh:
            for shift, detail in zip(outcome.report.hits, outcome.hit_details):
                fh.write(
                    json.dumps(
                        {"shift": shift, "distances": detail}, sort_keys=True
                    )
                    + "\n"
                )
            fh.write(
                json.dumps({"summary": outcome.report.to_json()}, sort_keys=True)
                + "\n"
            )


def _run_command(args):
    command = args.command
    params, config_path = _build_params(args)
    payload, aux = _EXECUTORS[command](params)
    jsonschema.validate(payload, SCHEMAS[command])
    _emit(payload, args)
    _write_aux(args, aux)
    record = {
        "schema": RUN_SCHEMA,
        "version": __version__,
        "command": command,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config_digest": config_digest(params),
        "params": params,
        "payload": payload,
    }
    if config_path:
        record["config_path"] = os.path.abspath(config_path)
    _append_record(_runlog_path(args), record)
    return 0


def _build_params(args):
    """Canonical parameter dict for a command; config-file commands carry
    the parsed section so that replay can detect edits."""
    c = args.command
    if c == "characters":
        return {"modulus": args.modulus}, None
    if c == "lvalue":
        return {
            "sigma": args.sigma,
            "t": args.t,
            "modulus": args.modulus,
            "char_index": args.char_index,
        }, None
    if c == "pathology":
        return {"alpha": args.alpha}, None
    if c == "ud-test":
        return {"section": load_config(args.config, "ud-test")}, args.config
    if c == "moments":
        return {
            "kind": args.kind,
            "section": load_config(args.config, "moments"),
        }, args.config
    if c == "scan":
        sec = load_config(args.config, "scan")
        mode = "discrete" if args.discrete else sec.get("mode", "continuous")
        return {"mode": mode, "section": sec}, args.config
    if c == "fit":
        return {"section": load_config(args.config, "fit")}, args.config
    raise ConfigError(f"unknown command {c!r}")


def _replay(args):
    path = _runlog_path(args)
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    except OSError as exc:
        raise DomainError(f"cannot read run log {path!r}: {exc}") from None
    if not 0 <= args.index < len(lines):
        raise DomainError(f"record {args.index} not in run log ({len(lines)} records)")
    record = json.loads(lines[args.index])
    command = record["command"]
    if command not in _EXECUTORS:
        raise DomainError(f"record {args.index} has unknown command {command!r}")
    params = record["params"]
    if "config_path" in record:
        # reconstruct params from the file as it is NOW; an edited config
        # shows up as a digest mismatch
        ns = argparse.Namespace(
            command=command,
            config=record["config_path"],
            discrete=params.get("mode") == "discrete",
            kind=params.get("kind"),
        )
        params = _build_params(ns)[0]
    if config_digest(params) != record["config_digest"]:
        raise DomainError("config digest mismatch: run is not reconstructible")
    payload, _ = _EXECUTORS[command](params)
    if canonical_json(payload) != canonical_json(record["payload"]):
        print("replay mismatch: payload differs from the recorded run", file=sys.stderr)
        return 5
    print(f"replay of record {args.index} ({command}): payloads identical")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="univlab",
        description="numerical experiments around shifted Dirichlet L-functions",
    )
    parser.add_argument("--log", help="run-log path (default $UNIVLAB_LOG or ./univlab_runs.jsonl)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("characters", help="print a character group table")
    p.add_argument("--modulus", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("lvalue", help="evaluate L(sigma + it, chi)")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--modulus", type=int, default=1)
    p.add_argument("--char-index", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("pathology", help="exact rationality data for an alpha")
    p.add_argument("--alpha", required=True)
    p.add_argument("--out")

    p = sub.add_parser("ud-test", help="Weyl-sum equidistribution report")
    p.add_argument("--config", required=True)
    p.add_argument("--csv")
    p.add_argument("--out")

    p = sub.add_parser("moments", help="mean-square diagnostics")
    p.add_argument("kind", choices=["vertical", "shifted", "gallagher"])
    p.add_argument("--config", required=True)
    p.add_argument("--out")

    p = sub.add_parser("scan", help="continuous/discrete universality scan")
    p.add_argument("--config", required=True)
    p.add_argument("--discrete", action="store_true")
    p.add_argument(
        "--out", dest="jsonl_out", metavar="report.jsonl",
        help="JSONL export: one record per hit, final record = summary",
    )
    p.add_argument("--csv")

    p = sub.add_parser("fit", help="fit a twisted finite product to a target")
    p.add_argument("--config", required=True)
    p.add_argument("--out")

    p = sub.add_parser("replay", help="re-execute a recorded run and compare")
    p.add_argument("--index", type=int, required=True)

    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        if args.command == "replay":
            return _replay(args)
        return _run_command(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PrecisionError as exc:
        print(f"precision error: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 4
    except UnivlabError as exc:  # pragma: no cover - catch-all for new kinds
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
