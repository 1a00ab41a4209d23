"""Config-file parsing for the CLI: one INI-style file, flat sections per
subcommand, plus the canonicalization used for run-log digests.

Multi-valued keys (families, characters, targets) hold one entry per line;
entries at the same position belong together (family j / character j /
target j)."""

from __future__ import annotations

import configparser
import hashlib
import json

from .characters import character
from .errors import ConfigError
from .shifts import ShiftFamily, parse_alpha_spec
from .targets import CompactRect, TargetFunction


def load_config(path, section):
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"config file {path!r} not found or unreadable")
    if section not in cp:
        raise ConfigError(f"config file {path!r} has no [{section}] section")
    return {k: v.strip() for k, v in cp[section].items()}


def canonical_json(obj):
    """Deterministic JSON bytes (sorted keys, no whitespace)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def config_digest(params):
    return hashlib.sha256(canonical_json(params)).hexdigest()


def _split_lines(value):
    return [ln.strip() for ln in value.splitlines() if ln.strip()]


def parse_family_line(line):
    """'alpha=<spec> a=<float> b=<float> [label=..] [primes=2,3] [exclude=..]'
    -> (ShiftFamily, primes list, exclude list)."""
    fields = {}
    for tok in line.split():
        if "=" not in tok:
            raise ConfigError(f"malformed family token {tok!r} in {line!r}")
        k, v = tok.split("=", 1)
        fields[k] = v
    try:
        alpha = parse_alpha_spec(fields["alpha"])
        fam = ShiftFamily(
            alpha, float(fields["a"]), float(fields["b"]),
            fields.get("label", ""),
        )
    except KeyError as exc:
        raise ConfigError(f"family line {line!r} is missing {exc}") from None
    primes = [int(p) for p in fields.get("primes", "").split(",") if p]
    exclude = [int(p) for p in fields.get("exclude", "").split(",") if p]
    return fam, primes, exclude


def parse_character_ref(text):
    """'modulus:index' -> DirichletCharacter."""
    try:
        q, idx = text.split(":")
        return character(int(q), int(idx))
    except ValueError as exc:
        raise ConfigError(f"bad character reference {text!r}: {exc}") from None


def parse_target_line(line, chi, rect):
    """'poly c0 c1 ...' | 'planted <shift>' | 'product <seed> <prime_limit>'."""
    toks = line.split()
    if not toks:
        raise ConfigError("empty target line")
    kind, args = toks[0], toks[1:]
    if kind == "poly":
        if not args:
            raise ConfigError("poly target needs coefficients")
        try:
            coeffs = [complex(a) for a in args]
        except ValueError as exc:
            raise ConfigError(f"bad poly coefficient in {line!r}: {exc}") from None
        return TargetFunction.poly(coeffs, rect)
    if kind == "planted":
        if len(args) != 1:
            raise ConfigError("planted target takes exactly one shift")
        return TargetFunction.planted(chi, float(args[0]), rect)
    if kind == "product":
        if len(args) != 2:
            raise ConfigError("product target takes <seed> <prime_limit>")
        import numpy as np

        from .euler_product import PrimeSet, Twist

        seed, limit = int(args[0]), int(args[1])
        m_set = PrimeSet.up_to(limit)
        rng = np.random.default_rng(seed)
        twist = Twist({p: float(rng.random()) for p in m_set})
        return TargetFunction.product(chi, m_set, twist, rect)
    raise ConfigError(f"unknown target kind {kind!r}")


def rect_from_params(sec):
    try:
        s1, s2 = (float(x) for x in sec["sigma_range"].split())
        t1, t2 = (float(x) for x in sec["t_range"].split())
        nx, ny = (int(x) for x in sec.get("grid", "32 32").split())
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad rectangle spec: {exc}") from None
    return CompactRect((s1, s2), (t1, t2), (nx, ny))


def get_typed(sec, key, cast, default=None, required=False):
    if key not in sec:
        if required:
            raise ConfigError(f"missing config key {key!r}")
        return default
    try:
        if cast is bool:
            return sec[key].lower() in ("1", "true", "yes", "on")
        return cast(sec[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}") from None
