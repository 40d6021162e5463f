"""JSON file formats with exact fraction strings."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Union

from .errors import ValidationError
from .omega import GroupConfig, OmegaParams
from .prob import JointDistribution, as_fraction

PathLike = Union[str, Path]


def _bits(values) -> str:
    return "".join(str(v) for v in values)


def distribution_to_json(dist: JointDistribution) -> dict:
    return {
        "n": dist.n,
        "eve_alphabet": list(dist.eve_alphabet),
        "rows": [{"bits": _bits(bits), "eve": eve, "p": str(p)} for (bits, eve), p in dist.items()],
    }


def distribution_from_json(data: dict) -> JointDistribution:
    try:
        n = int(data["n"])
        alphabet = list(data["eve_alphabet"])
        mass = {}
        for row in data["rows"]:
            bits = tuple(int(c) for c in row["bits"])
            if len(bits) != n or set(bits) - {0, 1}:
                raise ValidationError(f"bad bits {row['bits']!r} for n={n}")
            key = (bits, row["eve"])
            if key in mass:
                raise ValidationError(f"duplicate row {row['bits']}/{row['eve']}")
            mass[key] = as_fraction(row["p"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed distribution file: {exc}") from exc
    return JointDistribution(n, alphabet, mass)


def omega_to_json(params: OmegaParams) -> dict:
    return {"n": params.n, "omega": [str(w) for w in params.omega]}


def omega_from_json(data: dict) -> OmegaParams:
    try:
        return OmegaParams.from_strings(int(data["n"]), list(data["omega"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed omega file: {exc}") from exc


def groups_to_json(config: GroupConfig) -> dict:
    return {"n": config.n, "groups": [sorted(g) for g in config.groups]}


def groups_from_json(data: dict) -> GroupConfig:
    try:
        return GroupConfig(int(data["n"]), tuple(frozenset(int(p) for p in g) for g in data["groups"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed group file: {exc}") from exc


def read_json(path: PathLike) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc


def write_json(path: PathLike, data: dict):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def load_omega(path: PathLike) -> OmegaParams:
    return omega_from_json(read_json(path))


def load_distribution(path: PathLike) -> JointDistribution:
    """Read a distribution file; an omega file is expanded into its P_Omega table."""
    data = read_json(path)
    if "omega" in data:
        from .omega import build_omega_distribution
        return build_omega_distribution(omega_from_json(data))
    return distribution_from_json(data)


def sha256_of(path: PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def read_key_value(path: PathLike) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, keys use ``_`` or ``-``."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key=value")
        key, value = (t.strip() for t in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out
