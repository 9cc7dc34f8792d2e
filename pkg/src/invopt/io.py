"""JSON instance files and report serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .errors import SchemaError
from .problem import ForwardProblem, RawProblem, attach_observation, standardize

FORMAT_VERSION = 1
SIG_DIGITS = 12


def load_schema() -> dict:
    text = resources.files("invopt").joinpath("schema/instance.schema.json").read_text()
    return json.loads(text)


def _reject_constant(token):
    raise SchemaError(f"non-finite number {token} in JSON input")


def parse_json_text(text: str) -> Any:
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc}") from None


@dataclass(frozen=True, eq=False)
class InstanceFile:
    name: str
    raw: RawProblem
    observation: tuple
    reference_cost: tuple
    group: str = ""
    config: dict = field(default_factory=dict)

    def standardize(self) -> ForwardProblem:
        return standardize(self.raw)

    def build(self):
        """``(problem, observation, c_ring)`` ready for the solvers."""
        p = self.standardize()
        if len(self.reference_cost) != p.structural_count:
            raise SchemaError(f"reference_cost has {len(self.reference_cost)} entries, "
                              f"expected {p.structural_count}")
        obs = attach_observation(p, self.observation)
        return p, obs, np.array(self.reference_cost, dtype=float)


def instance_from_dict(data: dict, default_name: str = "instance") -> InstanceFile:
    try:
        jsonschema.validate(data, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"schema violation at {where}: {exc.message}") from None
    prob = data["problem"]
    n = prob["num_vars"]
    rows = [(c["coeffs"], c["relation"], c["rhs"]) for c in prob["constraints"]]
    integ = prob.get("integrality", True)
    raw = RawProblem.from_rows(rows, name=data.get("name", default_name), num_vars=n,
                               upper_bounds=prob.get("upper_bounds"),
                               integrality=integ if integ is not False else None,
                               lower_bounds=prob.get("lower_bounds"))
    return InstanceFile(raw.name, raw, tuple(float(v) for v in data["observation"]),
                        tuple(float(v) for v in data["reference_cost"]),
                        data.get("group", ""), dict(data.get("config", {})))


def instance_to_dict(inst: InstanceFile) -> dict:
    raw = inst.raw
    prob = {
        "num_vars": raw.num_vars,
        "constraints": [{"coeffs": list(c.coeffs), "relation": c.relation, "rhs": c.rhs}
                        for c in raw.constraints],
        "upper_bounds": list(raw.upper_bounds),
        "integrality": list(raw.integrality),
    }
    out = {"format": FORMAT_VERSION, "name": inst.name}
    if inst.group:
        out["group"] = inst.group
    out.update({"problem": prob, "observation": list(inst.observation),
                "reference_cost": list(inst.reference_cost)})
    if inst.config:
        out["config"] = dict(inst.config)
    return out


def load_instance(path) -> InstanceFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from None
    data = parse_json_text(text)
    if not isinstance(data, dict):
        raise SchemaError("instance file must hold a JSON object")
    return instance_from_dict(data, default_name=path.stem)


def dump_instance(inst: InstanceFile, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n")


def instance_from_arrays(name, A, relations, b, x_hat, c_ring, *, upper_bounds=None,
                         integrality=True, group="", config=None) -> InstanceFile:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if isinstance(relations, str):
        relations = [relations] * A.shape[0]
    raw = RawProblem.from_rows(zip(A.tolist(), relations, list(map(float, b))), name=name,
                               num_vars=A.shape[1], upper_bounds=upper_bounds,
                               integrality=integrality)
    return InstanceFile(name, raw, tuple(map(float, x_hat)), tuple(map(float, c_ring)),
                        group, dict(config or {}))


def round_sig(v: float, digits: int = SIG_DIGITS):
    if v is None:
        return None
    v = float(v)
    if not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if v == 0.0:
        return 0.0
    return float(f"{v:.{digits}g}")


def to_jsonable(obj, digits: int = SIG_DIGITS):
    """Recursively convert numpy data to JSON types with floats at ``digits`` significant digits."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v, digits) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return round_sig(float(obj), digits)
    if isinstance(obj, (float, np.floating)):
        return round_sig(float(obj), digits)
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(to_jsonable(report), indent=2, sort_keys=False)


def dumps_record(record: dict) -> str:
    """One JSONL line."""
    return json.dumps(to_jsonable(record), separators=(",", ":"))


def load_cost(path) -> np.ndarray:
    """Cost file: a JSON array, or an object with ``c_hat`` (e.g. a solve report)."""
    data = parse_json_text(Path(path).read_text())
    if isinstance(data, dict):
        data = data.get("c_hat")
    if not isinstance(data, list) or not all(isinstance(v, (int, float)) and
                                             not isinstance(v, bool) for v in data):
        raise SchemaError("cost file must hold a numeric array or an object with c_hat")
    return np.array(data, dtype=float)
