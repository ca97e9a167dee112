"""``kanlab`` command line: run a JSON config and write its artifacts.

Config layout (``kanlab schema`` prints the full JSON schema)::

    {
      "schema_version": 1,
      "system":    {"family": "kan_cylinder", "k": 3, "eps": 0.5},
      "operation": {"name": "basin"},
      "settings":  {"grid": {"nx": 512, "ny": 512}, "classify": {"max_iter": 10000}},
      "output_dir": "out/basin",
      "seed": 2024
    }

Families and their required parameters:

    kan_cylinder     k, eps
    kan_solid_torus  M, eps, r, p, q
    kan_t3           M, eps, r, p, q
    toy              A, delta

Operations: validate, lyapunov (level or x0), basin, intermingle (scales),
dimension (j_min, j_max), toy, sweep (mode, etas).  Every operation except
``validate`` draws random numbers and needs ``seed``.  A relative
``output_dir`` is resolved against the directory holding the config.

Exit status: 0 on success (condition failures are data, not errors),
1 for config errors, 2 for runtime numeric errors.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path

import jsonschema

from . import __version__
from ._io import atomic_write_bytes, atomic_write_csv, atomic_write_json
from .basins import (
    ClassifySettings,
    SliceSpec,
    admissible_scales,
    basin_map,
    box_counts,
    boundary_box_dimension,
    default_j_max,
    intermingling_table,
    write_intermingling_csv,
)
from .ergodic import OrbitSettings, center_lyapunov, random_point, rng_for
from .experiments import ExperimentSettings, run_robustness_sweep, run_toy_experiment
from .phase import Box2D, DomainError, PhasePoint
from .systems import QuadratureSettings, ToySystem, system_from_dict, validate_conditions

SCHEMA_VERSION = 1
OPERATIONS = ("validate", "lyapunov", "basin", "intermingle", "dimension", "toy", "sweep")

_int_matrix = {
    "type": "array",
    "minItems": 2,
    "maxItems": 2,
    "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "integer"}},
}
_torus_point = {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}}
_perturbation = {
    "type": "object",
    "additionalProperties": False,
    "required": ["mode", "eta"],
    "properties": {
        "mode": {"enum": ["boundary_preserving", "fiber_rotation"]},
        "eta": {"type": "number", "minimum": 0},
        "phase": {"type": "number"},
    },
}
_eps = {"type": "number", "minimum": 0, "exclusiveMaximum": 1}


def _family(name, required, props):
    return {
        "if": {"properties": {"family": {"const": name}}, "required": ["family"]},
        "then": {
            "required": ["family", *required],
            "additionalProperties": False,
            "properties": {"family": {"const": name}, "perturbation": _perturbation, **props},
        },
    }


_torus_props = {"M": _int_matrix, "eps": _eps, "r": {"type": "number", "exclusiveMinimum": 0}, "p": _torus_point, "q": _torus_point}

_op = {
    "type": "object",
    "required": ["name"],
    "additionalProperties": False,
    "properties": {
        "name": {"enum": list(OPERATIONS)},
        "level": {"type": "number"},
        "x0": {"type": "array", "minItems": 2, "maxItems": 3, "items": {"type": "number"}},
        "scales": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "j_min": {"type": "integer", "minimum": 0},
        "j_max": {"type": "integer", "minimum": 0},
        "mode": {"enum": ["boundary_preserving", "fiber_rotation"]},
        "etas": {"type": "array", "minItems": 1, "items": {"type": "number", "minimum": 0}},
    },
    "allOf": [
        {"if": {"properties": {"name": {"const": "sweep"}}}, "then": {"required": ["mode", "etas"]}},
    ],
}


def _object(props):
    return {"type": "object", "additionalProperties": False, "properties": props}


CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "kanlab run config",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "system", "operation"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "system": {
            "type": "object",
            "required": ["family"],
            "properties": {"family": {"enum": ["kan_cylinder", "kan_solid_torus", "kan_t3", "toy"]}},
            "allOf": [
                _family("kan_cylinder", ["k", "eps"], {"k": {"type": "integer", "minimum": 3}, "eps": _eps}),
                _family("kan_solid_torus", list(_torus_props), _torus_props),
                _family("kan_t3", list(_torus_props), _torus_props),
                _family("toy", ["A", "delta"], {"A": _int_matrix, "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}}),
            ],
        },
        "operation": _op,
        "settings": _object(
            {
                "orbit": _object({"n_transient": {"type": "integer", "minimum": 0}, "n_average": {"type": "integer", "minimum": 1}}),
                "classify": _object(
                    {
                        "max_iter": {"type": "integer", "minimum": 1},
                        "tol": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.25},
                        "window": {"type": "integer", "minimum": 1},
                    }
                ),
                "quadrature": _object(
                    {
                        "n_circle": {"type": "integer", "minimum": 16},
                        "n_torus": {"type": "integer", "minimum": 16},
                        "n_base_samples": {"type": "integer", "minimum": 16},
                        "n_fiber_samples": {"type": "integer", "minimum": 16},
                    }
                ),
                "grid": _object(
                    {
                        "nx": {"type": "integer", "minimum": 1},
                        "ny": {"type": "integer", "minimum": 1},
                        "box": {"type": "array", "minItems": 4, "maxItems": 4, "items": {"type": "number"}},
                        "x_axis": {"enum": ["theta", "u", "v", "t"]},
                        "y_axis": {"enum": ["theta", "u", "v", "t"]},
                        "fixed": {"type": "number"},
                        "sampling": {"enum": ["stratified", "center"]},
                    }
                ),
                "scales": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            }
        ),
        "output_dir": {"type": "string", "minLength": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
    },
}


class ConfigError(Exception):
    pass


def _error_path(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "required" and isinstance(err.instance, dict):
        # one error per missing property; the message names which
        missing = [k for k in err.validator_value if k not in err.instance and err.message.startswith(repr(k))]
        if missing:
            parts.append(missing[0])
    elif err.validator == "additionalProperties" and isinstance(err.instance, dict):
        allowed = set(err.schema.get("properties", {}))
        extra = [k for k in err.instance if k not in allowed]
        if extra:
            parts.append(extra[0])
    return ".".join(parts) or "<root>"


def validate_config(cfg) -> None:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        raise ConfigError(f"{_error_path(err)}: {err.message}")
    if cfg["operation"]["name"] != "validate" and "seed" not in cfg:
        raise ConfigError(f"seed: required for operation {cfg['operation']['name']!r}")


def load_config(path) -> tuple[dict, bytes]:
    raw = Path(path).read_bytes()
    try:
        cfg = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"<root>: not valid JSON ({exc})") from None
    validate_config(cfg)
    return cfg, raw


def _settings(cfg: dict, threads: int):
    s = cfg.get("settings", {})
    seed = int(cfg.get("seed", 0))
    try:
        orbit = OrbitSettings(**{"n_transient": 1000, "n_average": 10**5, **s.get("orbit", {}), "seed": seed})
        classify = ClassifySettings(**s.get("classify", {}))
        quad = QuadratureSettings(**s.get("quadrature", {}))
        g = dict(s.get("grid", {}))
        box = Box2D(*g.pop("box")) if "box" in g else Box2D.unit()
        spec = SliceSpec(box=box, seed=seed, **g)
    except DomainError as exc:
        raise ConfigError(f"settings: {exc}") from None
    exp = ExperimentSettings(spec, classify, orbit, quad, tuple(s.get("scales", (3, 4, 5))), threads)
    return exp


def config_digest(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def _run_operation(cfg: dict, system, exp: ExperimentSettings, out: Path) -> list[Path]:
    op = cfg["operation"]
    name = op["name"]
    if name == "validate":
        report = validate_conditions(system, exp.quad)
        return [
            atomic_write_json(out / "validate.json", report.to_dict()),
            atomic_write_csv(out / "conditions.csv", ["condition", "passed"], [(c.name, int(c.passed)) for c in report.conditions]),
        ]
    if name == "lyapunov":
        if "x0" in op:
            coords = op["x0"]
            x0 = PhasePoint(tuple(coords[:-1]) if system.base_dim == 2 else coords[0], coords[-1])
        else:
            x0 = random_point(system, rng_for(exp.orbit.seed), op.get("level"))
        est = center_lyapunov(system, x0, exp.orbit)
        return [atomic_write_json(out / "lyapunov.json", {"x0": list(x0.coords), "seed": exp.orbit.seed, **est.to_dict()})]
    if name in ("basin", "intermingle", "dimension"):
        grid = basin_map(system, exp.slice, exp.classify, exp.workers)
        paths = []
        if name == "dimension":
            j_max = op.get("j_max", default_j_max(grid))
            counts = box_counts(grid, op.get("j_min", 2), j_max)
            dim = boundary_box_dimension(grid, op.get("j_min", 2), j_max)
            paths.append(atomic_write_csv(out / "box_counts.csv", ["scale_j", "mixed_count"], counts))
            paths.append(atomic_write_json(out / "dimension.json", {"box_dimension": dim, "counts": counts, "provenance": grid.provenance}))
            return paths
        scales = op.get("scales") or list(exp.scales if name == "intermingle" else admissible_scales(grid))
        rows = intermingling_table(grid, scales)
        paths.append(write_intermingling_csv(rows, out / "intermingling.csv"))
        summary = {"fractions": grid.fractions(), "counts": grid.counts(), "provenance": grid.provenance}
        if name == "basin":
            paths.append(grid.write_ppm(out / "basin.ppm"))
        paths.append(atomic_write_json(out / f"{name}_summary.json", summary))
        return paths
    if name == "toy":
        if not isinstance(system, ToySystem):
            raise DomainError("the toy operation needs a toy system")
        return run_toy_experiment(exp, system).write(out, "toy")
    if name == "sweep":
        return run_robustness_sweep(system, op["mode"], op["etas"], exp).write(out, "sweep")
    raise DomainError(f"unknown operation {name}")  # unreachable after schema validation


def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(config_path, out_dir=None, threads=None) -> int:
    try:
        cfg, raw = load_config(config_path)
        base = Path(config_path).resolve().parent
        target = out_dir or cfg.get("output_dir")
        if target is None:
            raise ConfigError("output_dir: required (or pass --out)")
        out = Path(target)
        if not out.is_absolute() and out_dir is None:
            out = base / out
        try:
            system = system_from_dict(copy.deepcopy(cfg["system"]))
        except (DomainError, TypeError) as exc:
            raise ConfigError(f"system: {exc}") from None
        exp = _settings(cfg, threads or os.cpu_count() or 1)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    start = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        artifacts = [atomic_write_bytes(out / "config.json", raw)]
        artifacts += _run_operation(cfg, system, exp, out)
    except (DomainError, ArithmeticError, ValueError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    wall = time.perf_counter() - start

    manifest = {
        "tool": "kanlab",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "operation": cfg["operation"]["name"],
        "config_sha256": config_digest(cfg),
        "system_sha256": system.digest(),
        "seeds": {"seed": cfg.get("seed"), "orbit": exp.orbit.seed, "grid": exp.slice.seed},
        "artifacts": {p.name: _file_digest(p) for p in sorted(artifacts)},
        "threads": exp.workers,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "wall_clock_s": wall,
    }
    atomic_write_json(out / "manifest.json", manifest)
    print(f"wrote {len(artifacts)} artifacts to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kanlab", description="Numerics for Kan-type partially hyperbolic skew products")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a JSON config")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    p_run.add_argument("--out", type=Path, default=None, help="output directory (overrides the config)")
    sub.add_parser("schema", help="print the config JSON schema")
    sub.add_parser("version", help="print the tool version")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        print(json.dumps(CONFIG_SCHEMA, indent=2))
        return 0
    if args.command == "version":
        print(f"kanlab {__version__}")
        return 0
    if args.threads is not None and args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return 1
    return run(args.config, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
