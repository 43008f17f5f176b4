"""Run configuration: a JSON document with named blocks, validated up front.

Shape::

    {
      "name": "...", "description": "...",
      "map": {"kind": "disk" | "laurent" | "power_family", ...},
      "measure": {...}            # or "measures": [{"label", "measure", "options"?, "tolerances"?}]
      "q": [2],
      "degrees": [1, 2, 4] | {"start": 1, "stop": 40, "step": 1},
      "quadrature": {"n_theta": 512, "n_r": 64},
      "experiments": ["norm_ratio", ...],
      "tolerances": {"ratio": 0.05, ...},
      "options": {"<experiment>": {...}},
      "output": "runs/demo"
    }

A measure block holds ``radial``, ``angular`` and ``h`` as ``{"family": name,
**params}`` plus point lists ``exterior_atoms``, ``boundary_atoms``,
``sigma1`` and ``sigma2`` with entries ``[re, im, mass]``.  Complex scalars
are written as a number or as ``[re, im]``.
"""

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

from .conformal import ExteriorMap
from .measure import (
    ANGULAR_FAMILIES,
    RADIAL_FAMILIES,
    WEIGHT_FAMILIES,
    RegionMeasure,
)

EXPERIMENTS = (
    "norm_ratio",
    "weak_moments",
    "zeros",
    "strong",
    "christoffel",
    "faber",
    "psiint",
    "l1demo",
    "lemniscate",
    "moments",
    "oracle",
    "exact",
)
# experiments that need the region measure block
NEEDS_MEASURE = {"norm_ratio", "weak_moments", "zeros", "strong", "christoffel", "exact"}
MAP_KINDS = ("disk", "laurent", "power_family")
TOP_LEVEL = {"name", "description", "map", "measure", "measures", "q", "degrees", "quadrature",
             "experiments", "tolerances", "options", "output", "budget_seconds"}


class ConfigError(ValueError):
    """Carries every offending field; ``str`` lists them one per line."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(f"  {p}" for p in self.problems))


def as_complex(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError("complex values are [re, im]")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, bool):
        raise ValueError("boolean is not a number")
    return complex(v)


def build_map(block):
    kind = block.get("kind", "disk")
    if kind == "disk":
        return ExteriorMap.disk()
    if kind == "laurent":
        coeffs = [as_complex(c) for c in block["coeffs"]]
        return ExteriorMap.laurent(
            coeffs,
            rho=block.get("rho"),
            rho_tilde=block.get("rho_tilde"),
            truncation_order=block.get("truncation_order"),
        )
    if kind == "power_family":
        return ExteriorMap.power_family(int(block["p"]), as_complex(block["c"]), rho=block.get("rho"))
    raise ValueError(f"unknown map kind {kind!r}")


def _family(block, registry, what):
    block = dict(block or {"family": next(iter(registry))})
    name = block.pop("family", None)
    if name not in registry:
        raise ValueError(f"unknown {what} family {name!r}; known: {sorted(registry)}")
    if what == "angular" and "atoms" in block:
        block["atoms"] = tuple((float(t), float(m)) for t, m in block["atoms"])
    if what == "angular" and isinstance(block.get("a"), list):
        block["a"] = as_complex(block["a"])
    return registry[name](**block)


def build_radial(block):
    return _family(block, RADIAL_FAMILIES, "radial")


def build_weight(block):
    return _family(block, WEIGHT_FAMILIES, "h")


def _points(entries):
    out = []
    for e in entries or ():
        if len(e) != 3:
            raise ValueError("point entries are [re, im, mass]")
        out.append((complex(float(e[0]), float(e[1])), float(e[2])))
    return tuple(out)


def build_measure(mp, block):
    return RegionMeasure(
        mp,
        build_radial(block.get("radial", {"family": "delta1"})),
        _family(block.get("angular", {"family": "uniform"}), ANGULAR_FAMILIES, "angular"),
        build_weight(block.get("h", {"family": "one"})),
        sigma1=_points(block.get("sigma1")),
        sigma2=_points(block.get("sigma2")),
        exterior_atoms=_points(block.get("exterior_atoms")),
        boundary_atoms=_points(block.get("boundary_atoms")),
    )


def expand_degrees(grid):
    if isinstance(grid, dict):
        start, stop, step = int(grid["start"]), int(grid["stop"]), int(grid.get("step", 1))
        if step <= 0:
            raise ValueError("step must be positive")
        return list(range(start, stop + 1, step))
    return [int(n) for n in grid]


@dataclass
class MeasureEntry:
    label: str
    measure: RegionMeasure | None
    options: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)


@dataclass
class RunConfig:
    raw: dict
    name: str
    map: ExteriorMap | None
    measures: list
    q: list
    degrees: list
    n_theta: int
    n_r: int
    experiments: list
    tolerances: dict
    options: dict
    output: str | None
    budget_seconds: float | None = None

    @classmethod
    def from_dict(cls, raw):
        """Validate ``raw`` and build the objects; raise :class:`ConfigError` listing every problem."""
        problems = []
        raw = copy.deepcopy(raw)
        if not isinstance(raw, dict):
            raise ConfigError(["<root>: expected a JSON object"])
        for key in sorted(set(raw) - TOP_LEVEL):
            problems.append(f"{key}: unknown field")

        experiments = raw.get("experiments", [])
        if not isinstance(experiments, list) or not experiments:
            problems.append("experiments: expected a non-empty list")
            experiments = []
        for i, e in enumerate(experiments):
            if e not in EXPERIMENTS:
                problems.append(f"experiments[{i}]: unknown experiment {e!r}; known: {list(EXPERIMENTS)}")

        mp = None
        try:
            mp = build_map(raw.get("map", {"kind": "disk"}))
        except Exception as exc:  # noqa: BLE001 - every map problem is reported
            problems.append(f"map: {exc}")

        q = raw.get("q", [2])
        q = q if isinstance(q, list) else [q]
        for i, v in enumerate(q):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
                problems.append(f"q[{i}]: must be a positive number, got {v!r}")

        degrees = []
        try:
            degrees = expand_degrees(raw.get("degrees", [1]))
            if not degrees:
                problems.append("degrees: empty degree grid")
            elif any(b <= a for a, b in zip(degrees, degrees[1:])):
                problems.append("degrees: grid must be strictly increasing")
            elif degrees[0] < 0:
                problems.append("degrees: degrees must be non-negative")
        except Exception as exc:  # noqa: BLE001
            problems.append(f"degrees: {exc}")

        quad = raw.get("quadrature", {})
        n_theta, n_r = quad.get("n_theta", 512), quad.get("n_r", 64)
        if not isinstance(n_theta, int) or n_theta < 64:
            problems.append(f"quadrature.n_theta: need an integer >= 64, got {n_theta!r}")
        if not isinstance(n_r, int) or n_r < 16:
            problems.append(f"quadrature.n_r: need an integer >= 16, got {n_r!r}")

        tolerances = raw.get("tolerances", {})
        problems += _check_tolerances(tolerances, "tolerances")

        measures = []
        blocks = raw.get("measures")
        if blocks is None and "measure" in raw:
            blocks = [{"label": "main", "measure": raw["measure"]}]
        if "measure" in raw and "measures" in raw:
            problems.append("measure: give either 'measure' or 'measures', not both")
        for i, entry in enumerate(blocks or []):
            where = f"measures[{i}]"
            label = entry.get("label", f"m{i}")
            tol = entry.get("tolerances", {})
            problems += _check_tolerances(tol, f"{where}.tolerances")
            meas = None
            if mp is not None:
                try:
                    meas = build_measure(mp, entry.get("measure", {}))
                except Exception as exc:  # noqa: BLE001
                    problems.append(f"{where}.measure: {exc}")
            measures.append(MeasureEntry(label, meas, entry.get("options", {}), tol))
        labels = [m.label for m in measures]
        if len(set(labels)) != len(labels):
            problems.append("measures: labels must be unique")
        if NEEDS_MEASURE & set(experiments) and not measures:
            problems.append("measure: the selected experiments need a measure block")

        options = raw.get("options", {})
        if not isinstance(options, dict):
            problems.append("options: expected an object")
            options = {}
        for key in options:
            if key not in EXPERIMENTS:
                problems.append(f"options.{key}: not an experiment")

        output = raw.get("output")
        budget = raw.get("budget_seconds")
        if budget is not None and not (isinstance(budget, (int, float)) and budget > 0):
            problems.append("budget_seconds: must be positive")
        if problems:
            raise ConfigError(problems)
        return cls(raw, raw.get("name", "run"), mp, measures, [float(v) for v in q], degrees,
                   n_theta, n_r, list(experiments), dict(tolerances), options, output, budget)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError([f"<file>: not valid JSON ({exc})"]) from None
        return cls.from_dict(raw)

    def to_dict(self):
        """The validated input document; running it again reproduces the run."""
        return copy.deepcopy(self.raw)

    def tol(self, key, default, entry=None):
        if entry is not None and key in entry.tolerances:
            return float(entry.tolerances[key])
        return float(self.tolerances.get(key, default))

    def opts(self, experiment, entry=None):
        out = dict(self.options.get(experiment, {}))
        if entry is not None:
            out.update(entry.options.get(experiment, {}))
        return out


def _check_tolerances(tol, where):
    if not isinstance(tol, dict):
        return [f"{where}: expected an object"]
    bad = []
    for k, v in tol.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            bad.append(f"{where}.{k}: tolerance must be positive, got {v!r}")
    return bad


def suite_dir():
    return Path(__file__).resolve().parent / "suites"


def list_suites():
    """``[(name, description, path)]`` for the bundled suites, sorted by name."""
    out = []
    for path in sorted(suite_dir().glob("*.json")):
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        out.append((path.stem, raw.get("description", ""), path))
    return out


def load_suite(name):
    path = suite_dir() / f"{name}.json"
    if not path.exists():
        known = ", ".join(n for n, _, _ in list_suites())
        raise ConfigError([f"suite: unknown suite {name!r}; known: {known}"])
    return RunConfig.load(path)
