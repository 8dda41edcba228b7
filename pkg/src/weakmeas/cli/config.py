"""Scenario configuration: JSON loading and validation with field-path errors."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import ConfigError, WeakMeasError
from ..operators import (
    IDENTITY2,
    SIGMA1,
    SIGMA2,
    SIGMA3,
    BlochVector,
    check_density,
    check_effect,
    is_hermitian,
    pure_state,
)

SCHEMA = "weakmeas.scenario/1"
METHODS = ("oracle", "qubit-exact", "gaussian-exact", "linear-response")
NAMED_OBSERVABLES = {
    "sigma1": SIGMA1,
    "sigma2": SIGMA2,
    "sigma3": SIGMA3,
    "identity": IDENTITY2,
}
DEFAULT_GRID_POINTS = 1024


@dataclass(frozen=True)
class DetectorSpec:
    kind: str
    hbar: float = 1.0
    sigma: float | None = None
    x0: float = 0.0
    p0: float = 0.0
    grid_points: int = DEFAULT_GRID_POINTS
    samples: np.ndarray | None = field(default=None, repr=False)
    dx: float | None = None
    origin: float = 0.0


@dataclass(frozen=True)
class SweepSpec:
    values: tuple


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    name: str
    observable: np.ndarray
    rho_i: np.ndarray
    post_selection: np.ndarray
    detector: DetectorSpec
    sweep: SweepSpec
    methods: tuple
    table_name: str
    plot_name: str

    @property
    def dim(self) -> int:
        return self.observable.shape[0]


def _complex(value, path):
    if isinstance(value, bool):
        raise ConfigError(path, "expected a number")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            raise ConfigError(path, f"cannot parse complex number {value!r}") from None
    raise ConfigError(path, "expected a number or a complex string such as '0.5-1j'")


def _real(value, path, positive=False, allow_zero=True):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, "expected a real number")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if positive and (value < 0 or (value == 0 and not allow_zero)):
        raise ConfigError(path, "must be positive")
    return value


def _matrix(value, path):
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ConfigError(path, "expected a square matrix as a list of rows")
    n = len(value)
    if any(len(r) != n for r in value):
        raise ConfigError(path, "matrix is not square")
    return np.array([[_complex(v, f"{path}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(value)])


def _vector(value, path, length=None):
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "expected a list")
    if length is not None and len(value) != length:
        raise ConfigError(path, f"expected {length} entries")
    return np.array([_complex(v, f"{path}[{i}]") for i, v in enumerate(value)])


def _require(obj, key, path):
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    if key not in obj:
        raise ConfigError(f"{path}.{key}", "missing required field")
    return obj[key]


def _observable(spec, path):
    if isinstance(spec, str):
        if spec not in NAMED_OBSERVABLES:
            raise ConfigError(path, f"unknown observable {spec!r}; choose from {sorted(NAMED_OBSERVABLES)}")
        return NAMED_OBSERVABLES[spec].copy()
    A = _matrix(spec, path)
    if not is_hermitian(A):
        raise ConfigError(path, "observable must be Hermitian")
    return A


def _state(spec, path, dim):
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError(path, "expected exactly one of 'bloch', 'ket', 'density'")
    (kind, value), = spec.items()
    sub = f"{path}.{kind}"
    try:
        if kind == "bloch":
            if dim != 2:
                raise ConfigError(sub, "Bloch vectors describe qubits only")
            r = _vector(value, sub, 3).real
            return BlochVector(*r).density()
        if kind == "ket":
            return pure_state(_vector(value, sub, dim))
        if kind == "density":
            rho = _matrix(value, sub)
            if rho.shape != (dim, dim):
                raise ConfigError(sub, f"expected a {dim}x{dim} matrix")
            return check_density(rho, atol=1e-9)
    except WeakMeasError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(sub, str(exc)) from None
    raise ConfigError(path, f"unknown state kind {kind!r}")


def _post_selection(spec, path, dim):
    if spec == "identity":
        return np.eye(dim, dtype=complex)
    if isinstance(spec, dict) and set(spec) == {"effect"}:
        sub = f"{path}.effect"
        P = _matrix(spec["effect"], sub)
        if P.shape != (dim, dim):
            raise ConfigError(sub, f"expected a {dim}x{dim} matrix")
        try:
            return check_effect(P)
        except WeakMeasError as exc:
            raise ConfigError(sub, str(exc)) from None
    return _state(spec, path, dim)


def _detector(spec, path, grid_points):
    kind = _require(spec, "type", path)
    hbar = _real(spec.get("hbar", 1.0), f"{path}.hbar", positive=True, allow_zero=False)
    if kind == "gaussian":
        sigma = _real(_require(spec, "sigma", path), f"{path}.sigma", positive=True, allow_zero=False)
        n = spec.get("grid_points", DEFAULT_GRID_POINTS) if grid_points is None else grid_points
        if isinstance(n, bool) or not isinstance(n, int) or n < 16:
            raise ConfigError(f"{path}.grid_points", "must be an integer >= 16")
        return DetectorSpec(
            "gaussian",
            hbar,
            sigma,
            _real(spec.get("x0", 0.0), f"{path}.x0"),
            _real(spec.get("p0", 0.0), f"{path}.p0"),
            n,
        )
    if kind == "custom-grid":
        dx = _real(_require(spec, "dx", path), f"{path}.dx", positive=True, allow_zero=False)
        re = _require(spec, "samples_re", path)
        im = spec.get("samples_im", [0.0] * len(re) if isinstance(re, list) else None)
        if not isinstance(re, list) or not isinstance(im, list) or len(re) != len(im) or len(re) < 16:
            raise ConfigError(f"{path}.samples_re", "expected equal-length sample lists of >= 16 points")
        samples = np.array(
            [_real(a, f"{path}.samples_re[{i}]") + 1j * _real(b, f"{path}.samples_im[{i}]") for i, (a, b) in enumerate(zip(re, im))]
        )
        return DetectorSpec(
            "custom-grid", hbar, samples=samples, dx=dx, grid_points=len(re),
            origin=_real(spec.get("origin", 0.0), f"{path}.origin"),
        )
    raise ConfigError(f"{path}.type", f"unknown detector type {kind!r}; use 'gaussian' or 'custom-grid'")


def _sweep(spec, path):
    if not isinstance(spec, dict):
        raise ConfigError(path, "expected an object")
    if "g" in spec:
        return SweepSpec((_real(spec["g"], f"{path}.g"),))
    sweep = _require(spec, "sweep", path)
    sub = f"{path}.sweep"
    if isinstance(sweep, list):
        values = tuple(_real(v, f"{sub}[{i}]") for i, v in enumerate(sweep))
    else:
        start = _real(_require(sweep, "start", sub), f"{sub}.start")
        stop = _real(_require(sweep, "stop", sub), f"{sub}.stop")
        points = _require(sweep, "points", sub)
        if isinstance(points, bool) or not isinstance(points, int):
            raise ConfigError(f"{sub}.points", "must be an integer")
        spacing = sweep.get("spacing", "log")
        if points < 2:
            raise ConfigError(f"{sub}.points", "a sweep needs at least 2 points")
        if spacing == "log":
            if start <= 0 or stop <= 0:
                raise ConfigError(sub, "log-spaced sweeps need positive start and stop")
            values = tuple(float(v) for v in np.geomspace(start, stop, points))
        elif spacing == "linear":
            values = tuple(float(v) for v in np.linspace(start, stop, points))
        else:
            raise ConfigError(f"{sub}.spacing", "must be 'log' or 'linear'")
    if len(values) < 2:
        raise ConfigError(sub, "a sweep needs at least 2 points")
    return SweepSpec(tuple(sorted(values)))


def parse_config(data, grid_points=None) -> ScenarioConfig:
    """Validate a decoded JSON scenario and build a :class:`ScenarioConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("$", "expected a JSON object")
    schema = data.get("schema")
    if schema != SCHEMA:
        raise ConfigError("$.schema", f"expected {SCHEMA!r}, got {schema!r}")
    name = data.get("name", "scenario")
    if not isinstance(name, str) or not name or any(c in name for c in "/\\"):
        raise ConfigError("$.name", "must be a non-empty file-name-safe string")
    system = _require(data, "system", "$")
    A = _observable(_require(system, "observable", "$.system"), "$.system.observable")
    if "dimension" in system and system["dimension"] != A.shape[0]:
        raise ConfigError("$.system.dimension", f"observable has dimension {A.shape[0]}")
    dim = A.shape[0]
    rho = _state(_require(data, "initial_state", "$"), "$.initial_state", dim)
    P_f = _post_selection(_require(data, "post_selection", "$"), "$.post_selection", dim)
    detector = _detector(_require(data, "detector", "$"), "$.detector", grid_points)
    sweep = _sweep(_require(data, "coupling", "$"), "$.coupling")
    methods = data.get("methods", list(METHODS))
    if not isinstance(methods, list) or not methods:
        raise ConfigError("$.methods", "expected a non-empty list")
    for i, m in enumerate(methods):
        if m not in METHODS:
            raise ConfigError(f"$.methods[{i}]", f"unknown method {m!r}; choose from {list(METHODS)}")
    if "qubit-exact" in methods and dim != 2:
        raise ConfigError("$.methods", "qubit-exact needs a two-level system")
    if "gaussian-exact" in methods and (detector.kind != "gaussian" or detector.p0 != 0.0):
        raise ConfigError("$.methods", "gaussian-exact needs a gaussian detector with p0 = 0")
    outputs = data.get("outputs", {})
    if not isinstance(outputs, dict):
        raise ConfigError("$.outputs", "expected an object")
    table = outputs.get("table", name)
    plot = outputs.get("plot", f"{name}_plot")
    for key, val in (("table", table), ("plot", plot)):
        if not isinstance(val, str) or not val or any(c in val for c in "/\\"):
            raise ConfigError(f"$.outputs.{key}", "must be a bare file stem")
    return ScenarioConfig(name, A, rho, P_f, detector, sweep, tuple(dict.fromkeys(methods)), table, plot)


def load_config(path, grid_points=None) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_config(data, grid_points)


def preset_names():
    folder = resources.files("weakmeas") / "presets"
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))


def preset_data(name):
    if name not in preset_names():
        raise ConfigError("preset", f"unknown preset {name!r}")
    return json.loads((resources.files("weakmeas") / "presets" / f"{name}.json").read_text())


def resolve(config_arg, grid_points=None) -> ScenarioConfig:
    """Accept a path to a JSON file or the name of a shipped preset."""
    if not Path(config_arg).exists() and config_arg in preset_names():
        return parse_config(preset_data(config_arg), grid_points)
    return load_config(config_arg, grid_points)
