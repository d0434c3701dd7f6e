import json
import math
from typing import Any, Dict, Iterable, Optional, Tuple

import attrs

from spectral_operations.basis import make_grid
from spectral_operations.errors import ConfigError, ConfigurationError
from spectral_operations.harness import EXAMPLES, LORENTZIAN, SOLITON, WAVES, ExampleConfig, build_exact, p_from_n
from spectral_operations.travelwave import WaveProblem

SECTIONS = {
    "example": None,
    "equation": ("alpha", "beta", "gamma", "delta"),
    "grid": ("p", "ell"),
    "stepper": ("tau", "T", "fp_tol", "fp_max_iters", "snapshot_stride"),
    "initial_data": (
        "kind", "bumps", "parity", "velocities", "phases", "forced",
        "waves", "sigma1", "core_radius", "n_stages",
    ),
    "travelwave": (
        "c", "sigma", "n_stages", "newton_max_iters", "max_refinements", "tol_scale", "translate_T",
    ),
    "harness": ("refine", "n_samples", "n_list", "workers"),
    "output": ("directory", "formats", "record_wall_time", "snapshots"),
}

INT_KEYS = {"p", "fp_max_iters", "snapshot_stride", "n_stages", "newton_max_iters",
            "max_refinements", "refine", "n_samples", "workers"}
FLOAT_KEYS = {"alpha", "beta", "gamma", "delta", "ell", "tau", "T", "fp_tol", "sigma1",
              "core_radius", "c", "sigma", "tol_scale", "translate_T"}
BOOL_KEYS = {"forced", "record_wall_time", "snapshots"}

# section that owns each validated attribute, for key paths in error messages
OWNER = {key: section for section, keys in SECTIONS.items() if keys for key in keys}

FORMATS = ("csv", "json")


@attrs.frozen
class OutputConfig:
    directory: str = "out"
    formats: Tuple[str, ...] = FORMATS
    record_wall_time: bool = False
    snapshots: bool = True


@attrs.frozen
class WaveSpec:
    """Traveling-wave run; defaults are the first wave of Example 5."""

    alpha: float = 1.0
    gamma: float = 1.0
    delta: float = 1.0
    c: float = 0.5
    sigma: float = 0.95
    p: int = 2048
    ell: float = 8.0
    tau: float = 0.02
    n_stages: int = 20
    newton_max_iters: int = 50
    max_refinements: int = 6
    tol_scale: float = 1e-12
    translate_T: float = 0.0

    def problem(self) -> WaveProblem:
        return WaveProblem(
            alpha=self.alpha, gamma=self.gamma, delta=self.delta, c=self.c, sigma=self.sigma,
            grid=make_grid(self.p, self.ell), n_stages=self.n_stages,
            newton_max_iters=self.newton_max_iters, max_refinements=self.max_refinements,
            tol_scale=self.tol_scale,
        )


@attrs.frozen
class RunConfig:
    example: Optional[int]
    case: Optional[ExampleConfig]
    wave: Optional[WaveSpec]
    n_list: Tuple[int, ...] = ()
    workers: int = 1
    output: OutputConfig = OutputConfig()

    @property
    def mode(self) -> str:
        return "travelwave" if self.wave is not None else "run"


def load_config(path):
    with open(path, 'r') as f:
        return parse_config(f.read())


def _check_keys(section: str, value: Any, allowed: Iterable[str]) -> Dict[str, Any]:
    if not isinstance(value, dict):
        raise ConfigError(section, f"must be an object, got {type(value).__name__}")
    for key in value:
        if key not in allowed:
            raise ConfigError(f"{section}.{key}", "unknown key")
    return value


def _typed(section: str, key: str, value: Any) -> Any:
    path = f"{section}.{key}"
    if key in BOOL_KEYS:
        if not isinstance(value, bool):
            raise ConfigError(path, f"must be true or false, got {value!r}")
        return value
    if key in INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"must be an integer, got {value!r}")
        return value
    if key in FLOAT_KEYS:
        if key == "beta" and value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(path, f"must be a finite number, got {value!r}")
        return float(value)
    return value


def _section(doc: Dict[str, Any], name: str) -> Dict[str, Any]:
    raw = _check_keys(name, doc.get(name, {}), SECTIONS[name])
    return {key: _typed(name, key, value) for key, value in raw.items()}


def _rewrap(exc: ConfigurationError, default_path: str) -> ConfigError:
    message = str(exc)
    head = message.split(" ", 1)[0]
    if "." in head:
        return ConfigError(head, message.split(" ", 1)[1] if " " in message else message)
    if head in OWNER:
        return ConfigError(f"{OWNER[head]}.{head}", message)
    return ConfigError(default_path, message)


def _output(doc: Dict[str, Any]) -> OutputConfig:
    out = _section(doc, "output")
    formats = out.get("formats", list(FORMATS))
    if not isinstance(formats, list) or any(f not in FORMATS for f in formats):
        raise ConfigError("output.formats", f"must be a list drawn from {list(FORMATS)}, got {formats!r}")
    directory = out.get("directory", "out")
    if not isinstance(directory, str) or not directory:
        raise ConfigError("output.directory", f"must be a non-empty string, got {directory!r}")
    return OutputConfig(
        directory=directory,
        formats=tuple(formats),
        record_wall_time=out.get("record_wall_time", False),
        snapshots=out.get("snapshots", True),
    )


def _wave_spec(doc: Dict[str, Any]) -> WaveSpec:
    equation = _section(doc, "equation")
    if "beta" in equation:
        raise ConfigError("equation.beta", "is derived from travelwave.sigma and must not be given")
    fields = {**equation, **_section(doc, "grid"), **_section(doc, "travelwave")}
    stepper = _section(doc, "stepper")
    if "tau" in stepper:
        fields["tau"] = stepper["tau"]
    spec = WaveSpec(**fields)
    try:
        spec.problem()
    except ConfigurationError as exc:
        raise _rewrap(exc, "travelwave") from exc
    return spec


def _case(doc: Dict[str, Any], example: Optional[int]) -> ExampleConfig:
    initial = _section(doc, "initial_data")
    kind = initial.get("kind")
    if example is None:
        if kind not in (LORENTZIAN, SOLITON, WAVES):
            raise ConfigError("initial_data.kind", f"must be one of {[LORENTZIAN, SOLITON, WAVES]} when no example is given")
        base = ExampleConfig(kind=kind)
    else:
        base = EXAMPLES[example]
        if kind is not None and kind != base.kind:
            raise ConfigError("initial_data.kind", f"example {example} uses {base.kind!r}, got {kind!r}")
    initial.pop("kind", None)

    harness = _section(doc, "harness")
    overrides = {
        **_section(doc, "equation"),
        **_section(doc, "grid"),
        **_section(doc, "stepper"),
        **initial,
        **{k: v for k, v in harness.items() if k in ("refine", "n_samples")},
    }
    try:
        case = attrs.evolve(base, **overrides)
        make_grid(case.p, case.ell)
        _ = case.params
        case.stepper()
        if case.refine < 2:
            raise ConfigError("harness.refine", f"must be at least 2, got {case.refine}")
        if case.n_samples is not None and case.n_samples < 10 * case.p:
            raise ConfigError("harness.n_samples", f"must be at least 10*p = {10 * case.p}")
        if case.parity not in ("even", "odd"):
            raise ConfigError("initial_data.parity", f"must be 'even' or 'odd', got {case.parity!r}")
        if any(len(bump) != 4 for bump in case.bumps):
            raise ConfigError("initial_data.bumps", "each bump must be [r, a, x0, c]")
        if any(len(wave) != 2 for wave in case.waves):
            raise ConfigError("initial_data.waves", "each wave must be [c, center]")
        if case.kind == WAVES and not case.waves:
            raise ConfigError("initial_data.waves", "at least one wave is required")
        build_exact(case)
    except ConfigError:
        raise
    except (ConfigurationError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise _rewrap(exc, "initial_data") from exc
        raise ConfigError("initial_data", str(exc)) from exc
    return case


def parse_config(text: str) -> RunConfig:
    """Validate a JSON run document; every rejection names the offending key path."""
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError("<document>", f"malformed JSON: {exc}") from exc
    _check_keys("<document>", doc, SECTIONS)

    example = doc.get("example")
    if example is not None and (isinstance(example, bool) or example not in EXAMPLES):
        raise ConfigError("example", f"must be one of {sorted(EXAMPLES)}, got {example!r}")

    harness = _section(doc, "harness")
    n_list = harness.get("n_list", [])
    if not isinstance(n_list, list) or any(isinstance(n, bool) or not isinstance(n, int) for n in n_list):
        raise ConfigError("harness.n_list", f"must be a list of integers, got {n_list!r}")
    for n in n_list:
        try:
            p_from_n(n)
        except ConfigurationError as exc:
            raise ConfigError("harness.n_list", str(exc)) from exc
    workers = harness.get("workers", 1)
    if workers < 1:
        raise ConfigError("harness.workers", f"must be positive, got {workers}")

    output = _output(doc)
    if "travelwave" in doc:
        if example is not None or "initial_data" in doc:
            raise ConfigError("travelwave", "cannot be combined with example or initial_data")
        return RunConfig(example=None, case=None, wave=_wave_spec(doc), output=output)

    return RunConfig(
        example=example,
        case=_case(doc, example),
        wave=None,
        n_list=tuple(n_list),
        workers=workers,
        output=output,
    )
