# spectral_operations/harness.py
"""
Experiment drivers, error metrics and convergence sweeps.

Examples 1-2 evolve Lorentzian manufactured solutions, 3-4 KdV N-solitons and
5-6 pairs of colliding Benjamin traveling waves. Each run produces an
ErrorReport whose rows become errors.csv.
"""

import csv
import logging
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import attrs
import numpy as np
from numpy.typing import NDArray

from spectral_operations.basis import BasisGrid, eval_expansion, make_grid
from spectral_operations.errors import ConfigurationError, MTCError
from spectral_operations.integrator import GaussStepper, StepperConfig
from spectral_operations.model import BenjaminSystem, ExactSolution, hamiltonian, l2_norm, make_source
from spectral_operations.operators import ModelParams
from spectral_operations.oracles import EVEN, ODD, LorentzianFamily, SolitonFamily
from spectral_operations.transform import SpectralField, forward, interpolate
from spectral_operations.travelwave import WaveProblem, WaveSolver

logger = logging.getLogger(__name__)

ERRORS_CSV_COLUMNS = ("t_or_n", "l2_error", "linf_error", "hamiltonian_drift", "fp_iters_max", "wall_ms")

KDV_PARAMS = ModelParams(alpha=0.0, beta=0.0, gamma=-1.0, delta=-3.0)
LORENTZIAN = "lorentzian"
SOLITON = "soliton"
WAVES = "waves"

SnapshotSink = Callable[[float, NDArray[np.float64]], None]


def _floats(values) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


def _rows(values) -> Tuple[Tuple[float, ...], ...]:
    return tuple(_floats(row) for row in values)


@attrs.frozen
class ExampleConfig:
    """Everything one run needs. beta=None on a waves run means beta = sigma1 sqrt(4 gamma (alpha - c1))."""

    kind: str = attrs.field(validator=attrs.validators.in_((LORENTZIAN, SOLITON, WAVES)))
    alpha: float = 1.0
    beta: Optional[float] = 1.0
    gamma: float = 1.0
    delta: float = 1.0
    p: int = 64
    ell: float = 8.0
    tau: float = 0.02
    T: float = 2.0
    fp_tol: float = 1e-13
    fp_max_iters: int = 50
    snapshot_stride: int = 1
    refine: int = 4
    n_samples: Optional[int] = None
    example: Optional[int] = None
    # lorentzian: (r, a, x0, c) per bump
    bumps: Tuple[Tuple[float, ...], ...] = attrs.field(default=(), converter=_rows)
    parity: str = EVEN
    # soliton
    velocities: Tuple[float, ...] = attrs.field(default=(), converter=_floats)
    phases: Tuple[float, ...] = attrs.field(default=(), converter=_floats)
    forced: Optional[bool] = None
    # waves: (c, center) per wave; the first wave fixes beta through sigma1
    waves: Tuple[Tuple[float, ...], ...] = attrs.field(default=(), converter=_rows)
    sigma1: float = 0.95
    core_radius: float = 10.0
    n_stages: int = 20

    @property
    def n(self) -> int:
        return 2 * self.p - 1

    def resolved_beta(self) -> float:
        if self.beta is not None:
            return float(self.beta)
        if self.kind != WAVES or not self.waves:
            raise ConfigurationError("beta is required unless it is derived from a traveling wave")
        c1 = self.waves[0][0]
        return self.sigma1 * math.sqrt(4.0 * self.gamma * (self.alpha - c1))

    @property
    def params(self) -> ModelParams:
        return ModelParams(alpha=self.alpha, beta=self.resolved_beta(), gamma=self.gamma, delta=self.delta)

    def stepper(self) -> StepperConfig:
        return StepperConfig(
            tau=self.tau,
            T=self.T,
            fp_tol=self.fp_tol,
            fp_max_iters=self.fp_max_iters,
            snapshot_stride=self.snapshot_stride,
        )


_LORENTZIAN_BUMPS = ((2.0, 1.0, -1.0, 1.0), (1.0, 1.0, 1.0, -2.0), (3.0, 2.0, 0.0, 0.0))

EXAMPLES: Dict[int, ExampleConfig] = {
    1: ExampleConfig(kind=LORENTZIAN, example=1, bumps=_LORENTZIAN_BUMPS, parity=EVEN),
    2: ExampleConfig(kind=LORENTZIAN, example=2, bumps=_LORENTZIAN_BUMPS, parity=ODD),
    3: ExampleConfig(
        kind=SOLITON, example=3, alpha=0.0, beta=0.0, gamma=-1.0, delta=-3.0,
        tau=0.01, T=5.0, velocities=(1.5, 0.5), phases=(-3.0, 0.0),
    ),
    4: ExampleConfig(
        kind=SOLITON, example=4, alpha=0.0, beta=0.0, gamma=-1.0, delta=-3.0,
        tau=0.01, T=5.0, velocities=(1.0, 1.0, 0.5), phases=(-4.0, -2.0, 0.0),
    ),
    5: ExampleConfig(kind=WAVES, example=5, beta=None, p=2048, T=80.0, waves=((0.5, -20.0), (-0.5, 20.0))),
    6: ExampleConfig(kind=WAVES, example=6, beta=None, p=2048, T=80.0, waves=((0.75, -30.0), (0.1, -4.0))),
}


def example_config(example: int, overrides: Optional[Dict[str, Any]] = None) -> ExampleConfig:
    if example not in EXAMPLES:
        raise ConfigurationError(f"example must be one of {sorted(EXAMPLES)}, got {example!r}")
    try:
        return attrs.evolve(EXAMPLES[example], **(overrides or {}))
    except TypeError as exc:
        raise ConfigurationError(f"unknown override for example {example}: {exc}") from exc


# ---------------------------------------------------------------------------
# error metrics


def l2_error(Y: SpectralField, exact: Callable, grid: BasisGrid, refine: int = 4) -> float:
    """Quadrature L2 norm of (expansion - exact) on the MTC grid with refine*p nodes.

    The refined grid still leaves out the far tail, so the value is a slight
    underestimate for algebraically decaying errors."""
    if refine < 2:
        raise ConfigurationError(f"refine must be at least 2, got {refine!r}")
    fine = make_grid(refine * grid.p, grid.ell)
    diff = eval_expansion(Y, fine.nodes, grid.ell) - np.asarray(exact(fine.nodes), dtype=float)
    return float(math.sqrt(np.sum(fine.weights * diff * diff)))


def linf_error(
    Y: SpectralField, exact: Callable, grid: BasisGrid, n_samples: Optional[int] = None, refine: int = 4
) -> float:
    """max |expansion - exact| over refined MTC nodes plus a uniform grid on [-4 ell, 4 ell]."""
    n_samples = 10 * grid.p if n_samples is None else n_samples
    if n_samples < 10 * grid.p:
        raise ConfigurationError(f"n_samples must be at least 10*p = {10 * grid.p}, got {n_samples}")
    x = np.concatenate(
        [make_grid(refine * grid.p, grid.ell).nodes, np.linspace(-4.0 * grid.ell, 4.0 * grid.ell, n_samples)]
    )
    diff = eval_expansion(Y, x, grid.ell) - np.asarray(exact(x), dtype=float)
    return float(np.max(np.abs(diff)))


# ---------------------------------------------------------------------------
# reports


@attrs.frozen
class ErrorRow:
    t_or_n: Union[int, float]
    l2_error: float
    linf_error: float
    hamiltonian_drift: float
    fp_iters_max: int
    wall_ms: float
    n: int
    tau: float

    def as_csv(self) -> List[str]:
        # sweep rows carry the integer n, time-series rows a float t
        t_or_n = str(self.t_or_n) if isinstance(self.t_or_n, int) else repr(float(self.t_or_n))
        return [
            t_or_n,
            repr(float(self.l2_error)),
            repr(float(self.linf_error)),
            repr(float(self.hamiltonian_drift)),
            str(int(self.fp_iters_max)),
            repr(float(self.wall_ms)),
        ]


@attrs.define
class ErrorReport:
    example: Optional[int]
    rows: List[ErrorRow] = attrs.field(factory=list)
    summary: Dict[str, Any] = attrs.field(factory=dict)
    partial: bool = False
    failure: Optional[str] = None

    _keys: set = attrs.field(factory=set, init=False, repr=False)

    def add(self, row: ErrorRow) -> None:
        key = (row.n, row.tau, row.t_or_n)
        if key in self._keys:
            raise ValueError(f"duplicate report row for n={row.n}, tau={row.tau}, t_or_n={row.t_or_n}")
        self._keys.add(key)
        self.rows.append(row)

    def column(self, name: str) -> NDArray[np.float64]:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


def write_errors_csv(report: ErrorReport, path: str) -> None:
    """Write errors.csv next to its final location and rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".errors-", suffix=".csv", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(ERRORS_CSV_COLUMNS)
            for row in report.rows:
                writer.writerow(row.as_csv())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.info("wrote %s (%d rows)", path, len(report.rows))


# ---------------------------------------------------------------------------
# initial data


def build_exact(cfg: ExampleConfig) -> Optional[ExactSolution]:
    if cfg.kind == LORENTZIAN:
        r, a, x0, c = (tuple(col) for col in zip(*cfg.bumps)) if cfg.bumps else ((), (), (), ())
        return LorentzianFamily(r=r, a=a, x0=x0, c=c, parity=cfg.parity)
    if cfg.kind == SOLITON:
        return SolitonFamily(velocities=cfg.velocities, phases=cfg.phases)
    return None


def _needs_source(cfg: ExampleConfig, params: ModelParams) -> bool:
    if cfg.kind == WAVES:
        return False
    if cfg.forced is not None:
        return cfg.forced
    return not (cfg.kind == SOLITON and params == KDV_PARAMS)


def wave_problems(cfg: ExampleConfig, grid: BasisGrid) -> List[WaveProblem]:
    """One profile problem per wave; all share beta, so sigma_k = beta / sqrt(4 gamma (alpha - c_k))."""
    beta = cfg.resolved_beta()
    problems = []
    for c, _center in cfg.waves:
        sigma = beta / math.sqrt(4.0 * cfg.gamma * (cfg.alpha - c))
        problems.append(
            WaveProblem(
                alpha=cfg.alpha, gamma=cfg.gamma, delta=cfg.delta, c=c, sigma=sigma,
                grid=grid, n_stages=cfg.n_stages,
            )
        )
    return problems


def translate(v: SpectralField, shift: float, grid: BasisGrid) -> SpectralField:
    """Coefficients of I_n[v(. - shift)]."""
    return forward(eval_expansion(v, grid.nodes - shift, grid.ell), grid)


def superposed_waves(cfg: ExampleConfig, grid: BasisGrid) -> Tuple[SpectralField, List[SpectralField]]:
    profiles = []
    Y0 = np.zeros(grid.size)
    for prob, (_c, center) in zip(wave_problems(cfg, grid), cfg.waves):
        v = WaveSolver(prob).solve()
        profiles.append(v)
        Y0 += translate(v, center, grid)
    return Y0, profiles


def tail_amplitude(Y: SpectralField, centers: Sequence[float], grid: BasisGrid, core_radius: float) -> float:
    """max |u| over the nodes farther than core_radius from every wave center."""
    x = grid.nodes
    outside = np.ones(x.shape, dtype=bool)
    for center in centers:
        outside &= np.abs(x - center) > core_radius
    if not outside.any():
        return 0.0
    values = eval_expansion(Y, x[outside], grid.ell)
    return float(np.max(np.abs(values)))


def translation_error(prob: WaveProblem, v: SpectralField, T: float, tau: float = 0.02) -> float:
    """||u(T) - I_n[v(. - c T)]|| for u evolved from v under the equation the profile belongs to."""
    system = BenjaminSystem.build(prob.params, prob.grid)
    Y = GaussStepper(system, StepperConfig(tau=tau, T=T)).run(v)
    return l2_norm(Y - translate(v, prob.c * T, prob.grid))


# ---------------------------------------------------------------------------
# drivers


def run_case(
    cfg: ExampleConfig,
    snapshot_sink: Optional[SnapshotSink] = None,
    record_wall_time: bool = False,
    time_rows: bool = True,
) -> ErrorReport:
    grid = make_grid(cfg.p, cfg.ell)
    params = cfg.params
    stepper_cfg = cfg.stepper()
    exact = build_exact(cfg)
    logger.info("example %s: n=%d, ell=%g, tau=%g, T=%g, %s", cfg.example, cfg.n, cfg.ell, cfg.tau, cfg.T, params)

    source = make_source(exact, params) if exact is not None and _needs_source(cfg, params) else None
    system = BenjaminSystem.build(params, grid, source)
    stepper = GaussStepper(system, stepper_cfg)

    profiles: List[SpectralField] = []
    if cfg.kind == WAVES:
        Y0, profiles = superposed_waves(cfg, grid)
    else:
        Y0 = interpolate(lambda x: exact.u(x, 0.0), grid)

    report = ErrorReport(example=cfg.example)
    G0 = hamiltonian(Y0, system)
    norm0 = l2_norm(Y0)
    track = {"l2": 0.0, "linf": 0.0, "drift": 0.0, "norm_drift": 0.0}
    start = time.perf_counter()

    def observe(t: float, Y: NDArray[np.float64]) -> None:
        if exact is not None:
            l2 = l2_error(Y, lambda x: exact.u(x, t), grid, cfg.refine)
            linf = linf_error(Y, lambda x: exact.u(x, t), grid, cfg.n_samples, cfg.refine)
        else:
            l2 = linf = float("nan")
        drift = abs(hamiltonian(Y, system) - G0)
        track["l2"] = max(track["l2"], l2) if exact is not None else l2
        track["linf"] = max(track["linf"], linf) if exact is not None else linf
        track["drift"] = max(track["drift"], drift)
        track["norm_drift"] = max(track["norm_drift"], abs(l2_norm(Y) - norm0))
        if time_rows:
            wall = 1000.0 * (time.perf_counter() - start) if record_wall_time else 0.0
            report.add(ErrorRow(t, l2, linf, drift, stepper.stats["fp_iterations_max"], wall, cfg.n, cfg.tau))
        if snapshot_sink is not None:
            snapshot_sink(t, Y)

    Y = stepper.run(Y0, observe)

    report.summary = {
        "example": cfg.example,
        "kind": cfg.kind,
        "n": cfg.n,
        "p": cfg.p,
        "ell": cfg.ell,
        "tau": cfg.tau,
        "T": cfg.T,
        "params": attrs.asdict(params),
        "l2_error_max": track["l2"],
        "linf_error_max": track["linf"],
        "hamiltonian_drift_max": track["drift"],
        "l2_norm_drift_max": track["norm_drift"],
        "steps": stepper.stats["steps"],
        "fp_iterations_total": stepper.stats["fp_iterations_total"],
        "fp_iterations_max": stepper.stats["fp_iterations_max"],
        "wall_ms": 1000.0 * (time.perf_counter() - start) if record_wall_time else 0.0,
    }
    if cfg.kind == WAVES:
        centers = [center + c * cfg.T for c, center in cfg.waves]
        report.summary["tail_amplitude"] = tail_amplitude(Y, centers, grid, cfg.core_radius)
        report.summary["wave_sigmas"] = [prob.sigma for prob in wave_problems(cfg, grid)]
    logger.info(
        "example %s finished: l2 %.3e, linf %.3e, hamiltonian drift %.3e",
        cfg.example, track["l2"], track["linf"], track["drift"],
    )
    return report


def run_example(
    example: int,
    overrides: Optional[Dict[str, Any]] = None,
    snapshot_sink: Optional[SnapshotSink] = None,
    record_wall_time: bool = False,
) -> ErrorReport:
    return run_case(example_config(example, overrides), snapshot_sink, record_wall_time)


def _sweep_point(args: Tuple[ExampleConfig, bool]) -> ErrorReport:
    cfg, record_wall_time = args
    return run_case(cfg, record_wall_time=record_wall_time, time_rows=False)


def p_from_n(n: int) -> int:
    if n < 1 or (n + 1) & n:
        raise ConfigurationError(f"n must have the form 2^k - 1, got {n!r}")
    return (n + 1) // 2


def convergence_sweep(
    example: int,
    n_list: Sequence[int],
    tau: Optional[float] = None,
    overrides: Optional[Dict[str, Any]] = None,
    workers: int = 1,
    record_wall_time: bool = False,
    strict: bool = False,
) -> ErrorReport:
    """One run per n; one row per n holding the space-time maxima of the run."""
    base = dict(overrides or {})
    if tau is not None:
        base["tau"] = tau
    configs = [example_config(example, {**base, "p": p_from_n(n)}) for n in n_list]
    report = ErrorReport(example=example)

    jobs = [(cfg, record_wall_time) for cfg in configs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sweep_point, job) for job in jobs]
            outcomes = []
            for fut in futures:
                try:
                    outcomes.append(fut.result())
                except MTCError as exc:
                    outcomes.append(exc)
    else:
        outcomes = []
        for job in jobs:
            try:
                outcomes.append(_sweep_point(job))
            except MTCError as exc:
                outcomes.append(exc)
                break

    for cfg, outcome in zip(configs, outcomes):
        if isinstance(outcome, MTCError):
            if strict:
                raise outcome
            report.partial = True
            report.failure = f"n={cfg.n}: {outcome}"
            logger.warning("sweep stopped at n=%d: %s", cfg.n, outcome)
            break
        s = outcome.summary
        report.add(
            ErrorRow(
                cfg.n, s["l2_error_max"], s["linf_error_max"], s["hamiltonian_drift_max"],
                s["fp_iterations_max"], s["wall_ms"], cfg.n, cfg.tau,
            )
        )
    report.summary = {
        "example": example,
        "n_list": [int(n) for n in n_list],
        "tau": configs[0].tau if configs else tau,
        "partial": report.partial,
        "failure": report.failure,
    }
    return report
