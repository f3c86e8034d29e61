"""Total Time to Solution curves, classical/quantum comparison and exponent fits.

``TTS(t) = t * log(1 - delta) / log(1 - p(t))`` is the expected cost of
restarting a length-t anneal until it succeeds with probability delta.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import caps
from .errors import NoSolutionError, QWalkError, ValidationError
from .landscape import EnergyLandscape, bundled_landscape_path, load_landscape
from .markov import SCHEDULE_KINDS, AnnealingSchedule, classical_success_probability
from .qmetropolis import evolve_schedule, layout_for

DEFAULT_DELTA = 0.9
DEFAULT_BOOTSTRAP = 1000
CSV_COLUMNS = (
    "instance_id",
    "engine",
    "schedule_kind",
    "beta1",
    "alpha",
    "delta",
    "t",
    "p_t",
    "tts_t",
    "is_min_row",
)


def tts(t, p: float, delta: float) -> float:
    """``t log(1-delta) / log(1-p)``; ``inf`` when p = 0 and 0 when p = 1."""
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    if t < 0:
        raise ValidationError("t must be nonnegative")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p must lie in [0, 1], got {p}")
    if p == 0.0:
        return math.inf
    if p == 1.0:
        return 0.0
    # ratio first so that p == delta gives exactly t
    return t * (math.log1p(-delta) / math.log1p(-p))


@dataclass(frozen=True, eq=False)
class TTSCurve:
    delta_target: float
    t: np.ndarray
    p: np.ndarray
    tts: np.ndarray

    @property
    def entries(self):
        return list(zip(self.t.tolist(), self.p.tolist(), self.tts.tolist()))

    @property
    def min_t(self) -> int:
        return min_tts(self)[0]

    @property
    def min_tts(self) -> float:
        return min_tts(self)[1]


def make_curve(ts, ps, delta: float) -> TTSCurve:
    ts = np.asarray(ts, dtype=np.int64)
    ps = np.clip(np.asarray(ps, dtype=float), 0.0, 1.0)
    if ts.shape != ps.shape or ts.ndim != 1:
        raise ValidationError("t and p must be equal-length lists")
    values = np.array([tts(int(t), float(p), delta) for t, p in zip(ts, ps)])
    return TTSCurve(float(delta), ts, ps, values)


def min_tts(curve: TTSCurve):
    """``(t*, TTS*)`` with ties going to the smaller t."""
    best = None
    for t, value in sorted(zip(curve.t.tolist(), curve.tts.tolist())):
        if math.isfinite(value) and (best is None or value < best[1]):
            best = (int(t), float(value))
    if best is None:
        raise NoSolutionError("every TTS entry is infinite")
    return best


def t_grid(T: int, kind: str = "linear", points: int = 32) -> np.ndarray:
    if T < 1:
        raise ValidationError("T must be >= 1")
    if kind == "linear":
        return np.arange(1, T + 1)
    if kind == "log":
        return np.unique(np.round(np.geomspace(1, T, points)).astype(np.int64))
    raise ValidationError(f"unknown grid kind {kind!r}")


def run_comparison(
    landscape: EnergyLandscape,
    schedule: AnnealingSchedule,
    T: int,
    delta: float = DEFAULT_DELTA,
    grid: str = "linear",
    event: str = "occupancy",
):
    """Classical and quantum TTS curves on the same t-grid."""
    ts = t_grid(T, grid)
    classical = classical_success_probability(landscape, schedule, T, event=event)
    quantum = evolve_schedule(landscape, schedule, T).p
    return make_curve(ts, classical[ts - 1], delta), make_curve(ts, quantum[ts - 1], delta)


# --- exponent fits ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FitResult:
    exponent: float
    stderr: float
    n_points: int
    n_bootstrap: int
    seed: int
    intercept: float = 0.0
    bootstrap_samples: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)

    def record(self) -> str:
        return (
            f"exponent={self.exponent!r}\n"
            f"stderr={self.stderr!r}\n"
            f"n_points={self.n_points}\n"
            f"n_bootstrap={self.n_bootstrap}\n"
            f"seed={self.seed}\n"
        )


def _ols(lx: np.ndarray, ly: np.ndarray):
    xm = lx.mean()
    dx = lx - xm
    slope = float(dx @ (ly - ly.mean()) / (dx @ dx))
    return slope, float(ly.mean() - slope * xm)


def fit_exponent(points, n_bootstrap: int = DEFAULT_BOOTSTRAP, seed: int = 0) -> FitResult:
    """Least-squares slope of log(quantum) against log(classical) min-TTS.

    ``stderr`` is the sample standard deviation of slopes refitted on
    ``n_bootstrap`` case resamples.  Resamples with a single distinct x are
    redrawn since they carry no slope.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValidationError("need at least 3 (classical, quantum) points")
    if not np.all(np.isfinite(pts)) or np.any(pts <= 0):
        raise ValidationError("fit points must be finite and positive")
    if n_bootstrap < 2:
        raise ValidationError("n_bootstrap must be at least 2")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.unique(lx).size < 2:
        raise ValidationError("need at least two distinct classical values")
    slope, intercept = _ols(lx, ly)
    rng = np.random.default_rng(seed)
    n = lx.size
    samples = np.empty(n_bootstrap)
    for b in range(n_bootstrap):
        while True:
            idx = rng.integers(n, size=n)
            if np.unique(lx[idx]).size > 1:
                break
        samples[b] = _ols(lx[idx], ly[idx])[0]
    return FitResult(
        slope, float(samples.std(ddof=1)), n, n_bootstrap, seed, intercept, samples
    )


def synthetic_points(exponent: float, rng, n: int = 20, noise: float = 0.1, span=(10.0, 1e4)):
    """Points ``(x, x^b e^{noise Z})`` on a log-spaced x-grid."""
    x = np.geomspace(span[0], span[1], n)
    return np.column_stack([x, x**exponent * np.exp(noise * rng.standard_normal(n))])


# --- benchmark configuration and runner ----------------------------------


@dataclass(frozen=True)
class RunConfig:
    landscapes: tuple  # (instance_id, path) pairs
    schedules: tuple  # AnnealingSchedule without dimension_n, keyed by name
    T: int
    delta: float = DEFAULT_DELTA
    seed: int = 0
    output: Path = Path("bench.csv")
    grid: str = "linear"
    workers: int = 1
    max_dim: int | None = None


def _resolve_landscape(value: str, base: Path) -> Path:
    if value.startswith("bundled:"):
        return bundled_landscape_path(value[len("bundled:") :])
    path = Path(value)
    return path if path.is_absolute() else base / path


def load_config(path) -> RunConfig:
    """Read an INI run configuration.

    ``[run]`` holds T, delta, seed, output, grid, workers and max_dim;
    ``[landscapes]`` maps instance ids to files (``bundled:<name>`` for the
    shipped ones); each ``[schedule:<name>]`` gives kind, beta1 and alpha.
    Landscape paths are relative to the config file, the output path to the
    working directory.
    """
    path = Path(path)
    parser = configparser.ConfigParser()
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except configparser.Error as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if not parser.has_section("run") or not parser.has_section("landscapes"):
        raise ValidationError(f"{path}: need [run] and [landscapes] sections")
    run = parser["run"]
    base = path.parent
    try:
        T = run.getint("T")
        delta = run.getfloat("delta", DEFAULT_DELTA)
        seed = run.getint("seed", 0)
        workers = run.getint("workers", 1)
        max_dim = run.getint("max_dim", None)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if T is None or T < 1:
        raise ValidationError(f"{path}: [run] T must be a positive integer")
    if not 0 < delta < 1:
        raise ValidationError(f"{path}: delta must lie in (0, 1)")
    if max_dim is not None and max_dim > caps.COIN_WALK_MAX_DIM:
        raise ValidationError(f"{path}: max_dim may not exceed {caps.COIN_WALK_MAX_DIM}")
    landscapes = []
    for key, value in parser["landscapes"].items():
        p = _resolve_landscape(value.strip(), base)
        if not p.is_file():
            raise ValidationError(f"{path}: landscape {key!r} not found at {p}")
        landscapes.append((key, p))
    if not landscapes:
        raise ValidationError(f"{path}: no landscapes listed")
    schedules = []
    for section in parser.sections():
        if not section.startswith("schedule:"):
            continue
        sec = parser[section]
        kind = sec.get("kind", section.split(":", 1)[1]).strip()
        if kind not in SCHEDULE_KINDS:
            raise ValidationError(f"{path}: [{section}] unknown kind {kind!r}")
        try:
            schedules.append(
                AnnealingSchedule(kind, sec.getfloat("beta1"), sec.getfloat("alpha", 0.9))
            )
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: [{section}] {exc}") from None
    if not schedules:
        raise ValidationError(f"{path}: no [schedule:*] sections")
    return RunConfig(
        tuple(landscapes),
        tuple(schedules),
        T,
        delta,
        seed,
        Path(run.get("output", "bench.csv")),
        run.get("grid", "linear"),
        workers,
        max_dim,
    )


@dataclass(frozen=True)
class BenchTask:
    index: int
    instance_id: str
    path: Path
    schedule: AnnealingSchedule
    T: int
    delta: float
    grid: str
    seed: int
    max_dim: int | None


def task_seed(base_seed: int, index: int) -> int:
    return base_seed ^ index


def plan_tasks(config: RunConfig) -> list:
    tasks = []
    for instance_id, path in config.landscapes:
        for schedule in config.schedules:
            tasks.append(
                BenchTask(
                    len(tasks),
                    instance_id,
                    path,
                    schedule,
                    config.T,
                    config.delta,
                    config.grid,
                    task_seed(config.seed, len(tasks)),
                    config.max_dim,
                )
            )
    return tasks


def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def curve_rows(instance_id: str, engine: str, schedule: AnnealingSchedule, curve: TTSCurve):
    try:
        t_star = min_tts(curve)[0]
    except NoSolutionError:
        t_star = None
    rows = []
    for t, p, value in curve.entries:
        rows.append(
            (
                instance_id,
                engine,
                schedule.kind,
                float(schedule.beta1),
                float(schedule.alpha),
                float(curve.delta_target),
                int(t),
                float(p),
                float(value),
                1 if t == t_star else 0,
            )
        )
    return rows


def run_task(task: BenchTask):
    """Return ``(index, rows, error)`` for one (landscape, schedule) pair."""
    try:
        landscape = load_landscape(task.path)
        cap = caps.COIN_WALK_MAX_DIM if task.max_dim is None else task.max_dim
        caps.require_dim(layout_for(landscape).dim, cap, f"{task.instance_id}: coin walk dimension")
        schedule = AnnealingSchedule(
            task.schedule.kind, task.schedule.beta1, task.schedule.alpha, landscape.num_coords
        )
        classical, quantum = run_comparison(landscape, schedule, task.T, task.delta, task.grid)
    except (QWalkError, OSError) as exc:
        return task.index, [], f"{task.instance_id}/{task.schedule.kind}: {exc}"
    rows = curve_rows(task.instance_id, "classical", task.schedule, classical)
    rows += curve_rows(task.instance_id, "quantum", task.schedule, quantum)
    return task.index, rows, None


def run_bench(config: RunConfig):
    """Run every task; results are ordered by task index regardless of workers."""
    tasks = plan_tasks(config)
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run_task, tasks))
    else:
        results = [run_task(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    rows = [row for _, rs, _ in results for row in rs]
    errors = [err for _, _, err in results if err is not None]
    for _, rs, err in results:
        if err is None and not any(r[-1] for r in rs):
            errors.append(f"{rs[0][0]}/{rs[0][2]}: no finite TTS")
    return rows, errors


def format_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- reading results back -----------------------------------------------


@dataclass
class FitGroup:
    key: tuple  # (schedule_kind, beta1, alpha)
    points: list
    instances: list
    missing: list
    excluded: int


def read_rows(path) -> list:
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ValidationError(f"{path}: header must be {','.join(CSV_COLUMNS)}")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            try:
                rows.append(
                    {
                        "instance_id": raw["instance_id"],
                        "engine": raw["engine"],
                        "schedule_kind": raw["schedule_kind"],
                        "beta1": float(raw["beta1"]),
                        "alpha": float(raw["alpha"]),
                        "delta": float(raw["delta"]),
                        "t": int(raw["t"]),
                        "p_t": float(raw["p_t"]),
                        "tts_t": float(raw["tts_t"]),
                        "is_min_row": int(raw["is_min_row"]),
                    }
                )
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from None
    return rows


def collect_fit_groups(rows, delta: float) -> list:
    """Pair classical and quantum min-TTS per instance within each schedule group."""
    groups = {}
    for row in rows:
        if row["is_min_row"] != 1 or not math.isclose(row["delta"], delta, rel_tol=0, abs_tol=1e-12):
            continue
        key = (row["schedule_kind"], row["beta1"], row["alpha"])
        groups.setdefault(key, {}).setdefault(row["instance_id"], {})[row["engine"]] = row["tts_t"]
    out = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2])):
        points, instances, missing, excluded = [], [], [], 0
        for instance_id in sorted(groups[key]):
            pair = groups[key][instance_id]
            if "classical" not in pair or "quantum" not in pair:
                missing.append(instance_id)
                continue
            c, q = pair["classical"], pair["quantum"]
            if not (c > 0 and q > 0 and math.isfinite(c) and math.isfinite(q)):
                excluded += 1
                continue
            points.append((c, q))
            instances.append(instance_id)
        out.append(FitGroup(key, points, instances, missing, excluded))
    return out

