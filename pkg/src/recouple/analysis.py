"""Experiment runner, decay fits, Husimi grids, result serialization.

Monte-Carlo runs are seeded per (master_seed, run_index), so results are
bit-identical regardless of scheduling; run-level parallelism uses forked
workers that inherit the processor's read-only caches.  Output rows carry
fixed column orders (see GATE_CSV_COLUMNS / SAWTOOTH_CSV_COLUMNS) and use
shortest round-trip float formatting, making CSV output reproducible byte
for byte.  Wall-clock timings live only in the JSON metadata block.
"""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
import multiprocessing

import numpy as np

from .gates import FidelityStat, UPhiSpec, avg_gate_fidelity, ideal_uphi
from .model import GRID3X3, LatticeSpec, SpinSystem, build_couplings
from .processor import Processor
from .qstate import StateVector, state_fidelity
from .sawtooth import SawtoothParams, initial_state, sawtooth_circuit
from .sequences import ORIGINAL, SCHEME_VARIANTS

GATE_EXPERIMENT = "gate_fidelity"
SAWTOOTH_EXPERIMENT = "sawtooth"

GATE_CSV_COLUMNS = (
    "scheme", "n_swhh", "phi", "calibration_order",
    "mean_fidelity", "stderr", "neg_log_fidelity", "runs", "seed",
)
SAWTOOTH_CSV_COLUMNS = (
    "experiment", "scheme", "n_swhh", "t", "mean_fidelity", "stderr", "runs", "seed",
)

#: fidelities below this are left out of decay fits
FIT_FLOOR = 1e-12


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    lattice: str = GRID3X3
    base_coupling: float = 1.0
    scheme: str = ORIGINAL
    calibration_order: int = 0
    n_swhh_values: tuple = (10,)
    iterations: int = 25
    runs: int = 10
    master_seed: int = 0
    pair: tuple = (1, 2)
    phi: float = np.pi / 4
    n_q: int = 9
    K: float = -0.5

    def __post_init__(self):
        if self.experiment not in (GATE_EXPERIMENT, SAWTOOTH_EXPERIMENT):
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.scheme not in SCHEME_VARIANTS:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if any(n < 1 for n in self.n_swhh_values):
            raise ValueError("n_swhh values must be at least 1")

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        d = json.loads(text)
        for key in ("n_swhh_values", "pair"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass
class RunResult:
    experiment: str
    scheme: str
    n_swhh: int
    rows: list
    metadata: dict


# ---------------------------------------------------------------------------
# gate-fidelity experiment
# ---------------------------------------------------------------------------

def _gate_point(config: ExperimentConfig, n_swhh: int) -> RunResult:
    system = build_couplings(LatticeSpec(config.lattice, config.base_coupling))
    spec = UPhiSpec(config.pair[0], config.pair[1], config.phi, n_swhh,
                    config.scheme, config.calibration_order)
    rng = np.random.default_rng([config.master_seed, n_swhh])
    t0 = time.perf_counter()
    stat = avg_gate_fidelity(system, spec, ideal_uphi(config.phi), config.runs, rng)
    wall = time.perf_counter() - t0
    row = {
        "scheme": config.scheme,
        "n_swhh": n_swhh,
        "phi": config.phi,
        "calibration_order": config.calibration_order,
        "mean_fidelity": stat.mean,
        "stderr": stat.stderr,
        "neg_log_fidelity": -np.log(stat.mean),
        "runs": stat.runs,
        "seed": config.master_seed,
    }
    return RunResult(GATE_EXPERIMENT, config.scheme, n_swhh, [row],
                     {"wall_time": wall, "basis_states": stat.basis_states})


# ---------------------------------------------------------------------------
# sawtooth experiment
# ---------------------------------------------------------------------------

_WORKER: dict = {}


def _sawtooth_single_run(args):
    run_index, = args
    proc: Processor = _WORKER["processor"]
    config: ExperimentConfig = _WORKER["config"]
    circuit = _WORKER["circuit"]
    params: SawtoothParams = _WORKER["params"]
    rng = np.random.default_rng([config.master_seed, run_index])
    noisy = initial_state(params)
    ideal = initial_state(params)
    fids = [1.0]
    trace_totals = {"swaps": 0, "uphi_blocks": 0}
    for _ in range(config.iterations):
        noisy, _, tr = proc.execute(circuit, noisy, rng)
        ideal, _, _ = proc.ideal(circuit, ideal)
        trace_totals["swaps"] += tr.swaps
        trace_totals["uphi_blocks"] += tr.uphi_blocks
        fids.append(state_fidelity(noisy, ideal))
    return run_index, fids, trace_totals


def _worker_count(runs: int) -> int:
    env = os.environ.get("RECOUPLE_WORKERS")
    if env:
        return max(1, min(int(env), runs))
    return max(1, min(os.cpu_count() or 1, runs))


def _sawtooth_point(config: ExperimentConfig, n_swhh: int) -> RunResult:
    if 2**config.n_q > 2**12:
        raise ValueError("register too large for the dense simulator")
    if config.n_q != 9:
        raise ValueError("the sawtooth experiment runs on the nine-qubit grid")
    lattice = LatticeSpec(GRID3X3, config.base_coupling)
    system = build_couplings(lattice)
    params = SawtoothParams(n_q=config.n_q, K=config.K)
    proc = Processor(system, n_swhh, config.scheme, config.calibration_order, lattice)
    circuit = sawtooth_circuit(params)
    # warm the per-pair caches before forking so workers share them
    t0 = time.perf_counter()
    for p in range(9):
        for q in range(p + 1, 9):
            if _hv_neighbors(p, q):
                proc._gate_unitary(p, q)
    _WORKER.update(processor=proc, config=config, circuit=circuit, params=params)
    workers = _worker_count(config.runs)
    results = {}
    if workers == 1:
        for r in range(config.runs):
            idx, fids, tr = _sawtooth_single_run((r,))
            results[idx] = (fids, tr)
    else:
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            for idx, fids, tr in pool.map(_sawtooth_single_run, [(r,) for r in range(config.runs)]):
                results[idx] = (fids, tr)
    wall = time.perf_counter() - t0
    fmat = np.array([results[r][0] for r in range(config.runs)])
    mean = fmat.mean(axis=0)
    stderr = (fmat.std(axis=0, ddof=1) / np.sqrt(config.runs)) if config.runs > 1 else np.zeros(mean.shape)
    rows = [
        {
            "experiment": SAWTOOTH_EXPERIMENT,
            "scheme": config.scheme,
            "n_swhh": n_swhh,
            "t": t,
            "mean_fidelity": float(mean[t]),
            "stderr": float(stderr[t]),
            "runs": config.runs,
            "seed": config.master_seed,
        }
        for t in range(config.iterations + 1)
    ]
    meta = {
        "wall_time": wall,
        "tau": {f"{p},{q}": proc.pair_tau(p, q) for p in range(9) for q in range(p + 1, 9)
                if _hv_neighbors(p, q)},
        "trace": results[0][1],
        "workers": workers,
    }
    return RunResult(SAWTOOTH_EXPERIMENT, config.scheme, n_swhh, rows, meta)


def _hv_neighbors(p: int, q: int) -> bool:
    rp, cp = divmod(p, 3)
    rq, cq = divmod(q, 3)
    return abs(rp - rq) + abs(cp - cq) == 1


def run_experiment(config: ExperimentConfig) -> list:
    """All configured n_swhh points of one experiment."""
    point = _gate_point if config.experiment == GATE_EXPERIMENT else _sawtooth_point
    return [point(config, n) for n in config.n_swhh_values]


# ---------------------------------------------------------------------------
# decay fits
# ---------------------------------------------------------------------------

FIT_MODELS = ("inv_n4", "inv_n5", "t2_over_n4", "t_over_n5")


@dataclass(frozen=True)
class FitResult:
    model: str
    constant: float
    residual: float
    points: int


def fit_decay(points, model: str, n_swhh: int | None = None) -> FitResult:
    """Least-squares fit of -ln f against the model predictor.

    ``points`` are (x, fidelity) pairs where x is n_swhh for the inv_n*
    models and the iteration count t for the *_over_n* models (those need
    ``n_swhh``).  Through-origin fit: constant = sum(u y) / sum(u u).
    """
    if model not in FIT_MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {FIT_MODELS}")
    xs, fs = [], []
    for x, f in points:
        if f > FIT_FLOOR:
            xs.append(float(x))
            fs.append(float(f))
    if len(xs) < 3:
        raise ValueError("need at least three usable points with positive fidelity")
    x = np.array(xs)
    y = -np.log(np.array(fs))
    if model == "inv_n4":
        u = x**-4.0
    elif model == "inv_n5":
        u = x**-5.0
    elif model == "t2_over_n4":
        if n_swhh is None:
            raise ValueError("model t2_over_n4 needs n_swhh")
        u = x**2 / n_swhh**4
    else:
        if n_swhh is None:
            raise ValueError("model t_over_n5 needs n_swhh")
        u = x / n_swhh**5
    denom = float(np.dot(u, u))
    if denom == 0.0:
        raise ValueError("degenerate predictor")
    c = float(np.dot(u, y) / denom)
    residual = float(np.sqrt(np.mean((y - c * u) ** 2)))
    return FitResult(model=model, constant=c, residual=residual, points=len(xs))


# ---------------------------------------------------------------------------
# Husimi phase-space grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HusimiGrid:
    """values[b, a] is the density at (theta[a], p[b]); the grid covers one
    2 pi x 2 pi cell and sums (times the cell area) to about one."""

    values: np.ndarray
    theta: np.ndarray
    p: np.ndarray

    @property
    def cell_area(self) -> float:
        return (2 * np.pi / len(self.theta)) * (2 * np.pi / len(self.p))

    def total_mass(self) -> float:
        return float(self.values.sum() * self.cell_area)


_coherent_cache: dict = {}


def _coherent_bank(dim: int, n_theta: int, n_p: int) -> np.ndarray:
    """Rows: normalized torus coherent states <m|c(theta0, p0)> over the
    (theta, p) grid; isotropic minimum-uncertainty width."""
    key = (dim, n_theta, n_p)
    if key in _coherent_cache:
        return _coherent_cache[key]
    m = np.arange(dim)
    sigma_m2 = dim / (4 * np.pi)  # sigma_theta = sigma_m * (2 pi / dim), isotropic
    thetas = 2 * np.pi * np.arange(n_theta) / n_theta
    ps = dim * np.arange(n_p) / n_p  # center in momentum units
    bank = np.empty((n_p * n_theta, dim), dtype=complex)
    row = 0
    for p0 in ps:
        for th in thetas:
            c = np.zeros(dim, dtype=complex)
            for w in (-1, 0, 1):
                mm = m + w * dim
                c += np.exp(-((mm - p0) ** 2) / (4 * sigma_m2) - 1j * th * mm)
            c /= np.linalg.norm(c)
            bank[row] = c.conj()
            row += 1
    _coherent_cache[key] = bank
    return bank


def husimi_grid(states, resolution: tuple = (64, 64)) -> HusimiGrid:
    """Husimi density of a state (or the average over several states)."""
    if isinstance(states, StateVector):
        states = [states]
    n_theta, n_p = resolution
    dim = states[0].dim
    bank = _coherent_bank(dim, n_theta, n_p)
    acc = np.zeros(n_p * n_theta)
    for s in states:
        amps = bank @ s.amplitudes
        acc += np.abs(amps) ** 2
    acc /= len(states)
    values = acc.reshape(n_p, n_theta) * dim / (4 * np.pi**2)
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    p = 2 * np.pi * np.arange(n_p) / n_p
    return HusimiGrid(values=values, theta=theta, p=p)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _format_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def results_csv(results, experiment: str | None = None) -> str:
    """CSV text for a list of RunResults (one experiment kind at a time);
    an empty list yields a header-only file."""
    if not results and experiment is None:
        experiment = GATE_EXPERIMENT
    kind = results[0].experiment if results else experiment
    columns = GATE_CSV_COLUMNS if kind == GATE_EXPERIMENT else SAWTOOTH_CSV_COLUMNS
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for res in results:
        for row in res.rows:
            writer.writerow([_format_cell(row[c]) for c in columns])
    return buf.getvalue()


def results_json(results) -> str:
    payload = []
    for res in results:
        payload.append({
            "experiment": res.experiment,
            "scheme": res.scheme,
            "n_swhh": res.n_swhh,
            "rows": res.rows,
            "metadata": res.metadata,
        })
    return json.dumps(payload, indent=2)


def emit_results(results, fmt: str, path: str, experiment: str | None = None) -> None:
    """Write results as csv or json; IO errors carry the path."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    text = results_csv(results, experiment) if fmt == "csv" else results_json(results)
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
