"""Seeded Monte Carlo sweeps over the generator / solver grid.

A sweep is a cartesian grid over (per_class, d, delta, init_mode, epsilon,
relaxed_tau) with a fixed number of trials per cell.  Per-trial seeds derive
from ``(base_seed, cell_index, trial_index)``, so output is a pure function
of the configuration: records carry no wall times and rows are emitted in
(cell, trial) order.  Individual trial failures (contradictions, solver
misses) are recorded as unsuccessful rows; they never abort the sweep.
"""

from __future__ import annotations

import configparser
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .basis import build_eig_basis, is_feasible, projections, y_from_x
from .engine import (
    BpParams,
    default_delta,
    default_l_star,
    init_aligned,
    init_balanced,
    init_independent,
    run_bpcol,
)
from .generate import GenParams, generate
from .graphs import build_arc_table
from .records import TrialRecord, records_to_csv
from .spectral import estimate_epsilon

__all__ = [
    "SweepConfig",
    "wilson_interval",
    "run_sweep",
    "render_sweep_output",
]

_Z_95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class SweepConfig:
    """Grid axes, trial count, seeding, and output routing for one sweep."""

    per_class: tuple[int, ...]
    d: tuple[int, ...]
    delta: tuple[float | str, ...] = ("default",)
    init_mode: tuple[str, ...] = ("balanced",)
    epsilon: tuple[float, ...] = (0.05,)
    relaxed_tau: tuple[float, ...] = (0.2,)
    trials: int = 1
    base_seed: int = 0
    early_stop: bool = True
    iters: int | None = None
    compute_epsilon_hat: bool = False
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        for axis in ("per_class", "d", "delta", "init_mode", "epsilon", "relaxed_tau"):
            if not getattr(self, axis):
                raise ValueError(f"grid axis {axis} is empty")
        for mode in self.init_mode:
            if mode not in ("independent", "balanced", "aligned"):
                raise ValueError(f"unknown init mode {mode!r}")
        for value in self.delta:
            if value != "default" and not 0.0 <= float(value) < 1.0 / 3.0:
                raise ValueError(f"delta {value!r} outside [0, 1/3)")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format!r}")

    @classmethod
    def from_file(cls, path: str) -> "SweepConfig":
        """Load from an INI file with a single [sweep] section.

        List-valued keys are comma-separated; ``delta`` entries may be the
        word ``default``.  Keys: per_class, d, delta, init, epsilon,
        relaxed_tau, trials, seed, epsilon_hat, out, format.
        """
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ValueError(f"cannot read sweep config {path!r}")
        if "sweep" not in parser:
            raise ValueError(f"{path!r} has no [sweep] section")
        section = parser["sweep"]
        known = {
            "per_class", "d", "delta", "init", "epsilon", "relaxed_tau",
            "trials", "seed", "early_stop", "iters", "epsilon_hat",
            "out", "format",
        }
        unknown = set(section) - known
        if unknown:
            raise ValueError(f"unknown sweep keys: {sorted(unknown)}")

        def ints(key: str, default: str | None = None) -> tuple[int, ...]:
            raw = section.get(key, default)
            if raw is None:
                raise ValueError(f"sweep config missing required key {key!r}")
            return tuple(int(tok.strip()) for tok in raw.split(","))

        def floats(key: str, default: str) -> tuple[float, ...]:
            return tuple(
                float(tok.strip()) for tok in section.get(key, default).split(",")
            )

        deltas: tuple[float | str, ...] = tuple(
            tok.strip() if tok.strip() == "default" else float(tok.strip())
            for tok in section.get("delta", "default").split(",")
        )
        modes = tuple(
            tok.strip() for tok in section.get("init", "balanced").split(",")
        )
        return cls(
            per_class=ints("per_class"),
            d=ints("d"),
            delta=deltas,
            init_mode=modes,
            epsilon=floats("epsilon", "0.05"),
            relaxed_tau=floats("relaxed_tau", "0.2"),
            trials=section.getint("trials", 1),
            base_seed=section.getint("seed", 0),
            early_stop=section.getboolean("early_stop", True),
            iters=(
                section.getint("iters") if section.get("iters") else None
            ),
            compute_epsilon_hat=section.getboolean("epsilon_hat", False),
            out=section.get("out", None),
            format=section.get("format", "csv"),
        )

    def cells(self) -> list[dict]:
        """The grid in deterministic order (itertools.product of the axes)."""
        out = []
        for values in itertools.product(
            self.per_class, self.d, self.delta,
            self.init_mode, self.epsilon, self.relaxed_tau,
        ):
            keys = ("per_class", "d", "delta", "init_mode", "epsilon", "relaxed_tau")
            out.append(dict(zip(keys, values)))
        return out


def wilson_interval(
    successes: int, trials: int, z: float = _Z_95
) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    p_hat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p_hat + z2 / (2.0 * trials)) / denom
    half = (
        z
        * math.sqrt(p_hat * (1.0 - p_hat) / trials + z2 / (4.0 * trials * trials))
        / denom
    )
    return max(0.0, center - half), min(1.0, center + half)


def _trial_seed(base_seed: int, cell_index: int, trial_index: int) -> int:
    state = np.random.SeedSequence(
        (base_seed, cell_index, trial_index)
    ).generate_state(1, np.uint64)[0]
    return int(state) & (2**63 - 1)


def _run_trial(cell: dict, seed: int, config: SweepConfig) -> TrialRecord:
    per_class = cell["per_class"]
    d = cell["d"]
    graph, coloring = generate(GenParams(per_class=per_class, d=d, seed=seed))
    arc_table = build_arc_table(graph)
    n = graph.num_vertices
    delta = cell["delta"]
    delta_value = default_delta(n) if delta == "default" else float(delta)
    params = BpParams(
        delta=delta_value,
        l_star=config.iters if config.iters is not None else default_l_star(n),
        early_stop=config.early_stop,
        seed=seed,
    )
    mode = cell["init_mode"]
    rng = np.random.default_rng(np.random.SeedSequence((seed, 1)))
    _, record = run_bpcol(
        graph, arc_table, params, rng, init_mode=mode, coloring=coloring
    )
    record.per_class = per_class
    record.d = d
    record.wall_time = None  # sweep output must be a pure function of config
    if d >= 8 and delta_value > 0.0:
        # regenerate the exact initial state to score its feasibility
        rng_replay = np.random.default_rng(np.random.SeedSequence((seed, 1)))
        if mode == "independent":
            state0, _ = init_independent(graph, arc_table, delta_value, rng_replay)
        elif mode == "balanced":
            state0, _ = init_balanced(graph, arc_table, delta_value, rng_replay)
        else:
            state0, _ = init_aligned(graph, arc_table, coloring, delta_value)
        basis = build_eig_basis(graph, arc_table, coloring, d)
        strict, relaxed = is_feasible(
            state0.delta, basis, cell["epsilon"], cell["relaxed_tau"]
        )
        record.feasible_strict = strict
        record.feasible_relaxed = relaxed
        x, nu = projections(state0.delta, basis)
        record.x = [float(v) for v in x.ravel()]
        record.y = [float(v) for v in y_from_x(x).ravel()]
        record.nu = float(nu)
    if config.compute_epsilon_hat:
        report = estimate_epsilon(graph, coloring, d)
        record.epsilon_hat = report.epsilon_hat if report.converged else None
    return record


def run_sweep(config: SweepConfig) -> tuple[list[TrialRecord], list[dict]]:
    """Execute every cell; returns (records, per-cell summaries)."""
    records: list[TrialRecord] = []
    summaries: list[dict] = []
    for cell_index, cell in enumerate(config.cells()):
        cell_records: list[TrialRecord] = []
        for trial_index in range(config.trials):
            seed = _trial_seed(config.base_seed, cell_index, trial_index)
            try:
                record = _run_trial(cell, seed, config)
            except Exception:  # noqa: BLE001 -- a bad trial must not kill the sweep
                record = TrialRecord(
                    seed=seed,
                    per_class=cell["per_class"],
                    d=cell["d"],
                    delta=(
                        default_delta(3 * cell["per_class"])
                        if cell["delta"] == "default"
                        else float(cell["delta"])
                    ),
                    init_mode=cell["init_mode"],
                    iterations_run=0,
                    success=False,
                    success_matches_planted=False,
                )
            cell_records.append(record)
        successes = sum(r.success for r in cell_records)
        matches = sum(bool(r.success_matches_planted) for r in cell_records)
        low, high = wilson_interval(successes, config.trials)
        summaries.append(
            {
                "cell_index": cell_index,
                **{k: cell[k] for k in (
                    "per_class", "d", "delta", "init_mode", "epsilon", "relaxed_tau"
                )},
                "trials": config.trials,
                "successes": int(successes),
                "success_rate": successes / config.trials,
                "wilson_low": low,
                "wilson_high": high,
                "matches_planted_rate": matches / config.trials,
            }
        )
        records.extend(cell_records)
    return records, summaries


def render_sweep_output(
    records: list[TrialRecord], summaries: list[dict], format: str
) -> str:
    """Serialize a sweep deterministically (validates every row first)."""
    for record in records:
        record.validate()
    if format == "csv":
        return records_to_csv(records)
    if format == "json":
        payload = {
            "records": [r.to_json_dict() for r in records],
            "summary": summaries,
        }
        return json.dumps(payload, indent=2) + "\n"
    raise ValueError(f"unknown format {format!r}")
