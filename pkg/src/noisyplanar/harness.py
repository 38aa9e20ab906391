"""Experiment orchestration: trials, reports, scaling sweeps, audits, and CLI.

Reports are plain JSON (schema 1) carrying the full config echo and every
per-trial row, so any aggregate can be recomputed from the file alone.  Sweep
tables are additionally emitted as CSV with the fixed header

    n,trials,error_rate,tx_total,tx_per_n,slots_total,slots_norm,em1,em2,resamples

Exit codes: 0 success, 2 config error, 3 infeasibility, 4 audit failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import (
    Channel,
    EnergyConfig,
    Metrics,
    NoiseModel,
    ScheduleClass,
    Trace,
    TxEvent,
    color_cells,
    resolve_slot,
)
from .coding import CapacityError
from .config import ConfigError, ExperimentConfig
from .geometry import (
    CellGrid,
    DerivedParams,
    ProtocolInfeasibleError,
    assign_cells,
    build_tree,
    derive_params,
    place_nodes,
)
from .intercell import build_substages, count_bits_for, run_stage2_hist, run_stage2_max
from .intracell import Stage1Config, run_stage1_hist, run_stage1_max
from .oracle import oracle

__all__ = [
    "SCHEMA_VERSION",
    "CSV_HEADER",
    "InfeasibleRunError",
    "TrialRun",
    "RunReport",
    "SweepReport",
    "AuditReport",
    "wilson_interval",
    "run_trial",
    "run_experiment",
    "sweep",
    "validate_run",
    "audit_coloring",
    "main",
]

SCHEMA_VERSION = 1
CSV_HEADER = "n,trials,error_rate,tx_total,tx_per_n,slots_total,slots_norm,em1,em2,resamples"


class InfeasibleRunError(Exception):
    """A run that cannot proceed (resampling exhausted, arrays too deep, ...)."""


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1 + z**2 / trials
    center = (p + z**2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _draw_bits(config: ExperimentConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    source = config.bit_source
    if source == "all-zero":
        return np.zeros(n, dtype=np.int8)
    if source == "all-one":
        return np.ones(n, dtype=np.int8)
    if source == "bernoulli":
        return (rng.random(n) < config.bit_p).astype(np.int8)
    if source == "single-one-at-random":
        bits = np.zeros(n, dtype=np.int8)
        bits[int(rng.integers(n))] = 1
        return bits
    return np.array(config.bits, dtype=np.int8)  # explicit


@dataclass
class TrialRun:
    """One trial's full context and outcome; inputs to audits and reports."""

    config: ExperimentConfig
    n: int
    trial: int
    instance: object
    params: DerivedParams
    grid: CellGrid
    tree: object
    coloring: list[ScheduleClass]
    plan: object
    stage1_config: Stage1Config
    link_config: object
    stage1: object
    stage1_value: int
    computed: int
    oracle_value: int
    resamples: int
    channel: Channel
    aux_seeds: list

    @property
    def correct(self) -> bool:
        return self.computed == self.oracle_value

    @property
    def stage1_correct(self) -> bool:
        return self.stage1_value == self.oracle_value

    @property
    def metrics(self) -> Metrics:
        return self.channel.metrics


def run_trial(
    config: ExperimentConfig,
    n: int,
    trial: int,
    capture_trace: bool = False,
    bits_override: np.ndarray | None = None,
    noise: NoiseModel | None = None,
) -> TrialRun:
    """Execute one seeded trial: geometry, stage 1, stage 2, oracle comparison.

    The trial seed derives from (base_seed, n, trial, resample); placement,
    bits, and protocol noise consume independent substreams of it, so the
    whole run is a pure function of the config.  Empty-cell worlds are
    resampled (counted) up to the configured cap.
    """
    params = derive_params(n, config.delta)
    resamples = 0
    while True:
        seq = np.random.SeedSequence([config.base_seed, n, trial, resamples])
        place_seed, bits_seed, noise_seed, *aux_seeds = seq.spawn(5)
        instance = place_nodes(n, place_seed)
        try:
            grid = assign_cells(instance, params)
            break
        except ProtocolInfeasibleError:
            resamples += 1
            if resamples > config.max_resamples:
                raise InfeasibleRunError(
                    f"exhausted {config.max_resamples} resamples at n={n}, trial={trial}: "
                    f"cells keep coming up empty; this n is too small for the tessellation"
                )

    if bits_override is not None:
        bits = np.asarray(bits_override, dtype=np.int8)
    else:
        bits = _draw_bits(config, n, np.random.default_rng(bits_seed))
    instance = instance.with_bits(bits)

    tree = build_tree(grid, params)
    coloring = color_cells(grid, params)
    plan = build_substages(tree, params, config.l_sub_for(n))
    s1cfg = Stage1Config.for_network(
        n,
        config.eps0,
        eps1=config.eps1,
        c_rep=config.c_rep,
        r2=config.r2_for(n),
        block_len=config.l1,
        code_seed=config.code_seed,
    )
    link_cfg = config.link_config_for(n)
    channel = Channel(
        instance=instance,
        params=params,
        noise=noise if noise is not None else NoiseModel(config.eps0),
        rng=np.random.default_rng(noise_seed),
        metrics=Metrics(energy=EnergyConfig(e_t=config.e_t, e_r=config.e_r)),
        trace=Trace() if capture_trace else None,
    )

    if config.protocol == "max":
        s1 = run_stage1_max(grid, coloring, s1cfg, channel)
        stage1_value = max(s1.values.values())
        computed = run_stage2_max(plan, s1.values, link_cfg, channel, grid, params, tree)
    else:
        s1 = run_stage1_hist(grid, coloring, s1cfg, channel)
        stage1_value = sum(s1.counts.values())
        computed = run_stage2_hist(plan, s1.counts, link_cfg, channel, grid, params, tree)

    return TrialRun(
        config=config,
        n=n,
        trial=trial,
        instance=instance,
        params=params,
        grid=grid,
        tree=tree,
        coloring=coloring,
        plan=plan,
        stage1_config=s1cfg,
        link_config=link_cfg,
        stage1=s1,
        stage1_value=stage1_value,
        computed=computed,
        oracle_value=oracle(instance, config.protocol),
        resamples=resamples,
        channel=channel,
        aux_seeds=aux_seeds,
    )


@dataclass
class RunReport:
    """Per-trial rows plus per-n aggregates; serializes to schema-1 JSON."""

    config: ExperimentConfig
    results: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"schema": SCHEMA_VERSION, "config": self.config.to_dict(), "results": self.results}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def result_for(self, n: int) -> dict:
        return next(r for r in self.results if r["n"] == n)


def _trial_row(run: TrialRun) -> dict:
    return {
        "trial": run.trial,
        "computed": run.computed,
        "oracle": run.oracle_value,
        "correct": run.correct,
        "stage1_value": run.stage1_value,
        "stage1_correct": run.stage1_correct,
        "resamples": run.resamples,
        "metrics": run.metrics.snapshot(),
    }


def _aggregate(n: int, rows: list[dict]) -> dict:
    trials = len(rows)
    errors = sum(not r["correct"] for r in rows)
    stage1_errors = sum(not r["stage1_correct"] for r in rows)
    lo, hi = wilson_interval(errors, trials)
    mean = lambda key: float(np.mean([r["metrics"][key] for r in rows]))
    return {
        "n": n,
        "trials": trials,
        "errors": errors,
        "error_rate": errors / trials,
        "wilson_low": lo,
        "wilson_high": hi,
        "stage1_errors": stage1_errors,
        "stage1_error_rate": stage1_errors / trials,
        "resamples": sum(r["resamples"] for r in rows),
        "mean_tx": mean("tx_count"),
        "mean_slots": mean("slots_total"),
        "mean_slots_stage1": mean("slots_stage1"),
        "mean_slots_stage2": mean("slots_stage2"),
        "mean_tx_stage2": mean("tx_stage2"),
        "mean_em1": mean("em1"),
        "mean_em2": mean("em2"),
        "mean_em1_stage1": mean("em1_stage1"),
        "trials_detail": rows,
    }


def run_experiment(config: ExperimentConfig, capture_trace: bool = False) -> RunReport:
    """Run every (n, trial) of the config and aggregate per n."""
    report = RunReport(config=config)
    for n in config.n:
        rows = [
            _trial_row(run_trial(config, n, t, capture_trace=capture_trace))
            for t in range(config.trials)
        ]
        report.results.append(_aggregate(n, rows))
    return report


@dataclass
class SweepReport:
    """Scaling table: normalized cost columns per n and their band ratios."""

    config: ExperimentConfig
    rows: list[dict] = field(default_factory=list)
    band_ratios: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "rows": self.rows,
            "band_ratios": self.band_ratios,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(
                f"{r['n']},{r['trials']},{r['error_rate']},{r['tx_total']},{r['tx_per_n']},"
                f"{r['slots_total']},{r['slots_norm']},{r['em1']},{r['em2']},{r['resamples']}"
            )
        return "\n".join(lines) + "\n"


def _aux_stage2_costs(run: TrialRun) -> tuple[int, int]:
    """Repetition-mode stage-2 slots and histogram stage-2 transmissions.

    Both protocols' stage-2 costs are data-independent accounting, so the
    sweep measures them on the already-built world with auxiliary noise
    streams, whatever the main protocol was.
    """
    cfg = run.config
    rep_cfg = replace(run.link_config, mode="repetition")
    if cfg.protocol == "max" and cfg.mode == "repetition":
        rep_slots = run.metrics.slots_stage2
    else:
        ch = Channel(
            instance=run.instance,
            params=run.params,
            noise=NoiseModel(cfg.eps0),
            rng=np.random.default_rng(run.aux_seeds[0]),
            metrics=Metrics(),
        )
        values = run.stage1.values or {j: 0 for j in run.stage1.counts}
        run_stage2_max(run.plan, values, rep_cfg, ch, run.grid, run.params, run.tree)
        rep_slots = ch.metrics.slots_stage2

    if cfg.protocol == "hist":
        hist_tx = run.metrics.tx_stage2
    else:
        ch = Channel(
            instance=run.instance,
            params=run.params,
            noise=NoiseModel(cfg.eps0),
            rng=np.random.default_rng(run.aux_seeds[1]),
            metrics=Metrics(),
        )
        counts = {c.index: 0 for c in run.grid}
        run_stage2_hist(run.plan, counts, run.link_config, ch, run.grid, run.params, run.tree)
        hist_tx = ch.metrics.tx_stage2
    return rep_slots, hist_tx


def sweep(config: ExperimentConfig) -> SweepReport:
    """Measure cost scaling across the configured n values.

    Requires at least three n values spanning an 8x range.  Emits, per n,
    the mean total transmissions, slots, and stage-1 energy normalized by
    their expected growth laws, plus the repetition-mode stage-2 time and
    histogram stage-2 transmissions; band_ratios holds max/min per column.
    """
    ns = sorted(config.n)
    if len(ns) < 3 or max(ns) < 8 * min(ns):
        raise ConfigError("a sweep needs >= 3 values of n spanning at least an 8x range")

    report = SweepReport(config=config)
    for n in ns:
        rows = []
        rep_slots_all, hist_tx_all = [], []
        for t in range(config.trials):
            run = run_trial(config, n, t)
            rows.append(_trial_row(run))
            rep_slots, hist_tx = _aux_stage2_costs(run)
            rep_slots_all.append(rep_slots)
            hist_tx_all.append(hist_tx)
        agg = _aggregate(n, rows)
        log_n = math.log(n)
        time_norm = math.sqrt(n / log_n)
        report.rows.append(
            {
                "n": n,
                "trials": agg["trials"],
                "error_rate": agg["error_rate"],
                "tx_total": agg["mean_tx"],
                "tx_per_n": agg["mean_tx"] / n,
                "slots_total": agg["mean_slots"],
                "slots_norm": agg["mean_slots"] / time_norm,
                "slots_stage2_repetition": float(np.mean(rep_slots_all)),
                "slots_stage2_repetition_norm": float(np.mean(rep_slots_all)) / math.sqrt(n * log_n),
                "slots_stage2": agg["mean_slots_stage2"],
                "em1_stage1": agg["mean_em1_stage1"],
                "em1_stage1_norm": agg["mean_em1_stage1"] / (n * log_n),
                "hist_stage2_tx": float(np.mean(hist_tx_all)),
                "hist_stage2_tx_per_n": float(np.mean(hist_tx_all)) / n,
                "em1": agg["mean_em1"],
                "em2": agg["mean_em2"],
                "resamples": agg["resamples"],
            }
        )

    for col in (
        "tx_per_n",
        "slots_norm",
        "slots_stage2_repetition_norm",
        "em1_stage1_norm",
        "hist_stage2_tx_per_n",
    ):
        vals = [r[col] for r in report.rows]
        report.band_ratios[col] = max(vals) / min(vals) if min(vals) > 0 else float("inf")
    return report


@dataclass
class AuditReport:
    """Outcome of the interference / obliviousness / energy audit."""

    collision_violations: list[str] = field(default_factory=list)
    obliviousness_violations: list[str] = field(default_factory=list)
    energy_violations: list[str] = field(default_factory=list)

    @property
    def collision_free(self) -> bool:
        return not self.collision_violations

    @property
    def oblivious(self) -> bool:
        return not self.obliviousness_violations

    @property
    def energy_exact(self) -> bool:
        return not self.energy_violations

    @property
    def passed(self) -> bool:
        return self.collision_free and self.oblivious and self.energy_exact

    def summary(self) -> str:
        status = lambda ok: "ok" if ok else "FAIL"
        return (
            f"collision-free: {status(self.collision_free)}; "
            f"oblivious schedules: {status(self.oblivious)}; "
            f"energy identities: {status(self.energy_exact)}"
        )


def _min_cross_distance(positions: np.ndarray, a: tuple[int, ...], b: tuple[int, ...]) -> float:
    pa, pb = positions[list(a)], positions[list(b)]
    diff = pa[:, None, :] - pb[None, :, :]
    return float(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff).min()))


def audit_coloring(
    grid: CellGrid,
    params: DerivedParams,
    coloring: list[ScheduleClass],
    positions: np.ndarray,
    class_bases: dict[int, int] | None = None,
) -> list[str]:
    """Prove the intra-cell coloring collision-free, or name the offenders.

    Any transmitter of one cell must sit at least (1 + delta) * radius from
    every listener of any same-class cell, which covers every slot of the
    lockstep schedule at once.  Violations carry a representative slot (the
    class's first), where both offending cells are guaranteed active.
    """
    guard = (1.0 + params.delta) * params.radius
    violations = []
    for cls in coloring:
        base = (class_bases or {}).get(cls.color, 0)
        for i, a in enumerate(cls.cells):
            for b in cls.cells[i + 1 :]:
                dist = _min_cross_distance(positions, grid.cell(a).members, grid.cell(b).members)
                if dist < guard:
                    violations.append(
                        f"slot {base}: same-color cells {a} and {b} (color {cls.color}) have "
                        f"members {dist:.4f} apart, inside the guard ring {guard:.4f}"
                    )
    return violations


def _stage1_class_bases(run: TrialRun) -> dict[int, int]:
    bases = {}
    base = 0
    for cls in run.coloring:
        bases[cls.color] = base
        max_members = max(run.grid.cell(j).size for j in cls.cells)
        if run.config.protocol == "max":
            base += run.stage1_config.script_len(max_members)
        else:
            base += run.stage1_config.r2 * max_members
    return bases


def _replay_intracell_slots(run: TrialRun, report: AuditReport) -> None:
    """Replay representative slots through the literal slot resolver."""
    params, grid = run.params, run.grid
    positions = run.instance.positions
    rng = np.random.default_rng(0)
    noiseless = NoiseModel(0.0)
    bases = _stage1_class_bases(run)
    for cls in run.coloring:
        # First discovery slot: each cell's lowest-id member transmits.
        for phase, txs in (
            ("discovery", [grid.cell(j).members[0] for j in cls.cells]),
            ("identity", [grid.cell(j).center for j in cls.cells]),
        ):
            slot = bases[cls.color]
            events = [TxEvent(slot, tx, 0) for tx in txs]
            for j, tx in zip(cls.cells, txs):
                listeners = [m for m in grid.cell(j).members if m != tx]
                outcomes = resolve_slot(events, listeners, positions, params, noiseless, rng)
                bad = [m for m, o in outcomes.items() if not o.is_received]
                if bad:
                    report.collision_violations.append(
                        f"{phase} slot {slot}: cell {j} listeners {bad} did not receive"
                    )


def _audit_stage2_links(run: TrialRun, report: AuditReport) -> None:
    """Check the link schedule: same-subslot links cannot collide.

    Within a logical slot, the link from child cell j fires in the subslot
    given by j's tiling color (upward; downward subslots are a disjoint
    second bank).  Same-subslot transmitters must clear every other link's
    receiver by the guard distance.
    """
    params, grid, tree = run.params, run.grid, run.tree
    positions = run.instance.positions
    guard = (1.0 + params.delta) * params.radius
    d = params.reuse_distance
    for si, stage in enumerate(run.plan.stages):
        groups: dict[int, list[tuple[int, int]]] = {}
        for array in stage.arrays:
            for child, parent in zip(array.cells, array.cells[1:]):
                cell = grid.cell(child)
                subslot = (cell.row % d) * d + (cell.col % d)
                groups.setdefault(subslot, []).append(
                    (grid.cell(child).center, grid.cell(parent).center)
                )
        for subslot, links in groups.items():
            for i, (tx1, rx1) in enumerate(links):
                for tx2, rx2 in links[i + 1 :]:
                    d12 = float(np.linalg.norm(positions[tx1] - positions[rx2]))
                    d21 = float(np.linalg.norm(positions[tx2] - positions[rx1]))
                    if d12 < guard or d21 < guard:
                        report.collision_violations.append(
                            f"stage {si} subslot {subslot}: links {tx1}->{rx1} and "
                            f"{tx2}->{rx2} are within the guard ring"
                        )


def _expected_stage2_tx(run: TrialRun) -> int:
    """Closed-form stage-2 transmission count implied by the plan and mode."""
    link = run.link_config
    links = run.params.cell_count - 1
    if link.mode == "abstract":
        return links * link.r3
    width = 1 if run.config.protocol == "max" else count_bits_for(run.n)
    if link.mode == "repetition":
        return links * width * link.r3
    sym_bits = link.alphabet.bit_length() - 1
    total = 0
    for array in run.plan.arrays:
        rounds = array.q - 1 if run.config.protocol == "max" else array.q + width - 1
        depth = rounds + min(link.treecode_pad, link.d_max - rounds)
        total += 2 * (array.q - 1) * depth * sym_bits
    return total


def validate_run(run: TrialRun) -> AuditReport:
    """Audit a traced trial: collision freedom, oblivious schedules, energy.

    Checks (slot-indexed on failure): (a) no intended receiver can observe a
    collision in the discovery, identity, or inter-cell phases -- the
    data-dependent confirmation slots are the documented exception; (b) the
    discovery/identity schedules do not change when every data bit is
    flipped; (c) the energy counters satisfy their defining identities and
    the stage-2 count matches its closed-form accounting identity.
    """
    if run.channel.trace is None:
        raise ValueError("validate_run needs a trial executed with capture_trace=True")
    report = AuditReport()

    bases = _stage1_class_bases(run)
    report.collision_violations.extend(
        audit_coloring(run.grid, run.params, run.coloring, run.instance.positions, bases)
    )
    _replay_intracell_slots(run, report)
    _audit_stage2_links(run, report)

    flipped = run_trial(
        run.config,
        run.n,
        run.trial,
        capture_trace=True,
        bits_override=1 - run.instance.bits,
    )
    phases = ("discovery", "identity", "hist_count")
    ours = run.channel.trace.stage1_slot_map(phases)
    theirs = flipped.channel.trace.stage1_slot_map(phases)
    if ours != theirs:
        diff = sorted(set(ours.items()) ^ set(theirs.items()))[:3]
        report.obliviousness_violations.append(
            f"discovery/identity schedules changed with the data bits, e.g. {diff}"
        )
    if run.channel.trace.stage2_stages != flipped.channel.trace.stage2_stages:
        report.obliviousness_violations.append("stage-2 array structure changed with the data bits")

    m = run.metrics
    e = m.energy
    if m.em2 != e.e_t * m.tx_count or m.em1 != e.e_t * m.tx_count + e.e_r * m.rx_count:
        report.energy_violations.append("em1/em2 do not match their defining identities")
    expected = _expected_stage2_tx(run)
    if m.tx_stage2 != expected:
        report.energy_violations.append(
            f"stage-2 transmissions {m.tx_stage2} differ from the accounting identity {expected}"
        )
    return report


def _audit_trial(config: ExperimentConfig, n: int, trial: int = 0) -> AuditReport:
    return validate_run(run_trial(config, n, trial, capture_trace=True))


# ---------------------------------------------------------------------------
# CLI


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisyplanar",
        description="Simulate MAX/histogram aggregation protocols on noisy random planar networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "run the configured experiment and write a JSON report"),
        ("sweep", "run a scaling sweep over several n and write JSON + CSV tables"),
        ("validate", "run with trace capture and audit interference/obliviousness/energy"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON file of kebab-case config keys")
        p.add_argument("--out", help="path for the JSON report")
        if name == "sweep":
            p.add_argument("--csv", help="path for the CSV sweep table")
        p.add_argument("--protocol", choices=("max", "hist"))
        p.add_argument("--n", help="comma-separated node counts, e.g. 1000,2000,4000")
        p.add_argument("--trials", type=int)
        p.add_argument("--base-seed", type=int)
        p.add_argument("--eps0", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--mode", choices=("repetition", "treecode", "abstract"))
        p.add_argument(
            "--bit-source",
            choices=("all-zero", "all-one", "bernoulli", "single-one-at-random", "explicit"),
        )
        p.add_argument("--bit-p", type=float)
        p.add_argument("--bits", help="comma-separated explicit bits")
        p.add_argument("--eps1", type=float)
        p.add_argument("--c-rep", type=int)
        p.add_argument("--r2", type=int)
        p.add_argument("--l1", type=int)
        p.add_argument("--r3", type=int)
        p.add_argument("--gamma", type=float)
        p.add_argument("--k-rs", type=float)
        p.add_argument("--d-max", type=int)
        p.add_argument("--l-sub", type=int)
        p.add_argument("--alphabet", type=int)
        p.add_argument("--treecode-pad", type=int)
        p.add_argument("--treecode-seed", type=int)
        p.add_argument("--code-seed", type=int)
        p.add_argument("--e-t", type=float)
        p.add_argument("--e-r", type=float)
        p.add_argument("--max-resamples", type=int)
    return parser


_CLI_ONLY = {"command", "config", "out", "csv"}


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ConfigError("--config file must hold a JSON object")
        data.update(loaded)
    for key, value in vars(args).items():
        if key in _CLI_ONLY or value is None:
            continue
        name = key.replace("_", "-")
        if name == "n":
            value = [int(v) for v in str(value).split(",") if v]
        if name == "bits":
            value = [int(v) for v in str(value).split(",") if v]
        data[name] = value
    return ExperimentConfig.from_dict(data)


def _write_or_print(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        print(text)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if not exc.code else 2

    try:
        config = _config_from_args(args)
        if args.command == "run":
            report = run_experiment(config)
            _write_or_print(report.to_json(), args.out)
            if args.out:
                for r in report.results:
                    print(
                        f"n={r['n']}: {r['trials'] - r['errors']}/{r['trials']} correct, "
                        f"mean tx={r['mean_tx']:.0f}, mean slots={r['mean_slots']:.0f}"
                    )
        elif args.command == "sweep":
            report = sweep(config)
            if args.out:
                _write_or_print(report.to_json(), args.out)
            if args.csv:
                _write_or_print(report.to_csv(), args.csv)
            if not args.csv:
                print(report.to_csv(), end="")
        else:  # validate
            failed = False
            for n in config.n:
                audit = _audit_trial(config, n)
                print(f"n={n}: {audit.summary()}")
                for v in (
                    audit.collision_violations
                    + audit.obliviousness_violations
                    + audit.energy_violations
                ):
                    print(f"  {v}", file=sys.stderr)
                failed = failed or not audit.passed
            if failed:
                return 4
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ProtocolInfeasibleError, InfeasibleRunError, CapacityError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
