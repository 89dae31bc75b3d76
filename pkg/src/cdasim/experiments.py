"""Trader construction, seeded trials and the built-in experiment presets."""

from __future__ import annotations

import csv
import json
import math
import random
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np

from .orderbook import ASK, BID
from .session import ConfigError, Schedule, SessionConfig, SessionRecord, run_session
from .stats import StatsError, mann_whitney_u, mean_ci, t_test
from .traders import STRATEGIES, Trader

Mix = Sequence[tuple[str, int]]

ALLOCATIONS = ("serpentine", "interleave", "block", "shuffle")
TESTS = ("t", "mwu")


def interleave(mix: Mix) -> list[str]:
    """Round-robin over strategies: [(A, 2), (B, 2)] -> [A, B, A, B]."""
    pending = [[name, n] for name, n in mix if n > 0]
    out = []
    while pending:
        for item in pending:
            out.append(item[0])
            item[1] -= 1
        pending = [p for p in pending if p[1] > 0]
    return out


def serpentine(mix: Mix) -> list[str]:
    """Deal slots back and forth so rank sums stay balanced across strategies:
    [(A, 3), (B, 3)] -> [A, B, B, A, A, B]."""
    names = [name for name, n in mix if n > 0]
    left = {name: n for name, n in mix if n > 0}
    out = []
    forward = True
    while names:
        for name in (names if forward else reversed(names)):
            out.append(name)
            left[name] -= 1
        names = [n for n in names if left[n] > 0]
        forward = not forward
    return out


def allocate(mix: Mix, mode: str, rng: Optional[random.Random] = None) -> list[str]:
    """Strategy name for each schedule slot on one side of the market.

    "serpentine" deals back and forth ([A, B, B, A]), "interleave" alternates
    ([A, B, A, B]), "block" keeps the mix order ([A, A, B, B]) and "shuffle" is a
    seeded random permutation, redrawn per trial.
    """
    if mode == "serpentine":
        return serpentine(mix)
    if mode == "interleave":
        return interleave(mix)
    names = [name for name, n in mix for _ in range(n)]
    if mode == "block":
        return names
    if mode == "shuffle":
        if rng is None:
            raise ConfigError("shuffle allocation needs an RNG")
        rng.shuffle(names)
        return names
    raise ConfigError(f"unknown allocation {mode!r}")


def trial_streams(seed: int, trial: int, n: int) -> list[random.Random]:
    """n independent RNG streams for one trial, derived from (seed, trial)."""
    ss = np.random.SeedSequence([seed & (2**64 - 1), trial])
    return [random.Random(int(c.generate_state(2, np.uint64)[0])) for c in ss.spawn(n)]


def build_traders(buyers: Mix, sellers: Mix, rngs: Sequence[random.Random],
                  max_price: int = 500, params: Optional[dict] = None,
                  duration: Optional[int] = None, allocation: str = "serpentine",
                  alloc_rng: Optional[random.Random] = None) -> list[Trader]:
    params = params or {}
    out: list[Trader] = []
    k = 0
    for prefix, side, mix in (("B", BID, buyers), ("S", ASK, sellers)):
        for i, name in enumerate(allocate(mix, allocation, alloc_rng)):
            if name not in STRATEGIES:
                raise ConfigError(f"unknown strategy {name!r}")
            kw = dict(params.get(name, {}))
            if name == "ZIPP" and duration is not None:
                kw.setdefault("day_end", duration)
            out.append(STRATEGIES[name](f"{prefix}{i:02d}", side, rngs[k], max_price, **kw))
            k += 1
    return out


def run_trial(config: SessionConfig, buyers: Mix, sellers: Mix, trial: int,
              params: Optional[dict] = None, allocation: str = "serpentine") -> SessionRecord:
    """One seeded session. Streams: one per trader, then the scheduler, then
    the slot allocation."""
    n = sum(c for _, c in buyers) + sum(c for _, c in sellers)
    rngs = trial_streams(config.seed, trial, n + 2)
    traders = build_traders(buyers, sellers, rngs[:n], config.max_price, params,
                            config.duration, allocation, rngs[n + 1])
    return run_session(config, traders, rngs[n])


# -- market definitions --------------------------------------------------------

def symmetric_market(n: int = 10) -> tuple[Schedule, Schedule]:
    """n buyers and n sellers with limits evenly spread over 10..190."""
    return Schedule.evenly("demand", 10, 190, n), Schedule.evenly("supply", 10, 190, n)


# five 10+10 markets for the urgency experiments, centred on the 75..125 band
URGENCY_SCHEDULES: dict[str, tuple[Schedule, Schedule]] = {
    "a-symmetric": (Schedule.evenly("demand", 75, 125, 10),
                    Schedule.evenly("supply", 75, 125, 10)),
    "b-elastic-demand": (Schedule.flat("demand", 100, 10),
                         Schedule.evenly("supply", 75, 125, 10)),
    "c-elastic-supply": (Schedule.evenly("demand", 75, 125, 10),
                         Schedule.flat("supply", 100, 10)),
    "d-excess-demand": (Schedule.evenly("demand", 100, 150, 10),
                        Schedule.evenly("supply", 75, 125, 10)),
    "e-excess-supply": (Schedule.evenly("demand", 75, 125, 10),
                        Schedule.evenly("supply", 50, 100, 10)),
}


def load_reaction_times(path: Optional[str | Path] = None) -> dict[str, float]:
    """Published per-call reaction times (microseconds) keyed by strategy."""
    if path is None:
        text = resources.files("cdasim").joinpath("data/reaction_times.csv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return {r["strategy"]: float(r["microseconds"]) for r in csv.DictReader(text.splitlines())}


# -- presets -------------------------------------------------------------------

@dataclass
class Point:
    """One configuration of an experiment: a session template plus a trader mix."""

    label: str
    config: SessionConfig
    buyers: Mix
    sellers: Mix

    @property
    def strategies(self) -> list[str]:
        return list(dict.fromkeys(n for n, c in list(self.buyers) + list(self.sellers) if c > 0))


@dataclass(frozen=True)
class Comparison:
    point_a: str
    strategy_a: str
    point_b: str
    strategy_b: str
    test: str = "t"


@dataclass
class ExperimentPreset:
    name: str
    points: list[Point]
    trials: int
    seed: int = 1
    comparisons: list[Comparison] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    allocation: str = "serpentine"
    description: str = ""
    logs: bool = False

    def point(self, label: str) -> Point:
        for p in self.points:
            if p.label == label:
                return p
        raise KeyError(label)

    def subset(self, labels: Sequence[str]) -> "ExperimentPreset":
        """Copy restricted to the given points and the comparisons among them."""
        keep = set(labels)
        missing = keep - {p.label for p in self.points}
        if missing:
            raise KeyError(sorted(missing))
        return replace(
            self,
            points=[p for p in self.points if p.label in keep],
            comparisons=[c for c in self.comparisons if c.point_a in keep and c.point_b in keep],
        )


SENSITIVITY_GRID = (1, 2, 5, 10, 20, 40)
DEFAULT_SEED = 20240601


def _sensitivity(competitor: str) -> ExperimentPreset:
    demand, supply = symmetric_market()
    points = []
    comps = []
    for r in SENSITIVITY_GRID:
        label = f"r{r}"
        cfg = SessionConfig(demand, supply, scheduler="speed",
                            reaction_times={"AA": float(r), competitor: 1.0},
                            record_quotes=False)
        mix = [("AA", 5), (competitor, 5)]
        points.append(Point(label, cfg, mix, mix))
        comps.append(Comparison(label, "AA", label, competitor))
    return ExperimentPreset(
        f"sensitivity-aa-{competitor.lower()}", points, trials=100, seed=DEFAULT_SEED,
        comparisons=comps,
        description=f"AA:{competitor} balanced test with AA slowed by each factor in "
                    f"{list(SENSITIVITY_GRID)}")


def _zic_equilibration() -> ExperimentPreset:
    demand, supply = symmetric_market()
    # seller draws span [L, 200], the mirror image of the buyers' [1, L] about 100
    cfg = SessionConfig(demand, supply, max_price=200, record_quotes=False)
    return ExperimentPreset(
        "zic-equilibration", [Point("zic", cfg, [("ZIC", 10)], [("ZIC", 10)])], trials=100,
        seed=DEFAULT_SEED,
        description="homogeneous ZIC market; prices.csv holds the final-three-period mean price")


def _profiled_speeds() -> ExperimentPreset:
    demand, supply = symmetric_market()
    rts = load_reaction_times()
    points = []
    comps = []
    for other in ("AA", "ZIP"):
        mix = [(other, 5), ("SHVR", 5)]
        for mode in ("equal", "profiled"):
            label = f"{other.lower()}-shvr-{mode}"
            if mode == "equal":
                cfg = SessionConfig(demand, supply, record_quotes=False)
            else:
                # resolution 5 keeps the pool small: 9.5:6.9 -> 5:7, 8.4:6.9 -> 5:6
                cfg = SessionConfig(demand, supply, scheduler="speed", reaction_times=dict(rts),
                                    pool_resolution=5, record_quotes=False)
            points.append(Point(label, cfg, mix, mix))
            comps.append(Comparison(label, other, label, "SHVR"))
    return ExperimentPreset(
        "profiled-speeds", points, trials=100, seed=DEFAULT_SEED, comparisons=comps,
        description="AA:SHVR and ZIP:SHVR at equal speed and at the published reaction times")


def _urgency_config(demand: Schedule, supply: Schedule,
                    record_quotes: bool = False) -> SessionConfig:
    return SessionConfig(demand, supply, duration=180, period=30, record_quotes=record_quotes)


def _zipp_heterogeneous(name: str = "zipp-heterogeneous") -> ExperimentPreset:
    points = []
    comps = []
    for label, (d, s) in URGENCY_SCHEDULES.items():
        mix = [("ZIPP", 5), ("ZIP", 5)]
        points.append(Point(label, _urgency_config(d, s), mix, mix))
        comps.append(Comparison(label, "ZIPP", label, "ZIP", "mwu"))
    return ExperimentPreset(name, points, trials=25, seed=DEFAULT_SEED, comparisons=comps,
                            description="ZIPP:ZIP balanced test on each of the five schedules")


HOMOGENEOUS_STRATEGIES = ("ZIP", "ZIPP", "AA", "GDX")
HOMOGENEOUS_PAIRS = (("ZIPP", "ZIP"), ("AA", "GDX"), ("AA", "ZIPP"), ("GDX", "ZIPP"))


def _zipp_homogeneous() -> ExperimentPreset:
    points = []
    comps = []
    for label, (d, s) in URGENCY_SCHEDULES.items():
        for strat in HOMOGENEOUS_STRATEGIES:
            points.append(Point(f"{label}-{strat.lower()}", _urgency_config(d, s),
                                [(strat, 10)], [(strat, 10)]))
        for a, b in HOMOGENEOUS_PAIRS:
            comps.append(Comparison(f"{label}-{a.lower()}", a, f"{label}-{b.lower()}", b, "mwu"))
    return ExperimentPreset("zipp-homogeneous", points, trials=25, seed=DEFAULT_SEED,
                            comparisons=comps,
                            description="single-strategy markets of ZIP, ZIPP, AA and GDX")


def _three_way() -> ExperimentPreset:
    points = []
    comps = []
    mix = [("AA", 5), ("GDX", 5), ("ZIPP", 5)]
    for label, (d, s) in URGENCY_SCHEDULES.items():
        cfg = _urgency_config(d.resized(15), s.resized(15))
        points.append(Point(label, cfg, mix, mix))
        for a, b in (("ZIPP", "GDX"), ("AA", "GDX"), ("AA", "ZIPP")):
            comps.append(Comparison(label, a, label, b, "mwu"))
    return ExperimentPreset("aa-gdx-zipp", points, trials=25, seed=DEFAULT_SEED,
                            comparisons=comps,
                            description="AA:GDX:ZIPP balanced test, five of each type per side")


def _zipp_traces() -> ExperimentPreset:
    d, s = URGENCY_SCHEDULES["a-symmetric"]
    points = [Point(strat.lower(), _urgency_config(d, s, record_quotes=True),
                    [(strat, 10)], [(strat, 10)]) for strat in ("ZIP", "ZIPP")]
    return ExperimentPreset("zipp-traces", points, trials=1, seed=DEFAULT_SEED, logs=True,
                            description="quote logs of homogeneous ZIP and ZIPP days")


PRESETS: dict[str, Callable[[], ExperimentPreset]] = {
    "zic-equilibration": _zic_equilibration,
    "sensitivity-aa-gvwy": lambda: _sensitivity("GVWY"),
    "sensitivity-aa-shvr": lambda: _sensitivity("SHVR"),
    "sensitivity-aa-zic": lambda: _sensitivity("ZIC"),
    "sensitivity-aa-zip": lambda: _sensitivity("ZIP"),
    "profiled-speeds": _profiled_speeds,
    "zipp-heterogeneous": _zipp_heterogeneous,
    "zipp-five-schedules": lambda: _zipp_heterogeneous("zipp-five-schedules"),
    "zipp-homogeneous": _zipp_homogeneous,
    "aa-gdx-zipp": _three_way,
    "zipp-traces": _zipp_traces,
}


def list_presets() -> list[str]:
    return sorted(PRESETS)


def get_preset(name: str) -> ExperimentPreset:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}") from None


# -- running -------------------------------------------------------------------

@dataclass
class TrialOutcome:
    trial: int
    profits: dict[str, int]
    n_trades: int
    final_mean_price: Optional[float]
    files: Optional[dict[str, str]] = None


def final_periods_start(config: SessionConfig, periods: int = 3) -> int:
    issues = config.issue_times()
    return issues[-periods] if len(issues) >= periods else 0


def _run_job(job) -> TrialOutcome:
    config, buyers, sellers, trial, params, allocation, logs = job
    rec = run_trial(config, buyers, sellers, trial, params, allocation)
    prices = rec.trade_prices(final_periods_start(config))
    mean = sum(prices) / len(prices) if prices else None
    profits = {name: rec.profit_by_strategy.get(name, 0)
               for name, _ in list(buyers) + list(sellers)}
    return TrialOutcome(trial, profits, len(rec.trades), mean, rec.to_csv() if logs else None)


@dataclass
class SummaryRow:
    experiment: str
    strategy: str
    mean: float
    ci95: float
    n: int


@dataclass
class ComparisonRow:
    experiment: str
    a: str
    b: str
    test: str
    p_value: float
    mean_a: float
    mean_b: float

    @property
    def significant(self) -> bool:
        return self.p_value < 0.05


def _tag(point: str, strategy: str, other_point: str) -> str:
    return strategy if point == other_point else f"{point}:{strategy}"


@dataclass
class ExperimentResult:
    preset: ExperimentPreset
    outcomes: dict[str, list[TrialOutcome]]
    summary: list[SummaryRow]
    comparisons: list[ComparisonRow]

    def sample(self, point: str, strategy: str) -> list[int]:
        return [o.profits[strategy] for o in self.outcomes[point]]

    def comparison(self, point_a: str, a: str, point_b: str, b: str) -> ComparisonRow:
        exp = self.preset.name if point_a != point_b else f"{self.preset.name}/{point_a}"
        key = (exp, _tag(point_a, a, point_b), _tag(point_b, b, point_a))
        for row in self.comparisons:
            if (row.experiment, row.a, row.b) == key:
                return row
        raise KeyError(key)


def _summarise(preset: ExperimentPreset,
               outcomes: dict[str, list[TrialOutcome]]) -> list[SummaryRow]:
    rows = []
    for p in preset.points:
        for strat in p.strategies:
            xs = [o.profits[strat] for o in outcomes[p.label]]
            if len(xs) >= 2:
                m, hw = mean_ci(xs)
            else:
                m, hw = float(xs[0]), math.nan
            rows.append(SummaryRow(f"{preset.name}/{p.label}", strat, m, hw, len(xs)))
    return rows


def _compare(preset: ExperimentPreset,
             outcomes: dict[str, list[TrialOutcome]]) -> list[ComparisonRow]:
    rows = []
    for c in preset.comparisons:
        a = [o.profits[c.strategy_a] for o in outcomes[c.point_a]]
        b = [o.profits[c.strategy_b] for o in outcomes[c.point_b]]
        try:
            p = t_test(a, b) if c.test == "t" else mann_whitney_u(a, b)
        except StatsError:
            p = math.nan
        exp = preset.name if c.point_a != c.point_b else f"{preset.name}/{c.point_a}"
        rows.append(ComparisonRow(exp, _tag(c.point_a, c.strategy_a, c.point_b),
                                  _tag(c.point_b, c.strategy_b, c.point_a),
                                  c.test, p, float(np.mean(a)), float(np.mean(b))))
    return rows


def run_experiment(preset: ExperimentPreset, out_dir: Optional[str | Path] = None,
                   parallel: int = 1, trials: Optional[int] = None,
                   seed: Optional[int] = None,
                   progress: Optional[Callable[[str], None]] = None) -> ExperimentResult:
    """Run every (point, trial) pair and optionally write the result tree.

    Outputs do not depend on `parallel`: each trial's RNG streams derive from
    (seed, trial index) and results are sorted by trial before writing.
    """
    if trials is not None:
        preset = replace(preset, trials=trials)
    if seed is not None:
        preset = replace(preset, seed=seed)
    if preset.trials < 1:
        raise ConfigError("trials: must be at least 1")
    if preset.allocation not in ALLOCATIONS:
        raise ConfigError(f"allocation: unknown mode {preset.allocation!r}")
    jobs = []
    for p in preset.points:
        cfg = replace(p.config, seed=preset.seed)
        cfg.validate()
        jobs += [(p.label, (cfg, list(p.buyers), list(p.sellers), k, preset.params,
                            preset.allocation, preset.logs)) for k in range(preset.trials)]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as ex:
            done = list(ex.map(_run_job, [j for _, j in jobs],
                               chunksize=max(1, len(jobs) // (8 * parallel))))
    else:
        done = []
        for i, (label, job) in enumerate(jobs):
            done.append(_run_job(job))
            if progress and (i + 1 == len(jobs) or jobs[i + 1][0] != label):
                progress(f"{preset.name}/{label}: {preset.trials} trials")
    outcomes: dict[str, list[TrialOutcome]] = {p.label: [] for p in preset.points}
    for (label, _), res in zip(jobs, done):
        outcomes[label].append(res)
    for label in outcomes:
        outcomes[label].sort(key=lambda o: o.trial)
    result = ExperimentResult(preset, outcomes, _summarise(preset, outcomes),
                              _compare(preset, outcomes))
    if out_dir is not None:
        write_results(result, Path(out_dir))
    return result


# -- output --------------------------------------------------------------------

def _fmt(x: Optional[float]) -> str:
    if x is None or math.isnan(x):
        return "nan"
    if x != 0 and abs(x) < 1e-4:
        return f"{x:.6e}"
    return f"{x:.6f}"


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        w.writerows(rows)


SUMMARY_HEADER = ("experiment", "strategy", "mean", "ci95", "n")
COMPARISON_HEADER = ("experiment", "a", "b", "test", "p_value", "significant@0.05")


def _summary_rows(rows: Sequence[SummaryRow]):
    return [(r.experiment, r.strategy, _fmt(r.mean), _fmt(r.ci95), r.n) for r in rows]


def _comparison_rows(rows: Sequence[ComparisonRow]):
    return [(r.experiment, r.a, r.b, r.test, _fmt(r.p_value), int(r.significant)) for r in rows]


def write_results(result: ExperimentResult, out_dir: Path) -> Path:
    """Layout: <out>/<experiment>/{experiment.json, summary.csv, comparison.csv}
    plus one sub-directory per point with profits, prices and optional logs."""
    preset = result.preset
    root = out_dir / preset.name
    root.mkdir(parents=True, exist_ok=True)
    (root / "experiment.json").write_text(json.dumps(preset_to_dict(preset), indent=2) + "\n",
                                          encoding="utf-8")
    _write_csv(root / "summary.csv", SUMMARY_HEADER, _summary_rows(result.summary))
    _write_csv(root / "comparison.csv", COMPARISON_HEADER, _comparison_rows(result.comparisons))
    for p in preset.points:
        pdir = root / p.label
        tag = f"{preset.name}/{p.label}"
        _write_csv(pdir / "summary.csv", SUMMARY_HEADER,
                   _summary_rows([r for r in result.summary if r.experiment == tag]))
        _write_csv(pdir / "comparison.csv", COMPARISON_HEADER,
                   _comparison_rows([r for r in result.comparisons if r.experiment == tag]))
        outs = result.outcomes[p.label]
        _write_csv(pdir / "profits.csv", ("trial", "strategy", "profit_ticks"),
                   [(o.trial, s, o.profits[s]) for o in outs for s in p.strategies])
        _write_csv(pdir / "prices.csv", ("trial", "n_trades", "final_mean_price"),
                   [(o.trial, o.n_trades, _fmt(o.final_mean_price)) for o in outs])
        for o in outs:
            if not o.files:
                continue
            tdir = pdir / "trials" / f"{o.trial:03d}"
            tdir.mkdir(parents=True, exist_ok=True)
            for name, text in o.files.items():
                with open(tdir / name, "w", newline="", encoding="utf-8") as fh:
                    fh.write(text)
    return root


# -- config files --------------------------------------------------------------

_LABEL = re.compile(r"^[A-Za-z0-9._-]+$")
_SESSION_KEYS = {"duration", "period", "max_price", "scheduler", "reaction_times",
                 "pool_resolution", "tick_scale", "demand", "supply", "record_quotes"}
_TOP_KEYS = {"name", "description", "trials", "seed", "session", "buyers", "sellers", "params",
             "allocation", "compare", "test", "points", "logs"}


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _check_schedule(d, path: str, errors: list[str]) -> Optional[tuple[int, int]]:
    """(count, highest price) or None when the schedule is unusable."""
    if not isinstance(d, Mapping):
        errors.append(f"{path}: expected an object")
        return None
    if "fixed" in d:
        fixed = d["fixed"]
        if not isinstance(fixed, list) or not fixed or not all(_is_int(p) for p in fixed):
            errors.append(f"{path}.fixed: expected a non-empty list of integer ticks")
            return None
        if min(fixed) < 1:
            errors.append(f"{path}.fixed: prices must be at least 1 tick")
        if "count" in d and d["count"] != len(fixed):
            errors.append(f"{path}.count: {d['count']} does not match {len(fixed)} listed prices")
        return len(fixed), max(fixed)
    bad = [k for k in ("lo", "hi", "count") if not _is_int(d.get(k))]
    for key in bad:
        errors.append(f"{path}.{key}: expected an integer")
    if bad:
        return None
    if d["count"] < 1:
        errors.append(f"{path}.count: must be at least 1")
    if d["lo"] < 1:
        errors.append(f"{path}.lo: must be at least 1 tick")
    if d["hi"] < d["lo"]:
        errors.append(f"{path}.hi: below lo")
    if d["count"] == 1 and d["hi"] != d["lo"]:
        errors.append(f"{path}: a single evenly spaced price needs lo == hi")
    return d["count"], d["hi"]


def _check_mix(d, path: str, errors: list[str]) -> Optional[int]:
    if not isinstance(d, Mapping) or not d:
        errors.append(f"{path}: expected an object mapping strategy to count")
        return None
    total = 0
    for name, n in d.items():
        if name not in STRATEGIES:
            errors.append(f"{path}.{name}: unknown strategy (known: {', '.join(STRATEGIES)})")
        if not _is_int(n) or n < 0:
            errors.append(f"{path}.{name}: expected a non-negative integer")
        else:
            total += n
    if total == 0:
        errors.append(f"{path}: no traders")
    return total


def _check_session(s, path: str, errors: list[str], strategies: set[str],
                   n_buyers: Optional[int], n_sellers: Optional[int]) -> None:
    if not isinstance(s, Mapping):
        errors.append(f"{path}: expected an object")
        return
    for key in s:
        if key not in _SESSION_KEYS:
            errors.append(f"{path}.{key}: unknown field")
    duration = s.get("duration", 330)
    period = s.get("period", 30)
    if not _is_int(duration) or duration <= 0:
        errors.append(f"{path}.duration: must be a positive integer")
        duration = None
    if not _is_int(period) or period <= 0:
        errors.append(f"{path}.period: must be a positive integer")
        period = None
    if duration is not None and period is not None and period > duration:
        errors.append(f"{path}.period: assignment period {period} exceeds duration {duration}")
    max_price = s.get("max_price", 500)
    if not _is_int(max_price) or max_price < 1:
        errors.append(f"{path}.max_price: must be a positive integer")
        max_price = None
    sched = s.get("scheduler", "uniform")
    if sched not in ("uniform", "speed"):
        errors.append(f"{path}.scheduler: expected 'uniform' or 'speed'")
    rts = s.get("reaction_times")
    if rts is not None:
        if not isinstance(rts, Mapping):
            errors.append(f"{path}.reaction_times: expected an object")
            rts = None
        else:
            for k, v in rts.items():
                if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
                    errors.append(f"{path}.reaction_times.{k}: must be a positive number")
    if sched == "speed":
        if rts is None:
            errors.append(f"{path}.reaction_times: required by the speed scheduler")
        else:
            for strat in sorted(strategies - set(rts)):
                errors.append(f"{path}.reaction_times.{strat}: missing for the speed scheduler")
    res = s.get("pool_resolution", 1000)
    if not _is_int(res) or res < 1:
        errors.append(f"{path}.pool_resolution: must be a positive integer")
    if "tick_scale" in s:
        try:
            if isinstance(s["tick_scale"], bool) or Fraction(str(s["tick_scale"])) <= 0:
                raise ValueError
        except (ValueError, ZeroDivisionError):
            errors.append(f"{path}.tick_scale: must be a positive number or a ratio like '1/100'")
    for side, n, who in (("demand", n_buyers, "buyers"), ("supply", n_sellers, "sellers")):
        if side not in s:
            errors.append(f"{path}.{side}: required")
            continue
        info = _check_schedule(s[side], f"{path}.{side}", errors)
        if info is None:
            continue
        count, top = info
        if n is not None and count != n:
            errors.append(f"{path}.{side}: {count} limit prices for {n} {who}")
        if max_price is not None and top > max_price:
            errors.append(f"{path}.{side}: limit {top} above max_price {max_price}")


def validate_config(data: Any) -> list[str]:
    """Schema and consistency problems in an experiment config, as
    "field.path: message" strings. Empty means valid."""
    errors: list[str] = []
    if not isinstance(data, Mapping):
        return ["<root>: expected a JSON object"]
    for key in data:
        if key not in _TOP_KEYS:
            errors.append(f"{key}: unknown field")
    name = data.get("name")
    if not isinstance(name, str) or not _LABEL.match(name):
        errors.append("name: required, letters, digits and ._- only")
    trials = data.get("trials", 1)
    if not _is_int(trials) or trials < 1:
        errors.append("trials: must be a positive integer")
    if "seed" in data and (not _is_int(data["seed"]) or not 0 <= data["seed"] < 2**64):
        errors.append("seed: must be an unsigned 64-bit integer")
    if data.get("allocation", "serpentine") not in ALLOCATIONS:
        errors.append(f"allocation: expected one of {', '.join(ALLOCATIONS)}")
    if data.get("test", "t") not in TESTS:
        errors.append("test: expected 't' or 'mwu'")
    if "logs" in data and not isinstance(data["logs"], bool):
        errors.append("logs: expected true or false")
    params = data.get("params", {})
    if not isinstance(params, Mapping):
        errors.append("params: expected an object")
    else:
        for strat, kw in params.items():
            if strat not in STRATEGIES:
                errors.append(f"params.{strat}: unknown strategy")
            elif not isinstance(kw, Mapping):
                errors.append(f"params.{strat}: expected an object")
    compare = data.get("compare", [])
    if not isinstance(compare, list):
        errors.append("compare: expected a list of strategy pairs")
        compare = []

    session = data.get("session")
    if session is None:
        errors.append("session: required")
        session = {}
    has_points = "points" in data
    points = data.get("points") if has_points else [{"label": "main"}]
    if not isinstance(points, list) or not points:
        errors.append("points: expected a non-empty list")
        points = []
    labels: set[str] = set()
    for i, pt in enumerate(points):
        pre = f"points[{i}]." if has_points else ""
        if not isinstance(pt, Mapping):
            errors.append(f"points[{i}]: expected an object")
            continue
        label = pt.get("label")
        if not isinstance(label, str) or not _LABEL.match(label):
            errors.append(f"{pre}label: required, letters, digits and ._- only")
        elif label in labels:
            errors.append(f"{pre}label: duplicate {label!r}")
        else:
            labels.add(label)
        mixes = {}
        totals = {}
        for side in ("buyers", "sellers"):
            mixes[side] = pt.get(side, data.get(side))
            totals[side] = _check_mix(mixes[side], f"{pre}{side}" if side in pt else side, errors)
        strategies = {k for m in mixes.values() if isinstance(m, Mapping) for k, v in m.items() if v}
        over = pt.get("session", {})
        if not isinstance(over, Mapping) or not isinstance(session, Mapping):
            errors.append(f"{pre}session: expected an object")
            continue
        _check_session({**session, **over}, f"{pre}session" if over else "session", errors,
                       strategies, totals["buyers"], totals["sellers"])
        for j, pair in enumerate(compare):
            if not (isinstance(pair, list) and len(pair) == 2):
                errors.append(f"compare[{j}]: expected a pair of strategy names")
            elif not set(pair) <= strategies:
                errors.append(f"compare[{j}]: {pair} not both traded in point {label!r}")
    # comparison and session errors repeat per point; keep the first of each
    return list(dict.fromkeys(errors))


def _session_from_dict(s: Mapping) -> SessionConfig:
    return SessionConfig(
        demand=Schedule.from_dict(s["demand"], "demand"),
        supply=Schedule.from_dict(s["supply"], "supply"),
        duration=s.get("duration", 330),
        period=s.get("period", 30),
        scheduler=s.get("scheduler", "uniform"),
        tick_scale=Fraction(str(s.get("tick_scale", 1))),
        max_price=s.get("max_price", 500),
        reaction_times={k: float(v) for k, v in s["reaction_times"].items()}
        if s.get("reaction_times") else None,
        pool_resolution=s.get("pool_resolution", 1000),
        record_quotes=s.get("record_quotes", False),
    )


def preset_from_dict(data: Mapping) -> ExperimentPreset:
    errors = validate_config(data)
    if errors:
        raise ConfigError("; ".join(errors))
    points = []
    comps = []
    test = data.get("test", "t")
    for pt in data.get("points") or [{"label": "main"}]:
        sess = _session_from_dict({**data["session"], **pt.get("session", {})})
        buyers = list(pt.get("buyers", data.get("buyers")).items())
        sellers = list(pt.get("sellers", data.get("sellers")).items())
        points.append(Point(pt["label"], sess, buyers, sellers))
        for a, b in data.get("compare", []):
            comps.append(Comparison(pt["label"], a, pt["label"], b, test))
    return ExperimentPreset(
        data["name"], points, trials=data.get("trials", 1), seed=data.get("seed", DEFAULT_SEED),
        comparisons=comps, params={k: dict(v) for k, v in data.get("params", {}).items()},
        allocation=data.get("allocation", "serpentine"),
        description=data.get("description", ""), logs=data.get("logs", False))


def _session_to_dict(c: SessionConfig) -> dict:
    d = {"duration": c.duration, "period": c.period, "max_price": c.max_price,
         "scheduler": c.scheduler, "demand": c.demand.to_dict(), "supply": c.supply.to_dict()}
    if c.reaction_times:
        d["reaction_times"] = dict(c.reaction_times)
        d["pool_resolution"] = c.pool_resolution
    if c.tick_scale != 1:
        d["tick_scale"] = str(c.tick_scale)
    if c.record_quotes:
        d["record_quotes"] = True
    return d


def preset_to_dict(preset: ExperimentPreset) -> dict:
    """Resolved description of a preset, written next to its results."""
    return {
        "name": preset.name,
        "description": preset.description,
        "trials": preset.trials,
        "seed": preset.seed,
        "allocation": preset.allocation,
        "params": preset.params,
        "logs": preset.logs,
        "points": [{"label": p.label, "buyers": dict(p.buyers), "sellers": dict(p.sellers),
                    "session": _session_to_dict(p.config)} for p in preset.points],
        "comparisons": [[c.point_a, c.strategy_a, c.point_b, c.strategy_b, c.test]
                        for c in preset.comparisons],
    }


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: cannot read ({e.strerror or e})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}") from None


def resolve_experiment(target: str) -> ExperimentPreset:
    """A preset name, or the path of a JSON experiment config."""
    if target in PRESETS:
        return get_preset(target)
    if Path(target).exists():
        return preset_from_dict(load_config(target))
    raise ConfigError(f"{target!r} is neither a preset ({', '.join(list_presets())}) nor a file")
