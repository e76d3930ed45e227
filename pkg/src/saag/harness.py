"""Per-epoch evaluation records and machine-readable trace output.

Each completed epoch contributes one trace point holding the six criteria the
benchmark plots are built from: objective, suboptimality, test accuracy, and
the cumulative wall seconds / gradient evaluations / epochs they are plotted
against. Metric evaluation itself is excluded from both the wall clock and
the gradient counters.
"""

import csv
from dataclasses import dataclass, field

from .objective import accuracy, objective_value

SUBOPT_FLOOR = 1e-16

CSV_FIELDS = ("solver", "seed", "epoch", "wall_seconds", "grads_over_n",
              "objective", "suboptimality", "test_accuracy")

_REAL_FIELDS = ("wall_seconds", "grads_over_n", "objective", "suboptimality",
                "test_accuracy")


@dataclass
class TracePoint:
    epoch: int
    wall_seconds: float
    grads_over_n: float
    fevals: int
    objective: float
    suboptimality: float
    test_accuracy: float


@dataclass(eq=False)
class Trace:
    """One solver run: per-epoch points, config echo, optional failure marker."""

    solver: str
    seed: int
    points: list
    config: dict = field(default_factory=dict)
    failure: str | None = None
    extra: dict = field(default_factory=dict)


def record_epoch(trace, state, spec, test=None):
    """Append one trace point for the current state.

    Computing the metrics pauses the (caller-maintained) work clock and adds
    nothing to the gradient counters; suboptimality stays unset until the
    best objective value is known.
    """
    obj = objective_value(spec, state.w)
    acc = accuracy(state.w, test) if test is not None else float("nan")
    trace.points.append(TracePoint(
        epoch=state.epoch,
        wall_seconds=state.work_seconds,
        grads_over_n=state.counters.grads / spec.data.n,
        fevals=state.counters.fevals,
        objective=obj,
        suboptimality=float("nan"),
        test_accuracy=acc,
    ))
    return trace


def finalize_suboptimality(traces, reference_value=None):
    """Set suboptimality = objective - F* on every point and return F*.

    F* is the best (lowest) objective over all traces, and over the reference
    value when one is given. A floor of 1e-16 keeps the values positive for
    log-scale plotting.
    """
    if not traces:
        raise ValueError("no traces to finalize")
    best = min(p.objective for t in traces for p in t.points)
    if reference_value is not None:
        best = min(best, reference_value)
    for t in traces:
        for p in t.points:
            p.suboptimality = max(p.objective - best, SUBOPT_FLOOR)
    return best


def _fmt(value):
    return f"{float(value):.17g}"


def emit_csv(traces, path, metadata=(), extra_fields=()):
    """Write traces as one CSV with the fixed header and 17-significant-digit
    reals (exact float round trip).

    Rows are ordered by (solver, seed, epoch). ``metadata`` lines are written
    first, prefixed with '# '. ``extra_fields`` (e.g. a sweep axis) insert
    extra columns after the seed column, with values taken from each trace's
    ``extra`` dict.
    """
    if not traces:
        raise ValueError("no traces to emit")
    header = list(CSV_FIELDS[:2]) + list(extra_fields) + list(CSV_FIELDS[2:])
    ordered = sorted(traces, key=lambda t: (t.solver, t.seed))
    with open(path, "w", newline="") as fh:
        for line in metadata:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for t in ordered:
            extras = [t.extra.get(name, "") for name in extra_fields]
            for p in sorted(t.points, key=lambda q: q.epoch):
                writer.writerow(
                    [t.solver, t.seed] + extras +
                    [p.epoch, _fmt(p.wall_seconds), _fmt(p.grads_over_n),
                     _fmt(p.objective), _fmt(p.suboptimality),
                     _fmt(p.test_accuracy)])


def read_csv(path):
    """Read an emitted CSV back; returns (rows as dicts, metadata lines)."""
    metadata = []
    rows = []
    with open(path) as fh:
        data_lines = []
        for line in fh:
            if line.startswith("#"):
                metadata.append(line[1:].strip())
            else:
                data_lines.append(line)
        reader = csv.DictReader(data_lines)
        for raw in reader:
            row = dict(raw)
            row["seed"] = int(row["seed"])
            row["epoch"] = int(row["epoch"])
            for name in _REAL_FIELDS:
                row[name] = float(row[name])
            rows.append(row)
    return rows, metadata
