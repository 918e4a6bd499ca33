"""Benchmark harness: holdout evaluation against a Naive Bayes reference.

Each dataset is split 2:1 (stratified) unless the suite provides a
``<name>_train`` / ``<name>_test`` pair.  Every roster learner is trained on
the training part only, scored on the test part, and reported as the ratio
of its error to Naive Bayes's error on the same split.  Ratios with a zero
Naive Bayes error are undefined and left out of the suite means.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

from ._rng import derive_seed
from .dataset import Dataset, DatasetError, load, stratified_split
from .learners import L5_DEFAULT_FOLDS, L5_DEFAULT_GRID, LearnerSpec, LearnerSpecError, as_spec, fit_learner
from .select import ParamGrid

NB = "nb"
DEFAULT_ROSTER = ("lb", "l5", "nb")
DATA_SUFFIXES = (".arff", ".csv")
_PAIR_RE = re.compile(r"^(?P<name>.+)[_-](?P<part>train|test)$")


def split_learner_list(text: str) -> list[str]:
    """Split ``"lb,adaboost(I=5,P=90),nb"`` on top-level commas."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    out.append("".join(cur).strip())
    return [s for s in out if s]


def learner_label(spec: LearnerSpec) -> str:
    return spec.name.upper() if not spec.params and spec.name in ("lb", "l5", "nb") else str(spec)


@dataclass(frozen=True)
class RunConfig:
    """Benchmark settings.

    ``datasets`` lists data files; train/test pairs are recognised by their
    ``_train``/``_test`` stem suffix.  ``grid`` and ``folds`` configure the
    tuning of ``l5``; Naive Bayes is always added to the roster.
    """

    datasets: tuple[str, ...]
    split: float = 2.0 / 3.0
    seed: int = 1
    learners: tuple[str, ...] = DEFAULT_ROSTER
    grid: str = L5_DEFAULT_GRID
    folds: int = L5_DEFAULT_FOLDS
    jobs: int = 1

    def __post_init__(self):
        if not self.learners:
            raise ValueError("learner roster is empty")
        if not 0.0 < self.split < 1.0:
            raise ValueError("split must be in (0, 1)")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        ParamGrid.parse(self.grid)
        self.roster()

    @classmethod
    def from_suite(cls, suite: str | Path, **kw) -> "RunConfig":
        files = sorted(str(p) for p in Path(suite).iterdir() if p.suffix.lower() in DATA_SUFFIXES)
        return cls(tuple(files), **kw)

    def roster(self) -> dict[str, LearnerSpec]:
        specs = [as_spec(s) for s in self.learners]
        if not any(s.name == NB for s in specs):
            specs.append(LearnerSpec(NB))
        out: dict[str, LearnerSpec] = {}
        for s in specs:
            label = learner_label(s)
            if label in out:
                raise LearnerSpecError(f"learner {label} listed twice")
            out[label] = s
        return out

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["datasets"] = list(self.datasets)
        d["learners"] = list(self.roster())
        d["roster"] = {label: str(spec) for label, spec in self.roster().items()}
        del d["jobs"]  # execution detail, does not affect results
        return d


@dataclass
class EvalReport:
    name: str
    n_train: int
    n_test: int
    n_features: int
    errors: dict[str, float]
    ratios: dict[str, float | None]
    l5_params: dict[str, int] | None = None


@dataclass
class SuiteReport:
    means: dict[str, float | None]
    undefined: dict[str, int]
    n_datasets: int


@dataclass
class BenchReport:
    config: dict[str, Any]
    datasets: list[EvalReport]
    summary: SuiteReport
    skipped: list[dict[str, str]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "BenchReport":
        return cls(
            config=d["config"],
            datasets=[EvalReport(**r) for r in d["datasets"]],
            summary=SuiteReport(**d["summary"]),
            skipped=list(d["skipped"]),
        )

    def dataset(self, name: str) -> EvalReport:
        for r in self.datasets:
            if r.name == name:
                return r
        raise KeyError(name)


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------


def evaluate_holdout(model, test: Dataset) -> float:
    """Misclassified weight over total weight, using argmax predictions."""
    if len(test) == 0:
        raise DatasetError("empty test set")
    if test.y.min() < 0:
        raise DatasetError("test set has missing class values")
    if hasattr(model, "attributes") and tuple(model.attributes) != test.attributes:
        raise DatasetError("test set schema does not match the model")
    wrong = model.predict(test) != test.y
    return float(test.weights[wrong].sum() / test.weights.sum())


def error_ratio(err_c: float, err_nb: float) -> float | None:
    """``err_c / err_nb``, or None (undefined) when ``err_nb`` is zero."""
    for v in (err_c, err_nb):
        if not 0.0 <= v <= 1.0:
            raise ValueError("error rates must be in [0, 1]")
    if err_nb == 0.0:
        return None
    return err_c / err_nb


def summarize(reports: Sequence[EvalReport], labels: Sequence[str]) -> SuiteReport:
    means, undefined = {}, {}
    for label in labels:
        vals = [r.ratios[label] for r in reports if r.ratios.get(label) is not None]
        undefined[label] = sum(1 for r in reports if label in r.ratios and r.ratios[label] is None)
        means[label] = math.fsum(vals) / len(vals) if vals else None
    return SuiteReport(means, undefined, len(reports))


# ---------------------------------------------------------------------------
# Suite execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Task:
    name: str
    path: str
    test_path: str | None = None


def plan_tasks(paths: Sequence[str]) -> list[_Task]:
    """Group files into datasets, pairing ``x_train``/``x_test`` files."""
    pairs: dict[str, dict[str, str]] = {}
    tasks = []
    for p in paths:
        stem = Path(p).stem
        m = _PAIR_RE.match(stem)
        if m:
            pairs.setdefault(m.group("name"), {})[m.group("part")] = p
        else:
            tasks.append(_Task(stem, p))
    for name, parts in pairs.items():
        if set(parts) == {"train", "test"}:
            tasks.append(_Task(name, parts["train"], parts["test"]))
        else:
            for part, p in parts.items():
                tasks.append(_Task(Path(p).stem, p))
    return sorted(tasks, key=lambda t: t.name)


def _seeded(spec: LearnerSpec, seed: int) -> LearnerSpec:
    if spec.accepts("seed") and spec.get("seed") is None:
        return spec.with_params(seed=seed)
    return spec


def _l5_spec(spec: LearnerSpec, config: RunConfig) -> LearnerSpec:
    grid = ParamGrid.parse(config.grid)
    extra = {name: "|".join(str(v) for v in values) for name, values in grid.axes if spec.get(name) is None}
    if spec.get("folds") is None:
        extra["folds"] = config.folds
    return spec.with_params(**extra)


def evaluate_dataset(train: Dataset, test: Dataset, name: str, config: RunConfig, seed: int) -> EvalReport:
    if not train.same_schema(test):
        raise DatasetError("train and test schemas differ")
    errors: dict[str, float] = {}
    l5_params = None
    for label, spec in config.roster().items():
        spec = _seeded(spec, seed)
        if spec.name == "l5":
            spec = _l5_spec(spec, config)
        model = fit_learner(spec, train)
        errors[label] = evaluate_holdout(model, test)
        if spec.name == "l5" and l5_params is None:
            l5_params = dict(model.tune.chosen)
    err_nb = errors[learner_label(LearnerSpec(NB))]
    ratios = {label: error_ratio(e, err_nb) for label, e in errors.items()}
    return EvalReport(name, len(train), len(test), train.n_features, errors, ratios, l5_params)


def _run_task(task: _Task, config: RunConfig) -> EvalReport | dict[str, str]:
    seed = derive_seed(config.seed, task.name)
    try:
        if task.test_path is None:
            train, test = stratified_split(load(task.path), config.split, seed)
        else:
            train, test = load(task.path), load(task.test_path)
        _check_usable(train, test)
        return evaluate_dataset(train, test, task.name, config, seed)
    except (DatasetError, OSError, UnicodeDecodeError) as exc:
        return {"path": task.path, "name": task.name, "error": f"{type(exc).__name__}: {exc}"}


def _check_usable(train: Dataset, test: Dataset):
    if len(train) == 0 or len(test) == 0:
        raise DatasetError("split leaves an empty training or test part")


def run_suite(config: RunConfig) -> BenchReport:
    """Evaluate every roster learner on every dataset of ``config``.

    Each dataset draws its randomness from ``(config.seed, dataset name)``,
    so results do not depend on ``config.jobs`` or on the other datasets.
    Unreadable or invalid files are skipped and listed with a diagnostic.
    """
    if not config.datasets:
        raise ValueError("no dataset files given")
    tasks = plan_tasks(config.datasets)
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(config.jobs, len(tasks))) as pool:
            results = list(pool.map(_run_task, tasks, [config] * len(tasks)))
    else:
        results = [_run_task(t, config) for t in tasks]
    reports = sorted((r for r in results if isinstance(r, EvalReport)), key=lambda r: r.name)
    skipped = sorted((r for r in results if isinstance(r, dict)), key=lambda r: r["name"])
    labels = list(config.roster())
    return BenchReport(config.to_dict(), reports, summarize(reports, labels), skipped)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

FORMATS = ("json", "markdown", "csv")


def _fmt(v: float | None, digits: int = 2) -> str:
    return "N/A" if v is None else f"{v:.{digits}f}"


def _labels(report: BenchReport) -> list[str]:
    if report.config.get("learners"):
        return list(report.config["learners"])
    return list(report.summary.means)


def _markdown(report: BenchReport) -> str:
    labels = _labels(report)
    has_l5 = any(r.l5_params for r in report.datasets)
    head = ["Name", "No. of training/testing", "No. features"] + [f"{lb} ratio (error)" for lb in labels]
    if has_l5:
        head.append("L5 chosen P, I")
    lines = ["## Holdout results", "", "| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for r in report.datasets:
        row = [r.name, f"{r.n_train}/{r.n_test}", str(r.n_features)]
        row += [f"{_fmt(r.ratios[lb])} ({_fmt(r.errors[lb])})" for lb in labels]
        if has_l5:
            row.append(", ".join(f"{k}={v}" for k, v in (r.l5_params or {}).items()) or "")
        lines.append("| " + " | ".join(row) + " |")
    lines += ["", "## Mean errorC/errorNB", "", "| Suite | " + " | ".join(labels) + " |", "|" + "---|" * (len(labels) + 1)]
    lines.append("| this run | " + " | ".join(_fmt(report.summary.means.get(lb)) for lb in labels) + " |")
    excluded = {lb: n for lb, n in report.summary.undefined.items() if n}
    lines.append("")
    lines.append(f"Datasets: {report.summary.n_datasets}.")
    if excluded:
        lines.append("Undefined ratios (zero NB error) excluded: "
                     + ", ".join(f"{lb} {n}" for lb, n in excluded.items()) + ".")
    if report.skipped:
        lines += ["", "## Skipped", ""] + [f"- {s['path']}: {s['error']}" for s in report.skipped]
    return "\n".join(lines) + "\n"


def _csv(report: BenchReport) -> str:
    labels = _labels(report)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["name", "n_train", "n_test", "n_features"]
    for lb in labels:
        header += [f"error_{lb}", f"ratio_{lb}"]
    header += ["l5_P", "l5_I"]
    w.writerow(header)
    for r in report.datasets:
        row: list[Any] = [r.name, r.n_train, r.n_test, r.n_features]
        for lb in labels:
            ratio = r.ratios[lb]
            row += [repr(r.errors[lb]), "UNDEFINED" if ratio is None else repr(ratio)]
        p = r.l5_params or {}
        row += [p.get("P", ""), p.get("I", "")]
        w.writerow(row)
    return buf.getvalue()


def emit_report(report: BenchReport, fmt: str = "json") -> str:
    """Render ``report`` as JSON (canonical), markdown tables or flat CSV."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if fmt == "markdown":
        return _markdown(report)
    if fmt == "csv":
        return _csv(report)
    raise ValueError(f"unknown report format {fmt!r}; expected one of {', '.join(FORMATS)}")


def parse_report(text: str) -> BenchReport:
    return BenchReport.from_dict(json.loads(text))
