"""(n, c)-grid sweeps of the window-cutoff bounds and limit checks for the
two-level family, with CSV/JSON report emission."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .exceptions import CutoffLabError, IoFailure, ToleranceNotMet
from .families import BetaSchedule, Lemma31Family, ParametricFamily, parse_descriptor

__all__ = [
    "CSV_COLUMNS",
    "OffsetRule",
    "Tolerances",
    "SweepSpec",
    "SweepRow",
    "LimitRow",
    "LimitReport",
    "sweep",
    "sweep_spec_from_json",
    "limit_check",
    "emit_report",
    "thread_count",
]

CSV_COLUMNS = (
    "family", "n", "c", "offset_rule", "t_eval", "log_d_lo", "log_d_hi",
    "reference", "assertion", "pass", "slack",
)


def thread_count() -> int:
    """Worker cap from ``CUTOFF_LAB_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("CUTOFF_LAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class OffsetRule:
    """Where to evaluate ``d_n`` for a given ``c``.

    ``left``: ``t + c w``; ``right``: ``t + r + c w``; ``shifted``:
    ``t + theta r + c w`` with ``theta = 1 - beta_n`` when not given;
    ``custom``: ``func(params, n, c)``.
    """

    kind: str = "left"
    theta: Optional[float] = None
    func: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("left", "right", "shifted", "custom"):
            raise ValueError(f"unknown offset rule {self.kind!r}")
        if self.kind == "custom" and self.func is None:
            raise ValueError("custom offset rule needs func")

    @property
    def label(self) -> str:
        if self.kind == "shifted" and self.theta is not None:
            return f"shifted:{self.theta:g}"
        return self.kind

    def time(self, family: ParametricFamily, n: int, c: float) -> float:
        if self.kind == "custom":
            return float(self.func(family.params(n), n, c))
        if self.kind == "left":
            t, _ = family.location(n)
            return t + c * family.width(n)
        p = family.params(n)
        if self.kind == "right":
            return p.right_time(c)
        theta = self.theta
        if theta is None:
            if not isinstance(family, Lemma31Family):
                raise CutoffLabError("shifted offset without theta needs a lemma31 family")
            theta = 1.0 - family.beta(n)
        return p.t + theta * p.r + c * p.w


@dataclass(frozen=True)
class Tolerances:
    exact: float = 1e-9
    limit: float = 0.02
    separation: float = 0.1


@dataclass(frozen=True)
class SweepSpec:
    family: ParametricFamily
    n_grid: Tuple[int, ...]
    c_grid: Tuple[float, ...]
    offset_rule: OffsetRule = OffsetRule("left")
    tolerance: Tolerances = Tolerances()

    def __post_init__(self):
        n_grid = tuple(int(n) for n in self.n_grid)
        c_grid = tuple(float(c) for c in self.c_grid)
        if not n_grid or not c_grid:
            raise ValueError("grids must be nonempty")
        if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
            raise ValueError("n_grid must be increasing")
        object.__setattr__(self, "n_grid", n_grid)
        object.__setattr__(self, "c_grid", c_grid)


@dataclass(frozen=True)
class SweepRow:
    family: str
    n: int
    c: float
    offset_rule: str
    t_eval: float
    log_d_lo: float
    log_d_hi: float
    reference: float
    assertion: str
    passed: bool
    slack: float
    target: Optional[float] = None
    error: Optional[str] = None


def _row(spec: SweepSpec, n: int, c: float) -> SweepRow:
    fam, rule = spec.family, spec.offset_rule
    base = dict(family=fam.label, n=n, c=c, offset_rule=rule.label)
    nan = math.nan
    try:
        t_eval = rule.time(fam, n, c)
        if not t_eval > 0:
            raise CutoffLabError(f"evaluation time {t_eval!r} is not positive")
        d = fam.log_distance(n, t_eval)
        target = None
        if rule.kind == "left" and c < 0:
            ref = -c
            slack = d.log_lo - ref
            ok = slack >= -spec.tolerance.exact
            assertion = f"log_d_lo >= -c - {spec.tolerance.exact:g}"
        elif rule.kind == "right" and c > 0:
            ref = fam.upper_certificate(n, c)
            slack = d.log_hi - ref
            ok = slack <= 0.0
            assertion = "log_d_hi <= log_upper_certificate"
            target = -c
        elif rule.kind == "shifted" and rule.theta is None:
            gamma = fam.beta.gamma_at(n)
            ref = -c + math.log1p(math.exp(-gamma))
            slack = d.log_mid - ref
            ok = True
            assertion = "record: limit target log(e^-c (1 + e^-gamma))"
            target = ref
        else:
            ref = -c
            slack = d.log_mid - ref
            ok = True
            assertion = "record"
        return SweepRow(t_eval=t_eval, log_d_lo=d.log_lo, log_d_hi=d.log_hi, reference=ref,
                        assertion=assertion, passed=bool(ok), slack=slack, target=target, **base)
    except CutoffLabError as exc:
        return SweepRow(t_eval=nan, log_d_lo=nan, log_d_hi=nan, reference=nan,
                        assertion="error", passed=False, slack=nan, error=str(exc), **base)


def sweep(spec: SweepSpec, threads: Optional[int] = None) -> List[SweepRow]:
    """Evaluate every ``(n, c)`` of the grid.

    Left rows with ``c < 0`` assert ``log d >= -c`` up to the exact
    tolerance; right rows with ``c > 0`` assert ``log d <= log certificate``
    with no tolerance.  Other rows are recorded without assertion.
    """
    cells = [(n, c) for n in spec.n_grid for c in spec.c_grid]
    workers = threads or thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda nc: _row(spec, *nc), cells))
    else:
        rows = [_row(spec, n, c) for n, c in cells]
    return sorted(rows, key=lambda r: (r.n, r.c))


def _offset_from_json(obj) -> OffsetRule:
    if obj is None:
        return OffsetRule("left")
    if isinstance(obj, str):
        kind, _, theta = obj.partition(":")
        return OffsetRule(kind, float(theta) if theta else None)
    return OffsetRule(obj["kind"], obj.get("theta"))


def sweep_spec_from_json(obj) -> SweepSpec:
    """``{"family": descriptor, "n_grid": [..], "c_grid": [..],
    "offset_rule": "left" | "right" | "shifted" | "shifted:0.5",
    "tolerance": {"exact": .., "limit": ..}}``."""
    tol = obj.get("tolerance") or {}
    return SweepSpec(
        family=parse_descriptor(obj["family"]),
        n_grid=tuple(obj["n_grid"]),
        c_grid=tuple(obj["c_grid"]),
        offset_rule=_offset_from_json(obj.get("offset_rule")),
        tolerance=Tolerances(**tol),
    )


# --- limit checks ----------------------------------------------------------


@dataclass(frozen=True)
class LimitRow:
    n: int
    c: float
    t_eval: float
    log_d_lo: float
    log_d_hi: float
    target: float
    error: float


@dataclass
class LimitReport:
    schedule: str
    tol: float
    rows: List[LimitRow]
    ok: bool
    monotone: Dict[float, bool] = field(default_factory=dict)
    final_error: Dict[float, float] = field(default_factory=dict)
    separation: Dict[float, float] = field(default_factory=dict)
    worst: Optional[LimitRow] = None

    def summary(self) -> str:
        lines = [f"limit check {self.schedule}: {'PASS' if self.ok else 'FAIL'} (tol {self.tol:g})"]
        for c, err in self.final_error.items():
            lines.append(f"  c={c:g}: final |error| = {err:.4g}, nonincreasing = {self.monotone[c]}")
        for c, sep in self.separation.items():
            lines.append(f"  c={c:g}: even/odd separation = {sep:.4g}")
        return "\n".join(lines)


def _conservative_error(lo: float, hi: float, target: float) -> float:
    return max(abs(lo - target), abs(hi - target))


def _parity_pair(n: int) -> Tuple[int, int]:
    return (n, n + 1) if n % 2 == 0 else (n + 1, n)


def _limit_row(fam: Lemma31Family, n: int, c: float, shifted: bool) -> LimitRow:
    p = fam.params(n)
    gamma = fam.beta.gamma_at(n)
    if shifted:
        t_eval = p.t + (1.0 - fam.beta(n)) * p.r + c * p.w
        target = -c + math.log1p(math.exp(-gamma))
    else:
        t_eval = p.t + c * p.w
        target = -c + math.log1p(math.exp(gamma))
    d = fam.log_distance(n, t_eval)
    return LimitRow(n, c, t_eval, d.log_lo, d.log_hi, target,
                    _conservative_error(d.log_lo, d.log_hi, target))


def limit_check(
    beta: BetaSchedule,
    c_grid: Sequence[float],
    n_grid: Sequence[int],
    tol: float = 0.02,
    separation: float = 0.1,
    raise_on_failure: bool = True,
) -> LimitReport:
    """Check the two-level family's limit profile along ``n_grid``.

    Evaluates at ``t_n + (1 - beta_n) r_n + c w_n`` against
    ``log(e^-c (1 + e^-gamma))``; the check passes when the error at the
    largest ``n`` is within ``tol``.  Parity-dependent schedules are
    evaluated at both parities around each grid point.  For the oscillating
    schedule the check is instead that the even and odd subsequences at
    ``t_n + c w_n`` stay at least ``separation`` apart.
    """
    fam = Lemma31Family(beta)
    n_grid = [int(n) for n in n_grid]
    c_grid = [float(c) for c in c_grid]
    rows: List[LimitRow] = []
    report = LimitReport(beta.label, tol, rows, ok=True)
    if beta.kind == "oscillating":
        for c in c_grid:
            pairs = []
            for n in n_grid:
                even, odd = (_limit_row(fam, k, c, shifted=False) for k in _parity_pair(n))
                rows.extend([even, odd])
                pairs.append((even, odd))
            even, odd = pairs[-1]
            # conservative: smallest gap between the two enclosures
            sep = max(even.log_d_lo - odd.log_d_hi, odd.log_d_lo - even.log_d_hi)
            report.separation[c] = sep
            report.final_error[c] = max(even.error, odd.error)
            errs = [max(e.error, o.error) for e, o in pairs]
            report.monotone[c] = all(b <= a for a, b in zip(errs, errs[1:]))
            if sep < separation:
                report.ok = False
                report.worst = even
    else:
        ns = [k for n in n_grid for k in (_parity_pair(n) if beta.parity_dependent else (n,))]
        for c in c_grid:
            crow = [_limit_row(fam, n, c, shifted=True) for n in ns]
            rows.extend(crow)
            if beta.parity_dependent:
                finals = crow[-2:]
                for parity in (0, 1):
                    errs = [r.error for r in crow if r.n % 2 == parity]
                    report.monotone[c] = report.monotone.get(c, True) and all(
                        b <= a for a, b in zip(errs, errs[1:]))
            else:
                finals = crow[-1:]
                errs = [r.error for r in crow]
                report.monotone[c] = all(b <= a for a, b in zip(errs, errs[1:]))
            worst = max(finals, key=lambda r: r.error)
            report.final_error[c] = worst.error
            if worst.error > tol:
                report.ok = False
                if report.worst is None or worst.error > report.worst.error:
                    report.worst = worst
    if not report.ok and raise_on_failure:
        raise ToleranceNotMet(report.summary(), worst=report.worst)
    return report


# --- reports ---------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        # shortest round-trip form, so narrow enclosures keep lo != hi
        return repr(x)
    return str(x)


def _csv_text(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([_fmt(v) for v in (
            r.family, r.n, r.c, r.offset_rule, r.t_eval, r.log_d_lo, r.log_d_hi,
            r.reference, r.assertion, r.passed, r.slack)])
    return buf.getvalue()


def _json_text(rows: Sequence[SweepRow]) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return None
        return v

    payload = [{k: clean(v) for k, v in asdict(r).items()} for r in rows]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", text)


def emit_report(rows: Sequence[SweepRow], fmt: str, path) -> List[Path]:
    """Write rows as CSV or JSON, one file per (family, offset_rule).

    A single group goes to ``path`` when it has a suffix; otherwise ``path``
    is a directory receiving ``<family>__<offset_rule>.<fmt>`` files.
    """
    if not rows:
        raise ValueError("no rows to write")
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    groups: Dict[Tuple[str, str], List[SweepRow]] = {}
    for r in sorted(rows, key=lambda r: (r.family, r.offset_rule, r.n, r.c)):
        groups.setdefault((r.family, r.offset_rule), []).append(r)
    path = Path(path)
    render = _csv_text if fmt == "csv" else _json_text
    written = []
    try:
        if len(groups) == 1 and path.suffix and not path.is_dir():
            targets = {next(iter(groups)): path}
        else:
            path.mkdir(parents=True, exist_ok=True)
            targets = {key: path / f"{_slug(key[0])}__{_slug(key[1])}.{fmt}" for key in groups}
        for key, target in targets.items():
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(render(groups[key]))
            written.append(target)
    except OSError as exc:
        raise IoFailure(f"cannot write report to {path}: {exc}") from exc
    return written
