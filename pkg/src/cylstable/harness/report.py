"""Report objects and their on-disk forms (CSV tables, JSON, text summary, SVG fits)."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
from dataclasses import dataclass, field

import numpy as np

from ..fitting import ScalingFit

__all__ = ["COLUMNS", "Verdict", "Report", "CheckResult", "fmt", "write_report", "fit_svg",
           "versions"]

COLUMNS = ("experiment", "preset", "alpha", "record", "name", "t", "index", "value", "stderr",
           "intercept", "residual_rms", "threshold", "passed")


def fmt(v) -> str:
    """Deterministic text for one CSV cell."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


@dataclass
class Verdict:
    """One pass/fail decision, tied to an acceptance criterion.

    ``raw`` holds the numbers the decision was derived from.
    """

    criterion: int
    name: str
    passed: bool
    value: float
    threshold: float
    relation: str
    raw: dict = field(default_factory=dict)
    alpha: str = "all"

    def as_dict(self) -> dict:
        return _plain({"criterion": self.criterion, "name": self.name, "passed": self.passed,
                       "value": self.value, "threshold": self.threshold,
                       "relation": self.relation, "alpha": self.alpha, "raw": self.raw})


@dataclass
class CheckResult:
    """Rows, fits and verdicts produced by one check."""

    experiment: str
    preset: str
    rows: list = field(default_factory=list)
    fits: list = field(default_factory=list)       # (name, alpha, ScalingFit)
    verdicts: list = field(default_factory=list)

    def row(self, alpha, record, name, *, t=None, index=None, value=None, stderr=None,
            intercept=None, residual_rms=None, threshold=None, passed=None):
        self.rows.append({
            "experiment": self.experiment, "preset": self.preset, "alpha": _alpha_key(alpha),
            "record": record, "name": name, "t": t, "index": index, "value": value,
            "stderr": stderr, "intercept": intercept, "residual_rms": residual_rms,
            "threshold": threshold, "passed": passed,
        })

    def metric(self, alpha, name, value, *, t=None, index=None, stderr=None):
        self.row(alpha, "metric", name, t=t, index=index, value=value, stderr=stderr)

    def observation(self, alpha, name, value, *, t=None, index=None):
        self.row(alpha, "observation", name, t=t, index=index, value=value)

    def fit(self, alpha, name, f: ScalingFit):
        self.fits.append((name, _alpha_key(alpha), f))
        self.row(alpha, "fit", name, value=f.slope, stderr=f.ci_half_width,
                 intercept=f.intercept, residual_rms=f.residual_rms)

    def verdict(self, criterion, name, passed, value, threshold, relation, alpha="all", **raw):
        v = Verdict(criterion, name, bool(passed), float(value), float(threshold), relation,
                    raw, _alpha_key(alpha))
        self.verdicts.append(v)
        self.row(alpha, "verdict", name, value=value, threshold=threshold, passed=bool(passed),
                 index=criterion)
        return v


def _alpha_key(alpha) -> str:
    if isinstance(alpha, str):
        return alpha
    return f"{float(alpha):g}"


def versions() -> dict:
    import scipy

    from .. import __version__, _backend
    return {"cylstable": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version(), "backend": _backend.NAME}


@dataclass
class Report:
    """Machine-readable outcome of a run.

    ``timing`` (wall-clock seconds per check, runtime verdicts) is kept apart
    so that everything else is reproducible byte for byte.
    """

    command: str
    config: dict
    checks: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    runtime_verdicts: list = field(default_factory=list)

    @property
    def verdicts(self) -> list:
        return [v for c in self.checks for v in c.verdicts]

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts) and all(v.passed for v in self.runtime_verdicts)

    def by_criterion(self) -> dict:
        out = {}
        for v in self.verdicts + self.runtime_verdicts:
            out.setdefault(v.criterion, []).append(v)
        return dict(sorted(out.items()))

    def as_dict(self) -> dict:
        return _plain({
            "command": self.command,
            "config": self.config,
            "versions": versions(),
            "verdicts": [v.as_dict() for v in self.verdicts],
            "fits": [{"experiment": c.experiment, "preset": c.preset, "name": n, "alpha": a,
                      **f.as_dict()} for c in self.checks for (n, a, f) in c.fits],
            "passed": all(v.passed for v in self.verdicts),
        })

    def tables(self) -> dict:
        """Rows grouped by output file stem ``{experiment}-{preset}-{alpha}``."""
        out = {}
        for c in self.checks:
            for r in c.rows:
                stem = f"{r['experiment']}-{r['preset']}-{r['alpha']}"
                out.setdefault(stem, []).append(r)
        return out

    def summary(self) -> str:
        lines = [f"cylstable {self.command}"]
        for crit, vs in self.by_criterion().items():
            ok = all(v.passed for v in vs)
            lines.append(f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'}")
            for v in vs:
                lines.append(f"    [{'ok' if v.passed else '!!'}] {v.name} (alpha={v.alpha}): "
                             f"{v.value:.6g} {v.relation} {v.threshold:.6g}")
        if not self.by_criterion():
            lines.append("no verdicts")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([fmt(r[c]) for c in COLUMNS])
    return buf.getvalue()


def write_report(report: Report, out_dir, fmt_: str = "csv", charts: bool = True) -> list:
    """Write tables, report.json, summary.txt, timing.json and optional SVG charts."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for stem, rows in sorted(report.tables().items()):
        if fmt_ == "csv":
            path = os.path.join(out_dir, stem + ".csv")
            text = _csv_text(rows)
        else:
            path = os.path.join(out_dir, stem + ".json")
            text = json.dumps([{c: _plain(r[c]) for c in COLUMNS} for r in rows], indent=1) + "\n"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)
    path = os.path.join(out_dir, "report.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.as_dict(), fh, indent=1, sort_keys=False)
        fh.write("\n")
    written.append(path)
    path = os.path.join(out_dir, "summary.txt")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.summary())
    written.append(path)
    path = os.path.join(out_dir, "timing.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_plain({"seconds": report.timing,
                          "verdicts": [v.as_dict() for v in report.runtime_verdicts]}),
                  fh, indent=1)
        fh.write("\n")
    written.append(path)
    if charts:
        cdir = os.path.join(out_dir, "charts")
        for c in report.checks:
            for name, alpha, f in c.fits:
                os.makedirs(cdir, exist_ok=True)
                safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)
                path = os.path.join(cdir, f"{c.experiment}-{c.preset}-{alpha}-{safe}.svg")
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(fit_svg(f, title=f"{c.experiment} {name} (alpha={alpha})"))
                written.append(path)
    return written


def fit_svg(f: ScalingFit, title: str = "", width: int = 480, height: int = 320) -> str:
    """Static log-log chart of the fitted points and the fitted line."""
    lx = np.log10(np.asarray(f.x))
    ly = np.log10(np.asarray(f.y))
    fit_y = (f.intercept + f.slope * np.log(np.asarray(f.x))) / math.log(10)
    lo_x, hi_x = float(lx.min()), float(lx.max())
    lo_y = float(min(ly.min(), fit_y.min()))
    hi_y = float(max(ly.max(), fit_y.max()))
    if hi_x == lo_x:
        hi_x = lo_x + 1
    if hi_y == lo_y:
        hi_y = lo_y + 1
    m = 48

    def px(v):
        return m + (v - lo_x) / (hi_x - lo_x) * (width - 2 * m)

    def py(v):
        return height - m - (v - lo_y) / (hi_y - lo_y) * (height - 2 * m)

    pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(lx, fit_y))
    dots = "\n".join(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" fill="#1f4e79"/>'
                     for a, b in zip(lx, ly))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect width="100%" height="100%" fill="white"/>\n'
        f'<text x="{m}" y="24" font-family="sans-serif" font-size="13">{title}</text>\n'
        f'<line x1="{m}" y1="{height - m}" x2="{width - m}" y2="{height - m}" stroke="black"/>\n'
        f'<line x1="{m}" y1="{m}" x2="{m}" y2="{height - m}" stroke="black"/>\n'
        f'<text x="{m}" y="{height - m + 18}" font-family="sans-serif" font-size="11">'
        f'log10 x: {lo_x:.2f} .. {hi_x:.2f}</text>\n'
        f'<text x="{m + 4}" y="{m - 6}" font-family="sans-serif" font-size="11">'
        f'log10 y: {lo_y:.2f} .. {hi_y:.2f}; slope {f.slope:.3f}</text>\n'
        f'<polyline points="{pts}" fill="none" stroke="#c0392b" stroke-width="1.5"/>\n'
        f"{dots}\n</svg>\n"
    )
