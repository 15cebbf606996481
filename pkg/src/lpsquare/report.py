"""Deterministic report writers: JSON (versioned schema), CSV tables, SVG figures.

Every number in a check's ``metrics`` is emitted as ``{"value", "uncertainty"}``;
non-finite floats become the strings ``"nan"``, ``"inf"``, ``"-inf"``.  No
timestamps or host data are written, so identical inputs give identical bytes.
"""

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

SCHEMA = "lpsquare.report/1"


def _scalar(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def measured(value, uncertainty=0.0):
    """A number together with its uncertainty."""
    return {"value": _scalar(value), "uncertainty": _scalar(uncertainty)}


def _is_measured(obj):
    return isinstance(obj, dict) and set(obj) == {"value", "uncertainty"}


def wrap_numbers(obj):
    """Recursively replace bare numbers by ``measured(x, 0)``."""
    if _is_measured(obj):
        return {k: _scalar(v) if not isinstance(v, str) else v for k, v in obj.items()}
    if isinstance(obj, dict):
        return {str(k): wrap_numbers(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [wrap_numbers(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [wrap_numbers(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, float, np.integer, np.floating)):
        return measured(obj)
    return obj


def plain(obj):
    """JSON-safe copy without wrapping (for parameter echoes)."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [plain(v) for v in (obj.tolist() if isinstance(obj, np.ndarray) else obj)]
    if isinstance(obj, (bool, np.bool_, int, float, np.integer, np.floating)):
        return _scalar(obj)
    return obj


@dataclass
class CheckResult:
    """Outcome of one job.  ``tables`` maps name -> (header, rows); ``figures``
    maps name -> dict(x, y, fit, xlabel, ylabel, title)."""

    job_id: str
    suite: str
    name: str
    verdict: str
    metrics: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    figures: dict = field(default_factory=dict)

    def as_dict(self):
        return {"id": self.job_id, "suite": self.suite, "name": self.name, "verdict": self.verdict,
                "metrics": wrap_numbers(self.metrics), "notes": [str(n) for n in self.notes],
                "tables": sorted(self.tables), "figures": sorted(self.figures)}


def build_report(config, checks, version, verdict, watermark=""):
    body = {
        "schema": SCHEMA,
        "version": version,
        "config": plain(config),
        "verdict": verdict,
        "checks": [c.as_dict() for c in sorted(checks, key=lambda c: c.job_id)],
    }
    if watermark:
        body["watermark"] = watermark
    return body


def dumps(report):
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, report):
    with open(path, "w", newline="\n") as fh:
        fh.write(dumps(report))
    return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(csv_text(header, rows))
    return path


def write_loglog_svg(path, x, y, fit=None, xlabel="distance", ylabel="value", title=""):
    """Static log-log plot of samples with an optional fitted line."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "lpsquare", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(4.5, 3.5))
        ax.loglog(x, y, "o", ms=4, label="samples")
        if fit is not None:
            ax.loglog(x, fit, "-", lw=1, label="fit")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title, fontsize=9)
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)
    return path


def write_outputs(out_dir, report, checks):
    """report.json, tables/<id>-<name>.csv, figures/<id>-<name>.svg."""
    os.makedirs(os.path.join(out_dir, "tables"), exist_ok=True)
    os.makedirs(os.path.join(out_dir, "figures"), exist_ok=True)
    for c in sorted(checks, key=lambda c: c.job_id):
        for name, (header, rows) in sorted(c.tables.items()):
            write_csv(os.path.join(out_dir, "tables", f"{c.job_id}-{name}.csv"), header, rows)
        for name, fig in sorted(c.figures.items()):
            write_loglog_svg(os.path.join(out_dir, "figures", f"{c.job_id}-{name}.svg"), **fig)
    return write_json(os.path.join(out_dir, "report.json"), report)
