"""Rendering of metric sets and comparison reports as text, CSV and JSON.

Tables print percentages to two decimals; CSV and JSON keep full
precision.  Undefined values print as ``NA`` in tables and CSV and as
``null`` in JSON.
"""

import csv
import io
import json

from .metrics import MetricSet

NA = "NA"


def to_json(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _pct(v):
    return NA if v is None else f"{100.0 * v:.2f}"


def _num(v):
    return NA if v is None else repr(float(v))


def _csv(rows, header):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _table(header, rows):
    cols = list(zip(header, *rows))
    widths = [max(len(str(c)) for c in col) for col in cols]
    fmt = lambda row: "  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip()
    lines = [fmt(header), fmt(["-" * w for w in widths])]
    lines += [fmt(r) for r in rows]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# MetricSet

def metricset_text(ms: MetricSet, title=None) -> str:
    out = []
    if title:
        out.append(title + "\n")
    out.append(_table(["Metric", "Value (%)"],
                      [["Accuracy", _pct(ms.accuracy)],
                       ["Kappa", _pct(ms.kappa)],
                       ["Kappa band", ms.kappa_band or NA]]))
    out.append("\n")
    out.append(_table(["Class", "Sensitivity (%)", "Specificity (%)"],
                      [[r.name, _pct(r.sensitivity), _pct(r.specificity)]
                       for r in ms.per_class]))
    return "".join(out)


def metricset_csv(ms: MetricSet) -> str:
    rows = [["accuracy", "", _num(ms.accuracy)],
            ["kappa", "", _num(ms.kappa)],
            ["kappa_band", "", ms.kappa_band or NA]]
    for r in ms.per_class:
        rows.append(["sensitivity", r.name, _num(r.sensitivity)])
        rows.append(["specificity", r.name, _num(r.specificity)])
    return _csv(rows, ["metric", "class", "value"])


def render_metricset(ms: MetricSet, fmt: str, title=None) -> str:
    if fmt == "json":
        return to_json(ms.to_dict())
    if fmt == "csv":
        return metricset_csv(ms)
    return metricset_text(ms, title)


# --------------------------------------------------------------------------
# comparison

def accuracy_csv(report) -> str:
    return _csv([[r["model"], _num(r["accuracy"])] for r in report.accuracy_table()],
                ["model", "accuracy"])


def kappa_csv(report) -> str:
    return _csv([[r["model"], _num(r["kappa"]), r["band"] or NA] for r in report.kappa_table()],
                ["model", "kappa", "band"])


def per_class_csv(name, series) -> str:
    return _csv([[name, s["class"], _num(s["sensitivity"]), _num(s["specificity"])]
                 for s in series],
                ["model", "class", "sensitivity", "specificity"])


def loss_trace_csv(trace) -> str:
    return _csv([[i, repr(float(v))] for i, v in enumerate(trace, start=1)], ["epoch", "loss"])


def comparison_text(report) -> str:
    acc = report.accuracy_table()
    kap = report.kappa_table()
    out = ["ACCURACY OF MACHINE LEARNING METHODS\n",
           _table(["Algorithm Name", "Accuracy (%)"], [[r["model"], _pct(r["accuracy"])] for r in acc]),
           "\nKAPPA CO-EFFICIENT FOR MACHINE LEARNING METHODS\n",
           _table(["Algorithm Name", "Kappa (%)", "Band"],
                  [[r["model"], _pct(r["kappa"]), r["band"] or NA] for r in kap])]
    for name, series in report.per_class_series().items():
        out.append(f"\nSensitivity and specificity: {name}\n")
        out.append(_table(["Class", "Sensitivity (%)", "Specificity (%)"],
                          [[s["class"], _pct(s["sensitivity"]), _pct(s["specificity"])]
                           for s in series]))
    return "".join(out)


def comparison_csv(report) -> str:
    kap = {r["model"]: r for r in report.kappa_table()}
    rows = [[r["model"], _num(r["accuracy"]), _num(kap[r["model"]]["kappa"]),
             kap[r["model"]]["band"] or NA]
            for r in report.accuracy_table()]
    return _csv(rows, ["model", "accuracy", "kappa", "kappa_band"])


def render_comparison(report, fmt: str, timing=False) -> str:
    if fmt == "json":
        return to_json(report.to_dict(timing))
    if fmt == "csv":
        return comparison_csv(report)
    return comparison_text(report)
