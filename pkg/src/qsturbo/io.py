"""CSV, plot-data and metadata writers for sweep results.

Numbers are written with ``repr(float)``, the shortest string that parses
back to the same double, so output never depends on the process locale.

Plot data format: one block per curve, gnuplot ``index`` compatible::

    # series: <name>
    # columns: ebno_db value [ci_lo ci_hi]
    <rows, space separated>
    <two blank lines>
"""

import csv
import json
import math

__all__ = [
    "CSV_COLUMNS", "emit_csv", "read_csv", "emit_plotdata", "read_plotdata",
    "emit_metadata", "emit_analytic_csv",
]

CSV_COLUMNS = ["ebno_db", "frames", "frame_errors", "fer_sim", "fer_ci_lo",
               "fer_ci_hi", "fer_analytic", "ber_sim"]


def _num(x):
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def _rows(result):
    for p in result.points:
        lo, hi = p.ci
        yield [p.ebno_db, p.frames, p.frame_errors, p.fer_sim, lo, hi,
               p.fer_analytic, p.ber_sim]


def emit_csv(result, path):
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in _rows(result):
            writer.writerow([_num(v) for v in row])


def read_csv(path):
    """Parse a CSV written by :func:`emit_csv` into a list of dicts.

    Counts come back as ints, the empty analytic column as None.
    """
    out = []
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        for row in reader:
            rec = {}
            for key, text in row.items():
                if text == "":
                    rec[key] = None
                elif key in ("frames", "frame_errors"):
                    rec[key] = int(text)
                else:
                    rec[key] = float(text)
            out.append(rec)
    return out


def emit_analytic_csv(ebno_db, fer, path):
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ebno_db", "fer_analytic"])
        for x, y in zip(ebno_db, fer):
            writer.writerow([_num(x), _num(y)])


def emit_plotdata(results, path):
    """Write one block per curve.

    ``results`` maps a label to a SweepResult (a bare SweepResult is
    labelled ``sim``). Each result contributes ``<label>:fer_sim`` with its
    confidence interval, ``<label>:ber_sim`` and, when available,
    ``<label>:fer_analytic``.
    """
    if not isinstance(results, dict):
        results = {"sim": results}
    lines = []
    for label, res in results.items():
        series = [(f"{label}:fer_sim", "ebno_db value ci_lo ci_hi",
                   [(p.ebno_db, p.fer_sim, *p.ci) for p in res.points]),
                  (f"{label}:ber_sim", "ebno_db value",
                   [(p.ebno_db, p.ber_sim) for p in res.points])]
        if all(p.fer_analytic is not None for p in res.points):
            series.append((f"{label}:fer_analytic", "ebno_db value",
                           [(p.ebno_db, p.fer_analytic) for p in res.points]))
        for name, cols, rows in series:
            lines.append(f"# series: {name}")
            lines.append(f"# columns: {cols}")
            lines.extend(" ".join(_num(v) for v in row) for row in rows)
            lines.extend(["", ""])
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines))


def read_plotdata(path):
    """Inverse of :func:`emit_plotdata`: ``{series: [tuple, ...]}``."""
    series = {}
    current = None
    with open(path, encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# series:"):
                current = line.split(":", 1)[1].strip()
                series[current] = []
            elif line.startswith("#") or not line:
                continue
            else:
                series[current].append(tuple(float(t) for t in line.split()))
    return series


def emit_metadata(result, path, extra=None):
    meta = dict(result.metadata)
    if extra:
        meta.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True,
                  default=lambda o: None if isinstance(o, float) and math.isnan(o) else str(o))
        fh.write("\n")
