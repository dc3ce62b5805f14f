"""SVG plots read back from sweep CSV files (never recomputed)."""
from __future__ import annotations

import csv
from collections import OrderedDict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
from matplotlib.figure import Figure  # noqa: E402

from .analysis import PairClass, classify_pair_2q  # noqa: E402
from .core import RegisterLabel, pair_delta  # noqa: E402

__all__ = ["read_csv", "emit_plot", "LINE_STYLES"]

# solid: single-qubit class, dashed: minus parity, dotted: plus parity
LINE_STYLES = {
    PairClass.SINGLE: "-",
    PairClass.SINGLET: "--",
    PairClass.GHZ: ":",
    None: "-",
}

_LABELS = {
    "re_neg_log_gamma": r"$-\log|\gamma|$",
    "im_neg_log_gamma": r"$\mathrm{Im}(-\log\gamma)$",
}


def read_csv(path: str | Path) -> tuple[list[str], list[list[float]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty CSV") from None
        rows = []
        for no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}: line {no} has {len(row)} fields, expected {len(header)}")
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                raise ValueError(f"{path}: line {no} is not numeric") from None
    return header, rows


def _pair_class(tag: str):
    try:
        a, b = (RegisterLabel.parse(x) for x in tag.split("/"))
    except ValueError:
        return None
    if a.L != 2:
        return None
    return classify_pair_2q(pair_delta(a, b))


def emit_plot(csv_path: str | Path, out_path: str | Path, include_imaginary: bool = False) -> Path:
    """One panel per plotted quantity, one curve per pair, styled by pair class.

    Columns not of the ``pair:quantity`` form are drawn as plain curves in a
    panel of their own name.
    """
    header, rows = read_csv(csv_path)
    if not header:
        raise ValueError(f"{csv_path}: missing header")
    xname = header[0]
    xs = [r[0] for r in rows]
    panels: "OrderedDict[str, list[tuple[str, int]]]" = OrderedDict()
    for j, name in enumerate(header[1:], start=1):
        tag, _, qty = name.rpartition(":")
        if not tag:
            tag, qty = name, name
        if qty == "im_neg_log_gamma" and not include_imaginary:
            continue
        panels.setdefault(qty, []).append((tag, j))

    n = max(1, len(panels))
    fig = Figure(figsize=(6.0, 2.6 * n))
    axes = fig.subplots(n, 1, squeeze=False, sharex=True)[:, 0]
    for ax, (qty, curves) in zip(axes, panels.items()):
        for tag, j in curves:
            style = LINE_STYLES.get(_pair_class(tag), "-")
            ax.plot(xs, [r[j] for r in rows], linestyle=style, color="k", label=tag)
        ax.set_ylabel(_LABELS.get(qty, qty.replace("neg_log_B", r"$-\log B$")))
        if len(curves) > 1:
            ax.legend(fontsize="small", frameon=False)
    axes[-1].set_xlabel({"t": r"$\Lambda t$", "alpha": r"$\alpha/\Lambda$"}.get(xname, xname))
    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": "spinreg"}):
        fig.savefig(out_path, format="svg", metadata={"Date": None})
    return out_path
