"""Output serialization: deterministic JSON, delimited CSV, and figures.

Identical configs must produce byte-identical reports, so JSON is emitted
by a small writer with sorted keys and every float printed with 17
significant digits; no timestamps are ever written. Matrices are embedded
row-major with explicit shapes. Figures are rendered to PNG files next to
the delimited outputs with a non-interactive backend.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import IoError


def fmt_float(x) -> str:
    if isinstance(x, float) and (x != x):  # NaN
        return "NaN"
    return format(float(x), ".17g")


def matrix_payload(arr) -> dict:
    arr = np.asarray(arr, dtype=float)
    return {"shape": list(arr.shape), "data": [float(v) for v in arr.ravel()]}


def dumps_json(obj, indent: int = 2) -> str:
    """Deterministic JSON text: sorted keys, 17-significant-digit floats."""
    pieces = []
    _emit(obj, pieces, indent, 0)
    return "".join(pieces) + "\n"


def _emit(obj, out, indent, level):
    pad = " " * (indent * (level + 1))
    closing = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(_escape(obj))
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), out, indent, level)
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj, key=str)
        for i, key in enumerate(keys):
            out.append(pad + _escape(str(key)) + ": ")
            _emit(obj[key], out, indent, level + 1)
            out.append(",\n" if i + 1 < len(keys) else "\n")
        out.append(closing + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(obj):
            out.append(pad)
            _emit(item, out, indent, level + 1)
            out.append(",\n" if i + 1 < len(obj) else "\n")
        out.append(closing + "]")
    else:
        raise IoError(f"cannot serialize {type(obj).__name__}")


def _escape(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch in ('"', "\\"):
            out.append("\\" + ch)
        elif ch == "\n":
            out.append("\\n")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def write_json(path: str, obj) -> str:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps_json(obj))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def write_csv(path: str, header, rows) -> str:
    """Delimited output; every numeric cell uses 17 significant digits."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                cells = [fmt_float(v) if isinstance(v, (float, np.floating))
                         else str(v) for v in row]
                fh.write(",".join(cells) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def ensure_dir(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {path}: {exc}") from exc
    return path


# ------------------------------------------------------------------ figures


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def figure_point_field(path: str, domain_nodes, values, title: str) -> str:
    """Reconstructed image points: a curve for 1-D domains, the image of
    the grid for 2-D ones; 3-D image coordinates get a 3-D axis."""
    plt = _pyplot()
    values = np.asarray(values)
    three_d = values.shape[1] >= 3
    fig = plt.figure(figsize=(5, 4))
    ax = fig.add_subplot(111, projection="3d" if three_d else None)
    if three_d:
        ax.plot(values[:, 0], values[:, 1], values[:, 2],
                ".-" if domain_nodes.shape[1] == 1 else ".", ms=2, lw=0.8)
        ax.set_zlabel("z")
    else:
        style = ".-" if domain_nodes.shape[1] == 1 else "."
        ax.plot(values[:, 0], values[:, 1], style, ms=2, lw=0.8)
        ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def figure_residuals(path: str, residuals, title: str,
                     tolerance: float = None) -> str:
    plt = _pyplot()
    residuals = np.asarray(residuals, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 3))
    if residuals.size:
        ax.semilogy(np.arange(len(residuals)),
                    np.maximum(residuals, 1e-300), ".-", lw=0.8)
    if tolerance is not None:
        ax.axhline(tolerance, color="r", ls="--", lw=0.8, label="tolerance")
        ax.legend(fontsize=8)
    ax.set_xlabel("index")
    ax.set_ylabel("residual")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def figure_development(path: str, t, orbit, title: str) -> str:
    """Trajectory of the developed group path acting on the basepoint."""
    plt = _pyplot()
    orbit = np.asarray(orbit)
    fig = plt.figure(figsize=(5, 4))
    if orbit.shape[1] >= 3:
        ax = fig.add_subplot(111, projection="3d")
        ax.plot(orbit[:, 0], orbit[:, 1], orbit[:, 2], "-", lw=1.0)
        ax.set_zlabel("z")
    else:
        ax = fig.add_subplot(111)
        ax.plot(orbit[:, 0], orbit[:, 1], "-", lw=1.0)
        ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
