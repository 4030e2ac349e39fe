"""Result tables (commented CSV) and gnuplot script generation."""
from __future__ import annotations

import csv
import io
import os
import subprocess
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ECHO_BEGIN, ECHO_END, RunConfig, render_config

__all__ = ["TableRef", "write_table", "read_table", "emit_plots", "source_revision"]

COLUMNS = ("x", "re_chi", "im_chi", "chi_abs")


@dataclass(frozen=True)
class TableRef:
    """A written table: file path, legend label and sweep kind."""

    path: Path
    label: str
    kind: str


def source_revision() -> str:
    """Git revision of the source tree, or ``"unknown"`` outside a checkout."""
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "rev-parse", "--short=12", "HEAD"], cwd=here,
                             capture_output=True, text=True, timeout=5, check=True)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() or "unknown"


def _fmt(value: float) -> str:
    return repr(float(value))


def write_table(path, sweep, cfg: RunConfig, label: str = "", notes=()) -> TableRef:
    """Write one curve as CSV with a ``#`` comment header.

    The header carries the package version, source revision, the full
    canonical configuration (between ``# --- config ---`` markers, see
    :func:`lineshape.config.read_config_echo`), the curve label and the
    kernel toggles.  Columns are the grid value, ``Re chi``, ``Im chi`` and
    the absorption ``chi'' = -Im chi``.  Floats are written with ``repr``
    so tables are byte-identical across runs.
    """
    from . import __version__

    if not np.all(np.isfinite(sweep.chi)):
        raise ValueError("refusing to write non-finite susceptibility values")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write(f"# lineshape {__version__} revision {source_revision()}\n")
    buf.write(ECHO_BEGIN + "\n")
    for line in render_config(cfg).splitlines():
        buf.write(f"# {line}\n")
    buf.write(ECHO_END + "\n")
    buf.write(f"# curve: {label or 'default'}\n")
    tg = sweep.toggles
    buf.write(f"# toggles: frequency_shift={tg.include_frequency_shift} "
              f"initial_correlation={tg.include_initial_correlation} mode={tg.mode}\n")
    buf.write(f"# kind: {sweep.kind} (x is {'omega' if sweep.kind == 'omega' else 'H0'})\n")
    for note in notes:
        buf.write(f"# {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for x, chi in zip(sweep.grid, sweep.chi):
        writer.writerow((_fmt(x), _fmt(chi.real), _fmt(chi.imag), _fmt(-chi.imag)))
    path.write_text(buf.getvalue())
    return TableRef(path, label or "default", sweep.kind)


def read_table(path):
    """Load a table written by :func:`write_table` as a structured array."""
    rows = [line for line in Path(path).read_text().splitlines() if not line.startswith("#")]
    data = np.loadtxt(rows[1:], delimiter=",", ndmin=2)
    return {name: data[:, i] for i, name in enumerate(COLUMNS)}


_STYLES = ("lw 2 dt 1", "lw 2 dt 4", "lw 2 dt 3", "lw 2 dt 2", "lw 2 dt 5")


def emit_plots(tables, path, title: str = "") -> Path:
    """Write a gnuplot script that overlays the absorption of ``tables``.

    Data files are referenced relative to the script location, so the
    script and tables can be moved together.

    Raises
    ------
    ValueError
        If ``tables`` is empty.
    """
    tables = list(tables)
    if not tables:
        raise ValueError("emit_plots needs at least one table")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    kind = tables[0].kind
    xlabel = "{/Symbol w} / {/Symbol w}_0" if kind == "omega" else "H_0 / {/Symbol g}|J|"
    png = path.with_suffix(".png").name
    lines = [
        "# gnuplot script generated by lineshape",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set terminal pngcairo size 900,600 enhanced",
        f"set output '{png}'",
        f"set xlabel '{xlabel}'",
        "set ylabel \"{/Symbol c}''\"",
        "set key top right",
    ]
    if title:
        lines.append(f"set title '{title}'")
    plots = []
    for idx, ref in enumerate(tables):
        rel = os.path.relpath(Path(ref.path).resolve(), path.parent.resolve())
        style = _STYLES[idx % len(_STYLES)]
        plots.append(f"'{rel}' using 1:4 every ::1 with lines {style} "
                     f"title '{ref.label}' noenhanced")
    lines.append("plot " + ", \\\n     ".join(plots))
    path.write_text("\n".join(lines) + "\n")
    return path
