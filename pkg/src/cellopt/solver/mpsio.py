"""MPS model export and plain-text solution import.

Instances too large for the bundled branch and bound are written as MPS
files for an external MILP solver.  The writer emits the classic fixed
section layout (ROWS / COLUMNS with INTORG markers / RHS / BOUNDS) with
column-aligned fields; numeric fields are widened to keep full double
precision, which every contemporary MPS reader accepts.  Names longer than
the 8-character MPS field are shortened deterministically and recorded in a
sidecar name map next to the model file.

Solutions come back as plain text, one "name value" pair per line; the
importer maps names through the sidecar convention, rejects unknown names
and non-integral binaries, and fills unmentioned variables with zero.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from ..milp import BINARY, EQUAL, GREATER_EQUAL, LESS_EQUAL, MilpModel

logger = logging.getLogger(__name__)

_NAME_LIMIT = 8
_OBJ_ROW = "OBJ"


def _short_names(names: list[str], prefix: str) -> dict[str, str]:
    """Map every over-long name to a deterministic 8-char substitute."""
    taken = {n for n in names if len(n) <= _NAME_LIMIT}
    mapping = {}
    for idx, name in enumerate(names):
        if len(name) <= _NAME_LIMIT:
            mapping[name] = name
            continue
        short = f"{prefix}{idx:0{_NAME_LIMIT - len(prefix)}d}"
        if short in taken:
            raise ValueError(f"name shortening collision on {short!r}")
        taken.add(short)
        mapping[name] = short
    return mapping


def _val(v: float) -> str:
    return f"{v:.12E}"


def export_model(model: MilpModel, path: Optional[str | Path] = None,
                 name: str = "CELLOPT") -> str:
    """Serialize a model to MPS text; optionally write it plus a sidecar.

    When ``path`` is given the MPS text goes to that file and, if any name
    had to be shortened, a name map goes to ``<path>.names`` with one
    "short original" pair per line.  Returns the MPS text either way.
    """
    var_names = [v.name for v in model.variables]
    row_names = [c.name for c in model.constraints]
    vmap = _short_names(var_names, "V")
    cmap = _short_names(row_names, "C")

    lines = [f"NAME          {name}", "ROWS", f" N  {_OBJ_ROW}"]
    sense_code = {LESS_EQUAL: "L", GREATER_EQUAL: "G", EQUAL: "E"}
    for con in model.constraints:
        lines.append(f" {sense_code[con.sense]}  {cmap[con.name]}")

    # column-major coefficient lists
    col_entries: list[list[tuple[str, float]]] = [[] for _ in model.variables]
    for j, coef in model.objective.items():
        if coef != 0.0:
            col_entries[j].append((_OBJ_ROW, coef))
    for con in model.constraints:
        row = cmap[con.name]
        for j in sorted(con.coeffs):
            if con.coeffs[j] != 0.0:
                col_entries[j].append((row, con.coeffs[j]))

    lines.append("COLUMNS")
    in_int = False
    marker = 0
    for j, var in enumerate(model.variables):
        want_int = var.kind == BINARY
        if want_int != in_int:
            kind = "'INTORG'" if want_int else "'INTEND'"
            lines.append(f"    MARK{marker:04d}  'MARKER'                 {kind}")
            marker += 1
            in_int = want_int
        cname = vmap[var.name]
        for row, coef in col_entries[j]:
            lines.append(f"    {cname:<10}{row:<10}{_val(coef)}")
    if in_int:
        lines.append(f"    MARK{marker:04d}  'MARKER'                 'INTEND'")

    lines.append("RHS")
    for con in model.constraints:
        if con.rhs != 0.0:
            lines.append(f"    RHS       {cmap[con.name]:<10}{_val(con.rhs)}")
    if model.objective_constant != 0.0:
        lines.append(f"    RHS       {_OBJ_ROW:<10}{_val(-model.objective_constant)}")

    lines.append("BOUNDS")
    for var in model.variables:
        cname = vmap[var.name]
        if var.kind == BINARY and var.lb == 0.0 and var.ub == 1.0:
            lines.append(f" BV BND       {cname}")
            continue
        if var.lb == var.ub:
            lines.append(f" FX BND       {cname:<10}{_val(var.lb)}")
            continue
        if var.lb != 0.0:
            lines.append(f" LO BND       {cname:<10}{_val(var.lb)}")
        lines.append(f" UP BND       {cname:<10}{_val(var.ub)}")
    lines.append("ENDATA")
    text = "\n".join(lines) + "\n"

    if path is not None:
        path = Path(path)
        path.write_text(text)
        renames = [(s, o) for o, s in {**vmap, **cmap}.items() if s != o]
        if renames:
            sidecar = path.with_name(path.name + ".names")
            sidecar.write_text(
                "".join(f"{s} {o}\n" for s, o in sorted(renames)))
            logger.info("wrote %d shortened names to %s", len(renames), sidecar)
    return text


def format_solution(assignment: np.ndarray, model: MilpModel) -> str:
    """Render an assignment in the solution-file format import expects."""
    lines = [f"{v.name} {assignment[j]:.12E}" for j, v in enumerate(model.variables)]
    return "\n".join(lines) + "\n"


def import_solution(path: str | Path, model: MilpModel,
                    names_path: Optional[str | Path] = None) -> np.ndarray:
    """Read a "name value" solution file into an assignment vector.

    Shortened names are translated back through the sidecar map when one is
    supplied.  Unknown names raise; variables absent from the file default
    to 0 with a warning; binaries more than 1e-6 from an integer raise.
    """
    path = Path(path)
    rename: dict[str, str] = {}
    if names_path is not None:
        for line in Path(names_path).read_text().splitlines():
            if line.strip():
                short, original = line.split(None, 1)
                rename[short] = original.strip()

    by_name = {v.name: j for j, v in enumerate(model.variables)}
    values = np.zeros(model.n_variables)
    seen = np.zeros(model.n_variables, dtype=bool)
    n_pairs = 0
    for ln, line in enumerate(path.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{ln}: expected 'name value', got {line!r}")
        name = rename.get(parts[0], parts[0])
        if name not in by_name:
            raise ValueError(f"{path}:{ln}: unknown variable {parts[0]!r}")
        j = by_name[name]
        values[j] = float(parts[1])
        seen[j] = True
        n_pairs += 1
    if n_pairs == 0:
        raise ValueError(f"{path}: no variable/value pairs found")

    missing = int((~seen).sum())
    if missing:
        logger.warning("%d variables missing from %s, defaulting to 0",
                       missing, path)
    for j, var in enumerate(model.variables):
        if var.kind == BINARY:
            snapped = round(values[j])
            if abs(values[j] - snapped) > 1e-6:
                raise ValueError(
                    f"binary {var.name} is non-integral: {values[j]!r}")
            values[j] = snapped
    return values
