"""Reading and writing exponent files, specs, solutions and result tables."""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ParseError
from .hypotheses import SystemExponents
from .mesh import Domain, Field, build_mesh
from .solver import SolutionPair


def _read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a key-value document")
    return data


def _clean(obj):
    """JSON-safe copy: tuples to lists, numpy scalars to floats, inf to strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_exponents(path) -> SystemExponents:
    data = _read_json(path)
    if "exponents" in data and isinstance(data["exponents"], dict):
        data = data["exponents"]
    try:
        return SystemExponents.from_mapping(data)
    except ParseError:
        raise
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def read_problem(path) -> dict:
    """A problem document is either ``{"preset": name, ...}`` or a full
    structure spec mapping."""
    return _read_json(path)


# solutions -------------------------------------------------------------------


def write_solution(path, pair: SolutionPair):
    """Plain-text table: ``#`` header lines, then one ``x [y] u v`` row per vertex."""
    mesh = pair.mesh
    lines = [
        f"# dimension {mesh.dim}",
        f"# vertices {mesh.n_vertices}",
        f"# domain {mesh.domain.kind} " + " ".join(f"{b:.17g}" for b in mesh.domain.bounds),
        "# divisions " + " ".join(str(n) for n in mesh.divisions),
        f"# converged {int(pair.converged)}",
        f"# outer_iterations {pair.outer_iterations}",
        f"# residual_u {pair.residual_u:.17g}",
        f"# residual_v {pair.residual_v:.17g}",
        "# columns " + " ".join(["x", "y"][: mesh.dim] + ["u", "v"]),
    ]
    rows = np.column_stack([mesh.vertices, pair.u.values, pair.v.values])
    lines += [" ".join(f"{x:.17g}" for x in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_solution(path) -> SolutionPair:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(str(exc)) from exc
    header, rows = {}, []
    try:
        for line in text.splitlines():
            if line.startswith("#"):
                key, *vals = line[1:].split()
                header[key] = vals
            elif line.strip():
                rows.append([float(x) for x in line.split()])
        dim = int(header["dimension"][0])
        kind, *bounds = header["domain"]
        domain = Domain(kind, tuple(float(b) for b in bounds))
        mesh = build_mesh(domain, tuple(int(n) for n in header["divisions"]))
        data = np.array(rows, dtype=float)
        if data.shape != (mesh.n_vertices, dim + 2):
            raise ValueError(f"expected {mesh.n_vertices} rows of {dim + 2} numbers")
        if not np.allclose(data[:, :dim], mesh.vertices, rtol=0, atol=1e-12):
            raise ValueError("vertex coordinates do not match the declared mesh")
        return SolutionPair(
            Field(mesh, data[:, dim]), Field(mesh, data[:, dim + 1]),
            float(header["residual_u"][0]), float(header["residual_v"][0]),
            int(header["outer_iterations"][0]), bool(int(header["converged"][0])),
        )
    except (KeyError, ValueError, IndexError) as exc:
        raise ParseError(f"{path}: malformed solution file ({exc})") from exc


# tables ----------------------------------------------------------------------


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{x:.17g}" if isinstance(x, float) else x for x in row])


def format_table(header, rows) -> str:
    cells = [[str(h) for h in header]] + [
        [f"{x:.10g}" if isinstance(x, float) else str(x) for x in row] for row in rows
    ]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    out = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    out.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(out) + "\n"


def ladder_rows(lad):
    return ["n", "alpha", "interior_norm", "boundary_norm"], [
        [i + 1, e.alpha, e.interior_norm, e.boundary_norm] for i, e in enumerate(lad.entries)
    ]


def certificate_rows(cert):
    rows = []
    for i, k in enumerate(cert.kappa_values):
        for j, h in enumerate(cert.h_values):
            rows.append([k, h, cert.ratios[i][j], cert.boundary_ratios[i][j], cert.log_ratios[i][j]])
    return ["kappa", "h", "R", "R_boundary", "log_R"], rows


# experiment records ------------------------------------------------------------


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_record(out, command, inputs, config, outputs, seed=None) -> Path:
    """``<out>.record.json``: input digests, version, seed, config echo and
    output paths.  No timestamps, so identical runs give identical records."""
    record = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "config": config,
        "outputs": {str(p): sha256_file(p) for p in outputs},
    }
    path = Path(f"{out}.record.json")
    write_json(path, record)
    return path
