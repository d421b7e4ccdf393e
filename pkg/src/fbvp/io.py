"""Problem files, solve reports and canonical serialization.

All structured output is serialized canonically: sorted keys, floats at 17
significant digits, fixed layout.  Two runs with the same inputs produce
byte-identical files, and loading a report and saving it again reproduces
the bytes exactly.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .funcspace import GridFn
from .hammerstein import ProblemDef
from .solver import SolveOptions


def format_float(x):
    x = float(x)
    if not np.isfinite(x):
        return "null"
    return format(x, ".17g")


def _atom(o):
    if o is None:
        return "null"
    if isinstance(o, (bool, np.bool_)):
        return "true" if o else "false"
    if isinstance(o, (float, np.floating)):
        return format_float(o)
    if isinstance(o, (int, np.integer)):
        return str(int(o))
    if isinstance(o, str):
        return json.dumps(o)
    raise TypeError(f"cannot serialize {type(o)!r}")


def _compact(o):
    if isinstance(o, dict):
        items = sorted(o.items())
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_compact(v)}" for k, v in items) + "}"
    if isinstance(o, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_compact(v) for v in o) + "]"
    return _atom(o)


def _pretty(o, parts, ind):
    pad = "  " * ind
    if isinstance(o, dict) and o:
        parts.append("{\n")
        items = sorted(o.items())
        for i, (k, v) in enumerate(items):
            parts.append(f"{pad}  {json.dumps(str(k))}: ")
            if isinstance(v, dict) and v and ind < 1:
                _pretty(v, parts, ind + 1)
            else:
                parts.append(_compact(v))
            parts.append(",\n" if i < len(items) - 1 else "\n")
        parts.append(pad + "}")
    else:
        parts.append(_compact(o))


def canon_dumps(obj):
    parts = []
    _pretty(obj, parts, 0)
    parts.append("\n")
    return "".join(parts)


def write_json(path, obj):
    Path(path).write_text(canon_dumps(obj), encoding="utf-8")


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            format_float(v) if isinstance(v, (float, np.floating)) else str(v)
            for v in row
        ))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- problem files ---------------------------------------------------------------

_SOLVER_KEYS = {"tol", "max_iter", "damping", "newton_after", "lambda_step", "lambda_max"}
_TOP_KEYS = {"bc", "r", "m", "quad", "psi", "g", "F", "B", "solver", "c4_interval"}
_B_FLAGS = {"b_includes_lambda", "homogeneous_bc"}


def builtin_names():
    root = resources.files("fbvp") / "problems"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def builtin_problem_text(name):
    root = resources.files("fbvp") / "problems"
    f = root / f"{name}.json"
    if not f.is_file():
        raise FileNotFoundError(
            f"no builtin problem '{name}'; known: {', '.join(builtin_names())}"
        )
    return f.read_text(encoding="utf-8")


def _entry(doc, key, default_name):
    e = doc.get(key)
    if e is None:
        return {"name": default_name, "params": {}}
    if isinstance(e, str):
        return {"name": e, "params": {}}
    if isinstance(e, dict):
        if "name" not in e:
            raise ValueError(f"problem entry '{key}' needs a 'name'")
        return e
    raise ValueError(f"problem entry '{key}' must be a name or an object")


def problem_from_dict(doc):
    """Build (ProblemDef, SolveOptions) from a problem document.

    Registry names, grid compatibility and the structural validity of psi
    and g are all checked eagerly here, so CLI load failures happen before
    any solving starts.
    """
    if not isinstance(doc, dict):
        raise ValueError("problem document must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ValueError(f"unknown problem keys: {sorted(unknown)}; known: {sorted(_TOP_KEYS)}")
    for key in ("bc", "r"):
        if key not in doc:
            raise ValueError(f"problem document is missing required key '{key}'")
    bc = int(doc["bc"])
    if bc not in (1, 2, 3):
        raise ValueError(f"bc must be 1, 2 or 3, got {bc}")

    b_entry = _entry(doc, "B", "zero")
    flags = {k: bool(b_entry.get(k, False)) for k in _B_FLAGS}
    unknown_b = set(b_entry) - {"name", "params"} - _B_FLAGS
    if unknown_b:
        raise ValueError(f"unknown keys in B entry: {sorted(unknown_b)}")

    p = ProblemDef(
        bc=bc,
        r=float(doc["r"]),
        m=int(doc.get("m", 64)),
        quad=int(doc["quad"]) if "quad" in doc else None,
        psi={"name": _entry(doc, "psi", "zero")["name"],
             "params": _entry(doc, "psi", "zero").get("params", {})},
        g={"name": _entry(doc, "g", "one")["name"],
           "params": _entry(doc, "g", "one").get("params", {})},
        F={"name": _entry(doc, "F", "constant")["name"],
           "params": _entry(doc, "F", "constant").get("params", {})},
        B={"name": b_entry["name"], "params": b_entry.get("params", {})},
        b_includes_lambda=flags["b_includes_lambda"],
        homogeneous_bc=flags["homogeneous_bc"],
        c4_interval=tuple(doc.get("c4_interval", (0.0, 1.0))),
    )
    p.assembly()  # eager: registry names + structural validation

    sdoc = doc.get("solver", {}) or {}
    unknown_s = set(sdoc) - _SOLVER_KEYS
    if unknown_s:
        raise ValueError(f"unknown solver keys: {sorted(unknown_s)}; known: {sorted(_SOLVER_KEYS)}")
    opts = SolveOptions(**{k: sdoc[k] for k in _SOLVER_KEYS if k in sdoc})
    return p, opts


def load_problem(path_or_name):
    """Load a problem from a JSON path or a builtin name."""
    path = Path(path_or_name)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    else:
        text = builtin_problem_text(str(path_or_name))
    doc = json.loads(text)
    p, opts = problem_from_dict(doc)
    return p, opts, doc


def problem_echo(p, doc):
    """Canonical problem description embedded in reports (reloadable)."""
    return {
        "bc": int(p.bc),
        "r": p.r,
        "m": p.m,
        "quad": p.quad,
        "psi": _entry(doc, "psi", "zero"),
        "g": _entry(doc, "g", "one"),
        "F": _entry(doc, "F", "constant"),
        "B": _entry(doc, "B", "zero"),
        "solver": doc.get("solver", {}) or {},
        "c4_interval": list(p.c4_interval),
    }


# -- solve reports ----------------------------------------------------------------


def grid_rows(u):
    return [[float(t), float(v), float(d)]
            for t, v, d in zip(u.nodes, u.values, u.derivs)]


def gridfn_from_rows(rows, r, m):
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError("grid rows must be [t, u, u'] triples")
    return GridFn(r, m, arr[:, 1], arr[:, 2])


def solve_report(p, doc, rho, pair=None, verification=None, hypotheses=None,
                 failure=None):
    rep = {
        "rho": float(rho),
        "problem": problem_echo(p, doc),
    }
    if pair is not None:
        rep.update({
            "status": "ok",
            "lambda_star": pair.lambda_star,
            "residual": pair.residual,
            "iterations": pair.n_iterations,
            "continuation_steps": pair.n_continuation_steps,
            "grid": grid_rows(pair.u_star),
        })
    if verification is not None:
        rep["verification"] = verification.to_dict()
    if hypotheses is not None:
        rep["hypotheses"] = hypotheses.to_dict()
    if failure is not None:
        rep.update({
            "status": "no_bracket",
            "diagnostics": {
                "lambda_last": failure.lambda_last,
                "norm_last": failure.norm_last,
                "reason": failure.reason,
            },
        })
    return rep


def load_solution(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or "problem" not in doc:
        raise ValueError("solution file lacks the embedded problem block")
    if doc.get("status") != "ok" or "grid" not in doc:
        raise ValueError("solution file does not contain a solved pair")
    p, opts = problem_from_dict(doc["problem"])
    u = gridfn_from_rows(doc["grid"], p.r, p.m)
    return p, opts, float(doc["lambda_star"]), u, doc
