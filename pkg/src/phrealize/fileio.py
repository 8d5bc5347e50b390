"""Reading and writing the shared system / response / sample file formats.

System files are UTF-8 JSON documents:

    {
      "kind": "descriptor" | "statespace" | "ph" | "semiexplicit",
      ...integer dimensions...,
      "<matrix>": [[row], [row], ...]     # dense, row major
    }

Dimension keys per kind:
  descriptor, statespace, ph : "n", "m"
  semiexplicit               : "d", "a", "m"

Frequency responses are CSV with header ``omega,re_11,im_11,re_12,...``
(entries in row-major order).  Input/output sample sequences are CSV with
header ``t,u_1..u_m,y_1..y_m`` on a uniform time grid.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FileFormatError
from .identify import IOSequence
from .systems import (DescriptorSystem, FrequencyResponse, PHSystem,
                      SemiExplicitSystem, StateSpaceSystem)

__all__ = [
    "save_system",
    "load_system",
    "system_to_dict",
    "system_from_dict",
    "save_certificate",
    "load_certificate",
    "save_response_csv",
    "load_response_csv",
    "save_iosequence_csv",
    "load_iosequence_csv",
]

_MATRIX_FIELDS = {
    "descriptor": ("E", "A", "B", "C", "D"),
    "statespace": ("A", "B", "C", "D"),
    "ph": ("E", "J", "R", "Q", "F", "P", "S", "N"),
    "semiexplicit": ("E1", "A1", "B1", "A2", "B2", "C", "D"),
}

_TYPES = {
    "descriptor": DescriptorSystem,
    "statespace": StateSpaceSystem,
    "ph": PHSystem,
    "semiexplicit": SemiExplicitSystem,
}


def kind_of(sys) -> str:
    for kind, cls in _TYPES.items():
        if isinstance(sys, cls):
            return kind
    raise FileFormatError(f"unsupported system type {type(sys).__name__}")


def system_to_dict(sys) -> dict:
    kind = kind_of(sys)
    doc: dict = {"kind": kind}
    if kind == "semiexplicit":
        doc["d"] = sys.num_diff
        doc["a"] = sys.num_alg
    else:
        doc["n"] = sys.order
    doc["m"] = sys.num_ports
    for name in _MATRIX_FIELDS[kind]:
        doc[name] = [[float(x) for x in row] for row in getattr(sys, name)]
    return doc


def system_from_dict(doc: dict):
    try:
        kind = doc["kind"]
    except (KeyError, TypeError) as exc:
        raise FileFormatError("missing 'kind' field") from exc
    if kind not in _MATRIX_FIELDS:
        raise FileFormatError(f"unknown system kind {kind!r}")
    try:
        mats = [np.array(doc[name], dtype=float).reshape(_shape(doc, kind, name))
                for name in _MATRIX_FIELDS[kind]]
    except (KeyError, ValueError) as exc:
        raise FileFormatError(f"malformed {kind} document: {exc}") from exc
    return _TYPES[kind](*mats)


def _shape(doc, kind, name):
    m = int(doc["m"])
    if kind == "semiexplicit":
        d, a = int(doc["d"]), int(doc["a"])
        n = d + a
        return {"E1": (d, n), "A1": (d, n), "B1": (d, m),
                "A2": (a, n), "B2": (a, m), "C": (m, n), "D": (m, m)}[name]
    n = int(doc["n"])
    if name in ("B", "F", "P"):
        return (n, m)
    if name == "C":
        return (m, n)
    if name in ("D", "S", "N"):
        return (m, m)
    return (n, n)


def save_system(sys, path) -> None:
    doc = system_to_dict(sys)
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_system(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not a valid system document ({exc})") from exc
    return system_from_dict(doc)


def save_certificate(sol, path) -> None:
    """Write a KYP storage certificate (symmetric matrix payload) to a file."""
    Q = np.asarray(sol.Qhat, dtype=float)
    doc = {
        "kind": "certificate",
        "n": int(Q.shape[0]),
        "Qhat": [[float(x) for x in row] for row in Q],
        "residual": float(sol.residual),
        "projected": bool(sol.projected),
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_certificate(path):
    from .kyp import KYPSolution

    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
        if doc.get("kind") != "certificate":
            raise KeyError("kind")
        n = int(doc["n"])
        Q = np.array(doc["Qhat"], dtype=float).reshape(n, n)
        return KYPSolution(Qhat=Q, residual=float(doc["residual"]),
                           projected=bool(doc["projected"]))
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise FileFormatError(f"{path}: not a valid certificate document ({exc})") from exc


def save_response_csv(resp: FrequencyResponse, path) -> None:
    m = resp.num_ports
    cols = ["omega"]
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            cols += [f"re_{i}{j}", f"im_{i}{j}"]
    lines = [",".join(cols)]
    for w, V in zip(resp.frequencies, resp.values):
        row = [repr(float(w))]
        for i in range(m):
            for j in range(m):
                row += [repr(float(V[i, j].real)), repr(float(V[i, j].imag))]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_response_csv(path) -> FrequencyResponse:
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not lines or not lines[0].startswith("omega"):
        raise FileFormatError(f"{path}: expected an 'omega,...' response header")
    ncols = len(lines[0].split(","))
    m = int(round(np.sqrt((ncols - 1) / 2)))
    if 1 + 2 * m * m != ncols:
        raise FileFormatError(f"{path}: column count {ncols} does not fit any square channel count")
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    w = data[:, 0]
    vals = data[:, 1::2] + 1j * data[:, 2::2]
    return FrequencyResponse(w, vals.reshape(-1, m, m))


def save_iosequence_csv(seq: IOSequence, path) -> None:
    m = seq.num_channels
    header = ["t"] + [f"u_{j}" for j in range(1, m + 1)] + [f"y_{j}" for j in range(1, m + 1)]
    lines = [",".join(header)]
    for i in range(seq.num_samples):
        row = [repr(i * seq.dt)]
        row += [repr(float(x)) for x in seq.inputs[i]]
        row += [repr(float(x)) for x in seq.outputs[i]]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_iosequence_csv(path) -> IOSequence:
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not lines or not lines[0].startswith("t,"):
        raise FileFormatError(f"{path}: expected a 't,u_1..,y_1..' header")
    ncols = len(lines[0].split(","))
    if ncols < 3 or (ncols - 1) % 2 != 0:
        raise FileFormatError(f"{path}: need matching u/y column groups")
    m = (ncols - 1) // 2
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    t = data[:, 0]
    if len(t) < 2:
        raise FileFormatError(f"{path}: need at least two samples")
    steps = np.diff(t)
    dt = float(steps[0])
    if dt <= 0 or not np.allclose(steps, dt, rtol=1e-8, atol=1e-12):
        raise FileFormatError(f"{path}: time grid must be uniform and increasing")
    return IOSequence(dt=dt, inputs=data[:, 1:1 + m], outputs=data[:, 1 + m:])
