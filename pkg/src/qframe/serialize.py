"""JSON / CSV formats.

Floats are written with 17 significant digits, which round-trips every
IEEE double exactly.

Formats::

    operator  {"dim": d, "re": [[...]], "im": [[...]]}
    povm      {"effects": [operator, ...]}
    frame     {"dim": d, "labels": [[q, p], ...], "weights": [...],
               "elements": [operator, ...], "kind": ..., "convention": ...}
    rep       {"frame": frame | "<id>", "values": [...], "via": "F" | "E"}
    effects   {"frame": frame | "<id>", "via": ..., "outcomes": [[...], ...]}
    kernel    {"frame": "<id>", "shape": [...], "re": [...], "im": [...]}
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import QFrameError
from .frames import Frame, RepFunction
from .operator_space import DensityOp, Povm, validate_povm, validate_state


class FormatError(QFrameError, ValueError):
    """Malformed input file; the message names the location."""


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "null"
        if math.isinf(x):
            raise ValueError("infinite values cannot be serialized")
        return "%.17g" % x
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(obj)


def dump(obj, path) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def load(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _get(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(f"{where}: missing key {key!r}")
    return obj[key]


# -- operators ------------------------------------------------------------------


def operator_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"dim": a.shape[0], "re": a.real, "im": a.imag}


def operator_from_json(obj, where="operator") -> np.ndarray:
    d = _get(obj, "dim", where)
    try:
        re = np.array(_get(obj, "re", where), dtype=float)
        im = np.array(_get(obj, "im", where), dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: non-numeric matrix entries") from exc
    if re.shape != (d, d) or im.shape != (d, d):
        raise FormatError(f"{where}: expected {d}x{d} 're' and 'im' arrays, got {re.shape} and {im.shape}")
    return re + 1j * im


def state_from_json(obj, where="state") -> DensityOp:
    return validate_state(operator_from_json(obj, where))


def povm_to_json(povm: Povm) -> dict:
    return {"effects": [operator_to_json(e) for e in povm.effects]}


def povm_from_json(obj, where="povm") -> Povm:
    effects = obj if isinstance(obj, list) else _get(obj, "effects", where)
    return validate_povm([operator_from_json(e, f"{where}.effects[{i}]") for i, e in enumerate(effects)])


# -- frames and representations --------------------------------------------------


def frame_to_json(frame: Frame) -> dict:
    return {
        "dim": frame.dim,
        "labels": [list(lab) for lab in frame.labels],
        "weights": frame.weights,
        "elements": [operator_to_json(e) for e in frame.elements],
        "kind": frame.kind,
        "convention": frame.convention,
    }


def frame_from_json(obj, where="frame") -> Frame:
    d = _get(obj, "dim", where)
    elements = [operator_from_json(e, f"{where}.elements[{i}]")
                for i, e in enumerate(_get(obj, "elements", where))]
    if any(e.shape != (d, d) for e in elements):
        raise FormatError(f"{where}: element dimensions disagree with dim={d}")
    return Frame(
        np.array(elements),
        [tuple(lab) for lab in _get(obj, "labels", where)],
        np.array(_get(obj, "weights", where), dtype=float),
        kind=obj.get("kind", "custom"),
        convention=obj.get("convention", "raw"),
    )


def rep_to_json(rep, frame: Frame, via: str = "F", embed: bool = True) -> dict:
    values = rep.values if isinstance(rep, RepFunction) else np.asarray(rep)
    return {"frame": frame_to_json(frame) if embed else frame.fingerprint, "values": values, "via": via}


def rep_from_json(obj, where="rep"):
    """Return ``(values, frame_or_id, via)``."""
    f = _get(obj, "frame", where)
    frame = frame_from_json(f, f"{where}.frame") if isinstance(f, dict) else str(f)
    values = np.array(_get(obj, "values", where), dtype=float)
    via = obj.get("via", "F")
    if via not in ("F", "E"):
        raise FormatError(f"{where}: 'via' must be 'F' or 'E'")
    return values, frame, via


def effects_to_json(cond, embed: bool = True) -> dict:
    return {
        "frame": frame_to_json(cond.frame) if embed else cond.frame.fingerprint,
        "via": cond.via,
        "outcomes": cond.matrix(),
    }


def kernel_to_json(values: np.ndarray, frame_id: str) -> dict:
    v = np.asarray(values)
    return {
        "frame": frame_id,
        "shape": list(v.shape),
        "re": np.real(v).ravel(),
        "im": np.imag(v).ravel(),
    }


def kernel_from_json(obj, where="kernel") -> np.ndarray:
    shape = tuple(_get(obj, "shape", where))
    re = np.array(_get(obj, "re", where), dtype=float)
    im = np.array(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.size != int(np.prod(shape)) or im.size != re.size:
        raise FormatError(f"{where}: flattened arrays do not match shape {shape}")
    return (re + 1j * im).reshape(shape)


def write_rep_csv(path, values, labels) -> None:
    """One row per label: label components followed by the value."""
    width = len(labels[0]) if labels else 0
    header = ["q", "p"] if width == 2 else [f"label{i}" for i in range(width)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header + ["value"])
        for lab, v in zip(labels, values):
            w.writerow(list(lab) + ["%.17g" % v])
