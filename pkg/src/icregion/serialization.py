"""JSON channel, distribution and polytope files.

Indices are 0-based in files. Complex gains are ``[re, im]`` pairs, user-major.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .channel_model import Dmic, GaussianIC, InterferencePattern, ProductDistribution
from .errors import ValidationError


def _num(x: float):
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def gaussian_to_json(ic: GaussianIC, meta: dict | None = None) -> dict:
    out = {
        "type": "gaussian",
        "k": ic.k,
        "powers": [float(p) for p in ic.powers],
        "gains": [[[_num(g.real), _num(g.imag)] for g in row] for row in ic.gains],
    }
    if meta:
        out["meta"] = meta
    return out


def dmic_to_json(ch: Dmic) -> dict:
    return {
        "type": "dmic",
        "k": ch.k,
        "input_sizes": list(ch.input_sizes),
        "output_sizes": list(ch.output_sizes),
        "transitions": [t.tolist() for t in ch.transitions],
    }


def distribution_to_json(dist: ProductDistribution) -> dict:
    return {
        "q_weights": dist.q_weights.tolist(),
        "pmfs": [[p.tolist() for p in per_q] for per_q in dist.pmfs],
    }


def channel_from_json(doc: dict):
    if not isinstance(doc, dict) or "type" not in doc:
        raise ValidationError("channel file must be an object with a 'type' field")
    kind = doc["type"]
    try:
        if kind == "gaussian":
            k = int(doc["k"])
            gains = np.array(doc["gains"], dtype=float)
            if gains.shape != (k, k, 2):
                raise ValidationError(f"gains must have shape [{k}][{k}][2], got {list(gains.shape)}")
            return GaussianIC(gains[..., 0] + 1j * gains[..., 1], doc["powers"])
        if kind == "dmic":
            k = int(doc["k"])
            ch = Dmic(doc["input_sizes"], doc["output_sizes"],
                      [np.array(t, dtype=float) for t in doc["transitions"]])
            if ch.k != k:
                raise ValidationError(f"k={k} but {ch.k} input alphabets")
            return ch
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed {kind} channel: {exc!r}") from exc
    raise ValidationError(f"unknown channel type {kind!r}")


def distribution_from_json(doc: dict) -> ProductDistribution:
    try:
        return ProductDistribution(doc["q_weights"], doc["pmfs"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed distribution: {exc!r}") from exc


def load_json(path) -> dict:
    with open(Path(path), encoding="utf-8") as fh:
        return json.load(fh)


def load_channel(path):
    return channel_from_json(load_json(path))


def dump_json(doc, path=None) -> str:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def pattern_to_json(pattern: InterferencePattern) -> dict:
    return {
        "strong": list(pattern.strong),
        "very_strong": [sorted(v) for v in pattern.very_strong],
    }


def polytope_to_json(p, verts=None, pattern=None) -> dict:
    doc = {
        "dim": p.dim,
        "note": p.note,
        "halfspaces": [
            {"coeffs": [int(c) for c in h.coeffs(p.dim)], "bound": h.bound, "label": h.label}
            for h in p.halfspaces
        ],
    }
    if verts is not None:
        doc["vertices"] = [[float(x) for x in v] for v in verts]
    if pattern is not None:
        doc["pattern"] = pattern_to_json(pattern)
    return doc
