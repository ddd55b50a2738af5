"""JSON matrix files and model bundles.

A matrix is ``{"dim": n, "entries": [[re, im], ...]}`` with n² entries in
row-major order. A model bundle wraps the Hamiltonian with its parity matrix:

    {"kind": "model", "H": <matrix>, "P": <matrix>, "metadata": {...}}
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from phtk.errors import ParseError
from phtk.models.oscillator import OscillatorModel
from phtk.theory.antilinear import AntilinearOperator

logger = logging.getLogger(__name__)

BUNDLE_KIND = "model"


@dataclass
class MatrixInput:
    """Parsed input: a Hamiltonian, and the parity matrix when it came from a bundle."""

    hamiltonian: np.ndarray
    parity: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)
    source: str = ""

    @property
    def is_model(self) -> bool:
        return self.parity is not None

    def to_model(self) -> OscillatorModel:
        if self.parity is None:
            raise ParseError(f"{self.source or 'input'} is a plain matrix, not a model bundle")
        n = self.hamiltonian.shape[0]
        return OscillatorModel(
            N=n,
            nu=float(self.metadata.get("nu", 0.0)),
            quadrature_nodes=int(self.metadata.get("quad", 0)),
            H=self.hamiltonian,
            P=self.parity,
            T=AntilinearOperator(np.eye(n)),
            metadata=dict(self.metadata),
        )


def encode_matrix(matrix: np.ndarray) -> dict:
    m = np.asarray(matrix, dtype=complex)
    return {
        "dim": int(m.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def decode_matrix(obj: object, name: str = "matrix") -> np.ndarray:
    """Parse a ``{dim, entries}`` object into a complex ndarray.

    Raises ParseError on any structural problem or non-finite value.
    """
    if not isinstance(obj, dict):
        raise ParseError(f"{name}: expected an object with 'dim' and 'entries'")
    dim = obj.get("dim")
    entries = obj.get("entries")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError(f"{name}: 'dim' must be a positive integer, got {dim!r}")
    if not isinstance(entries, list) or len(entries) != dim * dim:
        count = len(entries) if isinstance(entries, list) else "no"
        raise ParseError(f"{name}: expected {dim * dim} entries, got {count}")
    values = np.empty(dim * dim, dtype=complex)
    for i, pair in enumerate(entries):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)
        ):
            raise ParseError(f"{name}: entry {i} must be a [re, im] pair of numbers")
        if not all(math.isfinite(v) for v in pair):
            raise ParseError(f"{name}: entry {i} is not finite")
        values[i] = complex(pair[0], pair[1])
    return values.reshape(dim, dim)


def parse_input(text: str, source: str = "") -> MatrixInput:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{source or 'input'}: invalid JSON ({e})") from e
    if isinstance(obj, dict) and obj.get("kind") == BUNDLE_KIND:
        h = decode_matrix(obj.get("H"), "H")
        p = decode_matrix(obj.get("P"), "P")
        if p.shape != h.shape:
            raise ParseError(f"P has shape {p.shape}, H has {h.shape}")
        metadata = obj.get("metadata") or {}
        if not isinstance(metadata, dict):
            raise ParseError("metadata must be an object")
        return MatrixInput(h, p, metadata, source)
    return MatrixInput(decode_matrix(obj, "matrix"), source=source)


def load_input(path: Path) -> MatrixInput:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    result = parse_input(text, str(path))
    logger.debug("Loaded %s (dim=%d, model=%s)", path, result.hamiltonian.shape[0], result.is_model)
    return result


def dumps(obj: dict) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_matrix(path: Path, matrix: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(encode_matrix(matrix)), encoding="utf-8")


def bundle_model(model: OscillatorModel) -> dict:
    metadata = {
        "nu": model.nu,
        "basis": model.N,
        "quad": model.quadrature_nodes,
        "profile": "spectral",
        **model.metadata,
    }
    return {"kind": BUNDLE_KIND, "H": encode_matrix(model.H), "P": encode_matrix(model.P), "metadata": metadata}


def write_bundle(path: Path, model: OscillatorModel) -> None:
    """Write a model bundle; identical models give identical bytes."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(bundle_model(model)), encoding="utf-8")
