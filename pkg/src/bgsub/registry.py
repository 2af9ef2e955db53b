"""Name -> subtractor lookup used by the CLI and the benchmark."""
from __future__ import annotations

from dataclasses import fields

from .gmg import GMG, GmgParams
from .mog import MOG, MogParams
from .mog2 import MOG2, Mog2Params

ALGORITHMS = {
    "gmg": (GMG, GmgParams),
    "mog": (MOG, MogParams),
    "mog2": (MOG2, Mog2Params),
}


def param_names(algorithm: str) -> list[str]:
    return [f.name for f in fields(ALGORITHMS[algorithm][1])]


def create(algorithm: str, width: int, height: int, params: dict | None = None, **kw):
    """Build a subtractor; keys in ``params`` that the algorithm does not take are ignored."""
    try:
        cls, params_cls = ALGORITHMS[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}") from None
    names = set(param_names(algorithm))
    chosen = {k: v for k, v in (params or {}).items() if k in names and v is not None}
    return cls(width, height, params_cls(**chosen), **kw)
