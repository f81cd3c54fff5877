"""Size caps shared by every module.

Defaults keep all computations at desk scale.  Each cap can be overridden
with an environment variable, e.g. ``QUASINIL_ORACLE_N=12``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, fields

ENV_PREFIX = "QUASINIL_"


@dataclass(frozen=True)
class Caps:
    oracle_n: int = 10      # dense oracle / matrix-free level
    alpha_p: int = 8        # alternating-partition enumeration
    series_len: int = 60    # truncation of infinite coefficient sequences

    @classmethod
    def from_env(cls, environ=None) -> "Caps":
        environ = os.environ if environ is None else environ
        values = {}
        for f in fields(cls):
            raw = environ.get(ENV_PREFIX + f.name.upper())
            if raw is not None:
                try:
                    values[f.name] = int(raw)
                except ValueError as exc:
                    raise ValueError(f"{ENV_PREFIX}{f.name.upper()} must be an integer, got {raw!r}") from exc
        return cls(**values)


def caps() -> Caps:
    return Caps.from_env()


class CapError(ValueError):
    """A requested size exceeds a configured cap."""
