"""Resource budgets and run configuration.

Budgets make every potentially unbounded certified computation refuse
loudly (``ResourceLimit``) instead of hanging.  The CLI loads overrides
from a JSON file given by ``--config`` or the ``BANDLIM_CONFIG``
environment variable.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction

__all__ = ["Budget", "CliConfig", "DEFAULT_BUDGET", "load_config"]


@dataclass(frozen=True)
class Budget:
    max_window: int = 1 << 26  # largest support size an op may traverse
    materialize_limit: int = 1 << 17  # largest support stored slot-by-slot
    max_sum_terms: int = 1 << 22  # DSL sum node iteration cap
    max_quadrature_panels: int = 1 << 21
    max_peak_boxes: int = 1 << 17
    max_machine_steps: int = 1 << 22
    exact_sum_limit: int = 1 << 10  # largest sum folded to one rational


DEFAULT_BUDGET = Budget()


@dataclass(frozen=True)
class CliConfig:
    precision: int = 20  # default certified bits M
    budget: Budget = field(default_factory=Budget)
    output_format: str = "text"  # text | csv | json-lines
    figures: bool = True
    # norm-equivalence constants: p -> (value, citation); shipped entries
    # carry proofs, user entries are trusted as configured
    sampling_constants: dict = field(
        default_factory=lambda: {
            Fraction(2): (Fraction(1), "Parseval identity"),
            "inf": (Fraction(1), "samples bounded by supremum"),
        }
    )
    interpolation_constants: dict = field(
        default_factory=lambda: {
            Fraction(2): (Fraction(1), "Parseval identity"),
        }
    )

    def with_precision(self, m: int) -> "CliConfig":
        if not (1 <= m <= 64):
            raise ValueError("precision must lie in [1, 64]")
        return replace(self, precision=m)


def _parse_p_key(key: str):
    if key == "inf":
        return "inf"
    return Fraction(key)


def load_config(path: str | None = None) -> CliConfig:
    """Defaults, then JSON overrides from path or $BANDLIM_CONFIG."""
    cfg = CliConfig()
    path = path or os.environ.get("BANDLIM_CONFIG")
    if not path:
        return cfg
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    budget_kwargs = {
        k: int(v) for k, v in raw.get("budget", {}).items()
    }
    interp = dict(cfg.interpolation_constants)
    for key, entry in raw.get("interpolation_constants", {}).items():
        interp[_parse_p_key(key)] = (Fraction(entry["value"]), entry.get("citation", "user supplied"))
    samp = dict(cfg.sampling_constants)
    for key, entry in raw.get("sampling_constants", {}).items():
        samp[_parse_p_key(key)] = (Fraction(entry["value"]), entry.get("citation", "user supplied"))
    return CliConfig(
        precision=int(raw.get("precision", cfg.precision)),
        budget=replace(DEFAULT_BUDGET, **budget_kwargs),
        output_format=raw.get("output_format", cfg.output_format),
        figures=bool(raw.get("figures", cfg.figures)),
        sampling_constants=samp,
        interpolation_constants=interp,
    )
