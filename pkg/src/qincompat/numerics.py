"""Shared numerical tolerances.

Every tolerance used by the package lives in one :class:`NumericsConfig`
record. Defaults can be overridden by pointing the ``QINCOMPAT_NUMERICS``
environment variable at a JSON file holding a subset of the fields.
"""
from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass

ENV_VAR = "QINCOMPAT_NUMERICS"


@dataclass(frozen=True)
class NumericsConfig:
    # hermiticity: symmetrize silently below herm_silent, reject above herm_error
    herm_silent: float = 1e-12
    herm_error: float = 1e-6
    # eigenvalues in [-psd_clamp * ||M||, 0] are treated as zero
    psd_clamp: float = 1e-12
    # |z| below which phi(z) = (e^z - 1)/z uses its Taylor series
    phi_taylor: float = 1e-4
    # relative support threshold on the spectrum of a state
    support_rel: float = 1e-12
    # largest allowed kernel-kernel block of a state derivative
    off_support: float = 1e-8
    # F is singular when lambda_min(F) <= singular_fisher * ||F||
    singular_fisher: float = 1e-10
    # unit trace / tracelessness
    trace_tol: float = 1e-10
    # ||A||_F below which a model is certified compatible
    compat_a: float = 1e-10
    # semidefinite solver defaults
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 200

    def replace(self, **changes) -> "NumericsConfig":
        return dataclasses.replace(self, **changes)


def load(path) -> NumericsConfig:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    known = {f.name for f in dataclasses.fields(NumericsConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown numerics fields in {path}: {sorted(unknown)}")
    return NumericsConfig(**data)


_config: NumericsConfig | None = None


def get() -> NumericsConfig:
    """Return the active configuration, reading ``QINCOMPAT_NUMERICS`` once."""
    global _config
    if _config is None:
        path = os.environ.get(ENV_VAR)
        _config = load(path) if path else NumericsConfig()
    return _config


def set_config(config: NumericsConfig | None) -> None:
    """Install ``config`` globally; ``None`` re-reads the environment on next use."""
    global _config
    _config = config
