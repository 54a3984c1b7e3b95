"""All five effect-size measures computed on one (positive, negative) pair."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

from . import core_stats
from .core_stats import Samples, as_array
from .errors import OvlstatError
from .overlap import OverlapMethod, direction, estimate_ovl, gssmd_from_ovl

MEASURES = ("z_factor", "ssmd", "robust_z_factor", "robust_ssmd", "gssmd")


@dataclass
class EffectSizeReport:
    """Per-measure values; a measure that could not be computed is None
    and its error message is kept in ``errors``."""

    n_pos: int
    n_neg: int
    z_factor: Optional[float]
    ssmd: Optional[float]
    robust_z_factor: Optional[float]
    robust_ssmd: Optional[float]
    gssmd: Optional[float]
    ovl: Optional[float]
    method: str
    params: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def effect_sizes(pos: Samples, neg: Samples, method="histogram", bins="auto", bandwidth="auto") -> EffectSizeReport:
    """Compute every measure, recording degenerate ones instead of raising."""
    p, n = as_array(pos), as_array(neg)
    method = OverlapMethod.parse(method)
    values: dict = {}
    errors: dict = {}
    for name in ("z_factor", "ssmd", "robust_z_factor", "robust_ssmd"):
        try:
            values[name] = getattr(core_stats, name)(p, n)
        except OvlstatError as exc:
            values[name] = None
            errors[name] = f"{type(exc).__name__}: {exc}"

    ovl = None
    params: dict = {}
    method_name = method.value
    try:
        est = estimate_ovl(p, n, method, bins, bandwidth)
        ovl = est.ovl
        params = dict(est.params)
        values["gssmd"] = gssmd_from_ovl(est.ovl, direction(p, n))
    except OvlstatError as exc:
        values["gssmd"] = None
        errors["gssmd"] = f"{type(exc).__name__}: {exc}"

    return EffectSizeReport(
        n_pos=int(p.size),
        n_neg=int(n.size),
        ovl=ovl,
        method=method_name,
        params=params,
        errors=errors,
        **values,
    )
