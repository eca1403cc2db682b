"""Flat, human-editable run configuration.

One `key = value` per line, '#' starts a comment, `marker` may repeat.
Unknown keys are rejected with line-level diagnostics.  Lengths are in the
same length units as the domain; angles are radians.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .activity import ActivityMeasure
from .geometry import ConvexDomain, Line, WindowFamily
from .webs import MarkerConfig, STOP_IMMEDIATE, STOP_TANGENCY

_KNOWN_KEYS = {
    "domain", "family", "activity", "marker", "stop_rule", "replicas", "seed",
    "eps_x", "eps_phi", "out", "n_field", "n_web", "probes", "method", "input",
    "subset_cap", "line_cap", "pad",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    domain: ConvexDomain
    family_kind: str = "concentric"
    family_origin: Optional[Tuple[float, float]] = None
    activity: ActivityMeasure = None
    markers: List[Tuple[Line, Tuple[float, float]]] = field(default_factory=list)
    stop_rule: str = STOP_TANGENCY
    replicas: int = 1
    seed: int = 0
    eps_x: float = 0.02
    eps_phi: float = 0.02
    out: str = "."
    n_field: int = 10000
    n_web: int = 10000
    probes: int = 1
    method: str = "window"
    input: Optional[str] = None
    line_cap: int = 8
    pad: float = 0.1
    text: str = ""

    def family(self) -> WindowFamily:
        if self.family_kind == "concentric":
            return WindowFamily(self.domain, "concentric")
        return WindowFamily(self.domain, "homothety", origin=self.family_origin)

    def marker_config(self) -> MarkerConfig:
        return MarkerConfig(list(self.markers))

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()[:16]

    @property
    def lam(self) -> float:
        return self.activity.lam if self.activity is not None else 0.0


def _parse_domain(val: str, lineno: int) -> ConvexDomain:
    w = val.split()
    try:
        if w[0] == "disc":
            return ConvexDomain.disc((float(w[1]), float(w[2])), float(w[3]))
        if w[0] == "square":
            return ConvexDomain.square((float(w[1]), float(w[2])), float(w[3]))
        if w[0] == "polygon":
            vals = [float(x) for x in w[1:]]
            return ConvexDomain.polygon(list(zip(vals[::2], vals[1::2])))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"line {lineno}: bad domain spec {val!r}: {exc}")
    raise ConfigError(f"line {lineno}: unknown domain kind {w[0]!r}")


def _parse_activity(val: str, lineno: int) -> ActivityMeasure:
    w = val.split()
    try:
        if w[0] == "homogeneous":
            return ActivityMeasure.homogeneous(float(w[1]))
        if w[0] == "anisotropic":
            return ActivityMeasure.anisotropic(float(w[1]), float(w[2]))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"line {lineno}: bad activity spec {val!r}: {exc}")
    raise ConfigError(f"line {lineno}: unknown activity kind {w[0]!r}")


def parse_config(text: str) -> RunConfig:
    domain = None
    kv: Dict[str, str] = {}
    markers = []
    family_words = ["concentric"]
    activity = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key == "domain":
            domain = _parse_domain(val, lineno)
        elif key == "family":
            family_words = val.split()
            if family_words[0] not in ("concentric", "homothety"):
                raise ConfigError(f"line {lineno}: unknown family {val!r}")
        elif key == "activity":
            activity = _parse_activity(val, lineno)
        elif key == "marker":
            w = val.split()
            if len(w) != 4:
                raise ConfigError(f"line {lineno}: marker wants 'phi rho x y'")
            line_ = Line(float(w[0]), float(w[1]))
            pt = (float(w[2]), float(w[3]))
            if not line_.contains(pt, tol=1e-6):
                raise ConfigError(f"line {lineno}: marker point {pt} not on its line")
            markers.append((line_, pt))
        else:
            kv[key] = val
    if domain is None:
        raise ConfigError("missing required key 'domain'")
    if activity is None:
        activity = ActivityMeasure.homogeneous(0.0)
    cfg = RunConfig(domain=domain, activity=activity, markers=markers, text=text)
    if family_words[0] == "homothety":
        cfg.family_kind = "homothety"
        if len(family_words) == 3:
            cfg.family_origin = (float(family_words[1]), float(family_words[2]))
    try:
        if "stop_rule" in kv:
            if kv["stop_rule"] not in (STOP_TANGENCY, STOP_IMMEDIATE):
                raise ConfigError(f"unknown stop_rule {kv['stop_rule']!r}")
            cfg.stop_rule = kv["stop_rule"]
        for key, conv in (("replicas", int), ("seed", int), ("eps_x", float),
                          ("eps_phi", float), ("n_field", int), ("n_web", int),
                          ("probes", int), ("line_cap", int), ("pad", float)):
            if key in kv:
                setattr(cfg, key, conv(kv[key]))
        if "out" in kv:
            cfg.out = kv["out"]
        if "method" in kv:
            if kv["method"] not in ("window", "exact"):
                raise ConfigError(f"unknown method {kv['method']!r}")
            cfg.method = kv["method"]
        if "input" in kv:
            cfg.input = kv["input"]
    except ValueError as exc:
        raise ConfigError(str(exc))
    # validate module preconditions early
    for i, (ln, pt) in enumerate(markers):
        if not domain.contains(pt, tol=1e-7):
            raise ConfigError(f"marker {i} point {pt} outside the domain")
    cfg.marker_config()  # raises on invariant violations
    return cfg


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
