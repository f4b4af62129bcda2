"""World model: service area, users, ground anchors, radio parameters, system kinds.

A Scenario is an immutable description of one simulated world. Scenarios are
loaded from YAML files (see ``load_scenario``) or built programmatically; all
lengths are meters, powers dBm, frequencies Hz, angles degrees, and the unit
is part of the field name.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Union

import numpy as np
import yaml


class ScenarioError(ValueError):
    """Base class for scenario file problems."""


class ParseError(ScenarioError):
    """The file is not well-formed YAML or not a mapping."""


class ValidationError(ScenarioError):
    """An invariant is violated; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ValidationError(path, message)


@dataclass(frozen=True)
class Area:
    """Axis-aligned service rectangle with its origin at a corner."""

    width_m: float = 3000.0
    height_m: float = 3000.0

    def __post_init__(self):
        _require(self.width_m > 0, "area.width_m", "must be > 0")
        _require(self.height_m > 0, "area.height_m", "must be > 0")

    @property
    def center(self) -> tuple[float, float]:
        return (self.width_m / 2.0, self.height_m / 2.0)

    def contains(self, x_m: float, y_m: float) -> bool:
        return 0.0 <= x_m <= self.width_m and 0.0 <= y_m <= self.height_m


@dataclass(frozen=True)
class Ue:
    """A ground user terminal at a fixed planar position."""

    id: int
    x_m: float
    y_m: float
    cluster_id: Optional[int] = None

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x_m, self.y_m)


@dataclass(frozen=True)
class Anchor:
    """A ground power-supply point a tether can connect to."""

    id: int
    x_m: float
    y_m: float
    height_m: float = 50.0

    def __post_init__(self):
        _require(self.height_m >= 0, f"anchors[{self.id}].height_m", "must be >= 0")

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x_m, self.y_m)

    @property
    def top(self) -> tuple[float, float, float]:
        """The tether attachment point (anchor position at anchor height)."""
        return (self.x_m, self.y_m, self.height_m)


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power and receiver sensitivity; their gap is the loss budget."""

    pt_dbm: float = 30.0
    pmin_dbm: float = -70.0

    def __post_init__(self):
        _require(self.threshold_db > 0, "link.pt_dbm/pmin_dbm",
                 "pt_dbm - pmin_dbm must be > 0")

    @property
    def threshold_db(self) -> float:
        """Maximum tolerable mean path loss in dB."""
        return self.pt_dbm - self.pmin_dbm


@dataclass(frozen=True)
class ChannelParams:
    """Air-to-ground propagation constants.

    ``a`` and ``b`` shape the sight-probability sigmoid over elevation angle;
    ``eta_los_db``/``eta_nlos_db`` are the excess losses of the two link
    states. Defaults are the common urban values; all four are configurable
    per scenario.
    """

    fc_hz: float = 2.0e9
    a: float = 9.61
    b: float = 0.16
    eta_los_db: float = 1.0
    eta_nlos_db: float = 20.0

    def __post_init__(self):
        _require(self.fc_hz > 0, "channel.fc_hz", "must be > 0")
        _require(self.b > 0, "channel.b", "must be > 0")
        _require(self.eta_los_db >= 0, "channel.eta_los_db", "must be >= 0")
        _require(self.eta_nlos_db >= self.eta_los_db, "channel.eta_nlos_db",
                 "must be >= eta_los_db")


# --- system disciplines -----------------------------------------------------

@dataclass(frozen=True)
class UavNoSwap:
    """Free-flying UAV limited by one battery charge."""

    battery_min: float = 30.0

    def __post_init__(self):
        _require(self.battery_min > 0, "system.battery_min", "must be > 0")


@dataclass(frozen=True)
class UavSwap:
    """Free-flying UAV with seamless replacement of depleted airframes."""


@dataclass(frozen=True)
class Tuav:
    """UAV permanently tethered to a single anchor."""

    tether_m: float = 150.0
    min_incl_deg: float = 0.0

    def __post_init__(self):
        _require(self.tether_m > 0, "system.tether_m", "must be > 0")
        _require(0 <= self.min_incl_deg < 90, "system.min_incl_deg",
                 "must be in [0, 90)")


@dataclass(frozen=True)
class Ituav:
    """UAV that tethers intermittently, choosing among several anchors."""

    tether_m: float = 150.0
    min_incl_deg: float = 0.0
    n_anchors: int = 10

    def __post_init__(self):
        _require(self.tether_m > 0, "system.tether_m", "must be > 0")
        _require(0 <= self.min_incl_deg < 90, "system.min_incl_deg",
                 "must be in [0, 90)")
        _require(self.n_anchors >= 1, "system.n_anchors", "must be >= 1")


@dataclass(frozen=True)
class MultiTuav:
    """k tethered UAVs, each pinned to its own anchor."""

    k: int = 2
    tether_m: float = 150.0
    min_incl_deg: float = 0.0

    def __post_init__(self):
        _require(self.k >= 1, "system.k", "must be >= 1")
        _require(self.tether_m > 0, "system.tether_m", "must be > 0")
        _require(0 <= self.min_incl_deg < 90, "system.min_incl_deg",
                 "must be in [0, 90)")


@dataclass(frozen=True)
class MultiItuav:
    """k intermittently tethered UAVs sharing one anchor pool."""

    k: int = 2
    tether_m: float = 150.0
    min_incl_deg: float = 0.0
    n_anchors: int = 4

    def __post_init__(self):
        _require(self.k >= 1, "system.k", "must be >= 1")
        _require(self.tether_m > 0, "system.tether_m", "must be > 0")
        _require(0 <= self.min_incl_deg < 90, "system.min_incl_deg",
                 "must be in [0, 90)")
        _require(self.n_anchors >= 1, "system.n_anchors", "must be >= 1")
        _require(self.k <= self.n_anchors, "system.k",
                 "must be <= n_anchors")


SystemKind = Union[UavNoSwap, UavSwap, Tuav, Ituav, MultiTuav, MultiItuav]

_SYSTEM_LABEL_RE = re.compile(
    r"^(?:(uav|uav_swap)"
    r"|uav_noswap_([\d.]+)"
    r"|(tuav)"
    r"|tuav_x(\d+)"
    r"|ituav_(\d+)x(\d+)"
    r"|ituav(?:_(\d+))?)$"
)


def parse_system(label: str, **overrides) -> SystemKind:
    """Build a SystemKind from a compact text label.

    Grammar: ``uav``/``uav_swap``, ``uav_noswap_<battery_min>``, ``tuav``,
    ``tuav_x<k>``, ``ituav``/``ituav_<n_anchors>``, ``ituav_<k>x<n_anchors>``.
    Keyword overrides (tether_m, min_incl_deg, ...) are applied on top.
    """
    m = _SYSTEM_LABEL_RE.match(label.strip().lower())
    if m is None:
        raise ValidationError("system.kind", f"unknown system label {label!r}")
    swap, noswap_b, tuav, tuav_k, it_k, it_n, itu_n = m.groups()
    if swap is not None:
        kind: SystemKind = UavSwap()
    elif noswap_b is not None:
        kind = UavNoSwap(battery_min=float(noswap_b))
    elif tuav is not None:
        kind = Tuav()
    elif tuav_k is not None:
        kind = MultiTuav(k=int(tuav_k))
    elif it_k is not None:
        kind = MultiItuav(k=int(it_k), n_anchors=int(it_n))
    else:
        kind = Ituav(n_anchors=int(itu_n)) if itu_n is not None else Ituav()
    if overrides:
        valid = {f.name for f in fields(kind)}
        unknown = set(overrides) - valid
        if unknown:
            raise ValidationError("system", f"fields {sorted(unknown)} not valid "
                                            f"for {system_label(kind)!r}")
        kind = replace(kind, **overrides)
    return kind


def system_label(kind: SystemKind) -> str:
    """Inverse of parse_system for the structural part of the label."""
    if isinstance(kind, UavSwap):
        return "uav_swap"
    if isinstance(kind, UavNoSwap):
        return f"uav_noswap_{kind.battery_min:g}"
    if isinstance(kind, Tuav):
        return "tuav"
    if isinstance(kind, MultiTuav):
        return f"tuav_x{kind.k}"
    if isinstance(kind, MultiItuav):
        return f"ituav_{kind.k}x{kind.n_anchors}"
    if isinstance(kind, Ituav):
        return f"ituav_{kind.n_anchors}"
    raise TypeError(f"not a SystemKind: {kind!r}")


# --- scenario ----------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """Immutable world description; safe to share across workers."""

    area: Area = field(default_factory=Area)
    ues: tuple[Ue, ...] = ()
    anchors: tuple[Anchor, ...] = ()
    channel: ChannelParams = field(default_factory=ChannelParams)
    link: LinkBudget = field(default_factory=LinkBudget)
    seed: int = 0
    system: Optional[SystemKind] = None

    def __post_init__(self):
        object.__setattr__(self, "ues", tuple(self.ues))
        object.__setattr__(self, "anchors", tuple(self.anchors))
        seen_ue = set()
        for ue in self.ues:
            _require(ue.id not in seen_ue, f"ues[{ue.id}].id", "duplicate id")
            seen_ue.add(ue.id)
            _require(self.area.contains(ue.x_m, ue.y_m),
                     f"ues[{ue.id}]", "position outside area")
        seen_an = set()
        for an in self.anchors:
            _require(an.id not in seen_an, f"anchors[{an.id}].id", "duplicate id")
            seen_an.add(an.id)
            _require(self.area.contains(an.x_m, an.y_m),
                     f"anchors[{an.id}]", "position outside area")

    def ue_xy(self) -> np.ndarray:
        """UE positions as an (n, 2) array, ordered as stored."""
        return np.array([[u.x_m, u.y_m] for u in self.ues], dtype=float).reshape(-1, 2)


def sample_anchors(n: int, area: Area, height_m: float,
                   rng: np.random.Generator) -> list[Anchor]:
    """Draw n anchors uniformly and independently in the area."""
    if n < 1:
        raise ValueError("n must be >= 1")
    xy = rng.uniform([0.0, 0.0], [area.width_m, area.height_m], size=(n, 2))
    return [Anchor(id=i, x_m=float(x), y_m=float(y), height_m=height_m)
            for i, (x, y) in enumerate(xy)]


def sample_uniform_ues(n: int, area: Area, rng: np.random.Generator) -> list[Ue]:
    """Draw n users uniformly in the area (no cluster structure)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    xy = rng.uniform([0.0, 0.0], [area.width_m, area.height_m], size=(n, 2))
    return [Ue(id=i, x_m=float(x), y_m=float(y)) for i, (x, y) in enumerate(xy)]


# --- file I/O ----------------------------------------------------------------

_DEFAULT_N_UES = 200
_DEFAULT_N_ANCHORS = 10
_DEFAULT_ANCHOR_HEIGHT_M = 50.0


def _check_keys(mapping: dict, allowed: set[str], path: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ValidationError(path, f"unknown fields {sorted(unknown)}")


def _number(mapping: dict, key: str, path: str, default):
    val = mapping.get(key, default)
    if val is None:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ValidationError(f"{path}.{key}", f"expected a number, got {val!r}")
    return float(val)


def _build_section(cls, mapping: dict, path: str, float_fields: dict):
    _check_keys(mapping, set(float_fields), path)
    kwargs = {}
    for name, default in float_fields.items():
        v = _number(mapping, name, path, default)
        if v is not None:
            kwargs[name] = v
    return cls(**kwargs)


def load_scenario(path: str, seed: Optional[int] = None) -> Scenario:
    """Load and validate a scenario file, filling defaults for omitted fields.

    ``seed`` overrides the file's seed when given. UEs and anchors may be
    listed explicitly or described by generation parameters, in which case
    they are sampled deterministically from the scenario seed.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return scenario_from_yaml(text, seed=seed)


def scenario_from_yaml(text: str, seed: Optional[int] = None) -> Scenario:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"not valid YAML: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ParseError("scenario file must be a mapping at top level")
    return scenario_from_dict(doc, seed=seed)


def scenario_from_dict(doc: dict, seed: Optional[int] = None) -> Scenario:
    _check_keys(doc, {"seed", "area", "channel", "link", "system",
                      "ues", "anchors"}, "scenario")

    file_seed = doc.get("seed", 0)
    if isinstance(file_seed, bool) or not isinstance(file_seed, int):
        raise ValidationError("seed", f"expected an integer, got {file_seed!r}")
    eff_seed = int(seed) if seed is not None else int(file_seed)

    area = _build_section(Area, doc.get("area", {}) or {}, "area",
                          {"width_m": 3000.0, "height_m": 3000.0})
    channel = _build_section(ChannelParams, doc.get("channel", {}) or {}, "channel",
                             {"fc_hz": 2.0e9, "a": 9.61, "b": 0.16,
                              "eta_los_db": 1.0, "eta_nlos_db": 20.0})
    link = _build_section(LinkBudget, doc.get("link", {}) or {}, "link",
                          {"pt_dbm": 30.0, "pmin_dbm": -70.0})

    system = None
    sys_doc = doc.get("system")
    if sys_doc is not None:
        if not isinstance(sys_doc, dict) or "kind" not in sys_doc:
            raise ValidationError("system", "must be a mapping with a 'kind' field")
        overrides = {k: v for k, v in sys_doc.items() if k != "kind"}
        system = parse_system(str(sys_doc["kind"]), **overrides)

    rng = np.random.default_rng(eff_seed & 0xFFFFFFFFFFFFFFFF)
    ues = _load_ues(doc.get("ues", {}), area, rng)
    anchors = _load_anchors(doc.get("anchors", {}), area, rng)

    return Scenario(area=area, ues=tuple(ues), anchors=tuple(anchors),
                    channel=channel, link=link, seed=eff_seed, system=system)


def _load_ues(section, area: Area, rng: np.random.Generator) -> list[Ue]:
    if isinstance(section, list):
        ues = []
        for i, row in enumerate(section):
            if not isinstance(row, dict):
                raise ValidationError(f"ues[{i}]", "expected a mapping")
            _check_keys(row, {"id", "x_m", "y_m", "cluster_id"}, f"ues[{i}]")
            if "id" not in row or "x_m" not in row or "y_m" not in row:
                raise ValidationError(f"ues[{i}]", "id, x_m and y_m are required")
            cid = row.get("cluster_id")
            ues.append(Ue(id=int(row["id"]), x_m=float(row["x_m"]),
                          y_m=float(row["y_m"]),
                          cluster_id=None if cid is None else int(cid)))
        return ues
    if section is None:
        section = {}
    if not isinstance(section, dict):
        raise ValidationError("ues", "expected a list or a generation mapping")
    _check_keys(section, {"n", "cov"}, "ues")
    n = section.get("n", _DEFAULT_N_UES)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError("ues.n", f"expected a positive integer, got {n!r}")
    cov = _number(section, "cov", "ues", 1.0)
    if cov < 1.0:
        raise ValidationError("ues.cov", "must be >= 1 (1 = uniform)")
    if cov == 1.0:
        return sample_uniform_ues(n, area, rng)
    # Clustered populations need the calibrated cluster process; imported
    # lazily to keep the world model importable on its own.
    from . import pointprocess

    params = pointprocess.calibrate_cov(cov, n, area, rng)
    return pointprocess.sample_thomas(params, area, rng)


def _load_anchors(section, area: Area, rng: np.random.Generator) -> list[Anchor]:
    if isinstance(section, list):
        anchors = []
        for i, row in enumerate(section):
            if not isinstance(row, dict):
                raise ValidationError(f"anchors[{i}]", "expected a mapping")
            _check_keys(row, {"id", "x_m", "y_m", "height_m"}, f"anchors[{i}]")
            if "id" not in row or "x_m" not in row or "y_m" not in row:
                raise ValidationError(f"anchors[{i}]", "id, x_m and y_m are required")
            anchors.append(Anchor(id=int(row["id"]), x_m=float(row["x_m"]),
                                  y_m=float(row["y_m"]),
                                  height_m=float(row.get("height_m",
                                                         _DEFAULT_ANCHOR_HEIGHT_M))))
        return anchors
    if section is None:
        section = {}
    if not isinstance(section, dict):
        raise ValidationError("anchors", "expected a list or a generation mapping")
    _check_keys(section, {"n", "height_m"}, "anchors")
    n = section.get("n", _DEFAULT_N_ANCHORS)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError("anchors.n", f"expected a positive integer, got {n!r}")
    height = _number(section, "height_m", "anchors", _DEFAULT_ANCHOR_HEIGHT_M)
    return sample_anchors(n, area, height, rng)


def scenario_to_dict(sc: Scenario) -> dict:
    """Plain-dict form with explicit UE/anchor lists; loads back to an equal Scenario."""
    doc: dict = {
        "seed": sc.seed,
        "area": {"width_m": sc.area.width_m, "height_m": sc.area.height_m},
        "channel": {"fc_hz": sc.channel.fc_hz, "a": sc.channel.a, "b": sc.channel.b,
                    "eta_los_db": sc.channel.eta_los_db,
                    "eta_nlos_db": sc.channel.eta_nlos_db},
        "link": {"pt_dbm": sc.link.pt_dbm, "pmin_dbm": sc.link.pmin_dbm},
        "ues": [{"id": u.id, "x_m": u.x_m, "y_m": u.y_m, "cluster_id": u.cluster_id}
                for u in sc.ues],
        "anchors": [{"id": a.id, "x_m": a.x_m, "y_m": a.y_m, "height_m": a.height_m}
                    for a in sc.anchors],
    }
    if sc.system is not None:
        sys_doc = {"kind": system_label(sc.system)}
        for f in fields(sc.system):
            sys_doc[f.name] = getattr(sc.system, f.name)
        doc["system"] = sys_doc
    return doc


def save_scenario(sc: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(scenario_to_dict(sc), fh, sort_keys=False)
