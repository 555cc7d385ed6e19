"""Mechanism descriptions, joint domains, and config loading.

Models are immutable after load (frozen dataclasses holding tuples), so they
can be shared freely across threads.  Joint vectors are plain sequences /
numpy arrays; operations validate dimensions instead of wrapping them in a
dedicated class.

Config files are YAML documents with a ``schema: 1`` field; see
``docs/MODEL_FORMAT.md`` for the full schema.  Lengths are SI metres and
angles radians internally; a config may declare ``units`` and values are
converted once at load time.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import yaml

SCHEMA_VERSION = 1

_LENGTH_UNITS = {"m": 1.0, "cm": 0.01, "mm": 0.001}
_ANGLE_UNITS = {"rad": 1.0, "deg": math.pi / 180.0}


class ModelError(ValueError):
    """Raised when a model config is unparseable or violates an invariant."""


@dataclass(frozen=True)
class JointLimits:
    """Per-joint closed intervals [q_min, q_max] plus a security threshold.

    The threshold is the width of the warning band inside each end of the
    interval; force laws are null on [q_min + threshold, q_max - threshold].
    """

    q_min: tuple[float, ...]
    q_max: tuple[float, ...]
    threshold: tuple[float, ...]

    def __post_init__(self):
        n = len(self.q_min)
        if len(self.q_max) != n or len(self.threshold) != n:
            raise ModelError("limits: q_min, q_max, threshold must have equal length")
        for i, (lo, hi, d) in enumerate(zip(self.q_min, self.q_max, self.threshold)):
            if not lo < hi:
                raise ModelError(f"limits[{i}]: q_min ({lo}) must be < q_max ({hi})")
            if not 0.0 <= d < (hi - lo) / 2.0:
                raise ModelError(
                    f"limits[{i}]: threshold ({d}) must be in [0, (q_max - q_min)/2)"
                )

    def __len__(self) -> int:
        return len(self.q_min)


def joint_domain_contains(limits: JointLimits, q: Sequence[float]) -> bool:
    """True iff q_min_i <= q_i <= q_max_i for every joint (closed intervals)."""
    if len(q) != len(limits):
        raise ModelError(f"joint vector has {len(q)} entries, limits expect {len(limits)}")
    return all(lo <= qi <= hi for qi, lo, hi in zip(q, limits.q_min, limits.q_max))


@dataclass(frozen=True)
class FiveBarModel:
    """Symmetric five-bar linkage: two actuated hips, two distal links.

    Geometry is fixed by the lengths L0..L4 with the symmetry L3 = L1 and
    L4 = L2 enforced.  Convention: base_a sits at the origin and base_b at
    (L0, 0) unless the config overrides both (the separation must still be
    L0).  theta1/theta2 are the actuated hip angles measured from +x.
    """

    l0: float
    l1: float
    l2: float
    l3: float
    l4: float
    base_a: tuple[float, float] = (0.0, 0.0)
    base_b: tuple[float, float] | None = None
    limits: JointLimits = field(
        default_factory=lambda: JointLimits((-math.pi, -math.pi), (math.pi, math.pi), (0.0, 0.0))
    )

    def __post_init__(self):
        if self.base_b is None:
            object.__setattr__(self, "base_b", (self.base_a[0] + self.l0, self.base_a[1]))
        for name in ("l0", "l1", "l2", "l3", "l4"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ModelError(f"{name}: lengths must be finite and > 0 (got {v!r})")
        if self.l3 != self.l1:
            raise ModelError(f"l3 ({self.l3}) must equal l1 ({self.l1}): symmetric construction")
        if self.l4 != self.l2:
            raise ModelError(f"l4 ({self.l4}) must equal l2 ({self.l2}): symmetric construction")
        sep = math.hypot(self.base_b[0] - self.base_a[0], self.base_b[1] - self.base_a[1])
        if abs(sep - self.l0) > 1e-9 * self.l0:
            raise ModelError(f"base_b - base_a has norm {sep}, expected l0 = {self.l0}")
        if len(self.limits) != 2:
            raise ModelError("limits: five-bar has exactly 2 actuated joints")

    @property
    def reach_outer(self) -> float:
        """Outer radius of each leg's reach annulus."""
        return self.l1 + self.l2

    @property
    def reach_inner(self) -> float:
        """Inner radius of each leg's reach annulus."""
        return abs(self.l1 - self.l2)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "kind": "five_bar",
            "lengths": {"L0": self.l0, "L1": self.l1, "L2": self.l2, "L3": self.l3, "L4": self.l4},
            "base_a": list(self.base_a),
            "base_b": list(self.base_b),
            "limits": _limits_to_dict(self.limits, ("theta1", "theta2")),
        }


@dataclass(frozen=True)
class ChainJoint:
    kind: str  # "revolute" | "prismatic"
    axis: tuple[float, float, float]
    anchor: tuple[float, float, float]

    def __post_init__(self):
        if self.kind not in ("revolute", "prismatic"):
            raise ModelError(f"joint kind must be revolute or prismatic, got {self.kind!r}")
        n = math.sqrt(sum(a * a for a in self.axis))
        if abs(n - 1.0) > 1e-12:
            raise ModelError(f"joint axis {self.axis} has norm {n}, must be unit (tol 1e-12)")


@dataclass(frozen=True)
class SerialChainModel:
    """Generic serial chain for the twist Jacobian: ordered joints + tool point.

    Axes and anchors are given in the world frame at the home posture q = 0;
    forward kinematics poses them for arbitrary q.
    """

    joints: tuple[ChainJoint, ...]
    tool: tuple[float, float, float]
    limits: JointLimits

    def __post_init__(self):
        if len(self.joints) < 1:
            raise ModelError("serial chain needs at least 1 joint")
        if len(self.limits) != len(self.joints):
            raise ModelError(
                f"limits cover {len(self.limits)} joints, chain has {len(self.joints)}"
            )

    @property
    def n_joints(self) -> int:
        return len(self.joints)

    def is_planar(self) -> bool:
        """True when all motion stays in the z = 0 plane.

        Revolute axes must be +-z, prismatic axes in-plane, and all anchors
        and the tool must sit at z = 0.
        """
        for j in self.joints:
            if j.anchor[2] != 0.0:
                return False
            if j.kind == "revolute":
                if abs(abs(j.axis[2]) - 1.0) > 1e-12:
                    return False
            else:
                if j.axis[2] != 0.0:
                    return False
        return self.tool[2] == 0.0

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "kind": "serial_chain",
            "joints": [
                {
                    "kind": j.kind,
                    "axis": list(j.axis),
                    "anchor": list(j.anchor),
                    "limits": {
                        "min": self.limits.q_min[i],
                        "max": self.limits.q_max[i],
                        "threshold": self.limits.threshold[i],
                    },
                }
                for i, j in enumerate(self.joints)
            ],
            "tool": list(self.tool),
        }


Model = Union[FiveBarModel, SerialChainModel]


def _limits_to_dict(limits: JointLimits, names: Iterable[str]) -> dict:
    return {
        name: {"min": limits.q_min[i], "max": limits.q_max[i], "threshold": limits.threshold[i]}
        for i, name in enumerate(names)
    }


def _parse_limits_entry(entry: dict, where: str, scale: float) -> tuple[float, float, float]:
    try:
        lo = float(entry["min"]) * scale
        hi = float(entry["max"]) * scale
    except (KeyError, TypeError, ValueError) as e:
        raise ModelError(f"{where}: needs numeric 'min' and 'max' ({e})") from e
    d = float(entry.get("threshold", 0.0)) * scale
    return lo, hi, d


def _unit_scales(doc: dict) -> tuple[float, float]:
    units = doc.get("units", {})
    if not isinstance(units, dict):
        raise ModelError("units: must be a mapping like {length: m, angle: rad}")
    lu = units.get("length", "m")
    au = units.get("angle", "rad")
    if lu not in _LENGTH_UNITS:
        raise ModelError(f"units.length: unsupported {lu!r} (use one of {sorted(_LENGTH_UNITS)})")
    if au not in _ANGLE_UNITS:
        raise ModelError(f"units.angle: unsupported {au!r} (use one of {sorted(_ANGLE_UNITS)})")
    return _LENGTH_UNITS[lu], _ANGLE_UNITS[au]


def _load_five_bar(doc: dict) -> FiveBarModel:
    ls, as_ = _unit_scales(doc)
    lengths = doc.get("lengths")
    if not isinstance(lengths, dict):
        raise ModelError("lengths: required mapping with keys L0, L1, L2 (L3, L4 optional)")
    vals = {}
    for key in ("L0", "L1", "L2"):
        if key not in lengths:
            raise ModelError(f"lengths.{key}: required")
        vals[key] = float(lengths[key]) * ls
    # Symmetric by default: omitted L3/L4 inherit L1/L2.
    vals["L3"] = float(lengths.get("L3", lengths["L1"])) * ls
    vals["L4"] = float(lengths.get("L4", lengths["L2"])) * ls

    base_a = tuple(float(v) * ls for v in doc.get("base_a", (0.0, 0.0)))
    base_b = doc.get("base_b")
    if base_b is not None:
        base_b = tuple(float(v) * ls for v in base_b)
    if len(base_a) != 2 or (base_b is not None and len(base_b) != 2):
        raise ModelError("base_a/base_b: must be 2-vectors")

    limdoc = doc.get("limits", {})
    default = {"min": -math.pi / as_, "max": math.pi / as_, "threshold": 0.0}
    l1 = _parse_limits_entry(limdoc.get("theta1", default), "limits.theta1", as_)
    l2 = _parse_limits_entry(limdoc.get("theta2", default), "limits.theta2", as_)
    limits = JointLimits((l1[0], l2[0]), (l1[1], l2[1]), (l1[2], l2[2]))
    return FiveBarModel(
        l0=vals["L0"], l1=vals["L1"], l2=vals["L2"], l3=vals["L3"], l4=vals["L4"],
        base_a=base_a, base_b=base_b, limits=limits,
    )


def _load_serial_chain(doc: dict) -> SerialChainModel:
    ls, as_ = _unit_scales(doc)
    jdocs = doc.get("joints")
    if not isinstance(jdocs, list) or not jdocs:
        raise ModelError("joints: required non-empty list")
    joints = []
    q_min, q_max, thr = [], [], []
    for i, jd in enumerate(jdocs):
        kind = jd.get("kind", "revolute")
        axis = tuple(float(v) for v in jd.get("axis", (0.0, 0.0, 1.0)))
        anchor = tuple(float(v) * ls for v in jd.get("anchor", (0.0, 0.0, 0.0)))
        if len(axis) != 3 or len(anchor) != 3:
            raise ModelError(f"joints[{i}]: axis and anchor must be 3-vectors")
        joints.append(ChainJoint(kind=kind, axis=axis, anchor=anchor))
        scale = as_ if kind == "revolute" else ls
        default = (
            {"min": -math.pi / as_, "max": math.pi / as_, "threshold": 0.0}
            if kind == "revolute"
            else {"min": 0.0, "max": 1.0 / ls, "threshold": 0.0}
        )
        lo, hi, d = _parse_limits_entry(jd.get("limits", default), f"joints[{i}].limits", scale)
        q_min.append(lo)
        q_max.append(hi)
        thr.append(d)
    tool = doc.get("tool")
    if tool is None or len(tool) != 3:
        raise ModelError("tool: required 3-vector")
    tool = tuple(float(v) * ls for v in tool)
    return SerialChainModel(
        joints=tuple(joints), tool=tool,
        limits=JointLimits(tuple(q_min), tuple(q_max), tuple(thr)),
    )


def load_model(path: str | Path) -> Model:
    """Load and validate a mechanism config; raises ModelError with field names."""
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        raise ModelError(f"{path}: parse error: {e}") from e
    if not isinstance(doc, dict):
        raise ModelError(f"{path}: document must be a mapping")
    schema = doc.get("schema")
    if schema != SCHEMA_VERSION:
        raise ModelError(f"{path}: schema must be {SCHEMA_VERSION}, got {schema!r}")
    kind = doc.get("kind")
    if kind == "five_bar":
        return _load_five_bar(doc)
    if kind == "serial_chain":
        return _load_serial_chain(doc)
    raise ModelError(f"{path}: kind must be 'five_bar' or 'serial_chain', got {kind!r}")


def save_model(model: Model, path: str | Path) -> None:
    """Serialize a model back to YAML (SI units); round-trips through load_model."""
    Path(path).write_text(yaml.safe_dump(model.to_dict(), sort_keys=True))


def model_hash(model: Model) -> str:
    """Stable hex digest of the model's canonical form (used to pair atlases)."""
    canon = json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def bundled_model_path(name: str) -> Path:
    """Path of a model config shipped with the package (e.g. 'fivebar_6_8_5')."""
    p = Path(__file__).parent / "models" / f"{name}.yaml"
    if not p.exists():
        available = sorted(q.stem for q in p.parent.glob("*.yaml"))
        raise ModelError(f"no bundled model {name!r}; available: {available}")
    return p


def resolve_model(ref: str | Path) -> Model:
    """Load a model from a path, or from the bundled set when ref is a bare name."""
    p = Path(ref)
    if p.exists():
        return load_model(p)
    return load_model(bundled_model_path(str(ref)))
