"""Built-in FoV -> placement models and the pilot-study lookup table.

Each model is a low-order polynomial in the diagonal FoV (degrees), one per
(target, remote-user count). Coefficients are stored ascending:
``value = c[0] + c[1]*fov + c[2]*fov**2``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import InvalidInput, NotTabulated, UnsupportedScenario
from .fov import FieldOfView
from .layout import ConversationLayout, Placement, resolve_layout

RADIAN = "radian"
RADIUS = "radius"
TARGETS = (RADIAN, RADIUS)
SCENARIOS = (1, 2, 3, 4)
MODEL_FOV_RANGE = (10.0, 180.0)
SCHEMA_ID = "lifesize/placement-models/v1"

CLAMPED = "fov-clamped"


@dataclass(frozen=True)
class PlacementModel:
    target: str
    scenario: int
    coefficients: tuple[float, ...]
    fov_range: tuple[float, float] = MODEL_FOV_RANGE

    def __post_init__(self) -> None:
        if self.target not in TARGETS:
            raise InvalidInput(f"unknown model target {self.target!r}")
        if not self.coefficients:
            raise InvalidInput("model needs at least one coefficient")
        lo, hi = self.fov_range
        if not lo < hi:
            raise InvalidInput(f"bad FoV range {self.fov_range}")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, fov_deg: float) -> float:
        # Horner, highest power first
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * fov_deg + c
        return acc

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "scenario": self.scenario,
            "coefficients": list(self.coefficients),
            "fov_range": list(self.fov_range),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> PlacementModel:
        try:
            return cls(
                target=str(d["target"]),
                scenario=int(d["scenario"]),
                coefficients=tuple(float(c) for c in d["coefficients"]),
                fov_range=tuple(float(v) for v in d.get("fov_range", MODEL_FOV_RANGE)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed model entry: {exc}") from None


BUILTIN_MODELS: tuple[PlacementModel, ...] = (
    PlacementModel(RADIAN, 2, (20.20, 0.45, -0.0012)),
    PlacementModel(RADIAN, 3, (52.87, 0.22)),
    PlacementModel(RADIAN, 4, (61.79, 0.37)),
    PlacementModel(RADIUS, 1, (1.34, -0.0045)),
    PlacementModel(RADIUS, 2, (1.33, -0.0042)),
    PlacementModel(RADIUS, 3, (1.47, -0.0045)),
    PlacementModel(RADIUS, 4, (1.63, -0.0043)),
)


class ModelTable:
    """Read-only lookup of models keyed by (target, scenario)."""

    def __init__(self, models: Iterable[PlacementModel] = BUILTIN_MODELS):
        table: dict[tuple[str, int], PlacementModel] = {}
        for m in models:
            table[(m.target, m.scenario)] = m
        self._table = table

    def get(self, target: str, scenario: int) -> PlacementModel | None:
        return self._table.get((target, scenario))

    def __iter__(self):
        return iter(sorted(self._table.values(), key=lambda m: (m.target, m.scenario)))

    def __len__(self) -> int:
        return len(self._table)

    def replace(self, *models: PlacementModel) -> ModelTable:
        return ModelTable([*self._table.values(), *models])

    def to_dict(self) -> dict:
        return {"schema": SCHEMA_ID, "models": [m.to_dict() for m in self]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: Mapping, base: ModelTable | None = None) -> ModelTable:
        if d.get("schema") != SCHEMA_ID:
            raise InvalidInput(f"expected schema {SCHEMA_ID!r}, got {d.get('schema')!r}")
        models = [PlacementModel.from_dict(m) for m in d.get("models", [])]
        return base.replace(*models) if base is not None else cls(models)

    @classmethod
    def from_json(cls, text: str, base: ModelTable | None = None) -> ModelTable:
        return cls.from_dict(json.loads(text), base=base)


DEFAULT_TABLE = ModelTable()

# (fov, remote users) -> (radian or None when not applicable, radius)
PILOT_TABLE: Mapping[tuple[int, int], tuple[float | None, float]] = {
    (30, 1): (None, 1.24),
    (30, 2): (33.75, 1.26),
    (30, 3): (59.64, 1.31),
    (30, 4): (72.97, 1.61),
    (40, 1): (None, 1.17),
    (40, 2): (39.06, 1.20),
    (40, 3): (68.14, 1.21),
    (40, 4): (75.20, 1.55),
    (50, 1): (None, 1.09),
    (50, 2): (40.20, 1.09),
    (50, 3): (66.63, 1.17),
    (50, 4): (80.42, 1.50),
}
PILOT_FOVS = (30, 40, 50)


@dataclass(frozen=True)
class Prediction:
    placement: Placement
    fov_used: float
    clamped: bool


def _check_scenario(n_remote: int) -> None:
    if n_remote not in SCENARIOS:
        raise UnsupportedScenario(
            f"placement models cover 1-4 remote users, got {n_remote}"
        )


def predict_placement(
    fov_deg: float, n_remote: int, models: ModelTable = DEFAULT_TABLE
) -> Prediction:
    _check_scenario(n_remote)
    radius_model = models.get(RADIUS, n_remote)
    if radius_model is None:
        raise UnsupportedScenario(f"no radius model for {n_remote} remote users")
    lo, hi = radius_model.fov_range
    fov = min(max(fov_deg, lo), hi)
    clamped = fov != fov_deg

    radian = 0.0
    if n_remote >= 2:
        radian_model = models.get(RADIAN, n_remote)
        if radian_model is None:
            raise UnsupportedScenario(f"no radian model for {n_remote} remote users")
        radian = radian_model(fov)
    return Prediction(Placement(radian, radius_model(fov)), fov, clamped)


def pilot_lookup(fov_deg: float, n_remote: int) -> Placement:
    _check_scenario(n_remote)
    key = (int(fov_deg), n_remote)
    if fov_deg not in PILOT_FOVS or key not in PILOT_TABLE:
        raise NotTabulated(
            f"pilot table only covers FoV {PILOT_FOVS}; got {fov_deg:g} (use the models)"
        )
    radian, radius = PILOT_TABLE[key]
    return Placement(0.0 if radian is None else radian, radius)


@dataclass(frozen=True)
class PlacedLayout:
    layout: ConversationLayout
    source: str
    fov_deg: float
    aspect: tuple[float, float] | None = None
    clamped: bool = False

    @property
    def flags(self) -> list[str]:
        flags = set(self.layout.flags)
        if self.clamped:
            flags.add(CLAMPED)
        return sorted(flags)

    def to_dict(self) -> dict:
        d = self.layout.to_dict()
        d["flags"] = self.flags
        d["source"] = self.source
        d["fov"] = {
            "diagonal_deg": self.fov_deg,
            "aspect": None if self.aspect is None else list(self.aspect),
        }
        return d


def layout_for(
    fov: FieldOfView | float,
    n_remote: int,
    source: str = "model",
    models: ModelTable = DEFAULT_TABLE,
) -> PlacedLayout:
    """Predict a placement for ``fov`` and resolve it into avatar poses.

    ``fov`` is a :class:`FieldOfView` or a bare diagonal in degrees; the bare
    form also admits 180 (full human field of view), which no pinhole frustum
    can represent. The aspect ratio is carried through but does not change
    the prediction. ``source="pilot"`` reproduces the pilot-study optimum
    exactly and only works at 30, 40 or 50 degrees.
    """
    if isinstance(fov, FieldOfView):
        fov_deg, aspect = fov.diagonal_deg, (fov.aspect_w, fov.aspect_h)
    else:
        fov_deg, aspect = float(fov), None
        if not 0.0 < fov_deg <= 180.0:
            raise InvalidInput(f"FoV must be in (0, 180], got {fov_deg}")
    if source == "model":
        pred = predict_placement(fov_deg, n_remote, models)
        placement, clamped = pred.placement, pred.clamped
    elif source == "pilot":
        placement, clamped = pilot_lookup(fov_deg, n_remote), False
    else:
        raise InvalidInput(f"unknown placement source {source!r}")
    return PlacedLayout(resolve_layout(placement, n_remote), source, fov_deg, aspect, clamped)
