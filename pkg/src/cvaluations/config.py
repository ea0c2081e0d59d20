"""Run configuration: JSON schema, validation and defaults.

A config is one JSON object::

    {
      "quadruples": [{"id": "q", "h1": {"family": "power", "params": {"q": 2}, "p": 2}}],
      "domains":    [{"id": "d", "type": "partition", "measures": [0.5, 0.5]}],
      "scenarios":  [{"id": "law", "kind": "valuation_law", "quadruple": "q", "domain": "d"}],
      "output":     {"dir": "out"}
    }

Unknown keys anywhere are errors. Missing quadruple slots are the zero
generator; missing ``gamma``/``delta`` are fitted to the family.
"""

from __future__ import annotations

import json
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import generators as gen
from .domains import DEFAULT_SPHERE_ORDER
from .harness import EXACT_TOL, KINDS


class ConfigParseError(ValueError):
    pass


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GeneratorSpec(_Strict):
    family: Literal["power", "polynomial", "sine", "affine_const", "piecewise_linear"]
    params: dict[str, Any] = Field(default_factory=dict)
    p: float = Field(ge=1)
    gamma: Optional[float] = Field(default=None, ge=0)
    delta: Optional[float] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _fill(self):
        try:
            h = gen.make_generator(self.family, self.params, self.p, self.gamma, self.delta)
        except gen.GeneratorError as exc:
            raise ValueError(str(exc)) from None
        lit = h.to_literal()
        self.params, self.gamma, self.delta = lit["params"], lit["gamma"], lit["delta"]
        return self

    def build(self) -> gen.Generator:
        return gen.make_generator(self.family, self.params, self.p, self.gamma, self.delta)


class QuadrupleSpec(_Strict):
    id: str
    h1: Optional[GeneratorSpec] = None
    h2: Optional[GeneratorSpec] = None
    h3: Optional[GeneratorSpec] = None
    h4: Optional[GeneratorSpec] = None

    def build(self) -> gen.GeneratorQuadruple:
        hs = [h.build() if h is not None else None for h in (self.h1, self.h2, self.h3, self.h4)]
        try:
            return gen.quadruple(*hs)
        except gen.GeneratorError as exc:
            raise ConfigError(f"quadruple {self.id!r}: {exc}") from None


class PartitionDomain(_Strict):
    id: str
    type: Literal["partition"]
    measures: list[float] = Field(min_length=1)
    infinite_total: bool = False

    @property
    def infinite(self) -> bool:
        return self.infinite_total


class BoxDomain(_Strict):
    id: str
    type: Literal["box"]
    dimension: int = Field(ge=1, le=3)
    bounds: list[tuple[float, float]]
    resolution: list[int]

    @property
    def infinite(self) -> bool:
        return True


class SphereDomain(_Strict):
    id: str
    type: Literal["sphere"]
    dimension: Literal[2, 3] = 3
    order: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _fill(self):
        if self.order is None:
            self.order = DEFAULT_SPHERE_ORDER[self.dimension]
        return self

    @property
    def infinite(self) -> bool:
        return False


Domain = Annotated[Union[PartitionDomain, BoxDomain, SphereDomain], Field(discriminator="type")]


# -- per-kind scenario parameters -------------------------------------------------

class RandomDrawParams(_Strict):
    min_cells: int = Field(default=1, ge=1)
    max_cells: int = Field(default=64, ge=1)
    value_range: float = Field(default=5.0, gt=0)
    refine: bool = False
    p: Optional[float] = Field(default=None, ge=1)


class LawParams(RandomDrawParams):
    oracle_every: int = Field(default=10, ge=0)
    transform: Optional[Literal["rotate_to_imaginary", "real_part", "imag_part"]] = None


class CharacteristicParams(_Strict):
    value_range: float = Field(default=5.0, gt=0)
    refine: bool = False


class ContinuityParams(_Strict):
    rule: Literal["dyadic", "harmonic"] = "dyadic"
    steps: int = Field(default=30, ge=1)
    cells: int = Field(default=8, ge=1)
    bump_cells: list[int] = Field(default_factory=lambda: [0])
    target: Literal["random", "zero"] = "random"
    value_range: float = Field(default=2.0, gt=0)


class GridFunctionSpec(_Strict):
    shape: Literal["bump", "random"] = "bump"
    center: Optional[list[float]] = None
    radius: float = Field(default=1.0, gt=0)
    amplitude: tuple[float, float] = (1.0, 0.5)
    buffer: int = Field(default=8, ge=0)
    value_range: float = Field(default=5.0, gt=0)


class TranslationParams(_Strict):
    shift: list[float]
    function: GridFunctionSpec = Field(default_factory=GridFunctionSpec)


class RotationSpec(_Strict):
    axis: Optional[list[float]] = None
    angle_deg: Optional[float] = None
    matrix: Optional[list[list[float]]] = None
    random: bool = False


class SphereFunctionSpec(_Strict):
    shape: Literal["cap", "random"] = "cap"
    center: Optional[list[float]] = None
    radius: float = Field(default=0.8, gt=0)
    amplitude: tuple[float, float] = (1.0, 0.5)
    value_range: float = Field(default=5.0, gt=0)


class RotationParams(_Strict):
    rotation: RotationSpec = Field(default_factory=lambda: RotationSpec(angle_deg=90.0, axis=[0, 0, 1]))
    function: SphereFunctionSpec = Field(default_factory=SphereFunctionSpec)
    method: Literal["linear", "nearest"] = "linear"


class GrowthParams(_Strict):
    p: float = Field(default=2.0, ge=1)
    steps: Optional[int] = Field(default=None, ge=2)
    generator: Optional[GeneratorSpec] = None
    expect: Literal["diverge", "bounded"] = "diverge"


class DeltaParams(_Strict):
    generator: GeneratorSpec
    expect: Optional[Literal["diverge", "finite"]] = None


PARAMS = {
    "valuation_law": LawParams,
    "oracle_equivalence": RandomDrawParams,
    "characteristic_formula": CharacteristicParams,
    "re_im_split": RandomDrawParams,
    "imaginary_rotation": RandomDrawParams,
    "component_split": RandomDrawParams,
    "times_i_lattice": RandomDrawParams,
    "refinement_invariance": RandomDrawParams,
    "continuity": ContinuityParams,
    "translation_invariance": TranslationParams,
    "rotation_invariance": RotationParams,
    "necessity_growth": GrowthParams,
    "necessity_delta_infinite": DeltaParams,
}
assert set(PARAMS) == set(KINDS)

# kinds that draw their own generators and need no quadruple
SELF_CONTAINED = {"times_i_lattice", "necessity_growth", "necessity_delta_infinite"}
NEEDS_ZERO = {"re_im_split", "imaginary_rotation", "component_split"}
DOMAIN_TYPE = {"translation_invariance": "box", "rotation_invariance": "sphere"}


class ScenarioSpec(_Strict):
    id: str
    kind: Literal[KINDS]  # type: ignore[valid-type]
    quadruple: Optional[str] = None
    domain: Optional[str] = None
    seed: int = 0
    trials: int = Field(default=200, ge=0)
    tolerance: Optional[float] = Field(default=None, ge=0)
    params: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _fill(self):
        model = PARAMS[self.kind].model_validate(self.params)
        self.params = model.model_dump(exclude_none=False)
        if self.tolerance is None:
            self.tolerance = default_tolerance(self.kind)
        return self

    def typed_params(self):
        return PARAMS[self.kind].model_validate(self.params)


def default_tolerance(kind: str) -> float | None:
    """Default tolerance; None for invariance kinds, which pick exact or resampled at run time."""
    if kind == "continuity":
        return 1e-8
    if kind in ("translation_invariance", "rotation_invariance"):
        return None
    if kind in ("times_i_lattice", "necessity_delta_infinite"):
        return 0.0
    if kind == "necessity_growth":
        return 10.0
    return EXACT_TOL


class OutputSpec(_Strict):
    dir: Optional[str] = None
    json_name: str = Field(default="report.json", alias="json")
    csv_name: str = Field(default="report.csv", alias="csv")

    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class RunConfig(_Strict):
    quadruples: list[QuadrupleSpec] = Field(default_factory=list)
    domains: list[Domain] = Field(default_factory=list)
    scenarios: list[ScenarioSpec] = Field(min_length=1)
    output: OutputSpec = Field(default_factory=OutputSpec)

    def quadruple(self, qid):
        return next(q for q in self.quadruples if q.id == qid)

    def domain(self, did):
        return next(d for d in self.domains if d.id == did)


def _check(cfg: RunConfig) -> None:
    for label, items in (("quadruple", cfg.quadruples), ("domain", cfg.domains), ("scenario", cfg.scenarios)):
        ids = [x.id for x in items]
        dup = {i for i in ids if ids.count(i) > 1}
        if dup:
            raise ConfigError(f"duplicate {label} ids: {sorted(dup)}")
    quads = {q.id: q.build() for q in cfg.quadruples}
    doms = {d.id: d for d in cfg.domains}
    for s in cfg.scenarios:
        where = f"scenario {s.id!r}"
        if s.quadruple is not None and s.quadruple not in quads:
            raise ConfigError(f"{where}: unknown quadruple {s.quadruple!r}")
        if s.domain is not None and s.domain not in doms:
            raise ConfigError(f"{where}: unknown domain {s.domain!r}")
        dom = doms.get(s.domain)
        need = DOMAIN_TYPE.get(s.kind)
        if need is not None:
            if dom is None or dom.type != need:
                raise ConfigError(f"{where}: {s.kind} needs a {need} domain")
            if s.quadruple is None:
                raise ConfigError(f"{where}: {s.kind} needs a quadruple")
        elif dom is not None and s.kind not in SELF_CONTAINED and dom.type != "partition":
            raise ConfigError(f"{where}: {s.kind} runs on partition domains only")
        if s.kind == "continuity" and s.quadruple is None:
            raise ConfigError(f"{where}: continuity needs a quadruple")
        q = quads.get(s.quadruple)
        if q is None or s.kind in SELF_CONTAINED:
            continue
        if dom is not None and dom.infinite and (q.has_delta or not q.all_zero_at_zero):
            raise ConfigError(
                f"{where}: domain {dom.id!r} has infinite measure, which requires "
                "h_k(0)=0 and delta_k=0 (δ_k=0 if μ(X)=∞)")
        if dom is not None and dom.type == "sphere" and not q.all_zero_at_zero:
            raise ConfigError(f"{where}: generators on the sphere must satisfy h_k(0)=0")
        if s.kind in NEEDS_ZERO and not q.all_zero_at_zero:
            raise ConfigError(f"{where}: {s.kind} needs h_k(0)=0 for every generator")


def _format_validation(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"])
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        cfg = RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigParseError(_format_validation(exc)) from None
    _check(cfg)
    return cfg


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(cfg: RunConfig) -> str:
    return cfg.model_dump_json(by_alias=True, indent=2)
