"""Validated run configuration for the batch front-end.

Every model forbids unknown keys, so a typo in a config file is an error
that names the key rather than a silently ignored setting.
"""
from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .dsl import disc_function, density_function, parse_density
from .measures import BUILTINS, DensityMeasure
from .quadrature import QuadratureSpec

TASKS = (
    "kernel-eval",
    "berezin-grid",
    "vanishing-profile",
    "carleson-check",
    "repro:weak-limit",
    "repro:skwarczynski",
    "repro:lemma1",
    "repro:blocki",
)
TaskName = Literal[
    "kernel-eval",
    "berezin-grid",
    "vanishing-profile",
    "carleson-check",
    "repro:weak-limit",
    "repro:skwarczynski",
    "repro:lemma1",
    "repro:blocki",
]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# Measures ----------------------------------------------------------------


class ProductSource(_Strict):
    f: str = Field(description="density source in the variable xi")
    g: str = Field(description="density source in the variable r2")


class CustomSource(_Strict):
    density: str = Field(description="density source in r1, r2, xi")


class MeasureConfig(_Strict):
    builtin: Optional[Literal["lebesgue", "vanishing_example", "nonvanishing_example", "zero"]] = None
    product: Optional[ProductSource] = None
    custom: Optional[CustomSource] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        chosen = [n for n in ("builtin", "product", "custom") if getattr(self, n) is not None]
        if len(chosen) != 1:
            raise ValueError("measure needs exactly one of 'builtin', 'product', 'custom'")
        for src in self._sources():
            parse_density(src)
        return self

    def _sources(self):
        if self.product is not None:
            return [self.product.f, self.product.g]
        if self.custom is not None:
            return [self.custom.density]
        return []

    def build(self, k: int) -> DensityMeasure:
        if self.builtin is not None:
            return DensityMeasure.builtin(self.builtin, k)
        if self.product is not None:
            f = disc_function(parse_density(self.product.f), "xi")
            g = disc_function(parse_density(self.product.g), "r2")
            return DensityMeasure.product(k, f, g, label=f"product[{self.product.f} | {self.product.g}]")
        rho = density_function(parse_density(self.custom.density), k)
        return DensityMeasure.general(k, rho, label=f"custom[{self.custom.density}]")


def _coerce_measure(v):
    if isinstance(v, str):
        if v not in BUILTINS:
            raise ValueError(f"unknown builtin measure {v!r}; choose from {BUILTINS}")
        return {"builtin": v}
    return v


class SpecConfig(_Strict):
    radial_nodes: int = 8
    angular_nodes: int = 16
    max_subdivisions: int = 24
    rel_tol: float = 1e-6
    seed: int = 0

    @model_validator(mode="after")
    def _check(self):
        self.build()
        return self

    def build(self) -> QuadratureSpec:
        return QuadratureSpec(**self.model_dump())


# Task parameters ---------------------------------------------------------


Pair = tuple[float, float]


class PointPair(_Strict):
    z: tuple[Pair, Pair]
    w: tuple[Pair, Pair]


class KernelEvalParams(_Strict):
    pairs: list[PointPair] = Field(default_factory=list)
    n_random: int = Field(10, ge=0)
    margin: float = Field(0.05, gt=0, lt=0.5)
    series_tol: float = Field(1e-12, gt=0)

    @model_validator(mode="after")
    def _nonempty(self):
        if not self.pairs and self.n_random == 0:
            raise ValueError("kernel-eval needs 'pairs' or n_random > 0")
        return self


class GridParams(_Strict):
    n_r2: int = Field(10, ge=1)
    n_ratio: int = Field(5, ge=1)


class BerezinGridParams(GridParams):
    include_t: bool = True


class PathConfig(_Strict):
    kind: Literal["to_origin", "to_outer", "to_inner", "custom"]
    length: int = Field(16, ge=2)
    c: Optional[float] = None
    r2: float = Field(0.5, gt=0, lt=1)
    j_start: float = 2.0
    j_end: float = 1000.0
    points: list[tuple[Pair, Pair]] = Field(default_factory=list)


def default_paths() -> list[PathConfig]:
    return [
        PathConfig(kind="to_origin"),
        PathConfig(kind="to_outer", c=0.5),
        PathConfig(kind="to_inner"),
    ]


class VanishingParams(_Strict):
    paths: list[PathConfig] = Field(default_factory=default_paths)
    deltas: list[float] = Field(default_factory=lambda: [2.0])
    include_berezin: bool = False
    threshold: float = Field(1e-2, gt=0, lt=1)

    @field_validator("deltas")
    @classmethod
    def _positive(cls, v):
        if not v or any(d <= 0 for d in v):
            raise ValueError("deltas must be a non-empty list of positive numbers")
        return v


class CarlesonParams(GridParams):
    include_berezin: bool = True
    vanishing: Optional[VanishingParams] = Field(default_factory=VanishingParams)


class WeakLimitParams(_Strict):
    j_max: int = Field(1000, ge=2)


class SkwarczynskiParams(_Strict):
    j_list: list[int] = Field(default_factory=lambda: [2, 5, 10, 50, 100])

    @field_validator("j_list")
    @classmethod
    def _valid(cls, v):
        if not v or any(j < 2 for j in v):
            raise ValueError("j_list must be non-empty with every j >= 2")
        return v


class Lemma1Params(_Strict):
    deltas: list[float] = Field(default_factory=lambda: [0.05, 0.1, 0.2])
    monomials: list[tuple[int, int]] = Field(default_factory=list)
    n_monomials: int = Field(10, ge=1)
    rel_tol: float = Field(1e-6, gt=0)

    @field_validator("deltas")
    @classmethod
    def _unit(cls, v):
        if not v or any(not 0 < d < 1 for d in v):
            raise ValueError("deltas must lie in (0, 1)")
        return v


class BlockiParams(_Strict):
    n: int = Field(100, ge=1)
    m_range: tuple[float, float] = (0.5, 3.0)
    n_monomials: int = Field(10, ge=1)
    margin: float = Field(0.05, gt=0, lt=0.5)

    @field_validator("m_range")
    @classmethod
    def _order(cls, v):
        if not 0 < v[0] <= v[1]:
            raise ValueError("m_range must satisfy 0 < lo <= hi")
        return v


TASK_PARAMS = {
    "kernel-eval": KernelEvalParams,
    "berezin-grid": BerezinGridParams,
    "vanishing-profile": VanishingParams,
    "carleson-check": CarlesonParams,
    "repro:weak-limit": WeakLimitParams,
    "repro:skwarczynski": SkwarczynskiParams,
    "repro:lemma1": Lemma1Params,
    "repro:blocki": BlockiParams,
}

ParamsModel = Union[
    KernelEvalParams,
    BerezinGridParams,
    VanishingParams,
    CarlesonParams,
    WeakLimitParams,
    SkwarczynskiParams,
    Lemma1Params,
    BlockiParams,
]


class RunConfig(_Strict):
    """One batch run: a task, a domain, a measure, and quadrature settings."""

    task: TaskName
    k: int = Field(1, ge=1)
    measure: MeasureConfig = Field(default_factory=lambda: MeasureConfig(builtin="lebesgue"))
    spec: SpecConfig = Field(default_factory=SpecConfig)
    seed: int = 0
    out: Optional[str] = None
    params: dict = Field(default_factory=dict)

    @field_validator("measure", mode="before")
    @classmethod
    def _measure(cls, v):
        return _coerce_measure(v)

    @model_validator(mode="after")
    def _params(self):
        model = TASK_PARAMS[self.task]
        try:
            parsed = model.model_validate(self.params)
        except ValidationError as exc:
            msgs = [
                f"params.{'.'.join(str(x) for x in e['loc'])}: {e['msg']}" for e in exc.errors()
            ]
            raise ValueError(f"invalid parameters for task {self.task!r}: " + "; ".join(msgs)) from None
        self.params = parsed.model_dump(mode="json")
        if self.task == "repro:skwarczynski" and self.k != 2:
            if "k" in self.model_fields_set:
                raise ValueError("repro:skwarczynski is defined on the k=2 domain; set k=2 or omit it")
            self.k = 2
        if self.task == "repro:weak-limit" and self.k != 1:
            if "k" in self.model_fields_set:
                raise ValueError("repro:weak-limit is defined on the k=1 domain; set k=1 or omit it")
        return self

    def task_params(self) -> ParamsModel:
        return TASK_PARAMS[self.task].model_validate(self.params)

    def resolved(self) -> dict:
        """Fully expanded config; loading it back gives an identical run."""
        return self.model_dump(mode="json")


def run_config_schema() -> dict:
    schema = RunConfig.model_json_schema()
    schema["$defs"] = schema.get("$defs", {})
    for name, model in TASK_PARAMS.items():
        schema["$defs"][f"params:{name}"] = model.model_json_schema()
    return schema
