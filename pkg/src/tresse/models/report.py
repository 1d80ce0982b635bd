"""Pydantic models for command reports (the --json output)."""

from pydantic import BaseModel, Field

SCHEMA_VERSION = "1"


class Invocation(BaseModel):
    """Command echo: what ran, on what input and with which seed."""

    command: str
    inputs: dict[str, str] = Field(default_factory=dict)
    seed: int
    version: str


class Report(BaseModel):
    """Fields shared by every report."""

    schema_version: str = SCHEMA_VERSION
    invocation: Invocation
    # timing is shown in human output only; JSON stays byte-identical across runs
    seconds: float = Field(0.0, exclude=True)

    model_config = {"extra": "forbid"}


class ComplexValue(BaseModel):
    re: float
    im: float

    @classmethod
    def of(cls, z: complex) -> "ComplexValue":
        return cls(re=z.real, im=z.imag)


class InvariantEntry(BaseModel):
    name: str
    weight: str | None = None
    expr: str | None = Field(None, description="Printed expression, elided above the node limit")
    nodes: int | None = None
    values: list[float | None] = Field(default_factory=list, description="Values at the report points")


class RankEntry(BaseModel):
    rank: int
    dimension: int
    stratum: str
    names: list[str] = Field(default_factory=list)
    ranks: list[int] = Field(default_factory=list)
    singular_values: list[list[float]] = Field(default_factory=list)
    note: str = ""


class InvariantsReport(Report):
    ode: str
    stratum: str
    points: list[list[float]]
    invariants: list[InvariantEntry] = Field(default_factory=list)
    rank: RankEntry | None = None
    note: str = ""


class ClassifyReport(Report):
    ode: str
    result: RankEntry


class LinearizeReport(Report):
    ode: str
    verdict: str
    alpha: list[str] = Field(default_factory=list)
    L1: str | None = None
    L2: str | None = None
    F3: str | None = None
    f3_variant: str | None = None
    frobenius_integrable: bool | None = None
    h_ratio: float | None = Field(None, description="restrict(H)/(L1 + p·L2)")
    h_ratio_spread: float | None = None


class EquivReport(Report):
    ode1: str
    ode2: str
    verdict: str
    reason: str
    rank: int | None = None
    sign_pattern: list[int] | None = None
    compared: int = 0
    matched: int = 0
    max_discrepancy: float | None = None
    coordinates: list[str] = Field(default_factory=list)


class TransformSample(BaseModel):
    x: float
    y: float
    p: float
    value: ComplexValue


class TransformReport(Report):
    ode: str
    map: list[str]
    symbolic: bool
    transformed: str | None = None
    samples: list[TransformSample] = Field(default_factory=list)


class OrbitDimReport(Report):
    k: int
    codim: int
    expected: int
    matches: bool
    ranks: list[int]


class CurvePoint(BaseModel):
    p: float
    value: ComplexValue


class FiberCurveReport(Report):
    curve: str
    orbit: str | None = Field(None, description="'S1', 'S2' or null off the singular orbits")
    G4: str
    G6: str
    i7: list[CurvePoint] = Field(default_factory=list)
    i7_via_diamond: list[CurvePoint] = Field(default_factory=list)
    box_i7: list[CurvePoint] = Field(default_factory=list)


class OracleEntry(BaseModel):
    name: str
    passed: bool
    required: bool = True
    detail: str = ""


class SelftestReport(Report):
    passed: bool
    oracles: list[OracleEntry] = Field(default_factory=list)


REPORT_MODELS: dict[str, type[Report]] = {
    "invariants": InvariantsReport,
    "classify": ClassifyReport,
    "linearize": LinearizeReport,
    "equiv": EquivReport,
    "transform": TransformReport,
    "orbitdim": OrbitDimReport,
    "fiber": FiberCurveReport,
    "selftest": SelftestReport,
}
