"""Pydantic models for Tresse configuration (tresse.yml)."""

from pydantic import BaseModel, Field, field_validator, model_validator


class SamplingConfig(BaseModel):
    """Random sampling used by numeric zero tests."""

    seed: int = 42
    zero_samples: int = Field(8, ge=1, description="Points drawn by is_zero")
    box: tuple[float, float] = Field(
        (0.3, 1.7), description="Interval for every real coordinate of a sample"
    )
    zero_tol: float = Field(1e-9, description="Relative numeric zero tolerance")
    symbolic_node_limit: int = Field(
        4000, ge=0, description="Skip symbolic normalization above this tree size"
    )

    @field_validator("box")
    @classmethod
    def validate_box(cls, v: tuple[float, float]) -> tuple[float, float]:
        """Validate that the sampling interval is non-empty."""
        lo, hi = v
        if not lo < hi:
            raise ValueError("box must be (low, high) with low < high")
        return v

    @field_validator("zero_tol")
    @classmethod
    def validate_tol(cls, v: float) -> float:
        """Validate that the tolerance is positive."""
        if v <= 0:
            raise ValueError("zero_tol must be positive")
        return v

    model_config = {"extra": "forbid"}


class ClassifyConfig(BaseModel):
    """Signature, rank and equivalence settings."""

    samples: int = Field(40, ge=1, description="Signature points per equation")
    rank_samples: int = Field(5, ge=1, description="Points voting on the functional rank")
    svd_rtol: float = Field(1e-7, description="Singular values below rtol*smax count as zero")
    match_rtol: float = Field(1e-5, description="Relative tolerance for signature agreement")
    min_match_fraction: float = Field(0.5, gt=0, le=1)
    newton_max_iter: int = Field(40, ge=1)
    workers: int = Field(4, ge=1, description="Threads used for sampling")
    symbolic_stratum_nodes: int = Field(
        120, ge=0, description="Above this tree size of f the stratum is decided from numeric jets"
    )

    @field_validator("svd_rtol", "match_rtol")
    @classmethod
    def validate_tol(cls, v: float) -> float:
        """Validate that tolerances are positive."""
        if v <= 0:
            raise ValueError("tolerances must be positive")
        return v

    model_config = {"extra": "forbid"}


class OutputConfig(BaseModel):
    """Report rendering settings."""

    elide_nodes: int = Field(10_000, ge=0)
    full: bool = False

    model_config = {"extra": "forbid"}


class TresseConfig(BaseModel):
    """Main Tresse configuration from tresse.yml."""

    max_order: int = Field(8, description="Highest jet order of the exact jet ring")
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)
    classify: ClassifyConfig = Field(default_factory=ClassifyConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @field_validator("max_order")
    @classmethod
    def validate_max_order(cls, v: int) -> int:
        """Order-6 invariants plus two derivations need at least order 6."""
        if not 6 <= v <= 10:
            raise ValueError("max_order must be between 6 and 10")
        return v

    @model_validator(mode="after")
    def check_rank_samples(self) -> "TresseConfig":
        """Rank voting cannot use more points than are sampled."""
        if self.classify.rank_samples > self.classify.samples:
            raise ValueError("classify.rank_samples cannot exceed classify.samples")
        return self

    model_config = {"extra": "forbid"}
