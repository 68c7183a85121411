from typing import Dict, List, Optional, Any, Union
from pydantic import BaseModel, Field, field_validator
from datetime import datetime
from enum import Enum

class CheckFlag(str, Enum):
    """Verdicts the checker can compute."""

    HOMOGENEOUS = "homogeneous"
    SPEC_HOMOGENEOUS = "spec-homogeneous"
    TRANSITIVE = "transitive"
    CONDITION_A = "condition-a"
    CONDITION_B = "condition-b"
    PROPERTY_H = "property-h"

class GeneratorKind(str, Enum):
    """Families of generated spaces."""

    CANTOR = "cantor"
    PRODUCT = "product"
    RANDOM = "random"

class SpaceFile(BaseModel):
    """Space file: point identifiers plus one distance entry per unordered pair."""

    points: List[str] = Field(..., description="Point identifiers in canonical order")
    distances: List[List[Any]] = Field(
        default_factory=list, description='Entries ["x", "y", "p/q"]'
    )

    @field_validator("points")
    @classmethod
    def points_not_empty(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("a space needs at least one point")
        return value

    @field_validator("distances")
    @classmethod
    def entries_are_triples(cls, value: List[List[Any]]) -> List[List[Any]]:
        for entry in value:
            if len(entry) != 3:
                raise ValueError(f"distance entry must have three items, got {entry!r}")
        return value

class NerveNode(BaseModel):
    """One node of the nerve (or decomposition tree) in machine format."""

    members: List[str] = Field(..., description="Members in canonical point order")
    diameter: str = Field(..., description="Diameter as p/q")
    parent: Optional[int] = Field(None, description="Index of the parent node, null for the root")

class NerveFile(SpaceFile):
    """Space file extended with the nodes of a tree over it."""

    nodes: List[NerveNode] = Field(..., description="Nodes sorted by diameter, then least member")

class PropertyHReport(BaseModel):
    h1: bool = Field(..., description="All points share one spectrum")
    h2: bool = Field(..., description="Equal-diameter nerve nodes have equally many sons")

class SpaceInfoResponse(BaseModel):
    """Summary of a space."""

    points: int = Field(..., description="Number of points")
    spectrum: List[str] = Field(..., description="Spec(M), ascending")
    multispectrum: List[List[str]] = Field(..., description="Distinct point spectra")
    degree_sequence: Dict[str, int] = Field(..., description="s_M(r) per nonzero radius")
    nerve_nodes: int = Field(..., description="Number of nerve nodes")
    orbits: List[List[str]] = Field(..., description="Automorphism orbits")
    property_h: PropertyHReport

class ValidateResponse(BaseModel):
    valid: bool = Field(..., description="Space passed every axiom")
    points: int = Field(..., description="Number of points")
    spectrum: List[str] = Field(..., description="Spec(M), ascending")

class CheckRequest(BaseModel):
    """Request model for verdict computation."""

    space: SpaceFile
    flags: List[CheckFlag] = Field(default_factory=lambda: list(CheckFlag), description="Verdicts to compute")
    brute_force: bool = Field(False, description="Cross-check every verdict by exhaustive search")

class CheckResponse(BaseModel):
    verdicts: Dict[str, bool] = Field(..., description="Verdict per check, in request order")

class EmbeddingLine(BaseModel):
    point: str = Field(..., description="Point of the space")
    image: Dict[str, int] = Field(..., description="Nonzero values of ψ(point), radius → value")

class EmbedResponse(BaseModel):
    degree_function: Dict[str, int] = Field(..., description="Spec(M)* → s_M")
    embedding: List[EmbeddingLine]

class ProductRequest(BaseModel):
    """Request model for a product space."""

    spectrum: Union[str, Dict[str, int]] = Field(..., description='"1/2:2,1:3" or {"1/2": 2, "1": 3}')

class GeneratorSpec(BaseModel):
    """Parameters of one generated space."""

    kind: GeneratorKind
    depth: Optional[int] = Field(None, ge=1, description="Cantor depth")
    spectrum: Optional[str] = Field(None, description='Product degrees, e.g. "1/2:2,1:3"')
    points: Optional[int] = Field(None, ge=1, description="Random space size")
    seed: int = Field(0, description="Random seed")
    pool: Optional[str] = Field(None, description='Random distance pool, e.g. "1/2,1"')

class HealthCheckResponse(BaseModel):
    """Health check response."""

    status: str = Field(..., description="Service status")
    timestamp: datetime = Field(..., description="Health check timestamp")
    version: str = Field(..., description="Service version")

class ErrorResponse(BaseModel):
    """Error response model."""

    error: str = Field(..., description="Error message")
    detail: Optional[str] = Field(None, description="Error details")
    timestamp: datetime = Field(..., description="Error timestamp")
    request_id: Optional[str] = Field(None, description="Request ID for tracking")
