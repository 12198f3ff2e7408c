from typing import Dict, List, Optional

from pydantic import BaseModel


class V1Finding(BaseModel):
    code: str
    severity: str
    subject: List[str]
    message: str


class V1Findings(BaseModel):
    findings: List[V1Finding]
    errors: int = 0
    warnings: int = 0


class V1MappingResult(BaseModel):
    entity_key: str
    kind: str
    outcome: str
    iri_or_curie: str
    vocabulary: Optional[str] = None
    match_quality: int


class V1StageSummary(BaseModel):
    stage: str
    summary: str
    artifacts: List[str] = []


class V1RunSummary(BaseModel):
    version: str
    namespace: str
    stages: List[V1StageSummary]
    node_counts: Dict[str, int] = {}
    edge_counts: Dict[str, int] = {}
    mapped_fraction: float = 0.0
    errors: int = 0
    warnings: int = 0
