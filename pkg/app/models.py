from pydantic import BaseModel, Field, model_validator
from typing import List, Optional, Dict, Any, Tuple

from app.config import SCHEMA_VERSION

TOPOLOGY_NAMES = ("tau_0", "tau_c", "tau_fc2", "tau_fcn")
SUITE_NAMES = ("laws", "base", "upsets", "continuity", "fc_witnesses", "collectionwise", "top_rank", "regularity",
               "extras", "oracle", "controls")


class RunConfig(BaseModel):
    topology: str = "tau_c"
    n: int = 2
    window: int = 16
    pads: Tuple[int, int] = (1, 1)
    a_spec: str = "even"
    anchor: Optional[str] = None  # distinguished point of tau_fcn, rank n-2
    suites: Optional[List[str]] = None  # None runs every suite of the topology
    out: Optional[str] = None
    depth: int = 25
    seed: int = 1729
    samples: int = 40

    @model_validator(mode="after")
    def check_topology_constraints(self):
        if self.topology not in TOPOLOGY_NAMES:
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.topology == "tau_fc2" and self.n != 2:
            raise ValueError("tau_fc2 requires n = 2")
        if self.topology == "tau_fcn" and self.n < 3:
            raise ValueError("tau_fcn requires n >= 3")
        if self.window < 1 or min(self.pads) < 1:
            raise ValueError("window must be positive and pads at least one code of each color")
        unknown = [s for s in (self.suites or []) if s not in SUITE_NAMES]
        if unknown:
            raise ValueError(f"unknown suites {unknown}")
        if self.anchor is not None and self.topology != "tau_fcn":
            raise ValueError("an anchor applies to tau_fcn only")
        return self


class Assertion(BaseModel):
    op: str  # member, member_open, empty, open_descriptor, meet, fresh_extension
    args: Dict[str, str]
    expect: bool = True


class CertificateContext(BaseModel):
    n: int
    a_spec: str
    topology: str
    anchor: Optional[str] = None  # distinguished point of tau_fcn


class Certificate(BaseModel):
    schema_version: str = SCHEMA_VERSION
    kind: str
    context: CertificateContext
    payload: Dict[str, Any]
    script: List[Assertion]
    digest: str = ""


class VerificationResult(BaseModel):
    ok: bool
    kind: str
    checked: int
    failed_index: Optional[int] = None
    reason: Optional[str] = None
    layer: Optional[str] = None  # digest, kind, payload, script or evaluation


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: Optional[str] = None
    counterexample: Optional[str] = None
    certificates: List[Certificate] = Field(default_factory=list)


class SuiteReport(BaseModel):
    schema_version: str = SCHEMA_VERSION
    config: RunConfig
    checks: List[CheckResult]
    passed: bool


class BaseAxiomFailure(BaseModel):
    axiom: str  # BP1..BP4
    point: str
    detail: str
    descriptors: List[str] = Field(default_factory=list)


class BaseAxiomReport(BaseModel):
    topology: str
    n: int
    checked_points: int
    passed: bool
    failures: List[BaseAxiomFailure] = Field(default_factory=list)
    non_t1_witness: Optional[List[str]] = None


class AgreementReport(BaseModel):
    operation: str
    expr: str
    window: int
    pads: Tuple[int, int]
    agree: bool
    only_symbolic: List[str] = Field(default_factory=list)
    only_oracle: List[str] = Field(default_factory=list)


class OracleDump(BaseModel):
    expr: str
    topology: str
    n: int
    window: int
    pads: Tuple[int, int]
    codes: List[int]
    members: List[str]
    limit_points: List[str]
    closure: List[str]
    interior: List[str]
