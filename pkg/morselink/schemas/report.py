from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class IdentityReport(BaseModel):
    """恒等式校验报告"""
    identity: str
    fixture: str
    status: str = "pass"
    k: Optional[int] = None
    lhs: Optional[Any] = None
    rhs: Optional[Any] = None
    residual: Optional[Any] = None
    residual_max: float = 0.0
    seed: int = 0
    ring: str = "Z"
    witnesses: List[Dict[str, Any]] = Field(default_factory=list)
    detail: str = ""

    model_config = ConfigDict(extra="forbid")

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def skipped(self) -> bool:
        """没有可检验的对象（例如只有空伪边界）"""
        return self.status == "skip"

    @property
    def failed(self) -> bool:
        return not (self.passed or self.skipped)


class BetaRow(BaseModel):
    """cmd_beta 的一行"""
    k: int
    q_k: int
    beta_alg: float
    beta_geom: float
    witness: str = ""
