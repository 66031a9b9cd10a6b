# app/schemas.py: CLI 輸入設定與 JSON 報告的 pydantic 結構

from typing import List, Literal, Optional, Tuple

import galois
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.models import CellCheckResult, Sign, TargetWalls


def _parse_letters(value) -> Tuple[int, ...]:
    if value is None:
        return ()
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    text = str(value).strip()
    if not text:
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"必須是以逗號分隔的整數：{value!r}")


class RunConfig(BaseModel):
    """一次 CLI 執行的設定。字與點一律源點優先輸入。"""
    command: Literal["cells", "fibre", "verify", "deodhar"]
    cartan: str = Field(pattern=r"^[A-Ga-g][0-9]+$", description="例如 A3、B2")
    word: Tuple[int, ...] = Field(default=(), description="例如 1,2,1")
    target_type: Tuple[int, ...] = Field(default=(), description="終點面的型 T0，例如 2 或空字串")
    point: str = Field(default="e", description="'e'、'all' 或 u 的字")
    q: Optional[int] = Field(default=None, ge=2)
    format: Literal["table", "json"] = "table"
    target_walls: TargetWalls = TargetWalls.FULL
    seed: int = 0
    trials: Optional[int] = Field(default=None, ge=1)
    workers: Optional[int] = Field(default=None, ge=1)
    distinguished: bool = False

    @field_validator("word", "target_type", mode="before")
    @classmethod
    def parse_letters(cls, value):
        letters = _parse_letters(value)
        if any(letter < 1 for letter in letters):
            raise ValueError("單根索引必須從 1 起算")
        return letters

    @field_validator("point")
    @classmethod
    def point_must_be_word(cls, value: str) -> str:
        value = value.strip()
        if value not in ("e", "all"):
            _parse_letters(value)
        return value

    @field_validator("q")
    @classmethod
    def q_must_be_prime(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and not galois.is_prime(value):
            raise ValueError(f"q = {value} 不是質數")
        return value

    @property
    def point_word(self) -> Optional[Tuple[int, ...]]:
        """'all' 回傳 None，'e' 回傳空字。"""
        if self.point == "all":
            return None
        if self.point == "e":
            return ()
        return _parse_letters(self.point)


class BsCellRead(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    gallery: str
    J: List[int]
    dim: int


class CellsReportRead(BaseModel):
    cartan: str
    word: List[int]
    cells: List[BsCellRead]
    poincare: List[int]


class RelationRead(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    lead: int
    terms: List[Tuple[int, Sign]]


class FibreCellRead(BaseModel):
    gallery: str
    J: List[int]
    J2: List[int]
    zero_indices: List[int]
    relations: List[RelationRead]
    dim: int


class FibreReportRead(BaseModel):
    cartan: str
    word: List[int]
    target_type: List[int]
    target_walls: TargetWalls
    point: str
    cells: List[FibreCellRead]
    poincare: List[int]
    dim: int
    components: List[str]
    connected: bool
    deodhar: List[int]
    match: bool


class FibreSweepRead(BaseModel):
    cartan: str
    word: List[int]
    target_type: List[int]
    points: List[FibreReportRead]
    weighted_sum: List[int] = Field(description="Σ_x q^{ℓ(u)}·P_x(q) 的係數")
    identity_holds: bool


class DeodharRead(BaseModel):
    cartan: str
    word: List[int]
    target_type: List[int]
    point: str
    distinguished: bool
    polynomial: List[int]


class FixedPointCountRead(BaseModel):
    point: str
    predicted: int
    counted: int
    schubert_predicted: int
    schubert_counted: int


class NonlinearCellRead(BaseModel):
    """線性方程式無法描述的纖維胞腔，附精確的多項式方程式。"""
    point: str
    gallery: str
    exact_equations: List[str]


class VerifyReportRead(BaseModel):
    cartan: str
    word: List[int]
    q: int
    total: int
    expected_total: int
    classes_checked: int
    fixed_points: List[FixedPointCountRead]
    samples: List[CellCheckResult]
    nonlinear_cells: List[NonlinearCellRead] = Field(default_factory=list)
    passed: bool
