# app/models.py: 領域資料模型
# 算術核心（根系、Weyl 群元素、畫廊）使用 frozen dataclass，以便雜湊與快速比較；
# 分析結果（牆記錄、方程式、纖維報告等）使用 pydantic 模型，方便驗證與序列化。
#
# 索引慣例：字 (word) 與畫廊一律以「源點優先」儲存，位置 p（從 1 起算）
# 對應報告索引 j = r - p + 1；所有報告顯示的都是 j。

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, List, Literal, Optional, Tuple, Union

import galois
from pydantic import BaseModel, ConfigDict, Field, field_validator

Root = Tuple[int, ...]  # 以單根為基底的整數座標
Word = Tuple[int, ...]  # 單根索引（從 1 起算），源點優先

UNRESOLVED = "UNRESOLVED"
Sign = Union[int, Literal["UNRESOLVED"]]


class CartanFamily(str, Enum):
    """有限型根系的族。"""
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"
    G = "G"


class WallKind(str, Enum):
    """畫廊在某位置的行為：穿越牆 (crossing) 或在牆上折返 (bend)。"""
    CROSSING = "crossing"
    BEND = "bend"


class TargetWalls(str, Enum):
    """終點面所在牆的計算慣例：full 為 W_{T0} 全部反射，simple 只取單根反射。"""
    FULL = "full"
    SIMPLE = "simple"


@dataclass(frozen=True)
class CartanDatum:
    """Cartan 資料：a[i][j] = <α_j, α_i^∨>，故 s_i(α_j) = α_j - a[i][j]·α_i。"""
    family: CartanFamily
    rank: int
    cartan_matrix: Tuple[Tuple[int, ...], ...]
    roots: Tuple[Root, ...] = field(compare=False, repr=False)
    positive_roots: Tuple[Root, ...] = field(compare=False, repr=False)
    root_index: Dict[Root, int] = field(compare=False, repr=False, hash=False)

    @property
    def name(self) -> str:
        return f"{self.family.value}{self.rank}"

    def simple_root(self, i: int) -> Root:
        return tuple(1 if k == i - 1 else 0 for k in range(self.rank))

    def is_root(self, beta: Root) -> bool:
        return beta in self.root_index


@dataclass(frozen=True)
class WeylElement:
    """Weyl 群元素，以單根的像作為標準形；length 為快取的長度，不參與比較。"""
    images: Tuple[Root, ...]
    length: int = field(compare=False)

    @property
    def is_identity(self) -> bool:
        return self.length == 0


@dataclass(frozen=True)
class ParabolicType:
    """拋物子群的型 t'_0：單根索引的子集。"""
    generators: FrozenSet[int] = frozenset()

    @classmethod
    def of(cls, generators) -> "ParabolicType":
        return cls(frozenset(generators))

    @property
    def sorted(self) -> Tuple[int, ...]:
        return tuple(sorted(self.generators))

    @property
    def label(self) -> str:
        return ",".join(str(i) for i in self.sorted) if self.generators else "∅"


@dataclass(frozen=True)
class GalleryType:
    """最小畫廊型 τ：約化字加上終點面的型。請用 gallery_service.gallery_type 建立。"""
    datum: CartanDatum
    word: Word
    target_type: ParabolicType

    @property
    def r(self) -> int:
        return len(self.word)

    def letter_at(self, j: int) -> int:
        """報告索引 j 處的字母 k_j。"""
        return self.word[self.r - j]


@dataclass(frozen=True)
class Gallery:
    """組合畫廊：穿越位元向量，源點優先，1 表示 γ_j = s_{k_j}。"""
    bits: Tuple[int, ...]

    @classmethod
    def from_label(cls, label: str) -> "Gallery":
        if any(ch not in "01" for ch in label):
            raise ValueError(f"畫廊標籤只能包含 0 與 1：{label!r}")
        return cls(tuple(int(ch) for ch in label))

    @property
    def label(self) -> str:
        return "".join(str(b) for b in self.bits)

    @property
    def r(self) -> int:
        return len(self.bits)

    def crosses_at(self, j: int) -> bool:
        return self.bits[self.r - j] == 1


@dataclass(frozen=True)
class FixedPoint:
    """Schubert 簇的 T 固定點 x = ū(P) 及其相關的牆集合。"""
    u: WeylElement
    target_type: ParabolicType
    face_walls: Tuple[Root, ...]  # 依排序固定，位置 k 對應哨兵索引 -(k+1)
    separating_walls: FrozenSet[Root]
    convention: TargetWalls = TargetWalls.FULL

    def sentinel(self, wall: Root) -> Optional[int]:
        try:
            return -(self.face_walls.index(wall) + 1)
        except ValueError:
            return None


class WallRecord(BaseModel):
    """位置 j 的牆資料：β_j = (γ_r⋯γ_j)(α_{k_j})。"""
    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=1)
    wall: Root = Field(description="無號的牆（正根 |β_j|）")
    beta: Root
    kind: WallKind
    load_bearing: bool


class ChartEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=1)
    root_sign: Literal["+", "-"] = Field(description="ε(α_{k_j})")
    reflection: Literal["s", "1"] = Field(description="ε(s_{k_j})")
    pinned: bool = Field(description="在胞腔 C^γ 上此座標被固定為 0")


class ChartSpec(BaseModel):
    """仿射座標卡 U^γ 的描述。"""
    model_config = ConfigDict(frozen=True)

    gallery: str
    entries: List[ChartEntry]


class BsCell(BaseModel):
    model_config = ConfigDict(frozen=True)

    gallery: str
    J: List[int] = Field(description="承重牆索引，遞減排列")
    dim: int = Field(ge=0)


class BsCellsReport(BaseModel):
    """Bott-Samelson 簇的胞腔分解。"""
    model_config = ConfigDict(frozen=True)

    word: Word
    cells: List[BsCell]
    poincare: List[int]


class WallOccurrence(BaseModel):
    model_config = ConfigDict(frozen=True)

    wall: Root
    indices: List[int] = Field(description="I_l：正索引遞減，其後為終點面牆的負哨兵索引")


class WallOccurrences(BaseModel):
    model_config = ConfigDict(frozen=True)

    gallery: str
    walls: List[WallOccurrence]

    def indices_of(self, wall: Root) -> List[int]:
        for occurrence in self.walls:
            if occurrence.wall == wall:
                return occurrence.indices
        return []


class Block(BaseModel):
    """J^l_h：一次承重穿越 (head) 及其後同一面牆上的承重折返。"""
    model_config = ConfigDict(frozen=True)

    wall: Root
    wall_label: int = Field(ge=1, description="l")
    block_label: int = Field(ge=1, description="h，最後一個區塊為 1")
    indices: List[int] = Field(description="遞減排列，第一個為 head")

    @property
    def head(self) -> int:
        return self.indices[0]


class Relation(BaseModel):
    """x_lead - Σ n_f·x_f = 0。"""
    model_config = ConfigDict(frozen=True)

    wall: Root
    lead: int
    terms: List[Tuple[int, Sign]]


class CellEquations(BaseModel):
    model_config = ConfigDict(frozen=True)

    zero_indices: List[int] = Field(description="J(γ) 減去 J²(γ)")
    relations: List[Relation]

    @property
    def resolved(self) -> bool:
        return all(sign != UNRESOLVED for relation in self.relations for _, sign in relation.terms)


class WallDimension(BaseModel):
    model_config = ConfigDict(frozen=True)

    wall_label: int
    wall: Root
    separating: bool
    size: int = Field(ge=1, description="#(I_l ∩ J²)")
    dim: int = Field(ge=0, description="c^γ_l")


class FibreCell(BaseModel):
    """纖維胞腔 C^γ_x。"""
    model_config = ConfigDict(frozen=True)

    gallery: str
    J: List[int]
    J2: List[int]
    equations: CellEquations
    wall_dims: List[WallDimension]
    dim: int = Field(ge=0)


class FibreReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    word: Word
    target_type: List[int]
    point: Word = Field(description="u 的一個約化字")
    point_length: int = Field(ge=0)
    cells: List[FibreCell]
    poincare: List[int]
    dim: int
    components: List[str]
    connected: bool


class FibreSweep(BaseModel):
    """所有固定點上的纖維，以及 Σ_x q^{ℓ(u)}·P_x(q) = (1+q)^r 的檢查結果。"""
    model_config = ConfigDict(frozen=True)

    word: Word
    target_type: List[int]
    points: List[str]
    reports: List[FibreReport]
    weighted_sum: List[int]
    identity_holds: bool


class FieldSpec(BaseModel):
    """質數體 F_p。"""
    model_config = ConfigDict(frozen=True)

    prime: int = Field(ge=2)

    @field_validator("prime")
    @classmethod
    def prime_must_be_prime(cls, value: int) -> int:
        if not galois.is_prime(value):
            raise ValueError(f"{value} 不是質數")
        return value

    @property
    def gf(self) -> type[galois.FieldArray]:
        return galois.GF(self.prime)


@dataclass(frozen=True)
class SignTable:
    """n(i, β)：s_i p_β(λ) s_i^{-1} = p_{s_i(β)}(n·λ)。"""
    datum_name: str
    entries: Dict[Tuple[int, Root], int] = field(hash=False)

    def lookup(self, i: int, beta: Root) -> Optional[int]:
        return self.entries.get((i, beta))


@dataclass
class PointedGallery:
    """Bott-Samelson 簇上以矩陣實現的點 [g_r, ..., g_1]。"""
    gallery_type: GalleryType
    chart: Gallery
    coords: Tuple[int, ...]
    field_spec: FieldSpec
    factors: List[galois.FieldArray]
    products: List[galois.FieldArray]  # products[p] = g_r ⋯ g_{r-p+1}，products[0] 為單位矩陣

    @property
    def product(self) -> galois.FieldArray:
        return self.products[-1]


@dataclass(frozen=True)
class TargetFlag:
    """乘積矩陣在 G/P 中的位置：所在 Bruhat 胞腔，以及是否恰為固定點 uP。"""
    cell: WeylElement
    coset_rep: WeylElement
    fixed: bool


class Census(BaseModel):
    """F_q 點數普查結果。"""
    model_config = ConfigDict(frozen=True)

    prime: int
    total: int
    per_class: Dict[str, int] = Field(description="依收縮後的組合畫廊分類")
    per_fixed_point: Dict[str, int] = Field(description="落在 T 固定點 uP 上的點數")
    per_schubert_cell: Dict[str, int] = Field(description="落在 Bruhat 胞腔 BuP/P 中的點數")


class CellCheckResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    gallery: str
    passed: bool
    trials: int
    counterexample: Optional[List[int]] = None
    reason: Optional[str] = None
    nonlinear: bool = Field(default=False, description="交換子產生高次項，胞腔不是座標卡中的線性子空間")
    exact_equations: List[str] = Field(default_factory=list, description="nonlinear 時由矩陣乘積得到的多項式方程式")
