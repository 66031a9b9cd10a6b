# app/services/fibre_service.py: 解消映射在 T 固定點上的纖維
# 流程：固定點 → 落在其上的組合畫廊 → 牆的重數與 J² → 區塊分解 → 胞腔方程式 → 纖維報告。

from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import sympy

from app import config
from app.exceptions import InvalidInput, InvariantViolation, MalformedStructure, PointNotInVariety, TargetMismatch
from app.logging_config import get_logger
from app.models import (
    UNRESOLVED, Block, CartanDatum, CellEquations, FibreCell, FibreReport, FibreSweep, FixedPoint,
    Gallery, GalleryType, ParabolicType, Relation, Root, SignTable, TargetWalls, WallDimension,
    WallOccurrence, WallOccurrences, WeylElement,
)
from app.services import cartan_service as cartan
from app.services import gallery_service

logger = get_logger("fibre")

Q = sympy.Symbol("q")


def fixed_point(
    datum: CartanDatum,
    u: WeylElement,
    target_type: Optional[ParabolicType] = None,
    convention: TargetWalls = TargetWalls.FULL,
) -> FixedPoint:
    """
    建立固定點 x = ū(P)。u 會先換成最短陪集代表元。

    face_walls 在 full 慣例下為 {|u(ν)| : ν ∈ R_{T0}^+}，simple 慣例下只取 {|u(α_j)| : j ∈ T0}。
    """
    target_type = target_type or ParabolicType()
    u = cartan.min_coset_rep(datum, u, target_type)
    if convention == TargetWalls.FULL:
        sources = cartan.positive_roots_of(datum, target_type)
    else:
        sources = tuple(datum.simple_root(j) for j in target_type.sorted)
    face_walls = sorted({cartan.abs_root(cartan.apply(u, nu)) for nu in sources}, key=lambda r: (sum(r), r))
    return FixedPoint(
        u=u,
        target_type=target_type,
        face_walls=tuple(face_walls),
        separating_walls=cartan.inversion_set(datum, u),
        convention=convention,
    )


def _word_element(tau: GalleryType) -> WeylElement:
    return cartan.weyl_from_word(tau.datum, tau.word)


def _require_in_variety(tau: GalleryType, x: FixedPoint) -> None:
    w_min = cartan.min_coset_rep(tau.datum, _word_element(tau), tau.target_type)
    if not cartan.bruhat_leq(tau.datum, x.u, w_min):
        raise PointNotInVariety(
            detail=f"{cartan.word_label(tau.datum, x.u)} 不在 Schubert 簇 X({','.join(map(str, tau.word))}) 中"
        )


def point_from_word(
    tau: GalleryType,
    point_word: Sequence[int],
    convention: TargetWalls = TargetWalls.FULL,
) -> FixedPoint:
    """
    由約化字解析固定點，並確認 ū ≤ w̄。

    Raises:
        PointNotInVariety: 點的字不是約化字，或 ū 不在 w̄ 之下。
    """
    point_word = tuple(point_word)
    if any(not 1 <= i <= tau.datum.rank for i in point_word):
        raise InvalidInput(detail=f"點 {point_word} 含超出秩的字母")
    if not cartan.is_reduced(tau.datum, point_word):
        raise PointNotInVariety(detail=f"點 {','.join(map(str, point_word))} 不是約化字，無法對應到固定點")
    x = fixed_point(tau.datum, cartan.weyl_from_word(tau.datum, point_word), tau.target_type, convention)
    _require_in_variety(tau, x)
    return x


def galleries_over(tau: GalleryType, x: FixedPoint) -> List[Gallery]:
    """
    終點為 x 的所有組合畫廊，依字典序。

    深度優先搜尋；若 w^{-1}u 所在陪集的最短長度已超過剩餘字母數，則剪枝。
    """
    datum = tau.datum
    found: List[Gallery] = []

    def visit(p: int, bits: Tuple[int, ...], prefix: WeylElement, prefix_inv: WeylElement) -> None:
        remaining = tau.r - p
        gap = cartan.min_coset_rep(datum, cartan.multiply(datum, prefix_inv, x.u), tau.target_type)
        if gap.length > remaining:
            return
        if remaining == 0:
            found.append(Gallery(bits))
            return
        k = tau.word[p]
        visit(p + 1, bits + (0,), prefix, prefix_inv)
        crossed = cartan.times_simple(datum, prefix, k)
        visit(p + 1, bits + (1,), crossed, cartan.simple_times(datum, k, prefix_inv, known_length=crossed.length))

    start = cartan.identity(datum)
    visit(0, (), start, start)
    return found


@dataclass
class _CellStructure:
    steps: List[gallery_service.Step]
    occurrences: List[Tuple[Root, List[int]]]  # 依首次出現排序；索引遞減，哨兵在後
    j_set: FrozenSet[int]
    j2: FrozenSet[int]

    def step_at(self, j: int) -> gallery_service.Step:
        return self.steps[len(self.steps) - j]

    def wall_label(self, position_in_list: int) -> int:
        return len(self.occurrences) - position_in_list


def _structure(tau: GalleryType, gallery: Gallery, x: FixedPoint) -> _CellStructure:
    steps, end = gallery_service.walk(tau, gallery)
    if cartan.min_coset_rep(tau.datum, end, tau.target_type) != x.u:
        raise TargetMismatch(
            detail=f"畫廊 {gallery.label} 的終點不是 {cartan.word_label(tau.datum, x.u)}"
        )
    r = tau.r
    by_wall: Dict[Root, List[int]] = {}
    for step in steps:
        by_wall.setdefault(step.wall, []).append(r - step.position + 1)
    for wall in x.face_walls:
        by_wall.setdefault(wall, []).append(x.sentinel(wall))
    occurrences = list(by_wall.items())

    j_set = frozenset(r - step.position + 1 for step in steps if step.load_bearing)
    j2 = frozenset(
        j for wall, indices in occurrences if len(indices) >= 2
        for j in indices if j in j_set
    )
    return _CellStructure(steps=steps, occurrences=occurrences, j_set=j_set, j2=j2)


def wall_occurrences(tau: GalleryType, gallery: Gallery, x: FixedPoint) -> WallOccurrences:
    """
    把 𝓜(γ) 依牆分組為 I_l：正索引遞減，終點面牆另附負的哨兵索引。

    Raises:
        TargetMismatch: γ 的終點不是 x。
    """
    structure = _structure(tau, gallery, x)
    return WallOccurrences(
        gallery=gallery.label,
        walls=[WallOccurrence(wall=wall, indices=indices) for wall, indices in structure.occurrences],
    )


def j2_set(tau: GalleryType, gallery: Gallery, x: FixedPoint) -> FrozenSet[int]:
    """J²(γ)：所在的牆在 𝓜(γ) 中（含終點面牆）至少出現兩次的承重索引。"""
    return _structure(tau, gallery, x).j2


def _blocks(structure: _CellStructure, gallery: Gallery) -> Dict[Root, List[Block]]:
    result: Dict[Root, List[Block]] = {}
    for position_in_list, (wall, indices) in enumerate(structure.occurrences):
        trace = [j for j in indices if j > 0 and j in structure.j2]
        if not trace:
            continue
        runs: List[List[int]] = []
        for j in trace:
            if structure.step_at(j).crossing:
                runs.append([j])
            elif runs:
                runs[-1].append(j)
            else:
                raise MalformedStructure(
                    detail=f"畫廊 {gallery.label}：索引 {j} 是牆 {wall} 上的承重折返，但之前沒有承重穿越"
                )
        label = structure.wall_label(position_in_list)
        result[wall] = [
            Block(wall=wall, wall_label=label, block_label=len(runs) - h, indices=run)
            for h, run in enumerate(runs)
        ]
    return result


def blocks(tau: GalleryType, gallery: Gallery, x: FixedPoint) -> List[Block]:
    """
    把每個 I_l ∩ J² 切成區塊 J^l_h：一次承重穿越後接同一面牆上的承重折返。

    Raises:
        TargetMismatch: γ 的終點不是 x。
        MalformedStructure: J² 中的折返之前沒有同一面牆上的承重穿越。
    """
    structure = _structure(tau, gallery, x)
    return [block for wall_blocks in _blocks(structure, gallery).values() for block in wall_blocks]


def _absolute_sign(
    tau: GalleryType,
    structure: _CellStructure,
    j: int,
    wall: Root,
    sign_table: SignTable,
) -> Optional[int]:
    """
    把索引 j 的因子 p_{±α_k}(x_j) 向源點方向滑過之前的每個穿越反射，
    回傳累積的 n(i, β)；符號表缺項時回傳 None。滑移終點必為正根 wall。
    """
    datum = tau.datum
    step = structure.step_at(j)
    simple = datum.simple_root(step.letter)
    root = simple if step.crossing else cartan.negate(simple)
    sign = 1
    for later in range(j + 1, tau.r + 1):
        before = structure.step_at(later)
        if not before.crossing:
            continue
        value = sign_table.lookup(before.letter, root)
        if value is None:
            return None
        sign *= value
        root = cartan.reflect(datum, before.letter, root)
    if root != wall:
        raise InvariantViolation(detail=f"索引 {j} 的滑移終點 {root} 不是牆 {wall}")
    return sign


def _relation(
    tau: GalleryType,
    structure: _CellStructure,
    wall: Root,
    block_list: List[Block],
    sign_table: Optional[SignTable],
) -> Relation:
    """
    牆上所有區塊的索引一起出現在關係式中；lead 取最後一個區塊的 head。
    係數 n_f = -ε_lead·ε_f，ε 為滑移到源點的累積符號。
    """
    lead = block_list[-1].head
    support = sorted((j for block in block_list for j in block.indices if j != lead), reverse=True)
    if sign_table is None:
        return Relation(wall=wall, lead=lead, terms=[(j, UNRESOLVED) for j in support])
    lead_sign = _absolute_sign(tau, structure, lead, wall, sign_table)
    terms = []
    for j in support:
        sign = _absolute_sign(tau, structure, j, wall, sign_table)
        terms.append((j, UNRESOLVED if lead_sign is None or sign is None else -lead_sign * sign))
    return Relation(wall=wall, lead=lead, terms=terms)


def _equations(
    tau: GalleryType,
    gallery: Gallery,
    x: FixedPoint,
    structure: _CellStructure,
    sign_table: Optional[SignTable],
) -> Tuple[CellEquations, List[WallDimension]]:
    relations: List[Relation] = []
    dims: List[WallDimension] = []
    wall_blocks = _blocks(structure, gallery)
    occurrences = dict(structure.occurrences)
    for wall, block_list in wall_blocks.items():
        last = block_list[-1]
        separating = wall in x.separating_walls
        smallest = last.indices[-1]
        index_condition = smallest > 0 and smallest == occurrences[wall][-1]

        if x.convention == TargetWalls.FULL:
            emit = separating
            if config.DUAL_CHECKS and index_condition != separating:
                raise InvariantViolation(
                    detail=f"畫廊 {gallery.label}：牆 {wall} 的分隔判定與索引條件不一致"
                )
        else:
            emit = index_condition
            if index_condition != separating:
                logger.warning(
                    "畫廊 %s：牆 %s 在 simple 慣例下的索引條件 (%s) 與分隔判定 (%s) 不一致",
                    gallery.label, wall, index_condition, separating,
                )

        if emit:
            relations.append(_relation(tau, structure, wall, block_list, sign_table))

        size = sum(len(block.indices) for block in block_list)
        dims.append(WallDimension(
            wall_label=last.wall_label,
            wall=wall,
            separating=emit,
            size=size,
            dim=size - (1 if emit else 0),
        ))
    zero_indices = sorted(structure.j_set - structure.j2, reverse=True)
    return CellEquations(zero_indices=zero_indices, relations=relations), dims


def cell_equations(
    tau: GalleryType,
    gallery: Gallery,
    x: FixedPoint,
    sign_table: Optional[SignTable] = None,
) -> CellEquations:
    """
    C^γ_x 在座標卡 U^γ 中的方程式：J∖J² 上的座標為 0，
    每面分隔 C 與 F_x 且 J² 非空的牆貢獻一條 x_lead - Σ n_f·x_f = 0，
    支撐為該牆在 J² 中的全部索引（所有區塊）。

    這些是方程式的一次部分。根群的交換子可能再加上高次項（例如 x5 = ±x6·x4），
    此時胞腔仍是仿射空間，但不是座標卡中的線性子空間；A 型可用
    chevalley_service.linearity_residuals 判定。

    Args:
        sign_table: n(i, β) 符號表；為 None 時係數標記為 UNRESOLVED。

    Raises:
        TargetMismatch: γ 的終點不是 x。
        MalformedStructure: 區塊分解失敗。
        InvariantViolation: full 慣例下分隔判定與索引條件不一致。
    """
    structure = _structure(tau, gallery, x)
    equations, _ = _equations(tau, gallery, x, structure, sign_table)
    return equations


def fibre_cell(
    tau: GalleryType,
    gallery: Gallery,
    x: FixedPoint,
    sign_table: Optional[SignTable] = None,
) -> FibreCell:
    structure = _structure(tau, gallery, x)
    equations, dims = _equations(tau, gallery, x, structure, sign_table)
    dim = sum(d.dim for d in dims)
    if dim != len(structure.j2) - len(equations.relations):
        raise InvariantViolation(detail=f"畫廊 {gallery.label} 的維度 {dim} 與 |J²| - #關係式 不符")
    logger.debug("胞腔 %s：J=%s, J²=%s, dim=%d", gallery.label, sorted(structure.j_set), sorted(structure.j2), dim)
    return FibreCell(
        gallery=gallery.label,
        J=sorted(structure.j_set, reverse=True),
        J2=sorted(structure.j2, reverse=True),
        equations=equations,
        wall_dims=dims,
        dim=dim,
    )


def fibration_split_check(tau: GalleryType, gallery: Gallery) -> bool:
    """j(γ) = dim C^γ_x + ℓ(u)，其中 x 取 γ 的終點（full 慣例）。"""
    x = fixed_point(tau.datum, gallery_service.target(tau, gallery), tau.target_type)
    cell = fibre_cell(tau, gallery, x)
    return len(cell.J) == cell.dim + x.u.length


def _components(cells: List[FibreCell]) -> Tuple[List[str], bool]:
    j_sets = [frozenset(cell.J) for cell in cells]
    maximal = [
        cell for cell, j_set in zip(cells, j_sets)
        if not any(j_set < other for other in j_sets)
    ]
    components = [cell.gallery for cell in sorted(maximal, key=lambda c: (-c.dim, c.gallery))]

    if not cells:
        return components, False
    # 閉包圖：兩個胞腔可比較時相連
    seen = {0}
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for b in range(len(cells)):
            if b not in seen and (j_sets[a] <= j_sets[b] or j_sets[b] <= j_sets[a]):
                seen.add(b)
                queue.append(b)
    return components, len(seen) == len(cells)


def _assemble(
    tau: GalleryType,
    x: FixedPoint,
    galleries: List[Gallery],
    sign_table: Optional[SignTable],
) -> FibreReport:
    cells = [fibre_cell(tau, gallery, x, sign_table) for gallery in galleries]
    if config.DUAL_CHECKS and x.convention == TargetWalls.FULL:
        for cell in cells:
            if len(cell.J) != cell.dim + x.u.length:
                raise InvariantViolation(
                    detail=f"畫廊 {cell.gallery}：j(γ)={len(cell.J)} 不等於 dim + ℓ(u) = {cell.dim + x.u.length}"
                )

    top = max((cell.dim for cell in cells), default=0)
    poincare = [0] * (top + 1)
    for cell in cells:
        poincare[cell.dim] += 1
    components, connected = _components(cells)
    return FibreReport(
        word=tau.word,
        target_type=list(tau.target_type.sorted),
        point=cartan.reduced_word(tau.datum, x.u),
        point_length=x.u.length,
        cells=cells,
        poincare=poincare,
        dim=top,
        components=components,
        connected=connected,
    )


def fibre_report(tau: GalleryType, x: FixedPoint, sign_table: Optional[SignTable] = None) -> FibreReport:
    """
    組合出纖維 π^{-1}(F_x) 的胞腔分解。

    Args:
        tau: 畫廊型。
        x: 固定點，需滿足 ū ≤ w̄。
        sign_table: 用來決定關係式係數的符號表，可省略。

    Returns:
        FibreReport: 胞腔、Poincaré 係數、維度、不可約分支（最大畫廊）與連通性。

    Raises:
        PointNotInVariety: ū 不在 w̄ 之下。
    """
    _require_in_variety(tau, x)
    report = _assemble(tau, x, galleries_over(tau, x), sign_table)
    logger.info(
        "%s 字 %s 在 %s 上的纖維：Poincaré %s，%d 個分支",
        tau.datum.name, tau.word, cartan.word_label(tau.datum, x.u), report.poincare, len(report.components),
    )
    return report


def _as_poly(coefficients: Sequence[int]) -> sympy.Poly:
    return sympy.Poly(sum(c * Q**k for k, c in enumerate(coefficients)), Q)


def fibre_sweep(
    tau: GalleryType,
    convention: TargetWalls = TargetWalls.FULL,
    sign_table: Optional[SignTable] = None,
) -> FibreSweep:
    """
    掃過 Schubert 簇的每個固定點，並檢查 Σ_x q^{ℓ(u)}·P_x(q) = (1+q)^r。

    Raises:
        InvariantViolation: full 慣例下恆等式不成立。
    """
    datum = tau.datum
    grouped: Dict[WeylElement, List[Gallery]] = {}
    for gallery in gallery_service.enumerate_galleries(tau):
        grouped.setdefault(gallery_service.target(tau, gallery), []).append(gallery)

    reports: List[FibreReport] = []
    labels: List[str] = []
    total = sympy.Poly(0, Q)
    for u in cartan.coset_fixed_points(datum, tau.word, tau.target_type):
        x = fixed_point(datum, u, tau.target_type, convention)
        report = _assemble(tau, x, grouped.get(x.u, []), sign_table)
        reports.append(report)
        labels.append(cartan.word_label(datum, x.u))
        total += _as_poly(report.poincare) * sympy.Poly(Q**x.u.length, Q)

    holds = sympy.expand(total.as_expr() - (1 + Q) ** tau.r) == 0
    if not holds:
        if convention == TargetWalls.FULL:
            raise InvariantViolation(detail=f"Σ q^ℓ(u)·P_x(q) = {total.as_expr()} 不等於 (1+q)^{tau.r}")
        logger.warning("simple 慣例下 Σ q^ℓ(u)·P_x(q) = %s 不等於 (1+q)^%d", total.as_expr(), tau.r)

    weighted = [int(c) for c in reversed(total.all_coeffs())]
    return FibreSweep(
        word=tau.word,
        target_type=list(tau.target_type.sorted),
        points=labels,
        reports=reports,
        weighted_sum=weighted,
        identity_holds=holds,
    )


def closure_of(report: FibreReport, gallery_label: str) -> List[FibreCell]:
    """分支 C^γ_x 的閉包 ⊔_{δ ≤ γ} C^δ_x 所含的胞腔。"""
    anchor = next((cell for cell in report.cells if cell.gallery == gallery_label), None)
    if anchor is None:
        raise InvalidInput(detail=f"畫廊 {gallery_label} 不在此纖維中")
    top = set(anchor.J)
    return [cell for cell in report.cells if set(cell.J) <= top]
