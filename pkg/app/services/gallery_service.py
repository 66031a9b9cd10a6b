# app/services/gallery_service.py: 組合畫廊、牆序列、承重牆與 Bott-Samelson 胞腔分解
# 儲存一律源點優先（位置 p），對外顯示報告索引 j = r - p + 1。

import itertools
from dataclasses import dataclass
from math import comb
from typing import FrozenSet, Iterable, List, Optional, Tuple

from app import config
from app.exceptions import BudgetExceeded, InvalidInput, InvariantViolation
from app.logging_config import get_logger
from app.models import (
    BsCell, BsCellsReport, CartanDatum, ChartEntry, ChartSpec, Gallery, GalleryType,
    ParabolicType, Root, WallKind, WallRecord, WeylElement,
)
from app.services import cartan_service as cartan

logger = get_logger("gallery")


@dataclass(frozen=True)
class Step:
    """走訪畫廊時每個位置的原始資料。"""
    position: int
    letter: int
    crossing: bool
    beta: Root
    wall: Root
    load_bearing: bool


def gallery_type(datum: CartanDatum, word: Iterable[int], target_type: Optional[ParabolicType] = None) -> GalleryType:
    """
    由約化字與終點面的型建立最小畫廊型 τ。

    Raises:
        InvalidInput: 字母或終點型超出秩的範圍。
        BudgetExceeded: 字長超過 BS_MAX_WORD_LENGTH。
        NonReducedWord: 字不是約化字。
    """
    word = tuple(word)
    target_type = target_type or ParabolicType()
    if any(not 1 <= j <= datum.rank for j in target_type.generators):
        raise InvalidInput(detail=f"終點型 {target_type.label} 超出 {datum.name} 的單根索引")
    if len(word) > config.MAX_WORD_LENGTH:
        raise BudgetExceeded(detail=f"字長 {len(word)} 超過上限 {config.MAX_WORD_LENGTH}")
    for letter in word:
        if not 1 <= letter <= datum.rank:
            raise InvalidInput(detail=f"單根索引 {letter} 不在 1..{datum.rank} 之間")
    cartan.require_reduced(datum, word)

    tau = GalleryType(datum=datum, word=word, target_type=target_type)
    if not is_coset_minimal(tau):
        # 此時畫廊型不對應最小畫廊，但胞腔與纖維計算仍然成立
        logger.warning("字 %s 不是 W/W_{%s} 的最短代表元之約化字", word, target_type.label)
    return tau


def is_coset_minimal(tau: GalleryType) -> bool:
    w = cartan.weyl_from_word(tau.datum, tau.word)
    return cartan.min_coset_rep(tau.datum, w, tau.target_type) == w


def enumerate_galleries(tau: GalleryType) -> List[Gallery]:
    """全部 2^r 個組合畫廊，依位元向量字典序。"""
    return [Gallery(bits) for bits in itertools.product((0, 1), repeat=tau.r)]


def _check_length(tau: GalleryType, gallery: Gallery) -> None:
    if gallery.r != tau.r:
        raise InvalidInput(detail=f"畫廊 {gallery.label} 的長度與字長 {tau.r} 不符")


def product(tau: GalleryType, gallery: Gallery) -> WeylElement:
    """γ_r⋯γ_1：穿越位置的字母依序相乘。"""
    _check_length(tau, gallery)
    return cartan.weyl_from_word(tau.datum, (k for k, bit in zip(tau.word, gallery.bits) if bit))


def target(tau: GalleryType, gallery: Gallery) -> WeylElement:
    """畫廊終點面對應的最短陪集代表元。"""
    return cartan.min_coset_rep(tau.datum, product(tau, gallery), tau.target_type)


def walk(tau: GalleryType, gallery: Gallery) -> Tuple[List[Step], WeylElement]:
    _check_length(tau, gallery)
    datum = tau.datum
    prefix = cartan.identity(datum)
    prefix_inv = prefix
    steps: List[Step] = []
    for p, (k, bit) in enumerate(zip(tau.word, gallery.bits), start=1):
        if bit:
            prefix = cartan.times_simple(datum, prefix, k)
            # (w s)^{-1} = s w^{-1}
            prefix_inv = cartan.simple_times(datum, k, prefix_inv, known_length=prefix.length)
        beta = prefix.images[k - 1]
        wall = cartan.abs_root(beta)
        load_bearing = not cartan.is_positive(beta)
        if config.DUAL_CHECKS:
            # prefix_inv 由 simple_times 另行累積，只有兩者不再互逆時這個判定才會與 β 的正負不同
            separates = not cartan.is_positive(cartan.apply(prefix_inv, wall))
            if separates != load_bearing:
                raise InvariantViolation(
                    detail=f"畫廊 {gallery.label} 在索引 {tau.r - p + 1} 的承重判定與半空間檢查不一致"
                )
        steps.append(Step(p, k, bool(bit), beta, wall, load_bearing))
    return steps, prefix


def wall_sequence(tau: GalleryType, gallery: Gallery) -> List[WallRecord]:
    """
    依報告索引 r, r-1, ..., 1 列出 β_j = (γ_r⋯γ_j)(α_{k_j}) 與牆的資料。

    Raises:
        InvariantViolation: BS_DUAL_CHECKS 開啟時，β_j 的正負與半空間檢查不一致（走法的前綴與其反元素不再互逆）。
    """
    steps, _ = walk(tau, gallery)
    return [
        WallRecord(
            index=tau.r - step.position + 1,
            wall=step.wall,
            beta=step.beta,
            kind=WallKind.CROSSING if step.crossing else WallKind.BEND,
            load_bearing=step.load_bearing,
        )
        for step in steps
    ]


def load_bearing_set(tau: GalleryType, gallery: Gallery) -> FrozenSet[int]:
    """J(γ) = {j : β_j < 0}；|J(γ)| 為胞腔維度。"""
    steps, _ = walk(tau, gallery)
    return frozenset(tau.r - step.position + 1 for step in steps if step.load_bearing)


def is_minimal_gallery(tau: GalleryType, gallery: Gallery) -> bool:
    """牆兩兩相異，且恰為分隔 C 與終點面的牆。"""
    steps, _ = walk(tau, gallery)
    walls = [step.wall for step in steps]
    if len(set(walls)) != len(walls):
        return False
    return set(walls) == cartan.inversion_set(tau.datum, target(tau, gallery))


def minimal_galleries(tau: GalleryType, u: Optional[WeylElement] = None) -> List[Gallery]:
    """終點為 u（預設為 w 的最短代表元）的所有最小畫廊。"""
    if u is None:
        u = cartan.min_coset_rep(tau.datum, cartan.weyl_from_word(tau.datum, tau.word), tau.target_type)
    return [
        gallery for gallery in enumerate_galleries(tau)
        if target(tau, gallery) == u and is_minimal_gallery(tau, gallery)
    ]


def cell_order_leq(tau: GalleryType, delta: Gallery, gamma: Gallery) -> bool:
    """δ ≤ γ ⟺ J(δ) ⊆ J(γ)。"""
    return load_bearing_set(tau, delta) <= load_bearing_set(tau, gamma)


def closure_cells(tau: GalleryType, gamma: Gallery) -> List[Gallery]:
    """
    胞腔 C^γ 的閉包所含的胞腔 {δ : δ ≤ γ}，恰有 2^{j(γ)} 個。

    Raises:
        InvariantViolation: 個數不等於 2^{j(γ)}。
    """
    j_gamma = load_bearing_set(tau, gamma)
    below = [delta for delta in enumerate_galleries(tau) if load_bearing_set(tau, delta) <= j_gamma]
    if len(below) != 2 ** len(j_gamma):
        raise InvariantViolation(detail=f"{gamma.label} 的閉包有 {len(below)} 個胞腔，預期 {2 ** len(j_gamma)}")
    return below


def bs_cells_report(tau: GalleryType) -> BsCellsReport:
    """
    Bott-Samelson 簇的胞腔分解：每個畫廊的 J(γ)、維度，以及 Poincaré 係數。

    Returns:
        BsCellsReport: 胞腔依畫廊字典序排列，poincare[p] = binomial(r, p)。

    Raises:
        InvariantViolation: J 映射不是單射，或 Poincaré 係數不是二項式係數。
    """
    cells: List[BsCell] = []
    seen = set()
    poincare = [0] * (tau.r + 1)
    for gallery in enumerate_galleries(tau):
        j_set = load_bearing_set(tau, gallery)
        if j_set in seen:
            raise InvariantViolation(detail=f"J 映射不是單射：{sorted(j_set, reverse=True)} 重複出現")
        seen.add(j_set)
        poincare[len(j_set)] += 1
        cells.append(BsCell(gallery=gallery.label, J=sorted(j_set, reverse=True), dim=len(j_set)))

    expected = [comb(tau.r, p) for p in range(tau.r + 1)]
    if poincare != expected:
        raise InvariantViolation(detail=f"Poincaré 係數 {poincare} 不等於二項式係數 {expected}")
    logger.info("%s 字 %s：%d 個 Bott-Samelson 胞腔", tau.datum.name, tau.word, len(cells))
    return BsCellsReport(word=tau.word, cells=cells, poincare=poincare)


def chart(tau: GalleryType, gallery: Gallery) -> ChartSpec:
    """仿射座標卡 U^γ：穿越位置取 p_{α}(x)s，折返位置取 p_{-α}(x)；J(γ) 以外的座標在 C^γ 上為 0。"""
    j_set = load_bearing_set(tau, gallery)
    entries = []
    for p, bit in enumerate(gallery.bits, start=1):
        j = tau.r - p + 1
        entries.append(ChartEntry(
            index=j,
            root_sign="+" if bit else "-",
            reflection="s" if bit else "1",
            pinned=j not in j_set,
        ))
    return ChartSpec(gallery=gallery.label, entries=entries)
