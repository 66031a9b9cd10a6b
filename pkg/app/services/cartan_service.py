# app/services/cartan_service.py: 根系與 Weyl 群的精確整數運算
# 慣例：Cartan 矩陣 a[i][j] = <α_j, α_i^∨>，s_i(α_j) = α_j - a[i][j]·α_i。
# Weyl 群元素以單根的像 (images) 為標準形，字只是輸入與輸出的表示法。

from collections import deque
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from app.exceptions import InvalidCartanType, InvalidRoot, InvalidInput, InvariantViolation, NonReducedWord
from app.logging_config import get_logger
from app.models import CartanDatum, CartanFamily, ParabolicType, Root, WeylElement, Word

logger = get_logger("cartan")

# 正根個數，用於驗證反射閉包
_POSITIVE_ROOT_COUNTS = {
    CartanFamily.A: lambda n: n * (n + 1) // 2,
    CartanFamily.B: lambda n: n * n,
    CartanFamily.C: lambda n: n * n,
    CartanFamily.D: lambda n: n * (n - 1),
    CartanFamily.E: lambda n: {6: 36, 7: 63, 8: 120}[n],
    CartanFamily.F: lambda n: 24,
    CartanFamily.G: lambda n: 6,
}

_VALID_RANKS = {
    CartanFamily.A: lambda n: n >= 1,
    CartanFamily.B: lambda n: n >= 2,
    CartanFamily.C: lambda n: n >= 2,
    CartanFamily.D: lambda n: n >= 4,
    CartanFamily.E: lambda n: n in (6, 7, 8),
    CartanFamily.F: lambda n: n == 4,
    CartanFamily.G: lambda n: n == 2,
}

_DATUM_CACHE: Dict[Tuple[CartanFamily, int], CartanDatum] = {}


def _cartan_matrix(family: CartanFamily, n: int) -> Tuple[Tuple[int, ...], ...]:
    a = [[2 if i == j else 0 for j in range(n)] for i in range(n)]

    def link(i: int, j: int, a_ij: int = -1, a_ji: int = -1) -> None:
        # 1 起算的索引
        a[i - 1][j - 1] = a_ij
        a[j - 1][i - 1] = a_ji

    if family in (CartanFamily.A, CartanFamily.B, CartanFamily.C):
        for i in range(1, n):
            link(i, i + 1)
        if family == CartanFamily.B:
            link(n - 1, n, -1, -2)  # α_n 為短根
        elif family == CartanFamily.C:
            link(n - 1, n, -2, -1)  # α_n 為長根
    elif family == CartanFamily.D:
        for i in range(1, n - 1):
            link(i, i + 1)
        link(n - 2, n)
    elif family == CartanFamily.E:
        # Bourbaki 編號：1-3-4-5-...-n，2 接在 4 上
        link(1, 3)
        link(3, 4)
        link(2, 4)
        for i in range(4, n):
            link(i, i + 1)
    elif family == CartanFamily.F:
        link(1, 2)
        link(2, 3, -1, -2)
        link(3, 4)
    elif family == CartanFamily.G:
        link(1, 2, -3, -1)  # α_1 為短根
    return tuple(tuple(row) for row in a)


def is_positive(beta: Root) -> bool:
    return any(c > 0 for c in beta)


def negate(beta: Root) -> Root:
    return tuple(-c for c in beta)


def abs_root(beta: Root) -> Root:
    return beta if is_positive(beta) else negate(beta)


def _reflect(a: Tuple[Tuple[int, ...], ...], i: int, beta: Root) -> Root:
    # s_i(β) = β - (Σ_j β_j a[i][j]) α_i
    row = a[i - 1]
    pairing = sum(b * row[j] for j, b in enumerate(beta))
    if pairing == 0:
        return beta
    result = list(beta)
    result[i - 1] -= pairing
    return tuple(result)


def build_cartan(family, rank: int) -> CartanDatum:
    """
    建立有限型 Cartan 資料，並以廣度優先反射閉包預先計算所有根。

    Raises:
        InvalidCartanType: 族或秩不合法。
        InvariantViolation: 閉包大小與已知正根數不符。
    """
    try:
        if not isinstance(family, CartanFamily):
            family = CartanFamily(str(family).upper())
    except ValueError:
        raise InvalidCartanType(detail=f"未知的族 {family!r}")
    if not isinstance(rank, int) or not _VALID_RANKS[family](rank):
        raise InvalidCartanType(detail=f"{family.value}{rank} 不是有限型 Cartan 類型")

    cached = _DATUM_CACHE.get((family, rank))
    if cached is not None:
        return cached

    a = _cartan_matrix(family, rank)
    simple = [tuple(1 if k == i else 0 for k in range(rank)) for i in range(rank)]
    seen: Set[Root] = set(simple)
    order: List[Root] = list(simple)
    queue = deque(simple)
    while queue:
        beta = queue.popleft()
        for i in range(1, rank + 1):
            image = _reflect(a, i, beta)
            if image not in seen:
                seen.add(image)
                order.append(image)
                queue.append(image)

    expected = _POSITIVE_ROOT_COUNTS[family](rank)
    if len(order) != 2 * expected:
        raise InvariantViolation(detail=f"{family.value}{rank} 的根閉包大小 {len(order)} 不等於 {2 * expected}")

    positive = tuple(sorted((r for r in order if is_positive(r)), key=lambda r: (sum(r), r)))
    roots = positive + tuple(negate(r) for r in positive)
    datum = CartanDatum(
        family=family,
        rank=rank,
        cartan_matrix=a,
        roots=roots,
        positive_roots=positive,
        root_index={r: k for k, r in enumerate(roots)},
    )
    _DATUM_CACHE[(family, rank)] = datum
    logger.debug("建立 Cartan 資料 %s：%d 個正根", datum.name, len(positive))
    return datum


def parse_cartan(name: str) -> CartanDatum:
    """解析 'A3'、'B2' 等字串。"""
    name = name.strip()
    if len(name) < 2 or not name[1:].isdigit():
        raise InvalidCartanType(detail=f"無法解析 Cartan 類型 {name!r}")
    return build_cartan(name[0], int(name[1:]))


def _check_letter(datum: CartanDatum, i: int) -> None:
    if not 1 <= i <= datum.rank:
        raise InvalidInput(detail=f"單根索引 {i} 不在 1..{datum.rank} 之間")


def reflect(datum: CartanDatum, i: int, beta: Root) -> Root:
    """s_i(β)。"""
    _check_letter(datum, i)
    if not datum.is_root(beta):
        raise InvalidRoot(detail=f"{beta} 不是 {datum.name} 的根")
    return _reflect(datum.cartan_matrix, i, beta)


def pairing(datum: CartanDatum, beta: Root, i: int) -> int:
    """<β, α_i^∨>。"""
    row = datum.cartan_matrix[i - 1]
    return sum(b * row[j] for j, b in enumerate(beta))


def apply(w: WeylElement, beta: Root) -> Root:
    """w(β)，由單根的像線性展開。"""
    rank = len(beta)
    out = [0] * rank
    for coefficient, image in zip(beta, w.images):
        if coefficient:
            for k in range(rank):
                out[k] += coefficient * image[k]
    return tuple(out)


def _length_of(datum: CartanDatum, images: Tuple[Root, ...]) -> int:
    candidate = WeylElement(images=images, length=0)
    return sum(1 for beta in datum.positive_roots if not is_positive(apply(candidate, beta)))


def identity(datum: CartanDatum) -> WeylElement:
    return WeylElement(images=tuple(datum.simple_root(i) for i in range(1, datum.rank + 1)), length=0)


def times_simple(datum: CartanDatum, w: WeylElement, i: int) -> WeylElement:
    """w·s_i：(w s_i)(α_j) = w(α_j) - a[i][j]·w(α_i)。長度由 w(α_i) 的正負決定。"""
    row = datum.cartan_matrix[i - 1]
    image_i = w.images[i - 1]
    images = tuple(
        tuple(img[k] - row[j] * image_i[k] for k in range(datum.rank)) if row[j] else img
        for j, img in enumerate(w.images)
    )
    step = 1 if is_positive(image_i) else -1
    return WeylElement(images=images, length=w.length + step)


def simple_times(datum: CartanDatum, i: int, w: WeylElement, known_length: Optional[int] = None) -> WeylElement:
    """s_i·w：每個像各做一次反射。呼叫端若已知結果長度可直接傳入。"""
    images = tuple(_reflect(datum.cartan_matrix, i, img) for img in w.images)
    if known_length is None:
        known_length = _length_of(datum, images)
    return WeylElement(images=images, length=known_length)


def weyl_from_word(datum: CartanDatum, word: Iterable[int]) -> WeylElement:
    """字 (源點優先) 的乘積 s_{w[0]} s_{w[1]} ⋯。空字為單位元。"""
    w = identity(datum)
    for i in word:
        _check_letter(datum, i)
        w = times_simple(datum, w, i)
    return w


def multiply(datum: CartanDatum, u: WeylElement, v: WeylElement) -> WeylElement:
    images = tuple(apply(u, img) for img in v.images)
    return WeylElement(images=images, length=_length_of(datum, images))


def length(w: WeylElement) -> int:
    return w.length


def reduced_word(datum: CartanDatum, w: WeylElement) -> Word:
    """以右降序剝離求出一個約化字（源點優先）。"""
    letters: List[int] = []
    current = w
    while current.length > 0:
        i = next(i for i in range(1, datum.rank + 1) if not is_positive(current.images[i - 1]))
        letters.append(i)
        current = times_simple(datum, current, i)
    return tuple(reversed(letters))


def word_label(datum: CartanDatum, w: WeylElement) -> str:
    """報告中固定點的標籤：約化字以逗號分隔，單位元為 'e'。"""
    word = reduced_word(datum, w)
    return ",".join(str(i) for i in word) if word else "e"


def inverse(datum: CartanDatum, w: WeylElement) -> WeylElement:
    return weyl_from_word(datum, reversed(reduced_word(datum, w)))


def inversion_set(datum: CartanDatum, w: WeylElement) -> FrozenSet[Root]:
    """{π > 0 : w^{-1}(π) < 0}，即分隔 C 與 w(C) 的牆。"""
    w_inv = inverse(datum, w)
    return frozenset(beta for beta in datum.positive_roots if not is_positive(apply(w_inv, beta)))


def is_reduced(datum: CartanDatum, word: Iterable[int]) -> bool:
    word = tuple(word)
    return weyl_from_word(datum, word).length == len(word)


def require_reduced(datum: CartanDatum, word: Iterable[int]) -> Word:
    word = tuple(word)
    if not is_reduced(datum, word):
        raise NonReducedWord(detail=f"{','.join(map(str, word))} 不是 {datum.name} 中的約化字")
    return word


def bruhat_leq(datum: CartanDatum, u: WeylElement, w: WeylElement) -> bool:
    """
    Bruhat 序：取 w 的右降序 s，若 us < u 則比較 (us, ws)，否則比較 (u, ws)。
    """
    while True:
        if u.length > w.length:
            return False
        if w.length == 0:
            return u.length == 0
        if u.length == w.length:
            return u == w
        s = next(i for i in range(1, datum.rank + 1) if not is_positive(w.images[i - 1]))
        if not is_positive(u.images[s - 1]):
            u = times_simple(datum, u, s)
        w = times_simple(datum, w, s)


def min_coset_rep(datum: CartanDatum, w: WeylElement, target_type: ParabolicType) -> WeylElement:
    """w·W_{T0} 中長度最小的代表元：反覆右乘使 w(α_j) < 0 的 s_j (j ∈ T0)。"""
    current = w
    while True:
        descent = next((j for j in target_type.sorted if not is_positive(current.images[j - 1])), None)
        if descent is None:
            return current
        current = times_simple(datum, current, descent)


def positive_roots_of(datum: CartanDatum, target_type: ParabolicType) -> Tuple[Root, ...]:
    """R_{T0}^+：支撐包含於 T0 的正根。"""
    return tuple(
        beta for beta in datum.positive_roots
        if all(c == 0 or (k + 1) in target_type.generators for k, c in enumerate(beta))
    )


def bruhat_interval(datum: CartanDatum, word: Word) -> Set[WeylElement]:
    """約化字 w 之下的 Bruhat 區間：所有子字乘積。"""
    elements: Set[WeylElement] = {identity(datum)}
    for i in word:
        elements |= {times_simple(datum, x, i) for x in elements}
    return elements


def _sort_key(w: WeylElement):
    return (w.length, w.images)


def coset_fixed_points(datum: CartanDatum, word: Iterable[int], target_type: ParabolicType) -> List[WeylElement]:
    """
    Schubert 簇 X(w̄) 的 T 固定點：所有滿足 ū ≤ w̄ 的最短陪集代表元 u。

    Raises:
        NonReducedWord: 字不是約化字。
    """
    word = require_reduced(datum, word)
    reps = {min_coset_rep(datum, x, target_type) for x in bruhat_interval(datum, word)}
    return sorted(reps, key=_sort_key)


def longest_element(datum: CartanDatum, target_type: Optional[ParabolicType] = None) -> WeylElement:
    """W（或 W_{T0}）的最長元素。"""
    generators = range(1, datum.rank + 1) if target_type is None else target_type.sorted
    w = identity(datum)
    while True:
        ascent = next((i for i in generators if is_positive(w.images[i - 1])), None)
        if ascent is None:
            return w
        w = times_simple(datum, w, ascent)
