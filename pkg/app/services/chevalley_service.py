# app/services/chevalley_service.py: A 型矩陣實現的獨立驗證
# G = SL_{n+1}，B 為上三角矩陣，X_α = E_{ab}，s_i 為嵌在 (i-1, i) 的 [[0,-1],[1,0]]。
# 有限體矩陣一律使用 galois.GF(p)；符號常數由整數矩陣精確計算。

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import galois
import numpy as np
import sympy

from app import config
from app.exceptions import BudgetExceeded, InvalidInput, InvalidRoot, OracleMismatch, UnresolvedSigns, UnsupportedType
from app.logging_config import get_logger
from app.models import (
    CartanDatum, CartanFamily, Census, CellCheckResult, CellEquations, FieldSpec, FixedPoint, Gallery,
    GalleryType, ParabolicType, PointedGallery, Root, SignTable, TargetFlag, WeylElement,
)
from app.services import cartan_service as cartan
from app.services import fibre_service, gallery_service

logger = get_logger("chevalley")

Permutation = Tuple[int, ...]


def _require_type_a(datum: CartanDatum) -> None:
    if datum.family != CartanFamily.A:
        raise UnsupportedType(detail=f"矩陣驗證僅支援 A 型，收到 {datum.name}")


def root_entry(datum: CartanDatum, beta: Root) -> Tuple[int, int]:
    """
    根 β 對應的矩陣位置（0 起算）。α_a + ... + α_b = e_{a-1} - e_b 對應 (a-1, b)，負根取轉置位置。

    Raises:
        UnsupportedType: 非 A 型。
        InvalidRoot: β 不是根。
    """
    _require_type_a(datum)
    if not datum.is_root(beta):
        raise InvalidRoot(detail=f"{beta} 不是 {datum.name} 的根")
    support = [k for k, c in enumerate(beta) if c]
    first, last = support[0], support[-1] + 1
    return (first, last) if cartan.is_positive(beta) else (last, first)


def unipotent(datum: CartanDatum, beta: Root, value: int, field_spec: FieldSpec) -> galois.FieldArray:
    """p_β(λ) = I + λ·X_β。"""
    row, col = root_entry(datum, beta)
    GF = field_spec.gf
    matrix = GF.Identity(datum.rank + 1)
    matrix[row, col] = int(value) % field_spec.prime
    return matrix


def reflection_matrix(datum: CartanDatum, i: int, field_spec: FieldSpec) -> galois.FieldArray:
    _require_type_a(datum)
    GF = field_spec.gf
    matrix = GF.Identity(datum.rank + 1)
    matrix[i - 1, i - 1] = 0
    matrix[i, i] = 0
    matrix[i - 1, i] = field_spec.prime - 1
    matrix[i, i - 1] = 1
    return matrix


def _integer_elementary(datum: CartanDatum, beta: Root) -> np.ndarray:
    matrix = np.zeros((datum.rank + 1, datum.rank + 1), dtype=np.int64)
    matrix[root_entry(datum, beta)] = 1
    return matrix


def _integer_reflection(datum: CartanDatum, i: int) -> np.ndarray:
    matrix = np.eye(datum.rank + 1, dtype=np.int64)
    matrix[i - 1, i - 1] = 0
    matrix[i, i] = 0
    matrix[i - 1, i] = -1
    matrix[i, i - 1] = 1
    return matrix


def sign_n(datum: CartanDatum, i: int, beta: Root) -> int:
    """
    s_i p_β(λ) s_i^{-1} = p_{s_i(β)}(n·λ) 中的 n，由整數矩陣 S·E_β·S^T 直接讀出。

    Raises:
        UnsupportedType: 非 A 型。
        OracleMismatch: 共軛後不是 ±E_{s_i(β)}。
    """
    reflection = _integer_reflection(datum, i)
    conjugated = reflection @ _integer_elementary(datum, beta) @ reflection.T
    image = cartan.reflect(datum, i, beta)
    value = int(conjugated[root_entry(datum, image)])
    if abs(value) != 1 or np.count_nonzero(conjugated) != 1:
        raise OracleMismatch(detail=f"s_{i} 共軛 X_{beta} 不是 ±X_{image}")
    return value


def build_sign_table(datum: CartanDatum) -> SignTable:
    """對所有 (i, β) 計算 n(i, β)。"""
    _require_type_a(datum)
    entries = {
        (i, beta): sign_n(datum, i, beta)
        for i in range(1, datum.rank + 1)
        for beta in datum.roots
    }
    return SignTable(datum_name=datum.name, entries=entries)


def sign_table_for(datum: CartanDatum) -> Optional[SignTable]:
    """A 型回傳符號表，其他型回傳 None（關係式係數將標記為 UNRESOLVED）。"""
    if datum.family != CartanFamily.A:
        return None
    return build_sign_table(datum)


def commutator_constant(datum: CartanDatum, alpha: Root, beta: Root) -> int:
    """
    p_α(-1)p_β(-1)p_α(1)p_β(1) = p_{α+β}(C)；α+β 不是根時回傳 0。

    Raises:
        InvalidInput: α = ±β。
        OracleMismatch: 交換子不具預期形狀。
    """
    if alpha == beta or alpha == cartan.negate(beta):
        raise InvalidInput(detail="交換子常數需要 α ≠ ±β")
    identity = np.eye(datum.rank + 1, dtype=np.int64)
    x_alpha = _integer_elementary(datum, alpha)
    x_beta = _integer_elementary(datum, beta)
    commutator = (identity - x_alpha) @ (identity - x_beta) @ (identity + x_alpha) @ (identity + x_beta)
    total = tuple(a + b for a, b in zip(alpha, beta))
    difference = commutator - identity
    if not datum.is_root(total):
        if np.count_nonzero(difference):
            raise OracleMismatch(detail=f"{alpha} 與 {beta} 的交換子應為單位矩陣")
        return 0
    entry = root_entry(datum, total)
    constant = int(difference[entry])
    difference[entry] = 0
    if np.count_nonzero(difference) or constant == 0:
        raise OracleMismatch(detail=f"{alpha} 與 {beta} 的交換子不在 U({total}) 中")
    return constant


def check_commutator_relation(datum: CartanDatum, field_spec: FieldSpec, samples: int = 3, seed: int = 0) -> None:
    """
    對所有根對抽樣驗證 p_β(λ)p_β(μ) = p_β(λ+μ) 以及交換子關係。

    Raises:
        OracleMismatch: 任一矩陣恆等式不成立。
    """
    _require_type_a(datum)
    rng = np.random.default_rng(seed)
    p = field_spec.prime
    for beta in datum.roots:
        for _ in range(samples):
            lam, mu = (int(v) for v in rng.integers(0, p, size=2))
            lhs = unipotent(datum, beta, lam, field_spec) @ unipotent(datum, beta, mu, field_spec)
            if not np.array_equal(lhs, unipotent(datum, beta, lam + mu, field_spec)):
                raise OracleMismatch(detail=f"p_{beta} 不是加法同態 (λ={lam}, μ={mu})")

    identity = field_spec.gf.Identity(datum.rank + 1)
    for alpha in datum.roots:
        for beta in datum.roots:
            if alpha == beta or alpha == cartan.negate(beta):
                continue
            constant = commutator_constant(datum, alpha, beta)
            total = tuple(a + b for a, b in zip(alpha, beta))
            for _ in range(samples):
                lam, mu = (int(v) for v in rng.integers(0, p, size=2))
                lhs = (
                    unipotent(datum, alpha, -lam, field_spec) @ unipotent(datum, beta, -mu, field_spec)
                    @ unipotent(datum, alpha, lam, field_spec) @ unipotent(datum, beta, mu, field_spec)
                )
                rhs = unipotent(datum, total, constant * lam * mu, field_spec) if constant else identity
                if not np.array_equal(lhs, rhs):
                    raise OracleMismatch(detail=f"交換子 ({alpha}, {beta}) 在 λ={lam}, μ={mu} 不成立")


def check_sign_relation(datum: CartanDatum, sign_table: SignTable, field_spec: FieldSpec, seed: int = 0) -> None:
    """
    驗證 s_i p_β(λ) s_i^{-1} = p_{s_i(β)}(n(i, β)·λ)。

    Raises:
        OracleMismatch: 某個 (i, β) 不成立。
    """
    rng = np.random.default_rng(seed)
    for (i, beta), n in sorted(sign_table.entries.items()):
        lam = int(rng.integers(1, field_spec.prime))
        s = reflection_matrix(datum, i, field_spec)
        lhs = s @ unipotent(datum, beta, lam, field_spec) @ s.T
        rhs = unipotent(datum, cartan.reflect(datum, i, beta), n * lam, field_spec)
        if not np.array_equal(lhs, rhs):
            raise OracleMismatch(detail=f"n({i}, {beta}) = {n} 與矩陣不符")


def bruhat_cell(matrix: galois.FieldArray) -> Permutation:
    """
    可逆矩陣 g 所在的 Bruhat 胞腔 BσB：逐欄取未使用列中最低的非零元為樞紐，
    再以欄運算消去其右方同列的元素。σ[j] 為第 j 欄的樞紐列。
    """
    work = matrix.copy()
    n = work.shape[0]
    used: set = set()
    sigma: List[int] = []
    for col in range(n):
        rows = [row for row in range(n) if row not in used and work[row, col] != 0]
        if not rows:
            raise OracleMismatch(detail="矩陣不可逆，無法決定 Bruhat 胞腔")
        pivot = max(rows)
        for later in range(col + 1, n):
            if work[pivot, later] != 0:
                factor = work[pivot, later] / work[pivot, col]
                work[:, later] = work[:, later] - factor * work[:, col]
        used.add(pivot)
        sigma.append(pivot)
    return tuple(sigma)


def _difference_root(rank: int, a: int, b: int) -> Root:
    # e_a - e_b 在單根基底下的座標
    low, high = min(a, b), max(a, b)
    sign = 1 if a < b else -1
    return tuple(sign if low <= k < high else 0 for k in range(rank))


def weyl_from_permutation(datum: CartanDatum, sigma: Permutation) -> WeylElement:
    """置換 σ 對應的 Weyl 元素：w(α_i) = e_{σ(i-1)} - e_{σ(i)}。"""
    _require_type_a(datum)
    images = tuple(_difference_root(datum.rank, sigma[i - 1], sigma[i]) for i in range(1, datum.rank + 1))
    inversions = sum(1 for a in range(len(sigma)) for b in range(a + 1, len(sigma)) if sigma[a] > sigma[b])
    return WeylElement(images=images, length=inversions)


def _below_blocks(n: int, target_type: ParabolicType) -> List[Tuple[int, int]]:
    block = [0] * n
    for index in range(1, n):
        block[index] = block[index - 1] if index in target_type.generators else block[index - 1] + 1
    return [(row, col) for row in range(n) for col in range(n) if block[row] > block[col]]


def in_parabolic(matrix: galois.FieldArray, target_type: ParabolicType) -> bool:
    """矩陣是否屬於 P_{T0}：i ∈ T0 時第 i-1 與第 i 列（0 起算）併成同一個區塊的區塊上三角群。"""
    return all(matrix[row, col] == 0 for row, col in _below_blocks(matrix.shape[0], target_type))


def coset_matrix(datum: CartanDatum, u: WeylElement, field_spec: FieldSpec) -> galois.FieldArray:
    """u 的一個矩陣代表元：沿約化字相乘的反射矩陣。"""
    matrix = field_spec.gf.Identity(datum.rank + 1)
    for i in cartan.reduced_word(datum, u):
        matrix = matrix @ reflection_matrix(datum, i, field_spec)
    return matrix


def realize_point(
    tau: GalleryType,
    gallery: Gallery,
    coords: Sequence[int],
    field_spec: FieldSpec,
) -> PointedGallery:
    """
    在座標卡 U^γ 中實現點 [g_r, ..., g_1]：穿越位置 g = p_{α_k}(x)·s_k，折返位置 g = p_{-α_k}(x)。

    Args:
        coords: (x_r, ..., x_1)，源點優先。

    Raises:
        UnsupportedType: 非 A 型。
        InvalidInput: 座標個數與字長不符。
    """
    datum = tau.datum
    _require_type_a(datum)
    if len(coords) != tau.r or gallery.r != tau.r:
        raise InvalidInput(detail=f"座標與畫廊長度必須等於字長 {tau.r}")
    products = [field_spec.gf.Identity(datum.rank + 1)]
    factors = []
    for k, bit, value in zip(tau.word, gallery.bits, coords):
        simple = datum.simple_root(k)
        if bit:
            factor = unipotent(datum, simple, value, field_spec) @ reflection_matrix(datum, k, field_spec)
        else:
            factor = unipotent(datum, cartan.negate(simple), value, field_spec)
        factors.append(factor)
        products.append(products[-1] @ factor)
    return PointedGallery(
        gallery_type=tau,
        chart=gallery,
        coords=tuple(int(v) % field_spec.prime for v in coords),
        field_spec=field_spec,
        factors=factors,
        products=products,
    )


def target_flag(pg: PointedGallery, target_type: Optional[ParabolicType] = None) -> TargetFlag:
    """π([g_r, ..., g_1]) = g_r⋯g_1·P：所在的 Bruhat 胞腔，以及是否恰為該胞腔的固定點。"""
    datum = pg.gallery_type.datum
    target_type = pg.gallery_type.target_type if target_type is None else target_type
    cell = weyl_from_permutation(datum, bruhat_cell(pg.product))
    rep = cartan.min_coset_rep(datum, cell, target_type)
    representative = coset_matrix(datum, rep, pg.field_spec)
    fixed = in_parabolic(representative.T @ pg.product, target_type)
    return TargetFlag(cell=cell, coset_rep=rep, fixed=fixed)


def retract_point(pg: PointedGallery) -> Gallery:
    """收縮 ρ：第 p 步的部分乘積換了 Bruhat 胞腔即為穿越，否則為折返。"""
    cells = [bruhat_cell(product) for product in pg.products]
    return Gallery(tuple(int(cells[p] != cells[p - 1]) for p in range(1, len(cells))))


def _symbolic_product(tau: GalleryType, gallery: Gallery, coords: Sequence[sympy.Expr]) -> sympy.Matrix:
    # 與 realize_point 相同的因子，係數換成多項式
    datum = tau.datum
    size = datum.rank + 1
    product = sympy.eye(size)
    for k, bit, value in zip(tau.word, gallery.bits, coords):
        simple = datum.simple_root(k)
        factor = sympy.eye(size)
        row, col = root_entry(datum, simple if bit else cartan.negate(simple))
        factor[row, col] = value
        if bit:
            factor = factor * sympy.Matrix(_integer_reflection(datum, k).tolist())
        product = product * factor
    return product


def _outside_parabolic(
    tau: GalleryType,
    gallery: Gallery,
    x: FixedPoint,
    values: Dict[int, sympy.Expr],
) -> List[sympy.Expr]:
    """u̇^T·g 在 P_{T0} 區塊以下的非零元；全部為 0 即表示點落在 x 上。"""
    datum = tau.datum
    coords = [values[tau.r - position + 1] for position in range(1, tau.r + 1)]
    representative = sympy.eye(datum.rank + 1)
    for i in cartan.reduced_word(datum, x.u):
        representative = representative * sympy.Matrix(_integer_reflection(datum, i).tolist())
    moved = representative.T * _symbolic_product(tau, gallery, coords)
    entries = (sympy.expand(moved[row, col]) for row, col in _below_blocks(datum.rank + 1, tau.target_type))
    return [entry for entry in entries if entry != 0]


def _lowest_degree(expr: sympy.Expr) -> int:
    symbols = sorted(expr.free_symbols, key=str)
    if not symbols:
        return 0
    return min(sum(monom) for monom in sympy.Poly(expr, *symbols).monoms())


def exact_cell_equations(tau: GalleryType, gallery: Gallery, x: FixedPoint) -> List[str]:
    """
    C^γ_x 的精確方程式：J(γ) 上的座標取為變數 x_j，其餘為 0，
    回傳 u̇^T·g 落在 P_{T0} 之外的多項式（皆須為 0）。

    Raises:
        UnsupportedType: 非 A 型。
    """
    _require_type_a(tau.datum)
    j_set = gallery_service.load_bearing_set(tau, gallery)
    values = {j: (sympy.Symbol(f"x{j}") if j in j_set else sympy.Integer(0)) for j in range(1, tau.r + 1)}
    return sorted({str(entry) for entry in _outside_parabolic(tau, gallery, x, values)})


def linearity_residuals(
    tau: GalleryType,
    gallery: Gallery,
    x: FixedPoint,
    equations: CellEquations,
) -> List[sympy.Expr]:
    """
    把線性方程式的參數化（自由座標為變數，lead 由關係式決定，其餘為 0）代入矩陣乘積，
    回傳不為 0 的殘差。空串列表示線性方程式恰好描述 C^γ_x。

    殘差只含二次以上的項時，一次部分正確，差異來自根群的交換子。

    Raises:
        UnsupportedType: 非 A 型。
        UnresolvedSigns: 方程式含未決定的符號。
    """
    _require_type_a(tau.datum)
    if not equations.resolved:
        raise UnresolvedSigns(detail=f"畫廊 {gallery.label} 的關係式含 UNRESOLVED 係數")
    leads = {relation.lead for relation in equations.relations}
    free = fibre_service.j2_set(tau, gallery, x) - leads
    values: Dict[int, sympy.Expr] = {j: sympy.Integer(0) for j in range(1, tau.r + 1)}
    for j in free:
        values[j] = sympy.Symbol(f"x{j}")
    for relation in equations.relations:
        values[relation.lead] = sum((n * values[f] for f, n in relation.terms), sympy.Integer(0))
    return _outside_parabolic(tau, gallery, x, values)


def _census_branch(
    datum: CartanDatum,
    word: Tuple[int, ...],
    target_type: ParabolicType,
    prime: int,
    first_choice: Optional[int],
) -> Tuple[Counter, Counter, Counter]:
    """列舉座標樹中第一個因子為 first_choice 的子樹；first_choice 為 None 時列舉全部。"""
    field_spec = FieldSpec(prime=prime)
    GF = field_spec.gf
    # 每個位置的 q+1 個選擇：p_α(x)s（x ∈ F_q），以及無窮遠處的單位元
    options = []
    for k in word:
        choices = [unipotent(datum, datum.simple_root(k), x, field_spec) @ reflection_matrix(datum, k, field_spec)
                   for x in range(prime)]
        choices.append(GF.Identity(datum.rank + 1))
        options.append(choices)

    per_class: Counter = Counter()
    per_fixed_point: Counter = Counter()
    per_schubert_cell: Counter = Counter()
    representatives: Dict[WeylElement, Tuple[str, galois.FieldArray]] = {}

    def record(product: galois.FieldArray, sigma: Permutation, bits: Tuple[int, ...]) -> None:
        per_class["".join(map(str, bits))] += 1
        rep = cartan.min_coset_rep(datum, weyl_from_permutation(datum, sigma), target_type)
        if rep not in representatives:
            representatives[rep] = (cartan.word_label(datum, rep), coset_matrix(datum, rep, field_spec))
        label, matrix = representatives[rep]
        per_schubert_cell[label] += 1
        if in_parabolic(matrix.T @ product, target_type):
            per_fixed_point[label] += 1

    def descend(p: int, product: galois.FieldArray, sigma: Permutation, bits: Tuple[int, ...]) -> None:
        if p == len(word):
            record(product, sigma, bits)
            return
        choices = options[p]
        if p == 0 and first_choice is not None:
            choices = [choices[first_choice]]
        for factor in choices:
            nxt = product @ factor
            nxt_sigma = bruhat_cell(nxt)
            descend(p + 1, nxt, nxt_sigma, bits + (int(nxt_sigma != sigma),))

    start = GF.Identity(datum.rank + 1)
    descend(0, start, bruhat_cell(start), ())
    return per_class, per_fixed_point, per_schubert_cell


def _census_worker(args) -> Tuple[Counter, Counter, Counter]:
    family, rank, word, generators, prime, first_choice = args
    datum = cartan.build_cartan(family, rank)
    return _census_branch(datum, word, ParabolicType.of(generators), prime, first_choice)


def enumerate_points_fq(tau: GalleryType, q: int, workers: Optional[int] = None) -> Census:
    """
    窮舉 Bott-Samelson 簇的全部 (q+1)^r 個 F_q 點，依收縮類別、固定點與 Schubert 胞腔計數。

    Args:
        tau: 畫廊型（A 型）。
        q: 質數。
        workers: 行程數，預設取 BS_CENSUS_WORKERS；大於 1 時依第一個因子分割座標樹。

    Raises:
        UnsupportedType: 非 A 型。
        BudgetExceeded: (q+1)^r 超過 BS_POINT_BUDGET。
    """
    datum = tau.datum
    _require_type_a(datum)
    field_spec = FieldSpec(prime=q)
    expected_total = (q + 1) ** tau.r
    if expected_total > config.POINT_BUDGET:
        raise BudgetExceeded(detail=f"(q+1)^r = {expected_total} 超過上限 {config.POINT_BUDGET}")
    workers = workers or config.CENSUS_WORKERS

    per_class: Counter = Counter()
    per_fixed_point: Counter = Counter()
    per_schubert_cell: Counter = Counter()
    if tau.r == 0:
        parts = [_census_branch(datum, tau.word, tau.target_type, q, None)]
    else:
        jobs = [
            (datum.family.value, datum.rank, tau.word, tau.target_type.sorted, q, choice)
            for choice in range(q + 1)
        ]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(_census_worker, jobs))
        else:
            parts = [_census_worker(job) for job in jobs]
    for classes, fixed, schubert in parts:
        per_class.update(classes)
        per_fixed_point.update(fixed)
        per_schubert_cell.update(schubert)

    total = sum(per_class.values())
    logger.info("%s 字 %s 在 F_%d 上共 %d 個點", datum.name, tau.word, q, total)
    return Census(
        prime=field_spec.prime,
        total=total,
        per_class=dict(sorted(per_class.items())),
        per_fixed_point=dict(sorted(per_fixed_point.items())),
        per_schubert_cell=dict(sorted(per_schubert_cell.items())),
    )


def _evaluate(coefficients: Sequence[int], q: int) -> int:
    return sum(c * q**k for k, c in enumerate(coefficients))


def census_mismatches(tau: GalleryType, census: Census) -> List[str]:
    """把點數普查與組合預測逐項比對，回傳所有不一致的描述（空串列表示全部相符）。"""
    q = census.prime
    problems: List[str] = []
    if census.total != (q + 1) ** tau.r:
        problems.append(f"總點數 {census.total} ≠ (q+1)^r = {(q + 1) ** tau.r}")

    for cell in gallery_service.bs_cells_report(tau).cells:
        expected = q ** cell.dim
        found = census.per_class.get(cell.gallery, 0)
        if found != expected:
            problems.append(f"收縮類別 {cell.gallery}：{found} ≠ q^{cell.dim} = {expected}")

    sweep = fibre_service.fibre_sweep(tau)
    for label, report in zip(sweep.points, sweep.reports):
        fibre_count = _evaluate(report.poincare, q)
        found = census.per_fixed_point.get(label, 0)
        if found != fibre_count:
            problems.append(f"固定點 {label}：{found} ≠ P_x(q) = {fibre_count}")
        cell_count = q ** report.point_length * fibre_count
        found = census.per_schubert_cell.get(label, 0)
        if found != cell_count:
            problems.append(f"Schubert 胞腔 {label}：{found} ≠ q^ℓ(u)·P_x(q) = {cell_count}")
    extra = set(census.per_fixed_point) - set(sweep.points)
    problems.extend(f"固定點 {label} 不在 Schubert 簇中卻有點" for label in sorted(extra))
    return problems


def sample_check_cell(
    tau: GalleryType,
    gallery: Gallery,
    x: FixedPoint,
    field_spec: Optional[FieldSpec] = None,
    trials: Optional[int] = None,
    seed: int = 0,
    sign_table: Optional[SignTable] = None,
) -> CellCheckResult:
    """
    抽樣驗證 C^γ_x 恰為方程式所定義的仿射子空間。

    先以多項式矩陣乘積代入線性方程式的參數化：殘差只含二次以上的項時，
    胞腔沒有線性形狀，回傳 nonlinear 結果與精確方程式，不再抽樣。
    其餘情形抽樣：滿足方程式的隨機點必須落在 x 上；只破壞一條關係式，
    或把一個 J∖J² 座標設為非零的點必須落在 x 之外。

    Args:
        sign_table: 預設由矩陣實現計算。

    Raises:
        UnsupportedType: 非 A 型。
        UnresolvedSigns: 方程式含未決定的符號。
    """
    datum = tau.datum
    _require_type_a(datum)
    field_spec = field_spec or FieldSpec(prime=config.SAMPLING_PRIME)
    trials = trials or config.SAMPLING_TRIALS
    table = sign_table if sign_table is not None else build_sign_table(datum)
    equations = fibre_service.cell_equations(tau, gallery, x, table)
    residuals = linearity_residuals(tau, gallery, x, equations)
    if residuals and all(_lowest_degree(residual) >= 2 for residual in residuals):
        exact = exact_cell_equations(tau, gallery, x)
        logger.warning(
            "胞腔 %s 在 %s 上含交換子高次項：%s",
            gallery.label, cartan.word_label(datum, x.u), "; ".join(exact),
        )
        return CellCheckResult(
            gallery=gallery.label, passed=False, trials=0, nonlinear=True, exact_equations=exact,
            reason="交換子產生高次項，線性方程式只給出一次部分",
        )

    p = field_spec.prime
    r = tau.r
    rng = np.random.default_rng(seed)
    leads = {relation.lead for relation in equations.relations}
    free = sorted(fibre_service.j2_set(tau, gallery, x) - leads, reverse=True)

    def on_variety() -> Dict[int, int]:
        values = {j: 0 for j in range(1, r + 1)}
        for j in free:
            values[j] = int(rng.integers(0, p))
        for relation in equations.relations:
            values[relation.lead] = sum(n * values[f] for f, n in relation.terms) % p
        return values

    def coords_of(values: Dict[int, int]) -> List[int]:
        return [values[r - position + 1] for position in range(1, r + 1)]

    def hits(values: Dict[int, int]) -> bool:
        flag = target_flag(realize_point(tau, gallery, coords_of(values), field_spec))
        return flag.fixed and flag.coset_rep == x.u

    for _ in range(trials):
        values = on_variety()
        if not hits(values):
            return CellCheckResult(
                gallery=gallery.label, passed=False, trials=trials,
                counterexample=coords_of(values), reason="滿足方程式的點沒有落在固定點上",
            )

    perturbations = [relation.lead for relation in equations.relations] + list(equations.zero_indices)
    if perturbations:
        for t in range(trials):
            values = on_variety()
            j = perturbations[t % len(perturbations)]
            values[j] = (values[j] + int(rng.integers(1, p))) % p
            if hits(values):
                return CellCheckResult(
                    gallery=gallery.label, passed=False, trials=trials,
                    counterexample=coords_of(values), reason=f"破壞索引 {j} 的點仍落在固定點上",
                )

    logger.debug("胞腔 %s 通過 %d 次抽樣", gallery.label, trials)
    return CellCheckResult(gallery=gallery.label, passed=True, trials=trials)
