import pytest

from app import config
from app.exceptions import BudgetExceeded, InvalidInput, InvariantViolation, NonReducedWord
from app.models import Gallery, ParabolicType, WallKind
from app.services import cartan_service as cartan
from app.services import gallery_service as galleries


@pytest.fixture(name="a2_tau")
def a2_tau_fixture():
    """A2 的字 (1,2,1)，終點型為空集合。"""
    return galleries.gallery_type(cartan.build_cartan("A", 2), (1, 2, 1))


@pytest.fixture(name="b2_tau")
def b2_tau_fixture():
    """B2 的字 (1,2,1,2)。"""
    return galleries.gallery_type(cartan.build_cartan("B", 2), (1, 2, 1, 2))


def test_gallery_type_rejects_bad_words():
    """測試畫廊型的輸入檢查：非約化字、字母超出範圍、終點型超出範圍。"""
    a2 = cartan.build_cartan("A", 2)
    with pytest.raises(NonReducedWord):
        galleries.gallery_type(a2, (1, 1))
    with pytest.raises(InvalidInput):
        galleries.gallery_type(a2, (1, 3))
    with pytest.raises(InvalidInput):
        galleries.gallery_type(a2, (1,), ParabolicType.of({4}))


def test_gallery_type_word_budget(monkeypatch):
    """測試字長超過 BS_MAX_WORD_LENGTH 時回報 BudgetExceeded。"""
    monkeypatch.setattr(config, "MAX_WORD_LENGTH", 2)
    with pytest.raises(BudgetExceeded):
        galleries.gallery_type(cartan.build_cartan("A", 2), (1, 2, 1))


def test_is_coset_minimal():
    """測試字是否為 W/W_{T0} 的最短代表元。"""
    a2 = cartan.build_cartan("A", 2)
    assert not galleries.is_coset_minimal(galleries.gallery_type(a2, (1, 2), ParabolicType.of({2})))
    assert galleries.is_coset_minimal(galleries.gallery_type(a2, (2, 1), ParabolicType.of({2})))


def test_enumerate_galleries_order(a2_tau):
    """測試畫廊依位元向量字典序列舉。"""
    labels = [gallery.label for gallery in galleries.enumerate_galleries(a2_tau)]
    assert len(labels) == 8
    assert labels[0] == "000"
    assert labels[-1] == "111"
    assert labels == sorted(labels)


def test_wall_sequence_a2(a2_tau):
    """測試 A2 畫廊 101 的 β 序列與承重牆。"""
    records = galleries.wall_sequence(a2_tau, Gallery.from_label("101"))
    assert [record.index for record in records] == [3, 2, 1]
    assert [record.beta for record in records] == [(-1, 0), (1, 1), (1, 0)]
    assert [record.kind for record in records] == [WallKind.CROSSING, WallKind.BEND, WallKind.CROSSING]
    assert [record.load_bearing for record in records] == [True, False, False]
    assert galleries.load_bearing_set(a2_tau, Gallery.from_label("101")) == {3}


def test_load_bearing_set_a2(a2_tau):
    """測試全折返畫廊沒有承重牆，畫廊 010 的承重牆為 {2}。"""
    records = galleries.wall_sequence(a2_tau, Gallery.from_label("000"))
    assert [record.beta for record in records] == [(1, 0), (0, 1), (1, 0)]
    assert galleries.load_bearing_set(a2_tau, Gallery.from_label("000")) == frozenset()
    assert galleries.load_bearing_set(a2_tau, Gallery.from_label("010")) == {2}


def test_wall_sequence_b2(b2_tau):
    """測試 B2 畫廊 1000：同一面牆 α1 出現於索引 4 與 2。"""
    records = galleries.wall_sequence(b2_tau, Gallery.from_label("1000"))
    assert [record.beta for record in records] == [(-1, 0), (1, 1), (-1, 0), (1, 1)]
    assert [record.wall for record in records] == [(1, 0), (1, 1), (1, 0), (1, 1)]
    assert galleries.load_bearing_set(b2_tau, Gallery.from_label("1000")) == {4, 2}


def test_gallery_length_mismatch(a2_tau):
    """測試畫廊長度與字長不符。"""
    with pytest.raises(InvalidInput):
        galleries.load_bearing_set(a2_tau, Gallery.from_label("10"))


def test_bs_cells_report_a2(a2_tau):
    """測試 A2 的 Bott-Samelson 胞腔：Poincaré 係數為二項式係數。"""
    report = galleries.bs_cells_report(a2_tau)
    assert report.poincare == [1, 3, 3, 1]
    assert len(report.cells) == 8
    by_label = {cell.gallery: cell for cell in report.cells}
    assert by_label["101"].J == [3]
    assert by_label["010"].dim == 1
    assert by_label["000"].J == []


@pytest.mark.parametrize(
    "family, rank",
    [("A", 1), ("A", 2), ("A", 3), ("A", 4), ("B", 2), ("B", 3), ("C", 3), ("D", 4), ("G", 2)],
)
def test_load_bearing_injective_on_prefixes(family, rank):
    """測試最長元素約化字的各個前綴上，J 映射皆為單射且 Poincaré 係數為二項式係數。"""
    datum = cartan.build_cartan(family, rank)
    word = cartan.reduced_word(datum, cartan.longest_element(datum))[:10]
    for r in range(len(word) + 1):
        report = galleries.bs_cells_report(galleries.gallery_type(datum, word[:r]))
        assert len({tuple(cell.J) for cell in report.cells}) == 2 ** r


def test_minimal_galleries(a2_tau):
    """測試最小畫廊：終點為 w0 時只有全穿越畫廊。"""
    assert galleries.minimal_galleries(a2_tau) == [Gallery.from_label("111")]
    assert galleries.is_minimal_gallery(a2_tau, Gallery.from_label("111"))
    assert not galleries.is_minimal_gallery(a2_tau, Gallery.from_label("100"))


@pytest.mark.parametrize(
    "family, rank, word, generators",
    [("B", 2, (1, 2, 1, 2), ()), ("A", 3, (1, 2, 1, 3, 2, 1), ()), ("A", 3, (1, 2, 3), (1, 2)), ("G", 2, (2, 1, 2, 1), (2,))],
)
def test_minimal_gallery_is_unique(family, rank, word, generators):
    """測試字為最短陪集代表元時，以其終點為終點的最小畫廊唯一，且為全穿越畫廊。"""
    tau = galleries.gallery_type(cartan.build_cartan(family, rank), word, ParabolicType.of(generators))
    assert galleries.is_coset_minimal(tau)
    assert galleries.minimal_galleries(tau) == [Gallery((1,) * len(word))]


def test_target(a2_tau):
    """測試畫廊終點：100 與 001 的乘積都是 s1。"""
    a2 = a2_tau.datum
    s1 = cartan.weyl_from_word(a2, (1,))
    assert galleries.target(a2_tau, Gallery.from_label("100")) == s1
    assert galleries.target(a2_tau, Gallery.from_label("001")) == s1
    assert galleries.target(a2_tau, Gallery.from_label("101")).is_identity


def test_closure_cells(b2_tau):
    """測試閉包中的胞腔個數為 2^{j(γ)}，且都在 γ 之下。"""
    gamma = Gallery.from_label("1000")
    below = galleries.closure_cells(b2_tau, gamma)
    assert len(below) == 4
    assert Gallery.from_label("0000") in below
    for delta in below:
        assert galleries.cell_order_leq(b2_tau, delta, gamma)


def test_chart(a2_tau):
    """測試座標卡：穿越位置為 p_α(x)s，J(γ) 以外的座標被固定。"""
    chart_spec = galleries.chart(a2_tau, Gallery.from_label("101"))
    assert [entry.index for entry in chart_spec.entries] == [3, 2, 1]
    assert [entry.reflection for entry in chart_spec.entries] == ["s", "1", "s"]
    assert [entry.root_sign for entry in chart_spec.entries] == ["+", "-", "+"]
    assert [entry.pinned for entry in chart_spec.entries] == [False, True, True]


def test_walk_detects_broken_inverse(a2_tau, monkeypatch):
    """測試前綴的反元素累積出錯時，半空間檢查回報 InvariantViolation。"""
    monkeypatch.setattr(config, "DUAL_CHECKS", True)
    monkeypatch.setattr(cartan, "simple_times", lambda datum, k, w, **_: w)
    with pytest.raises(InvariantViolation):
        galleries.walk(a2_tau, Gallery.from_label("111"))
