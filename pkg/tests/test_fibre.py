import pytest

from app import config
from app.exceptions import InvalidInput, PointNotInVariety, TargetMismatch
from app.models import UNRESOLVED, Gallery, ParabolicType, TargetWalls
from app.services import cartan_service as cartan
from app.services import chevalley_service, fibre_service
from app.services import gallery_service as galleries


@pytest.fixture(name="a2_tau")
def a2_tau_fixture():
    """A2 的字 (1,2,1)。"""
    return galleries.gallery_type(cartan.build_cartan("A", 2), (1, 2, 1))


@pytest.fixture(name="b2_tau")
def b2_tau_fixture():
    """B2 的字 (1,2,1,2)。"""
    return galleries.gallery_type(cartan.build_cartan("B", 2), (1, 2, 1, 2))


def _point(tau, word):
    return fibre_service.point_from_word(tau, word)


def test_fixed_point_face_walls():
    """測試終點面牆：full 慣例取 W_{T0} 的全部反射，simple 慣例只取單根。"""
    a3 = cartan.build_cartan("A", 3)
    target_type = ParabolicType.of({1, 2})
    full = fibre_service.fixed_point(a3, cartan.identity(a3), target_type)
    simple = fibre_service.fixed_point(a3, cartan.identity(a3), target_type, TargetWalls.SIMPLE)
    assert full.face_walls == ((0, 1, 0), (1, 0, 0), (1, 1, 0))
    assert simple.face_walls == ((0, 1, 0), (1, 0, 0))
    assert full.sentinel((1, 1, 0)) == -3
    assert full.sentinel((0, 0, 1)) is None


def test_fixed_point_uses_min_coset_rep():
    """測試固定點會換成最短陪集代表元。"""
    a2 = cartan.build_cartan("A", 2)
    x = fibre_service.fixed_point(a2, cartan.weyl_from_word(a2, (1, 2)), ParabolicType.of({2}))
    assert x.u == cartan.weyl_from_word(a2, (1,))
    assert x.separating_walls == {(1, 0)}


def test_point_from_word_errors():
    """測試點不在 Schubert 簇中、點的字非約化、字母超出秩。"""
    tau = galleries.gallery_type(cartan.build_cartan("A", 2), (1, 2))
    with pytest.raises(PointNotInVariety):
        _point(tau, (2, 1))
    with pytest.raises(PointNotInVariety):
        _point(tau, (1, 1))
    with pytest.raises(InvalidInput):
        _point(tau, (5,))


def test_galleries_over(a2_tau):
    """測試終點為 e 的畫廊恰為 000 與 101。"""
    x = _point(a2_tau, ())
    assert [g.label for g in fibre_service.galleries_over(a2_tau, x)] == ["000", "101"]
    x = _point(a2_tau, (1, 2, 1))
    assert [g.label for g in fibre_service.galleries_over(a2_tau, x)] == ["111"]


def test_galleries_over_matches_brute_force(b2_tau):
    """測試剪枝後的搜尋與直接依終點分類的結果相同。"""
    datum = b2_tau.datum
    for u in cartan.coset_fixed_points(datum, b2_tau.word, b2_tau.target_type):
        x = fibre_service.fixed_point(datum, u)
        expected = [g for g in galleries.enumerate_galleries(b2_tau) if galleries.target(b2_tau, g) == u]
        assert fibre_service.galleries_over(b2_tau, x) == expected


def test_wall_occurrences_b2(b2_tau):
    """測試 B2 畫廊 1000 的牆分組。"""
    x = _point(b2_tau, (1,))
    occurrences = fibre_service.wall_occurrences(b2_tau, Gallery.from_label("1000"), x)
    assert occurrences.indices_of((1, 0)) == [4, 2]
    assert occurrences.indices_of((1, 1)) == [3, 1]
    assert occurrences.indices_of((0, 1)) == []


def test_blocks_and_relation_b2(b2_tau):
    """測試 B2 畫廊 1000 在 s1 上：單一區塊 [4,2]，關係式 x4 與 x2 相關。"""
    x = _point(b2_tau, (1,))
    gamma = Gallery.from_label("1000")
    assert fibre_service.j2_set(b2_tau, gamma, x) == {4, 2}
    (block,) = fibre_service.blocks(b2_tau, gamma, x)
    assert block.wall == (1, 0)
    assert block.wall_label == 2
    assert block.block_label == 1
    assert block.indices == [4, 2]
    assert block.head == 4

    equations = fibre_service.cell_equations(b2_tau, gamma, x)
    assert equations.zero_indices == []
    assert len(equations.relations) == 1
    assert equations.relations[0].lead == 4
    assert list(equations.relations[0].terms) == [(2, UNRESOLVED)]
    assert not equations.resolved
    assert fibre_service.fibre_cell(b2_tau, gamma, x).dim == 1


def test_single_crossing_relation_b2(b2_tau):
    """測試 B2 畫廊 0010 在 s1 上：關係式只有 lead，胞腔為一點。"""
    x = _point(b2_tau, (1,))
    cell = fibre_service.fibre_cell(b2_tau, Gallery.from_label("0010"), x)
    assert cell.J == [2]
    assert cell.J2 == [2]
    assert [(r.lead, list(r.terms)) for r in cell.equations.relations] == [(2, [])]
    assert cell.dim == 0


def test_relation_signs_a2(a2_tau):
    """測試 A2 畫廊 100 在 s1 上的係數：n(1, -α1) = -1，故 n_f = 1。"""
    x = _point(a2_tau, (1,))
    table = chevalley_service.build_sign_table(a2_tau.datum)
    equations = fibre_service.cell_equations(a2_tau, Gallery.from_label("100"), x, table)
    assert [(r.lead, list(r.terms)) for r in equations.relations] == [(3, [(1, 1)])]
    assert equations.resolved


def test_target_mismatch(a2_tau):
    """測試畫廊終點與固定點不符。"""
    x = _point(a2_tau, (1,))
    with pytest.raises(TargetMismatch):
        fibre_service.cell_equations(a2_tau, Gallery.from_label("000"), x)


def test_fibre_report_a2_identity(a2_tau):
    """測試 A2 在 e 上的纖維：Poincaré [1,1]，唯一分支 101。"""
    report = fibre_service.fibre_report(a2_tau, _point(a2_tau, ()))
    assert report.poincare == [1, 1]
    assert report.dim == 1
    assert report.components == ["101"]
    assert report.connected
    assert report.point == ()
    cell = next(c for c in report.cells if c.gallery == "101")
    assert cell.J2 == [3]
    assert cell.equations.relations == []


def test_fibre_report_open_point(a2_tau):
    """測試開胞腔中的點：纖維為單點。"""
    report = fibre_service.fibre_report(a2_tau, _point(a2_tau, (1, 2, 1)))
    assert report.poincare == [1]
    assert report.dim == 0
    assert report.components == ["111"]


def test_fibre_report_b2(b2_tau):
    """測試 B2 在 e 與 s1 上的纖維。"""
    report = fibre_service.fibre_report(b2_tau, _point(b2_tau, ()))
    assert report.poincare == [1, 2]
    assert report.components == ["0101", "1010"]
    assert report.connected
    by_label = {cell.gallery: cell for cell in report.cells}
    assert by_label["1010"].J == [4]
    assert by_label["0101"].J == [3]

    report = fibre_service.fibre_report(b2_tau, _point(b2_tau, (1,)))
    assert report.poincare == [1, 2]
    assert report.point_length == 1


def test_fibre_report_a3():
    """測試 A3 的字 (2,1,3,2) 在 e 上的纖維。"""
    tau = galleries.gallery_type(cartan.build_cartan("A", 3), (2, 1, 3, 2))
    report = fibre_service.fibre_report(tau, _point(tau, ()))
    assert [cell.gallery for cell in report.cells] == ["0000", "1001"]
    assert report.poincare == [1, 1]


def test_fibre_report_with_target_type():
    """測試終點型 {2}：畫廊 10 的 α2 牆與終點面牆重合，J² = {2}。"""
    a2 = cartan.build_cartan("A", 2)
    tau = galleries.gallery_type(a2, (2, 1), ParabolicType.of({2}))
    x = _point(tau, ())
    report = fibre_service.fibre_report(tau, x)
    assert [cell.gallery for cell in report.cells] == ["00", "10"]
    assert report.poincare == [1, 1]
    occurrences = fibre_service.wall_occurrences(tau, Gallery.from_label("10"), x)
    assert occurrences.indices_of((0, 1)) == [2, -1]
    cell = next(c for c in report.cells if c.gallery == "10")
    assert cell.J2 == [2]
    assert cell.equations.relations == []
    assert cell.dim == 1


def test_fibration_split(a2_tau, b2_tau):
    """測試每個畫廊都滿足 j(γ) = dim C^γ_x + ℓ(u)。"""
    for tau in (a2_tau, b2_tau):
        for gallery in galleries.enumerate_galleries(tau):
            assert fibre_service.fibration_split_check(tau, gallery)


def test_fibre_sweep(a2_tau, b2_tau):
    """測試 Σ_x q^{ℓ(u)}·P_x(q) = (1+q)^r。"""
    sweep = fibre_service.fibre_sweep(a2_tau)
    assert sweep.points == ["e", "1", "2", "2,1", "1,2", "1,2,1"]
    assert sweep.weighted_sum == [1, 3, 3, 1]
    assert sweep.identity_holds
    sweep = fibre_service.fibre_sweep(b2_tau)
    assert sweep.weighted_sum == [1, 4, 6, 4, 1]
    assert len(sweep.reports) == 8


def test_fibre_sweep_other_types():
    """測試 G2 與帶終點型的 A3 也滿足點數恆等式。"""
    g2 = cartan.build_cartan("G", 2)
    assert fibre_service.fibre_sweep(galleries.gallery_type(g2, (1, 2, 1, 2, 1))).identity_holds
    a3 = cartan.build_cartan("A", 3)
    tau = galleries.gallery_type(a3, (1, 2, 3), ParabolicType.of({1, 2}))
    assert fibre_service.fibre_sweep(tau).identity_holds


def test_simple_convention_without_target_type(b2_tau):
    """測試終點型為空時 simple 與 full 慣例結果相同。"""
    full = fibre_service.fibre_sweep(b2_tau, TargetWalls.FULL)
    simple = fibre_service.fibre_sweep(b2_tau, TargetWalls.SIMPLE)
    assert [r.poincare for r in full.reports] == [r.poincare for r in simple.reports]


def test_dual_checks_off(monkeypatch, b2_tau):
    """測試關閉對偶檢查不影響結果。"""
    expected = fibre_service.fibre_report(b2_tau, _point(b2_tau, ())).poincare
    monkeypatch.setattr(config, "DUAL_CHECKS", False)
    assert fibre_service.fibre_report(b2_tau, _point(b2_tau, ())).poincare == expected


def test_closure_of(a2_tau):
    """測試分支閉包所含的胞腔。"""
    report = fibre_service.fibre_report(a2_tau, _point(a2_tau, ()))
    assert [cell.gallery for cell in fibre_service.closure_of(report, "101")] == ["000", "101"]
    with pytest.raises(InvalidInput):
        fibre_service.closure_of(report, "111")
