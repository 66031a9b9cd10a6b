import json

import pytest

from app import config
from app.main import main


@pytest.fixture(name="run_cli")
def run_cli_fixture(capsys, monkeypatch):
    """執行 CLI 並回傳 (結束碼, stdout, stderr)；測試期間不寫日誌檔。"""
    monkeypatch.setattr(config, "LOG_FILE", "")

    def run(*argv):
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return run


def test_cells_json(run_cli):
    """測試 cells 子命令的 JSON 輸出。"""
    code, out, _ = run_cli("cells", "A2", "--word", "1,2,1", "--json")
    assert code == 0
    report = json.loads(out)
    assert report["cartan"] == "A2"
    assert report["poincare"] == [1, 3, 3, 1]
    assert len(report["cells"]) == 8
    assert report["cells"][5] == {"gallery": "101", "J": [3], "dim": 1}


def test_cells_table(run_cli):
    """測試 cells 子命令的表格輸出。"""
    code, out, _ = run_cli("cells", "B2", "--word", "1,2")
    assert code == 0
    assert out.startswith("B2 word 1,2")
    assert "Poincaré: [1, 2, 1]" in out


def test_json_output_is_deterministic(run_cli):
    """測試同樣的輸入得到逐位元組相同的 JSON。"""
    first = run_cli("fibre", "B2", "--word", "1,2,1,2", "--point", "all", "--json")
    second = run_cli("fibre", "B2", "--word", "1,2,1,2", "--point", "all", "--json")
    assert first[0] == 0
    assert first[1] == second[1]


def test_fibre_json(run_cli):
    """測試 fibre 子命令在 A2 的 e 上的報告，並與 Deodhar 多項式一致。"""
    code, out, _ = run_cli("fibre", "A2", "--word", "1,2,1", "--point", "e", "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["poincare"] == [1, 1]
    assert report["components"] == ["101"]
    assert report["deodhar"] == [1, 1]
    assert report["match"] is True
    assert report["target_walls"] == "full"


def test_fibre_unresolved_signs_in_json(run_cli):
    """測試非 A 型的關係式係數以 UNRESOLVED 輸出。"""
    code, out, _ = run_cli("fibre", "B2", "--word", "1,2,1,2", "--point", "1", "--json")
    assert code == 0
    cells = {cell["gallery"]: cell for cell in json.loads(out)["cells"]}
    assert cells["1000"]["relations"] == [{"lead": 4, "terms": [[2, "UNRESOLVED"]]}]
    assert cells["0010"]["relations"] == [{"lead": 2, "terms": []}]


def test_fibre_signs_resolved_for_type_a(run_cli):
    """測試 A 型的關係式係數由矩陣決定。"""
    code, out, _ = run_cli("fibre", "A2", "--word", "1,2,1", "--point", "1", "--json")
    assert code == 0
    cells = {cell["gallery"]: cell for cell in json.loads(out)["cells"]}
    assert cells["100"]["relations"] == [{"lead": 3, "terms": [[1, 1]]}]


def test_fibre_sweep(run_cli):
    """測試 --point all 掃過所有固定點並檢查點數恆等式。"""
    code, out, _ = run_cli("fibre", "A2", "--word", "1,2,1", "--point", "all", "--json")
    assert code == 0
    sweep = json.loads(out)
    assert [point["point"] for point in sweep["points"]] == ["e", "1", "2", "2,1", "1,2", "1,2,1"]
    assert sweep["weighted_sum"] == [1, 3, 3, 1]
    assert sweep["identity_holds"] is True


def test_fibre_table(run_cli):
    """測試 fibre 子命令的表格輸出。"""
    code, out, _ = run_cli("fibre", "A2", "--word", "2,1", "--target-type", "2")
    assert code == 0
    assert "T0 = 2" in out
    assert "Poincaré: [1, 1]" in out


def test_deodhar(run_cli):
    """測試 deodhar 子命令與 distinguished 模式。"""
    code, out, _ = run_cli("deodhar", "B2", "--word", "1,2,1,2", "--point", "1", "--json")
    assert code == 0
    assert json.loads(out)["polynomial"] == [1, 2]
    code, out, _ = run_cli("deodhar", "B2", "--word", "1,2,1,2", "--point", "1", "--distinguished", "--json")
    assert code == 0
    assert json.loads(out)["polynomial"] == [1, 1]


def test_verify(run_cli):
    """測試 verify 子命令在 A2 上全部通過。"""
    code, out, _ = run_cli("verify", "A2", "--word", "1,2,1", "--q", "2", "--trials", "5", "--json")
    assert code == 0
    report = json.loads(out)
    assert report["total"] == 27
    assert report["expected_total"] == 27
    assert report["passed"] is True
    e_row = next(row for row in report["fixed_points"] if row["point"] == "e")
    assert e_row["predicted"] == e_row["counted"] == 3
    assert report["nonlinear_cells"] == []


@pytest.mark.slow
def test_verify_reports_nonlinear_cells(run_cli):
    """測試 A3 字 (1,2,1,3,2,1)：含交換子高次項的胞腔列在 nonlinear_cells，其餘胞腔通過抽樣，結束碼為 0。"""
    code, out, _ = run_cli("verify", "A3", "--word", "1,2,1,3,2,1", "--q", "2", "--trials", "3", "--json")
    assert code == 0
    report = json.loads(out)
    assert report["total"] == 729
    assert report["passed"] is True
    assert "111000" in [cell["gallery"] for cell in report["nonlinear_cells"]]
    assert "101001" not in [cell["gallery"] for cell in report["nonlinear_cells"]]


@pytest.mark.parametrize(
    "argv, exit_code",
    [
        (("cells", "A2", "--word", "1,1"), 3),
        (("fibre", "A2", "--word", "1,2", "--point", "2,1"), 4),
        (("fibre", "A2", "--word", "1,2", "--point", "1,1"), 4),
        (("verify", "B2", "--word", "1,2", "--trials", "1"), 7),
        (("verify", "A2", "--word", "1,2", "--q", "4"), 2),
        (("cells", "Z2", "--word", "1"), 2),
        (("cells", "D3", "--word", "1"), 2),
        (("cells", "A2", "--word", "1,x"), 2),
        (("deodhar", "A2", "--word", "1,2", "--point", "all"), 2),
        (("fibre", "A2", "--word", "1,2", "--target-walls", "partial"), 2),
        (("fibre",), 2),
    ],
)
def test_exit_codes(run_cli, argv, exit_code):
    """測試錯誤對應的結束碼，且失敗時 stdout 沒有任何輸出。"""
    code, out, err = run_cli(*argv)
    assert code == exit_code
    assert out == ""
    assert err


def test_verify_budget_exceeded(run_cli, monkeypatch):
    """測試普查超過 BS_POINT_BUDGET 時結束碼為 6。"""
    monkeypatch.setattr(config, "POINT_BUDGET", 10)
    code, out, err = run_cli("verify", "A2", "--word", "1,2,1", "--trials", "1")
    assert code == 6
    assert out == ""
    assert "錯誤" in err


def test_no_log_file_by_default(run_cli, tmp_path, monkeypatch):
    """測試未設定 BS_LOG_FILE 時執行命令不會在工作目錄留下任何檔案。"""
    monkeypatch.chdir(tmp_path)
    code, _, _ = run_cli("cells", "A1", "--word", "1")
    assert code == 0
    assert list(tmp_path.iterdir()) == []


def test_log_file_opt_in(run_cli, tmp_path, monkeypatch):
    """測試設定 BS_LOG_FILE 後日誌寫入指定路徑。"""
    log_file = tmp_path / "logs" / "bott_samelson.log"
    monkeypatch.setattr(config, "LOG_FILE", str(log_file))
    monkeypatch.setenv("LOG_LEVEL", "INFO")
    code, _, _ = run_cli("cells", "A2", "--word", "1,2,1")
    assert code == 0
    assert "Bott-Samelson" in log_file.read_text(encoding="utf-8")
