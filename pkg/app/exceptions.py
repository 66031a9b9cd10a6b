# app/exceptions.py: 領域例外定義
# 每個例外都帶有 detail（錯誤訊息）與 exit_code（CLI 結束碼），
# CLI 入口 (app/main.py) 依 exit_code 統一轉換，不在各處自行處理。

from typing import Optional


class BottSamelsonError(Exception):
    """所有領域錯誤的基底類別。"""

    exit_code: int = 1
    default_detail: str = "未預期的錯誤"

    def __init__(self, detail: Optional[str] = None):
        self.detail = detail or self.default_detail
        super().__init__(self.detail)


class InvalidInput(BottSamelsonError):
    exit_code = 2
    default_detail = "輸入格式錯誤"


class InvalidCartanType(InvalidInput):
    default_detail = "不支援的 Cartan 類型或秩"


class InvalidRoot(InvalidInput):
    default_detail = "向量不是此根系中的根"


class NonReducedWord(BottSamelsonError):
    exit_code = 3
    default_detail = "字 (word) 不是約化分解"


class PointNotInVariety(BottSamelsonError):
    exit_code = 4
    default_detail = "固定點不在 Schubert 簇中"


class OracleMismatch(BottSamelsonError):
    exit_code = 5
    default_detail = "矩陣驗證與組合預測不一致"


class BudgetExceeded(BottSamelsonError):
    exit_code = 6
    default_detail = "列舉規模超過設定上限"


class UnsupportedType(BottSamelsonError):
    exit_code = 7
    default_detail = "矩陣驗證僅支援 A 型"


class UnresolvedSigns(BottSamelsonError):
    exit_code = 8
    default_detail = "胞腔方程式含未決定的符號"


class MalformedStructure(BottSamelsonError):
    exit_code = 9
    default_detail = "承重牆結構異常：J² 中的折返之前沒有承重穿越"


class InvariantViolation(BottSamelsonError):
    exit_code = 9
    default_detail = "對偶檢查不一致"


class TargetMismatch(BottSamelsonError):
    exit_code = 9
    default_detail = "畫廊的終點不是指定的固定點"
