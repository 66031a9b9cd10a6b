# app/config.py：讀取環境變數設定（可由 .env 檔案提供）

import os

from dotenv import load_dotenv

load_dotenv()

POINT_BUDGET = int(os.getenv("BS_POINT_BUDGET", "10000000"))  # F_q 點數普查允許的最大 (q+1)^r
MAX_WORD_LENGTH = int(os.getenv("BS_MAX_WORD_LENGTH", "24"))  # 畫廊列舉的字長上限
SAMPLING_PRIME = int(os.getenv("BS_SAMPLING_PRIME", "101"))
SAMPLING_TRIALS = int(os.getenv("BS_SAMPLING_TRIALS", "100"))
DUAL_CHECKS = os.getenv("BS_DUAL_CHECKS", "true").lower() == "true"  # 執行期對偶檢查
CENSUS_WORKERS = int(os.getenv("BS_CENSUS_WORKERS", "1"))
LOG_FILE = os.getenv("BS_LOG_FILE", "")  # 輪換日誌檔路徑；空字串表示只輸出到 stderr

if POINT_BUDGET <= 0:
    raise ValueError("環境變數 'BS_POINT_BUDGET' 必須為正整數。")
if not 0 <= MAX_WORD_LENGTH <= 24:
    raise ValueError("環境變數 'BS_MAX_WORD_LENGTH' 必須介於 0 與 24 之間。")
if SAMPLING_TRIALS <= 0:
    raise ValueError("環境變數 'BS_SAMPLING_TRIALS' 必須為正整數。")
if CENSUS_WORKERS <= 0:
    raise ValueError("環境變數 'BS_CENSUS_WORKERS' 必須為正整數。")
