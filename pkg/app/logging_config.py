# app/logging_config.py: 應用程式日誌配置

import logging
import os
from logging.handlers import RotatingFileHandler

from app import config

LOGGER_NAME = "bott_samelson_fibre"


def setup_logging():
    """
    配置應用程式的日誌系統。
    - 日誌輸出到 stderr，避免污染 stdout 上的 JSON 報告。
    - 設定 BS_LOG_FILE 時另寫入該路徑的輪換檔案；預設不建立任何檔案。
    - 日誌級別可通過環境變數 LOG_LEVEL 配置。
    """
    log_level = os.getenv("LOG_LEVEL", "WARNING").upper()
    numeric_level = getattr(logging, log_level, logging.WARNING)

    app_logger = logging.getLogger(LOGGER_NAME)
    app_logger.setLevel(numeric_level)
    app_logger.propagate = False # 防止日誌事件被傳播到根日誌器

    galois_logger = logging.getLogger("galois")

    # 清除現有的處理器，避免重複
    for handler in list(app_logger.handlers):
        app_logger.removeHandler(handler)
        handler.close()
    for handler in list(galois_logger.handlers):
        galois_logger.removeHandler(handler)

    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s (%(filename)s:%(lineno)d)"
    )

    console_handler = logging.StreamHandler()  # 預設為 stderr
    console_handler.setLevel(numeric_level)
    console_handler.setFormatter(formatter)
    app_logger.addHandler(console_handler)

    file_handler = None
    if config.LOG_FILE:
        log_dir = os.path.dirname(config.LOG_FILE)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        file_handler = RotatingFileHandler(
            config.LOG_FILE,
            maxBytes=10 * 1024 * 1024, # 10 MB
            backupCount=5
        )
        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(formatter)
        app_logger.addHandler(file_handler)

    # galois 在編譯 ufunc 時會發出大量訊息，只保留 WARNING 以上
    galois_logger.setLevel(logging.WARNING)
    galois_logger.addHandler(console_handler)
    if file_handler is not None:
        galois_logger.addHandler(file_handler)
    galois_logger.propagate = False


def get_logger(module: str) -> logging.Logger:
    """取得子模組日誌器，例如 bott_samelson_fibre.fibre。"""
    return logging.getLogger(f"{LOGGER_NAME}.{module}")
