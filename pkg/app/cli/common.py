# app/cli/common.py: 子命令共用的輸入解析與輸出格式

import json
from typing import List, Sequence

from pydantic import BaseModel

from app.models import GalleryType, ParabolicType
from app.schemas import RunConfig
from app.services import cartan_service, gallery_service


def build_gallery_type(config: RunConfig) -> GalleryType:
    datum = cartan_service.parse_cartan(config.cartan.upper())
    return gallery_service.gallery_type(datum, config.word, ParabolicType.of(config.target_type))


def letters(sequence: Sequence[int]) -> str:
    return ",".join(str(i) for i in sequence) if sequence else "∅"


def dump_json(report: BaseModel) -> str:
    """排序鍵值的 JSON，同樣輸入必得到逐位元組相同的輸出。"""
    return json.dumps(report.model_dump(mode="json"), sort_keys=True, ensure_ascii=False, indent=2)


def format_table(headers: Sequence[str], rows: List[Sequence[object]]) -> str:
    cells = [[str(h) for h in headers]] + [[str(v) for v in row] for row in rows]
    widths = [max(len(row[k]) for row in cells) for k in range(len(headers))]
    lines = ["  ".join(value.ljust(width) for value, width in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * width for width in widths))
    return "\n".join(lines)


def add_common_arguments(parser) -> None:
    parser.add_argument("cartan", help="Cartan 類型，例如 A3")
    parser.add_argument("--word", default="", help="約化字，源點優先，例如 1,2,1")
    parser.add_argument("--target-type", default="", help="終點面的型 T0，例如 2；預設為空集合")
    parser.add_argument("--format", choices=("table", "json"), default="table")
    parser.add_argument("--json", dest="format", action="store_const", const="json", help="等同 --format json")
