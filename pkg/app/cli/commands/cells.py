# app/cli/commands/cells.py: `cells` 子命令，輸出 Bott-Samelson 簇的胞腔分解

from app.cli.common import add_common_arguments, build_gallery_type, dump_json, format_table, letters
from app.schemas import BsCellRead, CellsReportRead, RunConfig
from app.services import gallery_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("cells", help="列出每個組合畫廊的 J(γ) 與胞腔維度")
    add_common_arguments(parser)


def run(config: RunConfig) -> str:
    """胞腔列表與 Poincaré 係數；係數必為二項式係數。"""
    tau = build_gallery_type(config)
    report = gallery_service.bs_cells_report(tau)
    read = CellsReportRead(
        cartan=tau.datum.name,
        word=list(tau.word),
        cells=[BsCellRead.model_validate(cell) for cell in report.cells],
        poincare=report.poincare,
    )
    if config.format == "json":
        return dump_json(read)

    rows = [(cell.gallery or "(空)", letters(cell.J), cell.dim) for cell in read.cells]
    table = format_table(["gallery", "J", "dim"], rows)
    return f"{read.cartan} word {letters(read.word)}\n{table}\nPoincaré: {read.poincare}"
