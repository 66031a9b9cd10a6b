# app/cli/commands/fibre.py: `fibre` 子命令，輸出固定點上的纖維胞腔與方程式

from typing import Optional

from app.cli.common import add_common_arguments, build_gallery_type, dump_json, format_table, letters
from app.logging_config import get_logger
from app.models import FibreReport, GalleryType, SignTable, TargetWalls
from app.schemas import FibreCellRead, FibreReportRead, FibreSweepRead, RelationRead, RunConfig
from app.services import cartan_service, chevalley_service, deodhar_service, fibre_service

logger = get_logger("cli.fibre")


def register(subparsers) -> None:
    parser = subparsers.add_parser("fibre", help="計算解消映射在 T 固定點上的纖維")
    add_common_arguments(parser)
    parser.add_argument("--point", default="e", help="u 的約化字、'e' 或 'all'")
    parser.add_argument(
        "--target-walls",
        choices=[convention.value for convention in TargetWalls],
        default=TargetWalls.FULL.value,
        help="終點面牆的計算慣例",
    )


def _to_read(tau: GalleryType, report: FibreReport, convention: TargetWalls) -> FibreReportRead:
    datum = tau.datum
    u = cartan_service.weyl_from_word(datum, report.point)
    deodhar = deodhar_service.deodhar_polynomial(datum, tau.word, tau.target_type, u)
    match = deodhar == report.poincare
    if not match:
        logger.warning("纖維 Poincaré %s 與 Deodhar 多項式 %s 不一致", report.poincare, deodhar)
    cells = [
        FibreCellRead(
            gallery=cell.gallery,
            J=cell.J,
            J2=cell.J2,
            zero_indices=cell.equations.zero_indices,
            relations=[RelationRead.model_validate(relation) for relation in cell.equations.relations],
            dim=cell.dim,
        )
        for cell in report.cells
    ]
    return FibreReportRead(
        cartan=datum.name,
        word=list(tau.word),
        target_type=report.target_type,
        target_walls=convention,
        point=cartan_service.word_label(datum, u),
        cells=cells,
        poincare=report.poincare,
        dim=report.dim,
        components=report.components,
        connected=report.connected,
        deodhar=deodhar,
        match=match,
    )


def _relation_text(read: FibreCellRead) -> str:
    parts = [f"x{j}=0" for j in read.zero_indices]
    for relation in read.relations:
        terms = "".join(
            f" - ({sign})·x{j}" if isinstance(sign, str) else f" {'-' if sign > 0 else '+'} x{j}"
            for j, sign in relation.terms
        )
        parts.append(f"x{relation.lead}{terms} = 0")
    return "; ".join(parts) or "-"


def _render(read: FibreReportRead) -> str:
    rows = [
        (cell.gallery or "(空)", letters(cell.J), letters(cell.J2), cell.dim, _relation_text(cell))
        for cell in read.cells
    ]
    table = format_table(["gallery", "J", "J²", "dim", "equations"], rows)
    return "\n".join([
        f"{read.cartan} word {letters(read.word)}, T0 = {letters(read.target_type)}, point {read.point}",
        table,
        f"Poincaré: {read.poincare}  dim: {read.dim}",
        f"components: {', '.join(read.components)}  connected: {read.connected}",
        f"Deodhar: {read.deodhar}  match: {read.match}",
    ])


def run(config: RunConfig) -> str:
    """單一固定點的纖維報告；--point all 時掃過所有固定點。"""
    tau = build_gallery_type(config)
    convention = config.target_walls
    sign_table: Optional[SignTable] = chevalley_service.sign_table_for(tau.datum)

    if config.point_word is None:
        sweep = fibre_service.fibre_sweep(tau, convention, sign_table)
        read = FibreSweepRead(
            cartan=tau.datum.name,
            word=list(tau.word),
            target_type=sweep.target_type,
            points=[_to_read(tau, report, convention) for report in sweep.reports],
            weighted_sum=sweep.weighted_sum,
            identity_holds=sweep.identity_holds,
        )
        if config.format == "json":
            return dump_json(read)
        sections = [_render(point) for point in read.points]
        sections.append(f"Σ q^ℓ(u)·P_x(q): {read.weighted_sum}  identity: {read.identity_holds}")
        return "\n\n".join(sections)

    x = fibre_service.point_from_word(tau, config.point_word, convention)
    report = fibre_service.fibre_report(tau, x, sign_table)
    read = _to_read(tau, report, convention)
    return dump_json(read) if config.format == "json" else _render(read)
