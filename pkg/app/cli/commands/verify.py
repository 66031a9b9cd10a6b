# app/cli/commands/verify.py: `verify` 子命令，以 A 型矩陣實現比對組合預測

from typing import List

from app import config as settings
from app.cli.common import add_common_arguments, build_gallery_type, dump_json, format_table, letters
from app.exceptions import OracleMismatch
from app.logging_config import get_logger
from app.models import CellCheckResult, FieldSpec, Gallery
from app.schemas import FixedPointCountRead, NonlinearCellRead, RunConfig, VerifyReportRead
from app.services import cartan_service, chevalley_service, fibre_service

logger = get_logger("cli.verify")

DEFAULT_Q = 2


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="F_q 點數普查與胞腔方程式抽樣驗證（僅 A 型）")
    add_common_arguments(parser)
    parser.add_argument("--q", type=int, default=None, help=f"普查用的質數，預設 {DEFAULT_Q}")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--trials", type=int, default=None, help="每個胞腔的抽樣次數，預設取 BS_SAMPLING_TRIALS")
    parser.add_argument("--workers", type=int, default=None, help="普查使用的行程數，預設取 BS_CENSUS_WORKERS")


def run(config: RunConfig) -> str:
    """
    1. 以整數與 F_p 矩陣檢查展示關係（加法同態、交換子、符號 n(i, β)）。
    2. 窮舉 F_q 點，比對收縮類別、固定點與 Schubert 胞腔的點數。
    3. 對每個纖維胞腔抽樣檢查方程式；含交換子高次項的胞腔列在 nonlinear_cells，不算失敗。

    Raises:
        UnsupportedType: 非 A 型。
        OracleMismatch: 任一比對失敗，detail 含第一個反例。
    """
    tau = build_gallery_type(config)
    datum = tau.datum
    q = config.q or DEFAULT_Q
    sampling_field = FieldSpec(prime=settings.SAMPLING_PRIME)

    chevalley_service.check_commutator_relation(datum, sampling_field, seed=config.seed)
    sign_table = chevalley_service.build_sign_table(datum)
    chevalley_service.check_sign_relation(datum, sign_table, sampling_field, seed=config.seed)

    census = chevalley_service.enumerate_points_fq(tau, q, workers=config.workers)
    problems = chevalley_service.census_mismatches(tau, census)
    if problems:
        raise OracleMismatch(detail=f"點數普查不一致：{problems[0]}（共 {len(problems)} 項）")

    sweep = fibre_service.fibre_sweep(tau, sign_table=sign_table)
    fixed_points = []
    samples: List[CellCheckResult] = []
    nonlinear: List[NonlinearCellRead] = []
    for label, report in zip(sweep.points, sweep.reports):
        predicted = sum(c * q**k for k, c in enumerate(report.poincare))
        fixed_points.append(FixedPointCountRead(
            point=label,
            predicted=predicted,
            counted=census.per_fixed_point.get(label, 0),
            schubert_predicted=q ** report.point_length * predicted,
            schubert_counted=census.per_schubert_cell.get(label, 0),
        ))
        x = fibre_service.fixed_point(datum, cartan_service.weyl_from_word(datum, report.point), tau.target_type)
        for cell in report.cells:
            result = chevalley_service.sample_check_cell(
                tau,
                Gallery.from_label(cell.gallery),
                x,
                field_spec=sampling_field,
                trials=config.trials,
                seed=config.seed,
                sign_table=sign_table,
            )
            if result.nonlinear:
                nonlinear.append(NonlinearCellRead(
                    point=label, gallery=cell.gallery, exact_equations=result.exact_equations,
                ))
            elif not result.passed:
                raise OracleMismatch(
                    detail=f"胞腔 {cell.gallery} 在 {label} 上抽樣失敗：{result.reason}，座標 {result.counterexample}"
                )
            samples.append(result)

    read = VerifyReportRead(
        cartan=datum.name,
        word=list(tau.word),
        q=q,
        total=census.total,
        expected_total=(q + 1) ** tau.r,
        classes_checked=len(census.per_class),
        fixed_points=fixed_points,
        samples=samples,
        nonlinear_cells=nonlinear,
        passed=True,
    )
    logger.info("%s 字 %s 驗證通過：%d 個點，%d 個胞腔抽樣", datum.name, tau.word, census.total, len(samples))
    if config.format == "json":
        return dump_json(read)

    rows = [
        (row.point, row.predicted, row.counted, row.schubert_predicted, row.schubert_counted)
        for row in read.fixed_points
    ]
    table = format_table(["point", "P_x(q)", "fibre points", "q^ℓ(u)·P_x(q)", "cell points"], rows)
    return "\n".join([
        f"{read.cartan} word {letters(read.word)} over F_{read.q}: {read.total} points (expected {read.expected_total})",
        table,
        f"retraction classes: {read.classes_checked}  sampled cells: {len(read.samples)}  passed: {read.passed}",
        *(
            f"nonlinear cell {cell.gallery} over {cell.point}: " + "; ".join(f"{eq} = 0" for eq in cell.exact_equations)
            for cell in read.nonlinear_cells
        ),
    ])
