# app/cli/commands/deodhar.py: `deodhar` 子命令

from app.cli.common import add_common_arguments, build_gallery_type, dump_json, letters
from app.exceptions import InvalidInput
from app.schemas import DeodharRead, RunConfig
from app.services import cartan_service, deodhar_service, fibre_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("deodhar", help="以子表達式列舉計算纖維的點數多項式")
    add_common_arguments(parser)
    parser.add_argument("--point", default="e", help="u 的約化字或 'e'")
    parser.add_argument("--distinguished", action="store_true", help="只列舉 distinguished 子表達式")


def run(config: RunConfig) -> str:
    tau = build_gallery_type(config)
    if config.point_word is None:
        raise InvalidInput(detail="deodhar 需要單一固定點，不接受 --point all")
    x = fibre_service.point_from_word(tau, config.point_word)
    polynomial = deodhar_service.deodhar_polynomial(
        tau.datum, tau.word, tau.target_type, x.u, distinguished=config.distinguished,
    )
    read = DeodharRead(
        cartan=tau.datum.name,
        word=list(tau.word),
        target_type=list(tau.target_type.sorted),
        point=cartan_service.word_label(tau.datum, x.u),
        distinguished=config.distinguished,
        polynomial=polynomial,
    )
    if config.format == "json":
        return dump_json(read)
    mode = "distinguished" if read.distinguished else "all subexpressions"
    return f"{read.cartan} word {letters(read.word)}, point {read.point} ({mode}): {read.polynomial}"
