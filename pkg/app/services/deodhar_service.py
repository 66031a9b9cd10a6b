# app/services/deodhar_service.py: 以子表達式列舉計算纖維的點數多項式
# 只使用 cartan_service 的 Weyl 群運算，與 fibre_service 的牆、區塊計算完全獨立，作為交叉驗證。

from typing import Iterable, List

from app.logging_config import get_logger
from app.models import CartanDatum, ParabolicType, WeylElement
from app.services import cartan_service as cartan

logger = get_logger("deodhar")


def deodhar_polynomial(
    datum: CartanDatum,
    word: Iterable[int],
    target_type: ParabolicType,
    u: WeylElement,
    distinguished: bool = False,
) -> List[int]:
    """
    對字的所有子表達式（每個字母選擇乘或不乘）求 Σ q^{exponent}，
    只計終點 v 落在 u·W_{T0} 的子表達式。

    exponent = 下降位置數 + ℓ(v) - ℓ(u)，其中下降位置是「目前前綴乘上該字母會變短」的位置，
    不論是否真的相乘。distinguished=True 時只保留 Deodhar 意義下的 distinguished 子表達式，
    也就是每個下降位置都必須相乘。

    Args:
        datum: Cartan 資料。
        word: 約化字，源點優先。
        target_type: 拋物子群的型 T0。
        u: 固定點（任何代表元皆可）。
        distinguished: 是否只列舉 distinguished 子表達式。

    Returns:
        List[int]: 由低次到高次的係數；沒有任何子表達式時為 [0]。

    Raises:
        NonReducedWord: 字不是約化字。
    """
    word = cartan.require_reduced(datum, word)
    u = cartan.min_coset_rep(datum, u, target_type)
    counts: dict = {}

    # 堆疊元素：(下一個位置, 目前前綴, 已累計的下降數)
    stack = [(0, cartan.identity(datum), 0)]
    while stack:
        p, prefix, defect = stack.pop()
        if p == len(word):
            if cartan.min_coset_rep(datum, prefix, target_type) == u:
                exponent = defect + prefix.length - u.length
                counts[exponent] = counts.get(exponent, 0) + 1
            continue
        letter = word[p]
        descent = not cartan.is_positive(prefix.images[letter - 1])
        taken = cartan.times_simple(datum, prefix, letter)
        stack.append((p + 1, taken, defect + descent))
        if not (distinguished and descent):
            stack.append((p + 1, prefix, defect + descent))

    if not counts:
        return [0]
    coefficients = [0] * (max(counts) + 1)
    for exponent, count in counts.items():
        coefficients[exponent] = count
    logger.debug("Deodhar 多項式 %s（distinguished=%s）：%s", word, distinguished, coefficients)
    return coefficients
