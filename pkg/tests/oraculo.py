"""Oráculo por força bruta e estratégias hypothesis compartilhadas pelos testes."""

import itertools

import numpy as np
from hypothesis import strategies as st

from mse.core import Allocation, AlphaMatrix, Instance, max_cost
from mse.instances import coefficient_preset


def forca_bruta(instancia):
    """Menor custo máximo sobre todas as ``m^n`` alocações (máquinas idênticas)."""
    melhor = None
    # tarefa 0 fixa na máquina 0
    for resto in itertools.product(range(instancia.machines), repeat=instancia.n - 1):
        alocacao = Allocation((0,) + resto)
        custo = max_cost(instancia, alocacao)
        if melhor is None or custo < melhor:
            melhor = custo
    return melhor


def instancia(pares, alpha, m):
    """Monta instância a partir de pares ``(tamanho, tipo)``."""
    tamanhos = [p for p, _ in pares]
    tipos = [t for _, t in pares]
    if not isinstance(alpha, AlphaMatrix):
        alpha = AlphaMatrix.from_rows(alpha)
    return Instance.from_sizes(tamanhos, tipos, alpha, m)


def alfa_uniforme(t_count, fora, diagonal=1.0):
    matriz = np.full((t_count, t_count), float(fora))
    np.fill_diagonal(matriz, diagonal)
    return AlphaMatrix(matriz)


@st.composite
def instancias_pequenas(draw, max_n=6, max_m=3, t_values=(1, 2, 3), scenarios=None):
    """Instâncias com ``n <= max_n`` usando presets ou alfa uniforme."""
    t_count = draw(st.sampled_from(t_values))
    if scenarios and t_count >= 2:
        cenario = draw(st.sampled_from([s for s in scenarios if s != "mixed" or t_count >= 3]))
        alpha = coefficient_preset(t_count, cenario)
    else:
        fora = draw(st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0, 3.0]))
        alpha = alfa_uniforme(t_count, fora)
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, max_m))
    tamanhos = draw(st.lists(st.integers(1, 20), min_size=n, max_size=n))
    tipos = draw(st.lists(st.integers(0, t_count - 1), min_size=n, max_size=n))
    return Instance.from_sizes(tamanhos, tipos, alpha, m)


PRESETS_POR_T = {
    2: ("compatible", "incompatible", "clashing"),
    3: ("compatible", "mixed", "incompatible", "clashing"),
}


def varredura_aleatoria(total, semente=2017, max_n=10, max_m=3):
    """Instâncias ``(cenario, instancia)`` com ``n <= max_n``, ``m <= max_m`` e ``T`` em {2, 3}.

    Percorre ciclicamente cada par ``(T, cenario)`` e cada ``m`` para cobrir
    todos os presets por igual; tamanhos e tipos vêm de um rng semeado.
    """
    rng = np.random.default_rng(semente)
    celulas = [(t, c, m) for t, cenarios in PRESETS_POR_T.items() for c in cenarios for m in range(1, max_m + 1)]
    for i in range(total):
        t_count, cenario, m = celulas[i % len(celulas)]
        n = int(rng.integers(2, max_n + 1))
        tamanhos = rng.integers(1, 21, size=n).tolist()
        tipos = rng.integers(0, t_count, size=n).tolist()
        yield cenario, Instance.from_sizes(tamanhos, tipos, coefficient_preset(t_count, cenario), m)


def multiconjuntos_dois_tipos(max_n, tamanhos=(1, 2, 3, 4)):
    """Todos os multiconjuntos de pares ``(tamanho, tipo)`` com tipo em {0, 1} e ``1 <= n <= max_n``."""
    itens = [(p, t) for t in (0, 1) for p in tamanhos]
    for n in range(1, max_n + 1):
        yield from itertools.combinations_with_replacement(itens, n)


def particao_perfeita(valores):
    """Existe subconjunto com metade da soma? (enumeração de subconjuntos)"""
    total = sum(valores)
    if total % 2:
        return False
    return any(
        sum(escolha) * 2 == total
        for r in range(len(valores) + 1)
        for escolha in itertools.combinations(valores, r)
    )


def melhor_particao(valores):
    """Menor soma máxima entre as duas partes, por enumeração."""
    total = sum(valores)
    return min(
        max(sum(escolha), total - sum(escolha))
        for r in range(len(valores) + 1)
        for escolha in itertools.combinations(valores, r)
    )


def _grade_de_fracoes(m, passos):
    if m == 1:
        return np.array([[passos]])
    linhas = [
        (primeiro,) + tuple(resto)
        for primeiro in range(passos + 1)
        for resto in _grade_de_fracoes(m - 1, passos - primeiro)
    ]
    return np.array(linhas)


def pl_por_grade(cargas, beta, m, passos=100):
    """Mínimo de ``max_{k,u} Σ_t cargas[t]·x[t][k]·beta[t][u]`` com ``x`` na grade ``1/passos``.

    Só para dois tipos: a grade do tipo 0 é percorrida linha a linha e a do
    tipo 1 de forma vetorizada.
    """
    grade = _grade_de_fracoes(m, passos) / passos
    melhor = np.inf
    for fracao0 in grade:
        # custo[u] tem forma (pontos, m)
        custos = [
            cargas[0] * beta[0][u] * fracao0[np.newaxis, :] + cargas[1] * beta[1][u] * grade
            for u in range(2)
        ]
        pior = np.maximum(custos[0], custos[1]).max(axis=1)
        melhor = min(melhor, float(pior.min()))
    return melhor
