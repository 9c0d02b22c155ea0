# -*- coding: utf-8 -*-
"""
Algoritmos de alocação do MSE (exceto o PTAS, em :mod:`mse.ptas`).

Heurísticas baseadas em LPT (SchedMixed, SchedJuxtapose, BestSchedule,
GreedyDedicated), os algoritmos de preenchimento por limiar (FillGreedy,
GreedyFor2Types) e o solver exato por branch-and-bound usado como oráculo.

Uso rápido::

    from mse.algorithms import run_algorithm

    resultado = run_algorithm("best", instancia)
    resultado.max_cost, resultado.allocation

Classes:
    AlgorithmResult       -- Alocação, custo recalculado e tempo de execução.
    ThresholdSearchConfig -- Intervalo da busca dicotômica de limiar.
    OverflowPolicy        -- Destino do transbordo no GreedyFor2Types.

Funções:
    lpt(), sched_mixed(), sched_juxtapose(), best_schedule(),
    greedy_dedicated(), fill_greedy(), greedy_for_2types(),
    greedy_for_2types_search(), exact_solve(), dedicate_shared_machines(),
    run_algorithm(), algorithm_names().

Exceções:
    AlgorithmError            -- Base dos erros de algoritmo.
    AlgorithmParameterError   -- Pré-condição do algoritmo não atendida.
    InfeasibleDedicationError -- Menos máquinas que grupos de tipos.
    OracleLimitError          -- Instância grande demais para o solver exato.
    UnknownAlgorithmError     -- Nome fora do registro.
"""

from __future__ import annotations

import heapq
import logging
import math
import re
import time
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence

from .configuracao import MseConfig, MseError
from .core import (
    Allocation,
    Instance,
    compatibility_clusters,
    max_cost,
    shared_machines,
    warn_if_not_normalized,
)

logger = logging.getLogger(__name__)


# ========== EXCEÇÕES CUSTOMIZADAS ==========

class AlgorithmError(MseError):
    """Exceção base para erros dos algoritmos de alocação."""
    pass


class AlgorithmParameterError(AlgorithmError):
    """Instância fora do domínio do algoritmo (ex.: FillGreedy com m <= T)."""
    pass


class InfeasibleDedicationError(AlgorithmParameterError):
    """GreedyDedicated com menos máquinas do que grupos de tipos."""
    pass


class OracleLimitError(AlgorithmError):
    """Instância excede os limites do solver exato; nunca aproximamos em silêncio."""
    pass


class UnknownAlgorithmError(AlgorithmError):
    pass


# Constantes
MAX_CLUSTERS_DEDICADOS: int = 6

Alocador = Callable[[Instance], Allocation]


@dataclass(frozen=True)
class AlgorithmResult:
    allocation: Allocation
    max_cost: float | int
    algorithm_name: str
    wall_time: float


@dataclass(frozen=True)
class ThresholdSearchConfig:
    """Intervalo inteiro ``[lower, upper]`` da busca dicotômica de limiar."""

    lower: int = 1
    upper: int = 1
    mode: str = "integer-bisection"

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise AlgorithmParameterError(
                f"Busca de limiar com intervalo vazio: [{self.lower}, {self.upper}]"
            )
        if self.mode != "integer-bisection":
            raise AlgorithmParameterError(f"Modo de busca desconhecido: {self.mode}")


class OverflowPolicy(Enum):
    """Máquina que recebe as tarefas restantes quando faltariam máquinas.

    O texto do algoritmo usa a última máquina do primeiro tipo, e é sobre
    ela que o argumento de 2-aproximação fecha. A variante da primeira
    máquina fica disponível para comparação.
    """

    LAST_TYPE1_MACHINE = "last"
    FIRST_TYPE1_MACHINE = "first"


# ========== LPT E DERIVADOS ==========

def lpt(sizes: Sequence[int], m: int) -> Allocation:
    """Longest Processing Time sobre uma projeção de tipo único.

    Tarefas em ordem não crescente de tamanho (empate: menor índice), cada
    uma na máquina de menor carga total (empate: menor índice de máquina).
    """
    if m < 1:
        raise AlgorithmParameterError(f"LPT exige m >= 1, recebido {m}")
    ordem = sorted(range(len(sizes)), key=lambda i: (-int(sizes[i]), i))
    heap = [(0, k) for k in range(m)]
    atribuicao = [0] * len(sizes)
    for i in ordem:
        carga, k = heapq.heappop(heap)
        atribuicao[i] = k
        heapq.heappush(heap, (carga + int(sizes[i]), k))
    return Allocation(tuple(atribuicao))


def sched_mixed(instance: Instance) -> Allocation:
    """LPT sobre todas as tarefas, ignorando tipos."""
    return lpt(instance.sizes.tolist(), instance.machines)


def sched_juxtapose(instance: Instance) -> Allocation:
    """LPT separado por tipo, justaposto com ordem de máquinas alternada.

    Os tipos presentes são percorridos em ordem crescente; o 2º, o 4º, ...
    têm a ordem das máquinas invertida antes da junção.
    """
    m = instance.machines
    atribuicao = [0] * instance.n
    presentes = sorted(set(instance.types.tolist()))
    for posicao, tipo in enumerate(presentes):
        ids = instance.tasks_of_type(tipo)
        parcial = lpt([instance.tasks[i].size for i in ids], m)
        invertido = posicao % 2 == 1
        for i, k in zip(ids, parcial.assignment):
            atribuicao[i] = m - 1 - k if invertido else k
    return Allocation(tuple(atribuicao))


def best_schedule(instance: Instance) -> Allocation:
    """Menor custo entre SchedMixed e SchedJuxtapose; empate fica com SchedMixed."""
    misto = sched_mixed(instance)
    justaposto = sched_juxtapose(instance)
    if max_cost(instance, justaposto) < max_cost(instance, misto):
        return justaposto
    return misto


# ========== GREEDY DEDICATED ==========

def _composicoes(total: int, partes: int) -> Iterator[tuple[int, ...]]:
    """Composições de ``total`` em ``partes`` inteiros >= 1, em ordem lexicográfica."""
    if partes == 1:
        yield (total,)
        return
    for primeiro in range(1, total - partes + 2):
        for resto in _composicoes(total - primeiro, partes - 1):
            yield (primeiro,) + resto


def _grupos_presentes(instance: Instance) -> list[list[int]]:
    """Ids das tarefas de cada grupo de compatibilidade não vazio, em ordem de grupo."""
    agrupamento = compatibility_clusters(instance.alpha)
    grupos: list[list[int]] = [[] for _ in range(agrupamento.cluster_count)]
    for tarefa in instance.tasks:
        grupos[agrupamento.cluster_of[tarefa.type_id]].append(tarefa.id)
    return [g for g in grupos if g]


def greedy_dedicated(instance: Instance, inner: Alocador = best_schedule) -> Allocation:
    """Grupos de compatibilidade em blocos disjuntos de máquinas.

    Avalia todas as composições ``(m_1, ..., m_K)`` com ``m_k >= 1`` e
    ``Σ m_k = m``, rodando ``inner`` em cada grupo sobre seu bloco. Fica a
    primeira composição (ordem lexicográfica) de menor custo.

    Raises:
        InfeasibleDedicationError: Se ``m`` for menor que o número de grupos.
        AlgorithmParameterError: Se houver mais de 6 grupos.
    """
    grupos = _grupos_presentes(instance)
    k_grupos = len(grupos)
    if k_grupos > MAX_CLUSTERS_DEDICADOS:
        raise AlgorithmParameterError(
            f"GreedyDedicated limitado a {MAX_CLUSTERS_DEDICADOS} grupos, instância tem {k_grupos}"
        )
    if instance.machines < k_grupos:
        raise InfeasibleDedicationError(
            f"{k_grupos} grupos de tipos incompatíveis para {instance.machines} máquinas"
        )

    cache: dict[tuple[int, int], tuple[Allocation, float | int]] = {}

    def resolver(c: int, maquinas: int) -> tuple[Allocation, float | int]:
        chave = (c, maquinas)
        if chave not in cache:
            sub, _ = instance.subset(grupos[c], maquinas)
            parcial = inner(sub)
            cache[chave] = (parcial, max_cost(sub, parcial))
        return cache[chave]

    melhor: Optional[tuple[int, ...]] = None
    melhor_custo: float | int = math.inf
    for composicao in _composicoes(instance.machines, k_grupos):
        custo = max(resolver(c, mk)[1] for c, mk in enumerate(composicao))
        if custo < melhor_custo:
            melhor, melhor_custo = composicao, custo

    assert melhor is not None
    atribuicao = [0] * instance.n
    deslocamento = 0
    for c, mk in enumerate(melhor):
        parcial, _ = resolver(c, mk)
        for original, k in zip(sorted(grupos[c]), parcial.assignment):
            atribuicao[original] = deslocamento + k
        deslocamento += mk
    return Allocation(tuple(atribuicao))


# ========== ALGORITMOS DE LIMIAR ==========

def _bissecao(busca: ThresholdSearchConfig, viavel: Callable[[int], bool]) -> Optional[int]:
    """Menor limiar inteiro viável em ``[lower, upper]``; supõe viabilidade monótona."""
    if not viavel(busca.upper):
        return None
    baixo, alto = busca.lower, busca.upper
    while baixo < alto:
        meio = (baixo + alto) // 2
        if viavel(meio):
            alto = meio
        else:
            baixo = meio + 1
    return baixo


def _proximo_encaixe(
    instance: Instance, grupos: list[list[int]], limiar: int
) -> Optional[list[int]]:
    """Next-fit por grupo, cada grupo começando em máquina nova; ``None`` se não couber."""
    atribuicao = [0] * instance.n
    maquina = -1
    for grupo in grupos:
        if not grupo:
            continue
        maquina += 1
        carga = 0
        for i in grupo:
            p = instance.tasks[i].size
            if p > limiar:
                return None
            if carga + p > limiar:
                maquina += 1
                carga = 0
            if maquina >= instance.machines:
                return None
            atribuicao[i] = maquina
            carga += p
    return atribuicao


def fill_greedy_threshold(instance: Instance) -> Fraction:
    """``L_max = max(2L, L + p_max)`` com ``L = W/(m - T)``."""
    t_count = instance.t_count
    if instance.machines <= t_count:
        raise AlgorithmParameterError(
            f"FillGreedy exige m > T (m={instance.machines}, T={t_count})"
        )
    media = Fraction(int(instance.sizes.sum()), instance.machines - t_count)
    return max(2 * media, media + int(instance.sizes.max()))


def fill_greedy(instance: Instance) -> Allocation:
    """Preenche máquinas grupo a grupo até o menor limiar inteiro viável.

    Grupos em ordem crescente; dentro do grupo, tarefas em ordem não
    crescente. O limiar sai de uma bissecção em ``[1, ceil(L_max)]``.

    Raises:
        AlgorithmParameterError: Se ``m <= T``.
    """
    l_max = fill_greedy_threshold(instance)
    agrupamento = compatibility_clusters(instance.alpha)
    grupos: list[list[int]] = [[] for _ in range(agrupamento.cluster_count)]
    for tarefa in sorted(instance.tasks, key=lambda t: (-t.size, t.id)):
        grupos[agrupamento.cluster_of[tarefa.type_id]].append(tarefa.id)

    busca = ThresholdSearchConfig(lower=1, upper=math.ceil(l_max))
    limiar = _bissecao(busca, lambda tau: _proximo_encaixe(instance, grupos, tau) is not None)
    if limiar is None:
        raise AlgorithmError(f"FillGreedy sem alocação viável em L_max={float(l_max):.3f}")
    logger.debug("FillGreedy: limiar %d (L_max=%.3f)", limiar, float(l_max))
    atribuicao = _proximo_encaixe(instance, grupos, limiar)
    assert atribuicao is not None
    return Allocation(tuple(atribuicao))


def _dois_grupos(instance: Instance) -> list[list[int]]:
    """Tipos como grupos quando ``T = 2``; senão os dois grupos de compatibilidade."""
    if instance.machines < 2:
        raise AlgorithmParameterError("GreedyFor2Types exige m >= 2")
    if instance.t_count == 2:
        grupo_de = [0, 1]
    else:
        agrupamento = compatibility_clusters(instance.alpha)
        if agrupamento.cluster_count != 2:
            raise AlgorithmParameterError(
                f"GreedyFor2Types exige T=2 ou 2 grupos (T={instance.t_count}, "
                f"K={agrupamento.cluster_count})"
            )
        grupo_de = list(agrupamento.cluster_of)
    grupos: list[list[int]] = [[], []]
    for tarefa in instance.tasks:
        grupos[grupo_de[tarefa.type_id]].append(tarefa.id)
    return grupos


def greedy_for_2types_threshold(instance: Instance) -> Fraction:
    """``L = W/m + max(W/m, p_max)``."""
    media = Fraction(int(instance.sizes.sum()), instance.machines)
    return media + max(media, Fraction(int(instance.sizes.max())))


def _preencher_dois_grupos(
    instance: Instance,
    grupos: list[list[int]],
    limiar: Fraction | int,
    politica: OverflowPolicy,
) -> tuple[list[int], bool]:
    """Retorna ``(atribuicao, transbordou)``."""
    m = instance.machines
    atribuicao = [0] * instance.n
    maquina = -1
    carga = 0
    primeira_grupo1: Optional[int] = None
    ultima_grupo1: Optional[int] = None
    pendentes: list[int] = []
    transbordou = False

    for g, grupo in enumerate(grupos):
        for posicao, i in enumerate(grupo):
            p = instance.tasks[i].size
            abrir = maquina < 0 or (g == 1 and posicao == 0) or carga + p > limiar
            if abrir:
                if maquina + 1 >= m:
                    pendentes = grupo[posicao:] + (grupos[1] if g == 0 else [])
                    transbordou = True
                    break
                maquina += 1
                carga = 0
            atribuicao[i] = maquina
            carga += p
            if g == 0:
                ultima_grupo1 = maquina
                if primeira_grupo1 is None:
                    primeira_grupo1 = maquina
        if transbordou:
            break

    if transbordou:
        if politica is OverflowPolicy.FIRST_TYPE1_MACHINE:
            destino = primeira_grupo1 if primeira_grupo1 is not None else 0
        else:
            destino = ultima_grupo1 if ultima_grupo1 is not None else 0
        for i in pendentes:
            atribuicao[i] = destino
    return atribuicao, transbordou


def greedy_for_2types(
    instance: Instance,
    policy: OverflowPolicy = OverflowPolicy.LAST_TYPE1_MACHINE,
    threshold: Optional[Fraction | int] = None,
) -> Allocation:
    """Preenche máquinas com o primeiro grupo e depois com o segundo.

    Uma tarefa entra na máquina corrente se a carga total resultante não
    passar de ``L = W/m + max(W/m, p_max)``; a primeira tarefa do segundo
    grupo sempre abre máquina nova. Se for preciso abrir a máquina ``m+1``,
    o restante vai para a máquina definida por ``policy``.

    Raises:
        AlgorithmParameterError: Se ``T != 2`` e ``K != 2``, ou ``m < 2``.
    """
    grupos = _dois_grupos(instance)
    limiar = greedy_for_2types_threshold(instance) if threshold is None else threshold
    atribuicao, transbordou = _preencher_dois_grupos(instance, grupos, limiar, policy)
    if transbordou:
        logger.debug("GreedyFor2Types: transbordo com limiar %s", limiar)
    return Allocation(tuple(atribuicao))


def greedy_for_2types_search(
    instance: Instance, policy: OverflowPolicy = OverflowPolicy.LAST_TYPE1_MACHINE
) -> Allocation:
    """Variante com busca do menor limiar sem transbordo.

    Compara o resultado do limiar fixo com o do menor limiar inteiro em
    ``[p_max, W]`` que dispensa transbordo e devolve o mais barato
    (empate fica com o limiar fixo).
    """
    grupos = _dois_grupos(instance)
    fixo = greedy_for_2types(instance, policy)
    busca = ThresholdSearchConfig(
        lower=int(instance.sizes.max()), upper=int(instance.sizes.sum())
    )
    limiar = _bissecao(
        busca, lambda tau: not _preencher_dois_grupos(instance, grupos, tau, policy)[1]
    )
    if limiar is None:
        return fixo
    buscado = Allocation(tuple(_preencher_dois_grupos(instance, grupos, limiar, policy)[0]))
    if max_cost(instance, buscado) < max_cost(instance, fixo):
        return buscado
    return fixo


# ========== SOLVER EXATO ==========

def _tipos_dois_conflitantes(instance: Instance) -> bool:
    alfa = instance.alpha
    return alfa.t_count == 2 and alfa.normalized and alfa[0, 1] >= 2 and alfa[1, 0] >= 2


def dedicate_shared_machines(instance: Instance, alloc: Allocation) -> Allocation:
    """Reagrupa pares de máquinas compartilhadas por tipo até restar no máximo uma.

    Com ``T = 2``, diagonal 1 e ambos os coeficientes cruzados ``>= 2``, juntar a carga
    de cada tipo de duas máquinas compartilhadas numa só nunca aumenta o
    custo máximo: a primeira máquina fica com o tipo 0, a segunda com o 1.

    Raises:
        AlgorithmParameterError: Fora de ``T = 2`` com coeficientes cruzados ``>= 2``.
    """
    if not _tipos_dois_conflitantes(instance):
        raise AlgorithmParameterError("Reagrupamento exige T=2, diagonal 1 e α cruzados >= 2")
    atribuicao = list(alloc.assignment)
    compartilhadas = shared_machines(instance, alloc)
    while len(compartilhadas) >= 2:
        a, b = compartilhadas[0], compartilhadas[1]
        for i, k in enumerate(atribuicao):
            if k in (a, b):
                atribuicao[i] = a if instance.tasks[i].type_id == 0 else b
        compartilhadas = compartilhadas[2:]
    return Allocation(tuple(atribuicao))


def exact_solve(
    instance: Instance,
    limit: int = 12,
    max_machines: int = 5,
) -> Allocation:
    """Alocação ótima por branch-and-bound.

    Tarefas em ordem não crescente; a tarefa 0 vai para a máquina 0 e a
    máquina ``k`` só abre se ``k-1`` estiver aberta. Poda quando o custo
    máximo parcial alcança a melhor solução conhecida (inicializada com
    BestSchedule).

    Raises:
        OracleLimitError: Se ``n > limit`` ou ``m > max_machines``.
    """
    if instance.n > limit or instance.machines > max_machines:
        raise OracleLimitError(
            f"Solver exato limitado a n <= {limit} e m <= {max_machines} "
            f"(instância: n={instance.n}, m={instance.machines})"
        )

    alfa = instance.alpha.coeff.tolist()
    t_count = instance.t_count
    m = instance.machines
    ordem = sorted(range(instance.n), key=lambda i: (-instance.tasks[i].size, i))
    tamanhos = [instance.tasks[i].size for i in ordem]
    tipos = [instance.tasks[i].type_id for i in ordem]

    inicial = best_schedule(instance)
    melhor_custo = max_cost(instance, inicial)
    melhor_atribuicao = list(inicial.assignment)
    limite_inferior = max(p * alfa[t][t] for p, t in zip(tamanhos, tipos))

    custo = [[0.0] * t_count for _ in range(m)]
    presentes = [[0] * t_count for _ in range(m)]
    maximo_maquina = [0.0] * m
    atual = [0] * instance.n

    def buscar(j: int, abertas: int, parcial: float) -> None:
        nonlocal melhor_custo, melhor_atribuicao
        if melhor_custo <= limite_inferior:
            return
        if j == instance.n:
            if parcial < melhor_custo:
                melhor_custo = parcial
                melhor_atribuicao = [0] * instance.n
                for pos, i in enumerate(ordem):
                    melhor_atribuicao[i] = atual[pos]
            return
        p, u = tamanhos[j], tipos[j]
        linha_alfa = alfa[u]
        for k in range(min(abertas + 1, m)):
            salvo_custo = custo[k][:]
            salvo_maximo = maximo_maquina[k]
            for v in range(t_count):
                custo[k][v] += p * linha_alfa[v]
            presentes[k][u] += 1
            maximo_maquina[k] = max(custo[k][v] for v in range(t_count) if presentes[k][v])
            novo_parcial = max(parcial, maximo_maquina[k])
            if novo_parcial < melhor_custo:
                atual[j] = k
                buscar(j + 1, max(abertas, k + 1), novo_parcial)
            presentes[k][u] -= 1
            custo[k] = salvo_custo
            maximo_maquina[k] = salvo_maximo

    buscar(0, 0, 0.0)
    otima = Allocation(tuple(melhor_atribuicao))
    if _tipos_dois_conflitantes(instance):
        otima = dedicate_shared_machines(instance, otima)
    return otima


# ========== REGISTRO ==========

def _dedicado(inner: Alocador) -> Alocador:
    return lambda instancia: greedy_dedicated(instancia, inner)


REGISTRO: dict[str, Alocador] = {
    "mix": sched_mixed,
    "jux": sched_juxtapose,
    "best": best_schedule,
    "ded-mix": _dedicado(sched_mixed),
    "ded-jux": _dedicado(sched_juxtapose),
    "ded-best": _dedicado(best_schedule),
    "ded": _dedicado(best_schedule),
    "fill": fill_greedy,
    "g2": greedy_for_2types_search,
}

PADRAO_PTAS = re.compile(r"^ptas:k=(\d+)$")


def algorithm_names() -> list[str]:
    return list(REGISTRO) + ["exact", "ptas:k=<int>"]


def run_algorithm(
    name: str, instance: Instance, config: Optional[MseConfig] = None
) -> AlgorithmResult:
    """Executa o algoritmo registrado em ``name`` e recalcula o custo.

    Raises:
        UnknownAlgorithmError: Nome fora do registro.
        AlgorithmError / PtasGuardError: Pré-condições do algoritmo.
    """
    config = config or MseConfig()
    correspondencia = PADRAO_PTAS.match(name)
    if correspondencia:
        from .ptas import ptas_optimize

        precisao = int(correspondencia.group(1))

        def executar(inst: Instance) -> Allocation:
            return ptas_optimize(
                inst, precisao,
                max_classes=config.ptas_max_classes, max_states=config.ptas_max_states,
            )
    elif name == "exact":
        def executar(inst: Instance) -> Allocation:
            return exact_solve(inst, config.oracle_limit, config.oracle_max_machines)
    elif name in REGISTRO:
        executar = REGISTRO[name]
    else:
        raise UnknownAlgorithmError(
            f"Algoritmo desconhecido: {name!r}. Disponíveis: {', '.join(algorithm_names())}"
        )

    if not correspondencia:
        warn_if_not_normalized(instance, name)
    inicio = time.perf_counter()
    alocacao = executar(instance)
    duracao = time.perf_counter() - inicio
    return AlgorithmResult(
        allocation=alocacao,
        max_cost=max_cost(instance, alocacao),
        algorithm_name=name,
        wall_time=duracao,
    )
