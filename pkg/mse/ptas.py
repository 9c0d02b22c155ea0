# -*- coding: utf-8 -*-
"""
Esquema de aproximação polinomial (PTAS) para T e α constantes.

Dado um custo alvo ``C`` e uma precisão ``k``, o PTAS devolve uma alocação
de custo no máximo ``C(1 + 1/k)`` ou prova que não existe alocação de
custo ``C``. A aritmética é toda em :class:`fractions.Fraction` para que
nenhuma tarefa troque de classe por erro de ponto flutuante.

Etapas:
    1. Tarefas longas (``p >= C/(γk)``) arredondadas para baixo ao múltiplo
       de ``C/(γk)²``.
    2. Carga curta de cada tipo colada em contêineres de ``C/(γk)``; até
       ``min(m, contêineres)`` deles saem da instância arredondada.
    3. Programação dinâmica sobre o reticulado de contagens calcula o
       mínimo de máquinas. Os contêineres retirados voltam como no máximo
       uma vaga sem carga por máquina e tipo, só em máquinas cuja
       configuração respeita a restrição daquele tipo.
    4. Reconstrução: contêineres trocados por tarefas curtas reais e
       tamanhos longos originais restaurados.

Uso rápido::

    from mse.ptas import ptas_optimize

    alocacao = ptas_optimize(instancia, k=2)

Exceções:
    PtasGuardError -- Instância além das guardas de classes ou estados.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Any, Optional

from .configuracao import MseError
from .core import Allocation, Instance

logger = logging.getLogger(__name__)


# ========== EXCEÇÕES CUSTOMIZADAS ==========

class PtasGuardError(MseError):
    """Recusa legível por máquina: ``code`` identifica a guarda, ``details`` os números."""

    def __init__(self, code: str, message: str, details: Optional[dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.code = code
        self.details = dict(details or {})


# Constantes
MAX_CLASSES_PADRAO: int = 400
MAX_ESTADOS_PADRAO: int = 2_000_000

INFINITO = math.inf


def alpha_fractions(instance: Instance) -> list[list[Fraction]]:
    """Coeficientes como frações exatas (via representação decimal curta)."""
    return [[Fraction(str(v)) for v in linha] for linha in instance.alpha.coeff.tolist()]


@dataclass(frozen=True)
class PtasParams:
    """Parâmetros de uma sondagem: custo alvo ``C``, precisão ``k`` e ``γ``."""

    target_cost: Fraction
    precision: int
    gamma: Fraction

    def __post_init__(self) -> None:
        if self.precision < 1:
            raise PtasGuardError("precision", f"Precisão k deve ser >= 1, recebido {self.precision}")

    @classmethod
    def for_instance(cls, instance: Instance, target_cost: Fraction | int, precision: int) -> "PtasParams":
        """Calcula ``γ = T·α_max·(2 + 1/min α_ii)`` exatamente.

        Raises:
            PtasGuardError: Diagonal com zero (``γ`` indefinido).
        """
        alfa = alpha_fractions(instance)
        diagonal_min = min(alfa[t][t] for t in range(instance.t_count))
        if diagonal_min <= 0:
            raise PtasGuardError(
                "diagonal", "PTAS exige α_ii > 0 em toda a diagonal",
                {"min_diagonal": float(diagonal_min)},
            )
        alfa_max = max(max(linha) for linha in alfa)
        gamma = instance.t_count * alfa_max * (2 + 1 / diagonal_min)
        return cls(Fraction(target_cost), precision, gamma)

    @property
    def gamma_k(self) -> Fraction:
        return self.gamma * self.precision

    @property
    def long_threshold(self) -> Fraction:
        """``C/(γk)``: limiar de tarefa longa e tamanho do contêiner."""
        return self.target_cost / self.gamma_k

    @property
    def class_width(self) -> Fraction:
        """``C/(γk)²``: largura de uma classe de tamanho."""
        return self.target_cost / (self.gamma_k ** 2)

    @property
    def class_count(self) -> int:
        return math.ceil(self.gamma_k ** 2)


@dataclass(frozen=True)
class ItemKind:
    """Tipo de item da instância arredondada: classe longa ou contêiner."""

    type_id: int
    size_class: Optional[int]

    @property
    def container(self) -> bool:
        return self.size_class is None


@dataclass(frozen=True)
class SizeClassConfig:
    """Contagens por tipo de item (classes longas e contêineres restantes)."""

    kinds: tuple[ItemKind, ...]
    counts: tuple[int, ...]

    def count_of(self, kind: ItemKind) -> int:
        return self.counts[self.kinds.index(kind)] if kind in self.kinds else 0


@dataclass(frozen=True)
class MachineConfig:
    """Conteúdo de uma máquina no reticulado.

    ``counts`` é a carga real por tipo de item; ``restored`` são os tipos
    que recebem nesta máquina um contêiner retirado (vaga sem carga).
    """

    counts: tuple[int, ...]
    restored: frozenset[int]


@dataclass(frozen=True)
class RoundedInstance:
    """Resultado do arredondamento com a contabilidade da reconstrução."""

    config: SizeClassConfig
    containers: tuple[int, ...]
    removed: tuple[int, ...]
    long_tasks: dict[ItemKind, tuple[int, ...]]
    short_tasks: tuple[tuple[int, ...], ...]
    short_load: tuple[int, ...]


@dataclass
class DpSolution:
    """Mínimo de máquinas e a agenda reconstruída pelos ponteiros da memória.

    ``kinds`` é a indexação do reticulado: os tipos de item da configuração
    arredondada mais os contêineres retirados.
    """

    machines: float | int
    kinds: tuple[ItemKind, ...]
    schedule: list[MachineConfig]


# ========== ARREDONDAMENTO ==========

def build_rounded_instance(instance: Instance, params: PtasParams) -> RoundedInstance:
    """Arredonda as tarefas longas e cola as curtas em contêineres.

    Os contêineres de um tipo são ``ceil(W_s/(C/(γk)))``: cheios de
    ``C/(γk)`` mais um final menor. Saem ``min(m, contêineres)`` por tipo,
    o menor primeiro, de modo que os restantes são todos cheios.
    """
    limiar = params.long_threshold
    largura = params.class_width

    longas: dict[ItemKind, list[int]] = {}
    curtas: list[list[int]] = [[] for _ in range(instance.t_count)]
    for tarefa in instance.tasks:
        if tarefa.size >= limiar:
            classe = math.floor(Fraction(tarefa.size) / largura)
            longas.setdefault(ItemKind(tarefa.type_id, classe), []).append(tarefa.id)
        else:
            curtas[tarefa.type_id].append(tarefa.id)

    carga_curta = tuple(sum(instance.tasks[i].size for i in ids) for ids in curtas)
    conteineres = tuple(math.ceil(Fraction(w) / limiar) for w in carga_curta)
    retirados = tuple(min(instance.machines, c) for c in conteineres)

    tipos_longos = sorted(longas, key=lambda kd: (kd.type_id, kd.size_class))
    tipos_conteiner = [
        ItemKind(t, None) for t in range(instance.t_count) if conteineres[t] - retirados[t] > 0
    ]
    kinds = tuple(tipos_longos + tipos_conteiner)
    counts = tuple(
        len(longas[kd]) if not kd.container else conteineres[kd.type_id] - retirados[kd.type_id]
        for kd in kinds
    )
    ordem_curtas = tuple(
        tuple(sorted(ids, key=lambda i: (-instance.tasks[i].size, i))) for ids in curtas
    )
    return RoundedInstance(
        config=SizeClassConfig(kinds, counts),
        containers=conteineres,
        removed=retirados,
        long_tasks={kd: tuple(ids) for kd, ids in longas.items()},
        short_tasks=ordem_curtas,
        short_load=carga_curta,
    )


# ========== PROGRAMAÇÃO DINÂMICA ==========

def _reticulado(rounded: RoundedInstance, t_count: int) -> tuple[tuple[ItemKind, ...], tuple[int, ...]]:
    """Tipos de item e contagens do estado inicial (contêineres retirados incluídos)."""
    kinds = list(rounded.config.kinds)
    counts = list(rounded.config.counts)
    for t in range(t_count):
        if rounded.removed[t] == 0:
            continue
        kd = ItemKind(t, None)
        if kd in kinds:
            counts[kinds.index(kd)] += rounded.removed[t]
        else:
            kinds.append(kd)
            counts.append(rounded.removed[t])
    return tuple(kinds), tuple(counts)


def _tamanho_em_classes(kind: ItemKind, params: PtasParams) -> Fraction:
    return params.gamma_k if kind.container else Fraction(kind.size_class)


def _configuracoes_viaveis(
    kinds: tuple[ItemKind, ...],
    limites: tuple[int, ...],
    alfa: list[list[Fraction]],
    params: PtasParams,
) -> list[tuple[tuple[int, ...], MachineConfig]]:
    """Enumera as configurações de máquina viáveis por busca em profundidade.

    Cargas em unidades de ``C/(γk)²``: o tipo ``t`` presente ou restaurado
    exige ``Σ_{t'} α[t'][t]·carga_{t'} <= (γk)²``. Acrescentar itens só
    aumenta cargas e restrições, então um prefixo inviável encerra o ramo.

    Returns:
        Pares ``(consumo, config)``; o consumo soma uma unidade de
        contêiner por tipo restaurado.
    """
    t_count = len(alfa)
    teto = params.gamma_k ** 2
    tamanhos = [_tamanho_em_classes(kd, params) for kd in kinds]
    conteiner_de = {kd.type_id: j for j, kd in enumerate(kinds) if kd.container}

    def viavel(cargas: list[Fraction], ativos: set[int]) -> bool:
        return all(sum(alfa[u][t] * cargas[u] for u in range(t_count)) <= teto for t in ativos)

    resultado: list[tuple[tuple[int, ...], MachineConfig]] = []
    atual = [0] * len(kinds)

    def restaurar(cargas: list[Fraction], presentes: set[int]) -> None:
        candidatos = [t for t in sorted(conteiner_de) if atual[conteiner_de[t]] < limites[conteiner_de[t]]]
        for mascara in range(1 << len(candidatos)):
            restaurados = {candidatos[b] for b in range(len(candidatos)) if mascara >> b & 1}
            if not viavel(cargas, presentes | restaurados):
                continue
            consumo = list(atual)
            for t in restaurados:
                consumo[conteiner_de[t]] += 1
            if any(consumo):
                resultado.append((tuple(consumo), MachineConfig(tuple(atual), frozenset(restaurados))))

    def descer(j: int, cargas: list[Fraction], presentes: set[int]) -> None:
        if j == len(kinds):
            restaurar(cargas, presentes)
            return
        descer(j + 1, cargas, presentes)
        kd = kinds[j]
        novas = list(cargas)
        ativos = presentes | {kd.type_id}
        for quantidade in range(1, limites[j] + 1):
            novas[kd.type_id] += tamanhos[j]
            if not viavel(novas, ativos):
                break
            atual[j] = quantidade
            descer(j + 1, novas, ativos)
        atual[j] = 0

    descer(0, [Fraction(0)] * t_count, set())
    return resultado


def dp_min_machines(rounded: RoundedInstance, params: PtasParams, alfa: list[list[Fraction]]) -> DpSolution:
    """Número mínimo de máquinas para a instância arredondada com custo <= ``C``.

    ``OPT(0) = 0`` e ``OPT(n) = 1 + min OPT(n - s)`` sobre as configurações
    viáveis ``s <= n`` que contêm o primeiro tipo de item não nulo.
    Estados sem configuração viável valem ``inf``.
    """
    kinds, inicial = _reticulado(rounded, len(alfa))
    configs = _configuracoes_viaveis(kinds, inicial, alfa, params)
    por_primeiro: dict[int, list[tuple[tuple[int, ...], MachineConfig]]] = {}
    for consumo, config in configs:
        for j, c in enumerate(consumo):
            if c:
                por_primeiro.setdefault(j, []).append((consumo, config))

    memo: dict[tuple[int, ...], tuple[float | int, Optional[int]]] = {}

    def resolver(estado: tuple[int, ...]) -> float | int:
        if estado in memo:
            return memo[estado][0]
        primeiro = next((j for j, c in enumerate(estado) if c), None)
        if primeiro is None:
            memo[estado] = (0, None)
            return 0
        melhor: float | int = INFINITO
        escolha: Optional[int] = None
        for idx, (consumo, _) in enumerate(por_primeiro.get(primeiro, [])):
            if any(c > e for c, e in zip(consumo, estado)):
                continue
            valor = 1 + resolver(tuple(e - c for e, c in zip(estado, consumo)))
            if valor < melhor:
                melhor, escolha = valor, idx
        memo[estado] = (melhor, escolha)
        return melhor

    maquinas = resolver(inicial)
    agenda: list[MachineConfig] = []
    if maquinas != INFINITO:
        estado = inicial
        while any(estado):
            primeiro = next(j for j, c in enumerate(estado) if c)
            consumo, config = por_primeiro[primeiro][memo[estado][1]]
            agenda.append(config)
            estado = tuple(e - c for e, c in zip(estado, consumo))
    return DpSolution(maquinas, kinds, agenda)


def _tamanho_estados(counts: tuple[int, ...]) -> int:
    return reduce(lambda acc, c: acc * (c + 1), counts, 1)


# ========== DECISÃO E OTIMIZAÇÃO ==========

def ptas_feasible(
    instance: Instance,
    params: PtasParams,
    max_classes: int = MAX_CLASSES_PADRAO,
    max_states: int = MAX_ESTADOS_PADRAO,
) -> Optional[Allocation]:
    """Alocação de custo <= ``C(1 + 1/k)``, ou ``None`` se não há alocação de custo ``C``.

    Raises:
        PtasGuardError: ``ceil((γk)²) > max_classes`` ou reticulado maior que ``max_states``.
    """
    if params.class_count > max_classes:
        raise PtasGuardError(
            "classes",
            f"(γk)² = {params.class_count} classes excede o limite {max_classes}",
            {"classes": params.class_count, "limit": max_classes, "gamma": str(params.gamma)},
        )
    C = params.target_cost
    if C <= 0:
        return None
    alfa = alpha_fractions(instance)
    if any(t.size * alfa[t.type_id][t.type_id] > C for t in instance.tasks):
        return None

    rounded = build_rounded_instance(instance, params)
    _, inicial = _reticulado(rounded, instance.t_count)
    estados = _tamanho_estados(inicial)
    if estados > max_states:
        raise PtasGuardError(
            "states",
            f"Reticulado com {estados} estados excede o limite {max_states}",
            {"states": estados, "limit": max_states},
        )

    solucao = dp_min_machines(rounded, params, alfa)
    if solucao.machines > instance.machines:
        return None
    return _reconstruir(instance, rounded, solucao, params)


def _reconstruir(
    instance: Instance, rounded: RoundedInstance, solucao: DpSolution, params: PtasParams
) -> Allocation:
    """Troca contêineres por tarefas curtas e classes por tarefas originais."""
    atribuicao = [-1] * instance.n
    fila_longas = {kd: list(ids) for kd, ids in rounded.long_tasks.items()}
    alvo = [[0] * instance.t_count for _ in range(instance.machines)]

    for k, config in enumerate(solucao.schedule):
        for kd, quantidade in zip(solucao.kinds, config.counts):
            if kd.container:
                alvo[k][kd.type_id] += quantidade
                continue
            for _ in range(quantidade):
                atribuicao[fila_longas[kd].pop(0)] = k
        for t in config.restored:
            alvo[k][t] += 1

    limiar = params.long_threshold
    for t in range(instance.t_count):
        pendentes = list(rounded.short_tasks[t])
        for k in range(instance.machines):
            meta = alvo[k][t] * limiar
            carga = 0
            while pendentes and carga < meta:
                i = pendentes.pop(0)
                atribuicao[i] = k
                carga += instance.tasks[i].size
    return Allocation(tuple(atribuicao))


def _denominador_comum(alfa: list[list[Fraction]]) -> int:
    return reduce(math.lcm, (v.denominator for linha in alfa for v in linha), 1)


def ptas_optimize(
    instance: Instance,
    k: int,
    max_classes: int = MAX_CLASSES_PADRAO,
    max_states: int = MAX_ESTADOS_PADRAO,
) -> Allocation:
    """Busca binária sobre ``C`` com o PTAS como oráculo de decisão.

    Custos são múltiplos de ``1/D``, com ``D`` o MMC dos denominadores de
    α. A busca percorre ``C = N/D`` com ``N`` inteiro entre
    ``ceil(D·max p_i·α_ii)`` e ``D·W·α_max``; uma sondagem inviável prova
    ``OPT > C`` e, portanto, ``OPT >= C + 1/D``, o que garante custo final
    no máximo ``(1 + 1/k)·OPT``.
    """
    alfa = alpha_fractions(instance)
    D = _denominador_comum(alfa)
    baixo = math.ceil(max(t.size * alfa[t.type_id][t.type_id] for t in instance.tasks) * D)
    alfa_max = max(max(linha) for linha in alfa)
    alto = max(baixo, math.ceil(int(instance.sizes.sum()) * alfa_max * D))

    def sondar(n_alvo: int) -> Optional[Allocation]:
        params = PtasParams.for_instance(instance, Fraction(n_alvo, D), k)
        return ptas_feasible(instance, params, max_classes, max_states)

    melhor = sondar(alto)
    if melhor is None:
        raise PtasGuardError(
            "upper-bound", "PTAS não encontrou alocação no limite superior de custo",
            {"upper": alto, "denominator": D},
        )
    while baixo < alto:
        meio = (baixo + alto) // 2
        tentativa = sondar(meio)
        if tentativa is not None:
            alto, melhor = meio, tentativa
        else:
            baixo = meio + 1
    logger.debug("PTAS k=%d: custo alvo %s", k, Fraction(alto, D))
    return melhor
