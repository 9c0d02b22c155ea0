# -*- coding: utf-8 -*-
"""
Geração de instâncias para os experimentos.

Pipeline: registros de uso (CPU, memória) → normalização e filtro → tipo
pela razão CPU/memória → carga inteira → amostragem de ``n`` tarefas com
reparo de tipos ausentes. Inclui as matrizes α de cada cenário, a grade
de experimentos e as famílias de instâncias difíceis (partição e
partição em cliques).

O trace real não acompanha o repositório: :func:`synthetic_pool` gera um
conjunto sintético calibrado para proporções de tipos semelhantes.

Uso rápido::

    from mse.instances import synthetic_pool, normalize_records, typed_pool, sample_instance

    registros = normalize_records(synthetic_pool(10_000, seed=2017))
    pool = typed_pool(registros, 2)

Exceções:
    TraceParseError -- Linha malformada no CSV (com número da linha).
    SamplingError   -- Pool sem tarefas de um tipo necessário, ou n < T.
    PresetError     -- Combinação de T e cenário sem matriz definida.
    GridSpecError   -- Especificação de grade inválida.
"""

from __future__ import annotations

import logging
import re
import zlib
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Any, Iterable, Sequence, TextIO, Union

import numpy as np
import pandas as pd

from .configuracao import MseError
from .core import AlphaMatrix, Instance

logger = logging.getLogger(__name__)


# ========== EXCEÇÕES CUSTOMIZADAS ==========

class TraceParseError(MseError):
    """Linha do trace que não pôde ser interpretada."""

    def __init__(self, row: int, message: str) -> None:
        super().__init__(f"Linha {row}: {message}")
        self.row = row


class SamplingError(MseError):
    pass


class PresetError(MseError):
    pass


class GridSpecError(MseError):
    pass


# Constantes
LIMIAR_FILTRO: float = 0.005
LIMIARES_LOG: dict[int, tuple[float, ...]] = {
    1: (),
    2: (0.0,),
    3: (-0.66, 0.66),
    4: (-0.66, 0.0, 0.66),
}
CENARIOS: tuple[str, ...] = ("compatible", "mixed", "incompatible", "clashing")
CENARIOS_DEDICADOS: tuple[str, ...] = ("incompatible", "clashing")


# ========== REGISTROS ==========

@dataclass(frozen=True)
class TraceRecord:
    """Uso médio de CPU e memória de uma tarefa (normalizado ou bruto)."""

    cpu: float
    memory: float


@dataclass(frozen=True)
class TypedRecord:
    load: int
    type_id: int


def _ler_csv(source: Union[TextIO, Path, str]) -> pd.DataFrame:
    try:
        bruto = pd.read_csv(source, header=None, dtype=str, skip_blank_lines=True, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=["cpu", "memory"])
    except pd.errors.ParserError as exc:
        encontrado = re.search(r"line (\d+)", str(exc))
        linha = int(encontrado.group(1)) if encontrado else 0
        raise TraceParseError(linha, "número de colunas diferente de 2 (cpu, memory)") from exc
    if bruto.shape[1] != 2:
        raise TraceParseError(1, f"esperadas 2 colunas (cpu, memory), encontradas {bruto.shape[1]}")
    bruto.columns = ["cpu", "memory"]
    return bruto


def ingest_trace(source: Union[TextIO, Path, str]) -> list[TraceRecord]:
    """Lê um CSV ``cpu,memory`` (cabeçalho opcional), normaliza e filtra.

    Raises:
        TraceParseError: Linha não numérica, negativa ou com colunas faltando.
    """
    bruto = _ler_csv(source)
    deslocamento = 1
    if len(bruto) and str(bruto.iloc[0]["cpu"]).strip().lower() == "cpu":
        bruto = bruto.iloc[1:]
        deslocamento = 2

    registros: list[TraceRecord] = []
    for posicao, (cpu, memoria) in enumerate(zip(bruto["cpu"], bruto["memory"])):
        linha = posicao + deslocamento
        valores = pd.to_numeric(pd.Series([cpu, memoria]), errors="coerce")
        if valores.isna().any():
            raise TraceParseError(linha, f"valores não numéricos: {cpu!r}, {memoria!r}")
        if not np.all(np.isfinite(valores)) or (valores < 0).any():
            raise TraceParseError(linha, "valores devem ser finitos e não negativos")
        registros.append(TraceRecord(float(valores[0]), float(valores[1])))
    return normalize_records(registros)


def normalize_records(records: Sequence[TraceRecord]) -> list[TraceRecord]:
    """Divide CPU e memória pelos respectivos máximos e descarta registros ínfimos.

    Sai todo registro com CPU e memória normalizadas abaixo de 0,005.
    """
    if not records:
        return []
    tabela = np.array([(r.cpu, r.memory) for r in records], dtype=float)
    maximos = tabela.max(axis=0)
    maximos[maximos == 0] = 1.0
    normalizada = tabela / maximos
    manter = ~np.all(normalizada < LIMIAR_FILTRO, axis=1)
    descartados = int((~manter).sum())
    logger.debug("Normalização: %d de %d registros descartados", descartados, len(records))
    return [TraceRecord(float(c), float(m)) for c, m in normalizada[manter]]


def quantize_load(record: TraceRecord) -> int:
    """``round(100·max(cpu, memória))`` com arredondamento half-up, mínimo 1."""
    maior = Decimal(repr(max(record.cpu, record.memory)))
    carga = int((maior * 100).quantize(Decimal(1), rounding=ROUND_HALF_UP))
    return max(1, carga)


def assign_types(
    records: Sequence[TraceRecord], t_count: int, log_base: float = 10.0
) -> list[TypedRecord]:
    """Tipifica pela razão ``ρ = cpu/memória``.

    ``log ρ`` é comparado aos limiares de ``T`` (``<=`` fica no tipo de
    baixo): T=2 em 0; T=3 em ±0,66; T=4 em -0,66, 0 e 0,66. Memória zero
    vale ``ρ = +inf`` (tipo mais intensivo em CPU).
    """
    if t_count not in LIMIARES_LOG:
        raise PresetError(f"T deve estar em {sorted(LIMIARES_LOG)}, recebido {t_count}")
    if not records:
        return []
    cpu = np.array([r.cpu for r in records], dtype=float)
    memoria = np.array([r.memory for r in records], dtype=float)
    # memória zero dá +inf e CPU zero dá -inf
    with np.errstate(divide="ignore", invalid="ignore"):
        log_rho = (np.log(cpu) - np.log(memoria)) / np.log(log_base)
    tipos = np.searchsorted(np.array(LIMIARES_LOG[t_count]), log_rho, side="left")
    return [TypedRecord(quantize_load(r), int(t)) for r, t in zip(records, tipos)]


def typed_pool(records: Sequence[TraceRecord], t_count: int, log_base: float = 10.0) -> list[TypedRecord]:
    """Atalho para :func:`assign_types` sobre registros já normalizados."""
    return assign_types(records, t_count, log_base)


def synthetic_pool(size: int = 10_000, seed: int = 2017) -> list[TraceRecord]:
    """Registros sintéticos (não vêm de trace real).

    Magnitude log-uniforme em ``[10^-4.2, 1]`` (cerca de 45% cai no filtro
    de 0,005) e ``log10 ρ ~ Normal(0, 0.53)`` (tipos extremos de T=3 com
    cerca de 10% cada).
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, zlib.crc32(b"synthetic-pool")]))
    magnitude = 10.0 ** rng.uniform(-4.2, 0.0, size)
    log_rho = rng.normal(0.0, 0.53, size)
    rho = 10.0 ** log_rho
    cpu = np.where(rho >= 1, magnitude, magnitude * rho)
    memoria = np.where(rho >= 1, magnitude / rho, magnitude)
    logger.info("Pool sintético: %d registros (semente %d)", size, seed)
    return [TraceRecord(float(c), float(m)) for c, m in zip(cpu, memoria)]


# ========== MATRIZES DE CENÁRIO ==========

@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    matrices: dict[int, tuple[tuple[float, ...], ...]]


PRESETS: dict[str, ScenarioPreset] = {
    "compatible": ScenarioPreset("compatible", {
        2: ((1, 0.5), (0.5, 1)),
        3: ((1, 0.5, 0.25), (0.5, 1, 0.5), (0.25, 0.5, 1)),
        4: ((1, 0.75, 0.5, 0.25), (0.75, 1, 0.75, 0.5), (0.5, 0.75, 1, 0.75), (0.25, 0.5, 0.75, 1)),
    }),
    "mixed": ScenarioPreset("mixed", {
        3: ((1, 0.5, 1.5), (0.5, 1, 1.5), (1.5, 1.5, 1)),
        4: ((1, 0.5, 1.5, 2), (0.5, 1, 1.5, 2), (1.5, 1.5, 1, 0.5), (2, 2, 0.5, 1)),
    }),
    "incompatible": ScenarioPreset("incompatible", {
        2: ((1, 1.5), (1.5, 1)),
        3: ((1, 1.3, 1.6), (1.3, 1, 1.3), (1.6, 1.3, 1)),
        4: ((1, 1.25, 1.5, 1.75), (1.25, 1, 1.25, 1.5), (1.5, 1.25, 1, 1.25), (1.75, 1.5, 1.25, 1)),
    }),
    "clashing": ScenarioPreset("clashing", {
        2: ((1, 2), (2, 1)),
        3: ((1, 2, 3), (2, 1, 2), (3, 2, 1)),
        4: ((1, 2, 3, 4), (2, 1, 2, 3), (3, 2, 1, 2), (4, 3, 2, 1)),
    }),
}


def coefficient_preset(t_count: int, scenario: str) -> AlphaMatrix:
    """Matriz α do cenário para ``T`` tipos.

    Raises:
        PresetError: Cenário desconhecido, ``T`` fora de {2,3,4} ou ``mixed`` com ``T=2``.
    """
    if scenario not in PRESETS:
        raise PresetError(f"Cenário desconhecido: {scenario!r}. Opções: {', '.join(CENARIOS)}")
    matrizes = PRESETS[scenario].matrices
    if t_count not in matrizes:
        raise PresetError(f"Cenário {scenario!r} não tem matriz para T={t_count}")
    return AlphaMatrix.from_rows(matrizes[t_count])


# ========== AMOSTRAGEM ==========

def sample_instance(
    pool: Sequence[TypedRecord],
    n: int,
    t_count: int,
    machines: int,
    alpha: AlphaMatrix,
    rng: np.random.Generator,
) -> Instance:
    """Sorteia ``n`` tarefas do pool e repara tipos ausentes.

    Sem reposição (com reposição se o pool tiver menos de ``n``
    registros). Enquanto faltar um tipo, sai a última tarefa sorteada do
    tipo mais comum e entra um sorteio uniforme entre as tarefas do pool
    do tipo ausente.

    Raises:
        SamplingError: Pool vazio, ``n < T`` ou pool sem tarefas de um tipo.
    """
    if not pool:
        raise SamplingError("Pool de tarefas vazio")
    if n < t_count:
        raise SamplingError(f"n={n} menor que T={t_count}: impossível cobrir todos os tipos")
    tipos_pool = np.array([r.type_id for r in pool], dtype=np.int64)
    escolhidos = [int(i) for i in rng.choice(len(pool), size=n, replace=len(pool) < n)]

    while True:
        contagem = np.bincount(tipos_pool[escolhidos], minlength=t_count)
        ausentes = [t for t in range(t_count) if contagem[t] == 0]
        if not ausentes:
            break
        ausente = ausentes[0]
        candidatos = np.flatnonzero(tipos_pool == ausente)
        if candidatos.size == 0:
            raise SamplingError(f"Pool sem tarefas do tipo {ausente}")
        mais_comum = int(np.argmax(contagem))
        posicao = max(p for p, i in enumerate(escolhidos) if tipos_pool[i] == mais_comum)
        escolhidos.pop(posicao)
        escolhidos.append(int(rng.choice(candidatos)))

    return Instance.from_sizes(
        [pool[i].load for i in escolhidos],
        [pool[i].type_id for i in escolhidos],
        alpha,
        machines,
    )


# ========== GRADE DE EXPERIMENTOS ==========

@dataclass(frozen=True)
class GridSpec:
    size_class: str
    n_values: tuple[int, ...]
    m_values: tuple[int, ...]
    t_values: tuple[int, ...] = (2, 3, 4)
    scenarios: tuple[str, ...] = CENARIOS
    repetitions: int = 30
    seed: int = 2017

    def __post_init__(self) -> None:
        problemas: list[str] = []
        if not self.n_values or any(n < 1 for n in self.n_values):
            problemas.append("n deve ser lista não vazia de inteiros >= 1")
        if not self.m_values or any(m < 1 for m in self.m_values):
            problemas.append("m deve ser lista não vazia de inteiros >= 1")
        if not self.t_values or any(t not in (2, 3, 4) for t in self.t_values):
            problemas.append("T deve conter apenas 2, 3 ou 4")
        desconhecidos = [s for s in self.scenarios if s not in CENARIOS]
        if desconhecidos:
            problemas.append(f"cenários desconhecidos: {', '.join(desconhecidos)}")
        if self.repetitions < 1:
            problemas.append("repetitions deve ser >= 1")
        if problemas:
            raise GridSpecError("; ".join(problemas))

    @classmethod
    def from_dict(cls, documento: dict[str, Any]) -> "GridSpec":
        if not isinstance(documento, dict):
            raise GridSpecError("A grade deve ser um objeto JSON")
        conhecidos = {"size_class", "n", "m", "T", "scenarios", "repetitions", "seed"}
        desconhecidos = sorted(set(documento) - conhecidos)
        if desconhecidos:
            raise GridSpecError(f"Campos desconhecidos na grade: {', '.join(desconhecidos)}")
        try:
            return cls(
                size_class=str(documento.get("size_class", "custom")),
                n_values=tuple(int(v) for v in documento["n"]),
                m_values=tuple(int(v) for v in documento["m"]),
                t_values=tuple(int(v) for v in documento.get("T", (2, 3, 4))),
                scenarios=tuple(documento.get("scenarios", CENARIOS)),
                repetitions=int(documento.get("repetitions", 30)),
                seed=int(documento.get("seed", 2017)),
            )
        except KeyError as exc:
            raise GridSpecError(f"Campo obrigatório ausente na grade: {exc.args[0]}") from exc
        except (TypeError, ValueError) as exc:
            raise GridSpecError(f"Valor inválido na grade: {exc}") from exc

    def to_dict(self) -> dict[str, Any]:
        return {
            "size_class": self.size_class,
            "n": list(self.n_values),
            "m": list(self.m_values),
            "T": list(self.t_values),
            "scenarios": list(self.scenarios),
            "repetitions": self.repetitions,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class InstanceDescriptor:
    """Identifica uma instância da grade; ``seed`` alimenta o gerador."""

    cell_id: str
    size_class: str
    scenario: str
    t_count: int
    n: int
    m: int
    repetition: int
    seed: int

    def metadata(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "T": self.t_count,
            "n": self.n,
            "m": self.m,
            "seed": self.seed,
            "cell_id": self.cell_id,
        }


def cell_feasible(scenario: str, t_count: int, m: int) -> bool:
    """Descarta ``T > m`` em incompatible/clashing e ``T < 3`` em mixed."""
    if scenario in CENARIOS_DEDICADOS and t_count > m:
        return False
    if scenario == "mixed" and t_count < 3:
        return False
    return True


def _semente_da_instancia(master: int, cell_id: str, repeticao: int) -> int:
    sequencia = np.random.SeedSequence([master, zlib.crc32(cell_id.encode("utf-8")), repeticao])
    return int(sequencia.generate_state(1)[0])


def experiment_grid(spec: GridSpec) -> list[InstanceDescriptor]:
    """Produto cartesiano da grade menos as combinações inviáveis, ``repetitions`` por célula."""
    descritores: list[InstanceDescriptor] = []
    for scenario in spec.scenarios:
        for t_count in spec.t_values:
            for n in spec.n_values:
                for m in spec.m_values:
                    if not cell_feasible(scenario, t_count, m):
                        continue
                    cell_id = f"{spec.size_class}-{scenario}-T{t_count}-n{n}-m{m}"
                    for rep in range(spec.repetitions):
                        descritores.append(InstanceDescriptor(
                            cell_id=cell_id,
                            size_class=spec.size_class,
                            scenario=scenario,
                            t_count=t_count,
                            n=n,
                            m=m,
                            repetition=rep,
                            seed=_semente_da_instancia(spec.seed, cell_id, rep),
                        ))
    return descritores


def reference_grids(seed: int = 2017, repetitions: int = 30) -> tuple[GridSpec, GridSpec]:
    """Grades pequena e grande dos experimentos (6390 instâncias com 30 repetições)."""
    pequena = GridSpec("small", (10, 20, 50), (2, 3, 5, 10), repetitions=repetitions, seed=seed)
    grande = GridSpec("large", (200, 500, 1000), (20, 50, 100), repetitions=repetitions, seed=seed)
    return pequena, grande


def materialize(
    descriptor: InstanceDescriptor, pool: Sequence[TypedRecord]
) -> tuple[Instance, dict[str, Any]]:
    """Gera a instância do descritor a partir do pool tipificado com ``T`` tipos."""
    rng = np.random.default_rng(descriptor.seed)
    alpha = coefficient_preset(descriptor.t_count, descriptor.scenario)
    instancia = sample_instance(pool, descriptor.n, descriptor.t_count, descriptor.m, alpha, rng)
    return instancia, descriptor.metadata()


# ========== FAMÍLIAS DIFÍCEIS ==========

def partition_hard_instance(values: Sequence[int]) -> Instance:
    """Redução de PARTIÇÃO: tarefas unitárias, um tipo por valor, linha ``i`` de α igual a ``a_i``.

    Em duas máquinas, o custo de qualquer tarefa é a soma dos valores da
    sua máquina; o ótimo vale ``Σa/2`` exatamente quando há partição perfeita.
    """
    if not values or any(int(v) < 1 for v in values):
        raise PresetError("Valores de partição devem ser inteiros positivos")
    n = len(values)
    alpha = AlphaMatrix.from_rows([[float(v)] * n for v in values])
    return Instance.from_sizes([1] * n, list(range(n)), alpha, 2)


def clique_partition_instance(
    vertices: int, edges: Iterable[tuple[int, int]], machines: int, r: float
) -> Instance:
    """Instância unitária da redução de partição em cliques.

    α vale 0 entre vértices adjacentes, ``r`` entre não adjacentes e 1 na
    diagonal. O ótimo é 1 se o grafo se divide em ``machines`` cliques;
    caso contrário é pelo menos ``r + 1``.
    """
    if vertices < 1:
        raise PresetError("O grafo precisa de ao menos um vértice")
    matriz = np.full((vertices, vertices), float(r))
    for u, v in edges:
        if not (0 <= u < vertices and 0 <= v < vertices) or u == v:
            raise PresetError(f"Aresta inválida: ({u}, {v})")
        matriz[u, v] = matriz[v, u] = 0.0
    np.fill_diagonal(matriz, 1.0)
    return Instance.from_sizes([1] * vertices, list(range(vertices)), AlphaMatrix(matriz), machines)
