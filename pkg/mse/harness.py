# -*- coding: utf-8 -*-
"""
Harness de experimentos: roda os algoritmos de cada cenário sobre uma
grade de instâncias, normaliza pelo limitante inferior e agrega as
estatísticas de boxplot.

Fluxo:
    1. :func:`build_work` materializa as instâncias (grade ou arquivos).
    2. :func:`run_experiment` avalia cada instância, em paralelo se
       ``jobs > 1``, e ordena as linhas por ``(cell_id, seed, algorithm)``.
    3. :func:`aggregate` calcula mediana e percentis por grupo.
    4. :func:`emit` grava o CSV de resultados, o JSON de estatísticas e,
       opcionalmente, o CSV de tempos.

O CSV de resultados não contém tempos de execução, então duas execuções
com a mesma semente geram arquivos idênticos qualquer que seja ``jobs``.

Exceções:
    MseConfigError -- Arquivo de execução inválido ou referências ausentes.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np
import pandas as pd

from .algorithms import PADRAO_PTAS, REGISTRO, AlgorithmError, run_algorithm
from .bounds import BoundReport, compute_bounds
from .configuracao import MseConfig, MseConfigError
from .core import Instance, load_instance
from .instances import (
    CENARIOS,
    GridSpec,
    GridSpecError,
    experiment_grid,
    ingest_trace,
    materialize,
    normalize_records,
    reference_grids,
    synthetic_pool,
    typed_pool,
)
from .ptas import PtasGuardError

logger = logging.getLogger(__name__)


# Constantes
ALGORITMOS_POR_CENARIO: dict[str, tuple[str, ...]] = {
    "compatible": ("fill", "mix", "jux", "best"),
    "incompatible": ("fill", "mix", "g2", "ded"),
    "clashing": ("fill", "ded"),
    "mixed": ("fill", "mix", "g2", "ded-jux", "ded-mix", "ded-best"),
}
# campos declarados de ResultRow primeiro (sem wall_time); colunas extras no fim
COLUNAS_RESULTADO: tuple[str, ...] = (
    "cell_id", "seed", "scenario", "T", "n", "m", "algorithm", "max_cost", "lower_bound",
    "bound_source", "normalized_cost", "lp_failed", "size_class", "status", "detail",
)
COLUNAS_TEMPO: tuple[str, ...] = ("cell_id", "seed", "algorithm", "wall_time")
CAMPOS_ESTATISTICA: tuple[str, ...] = (
    "scenario", "size_class", "algorithm", "m", "count", "median",
    "p25", "p75", "p5", "p95", "outliers", "lp_failed",
)
TOLERANCIA_INVARIANTE: float = 1e-6


# ========== CONFIGURAÇÃO DA EXECUÇÃO ==========

def _inteiro(chave: str, valor: Any) -> int:
    if isinstance(valor, bool) or (isinstance(valor, float) and not valor.is_integer()):
        raise MseConfigError(f"'{chave}' deve ser inteiro, recebido {valor!r}")
    try:
        return int(valor)
    except (TypeError, ValueError) as exc:
        raise MseConfigError(f"'{chave}' deve ser inteiro, recebido {valor!r}") from exc


def _lista(documento: dict[str, Any], chave: str, tipo: type) -> list[Any]:
    valor = documento.get(chave, [])
    if not isinstance(valor, list) or not all(isinstance(v, tipo) for v in valor):
        esperado = "objetos" if tipo is dict else "textos"
        raise MseConfigError(f"'{chave}' deve ser uma lista de {esperado}")
    return valor


@dataclass
class RunConfig:
    """Parâmetros de uma execução do harness.

    Attributes:
        grids:          Grades a materializar (vazio se ``instance_files``).
        instance_files: Arquivos JSON de instância.
        algorithms:     Nomes explícitos; ``None`` usa o conjunto do cenário.
        settings:       :class:`MseConfig` efetivo (semente, jobs, limites).
        pool_size:      Registros do pool sintético.
        trace:          CSV ``cpu,memory``; substitui o pool sintético.
        by_machines:    Agrega também por número de máquinas.
    """

    grids: list[GridSpec] = field(default_factory=list)
    instance_files: list[Path] = field(default_factory=list)
    algorithms: Optional[list[str]] = None
    settings: MseConfig = field(default_factory=MseConfig)
    pool_size: int = 10_000
    trace: Optional[Path] = None
    by_machines: bool = False

    def validar(self) -> list[str]:
        problemas: list[str] = []
        if not self.grids and not self.instance_files:
            problemas.append("informe 'grids' ou 'instances'")
        if self.algorithms is not None and not self.algorithms:
            problemas.append("'algorithms' não pode ser lista vazia")
        desconhecidos = [
            a for a in self.algorithms or []
            if a not in REGISTRO and a != "exact" and not PADRAO_PTAS.match(a)
        ]
        if desconhecidos:
            problemas.append(f"algoritmos desconhecidos: {', '.join(desconhecidos)}")
        faltando = [str(p) for p in self.instance_files if not p.exists()]
        if faltando:
            problemas.append(f"arquivos de instância inexistentes: {', '.join(faltando)}")
        if self.trace is not None and not self.trace.exists():
            problemas.append(f"trace inexistente: {self.trace}")
        if self.pool_size < 1:
            problemas.append("'pool_size' deve ser >= 1")
        problemas.extend(f"configuração inválida: {nome}" for nome in self.settings.validar())
        return problemas

    @classmethod
    def from_file(cls, path: Path, settings: Optional[MseConfig] = None) -> "RunConfig":
        """Lê o JSON de execução; caminhos relativos partem da pasta do arquivo.

        Raises:
            MseConfigError: JSON inválido, campos desconhecidos ou referências ausentes.
        """
        caminho = Path(path)
        if not caminho.exists():
            raise MseConfigError(f"Arquivo de execução não encontrado: {caminho}")
        try:
            documento = json.loads(caminho.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise MseConfigError(f"{caminho.name}: JSON inválido ({exc})") from exc
        return cls.from_dict(documento, caminho.parent, settings)

    @classmethod
    def from_dict(
        cls, documento: dict[str, Any], base: Path = Path("."), settings: Optional[MseConfig] = None
    ) -> "RunConfig":
        if not isinstance(documento, dict):
            raise MseConfigError("O arquivo de execução deve conter um objeto JSON")
        conhecidos = {
            "grids", "grid", "instances", "algorithms", "seed", "jobs", "oracle_limit",
            "pool_size", "trace", "by_machines", "ptas_max_classes", "ptas_max_states",
        }
        desconhecidos = sorted(set(documento) - conhecidos)
        if desconhecidos:
            raise MseConfigError(f"Campos desconhecidos no arquivo de execução: {', '.join(desconhecidos)}")

        efetivo = replace(settings or MseConfig())
        for chave in ("seed", "jobs", "oracle_limit", "ptas_max_classes", "ptas_max_states"):
            if chave in documento:
                setattr(efetivo, chave, _inteiro(chave, documento[chave]))

        grades: list[GridSpec] = []
        try:
            if documento.get("grid") in ("reference", "reference-small", "reference-large"):
                pequena, grande = reference_grids(seed=efetivo.seed)
                grades = {"reference": [pequena, grande], "reference-small": [pequena], "reference-large": [grande]}[
                    documento["grid"]
                ]
            elif "grid" in documento:
                raise MseConfigError(f"Grade nomeada desconhecida: {documento['grid']!r}")
            grades += [
                GridSpec.from_dict({**g, "seed": g.get("seed", efetivo.seed)})
                for g in _lista(documento, "grids", dict)
            ]
        except GridSpecError as exc:
            raise MseConfigError(f"Grade inválida: {exc}") from exc

        trace = documento.get("trace")
        if trace is not None and not isinstance(trace, str):
            raise MseConfigError("'trace' deve ser o caminho de um CSV")

        config = cls(
            grids=grades,
            instance_files=[base / p for p in _lista(documento, "instances", str)],
            algorithms=_lista(documento, "algorithms", str) if documento.get("algorithms") is not None else None,
            settings=efetivo,
            pool_size=_inteiro("pool_size", documento.get("pool_size", 10_000)),
            trace=base / trace if trace else None,
            by_machines=bool(documento.get("by_machines", False)),
        )
        problemas = config.validar()
        if problemas:
            raise MseConfigError("Arquivo de execução inválido: " + "; ".join(problemas))
        return config


# ========== LINHAS DE RESULTADO ==========

@dataclass(frozen=True)
class ResultRow:
    cell_id: str
    seed: int
    size_class: str
    scenario: str
    T: int
    n: int
    m: int
    algorithm: str
    status: str = "ok"
    max_cost: Optional[float] = None
    lower_bound: Optional[float] = None
    bound_source: str = ""
    normalized_cost: Optional[float] = None
    lp_failed: bool = False
    detail: str = ""
    wall_time: float = 0.0


def normalize(row: ResultRow, bounds: BoundReport) -> ResultRow:
    """Divide o custo pelo limitante escolhido e registra a origem do limitante."""
    normalizado = None
    if row.max_cost is not None and bounds.chosen > 0:
        normalizado = float(row.max_cost) / float(bounds.chosen)
    return replace(
        row,
        lower_bound=float(bounds.chosen),
        bound_source=bounds.source,
        normalized_cost=normalizado,
        lp_failed=bounds.lp_failed,
    )


def algorithms_for(scenario: str, n: int, m: int, settings: MseConfig) -> list[str]:
    """Algoritmos do cenário, mais o exato quando a instância cabe no oráculo."""
    nomes = list(ALGORITMOS_POR_CENARIO.get(scenario, ()))
    if n <= settings.oracle_limit and m <= settings.oracle_max_machines:
        nomes.append("exact")
    return nomes


@dataclass(frozen=True)
class WorkItem:
    instance: Instance
    metadata: dict[str, Any]
    algorithms: tuple[str, ...]
    settings: MseConfig


def evaluate(item: WorkItem) -> list[ResultRow]:
    """Roda os algoritmos sobre uma instância; pré-condições violadas viram linhas ``skipped``."""
    meta = item.metadata
    instancia = item.instance
    limites = compute_bounds(instancia, item.settings.lp_max_iter)
    linhas: list[ResultRow] = []
    for nome in item.algorithms:
        base = ResultRow(
            cell_id=str(meta["cell_id"]),
            seed=int(meta["seed"]),
            size_class=str(meta.get("size_class", "")),
            scenario=str(meta.get("scenario", "custom")),
            T=instancia.t_count,
            n=instancia.n,
            m=instancia.machines,
            algorithm=nome,
        )
        try:
            resultado = run_algorithm(nome, instancia, item.settings)
        except (AlgorithmError, PtasGuardError) as exc:
            logger.warning("%s / %s ignorado: %s", base.cell_id, nome, exc)
            linhas.append(normalize(replace(base, status="skipped", detail=str(exc)), limites))
            continue
        linhas.append(normalize(
            replace(base, max_cost=float(resultado.max_cost), wall_time=resultado.wall_time),
            limites,
        ))
    logger.debug("%s (seed %s): %d linhas", meta["cell_id"], meta["seed"], len(linhas))
    return linhas


# ========== EXECUÇÃO ==========

def _pools(config: RunConfig, t_values: set[int]) -> dict[int, list]:
    if config.trace is not None:
        registros = ingest_trace(config.trace)
    else:
        registros = normalize_records(synthetic_pool(config.pool_size, config.settings.seed))
    return {t: typed_pool(registros, t, config.settings.log_base) for t in sorted(t_values)}


def build_work(config: RunConfig) -> list[WorkItem]:
    """Materializa todas as instâncias da execução, na ordem da grade."""
    itens: list[WorkItem] = []
    descritores = [d for grade in config.grids for d in experiment_grid(grade)]
    if descritores:
        pools = _pools(config, {d.t_count for d in descritores})
        for d in descritores:
            instancia, meta = materialize(d, pools[d.t_count])
            meta["size_class"] = d.size_class
            nomes = config.algorithms or algorithms_for(d.scenario, d.n, d.m, config.settings)
            itens.append(WorkItem(instancia, meta, tuple(nomes), config.settings))

    for caminho in config.instance_files:
        instancia, metadata = load_instance(caminho)
        meta = {"cell_id": caminho.stem, "seed": 0, "scenario": "custom", "size_class": "file"}
        meta.update(metadata or {})
        cenario = str(meta["scenario"])
        nomes = config.algorithms or algorithms_for(cenario, instancia.n, instancia.machines, config.settings)
        if not nomes:
            raise MseConfigError(
                f"{caminho.name}: cenário {cenario!r} sem algoritmos padrão; informe 'algorithms'"
            )
        itens.append(WorkItem(instancia, meta, tuple(nomes), config.settings))
    return itens


def run_experiment(
    config: RunConfig,
    on_instance_done: Optional[Callable[[int], None]] = None,
    work: Optional[Sequence[WorkItem]] = None,
) -> list[ResultRow]:
    """Avalia todas as instâncias e devolve as linhas ordenadas.

    Com ``jobs > 1`` as instâncias são distribuídas num
    ``ProcessPoolExecutor``; o resultado é o mesmo da execução sequencial.
    """
    itens = list(work) if work is not None else build_work(config)
    jobs = config.settings.jobs
    linhas: list[ResultRow] = []
    if jobs <= 1 or len(itens) <= 1:
        for item in itens:
            linhas.extend(evaluate(item))
            if on_instance_done:
                on_instance_done(1)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            for parciais in executor.map(evaluate, itens, chunksize=max(1, len(itens) // (jobs * 8))):
                linhas.extend(parciais)
                if on_instance_done:
                    on_instance_done(1)
    linhas.sort(key=lambda r: (r.cell_id, r.seed, r.algorithm))
    return linhas


def find_violations(rows: Sequence[ResultRow]) -> list[ResultRow]:
    """Linhas ``ok`` com custo normalizado abaixo de 1 (limitante ou algoritmo com defeito)."""
    return [
        r for r in rows
        if r.status == "ok" and r.normalized_cost is not None
        and r.normalized_cost < 1 - TOLERANCIA_INVARIANTE
    ]


# ========== AGREGAÇÃO ==========

@dataclass(frozen=True)
class GroupStats:
    scenario: str
    size_class: str
    algorithm: str
    m: Optional[int]
    count: int
    median: float
    p25: float
    p75: float
    p5: float
    p95: float
    outliers: int
    lp_failed: int


@dataclass
class SummaryStats:
    groups: list[GroupStats]
    by_machines: bool = False

    def to_dict(self) -> dict[str, Any]:
        grupos = []
        for g in self.groups:
            item = asdict(g)
            for chave in ("median", "p25", "p75", "p5", "p95"):
                item[chave] = float(f"{item[chave]:.6f}")
            if not self.by_machines:
                item.pop("m")
            grupos.append(item)
        return {"by_machines": self.by_machines, "groups": grupos}


def aggregate(rows: Sequence[ResultRow], by_machines: bool = False) -> SummaryStats:
    """Mediana, quartis e percentis 5/95 (interpolação linear) por grupo.

    Grupos por ``(scenario, size_class, algorithm)`` e, com
    ``by_machines``, também por ``m``. Só entram linhas ``ok``; pontos
    fora de ``[p5, p95]`` contam como outliers.
    """
    validas = [r for r in rows if r.status == "ok" and r.normalized_cost is not None]
    if not validas:
        return SummaryStats([], by_machines)
    tabela = pd.DataFrame([asdict(r) for r in validas])
    chaves = ["scenario", "size_class", "algorithm"] + (["m"] if by_machines else [])
    grupos: list[GroupStats] = []
    for chave, grupo in tabela.groupby(chaves, sort=True):
        valores = grupo["normalized_cost"].to_numpy(dtype=float)
        p5, p25, mediana, p75, p95 = np.percentile(valores, [5, 25, 50, 75, 95])
        grupos.append(GroupStats(
            scenario=chave[0],
            size_class=chave[1],
            algorithm=chave[2],
            m=int(chave[3]) if by_machines else None,
            count=int(valores.size),
            median=float(mediana),
            p25=float(p25),
            p75=float(p75),
            p5=float(p5),
            p95=float(p95),
            outliers=int(np.sum((valores < p5) | (valores > p95))),
            lp_failed=int(grupo["lp_failed"].sum()),
        ))
    return SummaryStats(grupos, by_machines)


def validate_stats(document: Any) -> list[str]:
    """Confere o JSON de estatísticas; lista vazia quando está correto."""
    problemas: list[str] = []
    if not isinstance(document, dict) or "groups" not in document or "by_machines" not in document:
        return ["documento deve ter 'by_machines' e 'groups'"]
    if not isinstance(document["groups"], list):
        return ["'groups' deve ser lista"]
    esperados = set(CAMPOS_ESTATISTICA)
    if not document["by_machines"]:
        esperados.discard("m")
    for i, grupo in enumerate(document["groups"]):
        if not isinstance(grupo, dict):
            problemas.append(f"grupo {i}: objeto esperado")
            continue
        diferenca = esperados.symmetric_difference(grupo)
        if diferenca:
            problemas.append(f"grupo {i}: campos divergentes: {', '.join(sorted(diferenca))}")
            continue
        if grupo["scenario"] not in CENARIOS and grupo["scenario"] != "custom":
            problemas.append(f"grupo {i}: cenário desconhecido {grupo['scenario']!r}")
        if not isinstance(grupo["count"], int) or grupo["count"] < 1:
            problemas.append(f"grupo {i}: 'count' deve ser inteiro >= 1")
        ordem = [grupo[c] for c in ("p5", "p25", "median", "p75", "p95")]
        if any(not isinstance(v, (int, float)) for v in ordem):
            problemas.append(f"grupo {i}: percentis devem ser numéricos")
        elif any(a > b for a, b in zip(ordem, ordem[1:])):
            problemas.append(f"grupo {i}: percentis fora de ordem")
    return problemas


# ========== SAÍDA ==========

def emit(
    rows: Sequence[ResultRow],
    stats: SummaryStats,
    results_path: Path,
    stats_path: Optional[Path] = None,
    timings_path: Optional[Path] = None,
) -> None:
    """Grava CSV de resultados, JSON de estatísticas e CSV de tempos.

    Colunas em ordem fixa e números com 6 casas decimais.
    """
    registros = [asdict(r) for r in rows]
    tabela = pd.DataFrame(registros, columns=list(COLUNAS_RESULTADO) + ["wall_time"])
    for coluna in ("max_cost", "lower_bound", "normalized_cost"):
        tabela[coluna] = tabela[coluna].astype(float)
    tabela[list(COLUNAS_RESULTADO)].to_csv(
        results_path, index=False, float_format="%.6f", lineterminator="\n"
    )
    if stats_path is not None:
        Path(stats_path).write_text(json.dumps(stats.to_dict(), indent=2) + "\n", encoding="utf-8")
    if timings_path is not None:
        tabela[list(COLUNAS_TEMPO)].to_csv(
            timings_path, index=False, float_format="%.6f", lineterminator="\n"
        )
