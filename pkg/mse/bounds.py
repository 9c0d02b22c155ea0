# -*- coding: utf-8 -*-
"""
Limitantes inferiores do custo ótimo usados para normalizar resultados.

    - ``p_max``: custo próprio da maior tarefa;
    - ``W/m``: carga média, válida quando todo α >= 1;
    - PL fracionário para instâncias compatíveis (e sua variante por grupo
      de compatibilidade), resolvido pelo simplex denso deste módulo.

Uso rápido::

    from mse.bounds import compute_bounds

    relatorio = compute_bounds(instancia)
    relatorio.chosen, relatorio.source

Falha numérica do PL nunca vira exceção: o relatório marca ``lp_failed``
e o limitante escolhido cai para ``p_max``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .configuracao import MseError
from .core import Clustering, Instance, compatibility_clusters, instance_stats

logger = logging.getLogger(__name__)


# ========== EXCEÇÕES CUSTOMIZADAS ==========

class BoundNotApplicableError(MseError):
    """Limitante pedido para instância em que ele não é válido."""
    pass


# Constantes
TOLERANCIA_PIVO: float = 1e-9
TOLERANCIA_RESIDUO: float = 1e-9
MAX_ITERACOES_PADRAO: int = 5000


# ========== SIMPLEX ==========

@dataclass
class LpProblem:
    """PL em forma ``min c·x`` com ``A_ub x <= b_ub``, ``A_eq x = b_eq`` e ``0 <= x <= upper``.

    ``upper`` usa ``inf`` para variáveis sem limite superior; limites
    finitos viram linhas ``<=`` no tableau.
    """

    objective: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    upper: np.ndarray
    names: list[str] = field(default_factory=list)

    @property
    def n_vars(self) -> int:
        return int(self.objective.shape[0])


@dataclass
class LpSolution:
    status: str
    objective: Optional[float]
    x: Optional[np.ndarray]
    iterations: int

    @property
    def success(self) -> bool:
        return self.status == "optimal"


def _pivotar(tableau: np.ndarray, base: list[int], linha: int, coluna: int) -> None:
    pivo = tableau[linha] / tableau[linha, coluna]
    tableau -= np.outer(tableau[:, coluna], pivo)
    tableau[linha] = pivo
    base[linha] = coluna


def _iterar(
    tableau: np.ndarray, base: list[int], elegiveis: int, restantes: int
) -> tuple[str, int]:
    """Pivoteia pela regra de Bland até a otimalidade.

    Entra a menor coluna com custo reduzido negativo; sai, entre as razões
    mínimas, a linha cuja variável básica tem o menor índice.

    Returns:
        ``(status, iteracoes)`` com status ``optimal``, ``unbounded`` ou
        ``iteration-limit``.
    """
    iteracoes = 0
    while True:
        candidatas = np.flatnonzero(tableau[-1, :elegiveis] < -TOLERANCIA_PIVO)
        if candidatas.size == 0:
            return "optimal", iteracoes
        if iteracoes >= restantes:
            return "iteration-limit", iteracoes
        coluna = int(candidatas[0])
        valores = tableau[:-1, coluna]
        positivas = np.flatnonzero(valores > TOLERANCIA_PIVO)
        if positivas.size == 0:
            return "unbounded", iteracoes
        razoes = tableau[positivas, -1] / valores[positivas]
        empatadas = positivas[razoes <= razoes.min() + TOLERANCIA_PIVO]
        linha = min((int(i) for i in empatadas), key=lambda i: base[i])
        _pivotar(tableau, base, linha, coluna)
        iteracoes += 1


def simplex_solve(problem: LpProblem, max_iter: int = MAX_ITERACOES_PADRAO) -> LpSolution:
    """Simplex de duas fases sobre tableau denso.

    Fase 1 minimiza a soma das variáveis artificiais; fase 2 otimiza o
    objetivo original sem as colunas artificiais. Ao final, os resíduos
    das restrições são conferidos com tolerância ``1e-9``.

    Returns:
        :class:`LpSolution` com status ``optimal``, ``infeasible``,
        ``unbounded``, ``iteration-limit`` ou ``numerical``.
    """
    n = problem.n_vars
    limites = [j for j in range(n) if np.isfinite(problem.upper[j])]
    linhas_ub = [problem.a_ub[i] for i in range(problem.a_ub.shape[0])]
    lados_ub = list(problem.b_ub)
    for j in limites:
        linha = np.zeros(n)
        linha[j] = 1.0
        linhas_ub.append(linha)
        lados_ub.append(float(problem.upper[j]))

    # cada linha: (coeficientes, lado direito, sentido) com lado direito >= 0
    linhas: list[tuple[np.ndarray, float, str]] = []
    for coef, lado in zip(linhas_ub, lados_ub):
        if lado < 0:
            linhas.append((-np.asarray(coef, dtype=float), -float(lado), ">="))
        else:
            linhas.append((np.asarray(coef, dtype=float), float(lado), "<="))
    for i in range(problem.a_eq.shape[0]):
        coef, lado = problem.a_eq[i], float(problem.b_eq[i])
        sinal = -1.0 if lado < 0 else 1.0
        linhas.append((sinal * np.asarray(coef, dtype=float), sinal * lado, "="))

    n_folgas = sum(1 for _, _, s in linhas if s != "=")
    n_artificiais = sum(1 for _, _, s in linhas if s != "<=")
    total = n + n_folgas + n_artificiais
    tableau = np.zeros((len(linhas) + 1, total + 1))
    base: list[int] = []
    folga, artificial = n, n + n_folgas
    artificiais: list[int] = []
    for i, (coef, lado, sentido) in enumerate(linhas):
        tableau[i, :n] = coef
        tableau[i, -1] = lado
        if sentido == "<=":
            tableau[i, folga] = 1.0
            base.append(folga)
            folga += 1
            continue
        if sentido == ">=":
            tableau[i, folga] = -1.0
            folga += 1
        tableau[i, artificial] = 1.0
        base.append(artificial)
        artificiais.append(i)
        artificial += 1

    usadas = 0
    if artificiais:
        tableau[-1, n + n_folgas:total] = 1.0
        for i in artificiais:
            tableau[-1] -= tableau[i]
        status, usadas = _iterar(tableau, base, total, max_iter)
        if status != "optimal":
            return LpSolution(status, None, None, usadas)
        if -tableau[-1, -1] > TOLERANCIA_RESIDUO * max(1.0, float(np.abs(tableau[:-1, -1]).max())):
            return LpSolution("infeasible", None, None, usadas)
        redundantes: list[int] = []
        for i, b in enumerate(base):
            if b < n + n_folgas:
                continue
            substitutas = np.flatnonzero(np.abs(tableau[i, : n + n_folgas]) > TOLERANCIA_PIVO)
            if substitutas.size:
                _pivotar(tableau, base, i, int(substitutas[0]))
            else:
                redundantes.append(i)
        if redundantes:
            manter = [i for i in range(len(base)) if i not in redundantes]
            tableau = tableau[manter + [len(base)]]
            base = [base[i] for i in manter]

    tableau = np.hstack([tableau[:, : n + n_folgas], tableau[:, -1:]])
    custos = np.zeros(n + n_folgas)
    custos[:n] = problem.objective
    tableau[-1, :] = 0.0
    tableau[-1, : n + n_folgas] = custos
    for i, b in enumerate(base):
        if custos[b] != 0.0:
            tableau[-1] -= custos[b] * tableau[i]

    status, mais = _iterar(tableau, base, n + n_folgas, max_iter - usadas)
    usadas += mais
    if status != "optimal":
        return LpSolution(status, None, None, usadas)

    x = np.zeros(n + n_folgas)
    for i, b in enumerate(base):
        x[b] = tableau[i, -1]
    x = x[:n]
    if not _residuos_ok(problem, x):
        return LpSolution("numerical", None, None, usadas)
    return LpSolution("optimal", float(problem.objective @ x), x, usadas)


def _residuos_ok(problem: LpProblem, x: np.ndarray) -> bool:
    if np.any(x < -TOLERANCIA_RESIDUO) or np.any(x > problem.upper + TOLERANCIA_RESIDUO):
        return False
    if problem.a_ub.size and np.any(problem.a_ub @ x - problem.b_ub > TOLERANCIA_RESIDUO):
        return False
    if problem.a_eq.size and np.any(np.abs(problem.a_eq @ x - problem.b_eq) > TOLERANCIA_RESIDUO):
        return False
    return True


# ========== PL DE INSTÂNCIAS COMPATÍVEIS ==========

def build_compatible_lp(instance: Instance, types: Optional[Sequence[int]] = None) -> tuple[LpProblem, float]:
    """Monta o PL ``min c`` sobre as frações ``x[t][k]`` da carga de cada tipo.

    Para cada máquina ``k`` e tipo presente ``t'``:
    ``Σ_t x[t][k]·W_t·min(1, α[t][t'])  <= c``; para cada tipo,
    ``Σ_k x[t][k] = 1``. Só entram os tipos com carga (dentre ``types``).
    As cargas são divididas pela maior delas antes de montar o tableau.

    Returns:
        ``(problema, escala)``: o objetivo do PL vezes ``escala`` é o limitante.
    """
    stats = instance_stats(instance)
    presentes = _tipos_presentes(instance, types)
    m = instance.machines
    escala = float(max(stats.per_type_load[t] for t in presentes))
    cargas = np.array([stats.per_type_load[t] for t in presentes], dtype=float) / escala
    beta = np.minimum(1.0, instance.alpha.coeff[np.ix_(presentes, presentes)])

    n_tipos = len(presentes)
    n_vars = n_tipos * m + 1
    indice_c = n_vars - 1

    a_ub = np.zeros((m * n_tipos, n_vars))
    for k in range(m):
        for u in range(n_tipos):
            linha = k * n_tipos + u
            for t in range(n_tipos):
                a_ub[linha, t * m + k] = cargas[t] * beta[t, u]
            a_ub[linha, indice_c] = -1.0
    a_eq = np.zeros((n_tipos, n_vars))
    for t in range(n_tipos):
        a_eq[t, t * m:(t + 1) * m] = 1.0

    objetivo = np.zeros(n_vars)
    objetivo[indice_c] = 1.0
    upper = np.ones(n_vars)
    upper[indice_c] = np.inf
    nomes = [f"x[{t}][{k}]" for t in presentes for k in range(m)] + ["c"]
    problema = LpProblem(
        objective=objetivo,
        a_ub=a_ub,
        b_ub=np.zeros(m * n_tipos),
        a_eq=a_eq,
        b_eq=np.ones(n_tipos),
        upper=upper,
        names=nomes,
    )
    return problema, escala


def _tipos_presentes(instance: Instance, types: Optional[Sequence[int]]) -> list[int]:
    stats = instance_stats(instance)
    candidatos = range(instance.t_count) if types is None else types
    return [t for t in candidatos if stats.per_type_load[t] > 0]


@lru_cache(maxsize=256)
def _dominancia_ok(beta: tuple[tuple[float, ...], ...]) -> bool:
    n_tipos = len(beta)
    matriz = np.array(beta, dtype=float)
    for u in range(n_tipos):
        outros = [t for t in range(n_tipos) if t != u]
        for tamanho in range(1, len(outros) + 1):
            for grupo in itertools.combinations(outros, tamanho):
                # λ no simplex sobre o grupo com Σ_v λ_v·β[t][v] >= β[t][u] para t no grupo
                sub = matriz[np.ix_(grupo, grupo)]
                problema = LpProblem(
                    objective=np.zeros(tamanho),
                    a_ub=-sub,
                    b_ub=-matriz[list(grupo), u] + TOLERANCIA_RESIDUO,
                    a_eq=np.ones((1, tamanho)),
                    b_eq=np.ones(1),
                    upper=np.full(tamanho, np.inf),
                )
                if not simplex_solve(problema).success:
                    return False
    return True


def lp_bound_sound(instance: Instance, types: Optional[Sequence[int]] = None) -> bool:
    """Indica se o PL compatível é de fato limitante inferior para esta matriz.

    O PL impõe, em toda máquina, a restrição de custo de todo tipo, inclusive
    dos tipos ausentes dela. Isso só é relaxação quando, para cada tipo
    ``u`` e cada conjunto ``S`` de tipos sem ``u``, alguma combinação convexa
    das restrições de ``S`` domina a de ``u``. Os presets satisfazem a
    condição; matrizes com α = 0 entre dois tipos e α alto para um terceiro,
    não.
    """
    presentes = _tipos_presentes(instance, types)
    beta = np.minimum(1.0, instance.alpha.coeff[np.ix_(presentes, presentes)])
    return _dominancia_ok(tuple(tuple(float(v) for v in linha) for linha in beta))


# ========== LIMITANTES ==========

def lb_pmax(instance: Instance) -> float | int:
    """Custo próprio da maior tarefa: ``max p_i·α_ii`` (``p_max`` com diagonal 1)."""
    diagonal = np.diag(instance.alpha.coeff)[instance.types]
    valor = (instance.sizes * diagonal).max()
    return int(valor) if float(valor).is_integer() else float(valor)


def lb_avg_load(instance: Instance) -> float:
    """Carga média ``W/m``.

    Raises:
        BoundNotApplicableError: Se algum α < 1.
    """
    if np.any(instance.alpha.coeff < 1):
        raise BoundNotApplicableError("W/m só é limitante quando todo α >= 1")
    return int(instance.sizes.sum()) / instance.machines


def lb_lp_compatible(
    instance: Instance,
    types: Optional[Sequence[int]] = None,
    max_iter: int = MAX_ITERACOES_PADRAO,
) -> Optional[float]:
    """Valor ótimo do PL fracionário, ou ``None`` quando o simplex falha.

    Raises:
        BoundNotApplicableError: Se a matriz não passa em :func:`lp_bound_sound`.
    """
    if not lp_bound_sound(instance, types):
        raise BoundNotApplicableError("PL não é limitante para esta matriz de α")
    problema, escala = build_compatible_lp(instance, types)
    solucao = simplex_solve(problema, max_iter)
    if not solucao.success:
        logger.warning(
            "PL do limitante falhou (%s, %d iterações); usando p_max",
            solucao.status, solucao.iterations,
        )
        return None
    return float(solucao.objective) * escala


def lb_mixed_clusters(
    instance: Instance,
    clustering: Optional[Clustering] = None,
    max_iter: int = MAX_ITERACOES_PADRAO,
) -> Optional[float]:
    """Maior PL entre os grupos, cada um resolvido sozinho nas ``m`` máquinas.

    Frouxo por construção: cada grupo finge ter todas as máquinas.
    Falha de qualquer grupo devolve ``None``; grupo cuja matriz não passa
    em :func:`lp_bound_sound` levanta :class:`BoundNotApplicableError`.
    """
    clustering = clustering or compatibility_clusters(instance.alpha)
    presentes = set(instance.types.tolist())
    melhor: Optional[float] = None
    for c in range(clustering.cluster_count):
        membros = [t for t in clustering.members(c) if t in presentes]
        if not membros:
            continue
        valor = lb_lp_compatible(instance, membros, max_iter)
        if valor is None:
            return None
        melhor = valor if melhor is None else max(melhor, valor)
    return melhor


@dataclass(frozen=True)
class BoundReport:
    """Limitantes calculados e o escolhido (o maior aplicável)."""

    pmax_bound: float | int
    avg_load_bound: Optional[float]
    lp_bound: Optional[float]
    chosen: float | int
    source: str
    lp_failed: bool = False


def compute_bounds(instance: Instance, max_iter: int = MAX_ITERACOES_PADRAO) -> BoundReport:
    """Calcula os limitantes aplicáveis e escolhe o maior.

    ``W/m`` entra quando todo α >= 1; caso contrário resolve-se o PL (um
    por grupo quando há mais de um grupo de compatibilidade). Se o PL
    falhar, o relatório marca ``lp_failed`` e segue com ``p_max``; se a
    matriz não admite o PL, ele é apenas omitido.
    """
    pmax = lb_pmax(instance)
    candidatos: list[tuple[float | int, str]] = [(pmax, "pmax")]
    media: Optional[float] = None
    lp: Optional[float] = None
    falhou = False

    if np.all(instance.alpha.coeff >= 1):
        media = lb_avg_load(instance)
        candidatos.append((media, "avg"))
    else:
        agrupamento = compatibility_clusters(instance.alpha)
        fonte = "lp" if agrupamento.cluster_count == 1 else "lp-clusters"
        try:
            if agrupamento.cluster_count == 1:
                lp = lb_lp_compatible(instance, max_iter=max_iter)
            else:
                lp = lb_mixed_clusters(instance, agrupamento, max_iter)
        except BoundNotApplicableError as e:
            logger.debug("Limitante de PL omitido: %s", e)
        else:
            if lp is None:
                falhou = True
            else:
                candidatos.append((lp, fonte))

    # empate fica com o primeiro da lista (p_max)
    escolhido, fonte_escolhida = candidatos[0]
    for valor, fonte in candidatos[1:]:
        if valor > escolhido:
            escolhido, fonte_escolhida = valor, fonte
    return BoundReport(
        pmax_bound=pmax,
        avg_load_bound=media,
        lp_bound=lp,
        chosen=escolhido,
        source=fonte_escolhida,
        lp_failed=falhou,
    )
