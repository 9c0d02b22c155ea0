# -*- coding: utf-8 -*-
"""
Modelo de dados do problema MinMaxCost com efeitos colaterais (MSE).

Tarefas tipadas e dimensionadas são alocadas a ``m`` máquinas idênticas.
O custo de uma tarefa é a soma, sobre as tarefas da mesma máquina
(inclusive ela própria), de ``tamanho × α[tipo_vizinho][tipo_tarefa]``.
O objetivo é minimizar o maior custo.

Uso rápido::

    from mse.core import AlphaMatrix, Instance, Allocation, max_cost

    inst = Instance.from_sizes([4, 2], [0, 1], AlphaMatrix.from_rows([[1, .5], [.5, 1]]), 1)
    max_cost(inst, Allocation((0, 0)))   # 5.0

Classes:
    Task, AlphaMatrix, Instance, Allocation, LoadMatrix,
    InstanceStats, Clustering -- Tipos imutáveis do modelo.

Funções:
    machine_type_loads()     -- Carga por máquina e por tipo.
    task_costs()             -- Custo de cada tarefa.
    max_cost()               -- Maior custo da alocação.
    compatibility_clusters() -- Agrupamento guloso de tipos compatíveis.
    instance_stats()         -- W, p_max e cargas por tipo.
    load_instance() / save_instance()     -- Esquema JSON canônico.
    load_allocation() / save_allocation() -- Esquema JSON de alocação.

Exceções:
    InvalidInstanceError, InvalidAllocationError, InstanceFormatError.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .configuracao import MseError

logger = logging.getLogger(__name__)


# ========== EXCEÇÕES CUSTOMIZADAS ==========

class InvalidInstanceError(MseError):
    """Instância viola as invariantes do modelo."""
    pass


class InvalidAllocationError(MseError):
    """Alocação incompatível com a instância (tamanho ou índice de máquina)."""
    pass


class InstanceFormatError(MseError):
    """Documento JSON fora do esquema canônico."""
    pass


# ========== TIPOS ==========

def _somente_leitura(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Task:
    """Tarefa ``i`` com tamanho ``p_i`` e tipo ``t_i``."""

    id: int
    size: int
    type_id: int


@dataclass(frozen=True, eq=False)
class AlphaMatrix:
    """Matriz ``T×T`` de coeficientes de interação.

    ``coeff[t][u]`` mede quanto a carga do tipo ``t`` degrada tarefas do
    tipo ``u``. Não precisa ser simétrica; a diagonal normalizada vale 1.
    """

    coeff: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.coeff, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise InvalidInstanceError(f"Matriz alfa deve ser quadrada e não vazia, recebido {arr.shape}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise InvalidInstanceError("Coeficientes alfa devem ser finitos e não negativos")
        object.__setattr__(self, "coeff", _somente_leitura(arr))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "AlphaMatrix":
        return cls(np.asarray(rows, dtype=float))

    @property
    def t_count(self) -> int:
        return int(self.coeff.shape[0])

    @property
    def normalized(self) -> bool:
        """``True`` quando toda a diagonal vale 1."""
        return bool(np.all(np.diag(self.coeff) == 1.0))

    @property
    def integral(self) -> bool:
        return bool(np.all(self.coeff == np.round(self.coeff)))

    @property
    def max_entry(self) -> float:
        return float(self.coeff.max())

    def __getitem__(self, idx: tuple[int, int]) -> float:
        return float(self.coeff[idx])

    def to_rows(self) -> list[list[float]]:
        return [[_numero_json(v) for v in linha] for linha in self.coeff.tolist()]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AlphaMatrix):
            return NotImplemented
        return bool(np.array_equal(self.coeff, other.coeff))

    def __hash__(self) -> int:
        return hash(self.coeff.tobytes())


@dataclass(frozen=True, eq=False)
class Instance:
    """Instância do MSE: ``n`` tarefas, matriz alfa e ``m`` máquinas."""

    tasks: tuple[Task, ...]
    alpha: AlphaMatrix
    machines: int
    sizes: np.ndarray = field(init=False, repr=False)
    types: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        tarefas = tuple(self.tasks)
        object.__setattr__(self, "tasks", tarefas)
        if not tarefas:
            raise InvalidInstanceError("Instância sem tarefas (n deve ser >= 1)")
        if int(self.machines) != self.machines or self.machines < 1:
            raise InvalidInstanceError(f"Número de máquinas inválido: {self.machines}")
        for pos, tarefa in enumerate(tarefas):
            if tarefa.id != pos:
                raise InvalidInstanceError(f"Tarefa na posição {pos} com id {tarefa.id}; ids devem ser 0..n-1")
            if int(tarefa.size) != tarefa.size or tarefa.size < 1:
                raise InvalidInstanceError(f"Tarefa {pos}: tamanho deve ser inteiro >= 1, recebido {tarefa.size}")
            if not 0 <= tarefa.type_id < self.alpha.t_count:
                raise InvalidInstanceError(
                    f"Tarefa {pos}: tipo {tarefa.type_id} fora de [0, {self.alpha.t_count})"
                )
        object.__setattr__(self, "sizes", _somente_leitura(np.array([t.size for t in tarefas], dtype=np.int64)))
        object.__setattr__(self, "types", _somente_leitura(np.array([t.type_id for t in tarefas], dtype=np.int64)))

    @classmethod
    def from_sizes(
        cls,
        sizes: Sequence[int],
        types: Sequence[int],
        alpha: AlphaMatrix,
        machines: int,
    ) -> "Instance":
        """Monta a instância a partir de listas paralelas de tamanhos e tipos."""
        if len(sizes) != len(types):
            raise InvalidInstanceError("Listas de tamanhos e tipos com comprimentos diferentes")
        tarefas = tuple(Task(i, int(p), int(t)) for i, (p, t) in enumerate(zip(sizes, types)))
        return cls(tarefas, alpha, int(machines))

    @property
    def n(self) -> int:
        return len(self.tasks)

    @property
    def t_count(self) -> int:
        return self.alpha.t_count

    def tasks_of_type(self, type_id: int) -> list[int]:
        return [t.id for t in self.tasks if t.type_id == type_id]

    def with_machines(self, machines: int) -> "Instance":
        return Instance(self.tasks, self.alpha, machines)

    def subset(self, task_ids: Sequence[int], machines: int) -> tuple["Instance", list[int]]:
        """Sub-instância com as tarefas indicadas, na ordem original.

        Returns:
            Tupla ``(sub_instancia, mapa)`` onde ``mapa[j]`` é o id original
            da ``j``-ésima tarefa da sub-instância.
        """
        mapa = sorted(task_ids)
        sub = Instance.from_sizes(
            [self.tasks[i].size for i in mapa],
            [self.tasks[i].type_id for i in mapa],
            self.alpha,
            machines,
        )
        return sub, mapa

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return self.tasks == other.tasks and self.alpha == other.alpha and self.machines == other.machines

    def __hash__(self) -> int:
        return hash((self.tasks, self.alpha, self.machines))


@dataclass(frozen=True)
class Allocation:
    """Atribuição tarefa → máquina; única variável de decisão."""

    assignment: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignment", tuple(int(k) for k in self.assignment))

    def __len__(self) -> int:
        return len(self.assignment)

    def validate(self, instance: Instance) -> None:
        """Levanta :class:`InvalidAllocationError` se a alocação não servir à instância."""
        if len(self.assignment) != instance.n:
            raise InvalidAllocationError(
                f"Alocação com {len(self.assignment)} entradas para {instance.n} tarefas"
            )
        for i, k in enumerate(self.assignment):
            if not 0 <= k < instance.machines:
                raise InvalidAllocationError(f"Tarefa {i} na máquina {k}, fora de [0, {instance.machines})")

    def machine_tasks(self, machines: int) -> list[list[int]]:
        grupos: list[list[int]] = [[] for _ in range(machines)]
        for i, k in enumerate(self.assignment):
            grupos[k].append(i)
        return grupos


@dataclass(frozen=True, eq=False)
class LoadMatrix:
    """Carga ``m×T``: ``load[k][t]`` é a soma dos tamanhos do tipo ``t`` na máquina ``k``."""

    load: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "load", _somente_leitura(np.asarray(self.load)))

    def __getitem__(self, idx: Any) -> Any:
        return self.load[idx]

    @property
    def machine_totals(self) -> np.ndarray:
        return self.load.sum(axis=1)


@dataclass(frozen=True)
class InstanceStats:
    total_load: int
    max_size: int
    per_type_load: tuple[int, ...]
    sorted_sizes_per_type: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Clustering:
    """Partição dos tipos em grupos mutuamente compatíveis."""

    cluster_of: tuple[int, ...]
    cluster_count: int

    def members(self, cluster: int) -> list[int]:
        return [t for t, c in enumerate(self.cluster_of) if c == cluster]


# ========== AVALIAÇÃO DE CUSTO ==========

def _numero_json(valor: float) -> float | int:
    return int(valor) if float(valor).is_integer() else float(valor)


def _alfa_de_calculo(alpha: AlphaMatrix) -> np.ndarray:
    # coeficientes inteiros mantêm o custo exato em int64
    if alpha.integral:
        return alpha.coeff.astype(np.int64)
    return alpha.coeff


def machine_type_loads(instance: Instance, alloc: Allocation) -> LoadMatrix:
    """Materializa a carga por máquina e por tipo.

    Raises:
        InvalidAllocationError: Se a alocação não tiver ``n`` entradas
            ou usar máquina fora de ``[0, m)``.
    """
    alloc.validate(instance)
    carga = np.zeros((instance.machines, instance.t_count), dtype=np.int64)
    np.add.at(carga, (np.asarray(alloc.assignment, dtype=np.int64), instance.types), instance.sizes)
    return LoadMatrix(carga)


def machine_type_costs(instance: Instance, load: LoadMatrix) -> np.ndarray:
    """Custo ``m×T`` que uma tarefa do tipo ``u`` teria em cada máquina."""
    return load.load @ _alfa_de_calculo(instance.alpha)


def task_costs(instance: Instance, alloc: Allocation) -> np.ndarray:
    """Custo ``c_i = Σ_t load[M_i][t]·α[t][t_i]`` de cada tarefa."""
    custos = machine_type_costs(instance, machine_type_loads(instance, alloc))
    return custos[np.asarray(alloc.assignment, dtype=np.int64), instance.types]


def max_cost(instance: Instance, alloc: Allocation) -> float | int:
    """Maior custo de tarefa da alocação (``int`` quando alfa é inteiro)."""
    return task_costs(instance, alloc).max().item()


def shared_machines(instance: Instance, alloc: Allocation) -> list[int]:
    """Índices das máquinas que hospedam mais de um tipo."""
    carga = machine_type_loads(instance, alloc).load
    return [k for k in range(instance.machines) if int(np.count_nonzero(carga[k])) > 1]


# ========== AGRUPAMENTO E ESTATÍSTICAS ==========

def compatibility_clusters(alpha: AlphaMatrix) -> Clustering:
    """Agrupa tipos por primeiro encaixe em ordem crescente de id.

    Dois tipos ``i`` e ``j`` dividem um grupo somente se ``α[i][j] <= 1`` e
    ``α[j][i] <= 1``; cada tipo entra no primeiro grupo em que é compatível
    com todos os membros, senão abre um novo.
    """
    grupos: list[list[int]] = []
    cluster_of: list[int] = []
    for t in range(alpha.t_count):
        destino = None
        for c, membros in enumerate(grupos):
            if all(alpha[t, u] <= 1 and alpha[u, t] <= 1 for u in membros):
                destino = c
                break
        if destino is None:
            grupos.append([])
            destino = len(grupos) - 1
        grupos[destino].append(t)
        cluster_of.append(destino)
    return Clustering(tuple(cluster_of), len(grupos))


def instance_stats(instance: Instance) -> InstanceStats:
    """Agrega ``W``, ``p_max``, ``W^(t)`` e os tamanhos ordenados por tipo."""
    por_tipo = np.bincount(instance.types, weights=instance.sizes, minlength=instance.t_count)
    ordenados = tuple(
        tuple(sorted((t.size for t in instance.tasks if t.type_id == tipo), reverse=True))
        for tipo in range(instance.t_count)
    )
    return InstanceStats(
        total_load=int(instance.sizes.sum()),
        max_size=int(instance.sizes.max()),
        per_type_load=tuple(int(w) for w in por_tipo),
        sorted_sizes_per_type=ordenados,
    )


def warn_if_not_normalized(instance: Instance, contexto: str) -> None:
    """Registra aviso quando a diagonal de alfa difere de 1 fora do PTAS."""
    if not instance.alpha.normalized:
        logger.warning(
            "%s: diagonal de alfa diferente de 1 (%s); garantias supõem normalização",
            contexto,
            np.diag(instance.alpha.coeff).tolist(),
        )


# ========== ESQUEMA JSON ==========

CAMPOS_INSTANCIA: tuple[str, ...] = ("m", "alpha", "tasks")
CAMPOS_TAREFA: tuple[str, ...] = ("size", "type")


def instance_to_dict(instance: Instance, metadata: Optional[dict[str, Any]] = None) -> dict[str, Any]:
    documento: dict[str, Any] = {
        "m": instance.machines,
        "alpha": instance.alpha.to_rows(),
        "tasks": [{"size": t.size, "type": t.type_id} for t in instance.tasks],
    }
    if metadata is not None:
        documento["metadata"] = dict(metadata)
    return documento


def _exigir_campos(documento: Any, esperados: Iterable[str], opcionais: Iterable[str], onde: str) -> None:
    if not isinstance(documento, dict):
        raise InstanceFormatError(f"{onde}: objeto JSON esperado")
    esperados = tuple(esperados)
    faltantes = [c for c in esperados if c not in documento]
    desconhecidos = [c for c in documento if c not in esperados and c not in tuple(opcionais)]
    if faltantes:
        raise InstanceFormatError(f"{onde}: campos ausentes: {', '.join(faltantes)}")
    if desconhecidos:
        raise InstanceFormatError(f"{onde}: campos desconhecidos: {', '.join(desconhecidos)}")


def _eh_inteiro(valor: Any) -> bool:
    return isinstance(valor, int) and not isinstance(valor, bool)


def instance_from_dict(documento: dict[str, Any]) -> tuple[Instance, Optional[dict[str, Any]]]:
    """Valida o documento e devolve ``(instancia, metadata)``.

    Raises:
        InstanceFormatError: Campos ausentes, desconhecidos ou com tipo errado.
        InvalidInstanceError: Valores que violam as invariantes do modelo.
    """
    _exigir_campos(documento, CAMPOS_INSTANCIA, ("metadata",), "instância")
    tarefas = documento["tasks"]
    if not isinstance(tarefas, list):
        raise InstanceFormatError("instância: 'tasks' deve ser uma lista")
    tamanhos: list[int] = []
    tipos: list[int] = []
    for pos, tarefa in enumerate(tarefas):
        _exigir_campos(tarefa, CAMPOS_TAREFA, (), f"tarefa {pos}")
        if not _eh_inteiro(tarefa["size"]) or not _eh_inteiro(tarefa["type"]):
            raise InstanceFormatError(f"tarefa {pos}: 'size' e 'type' devem ser inteiros")
        tamanhos.append(tarefa["size"])
        tipos.append(tarefa["type"])
    if not _eh_inteiro(documento["m"]):
        raise InstanceFormatError("instância: 'm' deve ser inteiro")
    try:
        alpha = AlphaMatrix.from_rows(documento["alpha"])
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"instância: 'alpha' inválida: {exc}") from exc
    metadata = documento.get("metadata")
    return Instance.from_sizes(tamanhos, tipos, alpha, documento["m"]), metadata


def load_instance(path: Path) -> tuple[Instance, Optional[dict[str, Any]]]:
    caminho = Path(path)
    if not caminho.exists():
        raise FileNotFoundError(f"Arquivo de instância não encontrado: {caminho}")
    try:
        documento = json.loads(caminho.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{caminho.name}: JSON inválido ({exc})") from exc
    return instance_from_dict(documento)


def save_instance(path: Path, instance: Instance, metadata: Optional[dict[str, Any]] = None) -> None:
    Path(path).write_text(
        json.dumps(instance_to_dict(instance, metadata), indent=2) + "\n", encoding="utf-8"
    )


def allocation_from_dict(documento: dict[str, Any]) -> Allocation:
    _exigir_campos(documento, ("assignment",), (), "alocação")
    atribuicao = documento["assignment"]
    if not isinstance(atribuicao, list) or not all(_eh_inteiro(k) for k in atribuicao):
        raise InstanceFormatError("alocação: 'assignment' deve ser lista de inteiros")
    return Allocation(tuple(atribuicao))


def load_allocation(path: Path) -> Allocation:
    caminho = Path(path)
    if not caminho.exists():
        raise FileNotFoundError(f"Arquivo de alocação não encontrado: {caminho}")
    try:
        documento = json.loads(caminho.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{caminho.name}: JSON inválido ({exc})") from exc
    return allocation_from_dict(documento)


def save_allocation(path: Path, alloc: Allocation) -> None:
    Path(path).write_text(json.dumps({"assignment": list(alloc.assignment)}) + "\n", encoding="utf-8")
