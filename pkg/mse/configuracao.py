# -*- coding: utf-8 -*-
"""
Módulo de configuração do MSE: variáveis de ambiente e registro de log.

Lê os parâmetros de execução (semente, paralelismo, limites do oráculo
exato, guardas do PTAS, tolerâncias do simplex) do arquivo .env na raiz
do projeto. Todas as variáveis são opcionais: quando ausentes, valem os
padrões definidos em :class:`MseConfig`.

Uso rápido::

    from mse.configuracao import carregar_configuracao, configurar_log

    config = carregar_configuracao()
    configurar_log(config.log_level)

Classes:
    MseConfig -- Dataclass com os parâmetros de execução.

Funções:
    carregar_configuracao() -- Lê os parâmetros do .env.
    configurar_log()        -- Instala o RichHandler no logger raiz.
    configurar_saida_utf8() -- Força UTF-8 em stdout/stderr.

Exceções:
    MseError       -- Base para todos os erros do pacote.
    MseConfigError -- Variáveis de ambiente ou arquivo de execução inválidos.
"""

from __future__ import annotations

import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from rich.logging import RichHandler


# ========== EXCEÇÕES CUSTOMIZADAS ==========

class MseError(Exception):
    """Exceção base para erros do pacote MSE."""
    pass


class MseConfigError(MseError):
    """Exceção para erros de configuração (``.env`` ou arquivo de execução)."""
    pass


# Constantes
PROJECT_ROOT: Path = Path(__file__).resolve().parent.parent
NIVEIS_LOG: tuple[str, ...] = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class MseConfig:
    """Parâmetros de execução do solver e do harness.

    Attributes:
        seed:                Semente mestre (``MSE_SEED``).
        jobs:                Processos paralelos no harness (``MSE_JOBS``).
        oracle_limit:        Maior ``n`` aceito pelo solver exato (``MSE_ORACLE_LIMIT``).
        oracle_max_machines: Maior ``m`` aceito pelo solver exato.
        ptas_max_classes:    Guarda do PTAS sobre ``(γk)²``.
        ptas_max_states:     Guarda do PTAS sobre o reticulado da programação dinâmica.
        lp_max_iter:         Limite de pivoteamentos do simplex.
        log_level:           Nível de log (``MSE_LOG_LEVEL``).
        log_base:            Base do logaritmo dos limiares de tipo (``MSE_LOG_BASE``).
    """

    seed: int = 2017
    jobs: int = 1
    oracle_limit: int = 12
    oracle_max_machines: int = 5
    ptas_max_classes: int = 400
    ptas_max_states: int = 2_000_000
    lp_max_iter: int = 5000
    log_level: str = "INFO"
    log_base: float = 10.0

    def validar(self) -> list[str]:
        """Verifica se os valores estão dentro dos intervalos aceitos.

        Returns:
            Lista com os nomes das variáveis de ambiente inválidas.
            Retorna lista vazia quando todas estão corretas.
        """
        regras: dict[str, bool] = {
            "MSE_SEED": self.seed >= 0,
            "MSE_JOBS": self.jobs >= 1,
            "MSE_ORACLE_LIMIT": self.oracle_limit >= 0,
            "MSE_ORACLE_MAX_MACHINES": self.oracle_max_machines >= 1,
            "MSE_PTAS_MAX_CLASSES": self.ptas_max_classes >= 1,
            "MSE_PTAS_MAX_STATES": self.ptas_max_states >= 1,
            "MSE_LP_MAX_ITER": self.lp_max_iter >= 1,
            "MSE_LOG_LEVEL": self.log_level.upper() in NIVEIS_LOG,
            "MSE_LOG_BASE": self.log_base > 1,
        }
        return [nome for nome, ok in regras.items() if not ok]


def _ler_numero(nome: str, padrao: float, tipo: type, invalidas: list[str]) -> float:
    bruto = os.getenv(nome, "").strip()
    if not bruto:
        return padrao
    try:
        return tipo(bruto)
    except ValueError:
        invalidas.append(nome)
        return padrao


def carregar_configuracao(env_path: Optional[Path] = None) -> MseConfig:
    """Carrega os parâmetros de execução a partir do arquivo ``.env``.

    Args:
        env_path: Caminho para o arquivo ``.env``.
                  Se ``None``, usa ``<raiz_do_projeto>/.env``.

    Returns:
        :class:`MseConfig` populado com os valores lidos (ou padrões).

    Raises:
        MseConfigError: Quando alguma variável não puder ser convertida
            ou estiver fora do intervalo aceito.
    """
    if env_path is None:
        env_path = PROJECT_ROOT / ".env"

    load_dotenv(env_path)

    padrao = MseConfig()
    invalidas: list[str] = []
    config = MseConfig(
        seed=int(_ler_numero("MSE_SEED", padrao.seed, int, invalidas)),
        jobs=int(_ler_numero("MSE_JOBS", padrao.jobs, int, invalidas)),
        oracle_limit=int(_ler_numero("MSE_ORACLE_LIMIT", padrao.oracle_limit, int, invalidas)),
        oracle_max_machines=int(
            _ler_numero("MSE_ORACLE_MAX_MACHINES", padrao.oracle_max_machines, int, invalidas)
        ),
        ptas_max_classes=int(
            _ler_numero("MSE_PTAS_MAX_CLASSES", padrao.ptas_max_classes, int, invalidas)
        ),
        ptas_max_states=int(
            _ler_numero("MSE_PTAS_MAX_STATES", padrao.ptas_max_states, int, invalidas)
        ),
        lp_max_iter=int(_ler_numero("MSE_LP_MAX_ITER", padrao.lp_max_iter, int, invalidas)),
        log_level=os.getenv("MSE_LOG_LEVEL", padrao.log_level).strip().upper() or padrao.log_level,
        log_base=float(_ler_numero("MSE_LOG_BASE", padrao.log_base, float, invalidas)),
    )

    invalidas.extend(nome for nome in config.validar() if nome not in invalidas)
    if invalidas:
        raise MseConfigError(
            f"Variáveis de ambiente inválidas: {', '.join(invalidas)}. "
            f"Corrija no arquivo: {env_path}"
        )

    return config


def configurar_log(nivel: str = "INFO") -> None:
    """Instala um ``RichHandler`` no logger raiz com o nível informado."""
    logging.basicConfig(
        level=nivel.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, show_path=False)],
        force=True,
    )


def configurar_saida_utf8() -> None:
    """Força UTF-8 na saída para evitar falhas com emoji no Windows."""
    for stream_name in ("stdout", "stderr"):
        stream = getattr(sys, stream_name, None)
        if hasattr(stream, "reconfigure"):
            stream.reconfigure(encoding="utf-8", errors="replace")
