# -*- coding: utf-8 -*-
"""
Linha de comando do MSE (``python -m mse``).

Subcomandos:
    gen    -- Materializa uma grade em arquivos JSON de instância.
    run    -- Roda o protocolo de experimentos e grava CSV/JSON.
    bound  -- Mostra os limitantes inferiores de uma instância.
    solve  -- Resolve uma instância com um algoritmo do registro.

Códigos de saída:
    0 -- Sucesso.
    2 -- Configuração ou entrada inválida.
    3 -- Violação de invariante (custo normalizado abaixo de 1).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn
from rich.table import Table

from .algorithms import AlgorithmError, algorithm_names, run_algorithm
from .bounds import compute_bounds
from .configuracao import (
    MseConfig,
    MseConfigError,
    MseError,
    carregar_configuracao,
    configurar_log,
    configurar_saida_utf8,
)
from .core import InstanceFormatError, InvalidInstanceError, load_instance, save_allocation, save_instance
from .harness import RunConfig, aggregate, build_work, emit, find_violations, run_experiment
from .instances import (
    GridSpec,
    GridSpecError,
    experiment_grid,
    ingest_trace,
    materialize,
    normalize_records,
    synthetic_pool,
    typed_pool,
)
from .ptas import PtasGuardError

logger = logging.getLogger(__name__)

console = Console()

SAIDA_OK = 0
SAIDA_CONFIG = 2
SAIDA_VIOLACAO = 3


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mse", description="Solver e harness de colocação MSE")
    parser.add_argument("--env", type=Path, default=None, help="Arquivo .env (padrão: raiz do projeto)")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--jobs", type=int, default=None)
    parser.add_argument("--oracle-limit", type=int, default=None)
    parser.add_argument("--log-level", default=None)
    sub = parser.add_subparsers(dest="comando", required=True)

    gen = sub.add_parser("gen", help="Gera instâncias de uma grade")
    gen.add_argument("--spec", type=Path, required=True)
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--pool-size", type=int, default=10_000)
    gen.add_argument("--trace", type=Path, default=None)

    run = sub.add_parser("run", help="Roda os experimentos")
    run.add_argument("--config", type=Path, required=True)
    run.add_argument("--out", type=Path, required=True)
    run.add_argument("--stats", type=Path, default=None)
    run.add_argument("--timings", type=Path, default=None)
    run.add_argument("--by-machines", action="store_true")

    bound = sub.add_parser("bound", help="Limitantes inferiores de uma instância")
    bound.add_argument("--instance", type=Path, required=True)

    solve = sub.add_parser("solve", help="Resolve uma instância")
    solve.add_argument("--instance", type=Path, required=True)
    solve.add_argument("--alg", default="best", help=f"Um de: {', '.join(algorithm_names())}")
    solve.add_argument("--out", type=Path, default=None, help="Grava a alocação em JSON")
    return parser


def _aplicar_flags(config: MseConfig, args: argparse.Namespace) -> MseConfig:
    """Flags da linha de comando têm precedência sobre ``.env`` e arquivo de execução."""
    mudancas = {
        chave: valor
        for chave, valor in (("seed", args.seed), ("jobs", args.jobs), ("oracle_limit", args.oracle_limit))
        if valor is not None
    }
    if args.log_level:
        mudancas["log_level"] = args.log_level.upper()
    efetivo = replace(config, **mudancas)
    invalidas = efetivo.validar()
    if invalidas:
        raise MseConfigError(f"Parâmetros inválidos na linha de comando: {', '.join(invalidas)}")
    return efetivo


# ========== SUBCOMANDOS ==========

def comando_gen(args: argparse.Namespace, config: MseConfig) -> int:
    console.print(Panel.fit("[bold white]🧪 GERAÇÃO DE INSTÂNCIAS[/bold white]", style="bold blue"))
    if not args.spec.exists():
        raise MseConfigError(f"Arquivo de grade não encontrado: {args.spec}")
    try:
        documento = json.loads(args.spec.read_text(encoding="utf-8"))
        if not isinstance(documento, dict):
            raise GridSpecError("a grade deve ser um objeto JSON")
        grade = GridSpec.from_dict({**documento, "seed": documento.get("seed", config.seed)})
    except (json.JSONDecodeError, GridSpecError) as exc:
        raise MseConfigError(f"Grade inválida em {args.spec}: {exc}") from exc
    if args.seed is not None:
        grade = replace(grade, seed=args.seed)

    descritores = experiment_grid(grade)
    if args.trace is not None:
        registros = ingest_trace(args.trace)
    else:
        registros = normalize_records(synthetic_pool(args.pool_size, config.seed))
    pools = {t: typed_pool(registros, t, config.log_base) for t in {d.t_count for d in descritores}}

    args.out.mkdir(parents=True, exist_ok=True)
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        console=console,
    ) as progress:
        tarefa = progress.add_task("[green]Gerando...", total=len(descritores))
        for d in descritores:
            instancia, meta = materialize(d, pools[d.t_count])
            meta["size_class"] = d.size_class
            save_instance(args.out / f"{d.cell_id}-r{d.repetition:02d}.json", instancia, meta)
            progress.update(tarefa, advance=1)

    console.print(f"[bold green]✅ {len(descritores)} instância(s) gravadas em {args.out}[/bold green]")
    return SAIDA_OK


def comando_run(args: argparse.Namespace, config: MseConfig) -> int:
    console.print(Panel.fit("[bold white]📊 EXPERIMENTOS MSE[/bold white]", style="bold blue"))
    execucao = RunConfig.from_file(args.config, config)
    execucao.settings = _aplicar_flags(execucao.settings, args)
    if args.seed is not None:
        execucao.grids = [replace(g, seed=args.seed) for g in execucao.grids]
    if args.by_machines:
        execucao.by_machines = True

    with console.status("[bold green]Materializando instâncias...", spinner="dots"):
        itens = build_work(execucao)
    console.print(f"[cyan]{len(itens)} instância(s), jobs={execucao.settings.jobs}[/cyan]")

    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        console=console,
    ) as progress:
        tarefa = progress.add_task("[green]Avaliando...", total=len(itens))
        linhas = run_experiment(execucao, lambda k: progress.update(tarefa, advance=k), work=itens)

    estatisticas = aggregate(linhas, execucao.by_machines)
    emit(linhas, estatisticas, args.out, args.stats, args.timings)

    resumo = Table(title="📊 Resumo", show_header=True, header_style="bold magenta")
    for coluna in ("Cenário", "Tamanho", "Algoritmo", "N", "Mediana", "p5", "p95"):
        resumo.add_column(coluna, justify="right" if coluna not in ("Cenário", "Tamanho", "Algoritmo") else "left")
    for g in estatisticas.groups:
        resumo.add_row(
            g.scenario, g.size_class, g.algorithm + (f" (m={g.m})" if g.m is not None else ""),
            str(g.count), f"{g.median:.3f}", f"{g.p5:.3f}", f"{g.p95:.3f}",
        )
    console.print(Panel(resumo, expand=False))

    ignoradas = sum(1 for r in linhas if r.status == "skipped")
    if ignoradas:
        console.print(f"[bold yellow]⚠️  {ignoradas} linha(s) ignoradas por pré-condição[/bold yellow]")

    violacoes = find_violations(linhas)
    if violacoes:
        for r in violacoes[:10]:
            console.print(
                f"[bold red]❌ {r.cell_id} seed={r.seed} {r.algorithm}: "
                f"custo normalizado {r.normalized_cost:.6f} < 1 (limitante {r.bound_source})[/bold red]"
            )
        console.print(f"[bold red]❌ {len(violacoes)} violação(ões) de invariante[/bold red]")
        return SAIDA_VIOLACAO

    console.print(f"[bold green]✅ Resultados em {args.out}[/bold green]")
    return SAIDA_OK


def comando_bound(args: argparse.Namespace, config: MseConfig) -> int:
    instancia, _ = load_instance(args.instance)
    relatorio = compute_bounds(instancia, config.lp_max_iter)

    tabela = Table(title=f"Limitantes: {args.instance.name}", show_header=True)
    tabela.add_column("Limitante")
    tabela.add_column("Valor", justify="right")
    tabela.add_row("p_max", f"{float(relatorio.pmax_bound):.6f}")
    tabela.add_row("W/m", "-" if relatorio.avg_load_bound is None else f"{relatorio.avg_load_bound:.6f}")
    tabela.add_row(
        "PL", "[red]falhou[/red]" if relatorio.lp_failed
        else ("-" if relatorio.lp_bound is None else f"{relatorio.lp_bound:.6f}")
    )
    tabela.add_row(f"[bold]escolhido ({relatorio.source})[/bold]", f"[bold]{float(relatorio.chosen):.6f}[/bold]")
    console.print(Panel(tabela, expand=False))
    return SAIDA_OK


def comando_solve(args: argparse.Namespace, config: MseConfig) -> int:
    instancia, _ = load_instance(args.instance)
    with console.status(f"[bold green]Executando {args.alg}...", spinner="dots"):
        resultado = run_algorithm(args.alg, instancia, config)

    tabela = Table(title=f"{args.alg}: custo máximo {float(resultado.max_cost):.6f}", show_header=True)
    tabela.add_column("Máquina", justify="right")
    tabela.add_column("Tarefas")
    for maquina, tarefas in enumerate(resultado.allocation.machine_tasks(instancia.machines)):
        tabela.add_row(str(maquina), ", ".join(f"{t}(t{instancia.tasks[t].type_id})" for t in tarefas))
    console.print(Panel(tabela, expand=False))
    console.print(f"[dim]Tempo: {resultado.wall_time:.4f}s[/dim]")

    if args.out is not None:
        save_allocation(args.out, resultado.allocation)
        console.print(f"[bold green]✅ Alocação gravada em {args.out}[/bold green]")
    return SAIDA_OK


COMANDOS = {"gen": comando_gen, "run": comando_run, "bound": comando_bound, "solve": comando_solve}


def main(argv: Optional[Sequence[str]] = None) -> int:
    configurar_saida_utf8()
    args = _parser().parse_args(argv)
    try:
        config = _aplicar_flags(carregar_configuracao(args.env), args)
        configurar_log(config.log_level)
        logger.debug("Configuração efetiva: %s", config)
        return COMANDOS[args.comando](args, config)
    except (MseConfigError, InstanceFormatError, InvalidInstanceError, GridSpecError, FileNotFoundError) as exc:
        console.print(f"[bold red]❌ Erro de configuração/entrada:[/bold red] {exc}")
        return SAIDA_CONFIG
    except (AlgorithmError, PtasGuardError) as exc:
        console.print(f"[bold red]❌ Algoritmo recusou a instância:[/bold red] {exc}")
        return SAIDA_CONFIG
    except MseError as exc:
        console.print(f"[bold red]❌ Erro:[/bold red] {exc}")
        return SAIDA_CONFIG


if __name__ == "__main__":
    sys.exit(main())
