# -*- coding: utf-8 -*-
"""
Pacote mse - Colocação de tarefas tipadas com efeitos colaterais (MinMaxCost).
"""

from .configuracao import (
    MseConfig,
    MseError,
    MseConfigError,
    carregar_configuracao,
    configurar_log,
)
from .core import (
    Task,
    AlphaMatrix,
    Instance,
    Allocation,
    LoadMatrix,
    InstanceStats,
    Clustering,
    InvalidInstanceError,
    InvalidAllocationError,
    InstanceFormatError,
    machine_type_loads,
    machine_type_costs,
    task_costs,
    max_cost,
    shared_machines,
    compatibility_clusters,
    instance_stats,
    load_instance,
    save_instance,
    load_allocation,
    save_allocation,
)
from .algorithms import (
    AlgorithmError,
    AlgorithmParameterError,
    InfeasibleDedicationError,
    OracleLimitError,
    UnknownAlgorithmError,
    AlgorithmResult,
    ThresholdSearchConfig,
    OverflowPolicy,
    lpt,
    sched_mixed,
    sched_juxtapose,
    best_schedule,
    greedy_dedicated,
    fill_greedy,
    fill_greedy_threshold,
    greedy_for_2types,
    greedy_for_2types_threshold,
    greedy_for_2types_search,
    dedicate_shared_machines,
    exact_solve,
    algorithm_names,
    run_algorithm,
)
from .ptas import (
    PtasGuardError,
    PtasParams,
    RoundedInstance,
    build_rounded_instance,
    dp_min_machines,
    ptas_feasible,
    ptas_optimize,
)
from .bounds import (
    BoundNotApplicableError,
    LpProblem,
    LpSolution,
    BoundReport,
    simplex_solve,
    build_compatible_lp,
    lb_pmax,
    lb_avg_load,
    lb_lp_compatible,
    lb_mixed_clusters,
    lp_bound_sound,
    compute_bounds,
)
from .instances import (
    TraceParseError,
    SamplingError,
    PresetError,
    GridSpecError,
    TraceRecord,
    GridSpec,
    InstanceDescriptor,
    ingest_trace,
    assign_types,
    synthetic_pool,
    coefficient_preset,
    sample_instance,
    experiment_grid,
    reference_grids,
    materialize,
    partition_hard_instance,
    clique_partition_instance,
)
from .harness import (
    RunConfig,
    ResultRow,
    SummaryStats,
    run_experiment,
    normalize,
    aggregate,
    validate_stats,
    emit,
    find_violations,
)

__all__ = [
    "MseConfig",
    "MseError",
    "MseConfigError",
    "carregar_configuracao",
    "configurar_log",
    "Task",
    "AlphaMatrix",
    "Instance",
    "Allocation",
    "LoadMatrix",
    "InstanceStats",
    "Clustering",
    "InvalidInstanceError",
    "InvalidAllocationError",
    "InstanceFormatError",
    "machine_type_loads",
    "machine_type_costs",
    "task_costs",
    "max_cost",
    "shared_machines",
    "compatibility_clusters",
    "instance_stats",
    "load_instance",
    "save_instance",
    "load_allocation",
    "save_allocation",
    "AlgorithmError",
    "AlgorithmParameterError",
    "InfeasibleDedicationError",
    "OracleLimitError",
    "UnknownAlgorithmError",
    "AlgorithmResult",
    "ThresholdSearchConfig",
    "OverflowPolicy",
    "lpt",
    "sched_mixed",
    "sched_juxtapose",
    "best_schedule",
    "greedy_dedicated",
    "fill_greedy",
    "fill_greedy_threshold",
    "greedy_for_2types",
    "greedy_for_2types_threshold",
    "greedy_for_2types_search",
    "dedicate_shared_machines",
    "exact_solve",
    "algorithm_names",
    "run_algorithm",
    "PtasGuardError",
    "PtasParams",
    "RoundedInstance",
    "build_rounded_instance",
    "dp_min_machines",
    "ptas_feasible",
    "ptas_optimize",
    "BoundNotApplicableError",
    "LpProblem",
    "LpSolution",
    "BoundReport",
    "simplex_solve",
    "build_compatible_lp",
    "lb_pmax",
    "lb_avg_load",
    "lb_lp_compatible",
    "lb_mixed_clusters",
    "lp_bound_sound",
    "compute_bounds",
    "TraceParseError",
    "SamplingError",
    "PresetError",
    "GridSpecError",
    "TraceRecord",
    "GridSpec",
    "InstanceDescriptor",
    "ingest_trace",
    "assign_types",
    "synthetic_pool",
    "coefficient_preset",
    "sample_instance",
    "experiment_grid",
    "reference_grids",
    "materialize",
    "partition_hard_instance",
    "clique_partition_instance",
    "RunConfig",
    "ResultRow",
    "SummaryStats",
    "run_experiment",
    "normalize",
    "aggregate",
    "validate_stats",
    "emit",
    "find_violations",
]
