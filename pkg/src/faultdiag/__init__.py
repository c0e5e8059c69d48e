"""Fault diagnosis for tree-shaped power networks via binary optimization.

The toolkit compiles minimum-fault diagnosis problems on k-ary circuit
breaker trees into quadratic binary (QUBO/Ising) form, embeds them onto
Chimera-topology hardware graphs, solves them with an annealing-style
sampler plus exact oracles, and reports repetition/time-to-solution
statistics.
"""

from .chimera import HardwareGraph, SAMPLE_BROKEN_MASK, build_chimera
from .embedding import (
    EmbeddedModel,
    Embedding,
    EmbeddingNotFound,
    check_embedding,
    decode_samples,
    embed_ising,
    find_embedding,
)
from .energy import (
    PenaltyParams,
    PseudoBoolean,
    VariableRegistry,
    build_problem,
    consistency_term,
    evaluate,
    fault_count_term,
    is_consistent,
)
from .kernels import active_backend
from .network import (
    FaultSet,
    Observation,
    PowerNetwork,
    build_tree,
    simulate_readout,
)
from .quadratize import (
    Qubo,
    ReductionPlan,
    Substitution,
    ancilla_gadget,
    compile_instance,
    plan_reduction,
    quadratize,
    substitute_high_readout,
    substitute_low_readout,
)
from .solvers import (
    DiagnosisReport,
    SampleSet,
    brute_force_minimize,
    diagnose,
    simulated_anneal,
    tree_dp_diagnose,
)
from .spin import (
    Gauge,
    IsingModel,
    apply_gauge,
    identity_gauge,
    ising_energy,
    ising_to_qubo,
    normalize,
    qubo_to_ising,
    random_gauge,
    ungauge_sample,
)
from .stats import (
    GaugeReport,
    SolveStats,
    aggregate_gauge_stats,
    estimate_ps,
    gauge_experiment,
    repetitions,
    time_to_solution,
)

__version__ = "0.1.0"
