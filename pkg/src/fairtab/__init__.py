"""fairtab: bias measurement and mitigation planning for tabular datasets.

The engine reduces a dataset to an exact integer contingency summary over
intersectional sensitive groups, measures per-group bias against population
label rates, derives tuple-addition plans with non-negativity and
label-frequency guarantees, explores two-operation what-if surfaces under
feasibility constraints, and realizes plans against candidate row pools.
"""

from .errors import (
    DigestMismatch,
    DivisionByZeroMeasure,
    DomainViolation,
    EmptyGroup,
    EmptyLabel,
    FairtabError,
    InfeasibleTargets,
    InvalidPartition,
    InvalidSize,
    InvalidTargets,
    IOFailure,
    LatticeOverdelete,
    MissingColumn,
    MissingValue,
    NoRootInRange,
    Overdelete,
    SchemaMismatch,
    UnknownLabel,
    ValidationError,
)
from .schema import (
    Dataset,
    FairnessSchema,
    GroupKey,
    enumerate_groups,
    infer_schema,
    load_dataset,
)
from .summary import SummaryTable, group_count, summarize
from .measures import (
    BiasCell,
    BiasReport,
    ClassicalMeasures,
    bias_report,
    classical_measures,
    ir_from_bias,
    is_unbiased,
    uniform_bias,
    uniform_bias_exact,
)
from .mitigation import (
    BudgetedOutcome,
    CostModel,
    EditSet,
    KTargets,
    MitigationPlan,
    PlanEntry,
    apply_deletions,
    apply_plan,
    budgeted_mitigation,
    general_solution,
    minimal_mitigation,
    mitigate_with_targets,
    pivot_label,
    verify_label_frequency_preservation,
)
from .grid import (
    Budget,
    MaxOpValue,
    MinTotalRows,
    PolicyGrid,
    PolicyOp,
    bias_at,
    bias_surface,
    classify_surface,
    edited_summary,
    feasible_mask,
    zero_bias_contour,
)
from .sampling import (
    PartitionSpec,
    RealizationReport,
    append_rows,
    export_dataset,
    mitigated_sample_pipeline,
    partition_dataset,
    realize_plan,
    uniform_sample,
)

__version__ = "0.1.0"
