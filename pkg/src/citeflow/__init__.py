"""Higher-order citation influence over publication citation DAGs."""

from .analytics import (
    ENTRYWISE_L1,
    FROBENIUS,
    DisciplineNetwork,
    DisciplineSummary,
    NormalizedFlow,
    OrderContributions,
    RaoScores,
    betweenness_centrality,
    cosine_similarity,
    detect_communities,
    discipline_summary,
    expected_flow,
    incoming_shares,
    matrix_norm,
    normalized_flow,
    order_contributions,
    rao_entropy,
    threshold_network,
)
from .citegraph import (
    UNCLASSIFIED,
    CitationGraph,
    CiteflowError,
    IngestError,
    IngestReport,
    InternalInvariantError,
    Membership,
    PubTime,
    build_graph,
    longest_path_length,
    parse_edges,
    parse_membership,
    parse_nodes,
    topological_order,
)
from .dependence import (
    AUTO,
    DependenceStack,
    FlowDecomposition,
    NormalizedCitationOperator,
    build_operator,
    dependence_stack,
    dependence_vector,
    flow_decomposition,
    propagate,
    source_dependence,
    total_dependence,
)
from .refkit import (
    OracleGuardError,
    SynthSpec,
    dense_dependence,
    enumerate_dependence_row,
    enumerate_path_dependence,
    exhaustive_modularity,
    modularity,
    random_dag,
)

__version__ = "0.1.0"
