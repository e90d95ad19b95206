"""orgrisk: infer coordination needs and cooperation risks in organizations.

Models agents, tasks, activities, evaluations and incentives, derives
epistemic/outcome/reward dependencies and the integration risks they imply
(free-riding, shirking, sub-goal optimization, missing coordination), with
full proof provenance and what-if intervention analysis.
"""

from .engine import (
    DERIVED_PREDICATES,
    Derivation,
    DomainRule,
    Fact,
    InferenceEngine,
    InferenceResult,
    InvalidModelError,
    InvalidStratumError,
    S0,
    S1,
    S2,
    S3,
    fact,
    fact_id,
    infer,
    register_domain_rule,
)
from .explain import (
    FactNotFoundError,
    ProofTree,
    explain,
    render_proof_tree,
    render_report,
    report_document,
)
from .model import (
    Activity,
    Agent,
    AgentKind,
    Characteristic,
    CharacteristicKind,
    CoordinationMechanism,
    Evaluation,
    Form,
    Goal,
    Incentive,
    IncentiveKind,
    Operator,
    OrgModel,
    PerformanceSpec,
    Relation,
    RelationKind,
    Resource,
    Severity,
    State,
    Task,
    UnknownEntityError,
    Value,
    Violation,
    contributors_to,
    evaluatee_individuals,
    is_sole_contributor,
    members_of,
    validate_model,
)
from .scenario import (
    ParseIssue,
    ScenarioParseError,
    fixture_path,
    load_flood_scenario,
    parse_scenario,
    serialize_scenario,
)
from .whatif import (
    AddEntity,
    AddRelation,
    InferenceDiff,
    Intervention,
    ModifyField,
    RemoveEntity,
    RemoveRelation,
    UnknownTargetError,
    WouldInvalidateError,
    add_coordination_mechanism,
    add_individual_evaluation,
    add_joint_evaluation,
    apply_intervention,
    diff_inferences,
    parse_intervention,
    render_diff,
)

__version__ = "0.1.0"
