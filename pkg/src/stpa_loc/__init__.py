"""Hazard analysis for control structures with AI-containing components.

The package models a system as a control loop (controller, actuator,
controlled process, sensor), enumerates unsafe control actions,
classifies loss scenarios against a causal-factor catalog, traces causal
pathways, and renders characterization tables in both reading
directions.

Typical flow::

    from stpa_loc import dsl, analysis, catalog, report

    model, diags = dsl.parse_model(source)
    ucas = analysis.enumerate_ucas(model)
    prompts = catalog.generate_prompts(catalog.load_catalog(), model)
    rows = report.build_table(scenarios, model,
                              report.TableDirection.EFFECT_TO_CAUSE)
    print(report.render_csv(rows, report.TableDirection.EFFECT_TO_CAUSE))
"""

from .model import (
    AgentNature,
    AiCharacteristic,
    CausalFactorType,
    Component,
    ComponentKind,
    ControlAction,
    ControlStructureModel,
    Diagnostic,
    FeedbackChannel,
    Hazard,
    InvalidModel,
    LifecyclePhase,
    Loss,
    LossScenario,
    SafetyConstraint,
    ScenarioSubType,
    ScenarioType,
    Severity,
    SourceSpan,
    UcaAnnotation,
    UcaType,
    UnsafeControlAction,
    format_diagnostic,
    has_errors,
    model_fingerprint,
    validate_model,
)
from .dsl import parse_model, parse_scenarios, serialize_model
from .catalog import (
    Catalog,
    CatalogEntry,
    CatalogFormatError,
    Prompt,
    filter_entries,
    generate_prompts,
    load_catalog,
)
from .analysis import (
    Ledger,
    LedgerSource,
    Pathway,
    PathwayStage,
    RecordSeverity,
    StageKind,
    VulnerabilityRecord,
    classify_scenario,
    derive_constraints,
    enumerate_ucas,
    ledger_exposure,
    ledger_load,
    ledger_register,
    ledger_resolve,
    ledger_save,
    match_catalog,
    trace_pathway,
)
from .report import (
    CharacterizationRow,
    TableDirection,
    build_table,
    render_csv,
    render_json,
    render_markdown,
    render_pathway,
)

__version__ = "0.1.0"

__all__ = [
    "AgentNature",
    "AiCharacteristic",
    "Catalog",
    "CatalogEntry",
    "CatalogFormatError",
    "CausalFactorType",
    "CharacterizationRow",
    "Component",
    "ComponentKind",
    "ControlAction",
    "ControlStructureModel",
    "Diagnostic",
    "FeedbackChannel",
    "Hazard",
    "InvalidModel",
    "Ledger",
    "LedgerSource",
    "LifecyclePhase",
    "Loss",
    "LossScenario",
    "Pathway",
    "PathwayStage",
    "Prompt",
    "RecordSeverity",
    "SafetyConstraint",
    "ScenarioSubType",
    "ScenarioType",
    "Severity",
    "SourceSpan",
    "StageKind",
    "TableDirection",
    "UcaAnnotation",
    "UcaType",
    "UnsafeControlAction",
    "VulnerabilityRecord",
    "build_table",
    "classify_scenario",
    "derive_constraints",
    "enumerate_ucas",
    "filter_entries",
    "format_diagnostic",
    "generate_prompts",
    "has_errors",
    "ledger_exposure",
    "ledger_load",
    "ledger_register",
    "ledger_resolve",
    "ledger_save",
    "load_catalog",
    "match_catalog",
    "model_fingerprint",
    "parse_model",
    "parse_scenarios",
    "render_csv",
    "render_json",
    "render_markdown",
    "render_pathway",
    "serialize_model",
    "trace_pathway",
    "validate_model",
    "__version__",
]
