from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stpa_loc.analysis import (
    DanglingReference,
    DuplicateId,
    Ledger,
    LedgerSource,
    Pathway,
    PathwayStage,
    RecordSeverity,
    StageKind,
    UnconfirmedUca,
    UnknownComponent,
    UnknownComponentKind,
    UnknownRecord,
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
    uca_id,
)
from stpa_loc.dsl import parse_model
from stpa_loc.model import (
    AiCharacteristic,
    CausalFactorType,
    ComponentKind,
    ControlStructureModel,
    InvalidModel,
    LifecyclePhase,
    LossScenario,
    SUBTYPES_FOR_TYPE,
    ScenarioSubType,
    ScenarioType,
    UcaType,
    model_fingerprint,
)

from strategies import models

HOST_SOURCE = """
system "host" {
  controller C
  process P {contains_ai: true}
  loss L-1 "a loss"
  loss L-2 "b loss"
  hazard H-1 "a hazard" leads_to L-1, L-2
  control_action CA-1 "act" from C to P
  annotate CA-1 not_provided context "idle" hazards H-1
}
"""


@pytest.fixture(scope="module")
def host():
    model, diags = parse_model(HOST_SOURCE)
    assert diags == []
    return model


def scenario(
    factors,
    chars=frozenset(),
    uca=None,
    origin="P",
    kind=ComponentKind.CONTROLLED_PROCESS,
    scenario_type=ScenarioType.TYPE_B_IMPROPER_EXECUTION,
    sub_types=frozenset({ScenarioSubType.CA_NOT_EXECUTED}),
):
    return LossScenario(
        id="S-X",
        origin_component=origin,
        origin_kind=kind,
        scenario_type=scenario_type,
        sub_types=sub_types,
        causal_factors=frozenset(factors),
        ai_characteristics=frozenset(chars),
        description="drafted for testing",
        uca=uca,
    )


# --- UCA enumeration ---------------------------------------------------------


def test_uca_id_format():
    assert uca_id("CA-2", UcaType.WRONG_DURATION) == "CA-2-wrong_duration"


def test_enumerate_ucas_for_fixture(fixture_model):
    ucas = enumerate_ucas(fixture_model)
    assert len(ucas) == 20
    assert [u.id for u in ucas[:4]] == [
        "CA-1-not_provided",
        "CA-1-provided_causes_hazard",
        "CA-1-wrong_time_or_order",
        "CA-1-wrong_duration",
    ]
    confirmed = [u for u in ucas if u.is_confirmed]
    assert [u.id for u in confirmed] == [
        "CA-1-not_provided",
        "CA-1-provided_causes_hazard",
        "CA-1-wrong_time_or_order",
        "CA-1-wrong_duration",
    ]


def test_enumerate_merges_annotations(host):
    ucas = enumerate_ucas(host)
    assert len(ucas) == 4
    merged = ucas[0]
    assert merged.id == "CA-1-not_provided"
    assert merged.context == "idle"
    assert merged.hazards == {"H-1"}
    assert merged.status == "confirmed"
    bare = ucas[1]
    assert bare.context == ""
    assert bare.hazards == frozenset()
    assert bare.status == "candidate"
    assert all(u.label == "act" for u in ucas)


def test_enumerate_rejects_invalid_model():
    model = ControlStructureModel.from_items(
        name="broken", lifecycle=LifecyclePhase.OPERATIONS
    )
    with pytest.raises(InvalidModel):
        enumerate_ucas(model)


@settings(max_examples=100, deadline=None)
@given(model=models())
def test_enumeration_is_exhaustive_and_ordered(model):
    ucas = enumerate_ucas(model)
    assert len(ucas) == 4 * len(model.control_actions)
    ids = [u.id for u in ucas]
    assert len(set(ids)) == len(ids)
    keys = [(u.control_action, u.uca_type.rank) for u in ucas]
    assert keys == sorted(keys)


# --- constraint derivation -----------------------------------------------------


def test_derive_constraint_texts(host):
    confirmed = [u for u in enumerate_ucas(host) if u.is_confirmed]
    drafts = derive_constraints(confirmed)
    assert len(drafts) == 1
    draft = drafts[0]
    assert draft.id == "SC-CA-1-not_provided"
    assert draft.text == "act must be provided when idle"
    assert draft.mitigates == {"H-1"}
    assert draft.enforced_by == {"CA-1"}


def test_derive_constraint_covers_every_template(fixture_model):
    confirmed = [u for u in enumerate_ucas(fixture_model) if u.is_confirmed]
    drafts = derive_constraints(confirmed)
    texts = {d.id: d.text for d in drafts}
    label = "Push upgrades to the AI agent"
    assert texts["SC-CA-1-not_provided"].startswith(f"{label} must be provided when ")
    assert texts["SC-CA-1-provided_causes_hazard"].startswith(
        f"{label} must not be provided when "
    )
    assert texts["SC-CA-1-wrong_time_or_order"].startswith(
        f"{label} must be provided at the correct time/order relative to "
    )
    assert texts["SC-CA-1-wrong_duration"].startswith(
        f"{label} must be applied for the correct duration given "
    )


def test_derive_rejects_unconfirmed(host):
    ucas = enumerate_ucas(host)
    with pytest.raises(UnconfirmedUca):
        derive_constraints(ucas)


# --- classification -------------------------------------------------------------


@pytest.mark.parametrize(
    "kind,expected",
    [
        (ComponentKind.CONTROLLER, ScenarioType.TYPE_A_UNSAFE_CONTROL_ACTION),
        (ComponentKind.SENSOR, ScenarioType.TYPE_A_UNSAFE_CONTROL_ACTION),
        (ComponentKind.ACTUATOR, ScenarioType.TYPE_B_IMPROPER_EXECUTION),
        (ComponentKind.CONTROLLED_PROCESS, ScenarioType.TYPE_B_IMPROPER_EXECUTION),
    ],
)
def test_classify_by_loop_position(kind, expected):
    scenario_type, menu = classify_scenario(kind, {CausalFactorType.DELAY})
    assert scenario_type is expected
    assert menu == list(SUBTYPES_FOR_TYPE[expected])


def test_classify_rejects_environment():
    with pytest.raises(UnknownComponentKind):
        classify_scenario(ComponentKind.ENVIRONMENT, {CausalFactorType.DELAY})


def test_classify_rejects_empty_factors():
    with pytest.raises(ValueError):
        classify_scenario(ComponentKind.CONTROLLER, set())


# --- catalog matching ------------------------------------------------------------


def test_match_catalog_ranking(bundled_catalog):
    drafted = scenario(
        factors={
            CausalFactorType.FLAWED_PROCESS_MODEL,
            CausalFactorType.INADEQUATE_OPERATION_OF_CONTROLLED_PROCESS,
        },
        chars={AiCharacteristic.AGENCY},
    )
    ranked = [e.id for e in match_catalog(drafted, bundled_catalog)]
    assert ranked == ["A3-11", "A3-15", "B4-07", "B4-11", "B4-12", "B4-08", "B4-10"]


def test_match_requires_characteristic_overlap(bundled_catalog):
    drafted = scenario(factors={CausalFactorType.FLAWED_PROCESS_MODEL})
    assert match_catalog(drafted, bundled_catalog) == []


def test_match_requires_matching_origin(bundled_catalog):
    drafted = scenario(
        factors={CausalFactorType.DELAY},
        chars={AiCharacteristic.SPEED_ASYMMETRY},
        origin="C",
        kind=ComponentKind.CONTROLLER,
        scenario_type=ScenarioType.TYPE_A_UNSAFE_CONTROL_ACTION,
        sub_types=frozenset({ScenarioSubType.CA_NOT_PROVIDED}),
        uca="CA-1-not_provided",
    )
    assert all(
        e.origin_component is ComponentKind.CONTROLLER
        for e in match_catalog(drafted, bundled_catalog)
    )


# --- pathway tracing --------------------------------------------------------------


def stage_kinds(pathway: Pathway) -> list[StageKind]:
    return [stage.kind for stage in pathway.stages]


def test_trace_full_feedback_loop(host):
    drafted = scenario(
        factors={
            CausalFactorType.INADEQUATE_OPERATION_OF_CONTROLLED_PROCESS,
            CausalFactorType.FEEDBACK_INCORRECT_MISSING_DELAYED,
            CausalFactorType.FLAWED_PROCESS_MODEL,
        },
        scenario_type=ScenarioType.TYPE_A_UNSAFE_CONTROL_ACTION,
        sub_types=frozenset({ScenarioSubType.CA_NOT_PROVIDED}),
        origin="C",
        kind=ComponentKind.CONTROLLER,
        uca="CA-1-not_provided",
    )
    pathway = trace_pathway(drafted, host)
    assert stage_kinds(pathway) == [
        StageKind.CONTROLLED_PROCESS,
        StageKind.SENSOR,
        StageKind.PROCESS_MODEL_DEFECT,
        StageKind.CONTROL_ACTION_SIGNAL,
        StageKind.HAZARD,
        StageKind.LOSS,
    ]
    annotations = [stage.annotation for stage in pathway.stages]
    assert annotations == [
        "inadequate_operation_of_controlled_process",
        "feedback_incorrect_missing_delayed",
        "flawed_process_model",
        "",
        "H-1",
        "L-1, L-2",
    ]
    assert pathway.scenario == "S-X"


def test_trace_deception_marks_the_process(host):
    drafted = scenario(
        factors={
            CausalFactorType.FEEDBACK_INCORRECT_MISSING_DELAYED,
            CausalFactorType.FLAWED_PROCESS_MODEL,
        },
        chars={AiCharacteristic.DECEPTION},
    )
    pathway = trace_pathway(drafted, host)
    first = pathway.stages[0]
    assert first.kind is StageKind.CONTROLLED_PROCESS
    assert first.annotation == "deception"


def test_trace_actuator_only_skips_signal_stage(host):
    pathway = trace_pathway(scenario(factors={CausalFactorType.DELAY}), host)
    assert stage_kinds(pathway) == [
        StageKind.ACTUATOR,
        StageKind.HAZARD,
        StageKind.LOSS,
    ]
    assert pathway.stages[0].annotation == "delay"
    assert pathway.stages[1].annotation == ""
    assert pathway.stages[2].annotation == ""


def test_trace_algorithm_defect_emits_signal_stage(host):
    pathway = trace_pathway(
        scenario(factors={CausalFactorType.INADEQUATE_CONTROL_ALGORITHM}), host
    )
    assert stage_kinds(pathway) == [
        StageKind.CONTROL_ALGORITHM_DEFECT,
        StageKind.CONTROL_ACTION_SIGNAL,
        StageKind.HAZARD,
        StageKind.LOSS,
    ]


def test_trace_groups_factors_per_stage(host):
    pathway = trace_pathway(
        scenario(
            factors={
                CausalFactorType.FLAWED_PROCESS_MODEL,
                CausalFactorType.INCOMPLETE_PROCESS_MODEL,
            }
        ),
        host,
    )
    assert pathway.stages[0].annotation == (
        "flawed_process_model, incomplete_process_model"
    )


def test_trace_unknown_origin(host):
    drafted = scenario(factors={CausalFactorType.DELAY}, origin="Ghost")
    with pytest.raises(DanglingReference):
        trace_pathway(drafted, host)


def test_trace_unresolvable_uca(host):
    drafted = scenario(
        factors={CausalFactorType.DELAY},
        scenario_type=ScenarioType.TYPE_A_UNSAFE_CONTROL_ACTION,
        sub_types=frozenset({ScenarioSubType.CA_NOT_PROVIDED}),
        origin="C",
        kind=ComponentKind.CONTROLLER,
        uca="CA-9-not_provided",
    )
    with pytest.raises(DanglingReference):
        trace_pathway(drafted, host)


def test_pathway_constructor_guards():
    with pytest.raises(ValueError):
        Pathway(scenario="S-X", stages=())
    with pytest.raises(ValueError):
        Pathway(
            scenario="S-X", stages=(PathwayStage(StageKind.CONTROLLED_PROCESS),)
        )
    with pytest.raises(ValueError):
        Pathway(
            scenario="S-X",
            stages=(
                PathwayStage(StageKind.CONTROLLER),
                PathwayStage(StageKind.SENSOR),
                PathwayStage(StageKind.LOSS),
            ),
        )
    with pytest.raises(ValueError):
        Pathway(
            scenario="S-X",
            stages=(
                PathwayStage(StageKind.HAZARD),
                PathwayStage(StageKind.HAZARD),
            ),
        )


_TYPE_B_SUBS = st.frozensets(
    st.sampled_from(sorted(SUBTYPES_FOR_TYPE[ScenarioType.TYPE_B_IMPROPER_EXECUTION], key=lambda s: s.rank)),
    min_size=1,
)
_FACTOR_SETS = st.frozensets(
    st.sampled_from(sorted(CausalFactorType, key=lambda f: f.rank)), min_size=1
)
_CHAR_SETS = st.frozensets(st.sampled_from(sorted(AiCharacteristic, key=lambda c: c.rank)))


@settings(max_examples=300, deadline=None)
@given(factors=_FACTOR_SETS, chars=_CHAR_SETS, subs=_TYPE_B_SUBS)
def test_trace_always_walks_loop_order(host, factors, chars, subs):
    pathway = trace_pathway(
        scenario(factors=factors, chars=chars, sub_types=subs), host
    )
    ranks = [stage.kind.rank for stage in pathway.stages]
    assert ranks == sorted(set(ranks))
    assert pathway.stages[-1].kind is StageKind.LOSS
    has_controller_defect = any(
        stage.kind
        in (StageKind.PROCESS_MODEL_DEFECT, StageKind.CONTROL_ALGORITHM_DEFECT)
        for stage in pathway.stages
    )
    has_signal = any(
        stage.kind is StageKind.CONTROL_ACTION_SIGNAL for stage in pathway.stages
    )
    assert has_signal == has_controller_defect


# --- degradation ledger --------------------------------------------------------------


UTC = timezone.utc
T0 = datetime(2026, 1, 1, 9, 0, tzinfo=UTC)


def record(record_id="V-1", component="P", severity=RecordSeverity.LOW, **overrides):
    fields = dict(
        id=record_id,
        description="sensor sampling gap",
        component=component,
        severity=severity,
        opened_at=T0,
        source=LedgerSource.AUDIT,
    )
    fields.update(overrides)
    return VulnerabilityRecord(**fields)


def test_ledger_anchors_to_model(host):
    ledger = Ledger.for_model(host)
    assert ledger.model_fingerprint == model_fingerprint(host)
    assert ledger.components == {"C", "P"}
    assert len(ledger) == 0


def test_register_is_functional(host):
    empty = Ledger.for_model(host)
    one = ledger_register(empty, record())
    assert len(empty) == 0
    assert len(one) == 1
    assert one["V-1"].description == "sensor sampling gap"
    with pytest.raises(KeyError):
        one["V-9"]


def test_register_duplicate_id(host):
    ledger = ledger_register(Ledger.for_model(host), record())
    with pytest.raises(DuplicateId):
        ledger_register(ledger, record())


def test_register_unknown_component(host):
    with pytest.raises(UnknownComponent):
        ledger_register(Ledger.for_model(host), record(component="Ghost"))


def test_resolve_closes_record(host):
    ledger = ledger_register(Ledger.for_model(host), record())
    closed = ledger_resolve(ledger, "V-1", T0 + timedelta(days=2))
    assert closed["V-1"].closed_at == T0 + timedelta(days=2)
    assert ledger["V-1"].closed_at is None


def test_resolve_unknown_record(host):
    with pytest.raises(UnknownRecord):
        ledger_resolve(Ledger.for_model(host), "V-1", T0)


def test_resolve_twice_fails(host):
    ledger = ledger_register(Ledger.for_model(host), record())
    ledger = ledger_resolve(ledger, "V-1", T0 + timedelta(days=1))
    with pytest.raises(ValueError):
        ledger_resolve(ledger, "V-1", T0 + timedelta(days=2))


def test_close_before_open_fails(host):
    ledger = ledger_register(Ledger.for_model(host), record())
    with pytest.raises(ValueError):
        ledger_resolve(ledger, "V-1", T0 - timedelta(days=1))


def test_naive_timestamps_rejected():
    with pytest.raises(ValueError):
        record(opened_at=datetime(2026, 1, 1))


def test_timestamps_normalize_to_utc():
    offset = timezone(timedelta(hours=2))
    rec = record(opened_at=datetime(2026, 1, 1, 12, 0, tzinfo=offset))
    assert rec.opened_at == datetime(2026, 1, 1, 10, 0, tzinfo=UTC)
    assert rec.opened_at.tzinfo == UTC


def test_is_open_boundaries():
    rec = record(closed_at=T0 + timedelta(days=1))
    assert rec.is_open(T0)
    assert not rec.is_open(T0 - timedelta(seconds=1))
    assert rec.is_open(T0 + timedelta(hours=23))
    assert not rec.is_open(T0 + timedelta(days=1))


def test_exposure_summary(host):
    ledger = Ledger.for_model(host)
    ledger = ledger_register(ledger, record("V-1", "P", RecordSeverity.LOW))
    ledger = ledger_register(ledger, record("V-2", "P", RecordSeverity.HIGH))
    ledger = ledger_register(ledger, record("V-3", "C", RecordSeverity.MEDIUM))
    ledger = ledger_resolve(ledger, "V-2", T0 + timedelta(days=1))
    later = T0 + timedelta(days=7)
    assert ledger_exposure(ledger, later) == {
        "open_count": 2,
        "weighted": 4,
        "by_component": {"C": ["V-3"], "P": ["V-1"]},
    }
    before_resolution = T0 + timedelta(hours=1)
    assert ledger_exposure(ledger, before_resolution)["weighted"] == 13


def test_severity_weights():
    assert [s.weight for s in RecordSeverity] == [1, 3, 9]


def test_ledger_save_load_round_trip(host, tmp_path):
    ledger = Ledger.for_model(host)
    ledger = ledger_register(ledger, record("V-1", "P", RecordSeverity.HIGH))
    ledger = ledger_register(
        ledger, record("V-2", "C", source=LedgerSource.INCIDENT)
    )
    ledger = ledger_resolve(ledger, "V-1", T0 + timedelta(days=3))
    path = tmp_path / "ledger.jsonl"
    ledger_save(ledger, path)
    loaded = ledger_load(path, host)
    assert loaded.records == ledger.records
    assert loaded.model_fingerprint == ledger.model_fingerprint
    assert len(path.read_text(encoding="utf-8").splitlines()) == 2


def test_ledger_load_validates_components(host, tmp_path):
    import json

    path = tmp_path / "ledger.jsonl"
    payload = {
        "id": "V-1",
        "description": "d",
        "component": "Ghost",
        "severity": "low",
        "opened_at": T0.isoformat(),
        "closed_at": None,
        "source": "audit",
    }
    path.write_text(json.dumps(payload) + "\n", encoding="utf-8")
    with pytest.raises(UnknownComponent):
        ledger_load(path, host)
