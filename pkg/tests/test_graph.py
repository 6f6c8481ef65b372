"""Property-graph store behavior: mutation, lookup, indexes, freezing."""

from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cekg.errors import EmptyLabelSet, FrozenGraph, UnknownEdge, UnknownNode
from cekg.graph import PropertyGraph


def small_graph() -> PropertyGraph:
    g = PropertyGraph()
    g.add_node(["Event"], {"event_id": "E1", "activity": "A"})
    g.add_node(["Event"], {"event_id": "E2", "activity": "B"})
    g.add_node(["Entity"], {"entity_type": "PATIENT", "entity_id": "P1"})
    g.add_edge("CORR", 0, 2)
    g.add_edge("CORR", 1, 2)
    g.add_edge("DF", 0, 1, {"entity_type": "PATIENT", "entity_id": "P1"})
    return g


def test_ids_are_dense_and_sequential():
    g = small_graph()
    assert [n.id for n in g.nodes()] == [0, 1, 2]
    assert [e.id for e in g.edges()] == [0, 1, 2]
    assert g.node_count == 3
    assert g.edge_count == 3


def test_labels_deduplicate_preserving_order():
    g = PropertyGraph()
    node_id = g.add_node(["Entity", "Entity", "Extra"], {})
    assert g.node(node_id).labels == ("Entity", "Extra")
    assert g.node(node_id).label() == "Entity"


def test_empty_label_set_rejected():
    g = PropertyGraph()
    with pytest.raises(EmptyLabelSet):
        g.add_node([], {})


def test_edge_endpoints_must_exist():
    g = PropertyGraph()
    g.add_node(["Event"], {"event_id": "E1"})
    with pytest.raises(UnknownNode):
        g.add_edge("CORR", 0, 99)
    with pytest.raises(UnknownNode):
        g.add_edge("CORR", 7, 0)


def test_unknown_lookups_raise():
    g = small_graph()
    with pytest.raises(UnknownNode):
        g.node(17)
    with pytest.raises(UnknownEdge):
        g.edge(17)


def test_match_nodes_by_label_and_predicate():
    g = small_graph()
    assert g.match_nodes("Event") == [0, 1]
    assert g.match_nodes("Event", {"event_id": "E2"}) == [1]
    assert g.match_nodes("Event", {"activity": "A"}) == [0]
    assert g.match_nodes("Event", {"event_id": "E9"}) == []
    assert g.match_nodes("Nope") == []
    # indexed key narrows but label still filters
    g2 = PropertyGraph()
    g2.add_node(["Entity"], {"entity_id": "X"})
    g2.add_node(["Other"], {"entity_id": "X"})
    assert g2.match_nodes("Entity", {"entity_id": "X"}) == [0]


def test_match_nodes_with_unindexed_predicate_key():
    g = PropertyGraph()
    g.add_node(["Entity"], {"entity_type": "PATIENT", "entity_id": "P1"})
    g.add_node(["Entity"], {"entity_type": "ADMISSION", "entity_id": "A1"})
    assert g.match_nodes("Entity", {"entity_type": "ADMISSION"}) == [1]


def test_adjacent_directions_and_order():
    g = small_graph()
    assert g.adjacent(2, "CORR", "in") == [(0, 0), (1, 1)]
    assert g.adjacent(0, "CORR", "out") == [(0, 2)]
    assert g.adjacent(0, "DF", "out") == [(2, 1)]
    assert g.adjacent(1, "DF", "in") == [(2, 0)]
    assert g.adjacent(2, "DF", "out") == []
    with pytest.raises(ValueError):
        g.adjacent(0, "CORR", "sideways")


def test_counts_are_sorted_by_key():
    g = small_graph()
    assert list(g.label_counts()) == ["Entity", "Event"]
    assert g.label_counts() == {"Entity": 1, "Event": 2}
    assert list(g.edge_type_counts()) == ["CORR", "DF"]
    assert g.edge_type_counts() == {"CORR": 2, "DF": 1}


def test_freeze_blocks_all_mutation():
    g = small_graph()
    g.freeze()
    assert g.frozen
    with pytest.raises(FrozenGraph):
        g.add_node(["Event"], {})
    with pytest.raises(FrozenGraph):
        g.add_edge("DF", 0, 1)
    with pytest.raises(FrozenGraph):
        g.set_property(0, "activity", "Z")
    # reads still work
    assert g.node_count == 3
    assert g.match_nodes("Event") == [0, 1]


def test_set_property_updates_value_index():
    g = PropertyGraph()
    g.add_node(["Class"], {"activity": "A", "display_label": "A"})
    g.set_property(0, "display_label", "Acme procedure")
    assert g.node(0).properties["display_label"] == "Acme procedure"
    g.set_property(0, "activity", "B")
    assert g.match_nodes("Class", {"activity": "B"}) == [0]
    assert g.match_nodes("Class", {"activity": "A"}) == []
    assert g.audit() == []


def test_datetime_properties_normalize_to_utc_milliseconds():
    g = PropertyGraph()
    eastern = timezone(timedelta(hours=-5))
    aware = datetime(2024, 3, 1, 7, 0, 0, 123456, tzinfo=eastern)
    naive = datetime(2024, 3, 1, 12, 0, 0, 999999)
    g.add_node(["Event"], {"event_id": "E1", "timestamp": aware})
    g.add_node(["Event"], {"event_id": "E2", "timestamp": naive})
    first = g.node(0).properties["timestamp"]
    second = g.node(1).properties["timestamp"]
    assert first.tzinfo == timezone.utc
    assert first == datetime(2024, 3, 1, 12, 0, 0, 123000, tzinfo=timezone.utc)
    assert second == datetime(2024, 3, 1, 12, 0, 0, 999000, tzinfo=timezone.utc)


def test_bool_properties_stay_bool():
    g = PropertyGraph()
    g.add_node(["SNOMEDConcept"], {"concept_id": "1", "active": True})
    value = g.node(0).properties["active"]
    assert value is True


def test_unsupported_property_type_rejected():
    g = PropertyGraph()
    with pytest.raises(TypeError):
        g.add_node(["Event"], {"event_id": ["a", "list"]})


def test_audit_clean_on_fresh_graph():
    assert small_graph().audit() == []


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_random_operation_sequences_keep_audit_clean(data):
    g = PropertyGraph()
    labels = st.sampled_from(["Event", "Entity", "Class", "Other"])
    names = st.sampled_from(["event_id", "entity_id", "activity", "misc"])
    values = st.one_of(st.text(max_size=5), st.integers(-5, 5), st.booleans())
    for _ in range(data.draw(st.integers(1, 25))):
        if g.node_count == 0 or data.draw(st.booleans()):
            props = data.draw(st.dictionaries(names, values, max_size=3))
            g.add_node([data.draw(labels)], props)
        else:
            source = data.draw(st.integers(0, g.node_count - 1))
            target = data.draw(st.integers(0, g.node_count - 1))
            g.add_edge(data.draw(st.sampled_from(["CORR", "DF", "X"])), source, target)
    assert g.audit() == []
    for label in ("Event", "Entity", "Class", "Other"):
        expected = [n.id for n in g.nodes() if label in n.labels]
        assert g.match_nodes(label) == expected
