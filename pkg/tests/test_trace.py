import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsmrepair.lang import Vec2
from rsmrepair.trace import (
    Trace,
    TraceElement,
    TraceError,
    load,
    record_step,
    save,
)


def _mk_trace(attacker, tau5, n=1):
    inputs, vars_, state = tau5
    trace = Trace.for_fn(attacker)
    for _ in range(n):
        record_step(trace, inputs, vars_, state)
    return trace


def test_record_step_appends(attacker, tau5):
    trace = _mk_trace(attacker, tau5)
    assert len(trace) == 1
    assert trace[0].t == 0
    assert trace[0].state == "GOTO"


def test_record_step_timesteps(attacker, tau5):
    trace = _mk_trace(attacker, tau5, n=5)
    assert [e.t for e in trace] == [0, 1, 2, 3, 4]


def test_record_step_missing_input(attacker, tau5):
    inputs, vars_, state = tau5
    trace = Trace.for_fn(attacker)
    partial = {k: v for k, v in inputs.items() if k != "time"}
    with pytest.raises(TraceError, match="time"):
        record_step(trace, partial, vars_, state)


def test_roundtrip_golden_element(attacker, tau5, tmp_path):
    trace = _mk_trace(attacker, tau5)
    path = tmp_path / "golden.trace.jsonl"
    save(trace, path)
    loaded = load(path, expect=attacker)
    assert loaded.elements() == trace.elements()
    assert loaded[0].inputs["ballLoc"] == Vec2(30.0, 40.0)


def test_roundtrip_empty(attacker, tmp_path):
    trace = Trace.for_fn(attacker)
    path = tmp_path / "empty.trace.jsonl"
    save(trace, path)
    assert len(load(path)) == 0


def test_truncated_line_reports_lineno(attacker, tau5, tmp_path):
    trace = _mk_trace(attacker, tau5, n=3)
    path = tmp_path / "t.trace.jsonl"
    save(trace, path)
    text = path.read_text().splitlines()
    text[-1] = text[-1][: len(text[-1]) // 2]
    path.write_text("\n".join(text) + "\n")
    with pytest.raises(TraceError, match=":4:"):
        load(path)


def test_hash_mismatch(attacker, tau5, tmp_path):
    from rsmrepair import load_corpus
    trace = _mk_trace(attacker, tau5)
    path = tmp_path / "t.trace.jsonl"
    save(trace, path)
    with pytest.raises(TraceError, match="mismatch"):
        load(path, expect=load_corpus("docker"))


def test_slicing_preserves_elements(attacker, tau5):
    inputs, vars_, _ = tau5
    trace = Trace.for_fn(attacker)
    states = ["START", "GOTO", "GOTO", "KICK", "KICK", "END"]
    for s in states:
        record_step(trace, inputs, vars_, s)
    sub = trace[2:5]
    for i in range(len(sub)):
        assert sub[i] == trace[2 + i]


_values = st.one_of(
    st.floats(allow_nan=False, allow_infinity=False, width=64),
    st.booleans(),
    st.builds(Vec2, st.floats(allow_nan=False, allow_infinity=False, width=64),
              st.floats(allow_nan=False, allow_infinity=False, width=64)),
)

_elements = st.builds(
    lambda inputs, vars_, state: (inputs, vars_, state),
    st.dictionaries(st.from_regex(r"[a-z][a-z0-9]{0,6}", fullmatch=True), _values,
                    max_size=4),
    st.dictionaries(st.from_regex(r"[a-z][a-z0-9]{0,6}", fullmatch=True), _values,
                    max_size=3),
    st.sampled_from(["A", "B", "C"]),
)


@pytest.fixture(scope="module")
def roundtrip_path(tmp_path_factory):
    return tmp_path_factory.mktemp("rt") / "x.trace.jsonl"


@given(st.lists(_elements, max_size=6))
@settings(max_examples=1000, deadline=None)
def test_roundtrip_random(roundtrip_path, steps):
    trace = Trace("fuzz", "0" * 16)
    for inputs, vars_, state in steps:
        record_step(trace, inputs, vars_, state)
    save(trace, roundtrip_path)
    loaded = load(roundtrip_path)
    assert loaded.elements() == trace.elements()
    assert loaded.fn_name == "fuzz"
