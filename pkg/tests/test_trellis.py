import pickle

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcqfeedback import ContractError
from tcqfeedback.trellis import (
    bits_to_inputs,
    build_8psk_trellis,
    build_qpsk_trellis,
    conv_encode,
    get_trellis,
    inputs_to_bits,
    transitions,
)

from oracles import enumerate_paths

TRELLISES = [build_qpsk_trellis(), build_8psk_trellis()]


@pytest.fixture(params=TRELLISES, ids=lambda t: t.name)
def trellis(request):
    return request.param


def test_outgoing_transitions_are_complete_and_distinct(trellis):
    for s in range(trellis.num_states):
        edges = transitions(trellis, s)
        assert len(edges) == 2 ** trellis.bits_per_stage
        assert sorted(v for v, _, _ in edges) == list(range(trellis.branches))
        assert len({sym for _, sym, _ in edges}) == len(edges)


def test_strongly_connected(trellis):
    for start in range(trellis.num_states):
        seen, frontier = {start}, [start]
        while frontier:
            s = frontier.pop()
            for _, _, nxt in trellis.transitions(s):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        assert seen == set(range(trellis.num_states))


def test_every_state_has_equal_in_degree(trellis):
    counts = np.bincount(trellis.next_state.ravel(), minlength=trellis.num_states)
    assert np.all(counts == trellis.branches)
    assert trellis.incoming.shape == (trellis.num_states, trellis.branches)


def test_qpsk_subset_partition():
    t = build_qpsk_trellis()
    for s in (0, 2):
        assert {sym for _, sym, _ in t.transitions(s)} == {0, 2}
    for s in (1, 3):
        assert {sym for _, sym, _ in t.transitions(s)} == {1, 3}


def test_8psk_states_emit_cosets():
    # each state emits a whole parity coset so stage distances stay balanced
    t = build_8psk_trellis()
    for s in range(8):
        syms = sorted(sym for _, sym, _ in t.transitions(s))
        assert len({x % 2 for x in syms}) == 1


def test_qpsk_transitions_listing():
    t = build_qpsk_trellis()
    assert [(v, sym) for v, sym, _ in transitions(t, 0)] == [(0, 0), (1, 2)]
    assert [(v, sym) for v, sym, _ in transitions(t, 2)] == [(0, 2), (1, 0)]
    assert transitions(t, 0)[0][2] == 0
    assert transitions(t, 0)[1][2] == 1
    with pytest.raises(ContractError):
        transitions(t, 4)


def test_qpsk_two_step_symbol_pairs_from_zero():
    t = build_qpsk_trellis()
    pairs = sorted(tuple(s) for _, s in enumerate_paths(t, 2))
    assert pairs == [(0, 0), (0, 2), (2, 1), (2, 3)]


def test_qpsk_three_stage_paths_by_terminal_state():
    # the eight stage-3 paths grouped by the state they end in
    t = build_qpsk_trellis()
    by_state = {}
    for inputs, syms in enumerate_paths(t, 3):
        state = 0
        for v in inputs:
            state = t.next_state[state, v]
        by_state.setdefault(int(state), []).append(syms)
    assert [0, 0, 0] in by_state[0]
    assert [2, 1, 2] in by_state[0]
    assert [2, 3, 1] in by_state[3]
    assert all(len(v) == 2 for v in by_state.values())


@pytest.mark.parametrize(
    "bits, symbols",
    [([1, 0, 0], [2, 1, 2]), ([0, 0, 0], [0, 0, 0]), ([1, 1, 1], [2, 3, 1])],
)
def test_qpsk_encode_examples(bits, symbols):
    assert conv_encode(build_qpsk_trellis(), bits).tolist() == symbols


def test_zero_bits_give_zero_symbols(trellis):
    M = 17
    bits = np.zeros(M * trellis.bits_per_stage, dtype=np.int64)
    assert not conv_encode(trellis, bits).any()


def test_8psk_feedback_budget():
    t = build_8psk_trellis()
    M = 10
    assert conv_encode(t, np.ones(2 * M, dtype=int)).shape == (M,)
    with pytest.raises(ContractError):
        conv_encode(t, np.ones(2 * M + 1, dtype=int))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(TRELLISES), st.lists(st.integers(0, 1), min_size=0, max_size=40))
def test_encode_matches_table_walk(trellis, raw):
    bps = trellis.bits_per_stage
    bits = np.array(raw[: len(raw) - len(raw) % bps], dtype=np.int64)
    state, expected = 0, []
    for v in bits_to_inputs(bits, bps).tolist():
        expected.append(int(trellis.out_symbol[state, v]))
        state = int(trellis.next_state[state, v])
    assert conv_encode(trellis, bits).tolist() == expected


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.lists(st.integers(0, 7), max_size=30))
def test_bits_inputs_roundtrip(bps, values):
    inputs = np.array([v % (1 << bps) for v in values], dtype=np.int64)
    bits = inputs_to_bits(inputs, bps)
    assert bits.size == inputs.size * bps
    assert np.array_equal(bits_to_inputs(bits, bps), inputs)


def test_inputs_are_msb_first():
    assert bits_to_inputs([1, 0, 0, 1], 2).tolist() == [2, 1]


def test_batched_encode_matches_rows(trellis):
    rng = np.random.default_rng(1)
    bits = rng.integers(0, 2, size=(5, 12 * trellis.bits_per_stage))
    batch = conv_encode(trellis, bits)
    for row, out in zip(bits, batch):
        assert np.array_equal(conv_encode(trellis, row), out)


def test_trellis_is_immutable_and_picklable(trellis):
    with pytest.raises(ValueError):
        trellis.next_state[0, 0] = 1
    clone = pickle.loads(pickle.dumps(trellis))
    assert clone is trellis
    assert get_trellis(trellis.name) is trellis


def test_unknown_trellis_name():
    with pytest.raises(ContractError):
        get_trellis("16qam")
