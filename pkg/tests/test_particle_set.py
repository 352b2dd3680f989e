import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from particlekit import ParticleSet, StaleReferenceError, Variable, create, write_snapshot


def make(n=0, dim=2):
    return ParticleSet(n, dim=dim, variables=[Variable("velocity")])


def test_create_empty():
    ps = make(0)
    assert len(ps) == 0
    assert ps.positions.shape == (0, 2)


def test_create_assigns_ids_and_alive():
    ps = make(3)
    assert ps.ids.tolist() == [0, 1, 2]
    assert ps.alive.all()


def test_create_hundred():
    ps = create(100, dim=2, variables=[Variable("velocity")])
    assert ps.count == 100
    assert len(set(ps.ids.tolist())) == 100


def test_zero_initialized():
    ps = make(4)
    assert np.array_equal(ps.get("velocity", 2), [0.0, 0.0])
    assert np.array_equal(ps.positions, np.zeros((4, 2)))


def test_create_negative_count():
    with pytest.raises(ValueError):
        make(-1)


def test_push_onto_empty():
    ps = make()
    ref = ps.push(position=[0.1, 0.2])
    assert len(ps) == 1
    assert ref.id == 0
    assert ref.index == 0
    assert ps.get("alive", 0) is True


def test_push_after_create():
    ps = make(3)
    ref = ps.push()
    assert ref.id == 3
    assert len(ps) == 4
    assert ref.index == 3


def test_push_erase_push_gives_fresh_id():
    # counter: 0 -> push id 0 (counter 1) -> erase -> push id 1
    ps = make()
    first = ps.push().id
    ps.erase(0)
    second = ps.push().id
    assert (first, second) == (0, 1)


def test_push_values_and_unknown_variable():
    ps = make()
    ps.push(position=[0.5, 0.25], velocity=[1.0, -1.0])
    assert np.array_equal(ps.get("velocity", 0), [1.0, -1.0])
    with pytest.raises(KeyError):
        ps.push(mass=1.0)


def test_push_grows_past_capacity():
    ps = make()
    for k in range(50):
        ps.push(position=[k, 0.0])
    assert ps.positions[:, 0].tolist() == list(range(50))


def test_erase_last():
    ps = make(1)
    ps.erase(0)
    assert len(ps) == 0


def test_erase_middle_keeps_others():
    ps = make(3)
    ps.erase(1)
    assert sorted(ps.ids.tolist()) == [0, 2]


def test_erase_out_of_range():
    ps = make(2)
    with pytest.raises(IndexError):
        ps.erase(2)
    with pytest.raises(IndexError):
        ps.get("id", 2)


def test_read_your_write():
    ps = make(3)
    ps.set("position", 1, [0.3, 0.7])
    assert np.array_equal(ps.get("position", 1), [0.3, 0.7])


def test_get_id():
    assert make(5).get("id", 2) == 2


def test_ids_are_read_only_through_set():
    with pytest.raises(ValueError):
        make(2).set("id", 0, 7)


def test_ref_reads_and_writes_arrays():
    ps = make(2)
    ref = ps[1]
    ref["velocity"] = [2.0, 3.0]
    assert np.array_equal(ps.array("velocity")[1], [2.0, 3.0])
    ps.array("velocity")[1] = [4.0, 5.0]
    assert np.array_equal(ref["velocity"], [4.0, 5.0])


def test_ref_goes_stale_after_structural_change():
    ps = make(3)
    ref = ps[0]
    ps.push()
    with pytest.raises(StaleReferenceError):
        ref["position"]
    ref = ps[0]
    ps.erase(2)
    with pytest.raises(StaleReferenceError):
        ref.id


def test_permute_moves_all_variables():
    ps = make(3)
    ps.array("velocity")[:, 0] = [10.0, 11.0, 12.0]
    ps.permute([2, 0, 1])
    assert ps.ids.tolist() == [2, 0, 1]
    assert ps.array("velocity")[:, 0].tolist() == [12.0, 10.0, 11.0]


def test_structure_of_arrays_layout():
    ps = make(10)
    vel = ps.array("velocity")
    assert vel.shape == (10, 2)
    assert vel.flags.c_contiguous
    assert ps.ids.shape == (10,)


def test_duplicate_variable_rejected():
    with pytest.raises(ValueError):
        ParticleSet(1, variables=[Variable("position")])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["push", "erase"]), st.integers(0, 1000)), max_size=40),
       st.integers(0, 5))
def test_random_op_sequences_keep_invariants(ops, n0):
    ps = make(n0)
    ps.array("velocity")[:, 0] = ps.ids
    expected = {i: float(i) for i in range(n0)}
    issued = set(range(n0))
    for op, k in ops:
        if op == "push" or len(ps) == 0:
            ref = ps.push(velocity=[float(k), 0.0])
            assert ref.id not in issued
            issued.add(ref.id)
            expected[ref.id] = float(k)
        else:
            i = k % len(ps)
            del expected[ps.get("id", i)]
            ps.erase(i)
        lengths = {len(ps.array(name)) for name in ps.variable_names}
        assert lengths == {len(ps)}
        assert len(set(ps.ids.tolist())) == len(ps)
    # erase never alters a survivor's values
    got = dict(zip(ps.ids.tolist(), ps.array("velocity")[:, 0].tolist()))
    assert got == expected


def test_snapshot_format():
    ps = make(2)
    ps.positions[:] = [[0.5, 0.25], [0.1, 0.2]]
    ps.array("velocity")[:] = [[1.0, 0.0], [0.0, -1.0]]
    ps.permute([1, 0])
    fh = io.StringIO()
    assert write_snapshot(fh, ps, 7) == 2
    assert fh.getvalue() == (
        "step,id,x,y,vx,vy\n"
        "7,0,0.5,0.25,1,0\n"
        "7,1,0.10000000000000001,0.20000000000000001,0,-1\n"
    )


def test_snapshot_skips_dead_and_roundtrips():
    ps = make(3, dim=1)
    ps.positions[:, 0] = [1 / 3, 2 / 3, 0.0]
    ps.alive[2] = False
    fh = io.StringIO()
    write_snapshot(fh, ps, 0)
    lines = fh.getvalue().splitlines()
    assert lines[0] == "step,id,x,vx"
    assert len(lines) == 3
    assert float(lines[1].split(",")[2]) == 1 / 3
