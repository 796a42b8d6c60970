import numpy as np
import pytest

from src.errors import ParameterError
from src.randomness import (
    MarkKind,
    ReplicaAccumulator,
    StreamKey,
    StreamRole,
    UniformBuffer,
    derive_stream,
    lazy_marks,
    poisson_marks,
    site_stream,
)


def test_same_key_same_draws(key):
    a = derive_stream(key).random(10)
    b = derive_stream(StreamKey(master_seed=12345)).random(10)
    assert np.array_equal(a, b)


def test_replica_role_and_layer_change_the_stream(key):
    base = derive_stream(key).random(5)
    assert not np.array_equal(base, derive_stream(key.for_replica(1)).random(5))
    assert not np.array_equal(base, derive_stream(key.with_role(StreamRole.DUAL_MARKS)).random(5))
    assert not np.array_equal(base, derive_stream(key.with_role(StreamRole.FORWARD_MARKS, layer=3)).random(5))


def test_with_role_keeps_layer():
    key = StreamKey(master_seed=1, layer=4)
    assert key.with_role(StreamRole.DUAL_MARKS).layer == 4


def test_site_streams_are_distinct_per_site_and_kind(key):
    a = site_stream(key, -1, 0).random(3)
    b = site_stream(key, 1, 0).random(3)
    c = site_stream(key, -1, 1).random(3)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.array_equal(a, site_stream(key, -1, 0).random(3))


def test_seed_must_fit_64_bits():
    with pytest.raises(ParameterError):
        StreamKey(master_seed=2 ** 64)
    with pytest.raises(ParameterError):
        StreamKey(master_seed=-1)


def test_poisson_marks_sorted_inside_horizon(key):
    marks = poisson_marks(derive_stream(key), 3.0, 10.0, site=2, kind=MarkKind.LEAK)
    assert marks.site == 2 and marks.kind == MarkKind.LEAK
    assert np.all(np.diff(marks.times) > 0.0)
    assert marks.times.size == 0 or (marks.times[0] >= 0.0 and marks.times[-1] <= 10.0)


def test_zero_rate_gives_no_marks(key):
    assert len(poisson_marks(derive_stream(key), 0.0, 10.0)) == 0
    assert list(lazy_marks(derive_stream(key), 0.0, 10.0)) == []


def test_negative_rate_rejected(key):
    with pytest.raises(ParameterError):
        poisson_marks(derive_stream(key), -1.0, 1.0)


def test_poisson_mark_count_matches_rate(key):
    counts = [len(poisson_marks(derive_stream(key.for_replica(r)), 2.0, 5.0)) for r in range(400)]
    # mean 10, standard error of the mean about 0.16
    assert abs(np.mean(counts) - 10.0) < 1.0


def test_lazy_marks_increasing(key):
    times = list(lazy_marks(derive_stream(key), 1.5, 20.0))
    assert all(b > a for a, b in zip(times, times[1:]))
    assert all(0.0 <= t <= 20.0 for t in times)


def test_uniform_buffer_reproducible(key):
    a = UniformBuffer(derive_stream(key), block=4)
    b = UniformBuffer(derive_stream(key), block=16)
    assert [a.uniform() for _ in range(10)] == [b.uniform() for _ in range(10)]


def test_array_handoff_keeps_the_sequence(key):
    plain = UniformBuffer(derive_stream(key), block=8)
    expected = [plain.uniform() for _ in range(20)]

    buffer = UniformBuffer(derive_stream(key), block=8)
    first = [buffer.uniform() for _ in range(3)]
    values = buffer.take_array()
    assert len(values) == 5 + 8
    buffer.give_back(values[4:])
    rest = [buffer.uniform() for _ in range(13)]
    assert first + list(values[:4]) + rest == expected


def test_accumulator_is_order_independent():
    forward = ReplicaAccumulator()
    forward.extend([(0, 1.0), (1, 2.0), (2, 4.0)])
    backward = ReplicaAccumulator()
    backward.extend([(2, 4.0), (0, 1.0), (1, 2.0)])
    assert forward.mean() == backward.mean()
    assert forward.variance() == backward.variance()


def test_accumulator_rejects_duplicate_replica():
    acc = ReplicaAccumulator()
    acc.add(0, 1.0)
    with pytest.raises(KeyError):
        acc.add(0, 2.0)
