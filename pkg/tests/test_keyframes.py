from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracecraft.detective import EncodedObservation, FrameTrack, KeyframeConfig, extract_keyframes
from tracecraft.tiles import TileKind
from tracecraft.world import SIZE

_MASK = np.zeros((SIZE, SIZE), dtype=bool)

_PLAIN = np.zeros((SIZE, SIZE), dtype=np.int16)
_PLAIN[30:39, 30:39] = int(TileKind.grass) + 1

_TRACED = _PLAIN.copy()
_TRACED[31, 31] = int(TileKind.tree_cut) + 1

_FRAME_PLAIN = EncodedObservation(_PLAIN, _MASK, (34, 34))
_FRAME_TRACE = EncodedObservation(_TRACED, _MASK, (34, 34))


def _track(flags: list[bool]) -> FrameTrack:
    return FrameTrack(frames=[_FRAME_TRACE if f else _FRAME_PLAIN for f in flags])


def test_spec_window_10_to_70_k30():
    flags = [False] * 100
    flags[10] = True
    flags[70] = True
    out = extract_keyframes(_track(flags), KeyframeConfig(k=30))
    assert len(out) == 30
    assert out == [int(10 + i * 60 / 29 + 0.5) for i in range(30)]
    assert out[0] == 10 and out[-1] == 70
    assert all(b > a for a, b in zip(out, out[1:]))


def test_short_window_returns_all_frames():
    flags = [False] * 20
    for i in range(8, 13):  # window of 5
        flags[i] = True
    out = extract_keyframes(_track(flags), KeyframeConfig(k=30))
    assert out == [8, 9, 10, 11, 12]


def test_traceless_track_yields_empty():
    assert extract_keyframes(_track([False] * 15)) == []


def test_single_trace_frame():
    flags = [False] * 9
    flags[4] = True
    assert extract_keyframes(_track(flags)) == [4]


def test_default_k_is_30():
    assert KeyframeConfig().k == 30
    with pytest.raises(ValueError):
        KeyframeConfig(k=0)


@settings(max_examples=300, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=400),
    k=st.integers(min_value=1, max_value=60),
    data=st.data(),
)
def test_keyframe_contract_fuzz(n, k, data):
    flags = data.draw(st.lists(st.booleans(), min_size=n, max_size=n))
    out = extract_keyframes(_track(flags), KeyframeConfig(k=k))
    if not any(flags):
        assert out == []
        return
    first = flags.index(True)
    last = n - 1 - flags[::-1].index(True)
    window = last - first + 1
    assert len(out) == min(k, window)
    assert all(b > a for a, b in zip(out, out[1:]))
    assert all(first <= i <= last for i in out)  # endpoints inside the window
    if k >= 2 or window == 1:
        assert out[0] == first and out[-1] == last
