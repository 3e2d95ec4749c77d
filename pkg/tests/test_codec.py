from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from auditreg.codec import ValueTable, WordCodec, deinterleave, interleave
from auditreg.history import BOTTOM

from helpers import naive_encode


def test_a4_initial_word():
    codec = WordCodec(2, with_sn=False)
    assert codec.encode(7) == 28
    assert codec.get_value(29) == 7
    assert codec.get_bits(29) == (1, 0)


def test_zero():
    for codec in (WordCodec(1), WordCodec(3), WordCodec(2, with_sn=False)):
        assert codec.encode(0, 0, None) == 0


def test_a5_fresh_word_bit_clear():
    codec = WordCodec(1)
    assert codec.get_bit(codec.encode(5, 3, (0,))) == 0


def test_interleave_small():
    # value 0b11 at even offsets, sn 0b01 at odd offsets
    assert interleave(0b11, 0b01) == 0b0111
    assert deinterleave(0b0111) == (0b11, 0b01)


def test_bad_inputs():
    codec = WordCodec(2)
    with pytest.raises(ValueError):
        codec.encode(1, 0, (1,))
    with pytest.raises(ValueError):
        codec.encode(1, 0, (2, 0))
    with pytest.raises(ValueError):
        codec.encode(-1)
    with pytest.raises(ValueError):
        WordCodec(2, with_sn=False).encode(1, 1)
    with pytest.raises(ValueError):
        codec.get_value(-3)


@pytest.mark.parametrize("n,with_sn", [(2, False), (1, True), (3, True)])
@given(data=st.data())
def test_round_trip_against_naive(n, with_sn, data):
    v = data.draw(st.integers(0, 2**20))
    sn = data.draw(st.integers(0, 2**12)) if with_sn else 0
    bits = tuple(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
    codec = WordCodec(n, with_sn=with_sn)
    word = codec.encode(v, sn, bits)
    assert word == naive_encode(n, with_sn, v, sn, bits)
    assert codec.decode(word) == (v, sn, bits)
    assert word % 2**n == sum(b << i for i, b in enumerate(bits))


def test_value_table():
    t = ValueTable(7)
    assert t.code(7) == 7 and t.value(3) == 3
    with pytest.raises(ValueError):
        t.code(BOTTOM)
    b = ValueTable(BOTTOM)
    assert b.code(BOTTOM) == 0 and b.value(0) is BOTTOM
    assert b.code(4) == 5 and b.value(5) == 4
    with pytest.raises(TypeError):
        b.code("x")
