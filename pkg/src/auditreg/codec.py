"""Packing of (value, sequence number, reader bits) into one integer word.

Reader bits occupy positions ``0..n-1``.  Above them sit the value code and,
when the layout carries one, the sequence number, interleaved bit by bit:
value bits at even offsets, sequence-number bits at odd offsets.  Without a
sequence number the word is simply ``value * 2**n + bits``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

from .history import BOTTOM

__all__ = ["ValueTable", "WordCodec", "deinterleave", "interleave"]


def interleave(even: int, odd: int) -> int:
    """Spread ``even`` over the even bit offsets and ``odd`` over the odd ones."""
    if even < 0 or odd < 0:
        raise ValueError("interleave expects nonnegative integers")
    out = 0
    pos = 0
    while even or odd:
        out |= (even & 1) << pos
        out |= (odd & 1) << (pos + 1)
        even >>= 1
        odd >>= 1
        pos += 2
    return out


def deinterleave(word: int) -> tuple[int, int]:
    even = odd = 0
    pos = 0
    while word:
        even |= (word & 1) << pos
        odd |= ((word >> 1) & 1) << pos
        word >>= 2
        pos += 1
    return even, odd


@dataclass(frozen=True)
class WordCodec:
    n: int
    with_sn: bool = True

    def encode(self, value: int, sn: int = 0, bits: Sequence[int] | None = None) -> int:
        if value < 0 or sn < 0:
            raise ValueError("value code and sequence number must be nonnegative")
        if not self.with_sn and sn:
            raise ValueError("layout has no sequence number field")
        low = self._pack_bits(bits)
        high = interleave(value, sn) if self.with_sn else value
        return (high << self.n) | low

    def _pack_bits(self, bits: Sequence[int] | None) -> int:
        if bits is None:
            return 0
        if len(bits) != self.n:
            raise ValueError(f"expected {self.n} reader bits, got {len(bits)}")
        low = 0
        for i, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError(f"reader bit {i} is {b!r}")
            low |= b << i
        return low

    def decode(self, word: int) -> tuple[int, int, tuple[int, ...]]:
        return self.get_value(word), self.get_sn(word), self.get_bits(word)

    def _high(self, word: int) -> int:
        if word < 0:
            raise ValueError(f"malformed word {word}")
        return word >> self.n

    def get_value(self, word: int) -> int:
        high = self._high(word)
        return deinterleave(high)[0] if self.with_sn else high

    def get_sn(self, word: int) -> int:
        if not self.with_sn:
            return 0
        return deinterleave(self._high(word))[1]

    def get_bits(self, word: int) -> tuple[int, ...]:
        return tuple((word >> i) & 1 for i in range(self.n))

    def get_bit(self, word: int, i: int = 0) -> int:
        return (word >> i) & 1


class ValueTable:
    """Injective mapping between register value tokens and integer codes.

    Nonnegative integers encode as themselves.  When the register starts at
    BOTTOM, BOTTOM takes code 0 and every integer is shifted up by one.
    """

    def __init__(self, initial: Any) -> None:
        self.shift = 1 if initial is BOTTOM else 0
        self.code(initial)

    def code(self, value: Any) -> int:
        if value is BOTTOM:
            if not self.shift:
                raise ValueError("BOTTOM is not encodable on this register")
            return 0
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise TypeError(f"word-encoded registers hold nonnegative integers, got {value!r}")
        return value + self.shift

    def value(self, code: int) -> Any:
        if self.shift and code == 0:
            return BOTTOM
        return code - self.shift
