"""How a register packs value, sequence number and reader bits in one word.

Reader bits occupy the low positions.  Above them value bits sit at even
offsets and sequence-number bits at odd offsets, so both fields can grow
without a fixed split.

Run: python3 demos/codec.py
"""

from __future__ import annotations

from auditreg import BOTTOM
from auditreg.codec import ValueTable, WordCodec

codec = WordCodec(2)
word = codec.encode(5, 3, (1, 0))
print(f"value 5, sn 3, bits (1,0) with 2 readers -> {word} = {word:#b}")
print(f"decoded: {codec.decode(word)}")
print()

print("value / sn bit positions above 2 reader bits:")
for v, sn in ((1, 0), (0, 1), (2, 0), (0, 2)):
    w = codec.encode(v, sn)
    print(f"  value {v} sn {sn} -> {w:#010b}")
print()

plain = WordCodec(2, with_sn=False)
print(f"without sn field: value 7 -> {plain.encode(7)} ({plain.encode(7):#b})")
print()

table = ValueTable(BOTTOM)
print("values are stored as codes; the empty initial value takes code 0:")
for v in (table.value(0), 1, 2):
    print(f"  {v!r} -> code {table.code(v)}")
