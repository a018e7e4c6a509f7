"""Straight-line programs with memory: instruction set, evaluator, builder.

A program runs over a fixed memory of ``b`` slots (the quota), numbered from 1.
There are four instructions::

    m<k> <- m<i>            Copy
    m<k> <- m<i> * m<j>     Mul
    m<k> <- inv m<i>        Inv
    show <i1>,<i2>,...      Show

The evaluator works over any group whose elements support ``*``,
``inverse()`` and ``identity_like()``.  Program length counts only Mul and Inv;
copies are free relabellings and Show performs no group operation.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

__all__ = [
    "Copy",
    "Mul",
    "Inv",
    "Show",
    "Program",
    "ProgramStats",
    "ParseError",
    "SlotBuilder",
    "evaluate",
    "concat",
    "serialize",
    "parse",
    "emit_commutator",
    "emit_power",
    "emit_powers",
    "input_slots",
]


class GroupElement(Protocol):
    def __mul__(self, other): ...

    def inverse(self): ...

    def identity_like(self): ...


@dataclass(frozen=True, slots=True)
class Copy:
    dst: int
    src: int


@dataclass(frozen=True, slots=True)
class Mul:
    dst: int
    lhs: int
    rhs: int


@dataclass(frozen=True, slots=True)
class Inv:
    dst: int
    src: int


@dataclass(frozen=True, slots=True)
class Show:
    slots: tuple[int, ...]


Instruction = Copy | Mul | Inv | Show


def _refs(ins) -> tuple[int, ...]:
    t = type(ins)
    if t is Mul:
        return (ins.dst, ins.lhs, ins.rhs)
    if t is Show:
        return ins.slots
    return (ins.dst, ins.src)


@dataclass(frozen=True)
class ProgramStats:
    length: int
    copies: int
    shows: int
    quota: int
    peak_slots: int

    def record(self, **extra) -> str:
        items = {
            "length": self.length,
            "copies": self.copies,
            "shows": self.shows,
            "quota": self.quota,
            "peak_slots": self.peak_slots,
            **extra,
        }
        return "".join(f"{k}={v}\n" for k, v in items.items())


@dataclass(frozen=True)
class Program:
    """A b-MSLP plus the (d, p, f, modulus) it is meant to be evaluated over.

    Header fields are 0 for programs not tied to a matrix group.
    """

    quota: int
    instructions: tuple = ()
    d: int = 0
    p: int = 0
    f: int = 0
    modulus: int = 0

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if self.quota < 1:
            raise ValueError("memory quota must be positive")
        for n, ins in enumerate(self.instructions, 1):
            for k in _refs(ins):
                if not 1 <= k <= self.quota:
                    raise ValueError(f"instruction {n} references slot {k} outside 1..{self.quota}")

    @property
    def header(self) -> tuple[int, int, int, int]:
        return (self.d, self.p, self.f, self.modulus)

    @property
    def length(self) -> int:
        return sum(1 for ins in self.instructions if type(ins) is Mul or type(ins) is Inv)

    def __len__(self) -> int:
        return len(self.instructions)

    def stats(self) -> ProgramStats:
        copies = shows = 0
        used = set()
        for ins in self.instructions:
            t = type(ins)
            if t is Copy:
                copies += 1
            elif t is Show:
                shows += 1
            used.update(_refs(ins))
        return ProgramStats(
            length=len(self.instructions) - copies - shows,
            copies=copies,
            shows=shows,
            quota=self.quota,
            peak_slots=len(used),
        )


def header_for(field, d: int) -> dict:
    return dict(d=d, p=field.p, f=field.f, modulus=field.packed_modulus)


# -- evaluation -------------------------------------------------------------------


def evaluate(program: Program, memory: list, s: int | None = None, t: int | None = None):
    """Run instructions s..t (1-based, inclusive) of ``program`` on ``memory``.

    ``memory`` is mutated in place.  With ``s = t = 0`` the result is a
    one-element list holding the identity.  Otherwise the result is the
    element written by instruction t, or the list of shown elements if
    instruction t is a Show.  By default the whole program is run.
    """
    n = len(program.instructions)
    if s is None and t is None:
        s, t = (1, n) if n else (0, 0)
    if len(memory) != program.quota:
        raise ValueError(f"memory has {len(memory)} slots, program quota is {program.quota}")
    if s == 0 and t == 0:
        return [memory[0].identity_like()]
    if not (1 <= s <= t <= n):
        raise IndexError(f"need 1 <= s <= t <= {n}, got s={s}, t={t}")
    M = memory
    for ins in program.instructions[s - 1 : t]:
        k = type(ins)
        if k is Mul:
            M[ins.dst - 1] = M[ins.lhs - 1] * M[ins.rhs - 1]
        elif k is Inv:
            M[ins.dst - 1] = M[ins.src - 1].inverse()
        elif k is Copy:
            M[ins.dst - 1] = M[ins.src - 1]
    last = program.instructions[t - 1]
    if type(last) is Show:
        return [M[i - 1] for i in last.slots]
    return M[last.dst - 1]


def input_slots(program: Program) -> list[int]:
    """Slots whose initial contents the program reads."""
    written = set()
    inputs = []
    for ins in program.instructions:
        t = type(ins)
        if t is Mul:
            reads = (ins.lhs, ins.rhs)
        elif t is Show:
            reads = ins.slots
        else:
            reads = (ins.src,)
        for r in reads:
            if r not in written and r not in inputs:
                inputs.append(r)
        if t is not Show:
            written.add(ins.dst)
    return sorted(inputs)


def concat(first: Program, second: Program) -> Program:
    """Run ``first`` then ``second`` over a shared memory of max(b1, b2) slots."""
    h1, h2 = first.header, second.header
    if h1 != h2 and any(h1) and any(h2):
        raise ValueError(f"header mismatch: {h1} vs {h2}")
    head = h1 if any(h1) else h2
    return Program(
        max(first.quota, second.quota),
        first.instructions + second.instructions,
        *head,
    )


# -- text format --------------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def _fmt(ins) -> str:
    t = type(ins)
    if t is Mul:
        return f"m{ins.dst} <- m{ins.lhs} * m{ins.rhs}"
    if t is Inv:
        return f"m{ins.dst} <- inv m{ins.src}"
    if t is Copy:
        return f"m{ins.dst} <- m{ins.src}"
    return "show " + ",".join(map(str, ins.slots))


def serialize(program: Program) -> str:
    lines = [
        "MSLP v1",
        f"b={program.quota} d={program.d} p={program.p} f={program.f} mod={program.modulus}",
    ]
    lines.extend(_fmt(ins) for ins in program.instructions)
    return "\n".join(lines) + "\n"


_SLOT = r"m([1-9]\d*)"
_MUL_RE = re.compile(rf"^{_SLOT}\s*<-\s*{_SLOT}\s*\*\s*{_SLOT}$")
_INV_RE = re.compile(rf"^{_SLOT}\s*<-\s*inv\s+{_SLOT}$")
_COPY_RE = re.compile(rf"^{_SLOT}\s*<-\s*{_SLOT}$")
_SHOW_RE = re.compile(r"^show(?:\s+([1-9]\d*(?:\s*,\s*[1-9]\d*)*))?$")
_HEAD_RE = re.compile(r"^b=(\d+)\s+d=(\d+)\s+p=(\d+)\s+f=(\d+)\s+mod=(\d+)$")


def parse(text: str) -> Program:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line))
    if not lines or lines[0][1] != "MSLP v1":
        raise ParseError(lines[0][0] if lines else 1, "missing 'MSLP v1' magic line")
    if len(lines) < 2:
        raise ParseError(lines[0][0], "missing header line")
    lineno, head = lines[1]
    m = _HEAD_RE.match(head)
    if not m:
        raise ParseError(lineno, f"malformed header {head!r}")
    b, d, p, f, mod = map(int, m.groups())
    instructions = []
    for lineno, line in lines[2:]:
        if mm := _MUL_RE.match(line):
            ins = Mul(*map(int, mm.groups()))
        elif mm := _INV_RE.match(line):
            ins = Inv(*map(int, mm.groups()))
        elif mm := _COPY_RE.match(line):
            ins = Copy(*map(int, mm.groups()))
        elif mm := _SHOW_RE.match(line):
            body = mm.group(1)
            ins = Show(tuple(int(x) for x in body.split(",")) if body else ())
        else:
            raise ParseError(lineno, f"cannot parse instruction {line!r}")
        bad = [k for k in _refs(ins) if k > b]
        if bad:
            raise ParseError(lineno, f"slot m{bad[0]} exceeds quota b={b}")
        instructions.append(ins)
    try:
        return Program(b, instructions, d, p, f, mod)
    except ValueError as exc:
        raise ParseError(lines[1][0], str(exc)) from None


# -- program construction ---------------------------------------------------------------


class SlotBuilder:
    """Incrementally emits a program while handing out memory slots.

    Slots ``1..reserved`` hold the program inputs.  Scratch slots are
    allocated lowest-index first, so the highest slot ever handed out equals
    the largest number of slots simultaneously in use.
    """

    def __init__(self, reserved: int = 0):
        self.instructions: list = []
        self.length = 0  # Mul + Inv emitted so far
        self.reserved = reserved
        self.high = reserved
        self._next = reserved + 1
        self._free: list[int] = []
        self._owner: dict[int, str] = {}

    # slot management

    def alloc(self, name: str = "") -> int:
        if self._free:
            slot = heapq.heappop(self._free)
        else:
            slot = self._next
            self._next += 1
        self._owner[slot] = name
        if slot > self.high:
            self.high = slot
        return slot

    def free(self, *slots: int) -> None:
        for slot in slots:
            if slot in self._owner:
                del self._owner[slot]
                heapq.heappush(self._free, slot)
            elif 1 <= slot <= self.reserved:
                # an input slot whose contents are no longer needed
                heapq.heappush(self._free, slot)
            else:
                raise ValueError(f"slot {slot} is not allocated")

    def owner(self, slot: int) -> str | None:
        return self._owner.get(slot)

    @property
    def live(self) -> int:
        return self.reserved + len(self._owner) - sum(1 for s in self._free if s <= self.reserved)

    # emission

    def copy(self, dst: int, src: int) -> None:
        if dst != src:
            self.instructions.append(Copy(dst, src))

    def mul(self, dst: int, lhs: int, rhs: int) -> None:
        self.instructions.append(Mul(dst, lhs, rhs))
        self.length += 1

    def inv(self, dst: int, src: int) -> None:
        self.instructions.append(Inv(dst, src))
        self.length += 1

    def show(self, *slots: int) -> None:
        self.instructions.append(Show(tuple(slots)))

    def program(self, d: int = 0, p: int = 0, f: int = 0, modulus: int = 0) -> Program:
        return Program(max(self.high, 1), self.instructions, d, p, f, modulus)


def emit_commutator(B: SlotBuilder, a: int, b: int, dst: int) -> None:
    """Leave [m_a, m_b] = m_a^-1 m_b^-1 m_a m_b in ``dst`` (4 instructions)."""
    if dst in (a, b):
        raise ValueError(f"commutator destination m{dst} collides with an operand")
    B.mul(dst, b, a)
    B.inv(dst, dst)
    B.mul(dst, dst, a)
    B.mul(dst, dst, b)


def emit_powers(
    B: SlotBuilder,
    src: int,
    exponents: Sequence[int],
    dsts: Sequence[int],
    sq: int | None = None,
    accumulate: bool = False,
) -> None:
    """Right-to-left binary powering of m_src to several exponents at once.

    One slot (``sq``) carries the square chain g, g^2, g^4, ...; each
    destination accumulates the squares selected by its exponent's bits.  With
    ``accumulate`` the destinations already hold values X and end up holding
    X * g^e instead of g^e.  Zero exponents must be handled by the caller
    unless ``accumulate`` is set.
    """
    if len(exponents) != len(dsts):
        raise ValueError("one destination per exponent")
    if any(e < 0 for e in exponents):
        raise ValueError("exponents must be non-negative")
    if not accumulate and any(e == 0 for e in exponents):
        raise ValueError("zero exponent without an identity to copy")
    top = max((e.bit_length() - 1 for e in exponents if e), default=-1)
    if top < 0:
        return
    own_sq = sq is None and top >= 1
    if own_sq:
        sq = B.alloc("square")
    state = ["none"] * len(dsts)
    cur = src
    for k in range(top + 1):
        if k:
            B.mul(sq, cur, cur)
            cur = sq
        for n, (e, dst) in enumerate(zip(exponents, dsts)):
            if not (e >> k) & 1:
                continue
            if accumulate:
                B.mul(dst, dst, cur)
            elif state[n] == "none":
                if cur == src:
                    state[n] = "src"
                else:
                    B.copy(dst, cur)
                    state[n] = "acc"
            elif state[n] == "src":
                B.mul(dst, src, cur)
                state[n] = "acc"
            else:
                B.mul(dst, cur, dst)
    for n, dst in enumerate(dsts):
        if state[n] == "src":
            B.copy(dst, src)
    if own_sq:
        B.free(sq)


def emit_power(
    B: SlotBuilder,
    src: int,
    exponent: int,
    dst: int,
    sq: int | None = None,
    accumulate: bool = False,
    identity: int | None = None,
) -> None:
    """Emit m_dst = m_src ** exponent (or m_dst * m_src ** exponent).

    Uses at most 2 * floor(log2 |exponent|) multiplications, plus one
    inversion for negative exponents.  A zero exponent copies from the
    ``identity`` slot, if one is given.
    """
    if exponent == 0:
        if accumulate:
            return
        if identity is None:
            raise ValueError("zero exponent needs an identity slot")
        B.copy(dst, identity)
        return
    if exponent < 0:
        if accumulate:
            raise ValueError("negative exponent cannot accumulate")
        emit_powers(B, src, [-exponent], [dst], sq=sq)
        B.inv(dst, dst)
        return
    emit_powers(B, src, [exponent], [dst], sq=sq, accumulate=accumulate)
