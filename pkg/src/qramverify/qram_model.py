"""Program model for lowered hybrid quantum/classical programs.

A program is an ordered sequence of processes.  Each process carries one
quantum instruction, a quantum memory snapshot, one classical
instruction, a classical memory snapshot, and a stack of control
predicates.  Memories are persistent values: the four memory operations
return new memories and never mutate their input.

Versioning follows single-assignment form: a variable's register is
(name, size, version) and every write bumps the version, so any two
snapshots can be compared structurally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import AbsentVariable, DuplicateVariable

if TYPE_CHECKING:
    from .gate_algebra import SymbolicMatrix


# --- registers and memories ---

@dataclass(frozen=True)
class Register:
    name: str
    size: int
    version: int

    def render(self) -> str:
        return f"({self.name},{self.size},{self.version})"


@dataclass(frozen=True)
class Memory:
    """Insertion-ordered map from variable name to register.

    The order records first-initialisation time, which fixes the wire
    layout of the joint quantum state: the earliest variable occupies
    the most significant block of the joint basis index.
    """

    tag: str
    regs: tuple[Register, ...] = ()

    def get(self, name: str) -> Register | None:
        for r in self.regs:
            if r.name == name:
                return r
        return None

    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.regs)

    def __contains__(self, name: str) -> bool:
        return self.get(name) is not None

    def render(self) -> str:
        label = "Mq" if self.tag == "quantum" else "Mc"
        inner = ", ".join(f"{r.name}:{r.render()}" for r in self.regs)
        return f"{label}{{{inner}}}"


def empty_memory(tag: str) -> Memory:
    return Memory(tag)


def mem_add(m: Memory, name: str, size: int, version: int = 0) -> Memory:
    """Bind a fresh variable, at version 0 unless the name has history.

    A name's versions are unique across the whole program run, so when a
    measured quantum variable re-enters the classical store its version
    continues from where the quantum register left off; the caller
    passes that continuation version explicitly.
    """
    if name in m:
        raise DuplicateVariable(f"variable {name!r} already bound in {m.tag} memory")
    return Memory(m.tag, m.regs + (Register(name, size, version),))


def mem_iter(m: Memory, name: str) -> Memory:
    """Advance an existing variable to its next version in place."""
    old = m.get(name)
    if old is None:
        raise AbsentVariable(f"variable {name!r} not bound in {m.tag} memory")
    regs = tuple(
        Register(r.name, r.size, r.version + 1) if r.name == name else r
        for r in m.regs
    )
    return Memory(m.tag, regs)


def mem_amend(m: Memory, name: str, size: int, version: int | None = None) -> Memory:
    """Write a variable: bump its version if bound, else bind it fresh.

    `version` only applies to the fresh-bind case, for names whose
    version history continues from the other store (see mem_add).
    """
    if name in m:
        regs = tuple(
            Register(r.name, size, r.version + 1) if r.name == name else r
            for r in m.regs
        )
        return Memory(m.tag, regs)
    return Memory(m.tag, m.regs + (Register(name, size, version or 0),))


def mem_del(m: Memory, name: str) -> Memory:
    """Drop a variable from the memory."""
    if name not in m:
        raise AbsentVariable(f"variable {name!r} not bound in {m.tag} memory")
    return Memory(m.tag, tuple(r for r in m.regs if r.name != name))


# --- operation expressions ---
#
# Operands of classical writes and of control predicates.  A Unary whose
# operator is not "not" applies the named oracle to its operand.

@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    a: "Operand"


@dataclass(frozen=True)
class Binary:
    left: "Operand"
    op: str
    right: "Operand"


Operand = Const | VarRef | Unary | Binary

#: Operators a control predicate may use.
CONTROL_OPS = ("not", "<=", "<", "==", "and")

#: Operators a classical write may use, beyond the control set.
VALUE_OPS = ("+", "-", "*", "mod")


def render_op(o: Operand) -> str:
    if isinstance(o, Const):
        return str(o.value)
    if isinstance(o, VarRef):
        return o.name
    if isinstance(o, Unary):
        return f"UNARY({o.op},{render_op(o.a)})"
    if isinstance(o, Binary):
        return f"BINARY({render_op(o.left)},{o.op},{render_op(o.right)})"
    raise TypeError(f"not an operand: {o!r}")


@dataclass(frozen=True)
class CtrlInstr:
    """A control predicate plus its classification.

    classical=True means the predicate reads classical memory only;
    otherwise it reads quantum memory only.  Mixed predicates are
    rejected by the type checker before lowering.
    """

    expr: Operand
    classical: bool

    def negated(self) -> "CtrlInstr":
        return CtrlInstr(Unary("not", self.expr), self.classical)

    def render(self) -> str:
        return render_op(self.expr)


# --- instructions ---

@dataclass(frozen=True)
class Skip:
    def render(self) -> str:
        return "SKIP"


SKIP = Skip()


@dataclass(frozen=True)
class QInit:
    var: str
    size: int
    value: int

    def render(self) -> str:
        return f"QINIT({self.var},{self.size},{self.value})"


@dataclass(frozen=True)
class QOp:
    u: "SymbolicMatrix"
    var: str

    def render(self) -> str:
        return f"QOP({self.u.label},{self.var})"


@dataclass(frozen=True)
class QMeas:
    var: str

    def render(self) -> str:
        return f"QMEAS({self.var})"


@dataclass(frozen=True)
class CSet:
    var: str
    size: int
    value: Operand

    def render(self) -> str:
        return f"CSET({self.var},{self.size},{render_op(self.value)})"


@dataclass(frozen=True)
class CMeas:
    var: str

    def render(self) -> str:
        return f"CMEAS({self.var})"


@dataclass(frozen=True)
class Return:
    var: str

    def render(self) -> str:
        return f"RETURN({self.var})"


QInst = Skip | QInit | QOp | QMeas
CInst = Skip | CSet | CMeas | Return


@dataclass(frozen=True)
class QramProcess:
    q: QInst
    mem_q: Memory
    c: CInst
    mem_c: Memory
    controls: tuple[CtrlInstr, ...] = ()

    def render(self) -> str:
        g = ", ".join(c.render() for c in self.controls)
        return " | ".join([
            self.q.render(),
            self.mem_q.render(),
            self.c.render(),
            self.mem_c.render(),
            f"G[{g}]",
        ])


QramProgram = tuple[QramProcess, ...]


def dump_program(p: Sequence[QramProcess]) -> str:
    return "\n".join(proc.render() for proc in p)


# --- wire layout of the joint quantum state ---

@dataclass(frozen=True)
class Layout:
    """Wire assignment of a quantum memory snapshot.

    Registers are listed earliest-initialised first.  The joint basis
    index packs variable values with the earliest variable in the most
    significant bits; within one variable, bit i has weight 2**i.
    """

    regs: tuple[Register, ...]

    @staticmethod
    def from_memory(m: Memory) -> "Layout":
        return Layout(m.regs)

    @property
    def total_qubits(self) -> int:
        return sum(r.size for r in self.regs)

    @property
    def dim(self) -> int:
        return 1 << self.total_qubits

    def register(self, name: str) -> Register:
        for r in self.regs:
            if r.name == name:
                return r
        raise AbsentVariable(f"variable {name!r} not in layout")

    def offset(self, name: str) -> int:
        """Bit position of the variable's least significant wire."""
        seen = False
        off = 0
        for r in reversed(self.regs):
            if r.name == name:
                seen = True
                break
            off += r.size
        if not seen:
            raise AbsentVariable(f"variable {name!r} not in layout")
        return off

    def wires(self, name: str) -> range:
        r = self.register(name)
        off = self.offset(name)
        return range(off, off + r.size)

    def value(self, name: str, joint_index: int) -> int:
        r = self.register(name)
        return (joint_index >> self.offset(name)) & ((1 << r.size) - 1)

    def without(self, name: str) -> "Layout":
        self.register(name)
        return Layout(tuple(r for r in self.regs if r.name != name))

    def compose(self, name: str, outcome: int, residual_index: int) -> int:
        """Joint index with `name` set to `outcome` and the remaining
        variables taken from an index into the layout without `name`."""
        rest = self.without(name)
        joint = outcome << self.offset(name)
        for r in rest.regs:
            v = rest.value(r.name, residual_index)
            joint |= v << self.offset(r.name)
        return joint

    def basis_name(self, joint_index: int) -> str:
        parts = [
            f"{r.name}{self.value(r.name, joint_index)}v{r.version}"
            for r in self.regs
        ]
        return "|".join(parts)


# --- validation ---

@dataclass(frozen=True)
class Violation:
    index: int
    rule: str
    message: str

    def render(self) -> str:
        return f"process {self.index}: [{self.rule}] {self.message}"


def _memory_step(before: Memory, after: Memory) -> str | None:
    """Check two snapshots differ by at most one memory operation.

    Returns an error message, or None when the step is legal.
    """
    old = {r.name: r for r in before.regs}
    new = {r.name: r for r in after.regs}
    added = [n for n in new if n not in old]
    removed = [n for n in old if n not in new]
    changed = [n for n in new if n in old and new[n] != old[n]]
    ops = len(added) + len(removed) + len(changed)
    if ops > 1:
        return (
            f"{before.tag} memory changed by {ops} operations "
            f"(added {added}, removed {removed}, changed {changed})"
        )
    # An added variable may carry any starting version: a measured
    # variable keeps counting from its quantum versions when it enters
    # classical memory, so only in-place steps are pinned to +1.
    for n in changed:
        if new[n].version != old[n].version + 1:
            return (
                f"{before.tag} variable {n!r} stepped from version "
                f"{old[n].version} to {new[n].version}"
            )
    return None


def validate_program(p: Sequence[QramProcess]) -> list[Violation]:
    """Check the structural invariants of a lowered program.

    Three rule families are enforced: the one-instruction rule (at most
    one non-SKIP instruction per process, except a measurement pair),
    the measurement pairing rule (QMEAS and CMEAS occur together), and
    the memory adjacency rule (consecutive processes' snapshots differ
    by at most one memory operation per memory).
    """
    out: list[Violation] = []
    for i, proc in enumerate(p):
        q_active = not isinstance(proc.q, Skip)
        c_active = not isinstance(proc.c, Skip)
        if isinstance(proc.q, QMeas) or isinstance(proc.c, CMeas):
            if not (isinstance(proc.q, QMeas) and isinstance(proc.c, CMeas)):
                out.append(Violation(i, "pairing", "QMEAS and CMEAS must occur together"))
        elif q_active and c_active:
            out.append(Violation(
                i, "one-instruction",
                f"both instructions active: {proc.q.render()} and {proc.c.render()}",
            ))

    for i in range(1, len(p)):
        pairs = (
            (p[i - 1].mem_q, p[i].mem_q),
            (p[i - 1].mem_c, p[i].mem_c),
        )
        for before, after in pairs:
            msg = _memory_step(before, after)
            if msg is not None:
                out.append(Violation(i, "memory-adjacency", msg))
    return out
