"""Group families and their elements.

Three families are supported: free groups of finite rank (elements are
reduced words), ZPow (free abelian groups Z^k, elements are integer
vectors), and FiniteTable (an explicit multiplication table).  Elements
are canonical and hashable so that equal group elements compare equal
bitwise, which the group-ring layer relies on for coefficient maps.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import StructuralError

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

_LETTERS = string.ascii_lowercase


class GroupSpec:
    """Base class for a supported group family.

    Subclasses implement the group law on canonical element payloads.
    Instances are immutable and safe to share across threads.
    """

    kind = "abstract"

    # -- element construction -------------------------------------------------

    def element(self, payload) -> "GroupElement":
        """Build a GroupElement from a raw payload, canonicalizing it."""
        return GroupElement(self, self._canonical(payload))

    @property
    def identity(self) -> "GroupElement":
        raise NotImplementedError

    def generators(self) -> list["GroupElement"]:
        """A canonical generating set (used as the default in defect scans)."""
        raise NotImplementedError

    # -- group law on canonical payloads --------------------------------------

    def _canonical(self, payload):
        raise NotImplementedError

    def _multiply(self, a, b):
        raise NotImplementedError

    def _inverse(self, a):
        raise NotImplementedError

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        raise NotImplementedError

    def element_to_json(self, g: "GroupElement"):
        raise NotImplementedError

    def element_from_json(self, obj) -> "GroupElement":
        raise NotImplementedError


@dataclass(frozen=True, slots=True)
class GroupElement:
    """A canonical group element: a reduced word, an integer vector, or a table index."""

    group: GroupSpec
    key: tuple | int

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return group_multiply(self, other)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.group, self.group._inverse(self.key))

    def __repr__(self):
        return f"<{self.group.kind}:{self.group.element_to_json(self)!r}>"


def group_multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    """Product ab in canonical form (reduced for free groups).

    Raises StructuralError if the two elements belong to different groups.
    """
    if a.group != b.group:
        raise StructuralError("elements belong to different groups")
    return GroupElement(a.group, a.group._multiply(a.key, b.key))


def group_inverse(a: GroupElement) -> GroupElement:
    return a.inverse()


# ---------------------------------------------------------------------------
# Free groups


class FreeGroup(GroupSpec):
    """Free group of rank r; elements are freely reduced words.

    Words are tuples of nonzero signed letter indices: 1 means the first
    generator, -1 its inverse, 2 the second generator, and so on.
    """

    kind = "free"

    def __init__(self, rank: int):
        if not isinstance(rank, int) or rank < 1:
            raise StructuralError("free group rank must be a positive integer")
        self.rank = rank

    def __eq__(self, other):
        return isinstance(other, FreeGroup) and other.rank == self.rank

    def __hash__(self):
        return hash(("free", self.rank))

    def __repr__(self):
        return f"FreeGroup(rank={self.rank})"

    @property
    def identity(self) -> GroupElement:
        return GroupElement(self, ())

    def generators(self) -> list[GroupElement]:
        return [GroupElement(self, (i,)) for i in range(1, self.rank + 1)]

    def _canonical(self, payload):
        word = tuple(int(s) for s in payload)
        for s in word:
            if s == 0 or abs(s) > self.rank:
                raise StructuralError(f"letter {s} outside rank-{self.rank} alphabet")
        return _reduce_word(word)

    def _multiply(self, a, b):
        # Both inputs are already reduced; cancellation can only happen at the seam.
        i = len(a)
        j = 0
        while i > 0 and j < len(b) and a[i - 1] == -b[j]:
            i -= 1
            j += 1
        return a[:i] + b[j:]

    def _inverse(self, a):
        return tuple(-s for s in reversed(a))

    def to_json(self) -> dict:
        return {"type": "free", "rank": self.rank}

    def element_to_json(self, g: GroupElement) -> str:
        return format_word(g)

    def element_from_json(self, obj) -> GroupElement:
        if not isinstance(obj, str):
            raise StructuralError("free-group elements serialize as word strings")
        return parse_word(self, obj)


def _reduce_word(word: tuple) -> tuple:
    out: list[int] = []
    for s in word:
        if out and out[-1] == -s:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def format_word(g: GroupElement) -> str:
    """Render a free-group element as a word string such as "a b^-1 a".

    The identity renders as "e".  Letters beyond z (rank > 26) are not
    representable and raise.
    """
    if not g.key:
        return "e"
    parts = []
    for s in g.key:
        idx = abs(s) - 1
        if idx >= len(_LETTERS):
            raise StructuralError("word formatting supports ranks up to 26")
        letter = _LETTERS[idx]
        parts.append(letter if s > 0 else letter + "^-1")
    return " ".join(parts)


def parse_word(group: FreeGroup, text: str) -> GroupElement:
    """Parse a word string like "a b^-1 a" (also accepts "a^3", "e", and "")."""
    word: list[int] = []
    for token in text.split():
        if token == "e":
            continue
        base, _, exp = token.partition("^")
        if len(base) != 1 or base not in _LETTERS:
            raise StructuralError(f"bad generator token {token!r}")
        idx = _LETTERS.index(base) + 1
        if idx > group.rank:
            raise StructuralError(f"generator {base!r} outside rank-{group.rank} group")
        power = 1
        if exp:
            try:
                power = int(exp)
            except ValueError:
                raise StructuralError(f"bad exponent in token {token!r}") from None
        word.extend([idx if power > 0 else -idx] * abs(power))
    return group.element(word)


# ---------------------------------------------------------------------------
# Free abelian groups Z^k


class ZPow(GroupSpec):
    """Free abelian group Z^k; elements are length-k integer vectors.

    Coordinates live in signed 64-bit range; leaving it is a hard error
    rather than a silent wrap.
    """

    kind = "zpow"

    def __init__(self, dim: int):
        if not isinstance(dim, int) or dim < 1:
            raise StructuralError("ZPow dimension must be a positive integer")
        self.dim = dim

    def __eq__(self, other):
        return isinstance(other, ZPow) and other.dim == self.dim

    def __hash__(self):
        return hash(("zpow", self.dim))

    def __repr__(self):
        return f"ZPow(dim={self.dim})"

    @property
    def identity(self) -> GroupElement:
        return GroupElement(self, (0,) * self.dim)

    def generators(self) -> list[GroupElement]:
        gens = []
        for i in range(self.dim):
            v = [0] * self.dim
            v[i] = 1
            gens.append(GroupElement(self, tuple(v)))
        return gens

    def _canonical(self, payload):
        if isinstance(payload, (int, np.integer)) and self.dim == 1:
            payload = (payload,)
        vec = tuple(int(v) for v in payload)
        if len(vec) != self.dim:
            raise StructuralError(f"expected a length-{self.dim} vector")
        for v in vec:
            if not (INT64_MIN <= v <= INT64_MAX):
                raise OverflowError("ZPow coordinate outside 64-bit signed range")
        return vec

    def _multiply(self, a, b):
        out = tuple(x + y for x, y in zip(a, b))
        for v in out:
            if not (INT64_MIN <= v <= INT64_MAX):
                raise OverflowError("ZPow coordinate overflow in multiply")
        return out

    def _inverse(self, a):
        if INT64_MIN in a:
            raise OverflowError("ZPow coordinate overflow in inverse")
        return tuple(-v for v in a)

    def to_json(self) -> dict:
        return {"type": "zpow", "dim": self.dim}

    def element_to_json(self, g: GroupElement) -> list:
        return list(g.key)

    def element_from_json(self, obj) -> GroupElement:
        if isinstance(obj, int):
            obj = [obj]
        if not isinstance(obj, list):
            raise StructuralError("ZPow elements serialize as integer arrays")
        return self.element(obj)


# ---------------------------------------------------------------------------
# Finite groups given by multiplication tables


class FiniteTable(GroupSpec):
    """Finite group presented by an explicit n x n multiplication table.

    table[g, h] is the index of gh.  Validation (identity, inverses,
    associativity) is mandatory for n <= 64 and opt-out only above that,
    where the exhaustive associativity scan starts to cost real memory.
    """

    kind = "finite"

    def __init__(self, table, identity: int, name: str | None = None, validate: bool | None = None):
        tbl = np.asarray(table, dtype=np.int64)
        if tbl.ndim != 2 or tbl.shape[0] != tbl.shape[1]:
            raise StructuralError("multiplication table must be square")
        n = tbl.shape[0]
        if n == 0:
            raise StructuralError("empty multiplication table")
        if not (0 <= identity < n):
            raise StructuralError("identity index outside table")
        if tbl.min() < 0 or tbl.max() >= n:
            raise StructuralError("table entries must be indices in [0, n)")
        if validate is None:
            validate = True
        if n <= 64:
            validate = True  # cheap, so not negotiable at this size
        self.table = tbl
        self.table.setflags(write=False)
        self.n = n
        self.identity_index = int(identity)
        self.name = name or f"finite({n})"
        if validate:
            self._validate()
        # inverse table: inverse[g] = h with gh = hg = e
        inv = np.empty(n, dtype=np.int64)
        for g in range(n):
            hits = np.nonzero(tbl[g] == self.identity_index)[0]
            if len(hits) != 1 or tbl[hits[0], g] != self.identity_index:
                raise StructuralError(f"element {g} has no two-sided inverse")
            inv[g] = hits[0]
        inv.setflags(write=False)
        self.inverse_table = inv
        self._hash = hash(("finite", n, self.identity_index, tbl.tobytes()))

    def _validate(self):
        tbl, e, n = self.table, self.identity_index, self.n
        rng = np.arange(n)
        if not (np.array_equal(tbl[e], rng) and np.array_equal(tbl[:, e], rng)):
            raise StructuralError("identity row/column check failed")
        # associativity: (ab)c == a(bc), checked exhaustively
        left = tbl[tbl]            # left[a,b,c] = (ab)c
        right = tbl[:, tbl]        # right[a,b,c] = a(bc)
        if not np.array_equal(left, right):
            raise StructuralError("multiplication table is not associative")

    def __eq__(self, other):
        return (
            isinstance(other, FiniteTable)
            and other.n == self.n
            and other.identity_index == self.identity_index
            and np.array_equal(other.table, self.table)
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"FiniteTable({self.name}, n={self.n})"

    @property
    def identity(self) -> GroupElement:
        return GroupElement(self, self.identity_index)

    def generators(self) -> list[GroupElement]:
        return [GroupElement(self, i) for i in range(self.n) if i != self.identity_index]

    def elements(self) -> list[GroupElement]:
        return [GroupElement(self, i) for i in range(self.n)]

    def _canonical(self, payload):
        idx = int(payload)
        if not (0 <= idx < self.n):
            raise StructuralError(f"element index {idx} outside [0, {self.n})")
        return idx

    def _multiply(self, a, b):
        return int(self.table[a, b])

    def _inverse(self, a):
        return int(self.inverse_table[a])

    def to_json(self) -> dict:
        return {"type": "finite", "table": self.table.tolist(), "identity": self.identity_index}

    def element_to_json(self, g: GroupElement) -> int:
        return int(g.key)

    def element_from_json(self, obj) -> GroupElement:
        if not isinstance(obj, int):
            raise StructuralError("finite-group elements serialize as indices")
        return self.element(obj)


# ---------------------------------------------------------------------------
# Finite group builders


def cyclic_group(n: int) -> FiniteTable:
    """Z/n with elements 0..n-1 and addition mod n."""
    if n < 1:
        raise StructuralError("cyclic group order must be positive")
    idx = np.arange(n)
    table = (idx[:, None] + idx[None, :]) % n
    return FiniteTable(table, identity=0, name=f"cyclic({n})")


def dihedral_group(n: int) -> FiniteTable:
    """Dihedral group of order 2n (symmetries of the n-gon), n >= 1.

    Element i + n*j encodes r^i s^j with relations s r s = r^-1.
    """
    if n < 1:
        raise StructuralError("dihedral parameter must be positive")
    size = 2 * n
    table = np.empty((size, size), dtype=np.int64)
    for i, j in itertools.product(range(n), range(2)):
        for k, l in itertools.product(range(n), range(2)):
            rot = (i + (k if j == 0 else -k)) % n
            table[i + n * j, k + n * l] = rot + n * ((j + l) % 2)
    return FiniteTable(table, identity=0, name=f"dihedral({n})")


def direct_product(a: FiniteTable, b: FiniteTable) -> FiniteTable:
    """Direct product of two finite groups; index (i, j) -> i * |B| + j."""
    na, nb = a.n, b.n
    ia = np.repeat(np.arange(na), nb)
    ib = np.tile(np.arange(nb), na)
    table = a.table[np.ix_(ia, ia)] * nb + b.table[np.ix_(ib, ib)]
    identity = a.identity_index * nb + b.identity_index
    return FiniteTable(table, identity=identity, name=f"{a.name}x{b.name}")


def symmetric_group(n: int) -> FiniteTable:
    """S_n as a table group (intended for small n; order n! grows fast)."""
    if not (1 <= n <= 5):
        raise StructuralError("symmetric_group supports 1 <= n <= 5")
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    size = len(perms)
    table = np.empty((size, size), dtype=np.int64)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            table[i, j] = index[tuple(p[q[x]] for x in range(n))]
    return FiniteTable(table, identity=index[tuple(range(n))], name=f"sym({n})")


def quaternion_group() -> FiniteTable:
    """The quaternion group Q8 = {1, -1, i, -i, j, -j, k, -k}."""
    # sign/axis encoding: index 2*axis + (0 if positive else 1), axes 1,i,j,k
    mul_axis = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]]
    mul_sign = [[1, 1, 1, 1], [1, -1, 1, -1], [1, -1, -1, 1], [1, 1, -1, -1]]
    table = np.empty((8, 8), dtype=np.int64)
    for i in range(8):
        for j in range(8):
            ax_i, sg_i = i // 2, -1 if i % 2 else 1
            ax_j, sg_j = j // 2, -1 if j % 2 else 1
            ax = mul_axis[ax_i][ax_j]
            sg = sg_i * sg_j * mul_sign[ax_i][ax_j]
            table[i, j] = 2 * ax + (0 if sg > 0 else 1)
    return FiniteTable(table, identity=0, name="quaternion(8)")


def finite_group_fleet(max_size: int) -> list[FiniteTable]:
    """A varied list of finite groups with order <= max_size.

    Used by randomized property tests and the harmonic CLI kind; mixes
    abelian and non-abelian examples so the checks do not silently
    specialize to the commutative case.
    """
    fleet: list[FiniteTable] = []
    for n in range(2, max_size + 1):
        fleet.append(cyclic_group(n))
    if max_size >= 4:
        fleet.append(direct_product(cyclic_group(2), cyclic_group(2)))
    for k in range(3, max_size // 2 + 1):
        fleet.append(dihedral_group(k))
    if max_size >= 8:
        fleet.append(quaternion_group())
        fleet.append(direct_product(cyclic_group(2), cyclic_group(4)))
    if max_size >= 9:
        fleet.append(direct_product(cyclic_group(3), cyclic_group(3)))
    if max_size >= 12:
        fleet.append(direct_product(cyclic_group(2), cyclic_group(6)))
    if max_size >= 24:
        fleet.append(symmetric_group(4))
        fleet.append(direct_product(cyclic_group(2), dihedral_group(6)))
    return fleet


# ---------------------------------------------------------------------------
# Word enumeration


def words_up_to(spec: GroupSpec, max_length: int, gens: Sequence[GroupElement] | None = None) -> list[GroupElement]:
    """All distinct elements expressible as products of at most max_length
    generators or generator inverses, identity included.

    Order is deterministic: breadth-first over word length, insertion order
    within a layer.
    """
    if gens is None:
        gens = spec.generators()
    steps: list[GroupElement] = []
    for g in gens:
        if g not in steps:
            steps.append(g)
        gi = g.inverse()
        if gi not in steps:
            steps.append(gi)
    seen: dict[GroupElement, None] = {spec.identity: None}
    frontier = [spec.identity]
    for _ in range(max_length):
        new_frontier = []
        for w in frontier:
            for s in steps:
                ws = group_multiply(w, s)
                if ws not in seen:
                    seen[ws] = None
                    new_frontier.append(ws)
        frontier = new_frontier
        if not frontier:
            break
    return list(seen)


# ---------------------------------------------------------------------------
# JSON entry points


def group_from_json(obj: dict) -> GroupSpec:
    """Parse {"type": "free"|"zpow"|"finite", ...} into a GroupSpec."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise StructuralError("group spec must be an object with a 'type' field")
    kind = obj["type"]
    if kind == "free":
        return FreeGroup(_expect_int(obj, "rank"))
    if kind == "zpow":
        return ZPow(_expect_int(obj, "dim"))
    if kind == "finite":
        if "table" not in obj:
            raise StructuralError("finite group spec needs a 'table' field")
        return FiniteTable(obj["table"], identity=_expect_int(obj, "identity"))
    raise StructuralError(f"unknown group type {kind!r}")


def group_to_json(spec: GroupSpec) -> dict:
    return spec.to_json()


def element_from_json(spec: GroupSpec, obj) -> GroupElement:
    return spec.element_from_json(obj)


def element_to_json(g: GroupElement):
    return g.group.element_to_json(g)


def _expect_int(obj: dict, field: str) -> int:
    value = obj.get(field)
    if not isinstance(value, int) or isinstance(value, bool):
        raise StructuralError(f"field {field!r} must be an integer")
    return value
