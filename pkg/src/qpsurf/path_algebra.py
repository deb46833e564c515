"""Exact truncated path-algebra arithmetic over the rationals.

Elements of the complete path algebra of a quiver are kept modulo paths
longer than a fixed truncation degree D, so every computation is finite and
exact.  Composition is written right to left: in a product written
``w = a3 a2 a1`` the arrow ``a1`` acts first.  A path is stored as the tuple
of arrow names in written order, i.e. ``("a3", "a2", "a1")``; consecutive
entries must satisfy tail(arrows[i]) == head(arrows[i+1]).

Potentials are linear combinations of cycles considered up to rotation; we
keep them in a canonical form where every cycle is rotated to its
lexicographically minimal representative (by arrow declaration order), so
cyclic equivalence becomes dictionary equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import inf


@dataclass(frozen=True)
class Arrow:
    name: str
    tail: object
    head: object


@dataclass(frozen=True)
class Path:
    """A composable word of arrow names, or a lazy path sitting at a vertex.

    ``arrows`` is in written order (rightmost acts first).  A length-zero
    path carries its vertex in ``at``; longer paths leave ``at`` as None.
    """

    arrows: tuple
    at: object = None

    def __post_init__(self):
        if self.arrows:
            if self.at is not None:
                raise ValueError("non-empty path must not carry a vertex")
        elif self.at is None:
            raise ValueError("empty path needs a vertex")

    def __len__(self):
        return len(self.arrows)

    def __repr__(self):
        if not self.arrows:
            return "Path(e_%s)" % (self.at,)
        return "Path(%s)" % " ".join(self.arrows)


class Quiver:
    """A finite quiver with named arrows.

    Arrow declaration order is meaningful: it fixes the lexicographic order
    used to canonicalize cycle rotations and to break ties deterministically
    everywhere else.
    """

    def __init__(self, vertices, arrows):
        self.vertices = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertices")
        vset = set(self.vertices)
        built = []
        for a in arrows:
            if not isinstance(a, Arrow):
                a = Arrow(*a)
            built.append(a)
        self.arrows = tuple(built)
        self._by_name = {}
        for a in self.arrows:
            if a.name in self._by_name:
                raise ValueError("duplicate arrow name %r" % a.name)
            if a.tail not in vset or a.head not in vset:
                raise ValueError("arrow %r has endpoint outside vertex set" % a.name)
            self._by_name[a.name] = a
        self._rank = {a.name: i for i, a in enumerate(self.arrows)}
        out, inn = {v: [] for v in self.vertices}, {v: [] for v in self.vertices}
        for a in self.arrows:
            out[a.tail].append(a)
            inn[a.head].append(a)
        self.arrows_out = {v: tuple(l) for v, l in out.items()}
        self.arrows_in = {v: tuple(l) for v, l in inn.items()}

    def arrow(self, name):
        return self._by_name[name]

    def has_arrow(self, name):
        return name in self._by_name

    def rank(self, name):
        return self._rank[name]

    def tail(self, name):
        return self._by_name[name].tail

    def head(self, name):
        return self._by_name[name].head

    # -- paths ---------------------------------------------------------

    def lazy_path(self, v):
        if v not in self.arrows_out:
            raise ValueError("unknown vertex %r" % (v,))
        return Path((), v)

    def path(self, names, at=None):
        """Build and validate a Path from arrow names in written order."""
        names = tuple(names)
        if not names:
            return self.lazy_path(at)
        p = Path(names)
        self.check_path(p)
        return p

    def check_path(self, p):
        if not p.arrows:
            if p.at not in self.arrows_out:
                raise ValueError("unknown vertex %r" % (p.at,))
            return
        w = p.arrows
        for nm in w:
            if nm not in self._by_name:
                raise ValueError("unknown arrow %r" % (nm,))
        for i in range(len(w) - 1):
            if self.tail(w[i]) != self.head(w[i + 1]):
                raise ValueError(
                    "word not composable at position %d: tail(%s) != head(%s)"
                    % (i, w[i], w[i + 1])
                )

    def path_tail(self, p):
        return p.at if not p.arrows else self.tail(p.arrows[-1])

    def path_head(self, p):
        return p.at if not p.arrows else self.head(p.arrows[0])

    def is_cycle(self, p):
        return len(p.arrows) > 0 and self.path_tail(p) == self.path_head(p)

    def rotations(self, p):
        """All rotations of a cycle, starting with p itself."""
        if not self.is_cycle(p):
            raise ValueError("rotations of a non-cycle")
        w = p.arrows
        return [Path(w[i:] + w[:i]) for i in range(len(w))]

    def __eq__(self, other):
        return (
            isinstance(other, Quiver)
            and self.vertices == other.vertices
            and self.arrows == other.arrows
        )

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None

    def __repr__(self):
        return "Quiver(%d vertices, %d arrows)" % (len(self.vertices), len(self.arrows))

    # -- serialization -------------------------------------------------

    def to_json_dict(self):
        return {
            "vertices": list(self.vertices),
            "arrows": [{"id": a.name, "from": a.tail, "to": a.head} for a in self.arrows],
        }

    @classmethod
    def from_json_dict(cls, data):
        return cls(
            data["vertices"],
            [(a["id"], a["from"], a["to"]) for a in data["arrows"]],
        )


def concat(p, q):
    """The written concatenation p·q (q acts first).  Assumes composability."""
    if not p.arrows:
        return q
    if not q.arrows:
        return p
    return Path(p.arrows + q.arrows)


def canonicalize_rotation(quiver, p):
    """Rotate a cycle to its lexicographically minimal representative.

    Lexicographic order compares arrow declaration indices position by
    position.  Lazy paths pass through unchanged.
    """
    if not p.arrows:
        return p
    if not quiver.is_cycle(p):
        raise ValueError("cannot canonicalize a non-cycle: %r" % (p,))
    w = p.arrows
    key = tuple(quiver.rank(nm) for nm in w)
    best = min(range(len(w)), key=lambda i: key[i:] + key[:i])
    if best == 0:
        return p
    return Path(w[best:] + w[:best])


class TruncatedElement:
    """A finite rational combination of paths, modulo paths longer than D."""

    __slots__ = ("quiver", "degree", "terms")

    def __init__(self, quiver, degree, terms=None, validate=True):
        degree = int(degree)
        if degree < 0:
            raise ValueError("negative truncation degree")
        self.quiver = quiver
        self.degree = degree
        clean = {}
        for p, c in (terms or {}).items():
            if len(p.arrows) > degree:
                continue
            c = Fraction(c)
            if c == 0:
                continue
            if validate:
                quiver.check_path(p)
            clean[p] = c
        self.terms = clean

    # -- constructors --------------------------------------------------

    @classmethod
    def _raw(cls, quiver, degree, terms):
        """Internal: adopt a term dict already known to be clean."""
        el = cls.__new__(cls)
        el.quiver = quiver
        el.degree = degree
        el.terms = terms
        return el

    @classmethod
    def zero(cls, quiver, degree):
        return cls(quiver, degree, {}, validate=False)

    @classmethod
    def from_path(cls, quiver, degree, p, coeff=1):
        return cls(quiver, degree, {p: Fraction(coeff)})

    @classmethod
    def from_arrow(cls, quiver, degree, name, coeff=1):
        return cls.from_path(quiver, degree, quiver.path([name]), coeff)

    # -- structure -----------------------------------------------------

    @property
    def is_zero(self):
        return not self.terms

    @property
    def short(self):
        """Minimal path length occurring, or +inf for zero."""
        if not self.terms:
            return inf
        return min(len(p.arrows) for p in self.terms)

    def max_length(self):
        if not self.terms:
            return 0
        return max(len(p.arrows) for p in self.terms)

    def coefficient(self, p):
        return self.terms.get(p, Fraction(0))

    def truncate(self, degree):
        if degree >= self.degree:
            if degree == self.degree:
                return self
            raise ValueError("cannot raise truncation degree")
        kept = {p: c for p, c in self.terms.items() if len(p.arrows) <= degree}
        return TruncatedElement._raw(self.quiver, degree, kept)

    def support_lengths(self):
        return sorted({len(p.arrows) for p in self.terms})

    # -- arithmetic ----------------------------------------------------

    def _coerced(self, other):
        if not isinstance(other, TruncatedElement):
            raise TypeError("expected TruncatedElement, got %r" % type(other))
        if other.quiver != self.quiver:
            raise ValueError("elements live on different quivers")
        return min(self.degree, other.degree)

    def __add__(self, other):
        d = self._coerced(other)
        out = dict(self.terms)
        for p, c in other.terms.items():
            s = out.get(p, 0) + c
            if s == 0:
                out.pop(p, None)
            else:
                out[p] = s
        if d != self.degree or d != other.degree:
            out = {p: c for p, c in out.items() if len(p.arrows) <= d}
        return TruncatedElement._raw(self.quiver, d, out)

    def __sub__(self, other):
        return self.__add__(-other)

    def __neg__(self):
        return TruncatedElement._raw(
            self.quiver, self.degree, {p: -c for p, c in self.terms.items()}
        )

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return TruncatedElement._raw(self.quiver, self.degree, {})
        return TruncatedElement._raw(
            self.quiver, self.degree, {p: c * v for p, v in self.terms.items()}
        )

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        d = self._coerced(other)
        q = self.quiver
        out = {}
        for p, cp in self.terms.items():
            lp = len(p.arrows)
            tp = q.path_tail(p)
            for r, cr in other.terms.items():
                if lp + len(r.arrows) > d:
                    continue
                if tp != q.path_head(r):
                    continue  # orthogonal idempotents: product is zero
                w = concat(p, r)
                s = out.get(w, 0) + cp * cr
                if s == 0:
                    out.pop(w, None)
                else:
                    out[w] = s
        return TruncatedElement._raw(q, d, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __eq__(self, other):
        return (
            isinstance(other, TruncatedElement)
            and self.quiver == other.quiver
            and self.degree == other.degree
            and self.terms == other.terms
        )

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None

    def __repr__(self):
        if not self.terms:
            return "TruncatedElement(0; D=%d)" % self.degree
        bits = []
        for p in sorted(self.terms, key=lambda p: (len(p.arrows), p.arrows)):
            bits.append("%s·%r" % (self.terms[p], p))
        return "TruncatedElement(%s; D=%d)" % (" + ".join(bits), self.degree)

    # -- serialization -------------------------------------------------

    def to_json_dict(self):
        items = sorted(self.terms.items(), key=lambda pc: (len(pc[0].arrows), pc[0].arrows))
        out = []
        for p, c in items:
            entry = {"coeff": str(c), "path": list(p.arrows)}
            if not p.arrows:
                entry["at"] = p.at
            out.append(entry)
        return {"D": self.degree, "terms": out}

    @classmethod
    def from_json_dict(cls, quiver, data):
        terms = {}
        for entry in data["terms"]:
            p = quiver.path(entry["path"], at=entry.get("at"))
            terms[p] = terms.get(p, 0) + Fraction(entry["coeff"])
        return cls(quiver, data["D"], terms)


def multiply(x, y):
    """Product in the truncated path algebra (right factor acts first)."""
    return x * y


class Potential:
    """A rational combination of cycles, canonical under rotation.

    Two potentials are cyclically equivalent exactly when their canonical
    term dictionaries agree; all arithmetic here re-canonicalizes.
    """

    __slots__ = ("quiver", "degree", "terms")

    def __init__(self, quiver, degree, terms=None, validate=True):
        degree = int(degree)
        if degree < 0:
            raise ValueError("negative truncation degree")
        self.quiver = quiver
        self.degree = degree
        clean = {}
        for p, c in (terms or {}).items():
            if len(p.arrows) > degree:
                continue
            c = Fraction(c)
            if c == 0:
                continue
            if validate:
                quiver.check_path(p)
                if not quiver.is_cycle(p):
                    raise ValueError("potential term is not a cycle: %r" % (p,))
            key = canonicalize_rotation(quiver, p)
            s = clean.get(key, 0) + c
            if s == 0:
                clean.pop(key, None)
            else:
                clean[key] = s
        self.terms = clean

    @classmethod
    def _raw(cls, quiver, degree, terms):
        """Internal: adopt a term dict whose keys are already canonical."""
        pot = cls.__new__(cls)
        pot.quiver = quiver
        pot.degree = degree
        pot.terms = terms
        return pot

    @classmethod
    def zero(cls, quiver, degree):
        return cls(quiver, degree, {}, validate=False)

    @classmethod
    def from_element(cls, x):
        """Reinterpret an element whose support consists of cycles."""
        return cls(x.quiver, x.degree, x.terms)

    def as_element(self):
        return TruncatedElement._raw(self.quiver, self.degree, dict(self.terms))

    @property
    def is_zero(self):
        return not self.terms

    @property
    def short(self):
        if not self.terms:
            return inf
        return min(len(p.arrows) for p in self.terms)

    def max_length(self):
        if not self.terms:
            return 0
        return max(len(p.arrows) for p in self.terms)

    def coefficient(self, p):
        """Coefficient of the rotation class of p."""
        return self.terms.get(canonicalize_rotation(self.quiver, p), Fraction(0))

    def truncate(self, degree):
        if degree >= self.degree:
            if degree == self.degree:
                return self
            raise ValueError("cannot raise truncation degree")
        kept = {p: c for p, c in self.terms.items() if len(p.arrows) <= degree}
        return Potential._raw(self.quiver, degree, kept)

    def _coerced(self, other):
        if not isinstance(other, Potential):
            raise TypeError("expected Potential, got %r" % type(other))
        if other.quiver != self.quiver:
            raise ValueError("potentials live on different quivers")
        return min(self.degree, other.degree)

    def __add__(self, other):
        d = self._coerced(other)
        out = dict(self.terms)
        for p, c in other.terms.items():
            s = out.get(p, 0) + c
            if s == 0:
                out.pop(p, None)
            else:
                out[p] = s
        if d != self.degree or d != other.degree:
            out = {p: c for p, c in out.items() if len(p.arrows) <= d}
        return Potential._raw(self.quiver, d, out)

    def __sub__(self, other):
        return self.__add__(-other)

    def __neg__(self):
        return Potential._raw(
            self.quiver, self.degree, {p: -c for p, c in self.terms.items()}
        )

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return Potential._raw(self.quiver, self.degree, {})
        return Potential._raw(
            self.quiver, self.degree, {p: c * v for p, v in self.terms.items()}
        )

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            isinstance(other, Potential)
            and self.quiver == other.quiver
            and self.degree == other.degree
            and self.terms == other.terms
        )

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None

    def __repr__(self):
        if not self.terms:
            return "Potential(0; D=%d)" % self.degree
        bits = []
        for p in sorted(self.terms, key=lambda p: (len(p.arrows), p.arrows)):
            bits.append("%s·%r" % (self.terms[p], p))
        return "Potential(%s; D=%d)" % (" + ".join(bits), self.degree)

    def to_json_dict(self):
        items = sorted(self.terms.items(), key=lambda pc: (len(pc[0].arrows), pc[0].arrows))
        return {
            "D": self.degree,
            "terms": [{"coeff": str(c), "path": list(p.arrows)} for p, c in items],
        }

    @classmethod
    def from_json_dict(cls, quiver, data):
        terms = {}
        for entry in data["terms"]:
            p = quiver.path(entry["path"])
            terms[p] = terms.get(p, 0) + Fraction(entry["coeff"])
        return cls(quiver, data["D"], terms)


def short(x):
    """Minimal occurring length; +inf for zero.  Works on elements and potentials."""
    return x.short


def is_cyclically_equivalent(a, b):
    """Whether two potentials agree up to rotating their cycles.

    Both arguments must share the quiver and the truncation degree;
    comparing across truncations would silently say nothing about the
    dropped tails, so it is an error.
    """
    if a.quiver != b.quiver:
        raise ValueError("potentials live on different quivers")
    if a.degree != b.degree:
        raise ValueError(
            "truncation mismatch: D=%d vs D=%d" % (a.degree, b.degree)
        )
    return a.terms == b.terms


def cyclic_derivative(pot, arrow_name):
    """The cyclic derivative of a potential with respect to one arrow.

    For each occurrence of the arrow in a cycle, rotate that occurrence to
    the front and delete it; sum over occurrences.  The result lives one
    degree lower than the input (the longest representable cycle loses an
    arrow).
    """
    q = pot.quiver
    a = q.arrow(arrow_name)
    d = max(pot.degree - 1, 0)
    out = {}
    for p, c in pot.terms.items():
        w = p.arrows
        for i, nm in enumerate(w):
            if nm != arrow_name:
                continue
            rest = w[i + 1 :] + w[:i]
            r = Path(rest) if rest else Path((), a.tail)
            s = out.get(r, 0) + c
            if s == 0:
                out.pop(r, None)
            else:
                out[r] = s
    return TruncatedElement(q, d, out, validate=False)


def enumerate_cycle_classes(quiver, max_length):
    """Canonical representatives of every cycle class up to a length.

    Walks all words in the quiver of length at most ``max_length`` (arrows
    may repeat), keeps the ones that close up into cycles, and collapses
    rotations.  Returned paths are in canonical rotation, sorted by length
    and then by the quiver's arrow order, so the output is deterministic.

    Meant for small quivers and modest lengths; the walk is exponential in
    ``max_length``.
    """
    seen = set()
    out = []
    arrows = list(quiver.arrows)

    def grow(word):
        if quiver.tail(word[-1]) == quiver.head(word[0]):
            p = canonicalize_rotation(quiver, Path(word))
            if p.arrows not in seen:
                seen.add(p.arrows)
                out.append(p)
        if len(word) == max_length:
            return
        for b in arrows:
            if b.head == quiver.tail(word[-1]):
                grow(word + (b.name,))

    for a in arrows:
        grow((a.name,))
    out.sort(key=lambda p: (len(p), tuple(quiver.rank(n) for n in p.arrows)))
    return out
