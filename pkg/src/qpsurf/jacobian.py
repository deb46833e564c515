"""Truncated Jacobian-algebra dimensions by exact sparse elimination.

The quotient A_{≤D} / (span{p·∂_α(S)·q} + 𝔪^{D+1}) is computed over the
rationals.  Paths are indexed in graded-lexicographic order (longer paths
rank higher, ties broken by arrow declaration order from the left); the
index of a path is computed combinatorially from counting tables, so the
full path set is never materialized.  Elimination keeps one pivot row per
leading path, with the lead being the graded-lex greatest path of the row
— reductions therefore express long paths through shorter ones.

Finiteness certificate: if at some length L every path of that length
either vanishes by a far-band rule or is a pivot, each of them rewrites
to strictly shorter paths; everything longer collapses inductively in
the complete algebra, so the reported dimension is exact rather than a
truncation artifact.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .path_algebra import Path, cyclic_derivative


class _PathIndex:
    """Graded-lex path numbering and counting for a fixed quiver and bound."""

    def __init__(self, quiver, bound):
        self.quiver = quiver
        self.bound = bound
        self.vertex_pos = {v: i for i, v in enumerate(quiver.vertices)}
        self.into = {v: [a for a in quiver.arrows if a.head == v] for v in quiver.vertices}
        self.outof = {v: [a for a in quiver.arrows if a.tail == v] for v in quiver.vertices}
        # n_left[v][r] = number of length-r words whose leftmost arrow has head v.
        self.n_left = {v: [1] + [0] * bound for v in quiver.vertices}
        for r in range(1, bound + 1):
            for v in quiver.vertices:
                self.n_left[v][r] = sum(
                    self.n_left[a.tail][r - 1] for a in self.into[v]
                )
        self.totals = [
            sum(self.n_left[v][r] for v in quiver.vertices) for r in range(bound + 1)
        ]
        self.offsets = [0]
        for t in self.totals:
            self.offsets.append(self.offsets[-1] + t)

    def total(self, length):
        return self.totals[length]

    def pid(self, word, at=None):
        """The graded-lex index of a path given as a word (or a vertex)."""
        if not word:
            return self.vertex_pos[at]
        q = self.quiver
        ell = len(word)
        rank = 0
        prev = None
        for i, nm in enumerate(word):
            wanted = q.rank(nm)
            pool = q.arrows if i == 0 else self.into[q.tail(prev)]
            for b in pool:
                if q.rank(b.name) < wanted:
                    rank += self.n_left[b.tail][ell - 1 - i]
            prev = nm
        return self.offsets[ell] + rank

    def length_of(self, pid):
        return bisect_right(self.offsets, pid) - 1

    def unrank(self, pid):
        """The path with the given graded-lex index."""
        q = self.quiver
        ell = self.length_of(pid)
        r = pid - self.offsets[ell]
        if ell == 0:
            return Path((), q.vertices[r])
        word = []
        prev = None
        for i in range(ell):
            pool = q.arrows if i == 0 else self.into[q.tail(prev)]
            for b in sorted(pool, key=lambda a: q.rank(a.name)):
                c = self.n_left[b.tail][ell - 1 - i]
                if r < c:
                    word.append(b.name)
                    prev = b.name
                    break
                r -= c
            else:
                raise IndexError("path index out of range")
        return Path(tuple(word))

    def words_left(self, v, length):
        """All length-`length` words whose leftmost arrow has head v."""
        if length == 0:
            return [()]
        out = []
        for a in self.into[v]:
            for rest in self.words_left(a.tail, length - 1):
                out.append((a.name,) + rest)
        return out

    def words_right(self, v, length):
        """All length-`length` words whose rightmost arrow has tail v."""
        if length == 0:
            return [()]
        out = []
        for a in self.outof[v]:
            for pre in self.words_right(a.head, length - 1):
                out.append(pre + (a.name,))
        return out


def jacobian_generators(qp):
    """One cyclic derivative per arrow, in arrow declaration order."""
    return [cyclic_derivative(qp.potential, a.name) for a in qp.quiver.arrows]


@dataclass
class TruncatedQuotient:
    """The computed quotient: dimensions, certificate, and reduction access."""

    qp: object
    degree: int
    per_degree: tuple
    dimension: int
    certified: bool
    certificate_length: object
    max_generator_length: int
    basis: object
    _index: _PathIndex
    _pivots: dict
    _kills: object

    def reduce_path(self, p):
        """The residue of a path in the quotient, as {Path: coefficient}."""
        if isinstance(p, Path):
            pid = self._index.pid(p.arrows, p.at)
        else:
            pid = self._index.pid(tuple(p))
        row = _reduce_against(self._pivots, {pid: Fraction(1)}, self._kills)
        return {self._index.unrank(i): c for i, c in row.items()}

    def is_basis_path(self, p):
        pid = self._index.pid(p.arrows, p.at)
        return pid not in self._pivots and not self._kills.killed_pid(pid)


class _Kills:
    """Subword vanishing rules for the far band of the window.

    When |p| + |q| is so large that only the shortest term of a generator
    survives truncation, the product p·(generator)·q is a single scaled
    path — so that path is congruent to zero outright.  A rule (word, m)
    records that every path of length at least m containing the word as a
    contiguous subword vanishes.  Keeping these as rules instead of rows
    avoids enumerating the (p, q) pairs of the far band, whose count grows
    exponentially with the degree.
    """

    def __init__(self, index):
        self.index = index
        self.rules = []
        self._memo = {}

    def add(self, word, min_length):
        self.rules.append((tuple(word), min_length))
        self._memo.clear()

    def __bool__(self):
        return bool(self.rules)

    def killed_word(self, word):
        n = len(word)
        for w, ml in self.rules:
            k = len(w)
            if n < ml or n < k:
                continue
            for i in range(n - k + 1):
                if word[i:i + k] == w:
                    return True
        return False

    def killed_pid(self, pid):
        hit = self._memo.get(pid)
        if hit is None:
            hit = self.killed_word(self.index.unrank(pid).arrows)
            self._memo[pid] = hit
        return hit

    def counts(self, quiver, totals, degree):
        """Number of killed paths per length, by complement counting."""
        out = [0] * (degree + 1)
        if not self.rules:
            return out
        thresholds = sorted({ml for _, ml in self.rules})
        for i, ml in enumerate(thresholds):
            if ml > degree:
                break
            hi = min(degree, thresholds[i + 1] - 1) if i + 1 < len(thresholds) else degree
            active = sorted({w for w, m2 in self.rules if m2 <= ml})
            avoid = _avoid_counts(quiver, active, hi)
            for ell in range(ml, hi + 1):
                out[ell] = totals[ell] - avoid[ell]
        return out


def _avoid_counts(quiver, words, upto):
    """Paths per length containing none of the given words as subwords.

    Transfer-matrix walk over written words: the state keeps the tail
    vertex (for composability) and the last max(len)−1 symbols (enough to
    detect every occurrence as it completes).
    """
    wordset = {tuple(w) for w in words}
    K = max(len(w) for w in wordset)
    into = {v: [a for a in quiver.arrows if a.head == v] for v in quiver.vertices}
    counts = [0] * (upto + 1)
    counts[0] = len(quiver.vertices)
    if upto == 0:
        return counts
    states = {}
    for a in quiver.arrows:
        if (a.name,) in wordset:
            continue
        win = (a.name,)[1 - K:] if K > 1 else ()
        key = (a.tail, win)
        states[key] = states.get(key, 0) + 1
    counts[1] = sum(states.values())
    for ell in range(2, upto + 1):
        nxt = {}
        for (tail, win), cnt in states.items():
            for b in into[tail]:
                ext = win + (b.name,)
                if any(ext[-len(w):] == w for w in wordset):
                    continue
                key = (b.tail, ext[1 - K:] if K > 1 else ())
                nxt[key] = nxt.get(key, 0) + cnt
        states = nxt
        counts[ell] = sum(states.values())
    return counts


def _reduce_against(pivots, row, kills=None):
    row = dict(row)
    while row:
        lead = max(row)
        if lead in pivots:
            coeff = row.pop(lead)
            for i, c in pivots[lead].items():
                if i == lead:
                    continue
                nxt = row.get(i, Fraction(0)) - coeff * c
                if nxt:
                    row[i] = nxt
                else:
                    row.pop(i, None)
        elif kills is not None and kills.killed_pid(lead):
            del row[lead]
        else:
            break
    return row


def _install(pivots, row, kills=None):
    """Reduce a row and, if nonzero, install it as a new pivot.  Returns lead or None."""
    row = _reduce_against(pivots, row, kills)
    if not row:
        return None
    lead = max(row)
    inv = Fraction(1, 1) / row[lead]
    pivots[lead] = {i: c * inv for i, c in row.items()}
    return lead


def quotient_dimension(qp, degree):
    """Dimension of the truncated Jacobian quotient, with finiteness certificate.

    The window is the span of all truncations of p·(generator)·q with the
    product of length at most the degree — including pairs (p, q) so long
    that only part of the generator survives, since those truncated
    products still lie in the ideal modulo 𝔪^{D+1}.  Near pairs are
    eliminated as explicit rows; far pairs, where a single term survives,
    become subword vanishing rules (see _Kills).

    Certificate: if at some length L every path either vanishes by rule or
    is a pivot lead, then every length-L path is congruent to strictly
    shorter paths.  Longer paths then collapse too — multiply the length-L
    rewritings by arrows and iterate; each round shortens the support and
    pushes the correction terms deeper, so in the complete algebra the
    span of the sub-L basis is everything.  The reported dimension is then
    exact, and slices from L on are reported as zero (they describe the
    full quotient, not the truncation window).  Without such an L the
    dimension only counts what survives below the truncation.

    Returns (TruncatedQuotient, certified).
    """
    q = qp.quiver
    if qp.degree < degree:
        raise ValueError(
            "potential is truncated at %d; cannot compute at degree %d"
            % (qp.degree, degree)
        )
    gens = jacobian_generators(qp)
    nonzero = [(a.name, g) for a, g in zip(q.arrows, gens) if not g.is_zero]
    maxgen = max((g.max_length() for _, g in nonzero), default=0)
    if degree < maxgen + 2:
        raise ValueError(
            "degree %d is below max generator length %d + 2" % (degree, maxgen)
        )
    index = _PathIndex(q, degree)
    kills = _Kills(index)

    plans = []
    for name, gen in nonzero:
        lengths = sorted({len(t.arrows) for t in gen.terms})
        lmin = lengths[0]
        at_min = [t for t in gen.terms if len(t.arrows) == lmin]
        if len(at_min) == 1 and lmin >= 1:
            # Beyond |p|+|q| = degree − (second length), only the shortest
            # term survives truncation: a single-path row, kept as a rule.
            if len(lengths) == 1:
                enum_cap = -1
                band_min = lmin
            else:
                enum_cap = degree - lengths[1]
                band_min = degree - lengths[1] + lmin + 1
            if band_min <= degree:
                kills.add(at_min[0].arrows, band_min)
        else:
            enum_cap = degree - lmin
        plans.append((name, gen, enum_cap))

    pivots = {}
    for name, gen, enum_cap in plans:
        hv, tv = q.head(name), q.tail(name)
        terms = list(gen.terms.items())
        for b in range(enum_cap + 1):
            for qword in index.words_left(hv, b):
                for a in range(enum_cap - b + 1):
                    live = [
                        (t, c) for t, c in terms
                        if len(t.arrows) + a + b <= degree
                    ]
                    for pword in index.words_right(tv, a):
                        row = {}
                        for tpath, coeff in live:
                            word = pword + tpath.arrows + qword
                            at = None if word else tpath.at
                            pid = index.pid(word, at)
                            row[pid] = row.get(pid, Fraction(0)) + coeff
                        _install(pivots, row, kills)

    pivots_at = [0] * (degree + 1)
    for lead in pivots:
        pivots_at[index.length_of(lead)] += 1
    killed_at = kills.counts(q, index.totals, degree)
    computed = [
        index.total(l) - pivots_at[l] - killed_at[l] for l in range(degree + 1)
    ]
    if any(c < 0 for c in computed):
        raise RuntimeError("more pivots than paths at some length")

    cert_len = None
    for l in range(1, degree + 1):
        if computed[l] == 0:
            cert_len = l
            break
    certified = cert_len is not None
    if certified:
        per_degree = tuple(computed[:cert_len]) + (0,) * (degree + 1 - cert_len)
        dimension = sum(computed[:cert_len])
    else:
        per_degree = tuple(computed)
        dimension = sum(computed)

    basis = None
    enum_to = cert_len if certified else degree + 1
    if index.offsets[enum_to] <= 200000:
        basis = []
        for l in range(enum_to):
            for pid in range(index.offsets[l], index.offsets[l + 1]):
                if pid not in pivots and not kills.killed_pid(pid):
                    basis.append(index.unrank(pid))
        basis = tuple(basis)

    quotient = TruncatedQuotient(
        qp=qp,
        degree=degree,
        per_degree=per_degree,
        dimension=dimension,
        certified=certified,
        certificate_length=cert_len,
        max_generator_length=maxgen,
        basis=basis,
        _index=index,
        _pivots=pivots,
        _kills=kills,
    )
    return quotient, certified


def g_path_independence_check(tq, x, n, degree):
    """Are all g-paths shorter than n·m_α − 1 independent in the quotient?

    Builds the weighted-cycle potential with cycle power n on the given
    once-punctured triangulation quiver, certifies the quotient at the
    given degree, reduces every g-path of length < n·m − 1, and checks that
    the residues are linearly independent over the rationals.  Raises if
    the certificate does not engage.
    """
    from .qp_mutation import QP
    from .surface import potential_Sxn

    pot = potential_Sxn(tq, x, n, degree)
    qp = QP(tq.quiver, pot)
    quotient, certified = quotient_dimension(qp, degree)
    if not certified:
        raise ValueError(
            "finiteness certificate unavailable at degree %d; "
            "cannot decide independence" % degree
        )
    index = quotient._index
    pivots = quotient._pivots
    m = tq.punctures[0].valency
    residues = []
    seen = set()
    for a in tq.quiver.arrows:
        for r in range(n * m - 1):
            p = tq.g_path(r, a.name)
            key = (p.arrows, p.at)
            if key in seen:
                continue
            seen.add(key)
            row = _reduce_against(
                pivots, {index.pid(p.arrows, p.at): Fraction(1)}, quotient._kills
            )
            residues.append(row)
    # Rank of the residue family must equal its size.
    scratch = {}
    rank = 0
    for row in residues:
        if _install(scratch, row, quotient._kills) is not None:
            rank += 1
    return rank == len(residues)
