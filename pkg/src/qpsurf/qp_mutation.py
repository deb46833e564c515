"""Mutation of quivers with potential at a vertex, and the flip check.

Premutation reverses the arrows at the chosen vertex, adds a composite
arrow for every length-2 path through it, and rewrites the potential in
terms of the composites.  Reduction then splits off the trivial part — the
2-cycles the premutation created — by an explicit change of variables,
returning the witness automorphism alongside the reduced quiver with
potential so the split can be re-verified.

``verify_flip_compatibility`` ties this to the surface geometry: mutating
the weighted-cycle potential at a flipped arc must land, after an explicit
chain of four substitutions, exactly on the flipped triangulation's
potential.  The report carries every intermediate witness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .endo import REndomorphism, compose
from .path_algebra import (
    Arrow,
    Path,
    Potential,
    Quiver,
    TruncatedElement,
    canonicalize_rotation,
    cyclic_derivative,
    is_cyclically_equivalent,
)
from .surface import build_quiver, flip, potential_Sxn


@dataclass(frozen=True)
class QP:
    """A quiver together with a potential truncated at the potential's degree."""

    quiver: Quiver
    potential: Potential

    def __post_init__(self):
        if self.potential.quiver is not self.quiver and self.potential.quiver != self.quiver:
            raise ValueError("potential lives on a different quiver")

    @property
    def degree(self):
        return self.potential.degree

    def to_json_dict(self):
        return {
            "quiver": self.quiver.to_json_dict(),
            "potential": self.potential.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, data):
        q = Quiver.from_json_dict(data["quiver"])
        return cls(q, Potential.from_json_dict(q, data["potential"]))


def is_two_acyclic(quiver):
    """True iff no pair of arrows i→j, j→i with i ≠ j exists."""
    seen = set()
    for a in quiver.arrows:
        if a.tail == a.head:
            continue
        if (a.head, a.tail) in seen:
            return False
        seen.add((a.tail, a.head))
    return True


def _incident(quiver, name, k):
    a = quiver.arrow(name)
    return a.tail == k or a.head == k


def _bracket_word(old, k, word):
    """Rewrite a written word on the premutated quiver's arrow names.

    Adjacent (out-of-k, into-k) pairs become composite names; all other
    arrows keep their names.  The word must contain no unpaired arrow
    incident to k, which holds for any segment cut between two
    non-incident arrows and for cycles rotated off an into-k start.
    """
    out_word = []
    i = 0
    while i < len(word):
        nm = word[i]
        if old.tail(nm) == k:
            if i + 1 >= len(word) or old.head(word[i + 1]) != k:
                raise ValueError("unpaired arrow %r leaving the mutated vertex" % nm)
            out_word.append("[%s%s]" % (nm, word[i + 1]))
            i += 2
        elif old.head(nm) == k:
            raise ValueError("unpaired arrow %r entering the mutated vertex" % nm)
        else:
            out_word.append(nm)
            i += 1
    return tuple(out_word)


def _bracket_cycle(old, new, k, p):
    w = p.arrows
    if not any(_incident(old, nm, k) for nm in w):
        return new.path(w)
    for r in range(len(w)):
        rot = w[r:] + w[:r]
        if old.head(rot[0]) != k:
            return new.path(_bracket_word(old, k, rot))
    raise ValueError("cycle %r consists entirely of arrows into %r" % (p, k))


def premutate(qp, k):
    """Premutation at vertex k: composite arrows through k, reversed arrows
    at k, and the connecting cubic terms.  The output is generally not
    2-acyclic; reduction cancels the degree-2 part afterwards."""
    q = qp.quiver
    if k not in q.vertices:
        raise ValueError("unknown vertex %r" % (k,))
    for a in q.arrows:
        if a.tail == k and a.head == k:
            raise ValueError("vertex %r carries a loop; premutation undefined" % (k,))
    ins = [a for a in q.arrows if a.head == k]
    outs = [a for a in q.arrows if a.tail == k]
    for a in ins:
        for b in outs:
            if b.head == a.tail:
                raise ValueError(
                    "2-cycle through %r via %s and %s; premutation undefined"
                    % (k, a.name, b.name)
                )
    untouched = [a for a in q.arrows if not (a.tail == k or a.head == k)]
    composites = [
        Arrow("[%s%s]" % (b.name, a.name), a.tail, b.head) for b in outs for a in ins
    ]
    stars = [Arrow(a.name + "*", k, a.tail) for a in ins] + [
        Arrow(b.name + "*", b.head, k) for b in outs
    ]
    new_q = Quiver(q.vertices, untouched + composites + stars)
    d = qp.degree
    bracketed = Potential.zero(new_q, d)
    for p, z in qp.potential.terms.items():
        bracketed = bracketed + Potential(
            new_q, d, {_bracket_cycle(q, new_q, k, p): z}
        )
    delta = Potential.zero(new_q, d)
    for a in ins:
        for b in outs:
            cyc = new_q.path((a.name + "*", b.name + "*", "[%s%s]" % (b.name, a.name)))
            delta = delta + Potential(new_q, d, {cyc: Fraction(1)})
    return QP(new_q, bracketed + delta)


# ----------------------------------------------------------------------
# Reduction: splitting off the trivial part
# ----------------------------------------------------------------------

@dataclass
class ReductionWitness:
    """Everything needed to re-verify a reduction independently.

    ``endo`` acts on the input quiver and carries the input potential to
    ``trivial + embedded_reduced`` up to cyclic equivalence; deleting the
    paired arrows then yields the reduced QP.
    """

    endo: REndomorphism
    pairs: tuple
    trivial: Potential
    embedded_reduced: Potential
    removed: tuple

    def recheck(self, qp):
        got = self.endo.apply(qp.potential)
        return is_cyclically_equivalent(got, self.trivial + self.embedded_reduced)


def _quadratic_classes(pot):
    return {p: z for p, z in pot.terms.items() if len(p) == 2}


def reduce(qp):
    """Split a QP into its reduced part and a sum of 2-cycles, with witness.

    First a linear change of arrows over the rationals turns the degree-2
    part into a sum of distinct-pair 2-cycles with coefficient 1; then
    repeated substitutions push every longer occurrence of a paired arrow
    above the truncation degree.  The paired arrows are deleted from the
    output.  Fails loudly if the iteration has not stabilized after D
    rounds.
    """
    q = qp.quiver
    d = qp.degree
    pot = qp.potential
    total = REndomorphism.identity(q, d)
    pairs = []

    def record(rules):
        nonlocal total, pot
        phi = REndomorphism(q, d, rules)
        pot = phi.apply(pot)
        total = compose(phi, total)

    # Linear normalization: pick 2-cycle pivots in canonical order and
    # clean their rows and columns, recomputing after each pivot so the
    # cleanup dust is handled by later pivots.
    while True:
        quad = _quadratic_classes(pot)
        paired_arrows = {nm for uv in pairs for nm in uv}
        candidates = [
            p for p in quad if not (set(p.arrows) & paired_arrows)
        ]
        if not candidates:
            break
        pivot = min(candidates, key=lambda p: tuple(q.rank(nm) for nm in p.arrows))
        w0, w1 = pivot.arrows
        if w0 == w1:
            raise ValueError(
                "quadratic part contains the square of loop %r; "
                "not splittable over the rationals" % w0
            )
        z = quad[pivot]
        if z != 1:
            record({w0: TruncatedElement.from_arrow(q, d, w0, Fraction(1, 1) / z)})
            quad = _quadratic_classes(pot)
        x_corr = {}
        y_corr = {}
        for p, c in quad.items():
            if p == pivot:
                continue
            u, v = p.arrows
            if u == v:
                raise ValueError(
                    "quadratic part has a repeated-arrow class %r; "
                    "not splittable over the rationals" % (p,)
                )
            for (one, other) in ((u, v), (v, u)):
                if one == w1 and other != w0:
                    x_corr[other] = x_corr.get(other, Fraction(0)) + c
                if one == w0 and other != w1:
                    y_corr[other] = y_corr.get(other, Fraction(0)) + c
        rules = {}
        if x_corr:
            img = TruncatedElement.from_arrow(q, d, w0)
            for nm, c in x_corr.items():
                img = img - TruncatedElement.from_arrow(q, d, nm, c)
            rules[w0] = img
        if y_corr:
            img = TruncatedElement.from_arrow(q, d, w1)
            for nm, c in y_corr.items():
                img = img - TruncatedElement.from_arrow(q, d, nm, c)
            rules[w1] = img
        if rules:
            record(rules)
        pairs.append((w0, w1))

    pairs = tuple(pairs)
    paired_arrows = {nm for uv in pairs for nm in uv}
    trivial = Potential.zero(q, d)
    for w0, w1 in pairs:
        trivial = trivial + Potential(q, d, {q.path((w0, w1)): Fraction(1)})

    def contamination(p):
        rest = p - trivial
        return [
            pth for pth in rest.terms if set(pth.arrows) & paired_arrows
        ]

    rounds = 0
    while contamination(pot):
        rounds += 1
        if rounds > d:
            raise RuntimeError(
                "trivial-part elimination did not stabilize within %d rounds" % d
            )
        for w0, w1 in pairs:
            rest = pot - trivial
            du = TruncatedElement(q, d, cyclic_derivative(rest, w0).terms)
            dv = TruncatedElement(q, d, cyclic_derivative(rest, w1).terms)
            rules = {}
            if not dv.is_zero:
                rules[w0] = TruncatedElement.from_arrow(q, d, w0) - dv
            if not du.is_zero:
                rules[w1] = TruncatedElement.from_arrow(q, d, w1) - du
            if rules:
                record(rules)

    embedded = pot - trivial
    if not embedded.is_zero and embedded.short < 3:
        raise RuntimeError("reduced potential has a term shorter than 3")
    survivors = [a for a in q.arrows if a.name not in paired_arrows]
    red_q = Quiver(q.vertices, survivors)
    red_pot = Potential(
        red_q, d, {red_q.path(p.arrows): z for p, z in embedded.terms.items()}
    )
    witness = ReductionWitness(
        endo=total,
        pairs=pairs,
        trivial=trivial,
        embedded_reduced=embedded,
        removed=tuple(sorted(paired_arrows, key=q.rank)),
    )
    if not witness.recheck(qp):
        raise RuntimeError("reduction witness failed its own recheck")
    return QP(red_q, red_pot), witness


@dataclass
class MutationWitness:
    premutated: QP
    reduction: ReductionWitness

    def recheck(self, qp, k):
        again = premutate(qp, k)
        if again.quiver != self.premutated.quiver:
            return False
        if not is_cyclically_equivalent(again.potential, self.premutated.potential):
            return False
        return self.reduction.recheck(self.premutated)


def mutate(qp, k):
    pre = premutate(qp, k)
    red, rwitness = reduce(pre)
    return red, MutationWitness(premutated=pre, reduction=rwitness)


# ----------------------------------------------------------------------
# Flip compatibility
# ----------------------------------------------------------------------

def _triangle_labels(tq, k):
    """The (b, a, c) arrow names of one triangle containing arc k.

    b leaves k, c enters k, a is the third side's arrow.
    """
    out = {}
    for i, tri in enumerate(tq.tau.triangles):
        if k not in tri:
            continue
        arrows = [a for a in tq.quiver.arrows if tq.triangle_index[a.name] == i]
        b = next(a.name for a in arrows if a.tail == k)
        c = next(a.name for a in arrows if a.head == k)
        a_ = next(a.name for a in arrows if k not in (a.tail, a.head))
        out[i] = (b, a_, c)
    if len(out) != 2:
        raise ValueError("arc %r does not lie in two distinct triangles" % (k,))
    return out


def _segment_element(old, new, k, seg, at_vertex, degree):
    word = _bracket_word(old, k, seg)
    p = new.path(word, at=at_vertex if not word else None)
    return TruncatedElement.from_path(new, degree, p)


@dataclass
class FlipReport:
    """Outcome of checking flip-vs-mutation compatibility at one arc."""

    ok: bool
    arc: object
    x: Fraction
    n: int
    degree: int
    checks: tuple
    first_difference: object
    renaming: dict
    phi: REndomorphism
    premutated: QP
    reduction: ReductionWitness
    reduced: QP
    transported: Potential
    expected: Potential

    def summary_lines(self):
        lines = []
        for name, ok, detail in self.checks:
            lines.append("%s %s%s" % ("PASS" if ok else "FAIL", name,
                                      (": " + detail) if detail else ""))
        return lines


def _first_difference(got, want):
    keys = set(got.terms) | set(want.terms)
    if not keys:
        return None
    order = sorted(
        keys, key=lambda p: (len(p), tuple(got.quiver.rank(nm) for nm in p.arrows))
    )
    for p in order:
        a = got.terms.get(p, Fraction(0))
        b = want.terms.get(p, Fraction(0))
        if a != b:
            return "%r: got %s, expected %s" % (p, a, b)
    return None


def verify_flip_compatibility(tau, k, x, n, degree, perturb=None):
    """Check that mutation at a flipped arc reproduces the flipped potential.

    Premutates the weighted-cycle potential at k, applies the explicit
    four-substitution chain, reduces, renames composite and starred arrows
    to the flipped triangulation's arrows via the forced arc matching, and
    compares exactly with the flipped potential at the same truncation.
    ``perturb`` (a Potential on the flipped quiver) is added to the
    expected side, for negative controls.
    """
    checks = []
    tq1 = build_quiver(tau)
    s1 = potential_Sxn(tq1, x, n, degree)
    sigma = flip(tau, k)
    tq2 = build_quiver(sigma)
    s2 = potential_Sxn(tq2, x, n, degree)
    if perturb is not None:
        s2 = s2 + perturb

    pre = premutate(QP(tq1.quiver, s1), k)
    new_q = pre.quiver
    labels = _triangle_labels(tq1, k)
    (i1, i2) = sorted(labels)
    b1, a1, c1 = labels[i1]
    b2, a2, c2 = labels[i2]

    # Split the puncture cycle around a1 and a2: 𝒢 ~rot a1 · A · a2 · B.
    gword = tq1.puncture_cycle(tq1.punctures[0].pid).arrows
    if gword.count(a1) != 1 or gword.count(a2) != 1:
        raise ValueError("puncture cycle does not visit the flip triangles once")
    r = gword.index(a1)
    rot = gword[r:] + gword[:r]
    j = rot.index(a2)
    seg_a, seg_b = rot[1:j], rot[j + 1:]

    old_q = tq1.quiver
    d = degree
    a_el = _segment_element(old_q, new_q, k, seg_a, old_q.tail(a1), d)
    b_el = _segment_element(old_q, new_q, k, seg_b, old_q.tail(a2), d)

    def e(name, coeff=1):
        return TruncatedElement.from_arrow(new_q, d, name, coeff)

    c1s_b1s = e(c1 + "*") * e(b1 + "*")
    c2s_b2s = e(c2 + "*") * e(b2 + "*")
    a1_el, a2_el = e(a1), e(a2)
    xq = Fraction(x)

    phi1 = REndomorphism(new_q, d, {a1: a1_el - c1s_b1s})
    base1 = a_el * a2_el * b_el
    corr2 = TruncatedElement.zero(new_q, d)
    for jj in range(n):
        term = base1
        for _ in range(n - jj - 1):
            term = term * ((a1_el - c1s_b1s) * base1)
        for _ in range(jj):
            term = term * (c1s_b1s * base1)
        corr2 = corr2 + term.scale(xq * (-1) ** jj)
    phi2 = REndomorphism(new_q, d, {"[%s%s]" % (b1, c1): e("[%s%s]" % (b1, c1)) - corr2})
    phi3 = REndomorphism(new_q, d, {a2: a2_el - c2s_b2s})
    base2 = b_el * c1s_b1s * a_el
    corr4 = TruncatedElement.zero(new_q, d)
    for jj in range(n):
        term = base2
        for _ in range(n - jj - 1):
            term = term * ((a2_el - c2s_b2s) * base2)
        for _ in range(jj):
            term = term * (c2s_b2s * base2)
        corr4 = corr4 + term.scale(xq * (-1) ** (n + jj))
    phi4 = REndomorphism(new_q, d, {"[%s%s]" % (b2, c2): e("[%s%s]" % (b2, c2)) - corr4})
    phi = compose(phi4, compose(phi3, compose(phi2, phi1)))

    transformed = phi.apply(pre.potential)
    red, rwitness = reduce(QP(new_q, transformed))
    checks.append(("reduction witness recheck", rwitness.recheck(QP(new_q, transformed)), ""))
    expected_pairs = {(a1, "[%s%s]" % (b1, c1)), (a2, "[%s%s]" % (b2, c2))}
    checks.append((
        "trivial part is the two expected 2-cycles",
        {frozenset(uv) for uv in rwitness.pairs} == {frozenset(uv) for uv in expected_pairs},
        "got %r" % (rwitness.pairs,),
    ))

    # Forced arc matching: each new triangle of the flip takes the
    # composite arrow on its first side and the two stars after it.
    def sigma_arrow(tri_idx, tail, head):
        for a in tq2.quiver.arrows:
            if tq2.triangle_index[a.name] == tri_idx and a.tail == tail and a.head == head:
                return a.name
        raise ValueError("no arrow %r->%r in flipped triangle %d" % (tail, head, tri_idx))

    t1 = sigma.triangles[i1]  # (s2, s3, k)
    t2 = sigma.triangles[i2]  # (s4, s1, k)
    s2_, s3_, _ = t1
    s4_, s1_, _ = t2
    renaming = {
        "[%s%s]" % (b2, c1): sigma_arrow(i1, s2_, s3_),
        b2 + "*": sigma_arrow(i1, s3_, k),
        c1 + "*": sigma_arrow(i1, k, s2_),
        "[%s%s]" % (b1, c2): sigma_arrow(i2, s4_, s1_),
        b1 + "*": sigma_arrow(i2, s1_, k),
        c2 + "*": sigma_arrow(i2, k, s4_),
    }
    for a in red.quiver.arrows:
        renaming.setdefault(a.name, a.name)

    got_arrows = {
        (renaming[a.name], a.tail, a.head) for a in red.quiver.arrows
    }
    want_arrows = {(a.name, a.tail, a.head) for a in tq2.quiver.arrows}
    iso_ok = got_arrows == want_arrows and len(renaming) == len(tq2.quiver.arrows)
    checks.append((
        "quiver matches the flipped triangulation's quiver",
        iso_ok,
        "" if iso_ok else "difference %r" % (got_arrows ^ want_arrows,),
    ))

    first_diff = None
    transported = Potential.zero(tq2.quiver, d)
    if iso_ok:
        transported = Potential(
            tq2.quiver,
            d,
            {
                tq2.quiver.path(tuple(renaming[nm] for nm in p.arrows)): z
                for p, z in red.potential.terms.items()
            },
        )
        same = is_cyclically_equivalent(transported, s2)
        if not same:
            first_diff = _first_difference(transported, s2)
        checks.append((
            "potential equals the flipped potential exactly",
            same,
            first_diff or "",
        ))
    else:
        checks.append(("potential equals the flipped potential exactly", False,
                       "skipped: quiver mismatch"))

    ok = all(c[1] for c in checks)
    return FlipReport(
        ok=ok,
        arc=k,
        x=xq,
        n=n,
        degree=degree,
        checks=tuple(checks),
        first_difference=first_diff,
        renaming=renaming,
        phi=phi,
        premutated=pre,
        reduction=rwitness,
        reduced=red,
        transported=transported,
        expected=s2,
    )
