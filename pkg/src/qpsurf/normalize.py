"""Right-equivalence normalization pipeline for surface potentials.

Every operation here returns the substitution that realizes its claim, so
callers can re-verify the equivalence independently — the tests always do.
All stages are truncation-exact: nothing of length ≤ D is silently
dropped, and each stage asserts its own inequality contract and fails
loudly otherwise.

The stages, in pipeline order: split a potential along the cycle
trichotomy; rescale one arrow per triangle so every triangle 3-cycle has
unit coefficient; trade the f/fg parts for longer terms; iterate that
trade until only powers of puncture cycles remain; walk a single pinched
cycle around its puncture step by step (the ζ moves) and absorb it; and
finally absorb all higher powers of the puncture cycles on the
two-puncture family, leaving the bare weighted-cycle potential.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import inf
import warnings

from .endo import REndomorphism, compose, compose_all, limit_compose
from .path_algebra import (
    Path,
    Potential,
    TruncatedElement,
    canonicalize_rotation,
    is_cyclically_equivalent,
)
from .surface import (
    _coerce_x,
    _require_conditions,
    classify_cycle,
    potential_S,
    potential_T,
)


@dataclass(frozen=True)
class SplitPotential:
    """A potential split along the cycle trichotomy; parts have disjoint support."""

    s_f: Potential
    s_g: Potential
    s_fg: Potential

    def total(self):
        return self.s_f + self.s_g + self.s_fg


def split(tq, pot):
    _require_conditions(tq)
    q = tq.quiver
    buckets = {"F": {}, "G": {}, "FG": {}}
    for p, c in pot.terms.items():
        cls = classify_cycle(tq, p)
        buckets[cls.kind][p] = c
    d = pot.degree
    return SplitPotential(
        Potential(q, d, buckets["F"], validate=False),
        Potential(q, d, buckets["G"], validate=False),
        Potential(q, d, buckets["FG"], validate=False),
    )


def _triangle_cycles(tq, degree):
    return {
        canonicalize_rotation(tq.quiver, tq.triangle_cycle(i)): i
        for i in range(len(tq.tau.triangles))
    }


def _check_disjoint_from_triangles(tq, pot, what):
    tri = _triangle_cycles(tq, pot.degree)
    hits = [p for p in pot.terms if p in tri]
    if hits:
        raise ValueError(
            "%s must be rotationally disjoint from the triangle cycles; "
            "offending terms: %r" % (what, hits)
        )


def normalize_triangle_coefficients(tq, pot):
    """Rescale one arrow per triangle so every triangle 3-cycle gets coefficient 1.

    The substitution divides a chosen arrow of each triangle by that
    triangle's 3-cycle coefficient; it is a (non-unitriangular) diagonal
    automorphism.  Returns it together with the rescaled potential, whose
    non-triangle remainder is rotationally disjoint from the triangle sum.
    """
    _require_conditions(tq)
    q = tq.quiver
    d = pot.degree
    rules = {}
    for cyc, i in _triangle_cycles(tq, d).items():
        z = pot.terms.get(cyc, Fraction(0))
        if z == 0:
            raise ValueError(
                "triangle %d (sides %r) has no 3-cycle term; cannot normalize"
                % (i, tq.tau.triangles[i])
            )
        if z == 1:
            continue
        alpha = min(cyc.arrows, key=q.rank)
        rules[alpha] = TruncatedElement.from_arrow(q, d, alpha, Fraction(1, 1) / z)
    phi = REndomorphism(q, d, rules)
    out = phi.apply(pot)
    for cyc, i in _triangle_cycles(tq, d).items():
        if out.terms.get(cyc) != 1:
            raise RuntimeError("triangle %d still lacks unit coefficient" % i)
    return phi, out


def lengthen(tq, symbol, w_pot, a_pot):
    """Trade the chosen part of A (f- or fg-type) for strictly longer terms.

    Returns (φ, B) with φ carrying T+W+A to T+W+B.  For symbol "f" the
    substitution subtracts, from one arrow per triangle, the tails of that
    triangle's cycle-power terms; for "fg" it subtracts ω_a from a, where
    A_fg = Σ f²(a)f(a)ω_a read off each term's pinch-point rotation.
    """
    if symbol not in ("f", "fg"):
        raise ValueError("symbol must be 'f' or 'fg'")
    _require_conditions(tq)
    q = tq.quiver
    d = min(w_pot.degree, a_pot.degree)
    w_pot = w_pot.truncate(d)
    a_pot = a_pot.truncate(d)
    t_pot = potential_T(tq, d)
    _check_disjoint_from_triangles(tq, w_pot, "W")
    _check_disjoint_from_triangles(tq, a_pot, "A")
    parts = split(tq, a_pot)
    a_phi = parts.s_f if symbol == "f" else parts.s_fg
    if a_phi.is_zero:
        raise ValueError("the %s-part of A is zero; nothing to lengthen" % symbol)
    short_a_phi = a_phi.short

    corrections = {}
    if symbol == "f":
        for p, z in a_phi.terms.items():
            cls = classify_cycle(tq, p)
            assert cls.kind == "F" and cls.n >= 2, (
                "length-3 terms of A would overlap the triangle cycles"
            )
            alpha = min(p.arrows, key=q.rank)
            cyc = tq.f_path(3, alpha).arrows
            tail = Path((alpha,) + cyc * (cls.n - 1))
            corrections.setdefault(alpha, []).append((tail, z))
    else:
        for p, z in a_phi.terms.items():
            cls = classify_cycle(tq, p)
            assert cls.kind == "FG"
            # The pinch rotation reads f²(a)·f(a)·ω with ω parallel to a;
            # ω starts with the g-step arrow preceding the stored tail.
            a = cls.witness_arrow
            omega = Path((tq.g_inv[tq.f_of(a)],) + cls.remainder.arrows)
            corrections.setdefault(a, []).append((omega, z))
    rules = {}
    for alpha, tails in corrections.items():
        img = TruncatedElement.from_arrow(q, d, alpha)
        for tail, z in tails:
            img = img - TruncatedElement.from_path(q, d, tail, z)
        rules[alpha] = img
    phi = REndomorphism(q, d, rules)
    dep = phi.depth()
    if dep != short_a_phi - 3:
        raise RuntimeError(
            "substitution depth %s disagrees with short(A_%s) - 3 = %d"
            % (dep, symbol, short_a_phi - 3)
        )
    b_pot = phi.apply(t_pot + w_pot + a_pot) - t_pot - w_pot
    _check_disjoint_from_triangles(tq, b_pot, "B")
    b_parts = split(tq, b_pot)
    b_phi = b_parts.s_f if symbol == "f" else b_parts.s_fg
    b_nu = b_parts.s_fg if symbol == "f" else b_parts.s_f
    a_nu = parts.s_fg if symbol == "f" else parts.s_f
    checks = [
        b_phi.short > short_a_phi,
        b_parts.s_g.short >= min(parts.s_g.short, short_a_phi + 1),
        b_nu.short >= min(a_nu.short, short_a_phi + 1),
    ]
    if not all(checks):
        raise RuntimeError(
            "lengthening inequalities failed: %r (A parts %s/%s/%s, B parts %s/%s/%s)"
            % (
                checks,
                parts.s_f.short, parts.s_g.short, parts.s_fg.short,
                b_parts.s_f.short, b_parts.s_g.short, b_parts.s_fg.short,
            )
        )
    return phi, b_pot


def g_normal_form(tq, z_pot, u_pot):
    """Iterate the lengthening trade until only puncture-cycle powers remain.

    Returns (φ, W) with φ unitriangular of depth ≥ short(U) − 3 carrying
    T+Z+U to T+Z+W, where W involves only positive powers of the puncture
    cycles and short(W) ≥ short(U).  Z rides along untouched as a label;
    its substitution dust is recycled into the loop state.
    """
    _require_conditions(tq)
    q = tq.quiver
    d = min(z_pot.degree, u_pot.degree)
    z_pot = z_pot.truncate(d)
    u_pot = u_pot.truncate(d)
    t_pot = potential_T(tq, d)
    _check_disjoint_from_triangles(tq, z_pot, "Z")
    _check_disjoint_from_triangles(tq, u_pot, "U")
    short_u = u_pot.short

    first = split(tq, u_pot)
    state = {"w": first.s_g, "u": u_pot - first.s_g, "rounds": 0}
    shorts = [state["u"].short]

    def factor_stream():
        while not state["u"].is_zero:
            state["rounds"] += 1
            if state["rounds"] > 2 * d + 4:
                raise RuntimeError("normal-form loop failed to terminate")
            parts = split(tq, state["u"])
            symbol = "f" if parts.s_f.short <= parts.s_fg.short else "fg"
            phi_n, b_pot = lengthen(tq, symbol, z_pot + state["w"], state["u"])
            b_parts = split(tq, b_pot)
            if not b_parts.s_g.is_zero and b_parts.s_g.short < shorts[-1] + 1:
                raise RuntimeError("new puncture-power terms appeared too short")
            state["w"] = state["w"] + b_parts.s_g
            state["u"] = b_pot - b_parts.s_g
            shorts.append(state["u"].short)
            if len(shorts) >= 3 and shorts[-1] != inf and shorts[-1] < shorts[-3] + 1:
                raise RuntimeError(
                    "two-step growth violated: shorts %r" % (shorts[-3:],)
                )
            yield phi_n

    phi = limit_compose(factor_stream(), q, d)
    w_final = state["w"]
    final_parts = split(tq, w_final)
    if not (final_parts.s_f.is_zero and final_parts.s_fg.is_zero):
        raise RuntimeError("normal form retains non-puncture-power terms")
    if w_final.short < short_u:
        raise RuntimeError("normal form shortened the potential")
    if not u_pot.is_zero and phi.depth() < short_u - 3:
        raise RuntimeError("witness depth below short(U) - 3")
    lhs = phi.apply(t_pot + z_pot + u_pot)
    rhs = t_pot + z_pot + w_final
    if not is_cyclically_equivalent(lhs, rhs):
        raise RuntimeError("normal-form witness failed re-verification")
    return phi, w_final


# ----------------------------------------------------------------------
# The ζ machinery: walking a pinched cycle around its puncture
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class WData:
    """The data (λ, a, c) of a single-term potential W = λ·f(a)·a·G(t, g^{-t}(a))·c."""

    lam: Fraction
    arrow: str
    c: Path


def w_cycle(tq, t, wd):
    """The cycle path λ is attached to; validates composability."""
    if t < 0:
        raise ValueError("negative g-run length")
    a = wd.arrow
    gpart = tq.g_path(t, tq.g_of(a, -t))
    word = (tq.f_of(a), a) + gpart.arrows + wd.c.arrows
    p = tq.quiver.path(word)
    if not tq.quiver.is_cycle(p):
        raise ValueError("W-data does not close up into a cycle")
    return p


def _w_potential(tq, degree, t, wd):
    return Potential(
        tq.quiver, degree, {w_cycle(tq, t, wd): Fraction(wd.lam)}
    )


def _check_disjoint_from(base, pot, what):
    hits = [p for p in pot.terms if p in base.terms]
    if hits:
        raise ValueError(
            "%s shares rotation classes with the base potential: %r" % (what, hits)
        )


def zeta_step(tq, x, m, t, u_pot, wd):
    """One walk step: trade W = λf(a)aG(t,·)c against the base potential.

    Substituting f⁻¹(a) ↦ f⁻¹(a) − λG(t, g^{-t}(a))c cancels W against the
    triangle term of f⁻¹(a) and converts the puncture term it sits on into
    the next cycle W′, one g-step shorter in t but longer overall.  Returns
    (ζ, U′, W′-data) and verifies ζ(S+U+W) = S+U+U′+W′ exactly.
    """
    q = tq.quiver
    d = u_pot.degree
    xs = _coerce_x(tq, x)
    s_pot = potential_S(tq, xs, d)
    if t < 1:
        raise ValueError("the g-run length t must be positive")
    if Fraction(wd.lam) == 0:
        raise ValueError("W must have a nonzero coefficient")
    w_pot = _w_potential(tq, d, t, wd)
    short_w = t + 2 + len(wd.c)
    if u_pot.short < m:
        raise ValueError(
            "hypothesis short(U) >= m fails: %s < %d" % (u_pot.short, m)
        )
    if not 2 * short_w - 3 > m:
        raise ValueError(
            "hypothesis 2·short(W) - 3 > m fails: 2·%d - 3 <= %d" % (short_w, m)
        )
    _check_disjoint_from(s_pot, u_pot, "U")
    _check_disjoint_from(s_pot, w_pot, "W")

    a = wd.arrow
    target = tq.f_of(a, -1)
    corr_word = tq.g_path(t, tq.g_of(a, -t)).arrows + wd.c.arrows
    image = TruncatedElement.from_arrow(q, d, target) - TruncatedElement.from_path(
        q, d, q.path(corr_word), wd.lam
    )
    zeta = REndomorphism(q, d, {target: image})
    if not zeta.is_unitriangular():
        raise ValueError(
            "the step substitution is not unitriangular (depth %s); "
            "short(W) = %d is too small" % (zeta.depth(), short_w)
        )
    if zeta.depth() != short_w - 3:
        raise RuntimeError("unexpected step depth %s" % zeta.depth())

    u_prime = zeta.apply(u_pot + w_pot) - (u_pot + w_pot)
    pid = tq.puncture_of(target)
    lam2 = -Fraction(wd.lam) * xs[pid]
    b = tq.g_of(a, -1)
    c2 = q.path(wd.c.arrows + tq.g_path(tq.m_of(target) - 2, tq.g_of(target, 2)).arrows)
    wd2 = WData(lam2, b, c2)
    w2_pot = _w_potential(tq, d, t - 1, wd2)

    lhs = zeta.apply(s_pot + u_pot + w_pot)
    rhs = s_pot + u_pot + u_prime + w2_pot
    if not is_cyclically_equivalent(lhs, rhs):
        raise RuntimeError("step identity failed exact re-verification")
    if not u_prime.short > m:
        raise RuntimeError("short(U') = %s is not > m = %d" % (u_prime.short, m))
    short_w2 = (t - 1) + 2 + len(c2)
    if short_w2 != tq.m_of(target) - 2 + short_w - 1:
        raise RuntimeError("short(W') does not match the predicted value")
    return zeta, u_prime, wd2


def absorb_cycle(tq, x, m, t, u_pot, wd):
    """Walk W all the way around (t steps) and normalize what accumulates.

    Requires c to be a single arrow so the walk terminates exactly at
    t = 0.  Returns (Π, ξ): a unitriangular witness of depth
    ≥ min(m−3, short(W)−3) carrying S+U+W to S+U+ξ, with ξ a sum of
    puncture-cycle powers, short(ξ) > m.
    """
    if len(wd.c) != 1:
        raise ValueError("absorption needs the closing path c to be a single arrow")
    q = tq.quiver
    d = u_pot.degree
    xs = _coerce_x(tq, x)
    s_pot = potential_S(tq, xs, d)
    short_w0 = t + 2 + len(wd.c)
    w0_pot = _w_potential(tq, d, t, wd)

    zetas = []
    z_sum = Potential.zero(q, d)
    cur_u, cur_t, cur_wd = u_pot, t, wd
    while cur_t >= 1:
        if _w_potential(tq, d, cur_t, cur_wd).is_zero:
            # The walked cycle grew past the truncation degree: nothing
            # left to trade, the remaining steps are identities.
            break
        zeta, z_new, cur_wd = zeta_step(tq, xs, m, cur_t, cur_u, cur_wd)
        zetas.append(zeta)
        z_sum = z_sum + z_new
        cur_u = cur_u + z_new
        cur_t -= 1
    zeta_chain = compose_all(zetas, q, d)

    w_t_pot = _w_potential(tq, d, cur_t, cur_wd)
    phi, xi = g_normal_form(tq, (s_pot - potential_T(tq, d)) + u_pot, z_sum + w_t_pot)
    pi = compose(phi, zeta_chain)

    lhs = pi.apply(s_pot + u_pot + w0_pot)
    rhs = s_pot + u_pot + xi
    if not is_cyclically_equivalent(lhs, rhs):
        raise RuntimeError("absorption witness failed exact re-verification")
    if not xi.short > m:
        raise RuntimeError("short(ξ) = %s is not > m = %d" % (xi.short, m))
    if pi.depth() < min(m - 3, short_w0 - 3):
        raise RuntimeError("absorption witness depth %s below bound" % pi.depth())
    return pi, xi


# ----------------------------------------------------------------------
# Absorbing all higher powers of the puncture cycles (two punctures)
# ----------------------------------------------------------------------

def _power_table(tq, degree):
    """Canonical rotation class of each puncture-cycle power up to the degree."""
    table = {}
    for p in tq.punctures:
        word = tq.puncture_cycle(p.pid).arrows
        n = 1
        while n * p.valency <= degree:
            key = canonicalize_rotation(tq.quiver, Path(word * n))
            table[key] = (p.pid, n)
            n += 1
    return table


def decompose_g_powers(tq, pot):
    """Write a potential as Σ λ_{p,n}·𝒢(p)ⁿ, or fail if it has other terms."""
    table = _power_table(tq, pot.degree)
    out = {p.pid: {} for p in tq.punctures}
    for path, coeff in pot.terms.items():
        hit = table.get(path)
        if hit is None:
            raise ValueError("not a sum of puncture-cycle powers: term %r" % (path,))
        pid, n = hit
        out[pid][n] = coeff
    return out


def absorb_g_powers(tq, x, v_pot):
    """Absorb all ≥2-powers of the puncture cycles into the base potential.

    On the two-puncture family, S(τ,x)+V is right-equivalent to S(τ,x) for
    any V made of second and higher powers of the two puncture cycles.
    Alternates the rim and hub punctures (larger valency first): divide the
    lowest surviving power into the base cycle's coefficient, then absorb
    the pinched cycle this creates.  Returns the composite witness.
    """
    _require_conditions(tq)
    q = tq.quiver
    d = v_pot.degree
    xs = _coerce_x(tq, x)
    if len(tq.punctures) != 2:
        raise ValueError(
            "absorption works on two-puncture quivers; this one has %d punctures"
            % len(tq.punctures)
        )
    order = sorted(tq.punctures, key=lambda p: (-p.valency, p.pid))
    if order[0].valency != 2 * order[1].valency:
        warnings.warn(
            "puncture valencies %r are outside the family the absorption "
            "claim is proved for; proceeding anyway"
            % ([p.valency for p in order],)
        )
    s_pot = potential_S(tq, xs, d)
    powers = decompose_g_powers(tq, v_pot)
    for pid, by_n in powers.items():
        if any(n < 2 for n in by_n):
            raise ValueError(
                "a first power of the %s cycle cannot be absorbed: it would "
                "change the base potential" % pid
            )

    state = {"v": v_pot, "rounds": 0}

    def factor_stream():
        while not state["v"].is_zero:
            state["rounds"] += 1
            if state["rounds"] > d:
                raise RuntimeError("absorption failed to terminate")
            m = state["v"].short
            for punc in order:
                by_n = decompose_g_powers(tq, state["v"])[punc.pid]
                if not by_n:
                    continue
                r = min(by_n)
                lam = by_n[r]
                if r < 2:
                    raise RuntimeError("a first power appeared mid-absorption")
                a_p = punc.arrows[0]
                cyc = tq.puncture_cycle(punc.pid).arrows
                tail = Path((a_p,) + cyc * (r - 1))
                image = TruncatedElement.from_arrow(q, d, a_p) - TruncatedElement.from_path(
                    q, d, tail, lam / xs[punc.pid]
                )
                upsilon = REndomorphism(q, d, {a_p: image})
                if upsilon.depth() != punc.valency * (r - 1):
                    raise RuntimeError("unexpected divide-out depth")
                t = punc.valency * (r - 1)
                wd = WData(-lam / xs[punc.pid], a_p, Path((tq.f_of(a_p, 2),)))
                w_pot = _w_potential(tq, d, t, wd)
                u_resid = upsilon.apply(s_pot + state["v"]) - s_pot - w_pot
                if not u_resid.is_zero and u_resid.short < m:
                    raise RuntimeError("divide-out residual came out too short")
                decompose_g_powers(tq, u_resid)  # must stay a sum of powers
                yield upsilon
                if w_pot.is_zero:
                    state["v"] = u_resid
                    continue
                pi, xi = absorb_cycle(tq, xs, m, t, u_resid, wd)
                state["v"] = u_resid + xi
                yield pi
            if not state["v"].is_zero and state["v"].short <= m:
                raise RuntimeError(
                    "no progress: short stayed at %s" % state["v"].short
                )

    phi = limit_compose(factor_stream(), q, d)
    lhs = phi.apply(s_pot + v_pot)
    if not is_cyclically_equivalent(lhs, s_pot):
        raise RuntimeError("absorption witness failed exact re-verification")
    return phi
