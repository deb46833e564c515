"""Command-line front end.

Every subcommand produces a ``RunReport``: an echo of the command, digests
of its inputs, a PASS/FAIL/ERROR outcome, human-readable detail lines, and
a witness payload.  Witnesses carry enough data (endomorphism rules,
potentials, renamings) that ``--recheck`` can re-run the verification from
scratch and compare, so a PASS is never just a stored boolean.

Exit status: 0 for PASS, 1 for FAIL, 2 for ERROR (bad input, violated
preconditions, unreadable files).  All arithmetic is exact; given the same
inputs and seed the report is bit-for-bit reproducible, which is what makes
the recheck comparison meaningful.
"""

import argparse
import hashlib
import json
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .endo import REndomorphism
from .jacobian import g_path_independence_check, quotient_dimension
from .normalize import absorb_g_powers, g_normal_form, split
from .path_algebra import (
    Path,
    Potential,
    TruncatedElement,
    canonicalize_rotation,
    enumerate_cycle_classes,
    is_cyclically_equivalent,
)
from .qp_mutation import QP, is_two_acyclic, mutate, verify_flip_compatibility
from .surface import (
    Triangulation,
    build_quiver,
    check_conditions,
    classify_cycle,
    fg_witness_cycle,
    flip,
    once_punctured_torus,
    potential_S,
    potential_Sxn,
    potential_T,
    twice_punctured_genus,
)


@dataclass
class RunReport:
    """What a subcommand did, what it found, and how to check it again."""

    command: list
    inputs: dict
    outcome: str
    details: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def exit_code(self):
        return {"PASS": 0, "FAIL": 1, "ERROR": 2}[self.outcome]

    def to_json_dict(self):
        return {
            "command": list(self.command),
            "inputs": self.inputs,
            "outcome": self.outcome,
            "details": list(self.details),
            "witnesses": self.witnesses,
            "timings": self.timings,
        }

    @classmethod
    def from_json_dict(cls, data):
        return cls(
            command=list(data["command"]),
            inputs=data.get("inputs", {}),
            outcome=data["outcome"],
            details=list(data.get("details", [])),
            witnesses=data.get("witnesses", {}),
            timings=data.get("timings", {}),
        )


# ----------------------------------------------------------------------
# Input helpers
# ----------------------------------------------------------------------

def _digest_file(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def load_triangulation(spec):
    """Parse a triangulation spec: "torus", "genus2p:G", or a JSON file."""
    if spec == "torus":
        return once_punctured_torus()
    if spec.startswith("genus2p:"):
        return twice_punctured_genus(int(spec.split(":", 1)[1]))
    return Triangulation.from_json_dict(_load_json(spec))


def parse_x(text):
    """One fraction, or a comma-separated tuple in puncture order."""
    if text is None:
        return Fraction(1)
    parts = [Fraction(tok.strip()) for tok in text.split(",")]
    return parts[0] if len(parts) == 1 else parts


def _parse_arc(text):
    try:
        return int(text)
    except ValueError:
        return text


def _rebase_potential(quiver, degree, data):
    """Load a potential JSON at a caller-chosen truncation degree."""
    pot = Potential.from_json_dict(quiver, data)
    if pot.max_length() > degree:
        raise ValueError(
            "potential has a term of length %d, beyond degree %d"
            % (pot.max_length(), degree)
        )
    return Potential(quiver, degree, pot.terms)


def random_cycle_potential(tq, degree, rng, min_length=4, max_length=6, max_terms=3):
    """A seeded random potential on short cycles, avoiding triangle lengths.

    Picks one to ``max_terms`` distinct cycle classes of length between
    ``min_length`` and ``max_length`` with small nonzero rational
    coefficients.  With the defaults every term is longer than a triangle
    cycle, so the result shares no rotation class with the triangle part of
    a surface potential.
    """
    classes = [
        p for p in enumerate_cycle_classes(tq.quiver, max_length)
        if len(p) >= min_length
    ]
    if not classes:
        raise ValueError("no cycles in the requested length window")
    pool = [Fraction(1), Fraction(-1), Fraction(2), Fraction(1, 2),
            Fraction(-1, 3), Fraction(3)]
    chosen = rng.sample(classes, rng.randint(1, min(max_terms, len(classes))))
    terms = {p: rng.choice(pool) for p in chosen}
    return Potential(tq.quiver, degree, terms)


def _x_inputs(tq, x):
    if isinstance(x, list):
        return [str(c) for c in x]
    return str(x)


# ----------------------------------------------------------------------
# Subcommand handlers.  Each returns (outcome, details, witnesses, timings).
# ----------------------------------------------------------------------

def cmd_build(args):
    what = args.what
    if what[0] == "torus":
        tau = once_punctured_torus()
    elif what[0] == "genus2p":
        if len(what) != 2:
            raise ValueError("usage: build genus2p G")
        tau = twice_punctured_genus(int(what[1]))
    elif what[0] == "load":
        if len(what) != 2:
            raise ValueError("usage: build load FILE")
        tau = Triangulation.from_json_dict(_load_json(what[1]))
    else:
        raise ValueError("unknown build target %r" % (what[0],))

    tq = build_quiver(tau)
    rep = check_conditions(tq)
    details = [
        "arcs: %d" % len(tau.arcs),
        "triangles: %d" % len(tau.triangles),
        "punctures: %s" % ", ".join(
            "%s (valency %d)" % (p.pid, p.valency) for p in tq.punctures
        ),
        "arrows: %d" % len(tq.quiver.arrows),
        "genus: %d" % tau.genus,
    ]
    details.extend(_conditions_lines(rep))
    witnesses = {
        "triangulation": tau.to_json_dict(),
        "valencies": {p.pid: p.valency for p in tq.punctures},
        "conditions_ok": rep.ok,
    }
    return "PASS", details, witnesses, {}


def _conditions_lines(rep):
    """Informational lines about the valency and double-arrow conditions.

    Neither condition is needed to build a quiver or to mutate; they gate
    the cycle trichotomy and the normalization machinery, so a violation is
    reported but is not a failure by itself.
    """
    if rep.ok:
        return ["conditions: every valency >= 4, no double arrows"]
    lines = []
    if rep.low_valency_punctures:
        lines.append(
            "conditions: punctures of valency < 4: %s"
            % ", ".join(rep.low_valency_punctures)
        )
    if rep.double_arrow_pairs:
        lines.append(
            "conditions: double arrows between %s"
            % ", ".join("%s->%s" % pair for pair in rep.double_arrow_pairs)
        )
    lines.append("conditions: cycle classification and normalization unavailable")
    return lines


def cmd_flip(args):
    tau = load_triangulation(args.triangulation)
    k = _parse_arc(args.arc)
    sigma = flip(tau, k)
    tq1, tq2 = build_quiver(tau), build_quiver(sigma)
    details = [
        "flip arc %r" % (k,),
        "before: %s" % (list(tau.triangles),),
        "after:  %s" % (list(sigma.triangles),),
        "valencies before: %s" % {p.pid: p.valency for p in tq1.punctures},
        "valencies after:  %s" % {p.pid: p.valency for p in tq2.punctures},
    ]
    witnesses = {
        "before": tau.to_json_dict(),
        "after": sigma.to_json_dict(),
        "valencies_after": {p.pid: p.valency for p in tq2.punctures},
    }
    return "PASS", details, witnesses, {}


def cmd_quiver(args):
    tau = load_triangulation(args.triangulation)
    tq = build_quiver(tau)
    rep = check_conditions(tq)
    q = tq.quiver
    details = ["vertices: %s" % (list(q.vertices),)]
    for a in q.arrows:
        details.append("  %s: %r -> %r" % (a.name, a.tail, a.head))
    details.append("f: %s" % ", ".join("%s->%s" % (n, tq.f[n]) for n in sorted(tq.f, key=q.rank)))
    for p in tq.punctures:
        details.append("g-orbit %s (valency %d): %s" % (p.pid, p.valency, " ".join(p.arrows)))
    details.extend(_conditions_lines(rep))
    witnesses = {
        "quiver": q.to_json_dict(),
        "f": dict(tq.f),
        "g": dict(tq.g),
        "conditions_ok": rep.ok,
    }
    return "PASS", details, witnesses, {}


def cmd_potential(args):
    tau = load_triangulation(args.triangulation)
    tq = build_quiver(tau)
    x = parse_x(args.x)
    if args.n is not None:
        pot = potential_Sxn(tq, x, args.n, degree=args.degree)
    else:
        pot = potential_S(tq, x, degree=args.degree)
    details = ["degree: %d" % pot.degree, "terms: %d" % len(pot.terms)]
    for p in sorted(pot.terms, key=lambda p: (len(p), p.arrows)):
        details.append("  %s * %s" % (pot.terms[p], ".".join(p.arrows)))
    witnesses = {"potential": pot.to_json_dict(), "x": _x_inputs(tq, x)}
    return "PASS", details, witnesses, {}


def cmd_mutate(args):
    qp = QP.from_json_dict(_load_json(args.qp))
    k = _parse_arc(args.vertex)
    t0 = time.perf_counter()
    red, witness = mutate(qp, k)
    timings = {"mutate": time.perf_counter() - t0}
    ok = witness.recheck(qp, k)
    details = [
        "vertex: %r" % (k,),
        "premutated arrows: %d" % len(witness.premutated.quiver.arrows),
        "reduced arrows: %d" % len(red.quiver.arrows),
        "removed pairs: %s" % ", ".join(
            "(%s, %s)" % pair for pair in witness.reduction.pairs
        ),
        "reduced potential terms: %d" % len(red.potential.terms),
        "two-acyclic after mutation: %s" % is_two_acyclic(red.quiver),
        "%s witness recheck" % ("PASS" if ok else "FAIL"),
    ]
    witnesses = {
        "vertex": k,
        "input": qp.to_json_dict(),
        "mutated": red.to_json_dict(),
        "premutated": witness.premutated.to_json_dict(),
        "reduction_endo": witness.reduction.endo.to_json_dict(),
        "pairs": [list(p) for p in witness.reduction.pairs],
    }
    return ("PASS" if ok else "FAIL"), details, witnesses, timings


def cmd_verify_flip(args):
    tau = load_triangulation(args.triangulation)
    k = _parse_arc(args.arc)
    x = Fraction(args.x)
    n = args.n
    degree = args.degree if args.degree is not None else 12 * n + 6
    perturb = None
    if args.perturb is not None:
        sigma = flip(tau, k)
        tq2 = build_quiver(sigma)
        eps = Fraction(args.perturb)
        perturb = Potential(tq2.quiver, degree, {tq2.triangle_cycle(0): eps})
    t0 = time.perf_counter()
    report = verify_flip_compatibility(tau, k, x, n, degree, perturb=perturb)
    timings = {"verify": time.perf_counter() - t0}
    details = ["arc=%r x=%s n=%d D=%d" % (k, x, n, degree)]
    details.extend(report.summary_lines())
    if report.first_difference is not None:
        details.append("first difference: %s" % report.first_difference)
    witnesses = {
        "triangulation": tau.to_json_dict(),
        "arc": k,
        "x": str(x),
        "n": n,
        "degree": degree,
        "checks": [[name, ok, detail] for name, ok, detail in report.checks],
        "renaming": dict(report.renaming),
        "phi": report.phi.to_json_dict(),
        "first_difference": report.first_difference,
    }
    return ("PASS" if report.ok else "FAIL"), details, witnesses, timings


def cmd_normalize(args):
    tau = load_triangulation(args.triangulation)
    tq = build_quiver(tau)
    q = tq.quiver
    degree = args.degree
    t_pot = potential_T(tq, degree)
    if args.x is not None:
        x = parse_x(args.x)
        z_pot = potential_S(tq, x, degree) - t_pot
    else:
        z_pot = Potential.zero(q, degree)

    if args.potential is not None:
        us = [_rebase_potential(q, degree, _load_json(args.potential))]
    else:
        us = [
            random_cycle_potential(tq, degree, random.Random(args.seed + i))
            for i in range(args.random)
        ]

    details = []
    runs = []
    passed = 0
    t0 = time.perf_counter()
    for i, u_pot in enumerate(us):
        phi, w_pot = g_normal_form(tq, z_pot, u_pot)
        before = t_pot + z_pot + u_pot
        after = t_pot + z_pot + w_pot
        exact = is_cyclically_equivalent(phi.apply(before), after)
        parts = split(tq, w_pot)
        g_only = parts.s_f.is_zero and parts.s_fg.is_zero
        grew = w_pot.is_zero or w_pot.short >= u_pot.short
        ok = exact and g_only and grew
        passed += ok
        details.append(
            "%s run %d: short(U)=%s -> short(W)=%s depth=%s%s"
            % (
                "PASS" if ok else "FAIL",
                i,
                u_pot.short,
                w_pot.short,
                phi.depth(),
                "" if exact else " (endomorphism does not carry U to W)",
            )
        )
        runs.append(
            {
                "u": u_pot.to_json_dict(),
                "w": w_pot.to_json_dict(),
                "endo": phi.to_json_dict(),
                "exact": exact,
            }
        )
    timings = {"normalize": time.perf_counter() - t0}
    outcome = "PASS" if passed == len(us) else "FAIL"
    details.append("%d/%d runs normalized" % (passed, len(us)))
    witnesses = {
        "triangulation": tau.to_json_dict(),
        "degree": degree,
        "runs": runs,
    }
    if args.x is not None:
        witnesses["x"] = _x_inputs(tq, parse_x(args.x))
    if args.potential is None:
        witnesses["seed"] = args.seed
        witnesses["count"] = args.random
    return outcome, details, witnesses, timings


def _powers_potential(tq, degree, spec):
    """Parse "p0:2=1,p1:3=-2" into sum of coeff * (puncture cycle)^n."""
    terms = {}
    for chunk in spec.split(","):
        lhs, _, rhs = chunk.partition("=")
        pid, _, power = lhs.partition(":")
        word = tq.puncture_cycle(pid.strip()).arrows
        p = Path(word * int(power))
        terms[p] = terms.get(p, 0) + Fraction(rhs.strip() or "1")
    return Potential(tq.quiver, degree, terms)


def cmd_absorb(args):
    tau = load_triangulation(args.triangulation)
    tq = build_quiver(tau)
    x = parse_x(args.x)
    degree = args.degree
    if args.potential is not None:
        v_pot = _rebase_potential(tq.quiver, degree, _load_json(args.potential))
    elif args.powers is not None:
        v_pot = _powers_potential(tq, degree, args.powers)
    else:
        raise ValueError("provide --potential or --powers")
    s_pot = potential_S(tq, x, degree)
    t0 = time.perf_counter()
    phi = absorb_g_powers(tq, x, v_pot)
    timings = {"absorb": time.perf_counter() - t0}
    exact = is_cyclically_equivalent(phi.apply(s_pot + v_pot), s_pot)
    details = [
        "V terms: %d, short(V)=%d, D=%d" % (len(v_pot.terms), v_pot.short, degree),
        "endomorphism depth: %d, rules: %d" % (phi.depth(), len(phi.rules)),
        "%s carries S+V to S exactly" % ("PASS" if exact else "FAIL"),
    ]
    witnesses = {
        "triangulation": tau.to_json_dict(),
        "x": _x_inputs(tq, x),
        "degree": degree,
        "v": v_pot.to_json_dict(),
        "endo": phi.to_json_dict(),
        "exact": exact,
    }
    return ("PASS" if exact else "FAIL"), details, witnesses, timings


def _classify_one(tq, cycle):
    cls = classify_cycle(tq, cycle)
    if cls.kind == "F":
        rebuilt = tq.f_path(3 * cls.n, cls.base)
    elif cls.kind == "G":
        rebuilt = tq.g_path(cls.n * tq.m_of(cls.base), cls.base)
    else:
        rebuilt = fg_witness_cycle(tq, cls)
    ok = canonicalize_rotation(tq.quiver, rebuilt) == canonicalize_rotation(tq.quiver, cycle)
    return cls, ok


def cmd_classify(args):
    tau = load_triangulation(args.triangulation)
    tq = build_quiver(tau)
    details = []
    entries = []
    counts = {"F": 0, "G": 0, "FG": 0}
    bad = 0
    if args.cycle is not None:
        cycles = [tq.quiver.path([s.strip() for s in args.cycle.split(",")])]
    else:
        cycles = enumerate_cycle_classes(tq.quiver, args.max_length)
    t0 = time.perf_counter()
    for cyc in cycles:
        cls, ok = _classify_one(tq, cyc)
        counts[cls.kind] += 1
        bad += not ok
        entry = {"cycle": list(cyc.arrows), "kind": cls.kind, "witness_ok": ok}
        if cls.kind in ("F", "G"):
            entry["n"] = cls.n
            entry["base"] = cls.base
        else:
            entry["witness_arrow"] = cls.witness_arrow
            entry["remainder"] = list(cls.remainder.arrows)
        entries.append(entry)
        if args.cycle is not None or not ok:
            extra = (
                " n=%d base=%s" % (cls.n, cls.base)
                if cls.kind in ("F", "G")
                else " a=%s remainder=%s" % (cls.witness_arrow, ".".join(cls.remainder.arrows))
            )
            details.append(
                "%s %s: %s%s" % ("PASS" if ok else "FAIL", ".".join(cyc.arrows), cls.kind, extra)
            )
    timings = {"classify": time.perf_counter() - t0}
    details.append(
        "classified %d cycle classes: F=%d G=%d FG=%d, witness failures=%d"
        % (len(cycles), counts["F"], counts["G"], counts["FG"], bad)
    )
    witnesses = {
        "triangulation": tau.to_json_dict(),
        "counts": counts,
        "entries": entries,
    }
    return ("PASS" if bad == 0 else "FAIL"), details, witnesses, timings


def cmd_jacobian_dim(args):
    details = []
    timings = {}
    if args.table is not None:
        tau = load_triangulation(args.triangulation or "torus")
        tq = build_quiver(tau)
        x = parse_x(args.x)
        if len(tq.punctures) != 1:
            raise ValueError("the dimension table needs a once-punctured surface")
        m = tq.punctures[0].valency
        rows = []
        ok = True
        prev = None
        details.append("n   D    dim   certified   lower bound")
        for n in range(1, args.table + 1):
            degree = args.degree if args.degree is not None else 6 * n + 6
            pot = potential_Sxn(tq, x, n, degree=degree)
            t0 = time.perf_counter()
            quot, certified = quotient_dimension(QP(tq.quiver, pot), degree)
            timings["n=%d" % n] = time.perf_counter() - t0
            bound = n * m - 2
            row_ok = certified and quot.dimension >= bound
            if prev is not None:
                row_ok = row_ok and quot.dimension > prev
            ok = ok and row_ok
            prev = quot.dimension
            rows.append(
                {
                    "n": n,
                    "degree": degree,
                    "dimension": quot.dimension,
                    "certified": certified,
                    "bound": bound,
                    "per_degree": list(quot.per_degree),
                }
            )
            details.append(
                "%-3d %-4d %-5d %-11s %d %s"
                % (n, degree, quot.dimension, certified, bound,
                   "ok" if row_ok else "VIOLATED")
            )
        witnesses = {"rows": rows, "x": _x_inputs(tq, x), "valency": m}
        return ("PASS" if ok else "FAIL"), details, witnesses, timings

    if args.qp is not None:
        qp = QP.from_json_dict(_load_json(args.qp))
        degree = args.degree if args.degree is not None else qp.degree
        inputs_w = {"qp": qp.to_json_dict()}
        tq = None
    else:
        tau = load_triangulation(args.triangulation)
        tq = build_quiver(tau)
        x = parse_x(args.x)
        degree = args.degree
        if degree is None:
            raise ValueError("--degree is required in triangulation mode")
        if args.n is not None:
            pot = potential_Sxn(tq, x, args.n, degree=degree)
        else:
            pot = potential_S(tq, x, degree=degree)
        qp = QP(tq.quiver, pot)
        inputs_w = {"triangulation": tau.to_json_dict(), "x": _x_inputs(tq, x), "n": args.n}

    t0 = time.perf_counter()
    quot, certified = quotient_dimension(qp, degree)
    timings["dimension"] = time.perf_counter() - t0
    details.append("degree: %d" % degree)
    details.append("per-degree dimensions: %s" % (list(quot.per_degree),))
    if certified:
        details.append(
            "dimension: %d (exact; every path of length %d reduces to shorter)"
            % (quot.dimension, quot.certificate_length)
        )
    else:
        details.append(
            "dimension: %d through degree %d (no certificate; raise --degree)"
            % (quot.dimension, degree)
        )
    outcome = "PASS"
    if args.certify and not certified:
        details.append("FAIL certificate did not engage by degree %d" % degree)
        outcome = "FAIL"
    if args.certify and tq is not None and args.n is not None and len(tq.punctures) == 1 and certified:
        t0 = time.perf_counter()
        indep = g_path_independence_check(tq, x, args.n, degree)
        timings["independence"] = time.perf_counter() - t0
        details.append(
            "%s g-paths below cutoff are linearly independent" % ("PASS" if indep else "FAIL")
        )
        outcome = outcome if indep else "FAIL"
    witnesses = dict(inputs_w)
    witnesses.update(
        {
            "degree": degree,
            "dimension": quot.dimension,
            "per_degree": list(quot.per_degree),
            "certified": certified,
            "certificate_length": quot.certificate_length,
        }
    )
    return outcome, details, witnesses, timings


# ----------------------------------------------------------------------
# Parser and dispatch
# ----------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="qpsurf",
        description="Exact computations with potentials on triangulated surfaces.",
    )
    p.add_argument("--report", metavar="FILE", help="write the run report as JSON")
    p.add_argument(
        "--recheck",
        metavar="FILE",
        help="re-run a stored report and compare outcome and witnesses",
    )
    sub = p.add_subparsers(dest="subcommand")

    sp = sub.add_parser("build", help="construct a triangulation and its quiver")
    sp.add_argument("what", nargs="+", metavar="TARGET",
                    help="torus | genus2p G | load FILE")

    sp = sub.add_parser("flip", help="flip an arc")
    sp.add_argument("--triangulation", required=True)
    sp.add_argument("--arc", required=True)

    sp = sub.add_parser("quiver", help="print arrows and the f/g permutations")
    sp.add_argument("--triangulation", required=True)

    sp = sub.add_parser("potential", help="print the weighted-cycle potential")
    sp.add_argument("--triangulation", required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--n", type=int)
    sp.add_argument("--degree", type=int)

    sp = sub.add_parser("mutate", help="mutate a QP at a vertex and reduce")
    sp.add_argument("--qp", required=True, metavar="FILE")
    sp.add_argument("--vertex", required=True)

    sp = sub.add_parser("verify-flip", help="check flip/mutation compatibility")
    sp.add_argument("--triangulation", default="torus")
    sp.add_argument("--arc", required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--degree", type=int)
    sp.add_argument("--perturb", metavar="COEFF",
                    help="negative control: shift one expected coefficient")

    sp = sub.add_parser("normalize", help="push non-g terms to higher order")
    sp.add_argument("--triangulation", required=True)
    sp.add_argument("--x")
    sp.add_argument("--potential", metavar="FILE")
    sp.add_argument("--random", type=int, default=1, metavar="COUNT")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--degree", type=int, default=16)

    sp = sub.add_parser("absorb", help="absorb powers of puncture cycles")
    sp.add_argument("--triangulation", required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--potential", metavar="FILE")
    sp.add_argument("--powers", metavar="SPEC",
                    help='e.g. "p0:2=1,p1:3=3" for coeff * (cycle)^power terms')
    sp.add_argument("--degree", type=int, default=56)

    sp = sub.add_parser("classify", help="sort cycles into the three shapes")
    sp.add_argument("--triangulation", required=True)
    sp.add_argument("--cycle", metavar="A,B,C")
    sp.add_argument("--max-length", type=int, default=10)

    sp = sub.add_parser("jacobian-dim", help="truncated quotient dimensions")
    sp.add_argument("--qp", metavar="FILE")
    sp.add_argument("--triangulation")
    sp.add_argument("--x")
    sp.add_argument("--n", type=int)
    sp.add_argument("--degree", type=int)
    sp.add_argument("--certify", action="store_true",
                    help="fail unless the dimension is certified exact")
    sp.add_argument("--table", type=int, metavar="N",
                    help="tabulate n = 1..N on a once-punctured surface")

    return p


_HANDLERS = {
    "build": cmd_build,
    "flip": cmd_flip,
    "quiver": cmd_quiver,
    "potential": cmd_potential,
    "mutate": cmd_mutate,
    "verify-flip": cmd_verify_flip,
    "normalize": cmd_normalize,
    "absorb": cmd_absorb,
    "classify": cmd_classify,
    "jacobian-dim": cmd_jacobian_dim,
}


def _input_digest(argv):
    inputs = {"argv": list(argv)}
    files = {}
    for i, tok in enumerate(argv):
        if tok in ("--qp", "--potential") and i + 1 < len(argv):
            try:
                files[argv[i + 1]] = _digest_file(argv[i + 1])
            except OSError:
                pass
        if tok == "load" and i + 1 < len(argv):
            try:
                files[argv[i + 1]] = _digest_file(argv[i + 1])
            except OSError:
                pass
        if tok == "--triangulation" and i + 1 < len(argv):
            spec = argv[i + 1]
            if spec != "torus" and not spec.startswith("genus2p:"):
                try:
                    files[spec] = _digest_file(spec)
                except OSError:
                    pass
    if files:
        inputs["files"] = files
    return inputs


def run_command(argv):
    """Run one subcommand and return its RunReport (never raises)."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand is None:
        return RunReport(list(argv), {}, "ERROR", ["no subcommand given"])
    inputs = _input_digest(argv)
    start = time.perf_counter()
    try:
        outcome, details, witnesses, timings = _HANDLERS[args.subcommand](args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        return RunReport(
            list(argv), inputs, "ERROR",
            ["ERROR: %s" % (exc,)], {}, {"total": time.perf_counter() - start},
        )
    timings["total"] = time.perf_counter() - start
    return RunReport(list(argv), inputs, outcome, details, witnesses, timings)


def _normalized(value):
    return json.loads(json.dumps(value, sort_keys=True))


def run_recheck(path):
    """Re-run a stored report's command and compare the results."""
    stored = RunReport.from_json_dict(_load_json(path))
    fresh = run_command(stored.command)
    lines = ["recheck of %s" % path, "command: %s" % " ".join(stored.command)]
    ok = True
    if fresh.outcome != stored.outcome:
        ok = False
        lines.append(
            "FAIL outcome changed: stored %s, fresh %s" % (stored.outcome, fresh.outcome)
        )
    else:
        lines.append("PASS outcome reproduced: %s" % fresh.outcome)
    if _normalized(fresh.witnesses) != _normalized(stored.witnesses):
        ok = False
        diff_keys = sorted(
            key
            for key in set(fresh.witnesses) | set(stored.witnesses)
            if _normalized(fresh.witnesses.get(key)) != _normalized(stored.witnesses.get(key))
        )
        lines.append("FAIL witnesses diverge at: %s" % ", ".join(diff_keys))
    else:
        lines.append("PASS witnesses reproduced bit for bit")
    report = RunReport(
        ["recheck", path], {"report": _digest_file(path)},
        "PASS" if ok else "FAIL", lines,
        {"stored_outcome": stored.outcome, "fresh_outcome": fresh.outcome},
        dict(fresh.timings),
    )
    return report


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    # Peel off the global options by hand so they may precede the subcommand.
    report_path = None
    recheck_path = None
    rest = []
    i = 0
    while i < len(argv):
        if argv[i] == "--report" and i + 1 < len(argv):
            report_path = argv[i + 1]
            i += 2
        elif argv[i] == "--recheck" and i + 1 < len(argv):
            recheck_path = argv[i + 1]
            i += 2
        else:
            rest.append(argv[i])
            i += 1

    if recheck_path is not None:
        try:
            report = run_recheck(recheck_path)
        except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
            report = RunReport(["recheck", recheck_path], {}, "ERROR", ["ERROR: %s" % exc])
    elif not rest:
        build_parser().print_usage()
        return 2
    else:
        report = run_command(rest)

    for line in report.details:
        print(line)
    print("OUTCOME: %s" % report.outcome)
    if report_path is not None:
        with open(report_path, "w") as fh:
            json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
