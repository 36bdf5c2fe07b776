"""Running one case end to end and collecting the report."""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from . import __version__, fplin, gmodule, local, quadratic, structure, tower
from .errors import (APthPower, AssemblyFailed, BackendFailure, InvalidModule, ParseError,
                     PrecisionExhausted, PreconditionViolated)
from .fplin import FpMatrix, FpVector

PASS, FAIL, UNDECIDED = "pass", "fail", "undecided"
SCHEMA = 1

# -- element grammar -----------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|(pi|u|zeta)|(\*\*|[-+*^()]))")


def tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected input at position {pos}: {text[pos:]!r}")
        num, sym, op = m.groups()
        if num is not None:
            out.append(("int", num))
        elif sym is not None:
            out.append(("sym", sym))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


class _Parser:
    """expr := term (('+'|'-') term)*;  term := power ('*' power)*;
    power := unary ('^' ['-'] INT)?;  unary := '-' unary | atom;
    atom := INT | pi | u | zeta | '(' expr ')'."""

    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ParseError(f"expected {value or kind}, found {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self):
        node = self.expr()
        if self.i != len(self.toks):
            raise ParseError(f"trailing input starting at {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.power()
        while self.peek() == ("op", "*"):
            self.take()
            node = ("*", node, self.power())
        return node

    def power(self):
        node = self.unary()
        if self.peek() == ("op", "^"):
            self.take()
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            node = ("^", node, sign * int(self.take("int")[1]))
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        return self.atom()

    def atom(self):
        kind, val = self.peek()
        if kind == "int":
            self.take()
            return ("int", int(val))
        if kind == "sym":
            self.take()
            return ("sym", val)
        if (kind, val) == ("op", "("):
            self.take()
            node = self.expr()
            self.take("op", ")")
            return node
        raise ParseError(f"unexpected token {val!r}")


def parse_element(text: str):
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty element expression")
    return _Parser(tokenize(text)).parse()


def evaluate(node, from_int: Callable[[int], Any], symbol: Callable[[str], Any]):
    kind = node[0]
    if kind == "int":
        return from_int(node[1])
    if kind == "sym":
        return symbol(node[1])
    if kind == "neg":
        return -evaluate(node[1], from_int, symbol)
    if kind == "^":
        base = evaluate(node[1], from_int, symbol)
        return base ** node[2]
    left = evaluate(node[1], from_int, symbol)
    right = evaluate(node[2], from_int, symbol)
    if kind == "+":
        return left + right
    if kind == "-":
        return left - right
    return left * right


# -- case specs ----------------------------------------------------------------

@dataclass(frozen=True)
class CaseSpec:
    p: int
    backend: str
    a: str | None = None
    ell: int | None = None
    precision: int | None = None
    sigma: tuple | None = None
    expect: dict | None = None
    name: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> CaseSpec:
        try:
            backend = d.get("backend", "local")
            p = int(d["p"])
            if backend not in ("local", "quadratic", "module"):
                raise ParseError(f"unknown backend {backend!r}")
            if backend == "module":
                sigma = tuple(tuple(int(x) for x in row) for row in d["sigma"])
                return cls(p, backend, sigma=sigma, expect=d.get("expect"), name=d.get("name"))
            a = str(d["a"])
            ell = int(d["ell"]) if backend == "local" else None
            prec = int(d["precision"]) if d.get("precision") is not None else None
            return cls(p, backend, a, ell, prec, name=d.get("name"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"malformed case {d!r}: {exc}") from exc

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"p": self.p, "backend": self.backend}
        if self.backend == "module":
            d["sigma"] = [list(r) for r in self.sigma]
            if self.expect is not None:
                d["expect"] = self.expect
        else:
            d["a"] = self.a
            if self.ell is not None:
                d["ell"] = self.ell
            if self.precision is not None:
                d["precision"] = self.precision
        if self.name:
            d["name"] = self.name
        return d

    def key(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# -- runners -------------------------------------------------------------------

def _status(flag: bool | str) -> str:
    if isinstance(flag, str):
        return flag
    return PASS if flag else FAIL


def _local_a(F: local.LocalField, text: str):
    def symbol(name):
        if name == "pi":
            return F.pi
        if name == "zeta":
            return F.zeta_element()
        return local.teichmuller_nonresidue(F)
    val = evaluate(parse_element(text), F.from_int, symbol)
    if val.is_zero():
        raise ParseError("a evaluates to 0")
    return val


def _quadratic_a(text: str) -> int:
    def symbol(name):
        raise ParseError(f"symbol {name!r} is not available over Q")
    val = Fraction(evaluate(parse_element(text), Fraction, symbol))
    if val == 0:
        raise ParseError("a = 0")
    n = val.numerator * val.denominator
    return quadratic.squarefree_part(n)


def _seeded_unit(ctx: local.LocalTower, rng: random.Random):
    while True:
        x = ctx.K.from_coords([rng.randint(-30, 30) for _ in range(ctx.K.n)])
        if not x.is_zero():
            return x


def analyze_local(spec: CaseSpec, seed: int, prec: int) -> dict:
    p = spec.p
    F = local.make_base(spec.ell, p, prec)
    a = _local_a(F, spec.a)
    ctx = local.make_K(F, a)
    rng = random.Random(seed)
    samples = [_seeded_unit(ctx, rng) for _ in range(3)]
    pres = tower.build_J(ctx)
    inv = structure.measure_profile(ctx, pres)
    checks: dict[str, str] = {}

    nop = gmodule.norm_operator(pres.module)
    formula = all(
        tower.reduce(ctx, ctx.embed(ctx.norm(x)), pres).coords == nop @ tower.reduce(ctx, x, pres).coords
        for x in samples)
    checks["tower_invariants"] = _status(ctx.check_invariants(samples) and formula)

    oracle = gmodule.jordan_multiplicities(pres.module)
    th3 = structure.theorem3_profile(inv)
    checks["theorem3_match"] = _status(oracle == th3)
    cert = None
    try:
        lam = structure.find_exact_norm_preimage(ctx, pres, ctx.zeta) if inv.upsilon else None
        cert = structure.decompose_arithmetic(ctx, pres, inv, lam)
        arith = cert.multiplicities(p)
        checks["krull_schmidt_match"] = _status(arith == oracle)
        checks["socle_induction"] = _status(structure.socle_induction_check(pres.module, cert))
    except AssemblyFailed:
        arith = None
        checks["krull_schmidt_match"] = FAIL
        checks["socle_induction"] = FAIL
        lam = None

    l2 = structure.lemma2_check(ctx, pres, inv)
    checks["lemma2"] = _status(l2["ok"])
    es = structure.exact_sequence_check(ctx, pres, inv)
    checks["exact_sequence"] = _status(es["ok"])
    c1 = structure.corollary1_checks(ctx, pres, inv)
    checks["corollary1"] = _status(c1.consistent)

    h90 = True
    for x in samples:
        alpha = ctx.sigma(x) / x
        w = structure.hilbert90_solve(ctx, alpha)
        h90 = h90 and ctx.eq(ctx.sigma(w) / w, alpha)
    checks["hilbert90"] = _status(h90)

    lifted, skipped = 0, 0
    lemma_ok = True
    if p > 2:
        for _ in range(4):
            e = FpVector(p, [rng.randrange(p) for _ in range(pres.dim)])
            if e.is_zero() or gmodule.cyclic_submodule(pres.module, e).length < 2:
                continue
            try:
                structure.lemma1_lift(ctx, pres, pres.lift(ctx, e), lam)
                lifted += 1
            except PreconditionViolated:
                skipped += 1
            except PrecisionExhausted:
                raise
            except BackendFailure:
                lemma_ok = False
    checks["lemma1"] = _status(lemma_ok)

    return {
        "context": ctx.describe(),
        "J": {"dim": pres.dim, "F_classes_dim": pres.F_dim, "epsilon_basis": list(pres.epsilon_basis),
              "sigma": pres.module.sigma.tolist(), "a_text": a.to_text(),
              "root_a_text": ctx.root_a.to_text()},
        "invariants": inv.to_json(),
        "evidence": inv.evidence,
        "multiplicities": {"oracle": oracle.to_json(), "theorem3": th3.to_json(),
                           "arithmetic": None if arith is None else arith.to_json()},
        "certificate": None if cert is None else cert.to_json(),
        "corollary1": c1.to_json(),
        "lemma2": l2,
        "exact_sequence": es,
        "lemma1": {"lifted": lifted, "precondition_excluded": skipped},
        "checks": checks,
    }


def analyze_quadratic(spec: CaseSpec, seed: int) -> dict:
    if spec.p != 2:
        raise ParseError("the quadratic backend only handles p = 2")
    a = _quadratic_a(spec.a)
    if a == 1:
        raise APthPower("a is a rational square")
    ctx = quadratic.QuadraticTower(a)
    rng = random.Random(seed)
    checks: dict[str, str] = {}

    def rand_elem():
        while True:
            x = ctx.element(Fraction(rng.randint(-20, 20), rng.randint(1, 9)),
                            Fraction(rng.randint(-20, 20), rng.randint(1, 9)))
            if not x.is_zero():
                return x

    samples = [rand_elem() for _ in range(5)]
    checks["tower_invariants"] = _status(ctx.check_invariants(samples))
    h90 = True
    for x in samples:
        alpha = ctx.sigma(x) / x
        w = structure.hilbert90_solve(ctx, alpha)
        h90 = h90 and ctx.sigma(w) / w == alpha
    checks["hilbert90"] = _status(h90)
    same = all(structure.same_norm_quadratic(ctx, x, ctx.sigma(x) * (ctx.sigma(y) / y))[0]
               for x, y in zip(samples, samples[1:]))
    checks["same_norm"] = _status(same)

    c1 = quadratic.corollary1_quadratic(a)
    ups = c1.upsilon
    x_part: dict[str, Any] = {"upsilon": ups}
    x_ok = True
    if ups:
        if c1.minus_one_witness is None:
            x_ok = "undecided"
        else:
            lam = ctx.element(*c1.minus_one_witness)
            delta = structure.hilbert90_solve(ctx, lam ** 2)
            ratio = ctx.norm(delta) / ctx.a
            x_ok = quadratic.rational_sqrt(ratio) is not None and ctx.sigma(delta) / delta == lam ** 2
            x_part["delta"] = delta.to_text()
    checks["x_construction"] = _status(x_ok)

    wit_ok = True
    if c1.minus_one_witness is not None:
        u, v = c1.minus_one_witness
        wit_ok = u * u - a * v * v == -1
    if c1.norm_witness is not None:
        u, v = c1.norm_witness
        x = u * u - a * v * v
        wit_ok = wit_ok and quadratic.rational_sqrt(x) is None and quadratic.rational_sqrt(x / a) is None
    q = c1.inert_witness
    wit_ok = wit_ok and quadratic.legendre(a, q) == -1 and not quadratic.is_norm(q, a) \
        and not quadratic.is_norm(-q, a)
    checks["corollary1"] = _status(wit_ok)
    recip = all(quadratic.hilbert_product(b, c) == 1
                for b, c in [(-1, a), (a, -a), (q, a), (-q, a)])
    checks["reciprocity"] = _status(recip)
    for name in ("theorem3_match", "krull_schmidt_match", "lemma2", "exact_sequence"):
        checks[name] = UNDECIDED
    inv = structure.InvariantProfile(2, ups, None, structure.INFINITE)
    return {
        "context": ctx.describe(),
        "invariants": inv.to_json(),
        "multiplicities": {"oracle": UNDECIDED, "theorem3": UNDECIDED, "arithmetic": UNDECIDED},
        "certificate": None,
        "corollary1": c1.to_json(),
        "x_part": x_part,
        "checks": checks,
    }


def analyze_module(spec: CaseSpec) -> dict:
    p = spec.p
    checks: dict[str, str] = {}
    out: dict[str, Any] = {}
    try:
        M = gmodule.GModule(p, FpMatrix(p, [list(r) for r in spec.sigma]))
    except InvalidModule as exc:
        checks["valid_module"] = FAIL
        return {"error": str(exc), "checks": checks}
    checks["valid_module"] = PASS
    d = gmodule.decompose_jordan(M)
    checks["direct_sum"] = _status(gmodule.verify_direct_sum(M, d.parts))
    oracle = gmodule.jordan_multiplicities(M)
    checks["krull_schmidt_match"] = _status(d.multiplicities(p) == oracle)
    t = M.nilpotent
    checks["norm_identity"] = _status(gmodule.norm_operator(M) == fplin.mat_pow(t, p - 1))
    if spec.expect is not None:
        want = gmodule.MultiplicityVector(p, {int(k): v for k, v in spec.expect.items()})
        checks["expected_profile"] = _status(want == oracle)
    out["multiplicities"] = {"oracle": oracle.to_json(), "arithmetic": d.multiplicities(p).to_json()}
    out["checks"] = checks
    return out


def run_case(spec: CaseSpec, seed: int = 0, precision: int | None = None) -> dict:
    """Report body for one case.  Raises PClassError subclasses on config/backend errors."""
    if spec.backend == "local":
        start = precision or spec.precision
        body = local.with_precision_retry(lambda prec: analyze_local(spec, seed, prec), start)
    elif spec.backend == "quadratic":
        body = analyze_quadratic(spec, seed)
    else:
        body = analyze_module(spec)
    failed = any(v == FAIL for v in body["checks"].values())
    report = {"schema": SCHEMA, "version": __version__, "case": spec.to_dict(), "key": spec.key(),
              "seed": seed, **body, "status": FAIL if failed else PASS}
    return report


def random_suite(p: int, dim: int, trials: int, seed: int) -> dict:
    failures = []
    profiles: dict[str, int] = {}
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        profile = gmodule.random_profile(p, dim, rng)
        M = gmodule.random_module(p, profile, int(rng.integers(0, 2 ** 31)))
        d = gmodule.decompose_jordan(M)
        ok = (gmodule.verify_direct_sum(M, d.parts)
              and gmodule.jordan_multiplicities(M) == profile
              and d.multiplicities(p) == profile
              and gmodule.norm_operator(M) == fplin.mat_pow(M.nilpotent, p - 1))
        key = json.dumps(profile.to_json(), sort_keys=True)
        profiles[key] = profiles.get(key, 0) + 1
        if not ok:
            failures.append({"trial": trial, "profile": profile.to_json()})
    return {"schema": SCHEMA, "version": __version__, "p": p, "dim": dim, "trials": trials,
            "seed": seed, "failures": failures, "distinct_profiles": len(profiles),
            "status": FAIL if failures else PASS}
