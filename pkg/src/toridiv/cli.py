"""Command-line front end: ``toridiv <command> ...``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Optional, Sequence

from .divisor import (
    Cartier,
    NotQCartier,
    QCartier,
    ToricDivisor,
    cartier_status,
    global_sections,
    is_globally_generated,
    polytope_PD,
    section_hilbert_function,
    detect_quasi_polynomial,
)
from .errors import DomainError, InternalInconsistencyError, PreconditionError, ToriDivError, UsageError
from .exact_linear import format_rational
from .fan import Fan, is_complete, validate_fan
from .mld import ACC_COLUMNS, acc_family, dfh_pullback, mld_search
from .polyhedra import h_to_v
from .qnef import check_gg_conjecture, is_qnef, qcartierize, qd_facet_data, qnt

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


def decimal_string(q: Fraction, digits: int = 20) -> str:
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(q.numerator) / Decimal(q.denominator))


# ---------------------------------------------------------------------------
# input


def _load_json(path: str, what: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise UsageError(f"{what} file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what} file {path}: invalid JSON at line {exc.lineno} column {exc.colno}") from exc


def load_fan(path: str) -> Fan:
    data = _load_json(path, "fan")
    if not isinstance(data, dict):
        raise UsageError(f"fan file {path}: expected a JSON object")
    f = Fan.from_dict(data)
    check = validate_fan(f)
    if not check:
        raise PreconditionError(f"fan {path} is invalid: {check.reason}")
    return f


def load_divisor(path: str, f: Fan) -> ToricDivisor:
    data = _load_json(path, "divisor")
    try:
        return ToricDivisor.from_dict(f, data)
    except UsageError as exc:
        raise UsageError(f"divisor file {path}: {exc}") from exc


def parse_inputs(fan_path: str, divisor_paths: Sequence[str] = ()) -> tuple:
    f = load_fan(fan_path)
    return (f,) + tuple(load_divisor(p, f) for p in divisor_paths)


def parse_a_values(text: str) -> list:
    """``1..30`` or ``1,2,5`` or a single integer."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse --a {text!r}") from exc
    if not values or any(a < 1 for a in values):
        raise UsageError("--a needs positive integers")
    return values


# ---------------------------------------------------------------------------
# formatting helpers


def _vec(v) -> str:
    return "(" + ", ".join(format_rational(Fraction(x)) for x in v) + ")"


def _jvec(v) -> list:
    return [format_rational(Fraction(x)) for x in v]


def _status_text(st) -> str:
    if isinstance(st, Cartier):
        return "Cartier"
    if isinstance(st, QCartier):
        return f"QCartier (index {st.index})"
    return f"NotQCartier (witness cone {st.cone})"


def _status_json(st) -> dict:
    if isinstance(st, NotQCartier):
        return {"kind": "NotQCartier", "cone": st.cone}
    return {"kind": type(st).__name__, "index": st.index, "data": [_jvec(m) for m in st.data]}


class Report:
    """Collects a text rendering plus a JSON-able payload for one command."""

    def __init__(self):
        self.lines: list = []
        self.payload: dict = {}
        self.table: Optional[tuple] = None  # (header, rows) for csv output

    def line(self, text: str = "") -> None:
        self.lines.append(text)

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.payload, indent=2, sort_keys=True) + "\n"
        if fmt == "csv":
            if self.table is None:
                raise UsageError("this command has no CSV output; use --format text or json")
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.table[0])
            w.writerows(self.table[1])
            return buf.getvalue()
        return "\n".join(self.lines) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_check(args, rep: Report) -> int:
    data = _load_json(args.fan, "fan")
    if not isinstance(data, dict):
        raise UsageError(f"fan file {args.fan}: expected a JSON object")
    f = Fan.from_dict(data)
    check = validate_fan(f)
    rep.payload["fan"] = {"valid": check.valid, "reason": check.reason, "witness": list(check.witness)}
    if not check:
        rep.line(f"fan: Invalid ({check.reason})")
        return EXIT_DOMAIN
    complete = is_complete(f)
    rep.payload["fan"]["complete"] = complete
    rep.line(f"fan: Valid, {'complete' if complete else 'not complete'}, {f.n_rays} rays, {len(f.max_cones)} maximal cones")
    if args.divisor:
        d = load_divisor(args.divisor, f)
        st = cartier_status(d)
        rep.payload["cartier_status"] = _status_json(st)
        rep.line(_status_text(st))
    return EXIT_OK


def cmd_sections(args, rep: Report) -> int:
    f, d = parse_inputs(args.fan, [args.divisor])
    pts = global_sections(d)
    rep.payload = {"count": len(pts), "sections": [list(p) for p in pts]}
    rep.line(f"global sections: {len(pts)}")
    for p in pts:
        rep.line("  " + _vec(p))
    rep.table = (["m"], [[" ".join(str(x) for x in p)] for p in pts])
    return EXIT_OK


def cmd_hilbert(args, rep: Report) -> int:
    f, d = parse_inputs(args.fan, [args.divisor])
    values = section_hilbert_function(d, args.m_max)
    fit = detect_quasi_polynomial(values, f.dim)
    rep.payload = {"m_max": args.m_max, "counts": values}
    rep.table = (["m", "h0"], [[m, v] for m, v in enumerate(values)])
    for m, v in enumerate(values):
        rep.line(f"h0({m}D) = {v}")
    if fit is None:
        rep.payload["quasi_polynomial"] = None
        rep.line("no quasi-polynomial of degree <= dim fits within this range")
    else:
        rep.payload["quasi_polynomial"] = {"period": fit.period, "degree_bound": fit.degree, "start": fit.start, "surplus_checks": fit.checks}
        rep.line(f"quasi-polynomial of degree <= {fit.degree}: period {fit.period} from m = {fit.start} ({fit.checks} surplus checks per class)")
    return EXIT_OK


def cmd_gg(args, rep: Report) -> int:
    f, d = parse_inputs(args.fan, [args.divisor])
    res = is_globally_generated(d)
    if res:
        rep.payload = {"globally_generated": True}
        rep.line("globally generated: Yes")
    else:
        k, m = res.witness
        rep.payload = {"globally_generated": False, "witness": {"cone": k, "generator": list(m)}}
        rep.line(f"globally generated: No (cone {k}, local generator {_vec(m)} outside P_D)")
    return EXIT_OK


def cmd_qnef(args, rep: Report) -> int:
    f, d = parse_inputs(args.fan, [args.divisor])
    res = is_qnef(d)
    if res:
        rep.payload = {"qnef": True}
        rep.line("q-nef: Yes")
    else:
        k, v, i = res.witness
        rep.payload = {"qnef": False, "witness": {"cone": k, "vertex": _jvec(v), "ray": i}}
        rep.line(f"q-nef: No (cone {k}, local vertex {_vec(v)} violates the inequality of ray {i})")
    return EXIT_OK


def verify_globally_generated_claims(d: ToricDivisor, qc) -> dict:
    """For a globally generated divisor: P_D vertices are the refined Cartier data, facet data of Q_D lie in P_D."""
    p = polytope_PD(d)
    vertices = set(h_to_v(p).vertices)
    data = set(qc.cartier_data)
    if vertices != data:
        raise InternalInconsistencyError("vertices of P_D differ from the Cartier data on the refined fan")
    for m in qd_facet_data(d):
        if not p.contains(m):
            raise InternalInconsistencyError(f"facet datum {_vec(m)} of Q_D lies outside P_D")
    if not qc.relatively_ample:
        raise InternalInconsistencyError("an extracted wall has nonpositive crossing value")
    return {"vertices_equal_cartier_data": True, "facet_data_in_PD": True}


def cmd_qcartierize(args, rep: Report) -> int:
    f, d = parse_inputs(args.fan, [args.divisor])
    qc = qcartierize(d, args.construction)
    rep.payload = qc.to_dict()
    rep.line(f"construction: {qc.construction}")
    rep.line(f"refined fan: {qc.fan_prime.n_rays} rays, {len(qc.fan_prime.max_cones)} maximal cones; small: {qc.small}")
    for c in qc.fan_prime.max_cones:
        rep.line(f"  cone {list(c)}")
    rep.line(f"strict transform: {_status_text(qc.status)}")
    rep.line(f"extracted walls: {len(qc.extracted_walls)}; relatively ample: {qc.relatively_ample}")
    for w in qc.walls:
        tag = " extracted" if w.extracted else ""
        rep.line(f"  wall {list(w.wall)} between cones {w.cones[0]},{w.cones[1]}: {format_rational(w.value)}{tag}")
    if d.is_integral and is_globally_generated(d):
        rep.payload["globally_generated_checks"] = verify_globally_generated_claims(d, qc)
        rep.line("globally generated: vertices of P_D equal the Cartier data; facet data of Q_D lie in P_D")
    return EXIT_OK


def cmd_qnt(args, rep: Report) -> int:
    if not args.ample:
        raise UsageError("qnt needs --ample")
    f, d, a = parse_inputs(args.fan, [args.divisor, args.ample])
    thr = qnt(d, a)
    rep.payload = {
        "qnt": format_rational(thr.value),
        "attained": thr.attained,
        "breakpoints": [
            {"cone": k, "basis": list(tau), "ray": i, "t": format_rational(t)} for k, tau, i, t in thr.breakpoints
        ],
    }
    rep.line(f"qnt = {format_rational(thr.value)} ({'attained' if thr.attained else 'not attained'})")
    rep.line(f"critical values: {len(thr.breakpoints)} (cone, basis, ray) entries")
    return EXIT_OK


def cmd_pullback(args, rep: Report) -> int:
    f, d = parse_inputs(args.fan, [args.divisor])
    if not args.queries:
        raise UsageError("pullback needs --queries")
    queries = _load_json(args.queries, "queries")
    if isinstance(queries, dict):
        queries = queries.get("queries")
    if not isinstance(queries, list) or not all(isinstance(q, list) for q in queries):
        raise UsageError("queries file must hold a list of integer vectors")
    res = dfh_pullback(d, queries)
    rep.payload = res.to_dict()
    rep.table = (
        ["u", "coefficient", "coefficient_decimal", "cone"],
        [[" ".join(str(x) for x in e.query), format_rational(e.coefficient), decimal_string(e.coefficient), e.cone] for e in res.entries],
    )
    for e in res.entries:
        rep.line(f"{_vec(e.query)}: {format_rational(e.coefficient)} (cone {e.cone}, optimizer {_vec(e.optimizer)})")
    return EXIT_OK


def cmd_mld(args, rep: Report) -> int:
    f = load_fan(args.fan)
    r = mld_search(f, args.bound, args.which)
    rep.payload = r.to_dict()
    rep.table = (
        ["u", "val_plus", "val_minus", "exceptional"],
        [[" ".join(str(x) for x in row.query), format_rational(row.val_plus), format_rational(row.val_minus), row.exceptional] for row in r.rows],
    )

    def fmt(x):
        return "none" if x is None else format_rational(x)

    rep.line(f"search box: entries in [-{r.bound}, {r.bound}], {len(r.rows)} primitive vectors in the support")
    rep.line(f"minimum val{'+' if r.which == 'plus' else '-'} over all: {fmt(r.minimum)} at {r.argmin and _vec(r.argmin)}")
    rep.line(f"minimum over exceptional: {fmt(r.exceptional_minimum)} at {r.exceptional_argmin and _vec(r.exceptional_argmin)}")
    rep.line("(certified within the box only)")
    return EXIT_OK


def acc_table(a_values: Sequence[int]) -> tuple:
    rows = acc_family(a_values)
    header = ["a"]
    for c in ACC_COLUMNS + ("closed_form",):
        header += [c, c + "_decimal"]
    header.append("agree_flags")
    body = []
    for r in rows:
        line = [r.a]
        for c in ACC_COLUMNS + ("closed_form",):
            v = getattr(r, c)
            line += [format_rational(v), decimal_string(v)]
        line.append(";".join(c + "=closed_form" for c in r.agreeing_columns) or "none")
        body.append(line)
    return rows, header, body


def cmd_acc_family(args, rep: Report) -> int:
    a_values = parse_a_values(args.a)
    rows, header, body = acc_table(a_values)
    rep.table = (header, body)
    rep.payload = {"rows": [dict(zip(header, line)) for line in body]}
    rep.line("  ".join(header))
    for line in body:
        rep.line("  ".join(str(x) for x in line))
    return EXIT_OK


def cmd_gg_conjecture(args, rep: Report) -> int:
    if not args.ample:
        raise UsageError("gg-conjecture needs --ample")
    f, d, a = parse_inputs(args.fan, [args.divisor, args.ample])
    r = check_gg_conjecture(d, a, args.m_max)
    rep.payload = {"rows": [{"m": m, "globally_generated": g.generated} for m, g in r.rows], "all_generated": r.all_generated}
    rep.table = (["m", "globally_generated"], [[m, g.generated] for m, g in r.rows])
    for m, g in r.rows:
        rep.line(f"m = {m}: {'Yes' if g else 'No'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toridiv", description="Exact computations with torus-invariant divisors on toric varieties.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report to this file instead of standard output")
    common.add_argument("--format", choices=("text", "json", "csv"), default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, divisor=True, optional_divisor=False):
        p = sub.add_parser(name, parents=[common], help=help_)
        if name != "acc-family":
            p.add_argument("fan", help="fan JSON file")
        if divisor:
            p.add_argument("divisor", nargs="?" if optional_divisor else None, help="divisor JSON file")
        p.set_defaults(func=func)
        return p

    add("check", cmd_check, "validate a fan and report the Cartier status of a divisor", optional_divisor=True)
    add("sections", cmd_sections, "list global sections")
    p = add("hilbert", cmd_hilbert, "section counts of multiples")
    p.add_argument("--m-max", type=int, default=10)
    add("gg", cmd_gg, "global generation test")
    add("qnef", cmd_qnef, "q-nef test")
    p = add("qcartierize", cmd_qcartierize, "small Q-Cartierizing refinement")
    p.add_argument("--construction", choices=("polar", "relative"), default="polar")
    p = add("qnt", cmd_qnt, "quasi-nef threshold with respect to an ample divisor")
    p.add_argument("--ample", help="ample divisor JSON file")
    p = add("pullback", cmd_pullback, "asymptotic pullback coefficients along query rays")
    p.add_argument("--queries", help="JSON list of integer vectors")
    p = add("mld", cmd_mld, "box-bounded minimal relative canonical valuation", divisor=False)
    p.add_argument("--bound", type=int, default=5)
    p.add_argument("--which", choices=("plus", "minus"), default="plus")
    p = add("acc-family", cmd_acc_family, "tabulate the accumulating three-dimensional family", divisor=False)
    p.add_argument("--a", default="1..30", help="parameter range like 1..30 or 1,2,5")
    p = add("gg-conjecture", cmd_gg_conjecture, "global generation of m(D + A) for m = 1..m_max")
    p.add_argument("--ample", help="Cartier ample divisor JSON file")
    p.add_argument("--m-max", type=int, default=6)
    return parser


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    rep = Report()
    try:
        code = args.func(args, rep)
        fmt = args.format or ("csv" if args.command == "acc-family" else "text")
        text = rep.render(fmt)
    except UsageError as exc:
        print(f"toridiv: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (DomainError, PreconditionError) as exc:
        print(f"toridiv: {exc}", file=stderr)
        return EXIT_DOMAIN
    except InternalInconsistencyError as exc:
        print(f"toridiv: internal inconsistency: {exc}", file=stderr)
        return EXIT_INTERNAL
    except ToriDivError as exc:
        print(f"toridiv: {exc}", file=stderr)
        return EXIT_DOMAIN
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"toridiv: usage error: cannot write {args.out}: {exc}", file=stderr)
            return EXIT_USAGE
    else:
        stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
