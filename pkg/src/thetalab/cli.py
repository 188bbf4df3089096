"""``thetalab`` command-line front end.

Every subcommand writes canonical JSON (or SVG for ``render``).  Exit codes:
0 success, 1 malformed input, 2 precondition violated (wrong rank,
degenerate coefficients, non-generic endpoint, ...), 3 a verification
failed.  Mutation indices on the command line are 1-based.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

import sympy

from . import io
from .bases import RationalFan2D, exact_theta_F, is_pointed_up_to_depth, ray_basis_element
from .broken_lines import NonGenericError, POSITIVE_Q, mutate_theta, theta, theta_closed
from .dominance import DEFAULT_DEPTH, dom_membership, in_n_set_at, n_set_membership, nu
from .lattice import (
    ExtendedExchangeMatrix,
    eta_step,
    find_mutation_symmetries,
    integer_points_box,
)
from .render import Viewport, render_svg
from .scattering import build_scattering_diagram, mutate_diagram
from .series import TruncatedSeries
from .structure import (
    DomainOfDefinitionError,
    InstabilityError,
    ResidualError,
    a_limit,
    expand_product_in_theta_basis,
    extract_pointed,
    fixing_power,
    mutate_line_along,
    structure_table,
    verify_symmetry_support,
)
from .substitution import CoefficientDegeneracyError, NotLaurentError, SeedFrame

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_VERIFY = 0, 1, 2, 3


class PreconditionError(ValueError):
    pass


class VerificationError(RuntimeError):
    def __init__(self, message: str, payload: dict | None = None):
        super().__init__(message)
        self.payload = payload


def default_depth() -> int:
    raw = os.environ.get("THETALAB_DEPTH")
    if raw is None:
        return DEFAULT_DEPTH
    try:
        value = int(raw)
    except ValueError as exc:
        raise io.InputError(f"THETALAB_DEPTH must be an integer, got {raw!r}") from exc
    if value < 0:
        raise io.InputError("THETALAB_DEPTH must be nonnegative")
    return value


# argument helpers ---------------------------------------------------------------


def _matrix(args, required: bool = True) -> ExtendedExchangeMatrix | None:
    if args.Btilde is not None:
        return io.matrix_from_json(io.parse_json_arg(args.Btilde), principal_if_square=False)
    if args.B is not None:
        return io.matrix_from_json(io.parse_json_arg(args.B))
    if required:
        raise io.InputError("--B or --Btilde is required")
    return None


def _rank2(Bt: ExtendedExchangeMatrix) -> None:
    if Bt.rank != 2:
        raise PreconditionError(f"this subcommand needs rank 2, got rank {Bt.rank}")


def _vector(text: str, r: int | None, name: str) -> tuple[int, ...]:
    v = io.parse_int_vector(text)
    if r is not None and len(v) != r:
        raise io.InputError(f"{name} must have {r} entries, got {len(v)}")
    return v


def _kseq(text: str | None, r: int) -> tuple[int, ...]:
    if text is None or not text.strip():
        return ()
    raw = text.strip()
    if raw.startswith("["):
        labels = io.parse_int_vector(raw)
    else:
        try:
            labels = tuple(int(x) for x in raw.split(","))
        except ValueError as exc:
            raise io.InputError(f"--kseq must list 1-based indices, got {text!r}") from exc
    for k in labels:
        if not 1 <= k <= r:
            raise PreconditionError(f"mutation index {k} outside 1..{r}")
    return tuple(k - 1 for k in labels)


def _Q(args, r: int):
    if args.Q is None:
        return POSITIVE_Q if r == 2 else None
    Q = io.parse_point(args.Q)
    if len(Q) != r:
        raise io.InputError(f"--Q must have {r} coordinates")
    return Q


def _one_based(kseq: Sequence[int] | None):
    return None if kseq is None else [k + 1 for k in kseq]


def _order(args) -> int:
    if args.order < 0:
        raise io.InputError("--order must be nonnegative")
    return args.order


def _depth(args) -> int:
    depth = args.depth if args.depth is not None else default_depth()
    if depth < 0:
        raise io.InputError("--depth must be nonnegative")
    return depth


def _diagram(Bt, order):
    _rank2(Bt)
    return build_scattering_diagram(Bt, order)


def _theta(diagram, m, Q, order):
    if diagram.is_certified_finite():
        return theta_closed(diagram, m, Q)
    return theta(diagram, m, Q, order)


# subcommands --------------------------------------------------------------------


def cmd_scat(args):
    Bt = _matrix(args)
    diagram = _diagram(Bt, _order(args))
    if args.svg:
        _write(args.svg, render_svg(diagram))
    return io.diagram_to_json(diagram)


def cmd_theta(args):
    Bt = _matrix(args, required=False)
    m = _vector(args.m, None if Bt is None else Bt.rank, "--m")
    order = _order(args)
    if not any(m):
        r = len(m)
        return {
            "m": list(m),
            "Q": None,
            "finiteness": "certified-finite-type",
            "broken_line_count": 0,
            "F": io.series_to_json(TruncatedSeries.one(r)),
            "display": "1",
            "lines": [],
        }
    if Bt is None:
        raise io.InputError("--B or --Btilde is required for m != 0")
    diagram = _diagram(Bt, order)
    result = theta(diagram, m, _Q(args, Bt.rank), order)
    if args.svg:
        _write(args.svg, render_svg(diagram, result.lines))
    return io.theta_to_json(result)


def cmd_mutate_theta(args):
    Bt = _matrix(args)
    order = _order(args)
    m = _vector(args.m, Bt.rank, "--m")
    ks = _kseq(args.k, Bt.rank)
    if len(ks) != 1:
        raise io.InputError("--k takes exactly one 1-based index")
    k = ks[0]
    Q = _Q(args, Bt.rank)
    diagram = _diagram(Bt, order)
    mutated = _diagram(Bt.mutate(k), order)
    source = _theta(diagram, m, Q, order)
    predicted = mutate_theta(source, SeedFrame(Bt), k)
    m2 = eta_step(Bt.B, k, m)
    target = _theta(mutated, m2, Q, order)
    check_order = None if source.order is None and target.order is None else order
    ok = predicted.equals(target.graded(), check_order)
    payload = {
        "m": list(m),
        "k": k + 1,
        "eta_k_m": list(m2),
        "order": check_order,
        "substituted": io.graded_to_json(predicted),
        "mutated_theta": io.theta_to_json(target, include_lines=False),
        "display": io.display_pointed(m2, target.F),
        "identity_holds": ok,
    }
    if not ok:
        raise VerificationError("mutation identity fails", payload)
    return payload


def cmd_struct(args):
    Bt = _matrix(args)
    order = _order(args)
    p1 = _vector(args.p1, Bt.rank, "--p1")
    p2 = _vector(args.p2, Bt.rank, "--p2")
    diagram = _diagram(Bt, order)
    if args.m is not None and args.Q is None:
        m = _vector(args.m, Bt.rank, "--m")
        value = a_limit(diagram, p1, p2, m, order)
        return {"p1": list(p1), "p2": list(p2), "m": list(m), "order": order, "limit": True,
                "a": io.series_to_json(value)}
    Q = _Q(args, Bt.rank)
    table = structure_table(diagram, p1, p2, Q, order)
    entries = [{"m": list(m), "a": io.series_to_json(s)} for m, s in sorted(table.entries.items())]
    if args.m is not None:
        m = _vector(args.m, Bt.rank, "--m")
        entries = [e for e in entries if tuple(e["m"]) == m]
    return {"p1": list(p1), "p2": list(p2), "Q": io._point(Q), "order": order, "limit": False, "entries": entries}


def _factors(text: str, r: int):
    value = io.parse_json_arg(text)
    try:
        factors = [(tuple(int(x) for x in m), int(a)) for m, a in value]
    except (TypeError, ValueError) as exc:
        raise io.InputError('--factors must look like [[[m1, m2], a], ...]') from exc
    if not factors or any(len(m) != r or a < 0 for m, a in factors):
        raise io.InputError("each factor needs a rank-sized m and a nonnegative power")
    return factors


def cmd_expand(args):
    Bt = _matrix(args)
    order = _order(args)
    factors = _factors(args.factors, Bt.rank)
    diagram = _diagram(Bt, order)
    expansion = expand_product_in_theta_basis(diagram, factors, order, _Q(args, Bt.rank))
    return {
        "factors": [[list(m), a] for m, a in factors],
        "order": order,
        "expansion": io.expansion_to_json(expansion),
    }


def cmd_nmset(args):
    Bt = _matrix(args)
    m = _vector(args.m, Bt.rank, "--m")
    R = args.range
    rows = []
    if args.kseq is not None:
        kseq = _kseq(args.kseq, Bt.rank)
        for n in integer_points_box((0,) * Bt.rank, (R,) * Bt.rank):
            rows.append({"n": list(n), "in": in_n_set_at(Bt, m, n, kseq), "nu": list(nu(Bt, kseq, m, n))})
        return {"m": list(m), "kseq": _one_based(kseq), "range": R, "rows": rows}
    depth = _depth(args)
    for n in integer_points_box((0,) * Bt.rank, (R,) * Bt.rank):
        v = n_set_membership(Bt, m, n, depth)
        rows.append({"n": list(n), "verdict": v.value, "witness": _one_based(v.witness)})
    return {"m": list(m), "kseq": None, "depth": depth, "range": R, "rows": rows}


def cmd_domregion(args):
    Bt = _matrix(args)
    m = _vector(args.m, Bt.rank, "--m")
    R = args.range
    depth = _depth(args)
    rows = []
    for p in integer_points_box(tuple(x - R for x in m), tuple(x + R for x in m)):
        v = dom_membership(Bt.B, m, p, depth)
        rows.append({"p": list(p), "verdict": v.value, "witness": _one_based(v.witness)})
    return {"m": list(m), "depth": depth, "range": R, "rows": rows}


def cmd_basis(args):
    Bt = _matrix(args)
    m = _vector(args.m, Bt.rank, "--m")
    order = _order(args)
    depth = _depth(args)
    diagram = _diagram(Bt, order)
    if not diagram.is_certified_finite():
        raise PreconditionError("the ray basis is built only for certified finite-type diagrams")
    fan = RationalFan2D.from_diagram(diagram)
    thetas = exact_theta_F(diagram)
    # Finite type: rho is an exact Laurent polynomial, so nothing is truncated.
    rho = ray_basis_element(fan, thetas, m, None)
    cone, coords = fan.locate(m)
    verdict = is_pointed_up_to_depth(rho.to_graded(Bt.B), Bt, depth)
    expansion = extract_pointed(rho.F, m, Bt.B, thetas, rho.F.degree())
    payload = {
        "m": list(m),
        "fan": {"rays": [list(r) for r in fan.rays], "integral": fan.integral},
        "cone": [list(r) for r in cone],
        "cone_coordinates": [io.rational(c) for c in coords],
        "rho": io.series_to_json(rho.F),
        "display": io.display_pointed(m, rho.F),
        "pointed": {"ok": verdict.pointed, "depth": verdict.depth, "failure": _one_based(verdict.failure),
                    "reason": verdict.reason},
        "theta_expansion": io.expansion_to_json(expansion),
    }
    if not verdict.pointed:
        raise VerificationError("ray basis element is not pointed", payload)
    return payload


def _degree_window(B, p, order):
    """``q -> True`` when ``q = p + nB`` for some ``n >= 0`` of total degree at most ``order``."""
    M = sympy.Matrix(B)
    if M.det() == 0:
        return None
    inv = M.inv()

    def inside(q):
        n = (sympy.Matrix([[a - b for a, b in zip(q, p)]]) * inv).tolist()[0]
        return all(x.is_integer and x >= 0 for x in n) and sum(n) <= order

    return inside


def cmd_symmetries(args):
    Bt = _matrix(args)
    found = find_mutation_symmetries(Bt.B, args.max_len)
    payload = {"max_len": args.max_len, "symmetries": [_one_based(s) for s in found]}
    if args.factors is None:
        return payload
    order = _order(args)
    diagram = _diagram(Bt, order)
    factors = _factors(args.factors, Bt.rank)
    expansion = expand_product_in_theta_basis(diagram, factors, order, _Q(args, Bt.rank))
    checks = []
    ok = True
    p = tuple(sum(a * m[i] for m, a in factors) for i in range(Bt.rank))
    for s in found:
        ell = fixing_power(Bt.B, s, [p])
        if ell is None:
            checks.append({"kseq": _one_based(s), "ell": None, "ok": None, "problems": ["orbit of m too long"]})
            continue
        # Truncation can cut an orbit; only points inside the computed degree range count as problems.
        v = verify_symmetry_support(Bt, s, expansion, ell, in_range=_degree_window(Bt.B, p, order))
        ok &= v.ok
        checks.append({"kseq": _one_based(s), "ell": ell, "ok": v.ok, "problems": list(v.problems)})
    payload.update({"order": order, "expansion": io.expansion_to_json(expansion), "checks": checks})
    if not ok:
        raise VerificationError("support is not a union of symmetry orbits", payload)
    return payload


def cmd_render(args):
    Bt = _matrix(args)
    order = _order(args)
    diagram = _diagram(Bt, order)
    lines = ()
    if args.m is not None:
        m = _vector(args.m, Bt.rank, "--m")
        lines = theta(diagram, m, _Q(args, Bt.rank), order).lines
    kseq = _kseq(args.kseq, Bt.rank)
    for k in kseq:
        diagram = mutate_diagram(diagram, k)
    if kseq:
        lines = tuple(mutate_line_along(g, Bt, kseq) for g in lines)
    radius = io.parse_rational(args.radius) if args.radius is not None else None
    return render_svg(diagram, lines, Viewport(size=args.size, radius=radius))


# wiring ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, order_default: int = 6) -> None:
    p.add_argument("--B", help="exchange matrix: JSON file or inline JSON; square input gets principal coefficients")
    p.add_argument("--Btilde", help="extended exchange matrix used as given")
    p.add_argument("--order", type=int, default=order_default, help="zeta total-degree bound D")
    p.add_argument("--depth", type=int, default=None, help="mutation depth (default: THETALAB_DEPTH or 6)")
    p.add_argument("--Q", default=None, help='endpoint, e.g. "53/47,1"')
    p.add_argument("--out", default=None, help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thetalab", description="Scattering diagrams and theta functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    scat = sub.add_parser("scat", help="scattering diagrams")
    scat_sub = scat.add_subparsers(dest="action", required=True)
    build = scat_sub.add_parser("build", help="consistent completion up to --order")
    _common(build)
    build.add_argument("--svg", default=None)
    build.set_defaults(func=cmd_scat)

    p = sub.add_parser("theta", help="theta function via broken lines")
    _common(p)
    p.add_argument("--m", required=True)
    p.add_argument("--svg", default=None)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("mutate-theta", help="check the mutation identity for one theta function")
    _common(p, 8)
    p.add_argument("--m", required=True)
    p.add_argument("--k", "--kseq", dest="k", required=True, help="1-based mutation index")
    p.set_defaults(func=cmd_mutate_theta)

    p = sub.add_parser("struct", help="structure constants a(p1, p2, m)")
    _common(p)
    p.add_argument("--p1", required=True)
    p.add_argument("--p2", required=True)
    p.add_argument("--m", default=None, help="restrict to one m; without --Q this takes the limit Q -> m")
    p.set_defaults(func=cmd_struct)

    p = sub.add_parser("expand", help="expand a product of theta functions in the theta basis")
    _common(p)
    p.add_argument("--factors", required=True, help="[[m, a], ...] for prod theta_m^a")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("nmset", help="membership table for N_m")
    _common(p)
    p.add_argument("--m", required=True)
    p.add_argument("--kseq", default=None, help="1-based sequence; omit for the depth-limited intersection")
    p.add_argument("--range", type=int, default=4)
    p.set_defaults(func=cmd_nmset)

    p = sub.add_parser("domregion", help="integral dominance region of m in a box")
    _common(p)
    p.add_argument("--m", required=True)
    p.add_argument("--range", type=int, default=3)
    p.set_defaults(func=cmd_domregion)

    p = sub.add_parser("basis", help="ray basis element in finite type")
    _common(p)
    p.add_argument("--m", required=True)
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("symmetries", help="mutation symmetries of B and orbit checks")
    _common(p)
    p.add_argument("--max-len", dest="max_len", type=int, default=4)
    p.add_argument("--factors", default=None)
    p.set_defaults(func=cmd_symmetries)

    p = sub.add_parser("render", help="SVG of a rank-2 diagram with optional broken lines")
    _common(p)
    p.add_argument("--m", default=None)
    p.add_argument("--kseq", default=None, help="mutate diagram and lines along this 1-based sequence")
    p.add_argument("--size", type=int, default=640)
    p.add_argument("--radius", default=None, help="half-width of the viewport in lattice units")
    p.set_defaults(func=cmd_render)
    return parser


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _emit(args, text: str) -> None:
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        result = args.func(args)
    except io.InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VerificationError as exc:
        if exc.payload is not None:
            _emit(args, io.dumps(exc.payload))
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (InstabilityError, ResidualError, NotLaurentError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (PreconditionError, CoefficientDegeneracyError, NonGenericError, DomainOfDefinitionError, ValueError) as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    _emit(args, result if isinstance(result, str) else io.dumps(result))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
