"""Command-line front end: exact computations in, JSON reports out.

Every subcommand emits one report envelope (see data/report.schema.json):

    {"schema_version": 1, "command": ..., "inputs": ..., "outputs": ...,
     "checks": [{"name", "passed", "value", "note"}, ...]}

All numbers are exact strings "p/q"; output is deterministic byte-for-byte
for identical inputs (keys sorted, no timestamps; the acceptance runner
attaches wall times only behind --timings). Exit status: 0 when every check
passes, 1 on a failed check or a domain error, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources

from . import accept, family, nefbuilder, toric3
from .dualgraph import external_from_json, graph_from_json, graph_to_json, validate
from .errors import PluricalcError
from .ratmat import format_rational, parse_rational
from .singularity import (
    CyclicQuotientType,
    chain_cartier_index,
    classify_chains,
    discrepancy_coeffs,
    mld_of,
    resolve,
)
from .zariski import (
    Configuration,
    LatticeDivisor,
    coefficient_reduction,
    floor_round_loop,
    is_relatively_nef,
    iterate_reduction,
    zariski_decompose,
)

SCHEMA_VERSION = 1


def load_schema() -> dict:
    """The shipped JSON schema every report validates against."""
    text = resources.files("pluricalc.data").joinpath("report.schema.json").read_text()
    return json.loads(text)


def _frac_map(mapping) -> dict:
    return {key: format_rational(value) for key, value in sorted(mapping.items())}


def _check(name: str, passed: bool, value=None, note: str | None = None) -> dict:
    entry: dict = {"name": name, "passed": bool(passed)}
    if value is not None:
        entry["value"] = value
    if note is not None:
        entry["note"] = note
    return entry


def _report(command: str, inputs: dict, outputs: dict, checks: list[dict] | None = None) -> dict:
    report: dict = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "outputs": outputs,
    }
    if checks is not None:
        report["checks"] = checks
    return report


def _read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def _load_configuration(path: str) -> Configuration:
    data = _read_json(path)
    graph = graph_from_json(data["graph"] if "graph" in data else data)
    externals = tuple(external_from_json(e) for e in data.get("externals", []))
    return Configuration(graph, externals)


def _load_divisor(path: str) -> LatticeDivisor:
    data = _read_json(path)
    coeffs = {str(k): parse_rational(str(v)) for k, v in data.get("coeffs", {}).items()}
    base = data.get("base")
    if base is None:
        return LatticeDivisor(coeffs)
    return LatticeDivisor(coeffs, str(base["id"]), int(base.get("mult", 1)))


def _divisor_json(d: LatticeDivisor) -> dict:
    out: dict = {"coeffs": _frac_map(d.coeffs)}
    if d.base_id is not None:
        out["base"] = {"id": d.base_id, "mult": d.base_mult}
    return out


# -- subcommands -------------------------------------------------------------


def cmd_hj(args) -> dict:
    data = resolve(CyclicQuotientType(args.n, args.q))
    outputs = {
        "weights": list(data.graph.weights()),
        "coeffs": [format_rational(data.coeffs[vid]) for vid in data.graph.ids],
        "mld": format_rational(data.mld),
        "cartier_index": data.cartier_index,
    }
    return _report("hj", {"n": args.n, "q": args.q}, outputs)


def cmd_mld(args) -> dict:
    graph = graph_from_json(_read_json(args.graph))
    coeffs = discrepancy_coeffs(graph)
    value = mld_of(graph)
    order = graph.chain_order()
    outputs = {
        "weights": list(graph.weights()),
        "coeffs": _frac_map(coeffs),
        "mld": format_rational(value),
        "cartier_index": chain_cartier_index([graph.vertex(v).weight for v in order])
        if order is not None
        else None,
        "diagnostics": validate(graph, minimal_resolution=True),
    }
    return _report("mld", {"graph": graph_to_json(graph)}, outputs)


def cmd_classify(args) -> dict:
    epsilon = parse_rational(args.epsilon)
    report = classify_chains(epsilon, args.max_weight, args.max_len)

    def record_json(rec):
        return {
            "weights": list(rec.weights),
            "type": {"order": rec.hj_type[0], "weight": rec.hj_type[1]},
            "mld": format_rational(rec.mld),
            "cartier_index": rec.cartier_index,
        }

    outputs = {
        "weight_cap": report.weight_cap,
        "tail_family": [record_json(r) for r in report.tail_family],
        "others": [record_json(r) for r in report.others],
        "max_cartier_others": report.max_cartier_others,
    }
    checks = [
        _check(
            "bounded-index-outside-tail-family",
            report.max_cartier_others is not None or not report.others,
            value=report.max_cartier_others,
            note="every enumerated chain outside the [2,...,2,3] family has Cartier index at most this bound",
        )
    ]
    inputs = {"epsilon": format_rational(epsilon), "max_weight": args.max_weight, "max_len": args.max_len}
    return _report("classify", inputs, outputs, checks)


def cmd_zariski(args) -> dict:
    cfg = _load_configuration(args.config)
    divisor = _load_divisor(args.divisor)
    result = zariski_decompose(cfg, divisor)
    outputs = {
        "P": _divisor_json(result.P),
        "N": _divisor_json(result.N),
        "support": sorted(result.support),
        "rounds": [list(r) for r in result.rounds],
    }
    checks = [
        _check(
            "negative-part-effective",
            all(c >= 0 for c in result.N.coeffs.values()),
            note="N >= 0 with negative-definite support, P orthogonal to the support",
        )
    ]
    inputs = {"config": args.config, "divisor": _divisor_json(divisor)}
    return _report("zariski", inputs, outputs, checks)


def cmd_floorloop(args) -> dict:
    cfg = _load_configuration(args.config)
    divisor = _load_divisor(args.divisor)
    target = _load_divisor(args.target)
    result = floor_round_loop(cfg, divisor, target, defines_birational_map=args.birational)
    sandwiched = all(
        divisor.coeff(v) >= result.divisor.coeff(v) >= target.coeff(v) for v in cfg.graph.ids
    )
    outputs = {
        "divisor": _divisor_json(result.divisor),
        "steps": result.steps,
        "trace": [_frac_map(t) for t in result.trace],
        "defines_birational_map": result.defines_birational_map,
    }
    checks = [
        _check("result-relatively-nef", is_relatively_nef(cfg, result.divisor)),
        _check("sandwich", sandwiched, note="input >= result >= target coefficientwise"),
    ]
    inputs = {
        "config": args.config,
        "divisor": _divisor_json(divisor),
        "target": _divisor_json(target),
    }
    return _report("floorloop", inputs, outputs, checks)


def cmd_reduce(args) -> dict:
    cfg = _load_configuration(args.config)
    values = [int(c) for c in args.coeffs.split(",")] if args.coeffs else []
    ids = list(cfg.graph.ids)
    if len(values) != len(ids):
        raise PluricalcError(f"expected {len(ids)} coefficients (vertex order {ids}), got {len(values)}")
    c = dict(zip(ids, values))
    inputs = {"config": args.config, "m": args.m, "coeffs": c, "iterate": bool(args.iterate)}
    if args.iterate:
        result = iterate_reduction(cfg, args.m, c, fixed_part_on_exceptional=not args.fixed_part_elsewhere)
        outputs = {
            "coeffs": result.coeffs,
            "steps": result.steps,
            "trace": [dict(sorted(t.items())) for t in result.trace],
            "fixed_part_hypothesis": result.fixed_part_hypothesis,
        }
        checks = [
            _check(
                "fixpoint-relatively-nef",
                result.relatively_nef,
                note="K + sum(c_i/m) E_i at the fixpoint clears every declared curve",
            )
        ]
        return _report("reduce", inputs, outputs, checks)
    outputs = {"coeffs": coefficient_reduction(cfg, args.m, c)}
    return _report("reduce", inputs, outputs)


def cmd_nefcoeffs(args) -> dict:
    chains = [] if args.rational else [int(k) for k in args.chains.split(",")] if args.chains else []
    f_graph = graph_from_json(_read_json(args.f_graph)) if args.f_graph else None
    inp = nefbuilder.build_input(args.m0, args.n2, chains, f_graph)
    coeffs = nefbuilder.build_coeffs(inp)
    cert = nefbuilder.verify_exceptional(inp, coeffs)
    outputs = {
        "coeffs": dict(sorted(cert.coeffs.items())),
        "intersections": _frac_map(cert.intersections),
        "positive_slots": sorted(cert.positive_slots),
    }
    checks = [
        _check("nef-against-exceptional", cert.all_nef, note="(m0 K + sum c E) . E >= 0 for every exceptional curve"),
        _check("coefficient-bounds", cert.all_bounds, note="0 <= c <= floor(m0 b) for every vertex"),
    ]
    inputs = {
        "m0": args.m0,
        "n2": args.n2,
        "chains": chains,
        "rational": bool(args.rational),
    }
    if args.gamma0 is not None and args.t is not None:
        gamma0 = parse_rational(args.gamma0)
        k_list = [int(k) for k in args.k_list.split(",")] if args.k_list else chains
        case = nefbuilder.external_inequalities(args.n2, gamma0, args.t, k_list, args.m0)
        outputs["external_case"] = {
            "t": case.t,
            "case": case.case,
            "value": format_rational(case.value),
            "worst_case": format_rational(case.worst_case),
            "notes": list(case.notes),
        }
        checks.append(
            _check(
                "external-curve-inequality",
                case.passed and case.precondition_ok,
                value=format_rational(case.value),
                note="lower bound for the product against a classified non-exceptional curve",
            )
        )
        inputs["gamma0"] = format_rational(gamma0)
        inputs["t"] = args.t
    if args.m1 is not None:
        multipliers = nefbuilder.compose_multipliers(args.m0, args.m1, args.bpf_factor)
        outputs["multipliers"] = {
            "m0": multipliers.m0,
            "m1": multipliers.m1,
            "m2": multipliers.m2,
            "bpf_factor": multipliers.bpf_factor,
            "m": multipliers.m,
        }
        inputs["m1"] = args.m1
        inputs["bpf_factor"] = args.bpf_factor
    return _report("nefcoeffs", inputs, outputs, checks)


def _family_instance_json(inst: family.FamilyInstance) -> dict:
    return {
        "n": inst.n,
        "k": inst.k,
        "d": inst.d,
        "ambient_weights": list(inst.ambient_weights),
        "o_type": {"order": inst.o_type.order, "weight": inst.o_type.weight},
        "o1": {
            "weights": list(inst.o1_graph.weights()),
            "det": inst.o1_type.order,
            "type": {"order": inst.o1_type.order, "weight": inst.o1_type.weight},
        },
        "o2": {
            "weights": list(inst.o2_graph.weights()),
            "det": inst.o2_type.order,
            "type": {"order": inst.o2_type.order, "weight": inst.o2_type.weight},
            "type_matches_graph": inst.o2_type_matches_graph,
        },
        "coeffs_over_hypersurface": _frac_map(inst.coeffs_Y),
        "coeffs_over_contraction": _frac_map(inst.coeffs_X),
    }


def _family_checks(inst: family.FamilyInstance, which: str, nonnef_m: int | None) -> list[dict]:
    checks = []
    if which in ("all", "mld"):
        mld = family.check_mld(inst)
        checks.append(
            _check(
                "mld-closed-form",
                mld.value == mld.closed_form and mld.attained_at_o2,
                value=format_rational(mld.value),
                note="mld equals 2k/(2k(n-1)-1) = 1/(n-1-1/(2k)), attained at the second point",
            )
        )
    if which in ("all", "intersection"):
        inter = family.check_curve_intersection(inst)
        checks.append(
            _check(
                "curve-intersection",
                inter.value == inter.closed_form and inter.strict_chain_holds,
                value=format_rational(inter.value),
                note="pullback of K meets the inserted curve in 1/(4k^2(n-1)^2-1) < 1/(35k^2) < 5/(12k)",
            )
        )
    if which in ("all", "degrees"):
        deg = family.check_ample_degrees(inst)
        checks.append(
            _check(
                "degree-arithmetic",
                deg.identity_holds and deg.at_least_116 and deg.z_witness_holds,
                value=deg.shifted,
                note="canonical degree shift identity, its >= 116 bound, and the z-monomial witness",
            )
        )
    if which in ("all", "nonnef") and nonnef_m is not None:
        report = family.exhaustive_non_nef(inst, nonnef_m)
        checks.append(
            _check(
                "no-admissible-nef-vector",
                report.all_non_nef,
                value=report.total_vectors,
                note=f"no admissible coefficient vector is nef at m = {nonnef_m} "
                f"(searched {report.total_vectors} vectors)",
            )
        )
    if which == "nonnef" and nonnef_m is None:
        raise PluricalcError("--check nonnef needs --nonnef-m")
    return checks


def cmd_family(args) -> dict:
    inputs = {"n": args.n, "k": args.k, "check": args.check}
    if args.nonnef_m is not None:
        inputs["nonnef_m"] = args.nonnef_m
    inst = family.build_family(args.n, args.k)
    outputs = _family_instance_json(inst)
    checks = _family_checks(inst, args.check, args.nonnef_m)
    if args.grid:
        n_part, k_part = args.grid.split(",")
        n_lo, n_hi = (int(x) for x in n_part.split(":"))
        k_lo, k_hi = (int(x) for x in k_part.split(":"))
        inputs["grid"] = args.grid
        rows = []
        for member in family.grid(range(n_lo, n_hi + 1), range(k_lo, k_hi + 1)):
            mld = family.check_mld(member)
            inter = family.check_curve_intersection(member)
            deg = family.check_ample_degrees(member)
            ok = (
                mld.value == mld.closed_form
                and mld.attained_at_o2
                and inter.strict_chain_holds
                and deg.identity_holds
                and deg.at_least_116
                and deg.z_witness_holds
            )
            rows.append(
                {
                    "n": member.n,
                    "k": member.k,
                    "d": member.d,
                    "mld": format_rational(mld.value),
                    "intersection": format_rational(inter.value),
                    "all_ok": ok,
                }
            )
        outputs["grid"] = rows
        checks.append(_check("grid-sweep", all(r["all_ok"] for r in rows), value=len(rows)))
    return _report("family", inputs, outputs, checks)


def cmd_toric(args) -> dict:
    p = toric3.ToricParams(args.m, args.n, args.b)
    fan1, fan2, fan3 = toric3.build_fans(p)
    names = {p.u: "u", p.v: "v", toric3.E2: "e2", toric3.E3: "e3", p.w: "w"}

    def ray_name(ray):
        return names.get(ray, str(list(ray)))

    def cones_json(fan):
        out = []
        for c in fan.maximal:
            q = toric3.quotient_type(c)
            out.append(
                {
                    "rays": [list(r) for r in c.rays],
                    "mult": toric3.cone_mult(c),
                    "quotient": {
                        "order": q.order,
                        "weights": list(q.weights) if q.weights is not None else None,
                        "weights_canonical": list(q.weights_canonical)
                        if q.weights_canonical is not None
                        else None,
                    },
                }
            )
        return out

    intersections = toric3.wall_curve_intersections(fan2, (toric3.E2, toric3.E3))
    k_dot = toric3.curve_k_dot(fan2, (toric3.E2, toric3.E3))
    discrepancy = toric3.subdivision_discrepancy(fan2, p.w, toric3.cone(toric3.E2, toric3.E3, p.u))
    floored = toric3.floored_pullback_check(p, args.m0)
    closed = toric3.closed_form_floored(p, args.m0)
    constraints = toric3.negativity_constraints(p, args.m0)
    outputs = {
        "rays": {"u": list(p.u), "v": list(p.v), "w": list(p.w)},
        "fans": {
            "initial": cones_json(fan1),
            "subdivided": cones_json(fan2),
            "twice_subdivided": cones_json(fan3),
        },
        "wall_curve_products": {ray_name(r): format_rational(v) for r, v in intersections.items()},
        "k_dot_wall_curve": format_rational(k_dot),
        "subdivision_discrepancy": format_rational(discrepancy),
        "floored_pullback": format_rational(floored),
        "closed_form": format_rational(closed),
        "failing_constraints": constraints,
    }
    checks = [
        _check(
            "fan-matches-closed-form",
            floored == closed,
            value=format_rational(floored),
            note="floored pullback product computed on the fan equals (2/n - b/m) m0 - {(m - m0 b)/m}",
        ),
        _check(
            "negative-under-constraints",
            bool(constraints) or floored < 0,
            note="once 2 b m0 < n < m the floored product is negative, forcing the wall curve into every member",
        ),
    ]
    inputs = {"m": args.m, "n": args.n, "b": args.b, "m0": args.m0}
    if args.sweep:
        cases = 0
        all_equal = True
        for n in range(3, args.sweep + 1, 2):
            for b in range(1, 11):
                sweep_p = toric3.ToricParams(n * b - 1, n, b)
                for m0 in range(1, 6):
                    value = toric3.floored_pullback_check(sweep_p, m0)
                    all_equal = all_equal and value == toric3.closed_form_floored(sweep_p, m0)
                    cases += 1
        outputs["sweep"] = {"cases": cases, "n_max": args.sweep, "b_max": 10, "m0_max": 5}
        checks.append(_check("closed-form-sweep", all_equal, value=cases))
        inputs["sweep"] = args.sweep
    return _report("toric", inputs, outputs, checks)


def cmd_accept(args) -> dict:
    suite = accept.run_suite(seed=args.seed, threads=args.threads, with_timings=args.timings)
    checks = [
        _check(f"{entry['number']:02d}-{entry['name']}", entry["passed"])
        for entry in suite["criteria"]
    ]
    return _report("accept", {"seed": args.seed}, suite, checks)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pluricalc",
        description="Exact calculator for surface singularities: resolutions, "
        "discrepancies, Zariski decompositions, nef coefficients, toric fans.",
    )
    parser.add_argument("--out", help="write the JSON report to this file instead of stdout")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_hj = sub.add_parser("hj", help="resolve the cyclic quotient 1/n(1,q)")
    p_hj.add_argument("--n", type=int, required=True)
    p_hj.add_argument("--q", type=int, required=True)
    p_hj.set_defaults(fn=cmd_hj)

    p_mld = sub.add_parser("mld", help="discrepancies and mld of a dual graph file")
    p_mld.add_argument("--graph", required=True)
    p_mld.set_defaults(fn=cmd_mld)

    p_cls = sub.add_parser("classify", help="enumerate chains above an mld cut")
    p_cls.add_argument("--epsilon", required=True, help="rational cut, e.g. 11/30")
    p_cls.add_argument("--max-weight", type=int, required=True)
    p_cls.add_argument("--max-len", type=int, required=True)
    p_cls.set_defaults(fn=cmd_classify)

    p_zar = sub.add_parser("zariski", help="Zariski decomposition over a configuration")
    p_zar.add_argument("--config", required=True)
    p_zar.add_argument("--divisor", required=True)
    p_zar.set_defaults(fn=cmd_zariski)

    p_floor = sub.add_parser("floorloop", help="floor-rounding loop toward a nef divisor")
    p_floor.add_argument("--config", required=True)
    p_floor.add_argument("--divisor", required=True)
    p_floor.add_argument("--target", required=True)
    p_floor.add_argument(
        "--birational",
        action="store_true",
        help="declare that the input linear system defines a birational map "
        "(uninterpreted flag, carried through to the output)",
    )
    p_floor.set_defaults(fn=cmd_floorloop)

    p_red = sub.add_parser("reduce", help="coefficient-reduction step (or loop) at level m")
    p_red.add_argument("--config", required=True)
    p_red.add_argument("--m", type=int, required=True)
    p_red.add_argument("--coeffs", required=True, help="comma-separated integers in vertex order")
    p_red.add_argument("--iterate", action="store_true", help="run to the fixpoint")
    p_red.add_argument(
        "--fixed-part-elsewhere",
        action="store_true",
        help="declare that the fixed-part hypothesis does NOT hold "
        "(recorded in the report; the arithmetic is unaffected)",
    )
    p_red.set_defaults(fn=cmd_reduce)

    p_nef = sub.add_parser("nefcoeffs", help="explicit nef coefficients on deep chains")
    p_nef.add_argument("--m0", type=int, required=True)
    p_nef.add_argument("--n2", type=int, required=True)
    p_nef.add_argument("--chains", help="comma-separated chain lengths k1,k2,...")
    p_nef.add_argument("--f-graph", help="JSON dual graph of the bounded-index part")
    p_nef.add_argument("--gamma0", help="rational lower bound for positive curve degrees")
    p_nef.add_argument("--t", type=int, help="number of deep chains met by the external curve")
    p_nef.add_argument("--k-list", help="depths of the chains met (defaults to --chains)")
    p_nef.add_argument("--m1", type=int, help="effective-birationality multiplier to compose")
    p_nef.add_argument("--bpf-factor", type=int, default=192, help="base-point-freeness factor")
    p_nef.add_argument(
        "--rational",
        action="store_true",
        help="assert the surface is rational, which forces the deep-chain count to zero",
    )
    p_nef.set_defaults(fn=cmd_nefcoeffs)

    p_fam = sub.add_parser("family", help="build and verify one family member X_{n,k}")
    p_fam.add_argument("--n", type=int, required=True)
    p_fam.add_argument("--k", type=int, required=True)
    p_fam.add_argument(
        "--check",
        choices=("all", "mld", "intersection", "degrees", "nonnef"),
        default="all",
    )
    p_fam.add_argument("--nonnef-m", type=int, help="multiple m for the exhaustive nefness search")
    p_fam.add_argument("--grid", help="sweep summary over nmin:nmax,kmin:kmax")
    p_fam.set_defaults(fn=cmd_family)

    p_tor = sub.add_parser("toric", help="local rank-3 fan computation at (m, n, b)")
    p_tor.add_argument("--m", type=int, required=True)
    p_tor.add_argument("--n", type=int, required=True)
    p_tor.add_argument("--b", type=int, required=True)
    p_tor.add_argument("--m0", type=int, required=True)
    p_tor.add_argument("--sweep", type=int, help="verify the closed form for all odd n up to this bound")
    p_tor.set_defaults(fn=cmd_toric)

    p_acc = sub.add_parser("accept", help="run the full acceptance suite")
    p_acc.add_argument("--seed", type=int, default=0, help="seed for the randomized criteria")
    p_acc.add_argument("--threads", type=int, default=None, help="overrides PLURICALC_THREADS")
    p_acc.add_argument("--timings", action="store_true", help="attach wall times (non-deterministic)")
    p_acc.set_defaults(fn=cmd_accept)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.fn(args)
    except PluricalcError as exc:
        report = {
            "schema_version": SCHEMA_VERSION,
            "command": args.subcommand,
            "inputs": {},
            "outputs": {},
            "error": str(exc),
        }
        _emit(report, args.out)
        return 1
    _emit(report, args.out)
    checks = report.get("checks", [])
    return 0 if all(c["passed"] for c in checks) else 1


def _emit(report: dict, out_path: str | None):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())
