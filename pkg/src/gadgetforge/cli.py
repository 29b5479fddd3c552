"""Command-line front end: classify / sweep / xychain / compile / verify-all.

Exit codes: 0 success, 2 usage or precondition error, 3 numerical
failure, 4 I/O failure. All floating-point output uses 12 significant
digits; identical configurations (including the seed) produce
byte-identical files. GADGETFORGE_THREADS caps worker threads for
delta sweeps.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

from . import acceptance, gadgets, lattice, sw, xychain
from .gadgets import GADGET_NAMES, XYZCoupling
from .pauli import single
from .spectra import NonConvergenceError


@dataclass
class RunConfig:
    seed: int = 7
    output: str | None = None
    fmt: str = "json"


class UsageError(ValueError):
    pass


def _coupling(values) -> XYZCoupling:
    a, b, g = (float(v) for v in values)
    return XYZCoupling(a, b, g)


def _build_gadget(name, c: XYZCoupling, delta):
    if name == "basic":
        return gadgets.basic_gadget(c, [(0, 1.0)], [(1, 1.0)], delta)
    if name == "antisym":
        return gadgets.antisym_gadget([(0, 1.0)], [(1, 1.0)], delta)
    if name == "tim":
        return gadgets.tim_gadget({(0, 1): 1.0}, {0: 0.5, 1: 0.5}, delta)
    if name == "xxyy-gamma":
        gamma = c.gamma if c.gamma > 1 else 2.0
        return gadgets.xxyy_gamma_gadget(gamma, {(0, 1): 1.0}, {(0, 1): 1.0}, delta)
    if name == "subdivide+":
        return gadgets.mediator_gadget("subdivide_pos", c, [0, 1], delta)
    if name == "subdivide-":
        return gadgets.mediator_gadget("subdivide_neg", c, [0, 1], delta)
    if name == "fork":
        return gadgets.mediator_gadget("fork", c, [0, 1, 2], delta)
    if name == "crossing":
        return gadgets.mediator_gadget("crossing", c, [0, 1, 2, 3], delta)
    if name == "triangular":
        return gadgets.third_order_chain_gadget(c, delta)
    if name == "cancel1local":
        full = gadgets.coupling_operator(c, 2, 0, 1) + single(2, 0, "Z") + single(
            2, 1, "Z"
        )
        return gadgets.one_local_cancel_gadget(full, delta)
    raise UsageError(f"unknown gadget {name!r}; known: {', '.join(GADGET_NAMES)}")


def cmd_classify(args):
    c = _coupling(args.coupling)
    label = gadgets.classify(c)
    wit = gadgets.stoquastic_witness(c)
    print(label)
    if wit is not None:
        print("stoquastic under relabeling " + ", ".join(f"{k}->{v}" for k, v in sorted(wit.items())))
    return 0


def cmd_sweep(args):
    c = _coupling(args.coupling)
    deltas = [float(d) for d in args.deltas]
    g = _build_gadget(args.gadget, c, max(deltas))
    report = sw.measure_simulation(g, deltas)
    text = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if report.eps_exponent is None and len(deltas) < 4:
        print(
            "note: fewer than 4 delta values; raw errors only, no exponent fit",
            file=sys.stderr,
        )
    return 0


def cmd_xychain(args):
    n_values = []
    for N in args.N:
        spec = xychain.ChainSpec(int(N))  # raises on N % 4 != 2
        n_values.append(spec.N)
    N_list = list(n_values) + ([None] if args.inf else [])
    n_max = args.n_max
    table = xychain.correlation_table(range(1, n_max + 1), N_list)
    csv_text = table.to_csv()
    reports = []
    for N in n_values:
        cap = int(min(n_max, math.floor(N ** (4.0 / 7.0))))
        reports.append(xychain.hset_report(xychain.ChainSpec(N), max(1, cap)))
    if args.out:
        with open(args.out + ".csv", "w") as fh:
            fh.write(csv_text)
        with open(args.out + "_hset.json", "w") as fh:
            fh.write(
                json.dumps(
                    [json.loads(xychain.hset_report_json(r)) for r in reports],
                    indent=2,
                    sort_keys=True,
                )
                + "\n"
            )
        print(f"wrote {args.out}.csv and {args.out}_hset.json")
    else:
        print(csv_text)
        for r in reports:
            print(xychain.hset_report_json(r))
    return 0


def cmd_compile(args):
    with open(args.graph) as fh:
        text = fh.read()
    g = lattice.InteractionGraph.from_json(text)
    c = _coupling(args.coupling)
    g2, sched_deg = lattice.reduce_degree(g)
    g3, sched_cross = lattice.isolate_and_cross(g2)
    layout = (
        lattice.embed(g3, args.lattice, args.spacing)
        if args.spacing
        else lattice.auto_embed(g3, args.lattice)
    )
    rounds = max(
        2, sum(len(r) > 0 for r in sched_deg) + sum(len(r) > 0 for r in sched_cross) + 2
    )
    schedule = lattice.default_delta_schedule(args.delta0, rounds, args.exponent)
    model = lattice.realize(layout, c, schedule)
    out = args.out or "compiled"
    with open(out + "_layout.json", "w") as fh:
        fh.write(layout.to_json() + "\n")
    with open(out + "_hamiltonian.txt", "w") as fh:
        fh.write(model.hamiltonian.to_text())
    print(
        f"compiled {len(g.vertices)} vertices / {len(g.edges)} edges onto "
        f"{args.lattice} lattice: {model.n_qubits} qubits, "
        f"{model.rounds_used} staging rounds, "
        f"positive-weights={model.all_weights_nonnegative}"
    )
    print(f"wrote {out}_layout.json and {out}_hamiltonian.txt")
    return 0


def cmd_verify_all(args):
    rows = []

    def progress(res):
        status = "pass" if res.passed else "FAIL"
        print(f"[{status}] {res.name}  ({res.seconds:.1f}s)  {res.details}")
        rows.append(res)

    acceptance.run_all(progress=progress)
    failed = [r for r in rows if not r.passed]
    print(f"\n{len(rows) - len(failed)}/{len(rows)} criteria passed")
    if failed:
        raise NonConvergenceError("acceptance criteria failed")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="gadgetforge",
        description="Perturbative-gadget constructions and XY-chain checks",
    )
    ap.add_argument("--seed", type=int, default=7)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="Theorem-2 region of alpha XX + beta YY + gamma ZZ")
    p.add_argument("coupling", nargs=3, metavar=("ALPHA", "BETA", "GAMMA"))
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("sweep", help="delta sweep of a gadget; writes a JSON report")
    p.add_argument("gadget", help=f"one of: {', '.join(GADGET_NAMES)}")
    p.add_argument("--coupling", nargs=3, default=["1", "1", "1"])
    p.add_argument(
        "--deltas", nargs="+", default=["1e2", "1e3", "1e4", "1e5"], metavar="D"
    )
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("xychain", help="correlation tables and chain reports")
    p.add_argument("--N", nargs="+", default=["6"], metavar="N")
    p.add_argument("--n-max", type=int, default=5)
    p.add_argument("--inf", action="store_true", help="include the infinite chain")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_xychain)

    p = sub.add_parser("compile", help="compile a graph onto a lattice")
    p.add_argument("graph", help="interaction-graph JSON file")
    p.add_argument("--lattice", choices=["square", "triangular"], default="triangular")
    p.add_argument("--coupling", nargs=3, default=["1", "1", "0"])
    p.add_argument("--delta0", type=float, default=1e5)
    p.add_argument("--exponent", type=float, default=2 / 3)
    p.add_argument("--spacing", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("verify-all", help="run the acceptance suite")
    p.set_defaults(fn=cmd_verify_all)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON at line {exc.lineno}: {exc.msg}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (NonConvergenceError, lattice.RoutingError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
