"""Walk through the fill example: bounds, memory gas, the storage optimization and its payoff.

    python scripts/fill_case_study.py [--outdir DIR]

With --outdir the rewritten source and the savings report are written there.
"""

import argparse
import json
from pathlib import Path

from gasbound import corpus
from gasbound.bounds.costmodel import CostModelConfig
from gasbound.evm.schedule import load_schedule
from gasbound.interp import execute, measure, memory_charges
from gasbound.optimizer import optimize_function
from gasbound.pipeline import load_fixture

FILL = "fill(uint256[])"


def show(title, report):
    print(f"-- {title}")
    print(report.render_text())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", type=Path)
    args = ap.parse_args(argv)

    worst = load_schedule()
    best = worst.best_case()
    fx = corpus.get("fill")
    p = load_fixture(fx)
    u = p.unit(FILL)

    show("all, gas", p.analyze(u, CostModelConfig("gas", "all")))
    show("gas families", p.analyze(u, CostModelConfig("gas", "gas-family")))
    show("storage, gas", p.analyze(u, CostModelConfig("gas", "storage")))
    show("storage accesses", p.analyze(u, CostModelConfig("instructions", "storage-optimization")))

    bound = p.analyze(u, CostModelConfig())
    print("-- bound vs interpreter")
    print(f"{'data':>4} {'measured':>9} {'bound':>9} {'memory':>7} {'mem bound':>9}")
    for case in fx.inputs(range(9)):
        if case.function != FILL:
            continue
        r = execute(fx.code, case.calldata, case.storage, worst)
        got = measure(r)["all"]
        lim = bound.entries["all"].evaluate({"data": case.data})
        mem = memory_charges(r)
        mlim = bound.memory_gas.evaluate({"data": case.data})
        print(f"{case.data:>4} {got:>9} {lim:>9} {mem:>7} {mlim:>9}  {case.label}")

    outcome = optimize_function(p, u, fx.source, schedule=worst)
    print("-- optimization")
    for row in outcome.to_json()["candidates"]:
        print(f"{row['field']}: {row['total']} accesses, safe={row['safe']}, "
              f"estimated saving {row['savings_worst']:.2%} worst / {row['savings_best']:.2%} best")
    print(outcome.new_source)

    q = load_fixture(corpus.get("fill_opt"))
    v = q.unit(FILL)
    print("-- compiled pair, per-iteration gas")
    for label, sched in (("worst", worst), ("best", best)):
        a = p.analyze(u, CostModelConfig(), sched).entries["all"]
        b = q.analyze(v, CostModelConfig(), sched).entries["all"]
        ca, cb = a.coeff(("data",)), b.coeff(("data",))
        print(f"{label:5}: {a.render():>18} -> {b.render():<18} loop {ca} -> {cb} "
              f"({float(1 - cb / ca):.2%} smaller)")

    if args.outdir:
        args.outdir.mkdir(parents=True, exist_ok=True)
        (args.outdir / "fill_opt.sol").write_text(outcome.new_source)
        (args.outdir / "fill_opt.json").write_text(json.dumps(outcome.to_json(), indent=2) + "\n")


if __name__ == "__main__":
    main()
