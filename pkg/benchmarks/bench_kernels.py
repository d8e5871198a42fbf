#!/usr/bin/env python3
"""Compare the compiled and pure-Python kernels on solver-heavy work.

Runs the same workloads against both backends (forcing the pure one via
a fresh interpreter would be overkill: the kernel module is swapped by
reloading fdconfig with FDCONFIG_PURE set in a subprocess).

Usage: python3 benchmarks/bench_kernels.py [--features N] [--attrs N]
"""

from __future__ import annotations

import argparse
import json
import os
import random
import subprocess
import sys
import time


def desk_model_text(n_features: int, n_attrs: int, seed: int = 7) -> str:
    """A feasible tree with groups, attributes and cross constraints,
    sized like the interactive desk-scale target."""
    rng = random.Random(seed)
    names = [f"F{i}" for i in range(n_features)]
    kids: dict[str, list[str]] = {n: [] for n in names}
    for i in range(1, n_features):
        kids[names[rng.randrange(i)]].append(names[i])
    lines = []
    for name in names:
        if not kids[name] and name != names[0]:
            continue
        body = []
        chunk = list(kids[name])
        while chunk:
            if len(chunk) >= 2 and rng.random() < 0.35:
                take = rng.randint(2, min(3, len(chunk)))
                group, chunk = chunk[:take], chunk[take:]
                body.append(f"  {rng.choice(('or', 'xor'))} "
                            f"{{ {', '.join(group)} }}")
            else:
                body.append(f"  {rng.choice(('mandatory', 'optional'))} {chunk.pop(0)}")
        lines.append(f"feature {name} {{")
        lines.extend(body)
        lines.append("}")
    attr_names = []
    for i in range(n_attrs):
        owner = rng.choice(names)
        lo = rng.randint(0, 3)
        hi = lo + rng.randint(4, 19)
        lines.append(f"attribute {owner}.p{i} : int[{lo}..{hi}]")
        attr_names.append((f"p{i}", owner, lo, hi))
    # a few arithmetic cross constraints over attribute pairs
    for i in range(0, max(0, n_attrs - 1), 2):
        a, owner_a, _, hi_a = attr_names[i]
        b, owner_b, _, hi_b = attr_names[i + 1]
        lines.append(f"constraint {owner_a}.{a} + {owner_b}.{b}"
                     f" <= {hi_a + hi_b - 1}")
    return "\n".join(lines) + "\n"


def run_workload(features: int, attrs: int) -> dict:
    from fdconfig import kernels, parse_model, compile_model
    from fdconfig.consequences import model_consequences
    from fdconfig.session import Restriction, create_session

    text = desk_model_text(features, attrs)
    model = parse_model(text)

    t0 = time.perf_counter()
    cm = compile_model(model)
    cm.solver.propagate()
    t_compile = time.perf_counter() - t0

    t0 = time.perf_counter()
    conseq = model_consequences(cm)
    t_conseq = time.perf_counter() - t0

    session = create_session(model, inline_recompute=True)
    open_vars = [n for n, d in session.get_state().variables.items()
                 if d.values.size > 1]
    t0 = time.perf_counter()
    session.post_decision(open_vars[0], Restriction.assign(1))
    t_decision = time.perf_counter() - t0
    session.close()

    return {
        "backend": kernels.BACKEND,
        "compile_s": round(t_compile, 4),
        "model_consequences_s": round(t_conseq, 4),
        "decision_recompute_s": round(t_decision, 4),
        "probes": conseq.stats.get("probes"),
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--features", type=int, default=50)
    parser.add_argument("--attrs", type=int, default=10)
    parser.add_argument("--emit-json", action="store_true",
                        help="print one JSON object (used by the subprocess)")
    args = parser.parse_args()

    if args.emit_json:
        print(json.dumps(run_workload(args.features, args.attrs)))
        return 0

    results = [run_workload(args.features, args.attrs)]

    env = dict(os.environ, FDCONFIG_PURE="1")
    out = subprocess.run(
        [sys.executable, __file__, "--features", str(args.features),
         "--attrs", str(args.attrs), "--emit-json"],
        env=env, capture_output=True, text=True, check=True)
    results.append(json.loads(out.stdout))

    print(f"workload: {args.features} features, {args.attrs} attributes")
    header = f"{'backend':<10}{'compile':>10}{'consequences':>15}{'decision':>11}"
    print(header)
    for r in results:
        print(f"{r['backend']:<10}{r['compile_s']:>10.4f}"
              f"{r['model_consequences_s']:>15.4f}{r['decision_recompute_s']:>11.4f}")
    if len({r["backend"] for r in results}) == 1:
        print("note: compiled kernel not built; both runs used the pure backend")
    return 0


if __name__ == "__main__":
    sys.exit(main())
