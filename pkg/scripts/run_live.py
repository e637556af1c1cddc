"""Launch a live remote-model discovery run on a bundled benchmark.

Live completions are nondeterministic and cost real money, so nothing in
the test suite asserts their scores; this script is the documented manual
path for reproducing them when an API key and a budget are available.

Requires the API key in the environment (default variable: LLM_API_KEY).

Examples:

    python scripts/run_live.py --graph asia
    python scripts/run_live.py --graph child --samples 10000 --temperature 0.5
    python scripts/run_live.py --graph asia --method pairwise --yes
    python scripts/run_live.py --graph neuropathic --out runs/neuro

The pairwise method on the 221-variable neuropathic graph would cost
24310 queries; the cost guard refuses it unless you pass --yes twice
over (once here, and knowingly).
"""

from __future__ import annotations

import argparse
import os
import sys

from causalbfs.cli import main as cli_main
from causalbfs.discovery import query_budget


def main() -> int:
    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--graph", choices=["asia", "child", "neuropathic"],
                        default="asia")
    parser.add_argument("--method", choices=["bfs", "pairwise"], default="bfs")
    parser.add_argument("--samples", choices=["none", "100", "1000", "10000"],
                        default="none",
                        help="inject correlations from this many bundled samples")
    parser.add_argument("--model", default="gpt-4-0125-preview")
    parser.add_argument("--temperature", type=float, default=0.0,
                        help="published sweeps used 0, 0.5, 0.7, and 1.0")
    parser.add_argument("--base-url", default=None)
    parser.add_argument("--api-key-env", default="LLM_API_KEY")
    parser.add_argument("--out", default="runs")
    parser.add_argument("--cache-dir", default=None,
                        help="reuse replies across interrupted runs")
    parser.add_argument("--yes", action="store_true",
                        help="confirm runs above the cost threshold")
    args = parser.parse_args()

    if not os.environ.get(args.api_key_env):
        print(f"set {args.api_key_env} before launching a live run", file=sys.stderr)
        return 2
    if args.samples != "none" and args.graph == "neuropathic":
        print("no bundled samples exist for the neuropathic graph", file=sys.stderr)
        return 2

    n = {"asia": 8, "child": 20, "neuropathic": 221}[args.graph]
    budget = query_budget(args.method, n)
    print(f"{args.graph} / {args.method}: up to {budget} remote queries")

    argv = [
        "discover",
        "--method", args.method,
        "--backend", "api",
        "--vars", f"{args.graph}.json",
        "--truth", f"{args.graph}.edges",
        "--eval",
        "--model", args.model,
        "--temperature", str(args.temperature),
        "--api-key-env", args.api_key_env,
        "--out", args.out,
    ]
    if args.samples != "none":
        argv += ["--samples", f"{args.graph}_{args.samples}.csv"]
    if args.base_url:
        argv += ["--base-url", args.base_url]
    if args.cache_dir:
        argv += ["--cache-dir", args.cache_dir]
    if args.yes:
        argv += ["--yes"]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
