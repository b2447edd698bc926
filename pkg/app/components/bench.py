import logging
import time

import numpy as np
import pandas as pd
import plotly.express as px
from scipy import stats
from tqdm import tqdm

from app.components.output import EXIT_TRUE, emit
from app.data.generators import chain_pair, welsh_dataset
from app.data.knowledge_base import WELSH_QUERY, KnowledgeBase
from app.logic.decide import entails

logger = logging.getLogger(__name__)


def time_entailment(sizes, repeat=3):
    """
    Time entails on chain formulae of each size, best of repeat runs after a warm-up.

    Args:
        sizes (list): Chain lengths
        repeat (int): Runs per size

    Returns:
        DataFrame: Columns n, seconds, ratio (time over the previous size)
    """
    f, g = chain_pair(min(sizes))
    entails(f, g)
    rows = []
    for n in tqdm(sizes, desc="chain", disable=None):
        f, g = chain_pair(n)
        timings = []
        for _ in range(max(1, repeat)):
            start = time.perf_counter()
            result = entails(f, g)
            timings.append(time.perf_counter() - start)
        if not result:
            logger.warning(f"Chain of length {n} unexpectedly not entailed")
        rows.append({"n": n, "seconds": min(timings)})
        logger.info(f"Chain {n}: {rows[-1]['seconds']:.4f}s")
    frame = pd.DataFrame(rows)
    frame["ratio"] = frame["seconds"] / frame["seconds"].shift(1)
    return frame


def growth_exponent(frame):
    """Slope of log(seconds) against log(n)."""
    if len(frame) < 2:
        return float("nan")
    fit = stats.linregress(np.log(frame["n"]), np.log(frame["seconds"]))
    return fit.slope


def run_bench_entail(args, out=None):
    frame = time_entailment(sorted(args.chain), args.repeat)
    slope = growth_exponent(frame)
    if args.plot:
        fig = px.line(frame, x="n", y="seconds", markers=True, log_x=True, log_y=True,
                      title=f"entails on chain formulae (slope {slope:.2f})")
        fig.write_html(args.plot)
        logger.info(f"Wrote chart to {args.plot}")
    payload = {"rows": frame.to_dict(orient="records"), "slope": slope}
    emit(args, payload, f"{frame.to_string(index=False)}\nlog-log slope: {slope:.2f}", out)
    return EXIT_TRUE


def compare_plans(n, seed=42):
    """
    Run the Welsh query with and without reordering.

    Returns:
        dict: nodes per plan, number of bindings and whether the binding sets agree
    """
    facts, _ = welsh_dataset(n, seed)
    kb = KnowledgeBase()
    for f in tqdm(facts, desc="facts", disable=None):
        kb.assert_fact(f)
    plain = kb.query(WELSH_QUERY)
    optimized = kb.query(WELSH_QUERY, optimize=True)
    same = {frozenset(b.items()) for b in plain.bindings} == {frozenset(b.items()) for b in optimized.bindings}
    return {
        "people": n,
        "bindings": len(optimized.bindings),
        "unoptimized_nodes": plain.nodes,
        "optimized_nodes": optimized.nodes,
        "same_bindings": same,
    }


def run_bench_kb(args, out=None):
    row = compare_plans(args.people, args.seed)
    text = pd.DataFrame([row]).to_string(index=False)
    emit(args, row, text, out)
    return EXIT_TRUE
