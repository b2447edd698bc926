import argparse


def _strip_key(key):
    """Accept both VALUE and key=VALUE spellings of a positional argument."""
    prefix = f"{key}="

    def convert(value):
        return value[len(prefix):] if value.startswith(prefix) else value

    return convert


def build_parser():
    """
    Builds the command-line parser with one subcommand per operation.

    Returns:
        ArgumentParser: The parser; args.command names the subcommand
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    parser = argparse.ArgumentParser(
        prog="cathoristic",
        description="Model checking, entailment, proofs and a knowledge base for cathoristic logic.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    model = _strip_key("model")
    formula = _strip_key("formula")

    p = sub.add_parser("check", parents=[common], help="does a model satisfy a formula")
    p.add_argument("model", type=model, help="model file or fixture name")
    p.add_argument("formula", type=formula, help="formula text or @file")
    p.add_argument("--dialect", choices=["core", "neg", "quantified"], default="core")
    p.add_argument("--env", default="", help="X=a,Y=b bindings for quantified formulae")

    p = sub.add_parser("entail", parents=[common], help="decide f |= g")
    p.add_argument("premise")
    p.add_argument("conclusion")
    p.add_argument("--witness", action="store_true", help="print an incompatibility witness when f does not entail g")

    p = sub.add_parser("entail-neg", parents=[common], help="decide f |= g with ~ and \\/")
    p.add_argument("premise")
    p.add_argument("conclusion")
    p.add_argument("--bound", type=int, default=None, help="extension height bound")
    p.add_argument("--jobs", type=int, default=None, help="parallel workers")

    p = sub.add_parser("simpl", parents=[common], help="least upper bound of the models of a formula")
    p.add_argument("formula")
    p.add_argument("--dot", action="store_true")

    p = sub.add_parser("char", parents=[common], help="characteristic formula of a model")
    p.add_argument("model", type=model)

    for name, text in (("glb", "greatest lower bound"), ("lub", "least upper bound")):
        p = sub.add_parser(name, parents=[common], help=f"{text} of two models")
        p.add_argument("left", type=model)
        p.add_argument("right", type=model)
        p.add_argument("--dot", action="store_true")

    p = sub.add_parser("sat", parents=[common], help="is a formula satisfiable")
    p.add_argument("formula")

    p = sub.add_parser("bisim", parents=[common], help="bisimilarity of two pure models")
    p.add_argument("left", type=model)
    p.add_argument("right", type=model)

    p = sub.add_parser("dist", parents=[common], help="formula true at a state and incompatible with one false there")
    p.add_argument("model", type=model)
    p.add_argument("formula", type=formula)
    p.add_argument("--state", default=None)

    p = sub.add_parser("prove", parents=[common], help="derive f |- g in the sequent calculus")
    p.add_argument("premise")
    p.add_argument("conclusion")
    p.add_argument("--out", default=None, help="write the derivation to a file")

    p = sub.add_parser("check-proof", parents=[common], help="check a derivation file")
    p.add_argument("file")

    p = sub.add_parser("fol", parents=[common], help="first-order translations")
    p.add_argument("formula", nargs="?")
    sorts = p.add_mutually_exclusive_group()
    sorts.add_argument("--one-sorted", dest="sorts", action="store_const", const="fol1")
    sorts.add_argument("--two-sorted", dest="sorts", action="store_const", const="fol2")
    p.add_argument("--side", choices=["x", "y"], default="x")
    p.add_argument("--guards", action="store_true", help="print the admissibility and determinism sentences")
    p.add_argument("--check-correspondence", nargs=2, metavar=("MODEL", "FORMULA"))
    p.set_defaults(sorts="fol1")

    p = sub.add_parser("hml", parents=[common], help="Hennessy-Milner translation over CL_ALPHABET")
    p.add_argument("formula")
    p.add_argument("--constrain", action="store_true", help="conjoin the determinism constraint")

    p = sub.add_parser("kb", parents=[common], help="knowledge-base REPL on stdin")
    p.add_argument("--load", default=None, help="model file to start from")
    p.add_argument("--log", default=None, help="command log to replay and append to (default CL_KB_LOG)")

    p = sub.add_parser("bench", parents=[common], help="benchmarks")
    bench = p.add_subparsers(dest="bench", required=True)
    b = bench.add_parser("entail", parents=[common], help="entailment on chain formulae")
    b.add_argument("--chain", type=int, nargs="+", default=[1000, 2000, 4000])
    b.add_argument("--repeat", type=int, default=3)
    b.add_argument("--plot", default=None, help="write a plotly HTML chart")
    b = bench.add_parser("kb", parents=[common], help="query optimiser on the Welsh dataset")
    b.add_argument("--people", type=int, default=1000)
    b.add_argument("--seed", type=int, default=42)

    return parser
