import logging
import sys
from pathlib import Path

# Add the project root to the Python path
sys.path.append(str(Path(__file__).parent.parent))

# Import components
from app.components.arguments import build_parser
from app.components.bench import run_bench_entail, run_bench_kb
from app.components.fol_commands import run_fol, run_hml
from app.components.kb_repl import run_kb
from app.components.logic_commands import run_entail, run_entail_neg, run_sat, run_simpl
from app.components.model_commands import run_bisim, run_char, run_check, run_dist, run_glb, run_lub
from app.components.output import EXIT_ERROR, emit_error
from app.components.proof_commands import run_check_proof, run_prove

# Import utils
from app.utils import config

COMMANDS = {
    "check": run_check,
    "entail": run_entail,
    "entail-neg": run_entail_neg,
    "simpl": run_simpl,
    "char": run_char,
    "glb": run_glb,
    "lub": run_lub,
    "sat": run_sat,
    "bisim": run_bisim,
    "dist": run_dist,
    "prove": run_prove,
    "check-proof": run_check_proof,
    "fol": run_fol,
    "hml": run_hml,
    "kb": run_kb,
}

BENCHMARKS = {
    "entail": run_bench_entail,
    "kb": run_bench_kb,
}


def setup_logging(command):
    default = "INFO" if command in ("kb", "bench") else "WARNING"
    logging.basicConfig(
        level=config.log_level(default),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(config.log_file()),
            logging.StreamHandler()
        ]
    )


def main(argv=None, out=None):
    """
    Parse arguments and run one subcommand.

    Returns:
        int: 0 for true or success, 1 for false or not entailed, 2 for errors
    """
    args = build_parser().parse_args(argv)
    setup_logging(args.command)
    logger = logging.getLogger(__name__)

    handler = BENCHMARKS[args.bench] if args.command == "bench" else COMMANDS[args.command]
    try:
        return handler(args, out)
    except (ValueError, OSError) as e:
        logger.debug(f"Command {args.command} failed: {e}")
        emit_error(args, e)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
