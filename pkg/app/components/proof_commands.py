import logging
from pathlib import Path

from app.components.output import EXIT_TRUE, emit, model_payload, model_text, verdict
from app.logic.proof import NotEntailed, check_derivation, derive, from_sexp, to_sexp
from app.logic.syntax import parse_formula
from app.utils.load_data import read_text_arg

logger = logging.getLogger(__name__)


def run_prove(args, out=None):
    f = parse_formula(read_text_arg(args.premise))
    g = parse_formula(read_text_arg(args.conclusion))
    result = derive(f, g)
    if isinstance(result, NotEntailed):
        text = "not entailed; countermodel:\n" + model_text(result.countermodel)
        payload = {"command": "prove", "result": False, "countermodel": model_payload(result.countermodel)}
        emit(args, payload, text, out)
        return verdict(False)
    sexp = to_sexp(result)
    if args.out:
        try:
            Path(args.out).write_text(sexp + "\n", encoding="utf-8")
        except Exception as e:
            logger.error(f"Error writing derivation to {args.out}: {e}")
            raise
    payload = {"command": "prove", "result": True, "derivation": sexp, "size": result.size, "depth": result.depth}
    emit(args, payload, sexp, out)
    return EXIT_TRUE


def run_check_proof(args, out=None):
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except Exception as e:
        logger.error(f"Error reading derivation {args.file}: {e}")
        raise
    d = from_sexp(text)
    report = check_derivation(d)
    payload = {"command": "check-proof", "result": report.ok}
    if not report.ok:
        payload.update({"rule": report.rule, "expected": report.expected, "actual": report.actual, "path": list(report.path)})
    emit(args, payload, str(report), out)
    return verdict(report.ok)
