import logging

from app.components.output import EXIT_TRUE, emit, model_payload, model_text, verdict
from app.logic.decide import entails, entails_neg, incompatibility_witness
from app.logic.syntax import parse_formula, print_formula
from app.models.lattice import simpl
from app.models.model import BOT
from app.utils.load_data import read_text_arg

logger = logging.getLogger(__name__)


def _formula(value, dialect="core"):
    return parse_formula(read_text_arg(value), dialect=dialect)


def run_entail(args, out=None):
    f, g = _formula(args.premise), _formula(args.conclusion)
    result = entails(f, g)
    payload = {"command": "entail", "result": result}
    text = "true" if result else "false"
    if not result and args.witness:
        x = incompatibility_witness(f, g)
        payload["witness"] = print_formula(x)
        text += f"\nwitness: {print_formula(x)}"
    emit(args, payload, text, out)
    return verdict(result)


def run_entail_neg(args, out=None):
    f, g = _formula(args.premise, "neg"), _formula(args.conclusion, "neg")
    result = entails_neg(f, g, bound=args.bound, n_jobs=args.jobs)
    emit(args, {"command": "entail-neg", "result": result}, "true" if result else "false", out)
    return verdict(result)


def run_simpl(args, out=None):
    m = simpl(_formula(args.formula))
    emit(args, model_payload(m), model_text(m, args.dot), out)
    return EXIT_TRUE


def run_sat(args, out=None):
    satisfiable = simpl(_formula(args.formula)) is not BOT
    emit(args, {"command": "sat", "result": satisfiable}, "satisfiable" if satisfiable else "unsatisfiable", out)
    return verdict(satisfiable)
