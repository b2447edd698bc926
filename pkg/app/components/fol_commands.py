import logging

from app.components.model_commands import load_model_arg
from app.components.output import EXIT_TRUE, emit, verdict
from app.logic.fol import eval_fol, guards, translate_fol1, translate_fol2, translate_hml, translate_model
from app.logic.semantics import satisfies
from app.logic.syntax import parse_formula, print_formula
from app.utils import config
from app.utils.errors import CathoristicError
from app.utils.load_data import read_text_arg

logger = logging.getLogger(__name__)


def run_fol(args, out=None):
    if args.guards:
        admissible, deterministic = guards()
        payload = {"admissible": str(admissible), "deterministic": str(deterministic)}
        emit(args, payload, f"{admissible}\n{deterministic}", out)
        return EXIT_TRUE
    if args.check_correspondence:
        return _check_correspondence(args, out)
    if args.formula is None:
        raise CathoristicError("fol needs a formula, --guards or --check-correspondence")
    f = parse_formula(read_text_arg(args.formula))
    translated = translate_fol1(f, args.side) if args.sorts == "fol1" else translate_fol2(f, args.side)
    emit(args, {"command": "fol", "translation": str(translated)}, str(translated), out)
    return EXIT_TRUE


def _check_correspondence(args, out):
    model_arg, formula_arg = args.check_correspondence
    m = load_model_arg(model_arg)
    f = parse_formula(read_text_arg(formula_arg))
    expected = satisfies(m, f)
    if args.sorts == "fol1":
        structure, translated = translate_model(m, "fol1"), translate_fol1(f)
    else:
        structure, translated = translate_model(m, "fol2", config.alphabet_from_env()), translate_fol2(f)
    actual = eval_fol(structure, translated, {"x": m.start})
    agree = expected == actual
    logger.info(f"Correspondence on {model_arg}: modal {expected}, first-order {actual}")
    payload = {"command": "fol", "modal": expected, "first_order": actual, "result": agree}
    emit(args, payload, f"modal {str(expected).lower()}, first-order {str(actual).lower()}", out)
    return verdict(agree)


def run_hml(args, out=None):
    f = parse_formula(read_text_arg(args.formula))
    translated = translate_hml(f, config.alphabet_from_env(), constrain=args.constrain)
    emit(args, {"command": "hml", "formula": print_formula(translated)}, print_formula(translated), out)
    return EXIT_TRUE
