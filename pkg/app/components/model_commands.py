import logging
from pathlib import Path

from app.components.output import EXIT_TRUE, emit, formula_payload, model_payload, model_text, verdict
from app.logic.semantics import satisfies, satisfies_quantified, eval_extended
from app.logic.syntax import parse_formula, print_formula
from app.models.lattice import char, glb, lub
from app.models.order import bisimilar, distinguishing_formula, separating_formula
from app.utils import config
from app.utils.errors import CathoristicError, InseparableError
from app.utils.load_data import load_fixture, load_model, read_text_arg

logger = logging.getLogger(__name__)


def load_model_arg(value, pure=False):
    """
    Load a model named on the command line.

    Args:
        value (str): Path to a model file, or a fixture name such as M_FIG1 or M_FIG1.json
        pure (bool): Load as a pure model

    Returns:
        CathoristicModel or PureModel: The model
    """
    path = Path(value)
    if path.exists():
        return load_model(path, pure=pure)
    logger.info(f"{value} is not a file; trying the fixture directory")
    return load_fixture(path.name, pure=pure)


def parse_env(text):
    env = {}
    for item in filter(None, (p.strip() for p in text.split(","))):
        name, _, value = item.partition("=")
        if not value:
            raise CathoristicError(f"bindings look like X=a, got {item!r}")
        env[name.strip()] = value.strip()
    return env


def run_check(args, out=None):
    m = load_model_arg(args.model)
    f = parse_formula(read_text_arg(args.formula), dialect=args.dialect)
    if args.dialect == "core":
        result = satisfies(m, f)
    elif args.dialect == "neg":
        result = eval_extended(m, f)
    else:
        result = satisfies_quantified(m, f, parse_env(args.env), config.alphabet_from_env())
    emit(args, {"command": "check", "result": result}, "true" if result else "false", out)
    return verdict(result)


def run_char(args, out=None):
    f = char(load_model_arg(args.model), config.alphabet_from_env())
    emit(args, formula_payload(f), print_formula(f), out)
    return EXIT_TRUE


def _run_bound(args, operation, out):
    result = operation(load_model_arg(args.left), load_model_arg(args.right))
    emit(args, model_payload(result), model_text(result, args.dot), out)
    return EXIT_TRUE


def run_glb(args, out=None):
    return _run_bound(args, glb, out)


def run_lub(args, out=None):
    return _run_bound(args, lub, out)


def run_bisim(args, out=None):
    p1 = load_model_arg(args.left, pure=True)
    p2 = load_model_arg(args.right, pure=True)
    if bisimilar(p1, p2):
        emit(args, {"command": "bisim", "result": True}, "bisimilar", out)
        return EXIT_TRUE
    try:
        f, side = separating_formula(p1, p2)
    except InseparableError:
        text = "not bisimilar; no core formula separates the models"
        emit(args, {"command": "bisim", "result": False, "formula": None, "side": None}, text, out)
        return verdict(False)
    text = f"not bisimilar; {print_formula(f)} holds only in the {'first' if side == 1 else 'second'} model"
    emit(args, {"command": "bisim", "result": False, "formula": print_formula(f), "side": side}, text, out)
    return verdict(False)


def run_dist(args, out=None):
    p = load_model_arg(args.model, pure=True)
    blocked = parse_formula(read_text_arg(args.formula))
    f = distinguishing_formula(p, blocked, args.state)
    emit(args, formula_payload(f), print_formula(f), out)
    return EXIT_TRUE
