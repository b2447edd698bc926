import json
import sys

from app.logic.syntax import print_formula
from app.models.model import BOT, label_text
from app.utils.load_data import dumps_model, model_to_dict
from app.utils.visualize import dot_text

# Exit statuses
EXIT_TRUE = 0
EXIT_FALSE = 1
EXIT_ERROR = 2


def emit(args, payload, text, out=None):
    """
    Print a command result as text, or as one JSON object under --json.

    Args:
        args (Namespace): Parsed arguments (reads args.json)
        payload (dict): Machine-readable result
        text (str): Human-readable result
        out (file): Output stream (default stdout)
    """
    out = out or sys.stdout
    if getattr(args, "json", False):
        out.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        out.write(text.rstrip("\n") + "\n")


def emit_error(args, error, err=None):
    err = err or sys.stderr
    if getattr(args, "json", False):
        data = error.to_dict() if hasattr(error, "to_dict") else {"error": type(error).__name__, "message": str(error)}
        err.write(json.dumps(data, sort_keys=True) + "\n")
    else:
        err.write(f"error: {error}\n")


def verdict(value):
    return EXIT_TRUE if value else EXIT_FALSE


def model_payload(m):
    """JSON form of a model result; the bottom element becomes {"bottom": true}."""
    if m is BOT:
        return {"bottom": True}
    return {"bottom": False, "model": model_to_dict(m)}


def model_text(m, dot=False):
    if m is BOT:
        return "bottom"
    return dot_text(m) if dot else dumps_model(m)


def formula_payload(f):
    return {"formula": print_formula(f)}


def labels_text(m):
    return ", ".join(f"{s}:{label_text(m.labels[s])}" for s in sorted(m.states))
