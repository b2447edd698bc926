import json
import logging
from pathlib import Path

from app.models.model import SIGMA, PureModel, label_text, make_pure, validate_model
from app.utils.config import fixtures_path
from app.utils.errors import CathoristicError

logger = logging.getLogger(__name__)

# Constants
FIGURES_FILE = "figures.json"


def model_to_dict(m):
    """
    Serialise a model in the model file format with sorted, deterministic content.

    Args:
        m (CathoristicModel or PureModel): Model to serialise

    Returns:
        dict: {"states", "start", "transitions", "labels"}; pure models omit labels
    """
    data = {
        "states": sorted(m.states),
        "start": m.start,
        "transitions": [list(t) for t in sorted(m.transitions)],
    }
    if not isinstance(m, PureModel):
        data["labels"] = {
            s: "*" if m.labels[s] is SIGMA else sorted(m.labels[s])
            for s in sorted(m.states)
        }
    return data


def model_from_dict(data, pure=False):
    """
    Build a model from its dict form.

    Args:
        data (dict): Model file content
        pure (bool): Ignore labels and return a PureModel

    Returns:
        CathoristicModel or PureModel: The model; pure when asked or when labels are absent
    """
    try:
        transitions = [tuple(t) for t in data.get("transitions", [])]
        start = data["start"]
        states = data.get("states")
        if pure or "labels" not in data:
            return make_pure(transitions, start, states)
        if states is None:
            states = set(data["labels"]) | {start}
            for s, _, t in transitions:
                states.update((s, t))
        return validate_model(states, transitions, data["labels"], start)
    except KeyError as e:
        raise CathoristicError(f"model file is missing the {e} field") from e


def load_model(path, pure=False):
    """
    Load a model file.

    Args:
        path (str or Path): JSON model file
        pure (bool): Load as a PureModel

    Returns:
        CathoristicModel or PureModel: The loaded model
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        m = model_from_dict(data, pure=pure)
        logger.info(f"Loaded model with {len(m.states)} states from {path}")
        return m
    except Exception as e:
        logger.error(f"Error loading model from {path}: {e}")
        raise


def save_model(m, path):
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(model_to_dict(m), f, indent=2, sort_keys=True)
            f.write("\n")
        logger.info(f"Saved model with {len(m.states)} states to {path}")
    except Exception as e:
        logger.error(f"Error saving model to {path}: {e}")
        raise


def dumps_model(m):
    return json.dumps(model_to_dict(m), indent=2, sort_keys=True)


def load_fixture(name, pure=False):
    """
    Load a named fixture such as M_FIG1 from the fixture directory.

    Args:
        name (str): Fixture name, with or without the .json suffix

    Returns:
        CathoristicModel or PureModel: The fixture model
    """
    file_name = name if name.endswith(".json") else f"{name}.json"
    return load_model(fixtures_path() / file_name, pure=pure)


def list_fixtures():
    return sorted(p.stem for p in fixtures_path().glob("M_*.json"))


def load_figures():
    """
    Load the worked lattice and ordering figures.

    Returns:
        dict: "glb" and "lub" lists of {"name", "left", "right", "result"} with
        result None for the bottom element; "preceq_chain" list of models
    """
    try:
        with open(fixtures_path() / FIGURES_FILE, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except Exception as e:
        logger.error(f"Error loading figures: {e}")
        raise

    def entry(item):
        return {
            "name": item["name"],
            "left": model_from_dict(item["left"]),
            "right": model_from_dict(item["right"]),
            "result": None if item["result"] == "bottom" else model_from_dict(item["result"]),
        }

    return {
        "glb": [entry(item) for item in raw["glb"]],
        "lub": [entry(item) for item in raw["lub"]],
        "preceq_chain": [model_from_dict(item) for item in raw["preceq_chain"]],
    }


def read_text_arg(value):
    """Return value, or the contents of the named file when value starts with @."""
    if value.startswith("@"):
        path = Path(value[1:])
        try:
            return path.read_text(encoding="utf-8").strip()
        except Exception as e:
            logger.error(f"Error reading {path}: {e}")
            raise
    return value


def describe_labels(m):
    return {s: label_text(m.labels[s]) for s in sorted(m.states)}
