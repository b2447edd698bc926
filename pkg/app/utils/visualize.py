from app.models.model import PureModel, label_text


def _gvquote(s):
    return '"{}"'.format(str(s).replace('"', r'\"'))


def to_dot(m, name="model"):
    """
    Produce a graphviz dot description of a model as an iterable of lines.

    Use like so::

        with open('model.dot', 'w') as f:
            f.writelines(to_dot(m))

    States are annotated with their labels (pure models show only the id); the
    start state is drawn as a double circle.
    """
    yield f"digraph {_gvquote(name)} {{\n"
    yield "  rankdir=TB;\n"
    pure = isinstance(m, PureModel)
    for state in sorted(m.states):
        shape = "doublecircle" if state == m.start else "circle"
        text = state if pure else f"{state}\\n{label_text(m.labels[state])}"
        yield f"  {_gvquote(state)} [shape={shape} label={_gvquote(text)}];\n"
    for s, a, t in sorted(m.transitions):
        yield f"  {_gvquote(s)} -> {_gvquote(t)} [label={_gvquote(a)}];\n"
    yield "}\n"


def dot_text(m, name="model"):
    return "".join(to_dot(m, name))
