import itertools
import logging
import sys
from pathlib import Path

from app.components.output import EXIT_ERROR, EXIT_TRUE
from app.data.knowledge_base import KnowledgeBase, parse_query
from app.utils import config
from app.utils.errors import CathoristicError
from app.utils.load_data import dumps_model, load_model, save_model
from app.utils.visualize import dot_text

logger = logging.getLogger(__name__)

HELP = """commands:
  assert <formula>          add a fact (new tantums override old ones)
  retract <a/b/c>           remove the state at a path with its subtree
  relabel <a/b/c>           reset the label at a path to *
  query <lit>, <lit>, ...   list the bindings, e.g. query <welsh><X>
  explain <lit>, ...        node counts for the written and optimised order
  save <file> | load <file> write a model file, or replace the store by one
  dump | dot                print the store as a model file or in DOT
  help | quit"""


def _format_binding(env):
    if not env:
        return "yes"
    return ", ".join(f"{k}={v}" for k, v in sorted(env.items()))


class KbShell:
    """Line-oriented front end over a KnowledgeBase."""

    def __init__(self, kb=None, out=None, log_path=None, snapshot_every=None):
        self.kb = kb or KnowledgeBase()
        self.out = out or sys.stdout
        self.log_path = Path(log_path) if log_path else None
        self.snapshot_every = config.kb_snapshot_every() if snapshot_every is None else snapshot_every

    def say(self, text):
        self.out.write(text.rstrip("\n") + "\n")

    def execute(self, line):
        """
        Run one REPL line.

        Returns:
            bool: False when the session should end
        """
        verb, _, rest = line.strip().partition(" ")
        rest = rest.strip()
        if not verb or verb.startswith("#"):
            return True
        if verb in ("quit", "exit"):
            return False
        if verb == "help":
            self.say(HELP)
        elif verb in ("assert", "retract", "relabel", "load"):
            if verb == "load":
                rest = self._pin(rest)
            report = self.kb.apply(f"{verb} {rest}")
            for path in report.removed:
                self.say(f"removed {path}")
            for path in report.added:
                self.say(f"added {path}")
            self.say(f"ok (revision {report.revision})")
            self._append_log()
            self._snapshot()
        elif verb == "query":
            result = self.kb.query(parse_query(rest), optimize=True)
            for env in result.bindings:
                self.say(_format_binding(env))
            if not result.bindings:
                self.say("no")
        elif verb == "explain":
            frame = self.kb.explain(rest)
            self.say(frame.to_string(index=False))
            totals = frame.groupby("plan", sort=False)["nodes"].sum()
            self.say(", ".join(f"{plan}: {nodes} nodes" for plan, nodes in totals.items()))
        elif verb == "save":
            self.kb.save(rest)
            self.say(f"saved to {rest}")
        elif verb == "dump":
            self.say(dumps_model(self.kb.model))
        elif verb == "dot":
            self.say(dot_text(self.kb.model, "kb"))
        else:
            raise CathoristicError(f"unknown command {verb!r}; try help")
        return True

    def _sibling(self, suffix):
        return self.log_path.with_name(f"{self.log_path.stem}.{suffix}.json").resolve()

    def _pin(self, path):
        """Copy a model file next to the log so the logged load replays the same tree."""
        if self.log_path is None:
            return path
        pinned = self._sibling(f"load-r{self.kb.revision + 1}")
        save_model(load_model(path), pinned)
        return str(pinned)

    def _snapshot(self):
        if self.log_path is None or not self.snapshot_every:
            return
        if self.kb.revision % self.snapshot_every == 0:
            path = self._sibling(f"r{self.kb.revision}")
            self.kb.save(path)
            logger.info(f"KB snapshot at revision {self.kb.revision}: {path}")

    def _append_log(self):
        if self.log_path is None:
            return
        try:
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.log_path, "a", encoding="utf-8") as f:
                f.write(self.kb.log[-1] + "\n")
        except Exception as e:
            logger.error(f"Error appending to command log {self.log_path}: {e}")
            raise

    def run(self, lines):
        """Execute lines until quit; errors are reported and the session continues."""
        status = EXIT_TRUE
        for line in lines:
            try:
                if not self.execute(line):
                    break
            except (CathoristicError, OSError) as e:
                self.say(f"error: {e}")
                status = EXIT_ERROR
        return status


def run_kb(args, out=None, lines=None):
    log_path = Path(args.log) if args.log else config.kb_log_path()
    kb = None
    if log_path.exists():
        kb = KnowledgeBase.replay_file(log_path)
        logger.info(f"Replayed {len(kb.log)} commands from {log_path}")
    shell = KbShell(kb, out, log_path)
    lines = sys.stdin if lines is None else lines
    if args.load:
        lines = itertools.chain([f"load {args.load}"], lines)
    return shell.run(lines)
