"""Model files (YAML), certificates and counterexamples (JSON)."""

import json

import yaml

from . import expr as ex
from .model import Automaton, EventDecl, System, Transition, VarDecl
from .supervisor import Certificate


class ModelFormatError(ValueError):
    pass


def _require(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise ModelFormatError(f"{where}: missing field {key!r}")
    return d[key]


def system_from_dict(doc, name="model"):
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a mapping")
    unknown = set(doc) - {"name", "variables", "events", "automata", "forbidden"}
    if unknown:
        raise ModelFormatError(f"unknown top-level sections {sorted(unknown)}")
    try:
        variables = tuple(
            VarDecl(str(_require(v, "name", "variable")), int(_require(v, "min", "variable")),
                    int(_require(v, "max", "variable")), int(v.get("init", v.get("min"))))
            for v in doc.get("variables") or ()
        )
        events = tuple(
            EventDecl(str(_require(e, "name", "event")), bool(e.get("controllable", True)))
            for e in doc.get("events") or ()
        )
        automata = []
        for a in doc.get("automata") or ():
            aname = str(_require(a, "name", "automaton"))
            ts = []
            for t in a.get("transitions") or ():
                where = f"automaton {aname} transition"
                updates = t.get("updates") or {}
                if not isinstance(updates, dict):
                    raise ModelFormatError(f"{where}: updates must be a mapping")
                ts.append(Transition(
                    str(_require(t, "from", where)), str(_require(t, "event", where)), str(_require(t, "to", where)),
                    ex.parse_guard(t.get("guard")),
                    tuple(ex.parse_update(str(v), u) for v, u in updates.items()),
                ))
            automata.append(Automaton(
                aname, tuple(str(l) for l in _require(a, "locations", f"automaton {aname}")),
                str(_require(a, "initial", f"automaton {aname}")),
                frozenset(str(l) for l in a.get("forbidden") or ()), tuple(ts),
            ))
        forbidden = ex.parse_guard(doc["forbidden"]) if doc.get("forbidden") is not None else None
    except (TypeError, ValueError) as e:
        if isinstance(e, ModelFormatError):
            raise
        raise ModelFormatError(str(e)) from e
    return System(variables, events, tuple(automata), forbidden, name=str(doc.get("name", name)))


def system_to_dict(sys):
    doc = {"name": sys.name}
    doc["variables"] = [{"name": v.name, "min": v.min, "max": v.max, "init": v.init} for v in sys.variables]
    doc["events"] = [{"name": e.name, "controllable": e.controllable} for e in sys.events]
    automata = []
    for a in sys.automata:
        ts = []
        for t in a.transitions:
            d = {"from": t.source, "event": t.event, "to": t.target}
            if t.guard != ex.TRUE:
                d["guard"] = ex.to_text(t.guard)
            if t.updates:
                d["updates"] = {u.var: u.to_text() for u in t.updates}
            ts.append(d)
        automata.append({
            "name": a.name, "locations": list(a.locations), "initial": a.initial,
            "forbidden": sorted(a.forbidden), "transitions": ts,
        })
    doc["automata"] = automata
    if sys.forbidden is not None:
        doc["forbidden"] = ex.to_text(sys.forbidden)
    return doc


def load_model(path):
    with open(path) as f:
        try:
            doc = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ModelFormatError(f"{path}: {e}") from e
    return system_from_dict(doc, name=str(path))


def dump_model(sys):
    return yaml.safe_dump(system_to_dict(sys), sort_keys=False, default_flow_style=None)


def save_model(sys, path):
    with open(path, "w") as f:
        f.write(dump_model(sys))


def certificate_to_json(cert):
    # one clause per line keeps certificates diffable
    rows = ",\n".join("  " + json.dumps(c) for c in cert.clauses)
    body = f"[\n{rows}\n ]" if rows else "[]"
    return f'{{\n "model": {json.dumps(cert.model)},\n "invariant": {body}\n}}\n'


def certificate_from_json(text):
    try:
        doc = json.loads(text)
        clauses = doc["invariant"]
        if not all(isinstance(c, list) and all(isinstance(a, str) for a in c) for c in clauses):
            raise ValueError("invariant must be a list of atom lists")
    except (ValueError, KeyError, TypeError) as e:
        raise ModelFormatError(f"bad certificate: {e}") from e
    return Certificate([list(c) for c in clauses], str(doc.get("model", "")))


def load_certificate(path):
    with open(path) as f:
        return certificate_from_json(f.read())


def counterexample_to_json(sys, path):
    steps = []
    for i, q in enumerate(path.states):
        rec = {"state": sys.format_state(q)}
        if i < len(path.events):
            rec["event"] = path.events[i]
        steps.append(rec)
    return json.dumps({"model": sys.name, "length": len(path), "path": steps}, indent=1) + "\n"
