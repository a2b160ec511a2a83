"""Intent-extras extraction from a simplified program IR.

For each activity the lifecycle callbacks are scanned for extras getters;
each getter's key argument is traced backwards to a string constant. Helper
methods reachable from the callbacks through the call graph are scanned the
same way, so extras read outside the lifecycle methods are found too.
"""
from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import MalformedIR, NotAnActivity
from .manifest import IntentFilter, basic_params_for

log = logging.getLogger(__name__)

LIFECYCLE_METHODS = (
    "onCreate", "onStart", "onResume", "onRestart",
    "onPause", "onStop", "onDestroy", "onNewIntent",
)

ACTIVITY_BASE_CLASSES = frozenset({
    "android.app.Activity",
    "android.app.ListActivity",
    "android.app.TabActivity",
    "android.preference.PreferenceActivity",
    "android.support.v4.app.FragmentActivity",
    "android.support.v7.app.AppCompatActivity",
    "androidx.activity.ComponentActivity",
    "androidx.core.app.ComponentActivity",
    "androidx.fragment.app.FragmentActivity",
    "androidx.appcompat.app.AppCompatActivity",
})

DEFAULT_MAX_DEPTH = 10


class ValueType(str, enum.Enum):
    STRING = "String"
    INTEGER = "Integer"
    LONG = "Long"
    FLOAT = "Float"
    BOOLEAN = "Boolean"

    def __str__(self):
        return self.value


class Provenance(str, enum.Enum):
    DIRECT = "Direct"
    BUNDLE = "Bundle"

    def __str__(self):
        return self.value


_INTENT_GETTERS = {
    "getStringExtra": ValueType.STRING,
    "getIntExtra": ValueType.INTEGER,
    "getLongExtra": ValueType.LONG,
    "getFloatExtra": ValueType.FLOAT,
    "getBooleanExtra": ValueType.BOOLEAN,
}
_BUNDLE_GETTERS = {
    "getString": ValueType.STRING,
    "getInt": ValueType.INTEGER,
    "getLong": ValueType.LONG,
    "getFloat": ValueType.FLOAT,
    "getBoolean": ValueType.BOOLEAN,
}
INTENT_CLASSES = ("android.content.Intent",)
BUNDLE_CLASSES = ("android.os.Bundle", "android.os.BaseBundle")
GET_EXTRAS_APIS = frozenset(c + ".getExtras" for c in INTENT_CLASSES)


# -- IR ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstString:
    var: str
    value: str


@dataclass(frozen=True)
class Move:
    dst: str
    src: str


@dataclass(frozen=True)
class Call:
    api: str
    result_var: Optional[str] = None
    receiver_var: Optional[str] = None
    arg_vars: tuple = ()


Stmt = Union[ConstString, Move, Call]


@dataclass(frozen=True)
class MethodIR:
    name: str
    signature: str = ""
    statements: tuple = ()


@dataclass(frozen=True)
class ClassIR:
    name: str
    superclass: str = ""
    is_activity: bool = False
    methods: tuple = ()


def method_id(cls_name, method):
    return f"{cls_name}#{method.name}({method.signature})"


@dataclass(frozen=True)
class ProgramIR:
    classes: tuple = ()
    call_edges: tuple = ()
    _methods: dict = field(default=None, init=False, repr=False, compare=False)
    _callees: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        methods = {}
        for c in self.classes:
            for m in c.methods:
                mid = method_id(c.name, m)
                if mid in methods:
                    raise MalformedIR(f"method {mid} defined twice")
                methods[mid] = m
        callees = {}
        for a, b in self.call_edges:
            for end in (a, b):
                if end not in methods:
                    raise MalformedIR(f"call edge endpoint {end} names no method")
            callees.setdefault(a, set()).add(b)
        object.__setattr__(self, "_methods", methods)
        object.__setattr__(self, "_callees", {k: sorted(v) for k, v in callees.items()})

    def method(self, mid):
        return self._methods[mid]

    def callees(self, mid):
        return self._callees.get(mid, [])

    def find_class(self, name):
        for c in self.classes:
            if c.name == name:
                return c
        return None

    @property
    def activities(self):
        return [c for c in self.classes if c.is_activity]


def _parse_stmt(d):
    kind = d.get("kind")
    if kind == "const_string":
        return ConstString(d["var"], d["value"])
    if kind == "move":
        return Move(d["dst"], d["src"])
    if kind == "call":
        return Call(
            api=d["api"],
            result_var=d.get("result_var"),
            receiver_var=d.get("receiver_var"),
            arg_vars=tuple(d.get("arg_vars", ())),
        )
    raise MalformedIR(f"unknown statement kind {kind!r}")


def _inherits_activity(name, supers, seen=None):
    seen = seen or set()
    while name and name not in seen:
        if name in ACTIVITY_BASE_CLASSES:
            return True
        seen.add(name)
        name = supers.get(name)
    return False


def ir_from_dict(data):
    """Build a :class:`ProgramIR` from its JSON form.

    ``is_activity`` may be omitted per class; it is then derived from the
    superclass chain.
    """
    try:
        raw_classes = data.get("classes", [])
        supers = {c["name"]: c.get("superclass", "") for c in raw_classes}
        classes = []
        for c in raw_classes:
            methods = tuple(
                MethodIR(m["name"], m.get("signature", ""),
                         tuple(_parse_stmt(s) for s in m.get("statements", [])))
                for m in c.get("methods", [])
            )
            is_act = c.get("is_activity")
            if is_act is None:
                is_act = _inherits_activity(c.get("superclass", ""), supers)
            classes.append(ClassIR(c["name"], c.get("superclass", ""), bool(is_act), methods))
        edges = tuple((a, b) for a, b in data.get("call_edges", []))
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise MalformedIR(f"malformed IR: {e!r}") from None
    return ProgramIR(tuple(classes), edges)


def load_ir(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedIR(f"IR is not valid JSON (line {e.lineno}, column {e.colno}): {e.msg}") from None
    if not isinstance(data, dict):
        raise MalformedIR("IR root must be an object")
    return ir_from_dict(data)


def _stmt_to_dict(s):
    if isinstance(s, ConstString):
        return {"kind": "const_string", "var": s.var, "value": s.value}
    if isinstance(s, Move):
        return {"kind": "move", "dst": s.dst, "src": s.src}
    return {"kind": "call", "result_var": s.result_var, "receiver_var": s.receiver_var,
            "api": s.api, "arg_vars": list(s.arg_vars)}


def ir_to_dict(ir):
    return {
        "classes": [
            {
                "name": c.name, "superclass": c.superclass, "is_activity": c.is_activity,
                "methods": [
                    {"name": m.name, "signature": m.signature,
                     "statements": [_stmt_to_dict(s) for s in m.statements]}
                    for m in c.methods
                ],
            }
            for c in ir.classes
        ],
        "call_edges": [list(e) for e in ir.call_edges],
    }


# -- extraction --------------------------------------------------------------------

@dataclass(frozen=True)
class ExtrasParam:
    key: str
    value_type: ValueType
    provenance: Provenance
    found_in: str

    def to_dict(self):
        return {"key": self.key, "value_type": self.value_type.value,
                "provenance": self.provenance.value, "found_in": self.found_in}

    @classmethod
    def from_dict(cls, d):
        return cls(d["key"], ValueType(d["value_type"]),
                   Provenance(d.get("provenance", "Direct")), d.get("found_in", ""))


@dataclass(frozen=True)
class ExtractedParams:
    activity: str
    basic: IntentFilter = IntentFilter()
    extras: tuple = ()

    def to_dict(self):
        return {"basic": self.basic.to_dict(), "extras": [e.to_dict() for e in self.extras]}

    @classmethod
    def from_dict(cls, activity, d):
        return cls(activity, IntentFilter.from_dict(d.get("basic", {})),
                   tuple(ExtrasParam.from_dict(e) for e in d.get("extras", [])))


def lifecycle_callbacks(cls):
    if not cls.is_activity:
        raise NotAnActivity(f"{cls.name} is not an activity")
    by_name = {}
    for m in cls.methods:
        by_name.setdefault(m.name, []).append(m)
    return [
        m for name in LIFECYCLE_METHODS
        for m in sorted(by_name.get(name, []), key=lambda m: m.signature)
    ]


def _split_api(api):
    owner, _, name = api.rpartition(".")
    return owner, name


def extras_getter_type(api):
    """Map a getter API to ``(value_type, provenance)``, or None.

    Bundle getters are reported with ``Bundle`` provenance here; whether the
    receiver really is the Intent's extras bundle is decided by the caller.
    """
    owner, name = _split_api(api)
    if owner in INTENT_CLASSES and name in _INTENT_GETTERS:
        return _INTENT_GETTERS[name], Provenance.DIRECT
    if owner in BUNDLE_CLASSES and name in _BUNDLE_GETTERS:
        return _BUNDLE_GETTERS[name], Provenance.BUNDLE
    return None


def _definition_before(statements, index, var):
    """Walk backwards from ``index`` following moves; return the defining stmt."""
    for i in range(index - 1, -1, -1):
        s = statements[i]
        if isinstance(s, Move) and s.dst == var:
            var = s.src
        elif isinstance(s, ConstString) and s.var == var:
            return s
        elif isinstance(s, Call) and s.result_var == var:
            return s
    return None


def _index_of(method, call):
    for i, s in enumerate(method.statements):
        if s is call:
            return i
    for i, s in enumerate(method.statements):
        if s == call:
            return i
    raise ValueError("call is not a statement of this method")


def backward_trace_key(method, call, index=None):
    """Resolve the constant key passed to an extras getter, or None."""
    if not isinstance(call, Call) or not call.arg_vars:
        return None
    if index is None:
        index = _index_of(method, call)
    d = _definition_before(method.statements, index, call.arg_vars[0])
    return d.value if isinstance(d, ConstString) else None


def _receiver_is_extras(method, index, call):
    if call.receiver_var is None:
        return False
    d = _definition_before(method.statements, index, call.receiver_var)
    return isinstance(d, Call) and d.api in GET_EXTRAS_APIS


def method_extras(method, mid):
    """Every resolvable extras read in one method, in statement order."""
    out = []
    for i, s in enumerate(method.statements):
        if not isinstance(s, Call):
            continue
        kind = extras_getter_type(s.api)
        if kind is None:
            continue
        vtype, prov = kind
        if prov is Provenance.BUNDLE and not _receiver_is_extras(method, i, s):
            continue
        key = backward_trace_key(method, s, i)
        if key is not None:
            out.append(ExtrasParam(key, vtype, prov, mid))
    return out


def reachable_methods(ir, roots, max_depth=DEFAULT_MAX_DEPTH):
    """Methods within ``max_depth`` call edges of any root, each once.

    Roots come first in the given order; deeper levels follow breadth-first
    with each level sorted by method id.
    """
    order = []
    seen = set()
    level = []
    for r in roots:
        if r not in seen:
            seen.add(r)
            level.append(r)
    depth = 0
    while level:
        order.extend(level)
        if depth == max_depth:
            break
        nxt = set()
        for mid in level:
            for c in ir.callees(mid):
                if c not in seen:
                    nxt.add(c)
        seen |= nxt
        level = sorted(nxt)
        depth += 1
    return order


def extract_extras_params(ir, activity_class, max_depth=DEFAULT_MAX_DEPTH, follow_callees=True):
    """Intent extras an activity reads, deduplicated by (key, type).

    With ``follow_callees`` false only the lifecycle callbacks themselves are
    scanned.
    """
    roots = [method_id(activity_class.name, m) for m in lifecycle_callbacks(activity_class)]
    mids = reachable_methods(ir, roots, max_depth if follow_callees else 0)
    found = {}
    for mid in mids:
        for p in method_extras(ir.method(mid), mid):
            found.setdefault((p.key, p.value_type), p)
    return list(found.values())


def extract_all(ir, manifest, warnings=None, max_depth=DEFAULT_MAX_DEPTH):
    """One :class:`ExtractedParams` per manifest activity, in manifest order."""
    if warnings is None:
        warnings = []
    out = []
    for act in manifest.activities:
        basic = basic_params_for(manifest, act.name)
        cls = ir.find_class(act.name) if ir is not None else None
        if cls is None:
            msg = f"activity {act.name} not found in program IR; extras left empty"
            log.warning(msg)
            warnings.append(msg)
            extras = []
        elif not cls.is_activity:
            msg = f"class {act.name} is declared in the manifest but is not an activity in the IR"
            log.warning(msg)
            warnings.append(msg)
            extras = []
        else:
            extras = extract_extras_params(ir, cls, max_depth)
        out.append(ExtractedParams(act.name, basic, tuple(extras)))
    return out


def params_to_json(params):
    return {p.activity: p.to_dict() for p in params}


def params_from_json(data):
    return [ExtractedParams.from_dict(name, d) for name, d in data.items()]
