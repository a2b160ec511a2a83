"""Simulated activity launching over a modelled app.

A :class:`SimulatedDevice` stands in for the emulator: it renders the
activity's captured screen, a crash dialog, or a permission dialog depending
on the launch Intent. The exploration loop reads those screens back with
:func:`classify_screen_state`, grants permissions and resets after crashes.
"""
from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .checks import DEFAULT_CONFIG, audit_screen
from .errors import InputError, MalformedModel, UnknownActivity
from .intent_flow import ValueType
from .ui_model import Bounds, Screen, ViewNode, iter_nodes, load_screen

log = logging.getLogger(__name__)

CRASH_KEYWORDS = ("has stopped", "keeps stopping")
PLACEHOLDER_VALUES = {
    ValueType.STRING: "xbot",
    ValueType.INTEGER: 1,
    ValueType.LONG: 1,
    ValueType.FLOAT: 1.0,
    ValueType.BOOLEAN: True,
}


class ScreenState(str, enum.Enum):
    NORMAL = "Normal"
    CRASH = "Crash"
    PERMISSION_DIALOG = "PermissionDialog"


def classify_screen_state(screen):
    texts = [(n.text or "").strip() for _, n in iter_nodes(screen.root)]
    lowered = [t.lower() for t in texts]
    if any(k in t for t in lowered for k in CRASH_KEYWORDS):
        return ScreenState.CRASH
    if "allow" in lowered and "deny" in lowered:
        return ScreenState.PERMISSION_DIALOG
    return ScreenState.NORMAL


@dataclass(frozen=True)
class ActivityModel:
    name: str
    screen: Screen
    required_extras: tuple = ()   # (key, ValueType) pairs
    required_login: bool = False
    crash_without_extras: bool = False


@dataclass(frozen=True)
class AppModel:
    activities: tuple = ()
    permission_gates: dict = field(default_factory=dict)
    app_label: str = "App"

    def __post_init__(self):
        names = [a.name for a in self.activities]
        if len(set(names)) != len(names):
            raise MalformedModel("activity names in the app model are not unique")

    def activity(self, name):
        for a in self.activities:
            if a.name == name:
                return a
        raise UnknownActivity(f"activity {name!r} is not part of the app model")


class OutcomeKind(str, enum.Enum):
    LAUNCHED = "Launched"
    CRASHED = "Crashed"
    PERMISSION_GRANTED = "PermissionGranted"
    SKIPPED = "Skipped"


@dataclass(frozen=True)
class LaunchOutcome:
    kind: OutcomeKind
    screen: Optional[Screen] = field(default=None, compare=False, repr=False)
    reason: Optional[str] = None
    granted: tuple = ()

    @property
    def launched(self):
        return self.kind in (OutcomeKind.LAUNCHED, OutcomeKind.PERMISSION_GRANTED)

    def to_dict(self):
        d = {"outcome": self.kind.value}
        if self.reason is not None:
            d["reason"] = self.reason
        if self.granted:
            d["granted"] = list(self.granted)
        return d


@dataclass(frozen=True)
class CoverageReport:
    total: int
    launched: int
    per_activity: dict

    @property
    def ratio(self):
        return self.launched / self.total if self.total else 0.0

    def to_dict(self):
        return {
            "total": self.total,
            "launched": self.launched,
            "ratio": self.ratio,
            "per_activity": {k: v.to_dict() for k, v in self.per_activity.items()},
        }


def _dialog(texts, activity):
    children = tuple(
        ViewNode("android.widget.TextView" if i == 0 else "android.widget.Button",
                 Bounds(0, 100 * i, 1080, 100 * i + 100), text=t,
                 clickable=i > 0, focusable=i > 0)
        for i, t in enumerate(texts)
    )
    root = ViewNode("android.widget.FrameLayout", Bounds(0, 0, 1080, 100 * len(texts)),
                    children=children)
    return Screen(activity, root, 420, 1080, 100 * len(texts))


def build_launch_intent(params):
    """Extras payload attached at launch, with placeholder values per type."""
    if params is None:
        return {}
    return {e.key: (e.value_type, PLACEHOLDER_VALUES[e.value_type]) for e in params.extras}


class SimulatedDevice:
    """Stateful stand-in for an emulator running one app."""

    def __init__(self, app):
        self.app = app
        self.pending_gates = {k: list(v) for k, v in app.permission_gates.items()}
        self.foreground = None

    def start(self, activity_name, intent):
        act = self.app.activity(activity_name)
        provided = {(k, t) for k, (t, _) in intent.items()}
        missing = [e for e in act.required_extras if e not in provided]
        if missing and act.crash_without_extras:
            self.foreground = _dialog([f"{self.app.app_label} has stopped", "Close app"],
                                      activity_name)
        elif self.pending_gates.get(activity_name):
            self.foreground = _dialog(
                [f"Allow {self.app.app_label} to access "
                 f"{self.pending_gates[activity_name][0]}?", "DENY", "ALLOW"],
                activity_name)
        else:
            self.foreground = act.screen
        return self.foreground

    def grant(self, activity_name):
        granted = tuple(self.pending_gates.pop(activity_name, ()))
        self.foreground = self.app.activity(activity_name).screen
        return granted

    def reset(self):
        self.foreground = None


def launch_activity(app, activity_name, params=None, device=None):
    """Attempt one launch and classify what appears on screen."""
    act = app.activity(activity_name)
    if device is None:
        device = SimulatedDevice(app)
    if act.required_login:
        return LaunchOutcome(OutcomeKind.SKIPPED, reason="auth")
    shown = device.start(activity_name, build_launch_intent(params))
    state = classify_screen_state(shown)
    if state is ScreenState.CRASH:
        return LaunchOutcome(OutcomeKind.CRASHED, reason="crash dialog")
    if state is ScreenState.PERMISSION_DIALOG:
        granted = device.grant(activity_name)
        return LaunchOutcome(OutcomeKind.PERMISSION_GRANTED, device.foreground, granted=granted)
    return LaunchOutcome(OutcomeKind.LAUNCHED, shown)


def explore_app(app, extracted=(), config=DEFAULT_CONFIG, with_extras=True, warnings=None):
    """Launch every activity once, in declaration order, and audit what opens.

    Returns ``(CoverageReport, issues)``.
    """
    if warnings is None:
        warnings = []
    by_name = {p.activity: p for p in extracted} if with_extras else {}
    device = SimulatedDevice(app)
    per_activity = {}
    issues = []
    for act in app.activities:
        outcome = launch_activity(app, act.name, by_name.get(act.name), device)
        per_activity[act.name] = outcome
        if outcome.kind is OutcomeKind.CRASHED:
            device.reset()
        elif outcome.launched:
            audit_warnings = []
            issues.extend(audit_screen(outcome.screen, config, audit_warnings))
            warnings.extend(w.to_dict() for w in audit_warnings)
    launched = sum(1 for o in per_activity.values() if o.launched)
    if not app.activities:
        warnings.append({"code": "empty-model", "activity_name": "",
                         "message": "app model has no activities; coverage reported as 0"})
    return CoverageReport(len(app.activities), launched, per_activity), issues


def load_app_model(path):
    """Read an app model JSON file; screen paths resolve relative to it.

    Each activity names its screen through ``screen`` (path to the hierarchy
    XML, PNG alongside) or falls back to ``{screens_dir}/{name}.xml``.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise MalformedModel(f"{path}: {e}") from None
    if not isinstance(data, dict):
        raise MalformedModel(f"{path}: expected a JSON object")
    base = path.parent
    screens_dir = base / data.get("screens_dir", ".")
    acts = []
    try:
        for a in data["activities"]:
            name = a["name"]
            xml = base / a["screen"] if a.get("screen") else screens_dir / f"{name}.xml"
            try:
                screen = load_screen(xml, xml.with_suffix(".png"))
            except (OSError, InputError, ValueError) as e:
                raise MalformedModel(f"{path}: screen for {name}: {e}") from None
            acts.append(ActivityModel(
                name=name,
                screen=screen,
                required_extras=tuple((k, ValueType(t)) for k, t in a.get("required_extras", [])),
                required_login=bool(a.get("required_login", False)),
                crash_without_extras=bool(a.get("crash_without_extras", False)),
            ))
        gates = {k: list(v) for k, v in data.get("permission_gates", {}).items()}
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedModel(f"{path}: {e!r}") from None
    unknown = set(gates) - {a.name for a in acts}
    if unknown:
        raise MalformedModel(f"{path}: permission gates for unknown activities {sorted(unknown)}")
    return AppModel(tuple(acts), gates, data.get("app_label", "App"))
