"""Decoded AndroidManifest.xml: activity enumeration and the exported rewrite."""
from __future__ import annotations

import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace

from .errors import DuplicateActivity, MalformedXml, UnknownActivity

log = logging.getLogger(__name__)

ANDROID_NS = "http://schemas.android.com/apk/res/android"
_A = "{%s}" % ANDROID_NS


def _dedup(items):
    return tuple(dict.fromkeys(items))


@dataclass(frozen=True)
class IntentFilter:
    actions: tuple = ()
    categories: tuple = ()
    data_uris: tuple = ()
    mime_types: tuple = ()

    def __post_init__(self):
        for name in ("actions", "categories", "data_uris", "mime_types"):
            object.__setattr__(self, name, _dedup(getattr(self, name)))

    def to_dict(self):
        return {
            "actions": list(self.actions),
            "categories": list(self.categories),
            "data_uris": list(self.data_uris),
            "mime_types": list(self.mime_types),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            tuple(d.get("actions", ())), tuple(d.get("categories", ())),
            tuple(d.get("data_uris", ())), tuple(d.get("mime_types", ())),
        )


@dataclass(frozen=True)
class ActivityDecl:
    name: str
    exported: bool = False
    intent_filters: tuple = ()


@dataclass(frozen=True)
class ManifestModel:
    package: str
    activities: tuple = ()
    warnings: tuple = field(default=(), compare=False)

    def activity(self, name):
        for act in self.activities:
            if act.name == name:
                return act
        raise UnknownActivity(f"activity {name!r} is not declared in {self.package}")

    @property
    def activity_names(self):
        return [a.name for a in self.activities]


def resolve_name(name, package):
    """Android class-name resolution for ``android:name`` values."""
    name = name.strip()
    if name.startswith("."):
        return package + name
    if "." not in name:
        return f"{package}.{name}"
    return name


def _data_uri(el):
    scheme = el.get(_A + "scheme")
    host = el.get(_A + "host")
    if not scheme and not host:
        return None
    uri = f"{scheme or ''}://" if scheme else "//"
    uri += host or ""
    if el.get(_A + "port"):
        uri += ":" + el.get(_A + "port")
    for attr in ("path", "pathPrefix", "pathPattern"):
        if el.get(_A + attr):
            uri += el.get(_A + attr)
            break
    return uri


def _parse_filter(el):
    actions, categories, uris, mimes = [], [], [], []
    for child in el:
        name = child.get(_A + "name")
        if child.tag == "action" and name:
            actions.append(name)
        elif child.tag == "category" and name:
            categories.append(name)
        elif child.tag == "data":
            uri = _data_uri(child)
            if uri:
                uris.append(uri)
            if child.get(_A + "mimeType"):
                mimes.append(child.get(_A + "mimeType"))
    return IntentFilter(tuple(actions), tuple(categories), tuple(uris), tuple(mimes))


def parse_manifest(xml_text):
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as e:
        raise MalformedXml(f"unparseable manifest: {e}") from None
    if root.tag != "manifest":
        raise MalformedXml(f"root element is <{root.tag}>, expected <manifest>")
    package = root.get("package", "").strip()
    if not package:
        raise MalformedXml("<manifest> has no package attribute")
    app = root.find("application")
    if app is None:
        raise MalformedXml("<manifest> has no <application> element")

    warnings = []
    activities = []
    seen = set()
    for el in app:
        if el.tag == "activity-alias":
            msg = f"ignoring <activity-alias> {el.get(_A + 'name', '?')}"
            log.warning(msg)
            warnings.append(msg)
            continue
        if el.tag != "activity":
            continue
        raw = el.get(_A + "name")
        if not raw or not raw.strip():
            raise MalformedXml("<activity> without android:name")
        name = resolve_name(raw, package)
        if name in seen:
            raise DuplicateActivity(f"activity {name} declared twice")
        seen.add(name)
        exported = el.get(_A + "exported", "false").strip().lower() == "true"
        filters = tuple(_parse_filter(f) for f in el if f.tag == "intent-filter")
        activities.append(ActivityDecl(name, exported, filters))
    return ManifestModel(package, tuple(activities), tuple(warnings))


# -- instrumentation ------------------------------------------------------------

_COMMENT_RE = re.compile(r"<!--.*?-->|<!\[CDATA\[.*?\]\]>", re.S)
_ACTIVITY_TAG_RE = re.compile(r"""<activity(?=[\s/>])(?:[^>"']|"[^"]*"|'[^']*')*>""")
_XMLNS_RE = re.compile(r"""xmlns:([\w.-]+)\s*=\s*(["'])%s\2""" % re.escape(ANDROID_NS))


def _rewrite_tag(tag, prefix):
    attr = re.compile(r"""(\s%s:exported\s*=\s*)(["'])(.*?)\2""" % re.escape(prefix), re.S)
    m = attr.search(tag)
    if m:
        if m.group(3) == "true":
            return tag
        return tag[:m.start(3)] + "true" + tag[m.end(3):]
    cut = len("<activity")
    return tag[:cut] + f' {prefix}:exported="true"' + tag[cut:]


def instrument_exported(model, xml_text):
    """Mark every activity exported.

    Returns the updated model and the rewritten manifest text; only
    ``exported`` attributes are inserted or changed, everything else is kept
    byte for byte.
    """
    m = _XMLNS_RE.search(xml_text)
    prefix = m.group(1) if m else "android"
    skip = [(c.start(), c.end()) for c in _COMMENT_RE.finditer(xml_text)]

    def in_skipped(pos):
        return any(a <= pos < b for a, b in skip)

    out = []
    last = 0
    for tag in _ACTIVITY_TAG_RE.finditer(xml_text):
        if in_skipped(tag.start()):
            continue
        out.append(xml_text[last:tag.start()])
        out.append(_rewrite_tag(tag.group(0), prefix))
        last = tag.end()
    out.append(xml_text[last:])
    new_model = replace(
        model, activities=tuple(replace(a, exported=True) for a in model.activities)
    )
    return new_model, "".join(out)


def basic_params_for(model, activity_name):
    """Union of all intent-filter fields declared for one activity."""
    act = model.activity(activity_name)
    fields = {"actions": [], "categories": [], "data_uris": [], "mime_types": []}
    for f in act.intent_filters:
        for k in fields:
            fields[k].extend(getattr(f, k))
    return IntentFilter(**{k: tuple(v) for k, v in fields.items()})


def list_activities(model):
    """JSON-ready activity listing."""
    return [
        {
            "name": a.name,
            "exported": a.exported,
            "intent_filters": [f.to_dict() for f in a.intent_filters],
        }
        for a in model.activities
    ]
