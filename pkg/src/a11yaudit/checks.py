"""Accessibility rule engine: ten issue types evaluated over a :class:`Screen`."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import kernels
from .color import contrast_ratio, relative_luminance
from .errors import DegenerateRegion, MissingScreenshot, UniformRegion
from .ui_model import Bounds, flatten, format_path, px_to_dp, sample_region_colors, speakable_text

__all__ = [
    "IssueType", "Issue", "CheckConfig", "AuditWarning",
    "relative_luminance", "contrast_ratio",
    "check_item_label", "check_item_type_label", "check_editable_item_label",
    "check_unsupported_type", "check_clickable_overlap", "check_duplicate_description",
    "check_touch_target", "check_text_contrast", "check_image_contrast", "check_link",
    "audit_screen",
]


class IssueType(str, enum.Enum):
    ITEM_LABEL = "ItemLabel"
    ITEM_TYPE_LABEL = "ItemTypeLabel"
    EDITABLE_ITEM_LABEL = "EditableItemLabel"
    UNSUPPORTED_ITEM_TYPE = "UnsupportedItemType"
    CLICKABLE_ITEM = "ClickableItem"
    ITEM_DESCRIPTION = "ItemDescription"
    TOUCH_TARGET = "TouchTarget"
    TEXT_CONTRAST = "TextContrast"
    IMAGE_CONTRAST = "ImageContrast"
    LINK = "Link"

    @property
    def label(self):
        return _LABELS[self]

    def __str__(self):
        return self.value


_LABELS = {
    IssueType.ITEM_LABEL: "Item label",
    IssueType.ITEM_TYPE_LABEL: "Item type label",
    IssueType.EDITABLE_ITEM_LABEL: "Editable item label",
    IssueType.UNSUPPORTED_ITEM_TYPE: "Unsupported item type",
    IssueType.CLICKABLE_ITEM: "Clickable item",
    IssueType.ITEM_DESCRIPTION: "Item descriptions",
    IssueType.TOUCH_TARGET: "Touch target",
    IssueType.TEXT_CONTRAST: "Text contrast",
    IssueType.IMAGE_CONTRAST: "Image contrast",
    IssueType.LINK: "Link",
}

ISSUE_TYPES = tuple(IssueType)

DEFAULT_REDUNDANT_WORDS = ("button", "checkbox", "switch", "image", "view", "tab", "link")
TEXT_CLASS_SUFFIXES = ("TextView", "EditText", "Button", "CheckedTextView")
IMAGE_CLASS_SUFFIXES = ("ImageView", "ImageButton")

_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")


@dataclass(frozen=True)
class CheckConfig:
    contrast_threshold: Fraction = Fraction(3)
    touch_target_min_dp: Fraction = Fraction(48)
    redundant_words: tuple = DEFAULT_REDUNDANT_WORDS
    # allow-list of class-name prefixes; empty disables the allow-list
    supported_classes: tuple = ()
    # deny-list of class names, matched exactly or by simple name
    unsupported_classes: tuple = ()
    overlap_coverage_threshold: Fraction = Fraction(9, 10)
    # "screen" groups duplicate descriptions screen-wide, "container" per parent
    description_scope: str = "screen"
    # False: one ClickableItem issue per overlapping pair and one ItemDescription
    # issue per duplicate group; True: one issue for every node involved
    report_each_duplicate: bool = False

    def __post_init__(self):
        for name in ("contrast_threshold", "touch_target_min_dp", "overlap_coverage_threshold"):
            v = Fraction(getattr(self, name)).limit_denominator(10**6)
            object.__setattr__(self, name, v)
            if v <= 0:
                raise ValueError(f"{name} must be positive")
        if self.overlap_coverage_threshold > 1:
            raise ValueError("overlap_coverage_threshold must lie in (0, 1]")
        if self.description_scope not in ("screen", "container"):
            raise ValueError("description_scope must be 'screen' or 'container'")
        for name in ("redundant_words", "supported_classes", "unsupported_classes"):
            object.__setattr__(self, name, tuple(getattr(self, name)))


DEFAULT_CONFIG = CheckConfig()


@dataclass(frozen=True)
class Issue:
    issue_type: IssueType
    activity_name: str
    node_path: tuple
    node_class: str
    resource_id: Optional[str]
    bounds: Bounds
    metrics: dict = field(default_factory=dict)
    message: str = ""

    def to_dict(self):
        return {
            "issue_type": self.issue_type.value,
            "activity_name": self.activity_name,
            "node_path": list(self.node_path),
            "node_class": self.node_class,
            "resource_id": self.resource_id,
            "bounds": {
                "left": self.bounds.left, "top": self.bounds.top,
                "right": self.bounds.right, "bottom": self.bounds.bottom,
            },
            "metrics": dict(self.metrics),
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, d):
        b = d["bounds"]
        if isinstance(b, dict):
            bounds = Bounds(b["left"], b["top"], b["right"], b["bottom"])
        else:
            bounds = Bounds(*b)
        return cls(
            issue_type=IssueType(d["issue_type"]),
            activity_name=d.get("activity_name", ""),
            node_path=tuple(d.get("node_path", ())),
            node_class=d.get("node_class", ""),
            resource_id=d.get("resource_id"),
            bounds=bounds,
            metrics=dict(d.get("metrics", {})),
            message=d.get("message", ""),
        )


@dataclass(frozen=True)
class AuditWarning:
    code: str
    activity_name: str
    message: str
    node_path: Optional[tuple] = None

    def to_dict(self):
        d = {"code": self.code, "activity_name": self.activity_name, "message": self.message}
        if self.node_path is not None:
            d["node_path"] = list(self.node_path)
        return d


def _issue(kind, screen, fn, message, **metrics):
    n = fn.node
    return Issue(kind, screen.activity_name, fn.path, n.class_name, n.resource_id,
                 n.bounds, metrics, message)


def is_screen_reader_focusable(node):
    return node.enabled and (node.focusable or node.clickable or node.long_clickable)


def _is_clickable(node):
    return node.clickable or node.long_clickable


def check_item_label(screen, config=DEFAULT_CONFIG):
    return [
        _issue(IssueType.ITEM_LABEL, screen, fn, "focusable item has no spoken label")
        for fn in flatten(screen.root)
        if is_screen_reader_focusable(fn.node)
        and not fn.node.editable
        and not speakable_text(fn.node)
    ]


def check_item_type_label(screen, config=DEFAULT_CONFIG):
    if not config.redundant_words:
        return []
    words = "|".join(re.escape(w.lower()) for w in config.redundant_words)
    pattern = re.compile(rf"\b(?:{words})\b")
    out = []
    for fn in flatten(screen.root):
        desc = (fn.node.content_description or "").strip().lower()
        m = pattern.search(desc) if desc else None
        if m:
            out.append(_issue(
                IssueType.ITEM_TYPE_LABEL, screen, fn,
                f"description repeats the item type ({m.group(0)!r})",
                redundant_word=m.group(0),
            ))
    return out


def check_editable_item_label(screen, config=DEFAULT_CONFIG):
    return [
        _issue(IssueType.EDITABLE_ITEM_LABEL, screen, fn,
               "editable item has a content description that hides its content")
        for fn in flatten(screen.root)
        if fn.node.editable and (fn.node.content_description or "").strip()
    ]


def _is_unsupported(class_name, config):
    short = class_name.rsplit(".", 1)[-1]
    if any(class_name == d or short == d for d in config.unsupported_classes):
        return True
    if config.supported_classes:
        return not class_name.startswith(tuple(config.supported_classes))
    return False


def check_unsupported_type(screen, config=DEFAULT_CONFIG):
    if not config.unsupported_classes and not config.supported_classes:
        return []
    return [
        _issue(IssueType.UNSUPPORTED_ITEM_TYPE, screen, fn,
               f"item type {fn.node.class_name} is not supported by accessibility services")
        for fn in flatten(screen.root)
        if is_screen_reader_focusable(fn.node) and _is_unsupported(fn.node.class_name, config)
    ]


def clickable_overlap_pairs(flat, config=DEFAULT_CONFIG):
    """Pre-order index pairs of clickable nodes sharing an on-screen location."""
    eligible = [fn for fn in flat if _is_clickable(fn.node)]
    if len(eligible) < 2:
        return []
    boxes = np.array(
        [(f.node.bounds.left, f.node.bounds.top, f.node.bounds.right, f.node.bounds.bottom)
         for f in eligible], dtype=np.int64)
    pre = np.array([f.index for f in eligible], dtype=np.int64)
    end = np.array([f.end for f in eligible], dtype=np.int64)
    t = config.overlap_coverage_threshold
    pairs = kernels.overlap_pairs(boxes, pre, end, t.numerator, t.denominator)
    return [(eligible[i].index, eligible[j].index) for i, j in pairs]


def check_clickable_overlap(screen, config=DEFAULT_CONFIG):
    """Clickable items sharing an on-screen location.

    A pair qualifies when neither node contains the other in the hierarchy and
    their overlap covers at least ``overlap_coverage_threshold`` of the smaller
    node. By default the pair is reported once, on its first node in pre-order.
    """
    flat = flatten(screen.root)
    found = []
    for a, b in clickable_overlap_pairs(flat, config):
        fa, fb = flat[a], flat[b]
        cover = Fraction(fa.node.bounds.intersection_area(fb.node.bounds),
                         min(fa.node.bounds.area, fb.node.bounds.area))
        sides = ((fa, fb), (fb, fa)) if config.report_each_duplicate else ((fa, fb),)
        for this, other in sides:
            found.append(((this.index, other.index), _issue(
                IssueType.CLICKABLE_ITEM, screen, this,
                f"shares its on-screen location with {other.node.class_name}",
                overlap_partner_path=format_path(other.path),
                overlap_coverage=round(float(cover), 4),
            )))
    found.sort(key=lambda p: p[0])
    return [issue for _, issue in found]


def duplicate_description_groups(flat, config=DEFAULT_CONFIG):
    """Groups (pre-order index lists) of focusable nodes sharing speakable text."""
    groups = {}
    for fn in flat:
        if not is_screen_reader_focusable(fn.node):
            continue
        text = speakable_text(fn.node)
        if not text:
            continue
        scope = fn.parent if config.description_scope == "container" else None
        groups.setdefault((scope, text), []).append(fn.index)
    return [members for members in groups.values() if len(members) >= 2]


def check_duplicate_description(screen, config=DEFAULT_CONFIG):
    """Items whose speakable text is shared with another focusable item.

    Groups are numbered from 1 in order of first appearance. By default each
    group is reported once, on its first member.
    """
    flat = flatten(screen.root)
    out = []
    for gid, members in enumerate(duplicate_description_groups(flat, config), 1):
        text = speakable_text(flat[members[0]].node)
        paths = ";".join(format_path(flat[i].path) for i in members)
        reported = members if config.report_each_duplicate else members[:1]
        for i in reported:
            out.append((i, _issue(
                IssueType.ITEM_DESCRIPTION, screen, flat[i],
                f"speakable text {text!r} is shared by {len(members)} items",
                duplicate_group=gid, group_size=len(members),
                speakable_text=text, duplicate_paths=paths,
            )))
    out.sort(key=lambda p: p[0])
    return [issue for _, issue in out]


def check_touch_target(screen, config=DEFAULT_CONFIG):
    out = []
    limit = config.touch_target_min_dp
    for fn in flatten(screen.root):
        n = fn.node
        if not (_is_clickable(n) and n.enabled):
            continue
        w = px_to_dp(n.bounds.width, screen.density_dpi)
        h = px_to_dp(n.bounds.height, screen.density_dpi)
        if w < limit or h < limit:
            out.append(_issue(
                IssueType.TOUCH_TARGET, screen, fn,
                f"touch target {float(w):.2f}x{float(h):.2f}dp is smaller than {float(limit):g}dp",
                width_dp=round(float(w), 2), height_dp=round(float(h), 2),
            ))
    return out


def _is_image_class(name):
    return name.endswith(IMAGE_CLASS_SUFFIXES)


def _is_text_class(name):
    return name.endswith(TEXT_CLASS_SUFFIXES) and not _is_image_class(name)


def _contrast_check(kind, screen, config, select, warnings):
    if screen.pixels is None:
        msg = "screen has no screenshot; contrast checks skipped"
        if warnings is None:
            raise MissingScreenshot(msg)
        warnings.append(AuditWarning("missing-screenshot", screen.activity_name,
                                     f"{kind.value}: {msg}"))
        return []
    out = []
    for fn in flatten(screen.root):
        if not select(fn.node):
            continue
        try:
            fg, bg = sample_region_colors(screen.pixels, fn.node.bounds)
        except (UniformRegion, DegenerateRegion) as e:
            if warnings is not None:
                warnings.append(AuditWarning(
                    "unsampleable", screen.activity_name,
                    f"{kind.value}: {fn.node.class_name} {fn.node.bounds}: {e}", fn.path))
            continue
        ratio = contrast_ratio(fg, bg)
        if ratio < config.contrast_threshold:
            out.append(_issue(
                kind, screen, fn,
                f"contrast ratio {ratio:.2f} between {fg.hex} and {bg.hex} is below "
                f"{float(config.contrast_threshold):g}",
                contrast_ratio=round(ratio, 2), foreground_hex=fg.hex, background_hex=bg.hex,
            ))
    return out


def check_text_contrast(screen, config=DEFAULT_CONFIG, warnings=None):
    """Flag text elements whose sampled colours contrast below the threshold.

    Without a screenshot a ``missing-screenshot`` warning is appended to
    ``warnings``; when no warning sink is given :class:`MissingScreenshot` is
    raised instead.
    """
    return _contrast_check(
        IssueType.TEXT_CONTRAST, screen, config,
        lambda n: _is_text_class(n.class_name) and bool((n.text or "").strip()),
        warnings,
    )


def check_image_contrast(screen, config=DEFAULT_CONFIG, warnings=None):
    return _contrast_check(
        IssueType.IMAGE_CONTRAST, screen, config,
        lambda n: _is_image_class(n.class_name),
        warnings,
    )


def check_link(screen, config=DEFAULT_CONFIG):
    out = []
    for fn in flatten(screen.root):
        for url in fn.node.link_urls:
            if not _SCHEME_RE.match(url):
                out.append(_issue(IssueType.LINK, screen, fn,
                                  f"link {url!r} is not an absolute URL", url=url))
    return out


_CONTRAST_CHECKS = (check_text_contrast, check_image_contrast)

_CHECKS = (
    check_item_label,
    check_item_type_label,
    check_editable_item_label,
    check_unsupported_type,
    check_clickable_overlap,
    check_duplicate_description,
    check_touch_target,
    check_text_contrast,
    check_image_contrast,
    check_link,
)


def audit_screen(screen, config=DEFAULT_CONFIG, warnings=None):
    """Run all ten checks in :class:`IssueType` order.

    Problems are appended to ``warnings``; a failing check never stops the
    remaining ones. Screens without a screenshot skip the two contrast checks.
    """
    if warnings is None:
        warnings = []
    issues = []
    for check in _CHECKS:
        try:
            if check in _CONTRAST_CHECKS:
                if screen.pixels is None:
                    continue
                issues.extend(check(screen, config, warnings))
            else:
                issues.extend(check(screen, config))
        except Exception as e:  # noqa: BLE001 - one broken rule must not hide the rest
            warnings.append(AuditWarning("check-failed", screen.activity_name,
                                         f"{check.__name__}: {e}"))
    if screen.pixels is None:
        warnings.append(AuditWarning("missing-screenshot", screen.activity_name,
                                     "screen has no screenshot; contrast checks skipped"))
    return issues
