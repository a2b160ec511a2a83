"""Typed model of a captured UI screen.

Hierarchies come from UI Automator style XML dumps; screenshots are PNG files
decoded into a :class:`PixelGrid`. Everything here is immutable.
"""
from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, NamedTuple, Optional

import numpy as np

from . import kernels
from .color import LINEAR, Color, relative_luminance
from .errors import DegenerateRegion, MalformedBounds, MalformedXml, UniformRegion

DEFAULT_DENSITY_DPI = 420
MAX_CLUSTER_ITERATIONS = 20

_BOUNDS_RE = re.compile(r"^\s*\[(-?\d+),(-?\d+)\]\[(-?\d+),(-?\d+)\]\s*$")
_EDITABLE_SUFFIXES = ("EditText", "AutoCompleteTextView")


@dataclass(frozen=True, slots=True)
class Bounds:
    left: int
    top: int
    right: int
    bottom: int

    def __post_init__(self):
        if min(self.left, self.top, self.right, self.bottom) < 0:
            raise MalformedBounds(f"negative coordinate in {self}")
        if self.right < self.left or self.bottom < self.top:
            raise MalformedBounds(f"inverted bounds {self}")

    @classmethod
    def parse(cls, text):
        m = _BOUNDS_RE.match(text or "")
        if not m:
            raise MalformedBounds(f"bounds {text!r} do not match [l,t][r,b]")
        return cls(*(int(g) for g in m.groups()))

    @property
    def width(self):
        return self.right - self.left

    @property
    def height(self):
        return self.bottom - self.top

    @property
    def area(self):
        return self.width * self.height

    def intersection_area(self, other):
        w = min(self.right, other.right) - max(self.left, other.left)
        h = min(self.bottom, other.bottom) - max(self.top, other.top)
        return w * h if w > 0 and h > 0 else 0

    def __str__(self):
        return f"[{self.left},{self.top}][{self.right},{self.bottom}]"


@dataclass(frozen=True, slots=True)
class ViewNode:
    class_name: str
    bounds: Bounds
    resource_id: Optional[str] = None
    text: Optional[str] = None
    content_description: Optional[str] = None
    clickable: bool = False
    long_clickable: bool = False
    focusable: bool = False
    editable: bool = False
    enabled: bool = True
    link_urls: tuple = ()
    children: tuple = ()

    def __post_init__(self):
        if not self.class_name:
            raise ValueError("class_name must be non-empty")

    @property
    def short_class(self):
        return self.class_name.rsplit(".", 1)[-1]


@dataclass(frozen=True, slots=True)
class PixelGrid:
    """Row-major RGBA samples, four bytes per pixel."""

    width: int
    height: int
    rgba: bytes = field(repr=False)

    def __post_init__(self):
        if len(self.rgba) != self.width * self.height * 4:
            raise ValueError(
                f"pixel buffer holds {len(self.rgba)} bytes, "
                f"expected {self.width}x{self.height}x4"
            )

    def array(self):
        return np.frombuffer(self.rgba, dtype=np.uint8).reshape(self.height, self.width, 4)

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] not in (3, 4):
            raise ValueError("expected an (h, w, 3|4) array")
        if arr.shape[2] == 3:
            alpha = np.full(arr.shape[:2] + (1,), 255, dtype=np.uint8)
            arr = np.concatenate([arr, alpha], axis=2)
        h, w = arr.shape[:2]
        return cls(w, h, np.ascontiguousarray(arr).tobytes())


@dataclass(frozen=True, slots=True)
class Screen:
    activity_name: str
    root: ViewNode
    density_dpi: int = DEFAULT_DENSITY_DPI
    width_px: int = 0
    height_px: int = 0
    pixels: Optional[PixelGrid] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.density_dpi <= 0:
            raise ValueError("density_dpi must be positive")
        if self.pixels is not None and (
            self.pixels.width != self.width_px or self.pixels.height != self.height_px
        ):
            raise ValueError(
                f"screenshot is {self.pixels.width}x{self.pixels.height}, "
                f"screen is {self.width_px}x{self.height_px}"
            )

    def node_at(self, path):
        node = self.root
        for i in path:
            node = node.children[i]
        return node

    def with_pixels(self, pixels):
        return Screen(
            self.activity_name, self.root, self.density_dpi,
            self.width_px, self.height_px, pixels,
        )


class FlatNode(NamedTuple):
    index: int            # pre-order position
    path: tuple           # child indices from the root
    node: ViewNode
    end: int              # pre-order index of the last descendant
    parent: Optional[int]


def flatten(root):
    """Pre-order list of every node with its path and subtree extent."""
    out = []

    def visit(node, path, parent):
        idx = len(out)
        out.append(None)
        for i, child in enumerate(node.children):
            visit(child, path + (i,), idx)
        out[idx] = FlatNode(idx, path, node, len(out) - 1, parent)

    visit(root, (), None)
    return out


def iter_nodes(root) -> Iterator[tuple]:
    """Yield ``(path, node)`` in pre-order."""
    stack = [((), root)]
    while stack:
        path, node = stack.pop()
        yield path, node
        for i in range(len(node.children) - 1, -1, -1):
            stack.append((path + (i,), node.children[i]))


def format_path(path):
    return "/".join(str(i) for i in path)


def px_to_dp(px, density_dpi):
    """Convert pixels to density-independent pixels, exactly."""
    return Fraction(px * 160, density_dpi)


def speakable_text(node):
    desc = (node.content_description or "").strip()
    if desc:
        return desc
    return (node.text or "").strip()


# -- parsing -----------------------------------------------------------------

def _flag(attrs, name):
    return attrs.get(name, "").strip().lower() == "true"


def _opt(attrs, name):
    v = attrs.get(name)
    return v if v else None


def _node_from_element(el):
    if el.tag != "node":
        raise MalformedXml(f"unexpected element <{el.tag}>")
    a = el.attrib
    cls = a.get("class", "").strip()
    if not cls:
        raise MalformedXml("node without a class attribute")
    links = tuple(u.strip() for u in a.get("link-urls", "").split(",") if u.strip())
    editable = _flag(a, "editable") if "editable" in a else cls.endswith(_EDITABLE_SUFFIXES)
    return ViewNode(
        class_name=cls,
        bounds=Bounds.parse(a.get("bounds")),
        resource_id=_opt(a, "resource-id"),
        text=_opt(a, "text"),
        content_description=_opt(a, "content-desc"),
        clickable=_flag(a, "clickable"),
        long_clickable=_flag(a, "long-clickable"),
        focusable=_flag(a, "focusable"),
        editable=editable,
        enabled=_flag(a, "enabled") if "enabled" in a else False,
        link_urls=links,
        children=tuple(_node_from_element(c) for c in el if c.tag == "node"),
    )


def _int_attr(attrs, name, default):
    v = attrs.get(name)
    if v is None or v == "":
        return default
    try:
        return int(v)
    except ValueError:
        raise MalformedXml(f"attribute {name}={v!r} is not an integer") from None


def parse_hierarchy(xml_text, activity_name=None):
    """Parse a hierarchy dump into a :class:`Screen` without pixels.

    The document root is either ``<hierarchy>`` wrapping exactly one
    ``<node>``, or a bare ``<node>``. Screen attributes (``activity``,
    ``density-dpi``, ``width-px``, ``height-px``) are read from the root.
    """
    try:
        doc = ET.fromstring(xml_text)
    except ET.ParseError as e:
        raise MalformedXml(f"unparseable hierarchy: {e}") from None
    if doc.tag == "node":
        top = doc
    else:
        nodes = [c for c in doc if c.tag == "node"]
        if len(nodes) != 1:
            raise MalformedXml(f"expected one root <node>, found {len(nodes)}")
        top = nodes[0]
    root = _node_from_element(top)
    attrs = doc.attrib
    return Screen(
        activity_name=attrs.get("activity") or activity_name or "",
        root=root,
        density_dpi=_int_attr(attrs, "density-dpi", DEFAULT_DENSITY_DPI),
        width_px=_int_attr(attrs, "width-px", root.bounds.right),
        height_px=_int_attr(attrs, "height-px", root.bounds.bottom),
    )


def _bool(v):
    return "true" if v else "false"


def _node_element(node):
    a = {
        "class": node.class_name,
        "bounds": str(node.bounds),
        "resource-id": node.resource_id or "",
        "text": node.text or "",
        "content-desc": node.content_description or "",
        "clickable": _bool(node.clickable),
        "long-clickable": _bool(node.long_clickable),
        "focusable": _bool(node.focusable),
        "editable": _bool(node.editable),
        "enabled": _bool(node.enabled),
    }
    if node.link_urls:
        a["link-urls"] = ",".join(node.link_urls)
    el = ET.Element("node", a)
    el.extend(_node_element(c) for c in node.children)
    return el


def serialize_hierarchy(screen):
    """Canonical XML form; ``parse_hierarchy`` inverts it exactly."""
    doc = ET.Element("hierarchy", {
        "activity": screen.activity_name,
        "density-dpi": str(screen.density_dpi),
        "width-px": str(screen.width_px),
        "height-px": str(screen.height_px),
    })
    doc.append(_node_element(screen.root))
    ET.indent(doc)
    return ET.tostring(doc, encoding="unicode") + "\n"


# -- screenshots -------------------------------------------------------------

def load_png(path):
    from PIL import Image

    with Image.open(path) as im:
        rgba = im.convert("RGBA")
        return PixelGrid(rgba.width, rgba.height, rgba.tobytes())


def save_png(pixels, path):
    from PIL import Image

    Image.frombytes("RGBA", (pixels.width, pixels.height), pixels.rgba).save(path)


def load_screen(xml_path, png_path=None):
    """Load one screen bundle member; the PNG is optional."""
    xml_path = Path(xml_path)
    screen = parse_hierarchy(xml_path.read_text(encoding="utf-8"), activity_name=xml_path.stem)
    if png_path is not None and Path(png_path).exists():
        screen = screen.with_pixels(load_png(png_path))
    return screen


def composite_over_white(rgba):
    """(n, 4) uint8 RGBA to (n, 3) uint8 RGB, alpha-blended onto white."""
    rgb = rgba[:, :3].astype(np.int64)
    a = rgba[:, 3:4].astype(np.int64)
    out = (rgb * a + 255 * (255 - a) + 127) // 255
    return out.astype(np.uint8)


def _centroid(sums, n):
    return Color(*((2 * s + n) // (2 * n) for s in sums))


def sample_region_colors(pixels, bounds):
    """Estimate (foreground, background) colours inside ``bounds``.

    Two-means clustering of the opaque-composited pixels; the less populous
    cluster is the foreground. Raises :class:`DegenerateRegion` when fewer than
    four pixels are on screen and :class:`UniformRegion` when the region
    cannot be split into two distinct colours.
    """
    left = max(bounds.left, 0)
    top = max(bounds.top, 0)
    right = min(bounds.right, pixels.width)
    bottom = min(bounds.bottom, pixels.height)
    if right <= left or bottom <= top or (right - left) * (bottom - top) < 4:
        raise DegenerateRegion(f"region {bounds} has fewer than 4 on-screen pixels")
    region = pixels.array()[top:bottom, left:right].reshape(-1, 4)
    rgb = composite_over_white(region)
    first = rgb[0]
    if (rgb == first).all():
        c = Color(int(first[0]), int(first[1]), int(first[2]))
        raise UniformRegion(c)
    s0, n0, s1, n1 = kernels.two_means(rgb, LINEAR, MAX_CLUSTER_ITERATIONS)
    if n0 == 0 or n1 == 0:
        sums = tuple(a + b for a, b in zip(s0, s1))
        raise UniformRegion(_centroid(sums, n0 + n1))
    c0 = _centroid(s0, n0)
    c1 = _centroid(s1, n1)
    if n0 < n1:
        fg, bg = c0, c1
    elif n1 < n0:
        fg, bg = c1, c0
    elif relative_luminance(c1) < relative_luminance(c0):
        fg, bg = c1, c0
    else:
        fg, bg = c0, c1
    if fg == bg:
        raise UniformRegion(fg, bg)
    return fg, bg
