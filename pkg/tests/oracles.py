"""Deliberately naive reference implementations used as test oracles."""
from __future__ import annotations

from fractions import Fraction

import mpmath

from a11yaudit.intent_flow import Call, ConstString, LIFECYCLE_METHODS, Move, method_id

mpmath.mp.dps = 40


def wcag_luminance(hex_color):
    """Relative luminance evaluated in 40-digit arithmetic from the formula text."""
    h = hex_color.lstrip("#")
    chans = []
    for k in (0, 2, 4):
        x = mpmath.mpf(int(h[k:k + 2], 16)) / 255
        chans.append(x / mpmath.mpf("12.92") if x <= mpmath.mpf("0.03928")
                     else ((x + mpmath.mpf("0.055")) / mpmath.mpf("1.055")) ** mpmath.mpf("2.4"))
    r, g, b = chans
    return mpmath.mpf("0.2126") * r + mpmath.mpf("0.7152") * g + mpmath.mpf("0.0722") * b


def wcag_ratio(a, b):
    la, lb = wcag_luminance(a), wcag_luminance(b)
    hi, lo = max(la, lb), min(la, lb)
    return float((hi + mpmath.mpf("0.05")) / (lo + mpmath.mpf("0.05")))


def _all_nodes(node, path=()):
    out = [(path, node)]
    for i, c in enumerate(node.children):
        out.extend(_all_nodes(c, path + (i,)))
    return out


def overlap_pairs(root, threshold=Fraction(9, 10)):
    """Every unordered pair of clickable nodes, checked one by one."""
    nodes = [(p, n) for p, n in _all_nodes(root) if n.clickable or n.long_clickable]
    found = set()
    for pa, a in nodes:
        for pb, b in nodes:
            if pa >= pb:
                continue
            if pa == pb[:len(pa)] or pb == pa[:len(pb)]:
                continue
            w = min(a.bounds.right, b.bounds.right) - max(a.bounds.left, b.bounds.left)
            h = min(a.bounds.bottom, b.bounds.bottom) - max(a.bounds.top, b.bounds.top)
            small = min(a.bounds.width * a.bounds.height, b.bounds.width * b.bounds.height)
            if w <= 0 or h <= 0 or small == 0:
                continue
            if Fraction(w * h, small) >= threshold:
                found.add(frozenset((pa, pb)))
    return found


def _speak(n):
    d = (n.content_description or "").strip()
    return d if d else (n.text or "").strip()


def duplicate_groups(root):
    """Groups of focusable nodes with equal speakable text, by pairwise comparison."""
    nodes = [(p, n) for p, n in _all_nodes(root)
             if n.enabled and (n.focusable or n.clickable or n.long_clickable) and _speak(n)]
    groups = []
    for i, (p, n) in enumerate(nodes):
        if any(_speak(nodes[j][1]) == _speak(n) for j in range(i)):
            continue
        members = [q for q, m in nodes if _speak(m) == _speak(n)]
        if len(members) > 1:
            groups.append(members)
    return groups


# -- extras extraction --------------------------------------------------------------

_INTENT = {"getStringExtra": "String", "getIntExtra": "Integer", "getLongExtra": "Long",
           "getFloatExtra": "Float", "getBooleanExtra": "Boolean"}
_BUNDLE = {"getString": "String", "getInt": "Integer", "getLong": "Long",
           "getFloat": "Float", "getBoolean": "Boolean"}


def _value_of(stmts, upto, var):
    """Forward-simulate a method prefix: what does ``var`` hold before ``upto``?"""
    env = {}
    for s in stmts[:upto]:
        if isinstance(s, ConstString):
            env[s.var] = ("const", s.value)
        elif isinstance(s, Move):
            env[s.dst] = env.get(s.src, ("unknown",))
        elif isinstance(s, Call) and s.result_var is not None:
            env[s.result_var] = ("call", s.api)
    return env.get(var, ("unknown",))


def extras(ir, cls, max_depth=10):
    """Set of (key, type, provenance) read by getters reachable from lifecycle methods."""
    roots = {method_id(cls.name, m) for m in cls.methods if m.name in LIFECYCLE_METHODS}
    dist = {r: 0 for r in roots}
    changed = True
    while changed:
        changed = False
        for a, b in ir.call_edges:
            if a in dist and dist[a] < max_depth and dist.get(b, max_depth + 1) > dist[a] + 1:
                dist[b] = dist[a] + 1
                changed = True
    out = set()
    for mid in dist:
        stmts = ir.method(mid).statements
        for i, s in enumerate(stmts):
            if not isinstance(s, Call) or not s.arg_vars:
                continue
            owner, _, name = s.api.rpartition(".")
            if owner == "android.content.Intent" and name in _INTENT:
                vt, prov = _INTENT[name], "Direct"
            elif owner in ("android.os.Bundle", "android.os.BaseBundle") and name in _BUNDLE:
                if _value_of(stmts, i, s.receiver_var) != ("call", "android.content.Intent.getExtras"):
                    continue
                vt, prov = _BUNDLE[name], "Bundle"
            else:
                continue
            key = _value_of(stmts, i, s.arg_vars[0])
            if key[0] == "const":
                out.add((key[1], vt, prov))
    return out
