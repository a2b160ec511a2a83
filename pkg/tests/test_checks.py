import json
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from a11yaudit.checks import (
    DEFAULT_CONFIG, ISSUE_TYPES, CheckConfig, Issue, IssueType, audit_screen,
    check_clickable_overlap, check_duplicate_description, check_editable_item_label,
    check_image_contrast, check_item_label, check_item_type_label, check_link,
    check_text_contrast, check_touch_target, check_unsupported_type, is_screen_reader_focusable,
)
from a11yaudit.color import Color, contrast_ratio, relative_luminance
from a11yaudit.errors import MissingScreenshot
from a11yaudit.ui_model import Bounds, Screen, ViewNode, flatten, format_path, px_to_dp

import oracles
from builders import (
    FLASH_CLASS, PLANTED_CASES, PLANTED_CONFIG, all_types_screen, button, case_screen,
    make_screen, node, text_region_screen,
)

EACH = CheckConfig(report_each_duplicate=True)


def screen_of(*children, density=160, w=480, h=800):
    root = ViewNode("android.widget.FrameLayout", Bounds(0, 0, w, h), children=tuple(children))
    return Screen("Main", root, density, w, h)


def types(issues):
    return [i.issue_type for i in issues]


# -- colour maths ------------------------------------------------------------------

def test_luminance_extremes():
    assert relative_luminance(Color(255, 255, 255)) == pytest.approx(1.0, abs=1e-12)
    assert relative_luminance(Color(0, 0, 0)) == 0.0


def test_luminance_999999_frozen():
    # 40-digit evaluation of the formula gives 0.318546778
    lum = relative_luminance(Color.from_hex("#999999"))
    assert 0.30 < lum < 0.34
    assert lum == pytest.approx(0.318546778, abs=1e-9)
    assert lum == pytest.approx(float(oracles.wcag_luminance("#999999")), abs=1e-12)


def test_contrast_examples():
    assert contrast_ratio(Color(0, 0, 0), Color(255, 255, 255)) == pytest.approx(21.0)
    c = Color.from_hex("#ABCDEF")
    assert contrast_ratio(c, c) == 1.0
    assert contrast_ratio(Color.from_hex("#999999"), Color.from_hex("#FFFFFF")) < 3.0


# frozen from the 40-digit oracle
FROZEN_RATIOS = {
    ("#999999", "#FFFFFF"): 2.84903, ("#FFFFFF", "#AAAAAA"): 2.32312,
    ("#B2B2B2", "#FFFFFF"): 2.12035, ("#878787", "#FFFFFF"): 3.59243,
    ("#9E9E9E", "#FFFFFF"): 2.67916, ("#E8E8E8", "#FFFFFF"): 1.22527,
    ("#DE8F94", "#EFEFEF"): 2.15812, ("#9D797E", "#C88886"): 1.33857,
    ("#008CCA", "#B05656"): 1.29980, ("#C46A9E", "#7755CD"): 1.48852,
    ("#6CA26C", "#FFFFFF"): 2.99047, ("#929692", "#FFFFFF"): 3.00009,
}


@pytest.mark.parametrize("pair,expected", sorted(FROZEN_RATIOS.items()))
def test_contrast_frozen_against_oracle(pair, expected):
    got = contrast_ratio(*map(Color.from_hex, pair))
    assert got == pytest.approx(expected, abs=1e-5)
    assert got == pytest.approx(oracles.wcag_ratio(*pair), abs=1e-9)


channel = st.integers(0, 255)
colors = st.builds(Color, channel, channel, channel)


@given(colors, colors)
def test_contrast_symmetric_and_bounded(a, b):
    r = contrast_ratio(a, b)
    assert r == contrast_ratio(b, a)
    assert 1.0 <= r <= 21.0 + 1e-9
    assert contrast_ratio(a, a) == 1.0


@given(colors, st.sampled_from("rgb"), st.integers(1, 255))
def test_luminance_monotone_per_channel(c, ch, bump):
    v = getattr(c, ch)
    assume(v + bump <= 255)
    brighter = Color(**{**{"r": c.r, "g": c.g, "b": c.b}, ch: v + bump})
    assert relative_luminance(brighter) >= relative_luminance(c)


@given(st.lists(channel, min_size=3, max_size=3, unique=True).map(sorted))
def test_grayscale_monotonicity(gs):
    g1, g2, g3 = (Color(g, g, g) for g in gs)
    assert contrast_ratio(g1, g3) >= contrast_ratio(g2, g3)


# -- config ------------------------------------------------------------------------

def test_config_defaults():
    c = CheckConfig()
    assert c.contrast_threshold == 3 and c.touch_target_min_dp == 48
    assert c.overlap_coverage_threshold == Fraction(9, 10)
    assert set(c.redundant_words) == {"button", "checkbox", "switch", "image", "view", "tab", "link"}


@pytest.mark.parametrize("kw", [dict(contrast_threshold=0), dict(touch_target_min_dp=-1),
                                dict(overlap_coverage_threshold=Fraction(11, 10)),
                                dict(description_scope="page")])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        CheckConfig(**kw)


def test_issue_type_names():
    assert len(ISSUE_TYPES) == 10
    assert [t.value for t in ISSUE_TYPES] == [
        "ItemLabel", "ItemTypeLabel", "EditableItemLabel", "UnsupportedItemType",
        "ClickableItem", "ItemDescription", "TouchTarget", "TextContrast", "ImageContrast", "Link"]
    assert IssueType.ITEM_DESCRIPTION.label == "Item descriptions"


def test_issue_dict_round_trip():
    i = Issue(IssueType.TOUCH_TARGET, "A", (0, 2), "x.Button", "id/ok", Bounds(1, 2, 3, 4),
              {"width_dp": 2.0, "height_dp": 2.0}, "small")
    assert Issue.from_dict(json.loads(json.dumps(i.to_dict()))) == i


# -- individual rules ------------------------------------------------------------

def test_item_label():
    s = screen_of(
        node("ImageButton", (0, 0, 96, 96), clickable=True),
        node("ImageView", (0, 100, 96, 196)),
        button((0, 200, 96, 296), "OK"),
        node("ImageButton", (0, 300, 96, 396), clickable=True, enabled=False),
        node("EditText", (0, 400, 96, 496), focusable=True, editable=True),
    )
    got = check_item_label(s)
    assert [i.node_path for i in got] == [(0,)]


def test_focusability():
    n = node("View", (0, 0, 1, 1), long_clickable=True)
    assert is_screen_reader_focusable(n)
    assert not is_screen_reader_focusable(node("View", (0, 0, 1, 1), focusable=True, enabled=False))


@pytest.mark.parametrize("cls,desc,word", [
    ("Button", "Submit button", "button"), ("ImageView", "image of cat", "image"),
    ("Button", "Submit", None), ("Button", "Buttons", None), ("Switch", "Wi-Fi SWITCH", "switch"),
    ("View", "review", None), ("TextView", "tab-bar", "tab"),
])
def test_item_type_label(cls, desc, word):
    got = check_item_type_label(screen_of(node(cls, (0, 0, 50, 50), content_description=desc)))
    assert [i.metrics["redundant_word"] for i in got] == ([word] if word else [])


def test_item_type_label_custom_words():
    s = screen_of(node("Button", (0, 0, 9, 9), content_description="OK icon"))
    assert check_item_type_label(s, CheckConfig(redundant_words=("icon",)))
    assert not check_item_type_label(s)


@pytest.mark.parametrize("cls,kw,flagged", [
    ("EditText", dict(content_description="Enter name", editable=True), True),
    ("EditText", dict(text="Your name", editable=True), False),
    ("TextView", dict(content_description="x"), False),
    ("EditText", dict(content_description="   ", editable=True), False),
])
def test_editable_item_label(cls, kw, flagged):
    assert bool(check_editable_item_label(screen_of(node(cls, (0, 0, 9, 9), **kw)))) == flagged


def test_unsupported_type():
    cfg = CheckConfig(unsupported_classes=(FLASH_CLASS,))
    focus = node(FLASH_CLASS, (0, 0, 9, 9), focusable=True)
    quiet = node(FLASH_CLASS, (0, 0, 9, 9))
    assert types(check_unsupported_type(screen_of(focus), cfg)) == [IssueType.UNSUPPORTED_ITEM_TYPE]
    assert check_unsupported_type(screen_of(quiet), cfg) == []
    assert check_unsupported_type(screen_of(focus)) == []


def test_unsupported_by_simple_name_and_allow_list():
    focus = node(FLASH_CLASS, (0, 0, 9, 9), focusable=True)
    assert check_unsupported_type(screen_of(focus), CheckConfig(unsupported_classes=("FlashSurface",)))
    allow = CheckConfig(supported_classes=("android.",))
    assert check_unsupported_type(screen_of(focus), allow)
    assert not check_unsupported_type(screen_of(button((0, 0, 9, 9), "a")), allow)


def test_clickable_identical_bounds_both_flagged():
    s = screen_of(button((0, 0, 100, 100), "a"), button((0, 0, 100, 100), "b"))
    got = check_clickable_overlap(s, EACH)
    assert [i.node_path for i in got] == [(0,), (1,)]
    assert [i.metrics["overlap_partner_path"] for i in got] == ["1", "0"]
    assert got[0].metrics["overlap_coverage"] == 1.0


def test_clickable_pair_reported_once_by_default():
    s = screen_of(button((0, 0, 100, 100), "a"), button((0, 0, 100, 100), "b"))
    got = check_clickable_overlap(s)
    assert [(i.node_path, i.metrics["overlap_partner_path"]) for i in got] == [((0,), "1")]


def test_clickable_nested_not_flagged():
    inner = button((10, 10, 90, 90), "in")
    outer = ViewNode("android.widget.LinearLayout", Bounds(0, 0, 100, 100), clickable=True,
                     children=(inner,))
    assert check_clickable_overlap(screen_of(outer), EACH) == []


def test_clickable_coverage_threshold():
    # 90 of 100 rows overlap: exactly at the 0.9 threshold
    s = screen_of(button((0, 0, 100, 100), "a"), button((0, 10, 100, 110), "b"))
    assert len(check_clickable_overlap(s, EACH)) == 2
    s = screen_of(button((0, 0, 100, 100), "a"), button((0, 11, 100, 111), "b"))
    assert check_clickable_overlap(s, EACH) == []


def test_clickable_adjacent_not_flagged():
    s = screen_of(button((0, 0, 100, 100), "a"), button((100, 0, 200, 100), "b"))
    assert check_clickable_overlap(s) == []


def test_duplicate_description_groups():
    s = screen_of(button((0, 0, 60, 60), content_description="game"),
                  button((0, 100, 60, 160), "video"),
                  button((0, 200, 60, 260), content_description=" game "),
                  button((0, 300, 60, 360), "video"),
                  button((0, 400, 60, 460), "Video"),
                  button((0, 500, 60, 560), "  "))
    got = check_duplicate_description(s, EACH)
    assert [(i.node_path, i.metrics["duplicate_group"]) for i in got] == \
        [((0,), 1), ((1,), 2), ((2,), 1), ((3,), 2)]
    once = check_duplicate_description(s)
    assert [(i.node_path, i.metrics["group_size"]) for i in once] == [((0,), 2), ((1,), 2)]
    assert once[0].metrics["duplicate_paths"] == "0;2"


def test_duplicate_description_empty_never_grouped():
    s = screen_of(button((0, 0, 60, 60)), button((0, 100, 60, 160)))
    assert check_duplicate_description(s, EACH) == []


def test_duplicate_description_container_scope():
    a = ViewNode("x.Row", Bounds(0, 0, 100, 100), children=(button((0, 0, 50, 50), "x"),))
    b = ViewNode("x.Row", Bounds(0, 100, 100, 200), children=(button((0, 100, 50, 150), "x"),))
    s = screen_of(a, b)
    assert len(check_duplicate_description(s, EACH)) == 2
    assert check_duplicate_description(s, CheckConfig(description_scope="container")) == []


@pytest.mark.parametrize("box,density,flagged", [
    ((0, 0, 47, 60), 160, True), ((0, 0, 48, 48), 160, False), ((0, 0, 120, 120), 320, False),
    ((0, 0, 60, 47), 160, True), ((0, 0, 125, 200), 420, True), ((0, 0, 126, 126), 420, False),
])
def test_touch_target(box, density, flagged):
    got = check_touch_target(screen_of(button(box, "x"), density=density))
    assert bool(got) == flagged
    if flagged:
        b = Bounds(*box)
        assert got[0].metrics["width_dp"] == round(float(px_to_dp(b.width, density)), 2)


def test_touch_target_metrics_and_scope():
    got = check_touch_target(screen_of(button((0, 0, 47, 60), "x")))
    assert got[0].metrics == {"width_dp": 47.0, "height_dp": 60.0}
    assert check_touch_target(screen_of(node("TextView", (0, 0, 10, 10)))) == []
    assert check_touch_target(screen_of(button((0, 0, 10, 10), "x", enabled=False))) == []
    assert check_touch_target(screen_of(node("View", (0, 0, 10, 10), long_clickable=True)))


@given(st.integers(0, 400), st.integers(0, 400), st.sampled_from([120, 160, 213, 240, 320, 420, 480, 640]))
def test_touch_target_matches_arithmetic(w, h, dpi):
    got = check_touch_target(screen_of(button((0, 0, w, h), "x"), density=dpi, w=500, h=500))
    expected = min(Fraction(w * 160, dpi), Fraction(h * 160, dpi)) < 48
    assert bool(got) == expected


def test_text_contrast_low():
    got = check_text_contrast(text_region_screen("#999999"))
    assert types(got) == [IssueType.TEXT_CONTRAST]
    assert got[0].metrics == {"contrast_ratio": 2.85, "foreground_hex": "#999999",
                              "background_hex": "#FFFFFF"}


def test_text_contrast_black_on_white():
    assert check_text_contrast(text_region_screen("#000000")) == []


def test_text_contrast_white_on_white_is_warning():
    warnings = []
    assert check_text_contrast(text_region_screen("#FFFFFF"), DEFAULT_CONFIG, warnings) == []
    assert [w.code for w in warnings] == ["unsampleable"]


@pytest.mark.parametrize("fg,flagged", [("#6CA26C", True), ("#929692", False),
                                        ("#959595", True), ("#949494", False)])
def test_text_contrast_boundary(fg, flagged):
    got = check_text_contrast(text_region_screen(fg))
    assert bool(got) == flagged


def test_threshold_uses_unrounded_ratio():
    # 2.99047 rounds to 2.99 but 2.995 would round to 3.0 and must still be flagged
    got = check_text_contrast(text_region_screen("#959595"))
    assert got[0].metrics["contrast_ratio"] == 3.0


def test_text_contrast_needs_text():
    s = make_screen("S", [(node("TextView", (0, 0, 100, 50)), [("#999999", "#FFFFFF", 0.4)])])
    assert check_text_contrast(s) == []


def test_text_contrast_missing_screenshot():
    s = text_region_screen("#999999").with_pixels(None)
    with pytest.raises(MissingScreenshot):
        check_text_contrast(s)


def test_image_contrast():
    s = make_screen("S", [(node("ImageButton", (0, 0, 96, 96), content_description="x",
                                clickable=True), [("#DE8F94", "#EFEFEF", 0.3)])])
    got = check_image_contrast(s)
    assert types(got) == [IssueType.IMAGE_CONTRAST]
    assert got[0].metrics["contrast_ratio"] == 2.16
    assert check_text_contrast(s) == []


def test_image_contrast_clean_and_uniform():
    s = make_screen("S", [(node("ImageView", (0, 0, 96, 96)), [("#000000", "#FFFFFF", 0.3)])])
    assert check_image_contrast(s) == []
    s = make_screen("S", [(node("ImageView", (0, 0, 96, 96)), [("#EEEEEE", "#EEEEEE", 0.3)])])
    w = []
    assert check_image_contrast(s, DEFAULT_CONFIG, w) == [] and len(w) == 1


@pytest.mark.parametrize("urls,n", [(("/settings",), 1), (("https://example.com",), 0),
                                    (("mailto:a@b.c", "page2"), 1), (("1http://x",), 1),
                                    (("android-app://x",), 0)])
def test_link(urls, n):
    got = check_link(screen_of(node("TextView", (0, 0, 9, 9), text="t", link_urls=urls)))
    assert len(got) == n
    assert all(i.metrics["url"] in urls for i in got)


# -- oracles on generated screens -------------------------------------------------

@st.composite
def oracle_screens(draw, max_nodes=8):
    n = draw(st.integers(0, max_nodes))
    specs = []
    for _ in range(n):
        l, t = draw(st.integers(0, 12)), draw(st.integers(0, 12))
        specs.append(dict(
            box=(l, t, l + draw(st.integers(0, 8)), t + draw(st.integers(0, 8))),
            clickable=draw(st.booleans()), long_clickable=draw(st.booleans()),
            focusable=draw(st.booleans()), enabled=draw(st.integers(0, 3)) > 0,
            text=draw(st.sampled_from([None, "", "a", " a", "b", "B", "  "])),
            desc=draw(st.sampled_from([None, None, "a", "c", " "])),
            nest=draw(st.booleans()),
        ))
    # build bottom-up: a node with nest=True becomes the parent of the following node
    child = None
    roots = []
    for spec in reversed(specs):
        kids = (child,) if (spec["nest"] and child is not None) else ()
        if kids == () and child is not None:
            roots.append(child)
        child = ViewNode("x.V", Bounds(*spec["box"]), text=spec["text"],
                         content_description=spec["desc"], clickable=spec["clickable"],
                         long_clickable=spec["long_clickable"], focusable=spec["focusable"],
                         enabled=spec["enabled"], children=kids)
    if child is not None:
        roots.append(child)
    return screen_of(*reversed(roots), w=30, h=30)


@given(oracle_screens())
@settings(max_examples=300)
def test_overlap_matches_bruteforce(s):
    flat = flatten(s.root)
    got = {frozenset((i.node_path, flat_path(flat, i.metrics["overlap_partner_path"])))
           for i in check_clickable_overlap(s, EACH)}
    assert got == oracles.overlap_pairs(s.root)


def flat_path(flat, text):
    return next(f.path for f in flat if format_path(f.path) == text)


@given(oracle_screens())
@settings(max_examples=300)
def test_duplicates_match_bruteforce(s):
    got = {}
    for i in check_duplicate_description(s, EACH):
        got.setdefault(i.metrics["duplicate_group"], []).append(i.node_path)
    assert [got[k] for k in sorted(got)] == oracles.duplicate_groups(s.root)


# -- the whole engine ---------------------------------------------------------------

def test_audit_planted_all_types():
    got = audit_screen(all_types_screen(), PLANTED_CONFIG)
    assert types(got) == list(ISSUE_TYPES)


def test_audit_clean_all_types():
    assert audit_screen(all_types_screen(clean=True), PLANTED_CONFIG) == []


@pytest.mark.parametrize("kind", list(PLANTED_CASES))
def test_audit_each_planted_case(kind):
    assert types(audit_screen(case_screen(kind), PLANTED_CONFIG)) == [kind]
    assert audit_screen(case_screen(kind, clean=True), PLANTED_CONFIG) == []


def test_audit_without_screenshot_runs_other_checks():
    warnings = []
    got = audit_screen(all_types_screen(with_pixels=False), PLANTED_CONFIG, warnings)
    assert types(got) == [t for t in ISSUE_TYPES
                          if t not in (IssueType.TEXT_CONTRAST, IssueType.IMAGE_CONTRAST)]
    assert [w.code for w in warnings] == ["missing-screenshot"]


def test_audit_is_pure_and_paths_resolve():
    s = all_types_screen()
    a = [json.dumps(i.to_dict()) for i in audit_screen(s, PLANTED_CONFIG)]
    b = [json.dumps(i.to_dict()) for i in audit_screen(s, PLANTED_CONFIG)]
    assert a == b
    for i in audit_screen(s, PLANTED_CONFIG):
        assert s.node_at(i.node_path).bounds == i.bounds


@given(oracle_screens())
@settings(max_examples=100)
def test_audit_order_and_paths(s):
    got = audit_screen(s, EACH)
    order = [ISSUE_TYPES.index(i.issue_type) for i in got]
    assert order == sorted(order)
    for i in got:
        assert s.node_at(i.node_path).bounds == i.bounds


def test_audit_survives_failing_check(monkeypatch):
    import a11yaudit.checks as checks

    def boom(screen, config):
        raise RuntimeError("boom")

    monkeypatch.setattr(checks, "_CHECKS", (boom,) + checks._CHECKS[1:])
    warnings = []
    got = checks.audit_screen(case_screen(IssueType.LINK), PLANTED_CONFIG, warnings)
    assert types(got) == [IssueType.LINK]
    assert [w.code for w in warnings] == ["check-failed"]
