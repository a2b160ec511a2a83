"""Corpus-level issue analytics and version-to-version fixing triage."""
from __future__ import annotations

import enum
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .checks import ISSUE_TYPES, Issue, IssueType
from .errors import InputError, MismatchedApp
from .ui_model import format_path

CONTRAST_TYPES = (IssueType.TEXT_CONTRAST, IssueType.IMAGE_CONTRAST)
CONTRAST_RANGE = (1.0, 4.5)
CONTRAST_BIN = 0.25
SIZE_RANGE = (0.0, 48.0)
SIZE_BIN = 5.0


class Market(str, enum.Enum):
    GOOGLE_PLAY = "GooglePlay"
    FDROID = "FDroid"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class AppRecord:
    app_id: str
    market: Market
    category: str
    version: str
    total_activities: int
    launched_activities: int
    issues: tuple = ()
    # launched pages -> node keys (resource ids or node paths) present on them
    pages: dict = field(default=None, compare=False)

    def __post_init__(self):
        if self.launched_activities > self.total_activities:
            raise ValueError(f"{self.app_id}: launched activities exceed total")
        object.__setattr__(self, "market", Market(self.market))
        object.__setattr__(self, "issues", tuple(self.issues))

    @classmethod
    def from_dict(cls, d, base=None):
        issues = d.get("issues")
        if issues is None and d.get("issues_file"):
            ref = Path(d["issues_file"])
            if base is not None and not ref.is_absolute():
                ref = Path(base) / ref
            issues = [json.loads(line) for line in ref.read_text(encoding="utf-8").splitlines()
                      if line.strip()]
        pages = d.get("pages")
        return cls(
            app_id=d["app_id"],
            market=Market(d["market"]),
            category=d.get("category", ""),
            version=str(d.get("version", "")),
            total_activities=int(d.get("total_activities", 0)),
            launched_activities=int(d.get("launched_activities", 0)),
            issues=tuple(Issue.from_dict(i) for i in issues or ()),
            pages={k: tuple(v) for k, v in pages.items()} if pages is not None else None,
        )

    def to_dict(self):
        d = {
            "app_id": self.app_id, "market": self.market.value, "category": self.category,
            "version": self.version, "total_activities": self.total_activities,
            "launched_activities": self.launched_activities,
            "issues": [i.to_dict() for i in self.issues],
        }
        if self.pages is not None:
            d["pages"] = {k: list(v) for k, v in self.pages.items()}
        return d


@dataclass(frozen=True)
class IssueDataset:
    apps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "apps", tuple(self.apps))
        keys = [(a.app_id, a.version) for a in self.apps]
        if len(set(keys)) != len(keys):
            raise ValueError("(app_id, version) pairs must be unique")


def load_dataset(path):
    """Read a JSON-lines file of app records."""
    path = Path(path)
    apps = []
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"{path}: {e}") from None
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            apps.append(AppRecord.from_dict(json.loads(line), base=path.parent))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, OSError) as e:
            raise InputError(f"{path}:{n}: {e}") from None
    try:
        return IssueDataset(tuple(apps))
    except ValueError as e:
        raise InputError(f"{path}: {e}") from None


def effective_markets(dataset):
    """Market per app id; apps listed in both markets count as F-Droid."""
    seen = {}
    for a in dataset.apps:
        seen.setdefault(a.app_id, set()).add(a.market)
    return {k: Market.FDROID if Market.FDROID in v else Market.GOOGLE_PLAY
            for k, v in seen.items()}


# -- overall status ----------------------------------------------------------------

@dataclass(frozen=True)
class StatusCounts:
    apps: int = 0
    apps_with_issues: int = 0
    activities: int = 0
    launched_activities: int = 0
    flawed_pages: int = 0
    issues: int = 0

    @staticmethod
    def _ratio(a, b):
        return a / b if b else 0.0

    @property
    def apps_with_issues_ratio(self):
        return self._ratio(self.apps_with_issues, self.apps)

    @property
    def issues_per_flawed_app(self):
        return self._ratio(self.issues, self.apps_with_issues)

    @property
    def issues_per_flawed_page(self):
        return self._ratio(self.issues, self.flawed_pages)

    @property
    def launched_ratio(self):
        return self._ratio(self.launched_activities, self.activities)

    @property
    def flawed_page_ratio(self):
        return self._ratio(self.flawed_pages, self.launched_activities)

    def to_dict(self):
        return {
            "apps": self.apps,
            "apps_with_issues": self.apps_with_issues,
            "activities": self.activities,
            "launched_activities": self.launched_activities,
            "flawed_pages": self.flawed_pages,
            "issues": self.issues,
            "apps_with_issues_ratio": self.apps_with_issues_ratio,
            "issues_per_flawed_app": self.issues_per_flawed_app,
            "issues_per_flawed_page": self.issues_per_flawed_page,
            "launched_ratio": self.launched_ratio,
            "flawed_page_ratio": self.flawed_page_ratio,
        }


@dataclass(frozen=True)
class SummaryStats:
    overall: StatusCounts
    by_market: dict

    @property
    def apps_with_issues_ratio(self):
        return self.overall.apps_with_issues_ratio

    @property
    def issues_per_flawed_app(self):
        return self.overall.issues_per_flawed_app

    @property
    def issues_per_flawed_page(self):
        return self.overall.issues_per_flawed_page

    @property
    def launched_ratio(self):
        return self.overall.launched_ratio

    @property
    def flawed_page_ratio(self):
        return self.overall.flawed_page_ratio

    def to_dict(self):
        return {
            "overall": self.overall.to_dict(),
            "by_market": {m.value: self.by_market[m].to_dict() for m in Market},
        }


def _status(records):
    apps = flawed_apps = acts = launched = issues = 0
    pages = set()
    for a in records:
        apps += 1
        acts += a.total_activities
        launched += a.launched_activities
        issues += len(a.issues)
        if a.issues:
            flawed_apps += 1
        for i in a.issues:
            pages.add((a.app_id, a.version, i.activity_name))
    return StatusCounts(apps, flawed_apps, acts, launched, len(pages), issues)


def summarize(dataset):
    """Overall and per-market status ratios; one app record counts as one app."""
    markets = effective_markets(dataset)
    by_market = {
        m: _status(a for a in dataset.apps if markets[a.app_id] is m) for m in Market
    }
    return SummaryStats(_status(dataset.apps), by_market)


# -- distributions ---------------------------------------------------------------------

def type_distribution(dataset):
    """``[(IssueType, count, share)]`` ranked by count, zero counts omitted."""
    counts = Counter(i.issue_type for a in dataset.apps for i in a.issues)
    total = sum(counts.values())
    order = {t: k for k, t in enumerate(ISSUE_TYPES)}
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], order[kv[0]]))
    return [(t, c, c / total) for t, c in ranked]


@dataclass(frozen=True)
class Matrix:
    """Rows x issue-type shares; each row sums to 1."""

    rows: tuple
    columns: tuple
    values: tuple
    counts: tuple

    def row(self, name):
        return dict(zip(self.columns, self.values[self.rows.index(name)]))

    def to_records(self):
        return [
            {"name": r, "issues": c, **{t.value: v for t, v in zip(self.columns, vals)}}
            for r, c, vals in zip(self.rows, self.counts, self.values)
        ]


def _normalized(groups, key):
    rows = sorted(groups, key=key)
    values, counts = [], []
    for r in rows:
        c = groups[r]
        n = sum(c.values())
        values.append(tuple(c.get(t, 0) / n for t in ISSUE_TYPES))
        counts.append(n)
    return Matrix(tuple(rows), ISSUE_TYPES, tuple(values), tuple(counts))


def category_type_matrix(dataset):
    """Issue-type shares per app category, categories in name order."""
    groups = {}
    for a in dataset.apps:
        for i in a.issues:
            groups.setdefault(a.category, Counter())[i.issue_type] += 1
    return _normalized(groups, key=lambda r: r)


def component_type_matrix(dataset):
    """Issue-type shares per component class, ranked by issue count."""
    groups = {}
    for a in dataset.apps:
        for i in a.issues:
            name = i.node_class.rsplit(".", 1)[-1] or "?"
            groups.setdefault(name, Counter())[i.issue_type] += 1
    return _normalized(groups, key=lambda r: (-sum(groups[r].values()), r))


@dataclass(frozen=True)
class Histogram:
    edges: tuple
    counts: tuple
    out_of_range: int = 0

    def to_records(self):
        return [{"lo": lo, "hi": hi, "count": c}
                for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts)]


def _edges(lo, hi, width):
    n = math.ceil((hi - lo) / width - 1e-9)
    return tuple(min(lo + k * width, hi) for k in range(n + 1))


def histogram(values, lo, hi, width):
    """Fixed-width bins over [lo, hi); the right edge itself falls in the last bin."""
    edges = _edges(lo, hi, width)
    counts = [0] * (len(edges) - 1)
    outside = 0
    for v in values:
        if v < lo or v > hi:
            outside += 1
            continue
        k = min(int(math.floor((v - lo) / width + 1e-9)), len(counts) - 1)
        counts[k] += 1
    return Histogram(edges, tuple(counts), outside)


def _issues_by_market(dataset, types):
    markets = effective_markets(dataset)
    out = {m: [] for m in Market}
    for a in dataset.apps:
        for i in a.issues:
            if i.issue_type in types:
                out[markets[a.app_id]].append(i)
    return out


def top_color_pairs(dataset, n=10):
    """Most frequent (foreground, background) pairs among contrast issues."""
    counts = Counter(
        (i.metrics["foreground_hex"].upper(), i.metrics["background_hex"].upper())
        for a in dataset.apps for i in a.issues
        if i.issue_type in CONTRAST_TYPES and "foreground_hex" in i.metrics
    )
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(fg, bg, c) for (fg, bg), c in ranked[:n]]


def contrast_distribution(dataset, width=CONTRAST_BIN, n_pairs=10):
    """Per-market histograms of contrast ratios plus the top colour pairs.

    Markets without contrast issues are left out, so a corpus with none
    yields an empty histogram mapping.
    """
    hists = {}
    for m, issues in _issues_by_market(dataset, CONTRAST_TYPES).items():
        vals = [float(i.metrics["contrast_ratio"]) for i in issues if "contrast_ratio" in i.metrics]
        if vals:
            hists[m] = histogram(vals, *CONTRAST_RANGE, width)
    return hists, top_color_pairs(dataset, n_pairs)


def quartiles(values):
    """25th/50th/75th percentiles with linear interpolation between ranks."""
    return tuple(float(q) for q in np.percentile(np.asarray(values, dtype=float), [25, 50, 75]))


@dataclass(frozen=True)
class SizeDistribution:
    width: Histogram
    height: Histogram
    width_quartiles: tuple
    height_quartiles: tuple
    n: int


def touch_size_distribution(dataset, width=SIZE_BIN):
    out = {}
    for m, issues in _issues_by_market(dataset, (IssueType.TOUCH_TARGET,)).items():
        ws = [float(i.metrics["width_dp"]) for i in issues if "width_dp" in i.metrics]
        hs = [float(i.metrics["height_dp"]) for i in issues if "height_dp" in i.metrics]
        if not ws:
            continue
        out[m] = SizeDistribution(
            histogram(ws, *SIZE_RANGE, width), histogram(hs, *SIZE_RANGE, width),
            quartiles(ws), quartiles(hs), len(ws),
        )
    return out


# -- version diff ----------------------------------------------------------------------

class DiffStatus(str, enum.Enum):
    UNCHANGED = "Unchanged"
    INCREASED = "Increased"
    DECREASED = "Decreased"


def node_key(issue):
    return issue.resource_id or format_path(issue.node_path)


def issue_key(issue):
    return (issue.activity_name, node_key(issue), issue.issue_type)


@dataclass(frozen=True)
class VersionDiff:
    status: DiffStatus
    fixed: tuple
    feature_removed: tuple
    introduced: tuple
    old_count: int
    new_count: int

    def to_dict(self):
        def keys(items):
            return [{"activity": a, "node": n, "issue_type": t.value} for a, n, t in items]

        return {
            "status": self.status.value,
            "old_count": self.old_count,
            "new_count": self.new_count,
            "fixed": keys(self.fixed),
            "feature_removed": keys(self.feature_removed),
            "introduced": keys(self.introduced),
        }


def _inventory(record):
    """activity -> set of node keys known on the page."""
    inv = {}
    if record.pages is not None:
        for act, nodes in record.pages.items():
            inv.setdefault(act, set()).update(nodes)
    for i in record.issues:
        inv.setdefault(i.activity_name, set()).add(node_key(i))
    return inv


def version_diff(old, new):
    """Classify how the issue set changed between two versions of one app.

    Issues are matched by (activity, resource id or node path, type) as a
    multiset. A vanished issue counts as fixed when its activity and node are
    still present in the new version, otherwise the feature was removed.
    """
    if old.app_id != new.app_id:
        raise MismatchedApp(f"cannot diff {old.app_id} against {new.app_id}")
    old_c = Counter(issue_key(i) for i in old.issues)
    new_c = Counter(issue_key(i) for i in new.issues)
    vanished = old_c - new_c
    introduced = new_c - old_c
    inv = _inventory(new)
    fixed, removed = [], []
    for key in sorted(vanished, key=_sort_key):
        act, node, _ = key
        bucket = fixed if act in inv and node in inv[act] else removed
        bucket.extend([key] * vanished[key])
    intro = [k for k in sorted(introduced, key=_sort_key) for _ in range(introduced[k])]
    n_old, n_new = len(old.issues), len(new.issues)
    if n_new > n_old:
        status = DiffStatus.INCREASED
    elif n_new < n_old:
        status = DiffStatus.DECREASED
    else:
        status = DiffStatus.UNCHANGED
    return VersionDiff(status, tuple(fixed), tuple(removed), tuple(intro), n_old, n_new)


def _sort_key(key):
    act, node, t = key
    return (act, node, ISSUE_TYPES.index(t))
