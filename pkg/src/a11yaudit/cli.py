"""Command-line front end: audit, extract, explore, report, diff.

Exit codes: 0 on success (including audits that find issues), 2 on input
errors. Warnings go to stderr; output files never carry timestamps.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import click

from . import analytics
from .checks import ISSUE_TYPES, CheckConfig, audit_screen
from .errors import A11yAuditError, InputError
from .explorer import explore_app, load_app_model
from .intent_flow import extract_all, load_ir, params_from_json, params_to_json
from .manifest import instrument_exported, parse_manifest
from .manifest import list_activities as _activity_listing
from .ui_model import load_png, load_screen

log = logging.getLogger("a11yaudit")

ANALYSES = (
    "summary", "type-distribution", "category-matrix", "component-matrix",
    "contrast-histogram", "top-color-pairs", "touch-size",
)


class InputFailure(click.ClickException):
    exit_code = 2


def _dumps(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _config(contrast_threshold, touch_target_min_dp, overlap_threshold, unsupported_class=()):
    try:
        return CheckConfig(
            contrast_threshold=Fraction(str(contrast_threshold)),
            touch_target_min_dp=Fraction(str(touch_target_min_dp)),
            overlap_coverage_threshold=Fraction(str(overlap_threshold)),
            unsupported_classes=tuple(unsupported_class),
        )
    except ValueError as e:
        raise click.BadParameter(str(e)) from None


def check_options(f):
    f = click.option("--unsupported-class", multiple=True, metavar="CLASS",
                     help="Class name screen readers cannot handle (repeatable).")(f)
    f = click.option("--overlap-threshold", default="0.9", show_default=True,
                     help="Coverage of the smaller node that counts as a shared location.")(f)
    f = click.option("--touch-target-min-dp", default="48", show_default=True)(f)
    f = click.option("--contrast-threshold", default="3.0", show_default=True)(f)
    return f


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose):
    """Offline accessibility auditing for Android UI captures."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


# -- audit -----------------------------------------------------------------------------

def _audit_one(args):
    xml_path, config = args
    xml_path = Path(xml_path)
    warnings = []
    png = xml_path.with_suffix(".png")
    try:
        screen = load_screen(xml_path)
    except (OSError, UnicodeDecodeError, InputError, ValueError) as e:
        return None, [{"code": "unreadable-bundle", "activity_name": xml_path.stem,
                       "message": f"{xml_path.name}: {e}"}]
    if png.exists():
        try:
            screen = screen.with_pixels(load_png(png))
        except (OSError, ValueError) as e:
            warnings.append({"code": "unreadable-screenshot", "activity_name": screen.activity_name,
                             "message": f"{png.name}: {e}"})
    audit_warnings = []
    issues = audit_screen(screen, config, audit_warnings)
    warnings.extend(w.to_dict() for w in audit_warnings)
    return [i.to_dict() for i in issues], warnings


def _map(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _counts(issue_dicts):
    c = Counter(i["issue_type"] for i in issue_dicts)
    return {t.value: c.get(t.value, 0) for t in ISSUE_TYPES}


@main.command()
@click.argument("screens_dir", type=click.Path(file_okay=False, path_type=Path))
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False, path_type=Path),
              required=True, help="Directory for per-screen issue files and summary.json.")
@check_options
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True, help="Per-screen issue file format (JSON lines or CSV).")
@click.option("-j", "--jobs", type=click.IntRange(min=1), default=1, show_default=True)
def audit(screens_dir, out_dir, contrast_threshold, touch_target_min_dp, overlap_threshold,
          unsupported_class, fmt, jobs):
    """Run every check over a directory of screen bundles ({activity}.xml + .png)."""
    if not screens_dir.is_dir():
        raise InputFailure(f"{screens_dir}: not a directory")
    config = _config(contrast_threshold, touch_target_min_dp, overlap_threshold,
                     unsupported_class)
    xmls = sorted(screens_dir.glob("*.xml"))
    results = _map(_audit_one, [(str(p), config) for p in xmls], jobs)
    screens = []
    total = Counter()
    for xml, (issues, warnings) in zip(xmls, results):
        for w in warnings:
            log.warning("%s: %s", xml.name, w["message"])
        if issues is not None:
            if fmt == "json":
                _write(out_dir / f"{xml.stem}.issues.jsonl",
                       "".join(json.dumps(i, ensure_ascii=False) + "\n" for i in issues))
            else:
                _write(out_dir / f"{xml.stem}.issues.csv", _issues_csv(issues))
            counts = _counts(issues)
            total.update(counts)
        else:
            counts = None
        screens.append({"screen": xml.stem, "counts_by_type": counts, "warnings": warnings})
    summary = {
        "screens": screens,
        "total": sum(total.values()),
        "counts_by_type": {t.value: total.get(t.value, 0) for t in ISSUE_TYPES},
    }
    _write(out_dir / "summary.json", _dumps(summary))
    click.echo(f"audited {len(xmls)} screens, {summary['total']} issues", err=True)


def _issues_csv(issues):
    header = ["issue_type", "activity_name", "node_path", "node_class", "resource_id",
              "left", "top", "right", "bottom", "metrics", "message"]
    rows = [
        [i["issue_type"], i["activity_name"], "/".join(map(str, i["node_path"])), i["node_class"],
         i["resource_id"] or "", i["bounds"]["left"], i["bounds"]["top"], i["bounds"]["right"],
         i["bounds"]["bottom"], json.dumps(i["metrics"], sort_keys=True), i["message"]]
        for i in issues
    ]
    return _csv_text(header, rows)


# -- extract ---------------------------------------------------------------------------

def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise InputFailure(f"{path}: {e}") from None


@main.command()
@click.argument("manifest_path", type=click.Path(dir_okay=False, path_type=Path))
@click.argument("ir_path", required=False, type=click.Path(dir_okay=False, path_type=Path))
@click.option("-o", "--out", type=click.Path(dir_okay=False, path_type=Path),
              help="Write extracted parameters here instead of stdout.")
@click.option("--list-activities", is_flag=True, help="Only list manifest activities as JSON.")
@click.option("--instrument", type=click.Path(dir_okay=False, path_type=Path),
              help="Also write the manifest with every activity exported.")
@click.option("--max-depth", type=click.IntRange(min=0), default=10, show_default=True,
              help="Call-graph depth explored from lifecycle callbacks.")
def extract(manifest_path, ir_path, out, list_activities, instrument, max_depth):
    """Extract launch parameters (manifest filters + Intent extras) per activity."""
    text = _read(manifest_path)
    try:
        model = parse_manifest(text)
    except InputError as e:
        raise InputFailure(f"{manifest_path}: {e}") from None
    for w in model.warnings:
        log.warning("%s: %s", manifest_path, w)
    if instrument:
        _, rewritten = instrument_exported(model, text)
        _write(instrument, rewritten)
    if list_activities:
        _emit(out, _dumps(list_activities_json(model)))
        return
    ir = None
    if ir_path is None:
        log.warning("no program IR given; only manifest parameters are extracted")
    else:
        try:
            ir = load_ir(_read(ir_path))
        except InputError as e:
            raise InputFailure(f"{ir_path}: {e}") from None
    warnings = []
    params = extract_all(ir, model, warnings, max_depth=max_depth)
    _emit(out, _dumps(params_to_json(params)))


def list_activities_json(model):
    return {"package": model.package, "activities": _activity_listing(model)}


def _emit(out, text):
    if out:
        _write(out, text)
    else:
        click.echo(text, nl=False)


# -- explore ---------------------------------------------------------------------------

@main.command()
@click.argument("model_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("-p", "--params", "params_path", type=click.Path(dir_okay=False, path_type=Path),
              help="Extracted parameters JSON from `extract`.")
@click.option("--with-extras/--without-extras", default=True, show_default=True,
              help="Attach extracted Intent extras when launching.")
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False, path_type=Path),
              required=True)
@check_options
def explore(model_path, params_path, with_extras, out_dir, contrast_threshold,
            touch_target_min_dp, overlap_threshold, unsupported_class):
    """Simulate launching every activity and audit the screens that open."""
    config = _config(contrast_threshold, touch_target_min_dp, overlap_threshold,
                     unsupported_class)
    try:
        app = load_app_model(model_path)
    except InputError as e:
        raise InputFailure(str(e)) from None
    params = []
    if params_path:
        try:
            params = params_from_json(json.loads(_read(params_path)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as e:
            raise InputFailure(f"{params_path}: {e}") from None
    warnings = []
    report, issues = explore_app(app, params, config, with_extras=with_extras, warnings=warnings)
    for w in warnings:
        log.warning("%s", w["message"])
    payload = report.to_dict()
    payload["with_extras"] = with_extras
    payload["warnings"] = warnings
    _write(out_dir / "coverage.json", _dumps(payload))
    _write(out_dir / "issues.jsonl",
           "".join(json.dumps(i.to_dict(), ensure_ascii=False) + "\n" for i in issues))
    click.echo(f"coverage {report.launched}/{report.total} = {report.ratio:.4f}", err=True)


# -- report ----------------------------------------------------------------------------

def _table(name, dataset):
    """(header, rows, json payload) for one analysis."""
    if name == "summary":
        s = analytics.summarize(dataset)
        fields = list(analytics.StatusCounts().to_dict())
        rows = []
        if dataset.apps:
            rows = [["overall"] + list(s.overall.to_dict().values())]
            rows += [[m.value] + list(s.by_market[m].to_dict().values()) for m in analytics.Market]
        return ["scope"] + fields, rows, s.to_dict()
    if name == "type-distribution":
        d = analytics.type_distribution(dataset)
        rows = [[t.value, t.label, c, share] for t, c, share in d]
        return (["issue_type", "label", "count", "share"], rows,
                [dict(zip(["issue_type", "label", "count", "share"], r)) for r in rows])
    if name in ("category-matrix", "component-matrix"):
        m = (analytics.category_type_matrix if name == "category-matrix"
             else analytics.component_type_matrix)(dataset)
        header = ["name", "issues"] + [t.value for t in ISSUE_TYPES]
        recs = m.to_records()
        return header, [[r[h] for h in header] for r in recs], recs
    if name == "contrast-histogram":
        hists, _ = analytics.contrast_distribution(dataset)
        rows = [[m.value, r["lo"], r["hi"], r["count"]]
                for m, h in sorted(hists.items()) for r in h.to_records()]
        return (["market", "lo", "hi", "count"], rows,
                {m.value: {"bins": h.to_records(), "out_of_range": h.out_of_range}
                 for m, h in sorted(hists.items())})
    if name == "top-color-pairs":
        pairs = analytics.top_color_pairs(dataset, 10)
        rows = [[fg, bg, c] for fg, bg, c in pairs]
        return (["foreground", "background", "count"], rows,
                [{"foreground": fg, "background": bg, "count": c} for fg, bg, c in pairs])
    if name == "touch-size":
        dist = analytics.touch_size_distribution(dataset)
        rows, payload = [], {}
        for m, d in sorted(dist.items()):
            for dim, h in (("width", d.width), ("height", d.height)):
                rows += [[m.value, dim, r["lo"], r["hi"], r["count"]] for r in h.to_records()]
            payload[m.value] = {
                "n": d.n,
                "width": {"bins": d.width.to_records(), "quartiles": list(d.width_quartiles)},
                "height": {"bins": d.height.to_records(), "quartiles": list(d.height_quartiles)},
            }
        return ["market", "dimension", "lo", "hi", "count"], rows, payload
    raise KeyError(name)


@main.command()
@click.argument("dataset_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("-a", "--analysis", "names", multiple=True,
              help=f"Analysis to run (repeatable; default all): {', '.join(ANALYSES)}.")
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False, path_type=Path),
              required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv",
              show_default=True)
def report(dataset_path, names, out_dir, fmt):
    """Compute corpus analytics from a JSON-lines dataset of app records."""
    names = names or ANALYSES
    unknown = [n for n in names if n not in ANALYSES]
    if unknown:
        raise InputFailure(f"unknown analysis {', '.join(unknown)}; valid: {', '.join(ANALYSES)}")
    try:
        dataset = analytics.load_dataset(dataset_path)
    except InputError as e:
        raise InputFailure(str(e)) from None
    for name in dict.fromkeys(names):
        header, rows, payload = _table(name, dataset)
        if fmt == "csv":
            _write(out_dir / f"{name}.csv", _csv_text(header, rows))
        else:
            _write(out_dir / f"{name}.json", _dumps(payload))


# -- diff ------------------------------------------------------------------------------

def _load_record(path):
    text = _read(path)
    try:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        data = json.loads(text) if len(lines) != 1 else json.loads(lines[0])
        if isinstance(data, list):
            raise ValueError("expected one app record object")
        return analytics.AppRecord.from_dict(data, base=Path(path).parent)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, OSError) as e:
        raise InputFailure(f"{path}: {e}") from None


@main.command()
@click.argument("old_path", type=click.Path(dir_okay=False, path_type=Path))
@click.argument("new_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("-o", "--out", type=click.Path(dir_okay=False, path_type=Path))
def diff(old_path, new_path, out):
    """Classify issue changes between two versions of one app."""
    old = _load_record(old_path)
    new = _load_record(new_path)
    try:
        result = analytics.version_diff(old, new)
    except A11yAuditError as e:
        raise InputFailure(str(e)) from None
    _emit(out, _dumps(result.to_dict()))


if __name__ == "__main__":
    main()
