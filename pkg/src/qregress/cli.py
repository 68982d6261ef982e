"""Command-line pipeline: fetch data, train models, predict, compare.

Subcommands mirror the experimental protocol end to end:

* ``fetch``   — download (or copy) a raw case-count CSV and canonicalize it.
* ``train``   — train one model on one target; writes the serialized model,
  a two-column cost-trace CSV, and a cost-decay SVG.
* ``predict`` — run a trained model on its held-out chronological test split;
  writes per-day predicted-vs-actual raw counts and an overlay SVG.
* ``compare`` — t-test every prediction file and render the comparison table.

Every command is deterministic given its flags and inputs: seeds are flags,
outputs carry no timestamps, and reruns produce byte-identical files.  Exit
codes are a stable contract: 0 success, 2 fetch/schema problems, 3 training
divergence, 4 model/data mismatch, 5 malformed report input.

A JSON config file (``--config``) can supply per-subcommand flag defaults,
e.g. ``{"train": {"model": "qbmlp", "iterations": 500}}``; explicit flags
win.  ``QREGRESS_DATA_URL`` provides ``fetch --source`` when the flag is
absent.
"""

import csv
import io
import json
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from . import cvqnn, qbmlp
from .dataset import (
    BUNDLED_SOURCES,
    TARGETS,
    FuzzyScale,
    apply_scale,
    defuzzify,
    derive_features,
    feature_matrix,
    fetch_remote,
    fixture_path,
    fuzzify,
    parse_timeseries,
    split,
    to_canonical_csv,
)
from .exceptions import (
    DegenerateScaleError,
    DivergenceError,
    FetchError,
    GapError,
    ModelMismatchError,
    ParameterError,
    QregressError,
    ReportInputError,
    RowError,
    SchemaError,
    SplitError,
)
from .stats import comparison_table, emit_plot, t_test_two_tailed

MODELS = ("qbmlp", "cvqnn")

_DEFAULT_LEARNING_RATE = {"qbmlp": 0.001, "cvqnn": 0.1}
_DEFAULT_ITERATIONS = {"qbmlp": 15000, "cvqnn": 200}

EXIT_FETCH = 2
EXIT_DIVERGENCE = 3
EXIT_MODEL = 4
EXIT_REPORT = 5

_EXIT_CODES = (
    ((FetchError, SchemaError, RowError, GapError, DegenerateScaleError, SplitError), EXIT_FETCH),
    ((DivergenceError,), EXIT_DIVERGENCE),
    ((ModelMismatchError,), EXIT_MODEL),
    ((ReportInputError,), EXIT_REPORT),
)


def _fmt(value) -> str:
    return format(float(value), ".6g")


@contextmanager
def _exit_on_error():
    """Translate pipeline exceptions into the documented exit codes."""
    try:
        yield
    except QregressError as exc:
        for types, code in _EXIT_CODES:
            if isinstance(exc, types):
                click.echo(f"error: {exc}", err=True)
                raise SystemExit(code) from exc
        raise


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="JSON file of per-subcommand flag defaults; explicit flags override it.",
)
@click.pass_context
def main(ctx, config):
    """Case-count regression pipeline: fetch, train, predict, compare."""
    if config:
        try:
            defaults = json.loads(Path(config).read_text())
        except json.JSONDecodeError as exc:
            raise click.UsageError(f"config file {config} is not valid JSON: {exc}")
        if not isinstance(defaults, dict):
            raise click.UsageError(f"config file {config} must hold a JSON object")
        ctx.default_map = defaults


# ---------------------------------------------------------------------------
# fetch
# ---------------------------------------------------------------------------

@main.command()
@click.option(
    "--source",
    envvar="QREGRESS_DATA_URL",
    required=True,
    help=f"URL, file path, or bundled snapshot name {BUNDLED_SOURCES}. "
    "Falls back to $QREGRESS_DATA_URL.",
)
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Destination of the canonical CSV.")
def fetch(source, out):
    """Fetch a raw daily-counts CSV and write it in canonical form.

    Canonical form is date-sorted, verified gapless, and carries the derived
    active / new_cases / day_index columns; running fetch on its own output
    reproduces it byte for byte.
    """
    with _exit_on_error():
        if source in BUNDLED_SOURCES:
            source = str(fixture_path(source))
        records = derive_features(parse_timeseries(fetch_remote(source)))
        destination = Path(out)
        if destination.parent != Path(""):
            destination.parent.mkdir(parents=True, exist_ok=True)
        destination.write_text(to_canonical_csv(records))
        click.echo(f"wrote {len(records)} rows to {destination}")


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

def _fuzzify_columns(X):
    columns, scales = [], []
    for j in range(X.shape[1]):
        scaled, scale = fuzzify(X[:, j])
        columns.append(scaled)
        scales.append(scale)
    return np.column_stack(columns), scales


@main.command()
@click.option("--data", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Canonical CSV from `fetch`.")
@click.option("--model", type=click.Choice(MODELS), required=True)
@click.option("--target", type=click.Choice(TARGETS), default="deaths", show_default=True)
@click.option("--learning-rate", type=click.FloatRange(min=0, min_open=True), default=None,
              help="Defaults: 0.001 (qbmlp), 0.1 (cvqnn).")
@click.option("--iterations", type=click.IntRange(min=1), default=None,
              help="Defaults: 15000 (qbmlp), 200 (cvqnn).")
@click.option("--cutoff", type=click.IntRange(min=2), default=10, show_default=True,
              help="Fock truncation per qumode (cvqnn only).")
@click.option("--variant", type=click.Choice(cvqnn.VARIANTS), default="standard",
              show_default=True, help="Layer layout (cvqnn only).")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--train-fraction", type=click.FloatRange(0, 1, min_open=True, max_open=True),
              default=0.8, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
def train(data, model, target, learning_rate, iterations, cutoff, variant,
          seed, train_fraction, out_dir):
    """Train a model on the chronological training split of one target.

    Features are the day index plus the two counters complementary to the
    target, min-max scaled on the training partition only.  Writes
    ``<model>_<target>_model.json``, ``..._trace.csv`` (iteration, cost), and
    ``..._cost.svg`` with a sibling CSV of the plotted series.
    """
    model_name = model
    lr = learning_rate if learning_rate is not None else _DEFAULT_LEARNING_RATE[model_name]
    n_iterations = iterations if iterations is not None else _DEFAULT_ITERATIONS[model_name]
    with _exit_on_error():
        records = derive_features(parse_timeseries(Path(data).read_bytes()))
        train_records, _ = split(records, train_fraction)
        X, y = feature_matrix(train_records, target)
        X_scaled, feature_scales = _fuzzify_columns(X)
        y_scaled, target_scale = fuzzify(y)

        if model_name == "qbmlp":
            network, trace = qbmlp.train(
                qbmlp.init_network(seed=seed), X_scaled, y_scaled,
                learning_rate=lr, iterations=n_iterations,
            )
            tree = qbmlp.layers_to_dict(network)
        else:
            template = cvqnn.build_network(
                modes=X.shape[1], cutoff=cutoff, variant=variant, seed=seed
            )
            config = cvqnn.TrainConfig(learning_rate=lr, iterations=n_iterations, seed=seed)
            network, trace = cvqnn.train_sgd(template, (X_scaled, y_scaled), config)
            tree = cvqnn.net_to_dict(network)

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{model_name}_{target}"
        complements = [c for c in ("confirmed", "deaths", "recovered") if c != target]
        payload = {
            "kind": "qregress-model",
            "version": 1,
            "model": model_name,
            "target": target,
            "train_fraction": train_fraction,
            "seed": seed,
            "feature_names": ["day_index", *complements],
            "feature_scales": [[s.min, s.max] for s in feature_scales],
            "target_scale": [target_scale.min, target_scale.max],
            "network": tree,
        }
        model_path = out / f"{stem}_model.json"
        model_path.write_text(json.dumps(payload, indent=2) + "\n")

        trace_path = out / f"{stem}_trace.csv"
        with open(trace_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration", "cost"])
            for i, cost in enumerate(trace):
                writer.writerow([i, _fmt(cost)])

        svg_path, _ = emit_plot(
            {"training cost": (np.arange(len(trace)), np.asarray(trace))},
            out / f"{stem}_cost.svg",
        )
        click.echo(f"wrote {model_path}")
        click.echo(f"wrote {trace_path} ({len(trace)} iterations)")
        click.echo(f"wrote {svg_path}")
        click.echo(f"final cost {_fmt(trace[-1])} (from {_fmt(trace[0])})")


# ---------------------------------------------------------------------------
# predict
# ---------------------------------------------------------------------------

@dataclass
class _LoadedModel:
    model: str
    target: str
    train_fraction: float
    feature_scales: list
    target_scale: FuzzyScale
    network: dict


def _load_model(path) -> _LoadedModel:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelMismatchError(f"cannot read model file {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("kind") != "qregress-model" \
            or payload.get("version") != 1:
        raise ModelMismatchError(f"{path} is not a version-1 model file")
    if payload.get("model") not in MODELS:
        raise ModelMismatchError(f"{path}: unknown model {payload.get('model')!r}")
    if payload.get("target") not in TARGETS:
        raise ModelMismatchError(f"{path}: unknown target {payload.get('target')!r}")
    try:
        return _LoadedModel(
            model=payload["model"],
            target=payload["target"],
            train_fraction=float(payload["train_fraction"]),
            feature_scales=[FuzzyScale(float(lo), float(hi)) for lo, hi in payload["feature_scales"]],
            target_scale=FuzzyScale(*(float(v) for v in payload["target_scale"])),
            network=payload["network"],
        )
    except (KeyError, TypeError, ValueError, DegenerateScaleError) as exc:
        raise ModelMismatchError(f"malformed model file {path}: {exc}") from exc


@main.command()
@click.option("--model-file", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--data", type=click.Path(exists=True, dir_okay=False),
              required=True, help="The canonical CSV the model was trained from.")
@click.option("--label", default=None,
              help="Dataset label in reports; default: data file stem, title-cased.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
def predict(model_file, data, label, out_dir):
    """Predict the held-out test split and write predicted-vs-actual counts.

    The chronological split is recomputed from the fraction stored in the
    model file; predictions are mapped back to raw counts with the stored
    training scale and clamped at zero.  Writes
    ``<model>_<target>_predictions.csv`` and an overlay SVG.
    """
    with _exit_on_error():
        loaded = _load_model(model_file)
        records = derive_features(parse_timeseries(Path(data).read_bytes()))
        _, test_records = split(records, loaded.train_fraction)
        X, actual = feature_matrix(test_records, loaded.target)
        if X.shape[1] != len(loaded.feature_scales):
            raise ModelMismatchError(
                f"model stores {len(loaded.feature_scales)} feature scales "
                f"but the data yields {X.shape[1]} features"
            )
        X_scaled = np.column_stack(
            [apply_scale(X[:, j], s) for j, s in enumerate(loaded.feature_scales)]
        )

        if loaded.model == "qbmlp":
            try:
                layers = qbmlp.layers_from_dict(loaded.network)
            except ParameterError as exc:
                raise ModelMismatchError(f"{model_file}: {exc}") from exc
            if len(layers[0][0].theta) != X_scaled.shape[1]:
                raise ModelMismatchError(
                    f"model expects {len(layers[0][0].theta)} features, "
                    f"data yields {X_scaled.shape[1]}"
                )
            clipped = np.clip(X_scaled, 0.0, 1.0)
            clamped = int(np.sum(clipped != X_scaled))
            if clamped:
                click.echo(f"note: clamped {clamped} encoded value(s) into [0, 1]", err=True)
            fuzzy = np.array([qbmlp.network_forward(row, layers) for row in clipped])
        else:
            try:
                network = cvqnn.net_from_dict(loaded.network)
            except ParameterError as exc:
                raise ModelMismatchError(f"{model_file}: {exc}") from exc
            if network.modes != X_scaled.shape[1]:
                raise ModelMismatchError(
                    f"model expects {network.modes} features, data yields {X_scaled.shape[1]}"
                )
            fuzzy = cvqnn.forward_batch(X_scaled, network)

        predicted = np.maximum(defuzzify(fuzzy, loaded.target_scale), 0.0)

        if label is None:
            label = Path(data).stem.title()
        target_word = "Death" if loaded.target == "deaths" else "Confirmed"
        series = f"{label} - {target_word} Prediction"
        model_title = loaded.model.upper()

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{loaded.model}_{loaded.target}"
        csv_path = out / f"{stem}_predictions.csv"
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["series", "model", "date", "actual", "predicted"])
            for record, act, pred in zip(test_records, actual, predicted):
                writer.writerow(
                    [series, model_title, record.date.isoformat(), int(act), _fmt(pred)]
                )

        days = np.array([r.day_index for r in test_records], dtype=float)
        svg_path, _ = emit_plot(
            {"actual": (days, actual), "predicted": (days, predicted)},
            out / f"{stem}_overlay.svg",
        )
        click.echo(f"wrote {csv_path} ({len(test_records)} rows)")
        click.echo(f"wrote {svg_path}")


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def _read_prediction_file(path):
    """Yield ((series, model), predicted, actual) groups from one CSV."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ReportInputError(f"{path}: {exc}") from exc
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise ReportInputError(f"{path}: empty file")
    fields = {name.strip().lower(): name for name in reader.fieldnames if name}
    for required in ("predicted", "actual"):
        if required not in fields:
            raise ReportInputError(f"{path}: missing required column {required!r}")

    groups = {}
    for line_num, row in enumerate(reader, start=2):
        series = row.get(fields["series"], "") if "series" in fields else ""
        model = row.get(fields["model"], "") if "model" in fields else ""
        key = (series or Path(path).stem, model or "model")
        try:
            pair = (float(row[fields["predicted"]]), float(row[fields["actual"]]))
        except (TypeError, ValueError) as exc:
            raise ReportInputError(f"{path}: line {line_num}: {exc}") from exc
        groups.setdefault(key, []).append(pair)
    if not groups:
        raise ReportInputError(f"{path}: no data rows")
    for key, pairs in groups.items():
        predicted = [p for p, _ in pairs]
        actual = [a for _, a in pairs]
        yield key, predicted, actual


@main.command()
@click.argument("prediction_csvs", nargs=-1, required=True,
                type=click.Path(exists=False, dir_okay=False))
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
def compare(prediction_csvs, out_dir):
    """Cross-model report: a two-tailed t-test per prediction file.

    Each file's predicted and actual columns are compared; a statistic near 0
    with p near 1 means the model's outputs are statistically
    indistinguishable from the real series.  Writes ``comparison.txt`` and
    ``comparison.csv`` and prints the table.
    """
    with _exit_on_error():
        reports = {}
        for path in prediction_csvs:
            for key, predicted, actual in _read_prediction_file(path):
                try:
                    reports[key] = t_test_two_tailed(predicted, actual)
                except QregressError as exc:
                    raise ReportInputError(f"{path}: {exc}") from exc
        table = comparison_table(reports)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "comparison.txt").write_text(table.text)
        (out / "comparison.csv").write_text(table.csv)
        click.echo(table.text, nl=False)


if __name__ == "__main__":
    main()
