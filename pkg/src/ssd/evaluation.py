"""Classification metrics, chance-corrected agreement, the cross-validation
harness, and the per-label feature profiler.

Scoring conventions: any 0/0 ratio is 0; macro averages are unweighted class
means; weighted averages are support-weighted over the scored samples; fold
averaging is the unweighted mean of per-fold metrics, not a pooled confusion
matrix. Report JSON excludes wall-clock so identical runs are byte-identical;
timings go to a sidecar file.
"""

from __future__ import annotations

import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import models as M
from .corpus import Dataset, load_dataset, stage_view, stratified_kfold_labels
from .errors import UsageError
from .features import (
    EMOTIONS,
    SENTIMENT_NAMES,
    emotion_features,
    fit_feature_scaler,
    fit_tfidf,
    liwc_features,
    sentiment_scores,
)
from .pipeline import (
    BASE_FAMILIES,
    ExperimentConfig,
    LexiconSet,
    _feature_matrix,
    _train_family,
    class_order,
    extract_dense_blocks,
    load_lexicons,
    matrix_for_family,
    preprocess_config,
)
from .preprocess import PreprocessConfig, default_config, normalize
from .util import canonical_json, fingerprint, format_markdown_table, format_table

CV_REPORT_FORMAT = "ssd-cv-report-v1"

SUBTASK_NAMES = {1: "support", 2: "target", 3: "group"}


# ---------------------------------------------------------------------------
# confusion matrix and derived scores


@dataclass(frozen=True)
class ConfusionMatrix:
    labels: tuple[str, ...]
    counts: np.ndarray  # rows true, columns predicted

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion_matrix(
    y_true: Sequence[str],
    y_pred: Sequence[str],
    labels: Sequence[str] | None = None,
) -> ConfusionMatrix:
    if len(y_true) != len(y_pred):
        raise UsageError(
            f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted"
        )
    if labels is None:
        labels = sorted(set(y_true) | set(y_pred))
    labels = tuple(labels)
    index = {c: i for i, c in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=int)
    for t, p in zip(y_true, y_pred):
        if t not in index:
            raise UsageError(f"true label {t!r} is not in the label set")
        if p not in index:
            raise UsageError(f"predicted label {p!r} is not in the label set")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(labels, counts)


@dataclass(frozen=True)
class MetricsReport:
    labels: tuple[str, ...]
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    support: tuple[float, ...]
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float

    def to_json_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "precision": list(self.precision),
            "recall": list(self.recall),
            "f1": list(self.f1),
            "support": list(self.support),
            "accuracy": self.accuracy,
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "weighted": {
                "precision": self.weighted_precision,
                "recall": self.weighted_recall,
                "f1": self.weighted_f1,
            },
        }


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num, dtype=float)
    np.divide(num, den, out=out, where=den != 0)
    return out


def prf_scores(cm: ConfusionMatrix) -> MetricsReport:
    counts = cm.counts.astype(float)
    tp = np.diag(counts)
    support = counts.sum(axis=1)
    predicted = counts.sum(axis=0)
    precision = _safe_div(tp, predicted)
    recall = _safe_div(tp, support)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    total = counts.sum()
    accuracy = float(tp.sum() / total) if total else 0.0
    weights = support / total if total else np.zeros_like(support)
    return MetricsReport(
        labels=cm.labels,
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
        support=tuple(support),
        accuracy=accuracy,
        macro_precision=float(precision.mean()) if len(precision) else 0.0,
        macro_recall=float(recall.mean()) if len(recall) else 0.0,
        macro_f1=float(f1.mean()) if len(f1) else 0.0,
        weighted_precision=float(precision @ weights),
        weighted_recall=float(recall @ weights),
        weighted_f1=float(f1 @ weights),
    )


def score_labels(
    y_true: Sequence[str], y_pred: Sequence[str], labels: Sequence[str] | None = None
) -> MetricsReport:
    return prf_scores(confusion_matrix(y_true, y_pred, labels))


def mean_metrics(reports: Sequence[MetricsReport]) -> MetricsReport:
    """Unweighted element-wise mean over folds; label sets must agree."""
    if not reports:
        raise UsageError("cannot average an empty list of metric reports")
    labels = reports[0].labels
    for r in reports[1:]:
        if r.labels != labels:
            raise UsageError("metric reports cover different label sets")

    def col(name):
        return tuple(np.mean([getattr(r, name) for r in reports], axis=0))

    def scalar(name):
        return float(np.mean([getattr(r, name) for r in reports]))

    return MetricsReport(
        labels=labels,
        precision=col("precision"),
        recall=col("recall"),
        f1=col("f1"),
        support=col("support"),
        accuracy=scalar("accuracy"),
        macro_precision=scalar("macro_precision"),
        macro_recall=scalar("macro_recall"),
        macro_f1=scalar("macro_f1"),
        weighted_precision=scalar("weighted_precision"),
        weighted_recall=scalar("weighted_recall"),
        weighted_f1=scalar("weighted_f1"),
    )


def cohens_kappa(a: Sequence, b: Sequence) -> float:
    """Chance-corrected agreement between two label sequences."""
    if len(a) != len(b):
        raise UsageError(f"length mismatch: {len(a)} vs {len(b)} labels")
    n = len(a)
    if n == 0:
        raise UsageError("agreement needs at least one pair of labels")
    p_o = sum(x == y for x, y in zip(a, b)) / n
    labels = set(a) | set(b)
    p_e = sum(
        (sum(x == c for x in a) / n) * (sum(y == c for y in b) / n) for c in labels
    )
    if p_e >= 1.0 - 1e-15:
        warnings.warn("degenerate marginals: chance agreement is 1")
        return 1.0 if p_o >= 1.0 - 1e-15 else 0.0
    return (p_o - p_e) / (1.0 - p_e)


# ---------------------------------------------------------------------------
# cross-validation harness


@dataclass(frozen=True)
class FoldResult:
    metrics: MetricsReport
    confusion: ConfusionMatrix


@dataclass(frozen=True)
class ModelResult:
    name: str
    folds: tuple[FoldResult, ...]
    mean: MetricsReport


@dataclass(frozen=True)
class CVReport:
    config: dict
    classes: tuple[str, ...]
    n_items: int
    folds: int
    seed: int
    models: dict[str, ModelResult]
    fold_fingerprints: tuple[dict, ...]  # per-fold fitted-state digests
    timings: tuple[dict, ...]  # per-fold wall-clock seconds, kept out of report JSON

    def to_json_dict(self) -> dict:
        return {
            "format": CV_REPORT_FORMAT,
            "config": self.config,
            "classes": list(self.classes),
            "n_items": self.n_items,
            "folds": self.folds,
            "seed": self.seed,
            "fold_fingerprints": list(self.fold_fingerprints),
            "models": {
                name: {
                    "folds": [
                        {
                            "metrics": fr.metrics.to_json_dict(),
                            "confusion": fr.confusion.counts.tolist(),
                        }
                        for fr in result.folds
                    ],
                    "mean": result.mean.to_json_dict(),
                }
                for name, result in self.models.items()
            },
        }


def _config_echo(cfg: ExperimentConfig) -> dict:
    return {
        "dataset": cfg.dataset,
        "subtask": cfg.subtask,
        "features": list(cfg.features),
        "scaling": cfg.scaling,
        "models": list(cfg.models),
        "folds": cfg.folds,
        "seed": cfg.seed,
        "lexicons": dict(sorted(cfg.lexicon_paths.items())),
        "ensemble_members": list(cfg.base_members()),
    }


def _evaluate_fold(
    cfg: ExperimentConfig,
    streams,
    labels,
    classes,
    lex: LexiconSet,
    fold_index: int,
    train_idx,
    test_idx,
):
    tr_streams = [streams[i] for i in train_idx]
    te_streams = [streams[i] for i in test_idx]
    y_tr = [labels[i] for i in train_idx]
    y_te = [labels[i] for i in test_idx]

    tfidf = None
    if "tfidf" in cfg.features:
        tfidf = fit_tfidf(
            tr_streams,
            int(cfg.tfidf_params.get("min_df", 2)),
            int(cfg.tfidf_params.get("max_features", 20000)),
        )
    scaler = None
    if cfg.scaling == "zscore":
        blocks = extract_dense_blocks(tr_streams, cfg.features, lex)
        dense = np.hstack([b for _, b in blocks])
        scaler = fit_feature_scaler(dense)
    fm_tr = _feature_matrix(tr_streams, cfg.features, lex, tfidf, cfg.scaling, scaler)
    fm_te = _feature_matrix(te_streams, cfg.features, lex, tfidf, cfg.scaling, scaler)

    fingerprints = {"train_size": len(train_idx), "test_size": len(test_idx)}
    if tfidf is not None:
        fingerprints["tfidf"] = fingerprint(
            {"vocabulary": tfidf.vocabulary, "idf": list(tfidf.idf)}
        )
    if scaler is not None:
        fingerprints["scaler"] = fingerprint(
            {"mean": list(scaler.mean), "std": list(scaler.std)}
        )

    needed = set(m for m in cfg.models if m in BASE_FAMILIES)
    if any(m not in BASE_FAMILIES for m in cfg.models):
        needed.update(cfg.base_members())
    trained: dict[str, object] = {}
    timing: dict[str, float] = {}
    for family in sorted(needed):
        t0 = time.perf_counter()
        trained[family] = _train_family(
            family,
            matrix_for_family(fm_tr, family),
            y_tr,
            cfg,
            classes,
            ("fold", fold_index),
        )
        timing[f"train_{family}"] = time.perf_counter() - t0

    fold_results: dict[str, FoldResult] = {}
    for name in cfg.models:
        t0 = time.perf_counter()
        if name in BASE_FAMILIES:
            model = trained[name]
            X = matrix_for_family(fm_te, name)
        else:
            members = [trained[m] for m in cfg.base_members()]
            model = M.make_voting(name.split("_")[0], members)
            dense_needed = any(
                m.spec.family in ("svm_rbf", "dt", "rf") for m in members
            )
            X = matrix_for_family(fm_te, "dt" if dense_needed else "lr")
        y_hat = M.predict(model, X)
        cm = confusion_matrix(y_te, y_hat, classes)
        fold_results[name] = FoldResult(prf_scores(cm), cm)
        timing[f"score_{name}"] = time.perf_counter() - t0
    return fold_results, fingerprints, timing


def cross_validate(
    cfg: ExperimentConfig, dataset: Dataset | None = None, jobs: int = 1
) -> CVReport:
    """Stratified k-fold evaluation of every configured model.

    All fitted state (vectorizer, scaler, models) comes from the training
    split of each fold; the test split is only ever transformed and scored.
    """
    ds = dataset if dataset is not None else load_dataset(cfg.dataset)
    view = stage_view(ds, cfg.subtask)
    texts = view.texts()
    labels = view.labels(cfg.subtask)
    classes = class_order(labels, cfg.subtask)
    lex = load_lexicons(cfg)
    pc = preprocess_config(cfg)
    streams = [normalize(t, pc) for t in texts]
    folds = stratified_kfold_labels(labels, cfg.folds, cfg.seed)

    def run(i):
        tr, te = folds[i]
        return _evaluate_fold(cfg, streams, labels, classes, lex, i, tr, te)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run, range(len(folds))))
    else:
        outcomes = [run(i) for i in range(len(folds))]

    models = {}
    for name in cfg.models:
        per_fold = tuple(out[0][name] for out in outcomes)
        models[name] = ModelResult(
            name, per_fold, mean_metrics([fr.metrics for fr in per_fold])
        )
    return CVReport(
        config=_config_echo(cfg),
        classes=classes,
        n_items=len(texts),
        folds=cfg.folds,
        seed=cfg.seed,
        models=models,
        fold_fingerprints=tuple(out[1] for out in outcomes),
        timings=tuple(out[2] for out in outcomes),
    )


# ---------------------------------------------------------------------------
# report rendering


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def render_report_markdown(report: CVReport) -> str:
    lines = [
        "# Cross-validation report",
        "",
        f"- Dataset: `{report.config['dataset']}`",
        f"- Subtask: {report.config['subtask']}"
        f" ({SUBTASK_NAMES.get(report.config['subtask'], '?')})",
        f"- Items: {report.n_items}",
        f"- Folds: {report.folds}",
        f"- Seed: {report.seed}",
        f"- Features: {', '.join(report.config['features'])}",
        f"- Classes: {', '.join(report.classes)}",
        "",
        "## Mean scores over folds",
        "",
    ]
    headers = [
        "Model",
        "Precision (weighted)", "Recall (weighted)", "F1 (weighted)",
        "Precision (macro)", "Recall (macro)", "F1 (macro)",
        "Accuracy",
    ]
    rows = []
    for name, result in report.models.items():
        m = result.mean
        rows.append([
            name,
            _fmt(m.weighted_precision), _fmt(m.weighted_recall),
            _fmt(m.weighted_f1),
            _fmt(m.macro_precision), _fmt(m.macro_recall), _fmt(m.macro_f1),
            _fmt(m.accuracy),
        ])
    lines.append(format_markdown_table(headers, rows))
    for name, result in report.models.items():
        lines += ["", f"## Per-fold scores: {name}", ""]
        fold_rows = [
            [
                str(i + 1),
                _fmt(fr.metrics.weighted_f1),
                _fmt(fr.metrics.macro_f1),
                _fmt(fr.metrics.accuracy),
            ]
            for i, fr in enumerate(result.folds)
        ]
        lines.append(
            format_markdown_table(
                ["Fold", "F1 (weighted)", "F1 (macro)", "Accuracy"], fold_rows
            )
        )
    return "\n".join(lines) + "\n"


def summed_confusion(result: ModelResult) -> ConfusionMatrix:
    labels = result.folds[0].confusion.labels
    total = np.zeros((len(labels), len(labels)), dtype=int)
    for fr in result.folds:
        total += fr.confusion.counts
    return ConfusionMatrix(labels, total)


def confusion_csv(cm: ConfusionMatrix) -> str:
    lines = ["label," + ",".join(cm.labels)]
    for label, row in zip(cm.labels, cm.counts):
        lines.append(label + "," + ",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_cv_artifacts(report: CVReport, output_dir: str) -> list[str]:
    """Write report.json, report.md, per-model confusion CSVs, and the
    timing sidecar. Returns the paths written."""
    os.makedirs(output_dir, exist_ok=True)
    written = []

    def emit(name: str, text: str) -> None:
        path = os.path.join(output_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        written.append(path)

    emit("report.json", canonical_json(report.to_json_dict()) + "\n")
    emit("report.md", render_report_markdown(report))
    for name, result in report.models.items():
        emit(f"confusion_{name}.csv", confusion_csv(summed_confusion(result)))
    emit("timing.json", canonical_json({"folds": list(report.timings)}) + "\n")
    return written


# ---------------------------------------------------------------------------
# corpus profiler


@dataclass(frozen=True)
class ProfileReport:
    subtask: int
    labels: tuple[str, ...]
    counts: tuple[int, ...]
    blocks: dict[str, tuple[tuple[str, ...], np.ndarray]]  # name -> (features, L×F means)

    def to_json_dict(self) -> dict:
        return {
            "subtask": self.subtask,
            "labels": list(self.labels),
            "counts": list(self.counts),
            "blocks": {
                name: {
                    "features": list(features),
                    "means": {
                        label: [float(v) for v in row]
                        for label, row in zip(self.labels, table)
                    },
                }
                for name, (features, table) in self.blocks.items()
            },
        }

    def to_text(self) -> str:
        # Tables are feature-major: one row per feature, one column per label.
        titles = {
            "liwc": "Category features (mean per label)",
            "emotion": "Emotion counts (mean per label)",
            "sentiment": "Sentiment proportions (mean per label)",
        }
        chunks = []
        header_counts = ", ".join(
            f"{label} n={n}" for label, n in zip(self.labels, self.counts)
        )
        chunks.append(f"Feature profile for subtask {self.subtask} ({header_counts})")
        for name, (features, table) in self.blocks.items():
            rows = [
                [feat] + [_fmt(table[j][i]) for j in range(len(self.labels))]
                for i, feat in enumerate(features)
            ]
            chunks.append(titles.get(name, name))
            chunks.append(format_table(["feature"] + list(self.labels), rows))
        return "\n\n".join(chunks) + "\n"


def profile_features(
    d: Dataset,
    lexicons: LexiconSet,
    subtask: int,
    pcfg: PreprocessConfig | None = None,
) -> ProfileReport:
    """Arithmetic mean of every lexicon feature per label value."""
    view = stage_view(d, subtask)
    labels = view.labels(subtask)
    classes = class_order(labels, subtask)
    pc = pcfg if pcfg is not None else default_config()
    streams = [normalize(t, pc) for t in view.texts()]
    groups = {c: [i for i, y in enumerate(labels) if y == c] for c in classes}

    blocks: dict[str, tuple[tuple[str, ...], np.ndarray]] = {}
    if lexicons.category is not None:
        names = ("WC",) + lexicons.category.names
        rows = np.vstack([liwc_features(ts, lexicons.category) for ts in streams])
        blocks["liwc"] = (names, np.vstack([rows[groups[c]].mean(axis=0) for c in classes]))
    if lexicons.emotion is not None:
        rows = np.vstack(
            [emotion_features(ts, lexicons.emotion).astype(float) for ts in streams]
        )
        blocks["emotion"] = (
            EMOTIONS, np.vstack([rows[groups[c]].mean(axis=0) for c in classes])
        )
    if lexicons.valence is not None:
        rows = np.array([sentiment_scores(ts, lexicons.valence) for ts in streams])
        blocks["sentiment"] = (
            SENTIMENT_NAMES,
            np.vstack([rows[groups[c]].mean(axis=0) for c in classes]),
        )
    return ProfileReport(
        subtask=subtask,
        labels=classes,
        counts=tuple(len(groups[c]) for c in classes),
        blocks=blocks,
    )
