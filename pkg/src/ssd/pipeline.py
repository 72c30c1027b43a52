"""Experiment configuration and the fitted text-to-label pipeline.

A pipeline bundles the preprocessing config, the lexicons it was fitted
with (embedded plus fingerprinted), the TF-IDF vectorizer and optional
dense-feature scaler, and one trained model. Fitting touches training
texts only; transforming never mutates fitted state.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import sparse

from . import models as M
from .corpus import GROUP_LABELS, SUPPORT_LABELS, TARGET_LABELS
from .errors import DataError, FormatError, UsageError
from .features import (
    CategoryLexicon,
    EmotionLexicon,
    FeatureMatrix,
    Scaler,
    TfidfVectorizer,
    ValenceLexicon,
    combine_features,
    emotion_features,
    fit_feature_scaler,
    fit_tfidf,
    liwc_features,
    load_category_lexicon,
    load_emotion_lexicon,
    load_valence_lexicon,
    sentiment_scores,
    transform_tfidf_corpus,
)
from .preprocess import PreprocessConfig, TokenStream, default_config, normalize
from .util import canonical_json, derive_seed, fingerprint

PIPELINE_FORMAT = "ssd-pipeline-v1"

FEATURE_BLOCKS = ("liwc", "emotion", "sentiment", "tfidf")
BASE_FAMILIES = ("lr", "svm_linear", "svm_rbf", "dt", "rf")
VOTE_KINDS = ("soft_vote", "hard_vote")
MODEL_NAMES = BASE_FAMILIES + VOTE_KINDS

# canonical label order per subtask, used whenever the observed labels fit it
_TAXONOMY = {1: SUPPORT_LABELS, 2: TARGET_LABELS, 3: GROUP_LABELS}


def class_order(labels: Sequence[str], subtask: int) -> tuple[str, ...]:
    observed = set(labels)
    canon = _TAXONOMY.get(subtask, ())
    if observed <= set(canon):
        return tuple(c for c in canon if c in observed)
    return tuple(sorted(observed))


@dataclass(frozen=True)
class LexiconSet:
    category: CategoryLexicon | None = None
    emotion: EmotionLexicon | None = None
    valence: ValenceLexicon | None = None

    def fingerprints(self) -> dict[str, str]:
        out = {}
        if self.category is not None:
            out["category"] = fingerprint(_category_jsonable(self.category))
        if self.emotion is not None:
            out["emotion"] = fingerprint(_emotion_jsonable(self.emotion))
        if self.valence is not None:
            out["valence"] = fingerprint(_valence_jsonable(self.valence))
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    subtask: int
    features: tuple[str, ...] = ("tfidf",)
    scaling: str = "none"
    models: tuple[str, ...] = ("lr",)
    folds: int = 5
    seed: int = 0
    lexicon_paths: dict = field(default_factory=dict)
    output_dir: str | None = None
    ensemble_members: tuple[str, ...] | None = None
    hyperparameters: dict = field(default_factory=dict)
    preprocess_overrides: dict = field(default_factory=dict)
    tfidf_params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.subtask not in (1, 2, 3):
            raise UsageError(f"subtask must be 1, 2, or 3, got {self.subtask}")
        if not self.features:
            raise UsageError("at least one feature block is required")
        for f in self.features:
            if f not in FEATURE_BLOCKS:
                raise UsageError(f"unknown feature block {f!r}")
        if self.scaling not in ("none", "zscore"):
            raise UsageError(f"unknown scaling {self.scaling!r}")
        if not self.models:
            raise UsageError("at least one model is required")
        for m in self.models:
            if m not in MODEL_NAMES:
                raise UsageError(f"unknown model {m!r}")
        if self.ensemble_members is not None:
            for m in self.ensemble_members:
                if m not in BASE_FAMILIES:
                    raise UsageError(f"ensemble member must be a base model, got {m!r}")
        if self.folds < 2:
            raise UsageError(f"folds must be >= 2, got {self.folds}")
        needs_lex = {"liwc": "category", "emotion": "emotion", "sentiment": "valence"}
        for block, key in needs_lex.items():
            if block in self.features and key not in self.lexicon_paths:
                raise UsageError(
                    f"feature block {block!r} requires a {key!r} lexicon path"
                )
        unknown = set(self.tfidf_params) - {"min_df", "max_features"}
        if unknown:
            raise UsageError(f"unknown tfidf keys: {sorted(unknown)}")
        min_df = self.tfidf_params.get("min_df", 1)
        if not (isinstance(min_df, int) and min_df >= 1):
            raise UsageError(f"tfidf min_df must be >= 1, got {min_df!r}")
        max_features = self.tfidf_params.get("max_features")
        if max_features is not None and not (
            isinstance(max_features, int) and max_features >= 1
        ):
            raise UsageError(
                f"tfidf max_features must be None or >= 1, got {max_features!r}"
            )

    def base_members(self) -> tuple[str, ...]:
        if self.ensemble_members is not None:
            return self.ensemble_members
        listed = tuple(m for m in self.models if m in BASE_FAMILIES)
        return listed or BASE_FAMILIES


_CONFIG_KEYS = {
    "dataset", "subtask", "features", "scaling", "models", "folds", "seed",
    "lexicons", "output_dir", "ensemble_members", "hyperparameters",
    "preprocess", "tfidf",
}
_LEXICON_KEYS = {"category", "emotion", "valence", "negators", "boosters"}


def config_from_dict(raw: dict, base_dir: str = ".") -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise UsageError("experiment config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    if "dataset" not in raw:
        raise UsageError("config is missing required key 'dataset'")
    if "subtask" not in raw:
        raise UsageError("config is missing required key 'subtask'")
    lexicons = raw.get("lexicons", {})
    if not isinstance(lexicons, dict):
        raise UsageError("config key 'lexicons' must be an object")
    unknown = set(lexicons) - _LEXICON_KEYS
    if unknown:
        raise UsageError(f"unknown lexicon keys: {sorted(unknown)}")

    def _path(p):
        return os.path.normpath(p if os.path.isabs(p) else os.path.join(base_dir, p))

    out_dir = raw.get("output_dir")
    try:
        return ExperimentConfig(
            dataset=_path(str(raw["dataset"])),
            subtask=int(raw["subtask"]),
            features=tuple(raw.get("features", ("tfidf",))),
            scaling=str(raw.get("scaling", "none")),
            models=tuple(raw.get("models", ("lr",))),
            folds=int(raw.get("folds", 5)),
            seed=int(raw.get("seed", 0)),
            lexicon_paths={k: _path(str(v)) for k, v in lexicons.items()},
            output_dir=_path(str(out_dir)) if out_dir is not None else None,
            ensemble_members=(
                tuple(raw["ensemble_members"])
                if raw.get("ensemble_members") is not None
                else None
            ),
            hyperparameters=dict(raw.get("hyperparameters", {})),
            preprocess_overrides=dict(raw.get("preprocess", {})),
            tfidf_params=dict(raw.get("tfidf", {})),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"malformed experiment config: {exc}") from None


def load_experiment_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from None
    return config_from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))


def load_lexicons(cfg: ExperimentConfig) -> LexiconSet:
    paths = cfg.lexicon_paths
    category = emotion = valence = None
    if "liwc" in cfg.features:
        category = load_category_lexicon(paths["category"])
    if "emotion" in cfg.features:
        emotion = load_emotion_lexicon(paths["emotion"])
    if "sentiment" in cfg.features:
        valence = load_valence_lexicon(
            paths["valence"], paths.get("negators"), paths.get("boosters")
        )
    return LexiconSet(category, emotion, valence)


def preprocess_config(cfg: ExperimentConfig) -> PreprocessConfig:
    allowed = {"lowercase", "strip_punct", "remove_stopwords", "stem"}
    unknown = set(cfg.preprocess_overrides) - allowed
    if unknown:
        raise UsageError(f"unknown preprocess keys: {sorted(unknown)}")
    return default_config(**cfg.preprocess_overrides)


# ---------------------------------------------------------------------------
# feature assembly


def extract_dense_blocks(
    streams: Sequence[TokenStream], features: Sequence[str], lex: LexiconSet
) -> list[tuple[str, np.ndarray]]:
    blocks: list[tuple[str, np.ndarray]] = []
    if "liwc" in features:
        blocks.append(
            ("liwc", np.vstack([liwc_features(ts, lex.category) for ts in streams])
             if streams else np.empty((0, 1 + len(lex.category.categories))))
        )
    if "emotion" in features:
        blocks.append(
            ("emotion", np.vstack([emotion_features(ts, lex.emotion) for ts in streams])
             if streams else np.empty((0, 8)))
        )
    if "sentiment" in features:
        blocks.append(
            ("sentiment", np.array([sentiment_scores(ts, lex.valence) for ts in streams])
             if streams else np.empty((0, 3)))
        )
    return blocks


def matrix_for_family(fm: FeatureMatrix, family: str):
    """Linear families keep the TF-IDF block sparse; others densify."""
    if fm.tfidf is None:
        return fm.dense
    if family in ("lr", "svm_linear"):
        if fm.dense.shape[1] == 0:
            return fm.tfidf
        return sparse.hstack([sparse.csr_matrix(fm.dense), fm.tfidf], format="csr")
    return fm.to_dense()


# ---------------------------------------------------------------------------
# fitted pipeline


@dataclass(frozen=True)
class FittedPipeline:
    subtask: int
    preprocess: PreprocessConfig
    features: tuple[str, ...]
    lexicons: LexiconSet
    tfidf: TfidfVectorizer | None
    scaling: str
    scaler: Scaler | None
    model: object  # TrainedModel | VotingModel
    classes: tuple[str, ...]

    def lexicon_fingerprints(self) -> dict[str, str]:
        return self.lexicons.fingerprints()


def _feature_matrix(
    streams: Sequence[TokenStream],
    features: Sequence[str],
    lex: LexiconSet,
    tfidf: TfidfVectorizer | None,
    scaling: str,
    scaler: Scaler | None,
) -> FeatureMatrix:
    blocks = extract_dense_blocks(streams, features, lex)
    if tfidf is not None:
        blocks.append(("tfidf", transform_tfidf_corpus(tfidf, streams)))
    return combine_features(blocks, scaling=scaling, fit_stats=scaler)


def _train_family(family: str, X, y, cfg: ExperimentConfig, classes, fold_tag):
    seed = derive_seed(cfg.seed, "model", family, *fold_tag)
    hyper = dict(cfg.hyperparameters.get(family, {}))
    spec = M.ModelSpec(family, hyper, seed)
    trainer = {
        "lr": M.train_lr,
        "svm_linear": M.train_svm_linear,
        "svm_rbf": M.train_svm_rbf,
        "dt": M.train_dt,
        "rf": M.train_rf,
    }[family]
    return trainer(X, y, spec, classes=classes)


def fit_models(
    fm: FeatureMatrix,
    y: Sequence[str],
    cfg: ExperimentConfig,
    classes: Sequence[str],
    fold_tag: tuple = (),
) -> dict[str, object]:
    """Train every configured model (voting ensembles reuse base fits)."""
    needed = set(m for m in cfg.models if m in BASE_FAMILIES)
    if any(m in VOTE_KINDS for m in cfg.models):
        needed.update(cfg.base_members())
    base: dict[str, object] = {}
    for family in sorted(needed):
        base[family] = _train_family(
            family, matrix_for_family(fm, family), y, cfg, classes, fold_tag
        )
    out: dict[str, object] = {}
    for name in cfg.models:
        if name in BASE_FAMILIES:
            out[name] = base[name]
        else:
            members = [base[m] for m in cfg.base_members()]
            out[name] = M.make_voting(name.split("_")[0], members)
    return out


def fit_pipeline(
    texts: Sequence[str],
    labels: Sequence[str],
    cfg: ExperimentConfig,
    model_name: str | None = None,
    lexicons: LexiconSet | None = None,
    pcfg: PreprocessConfig | None = None,
    fold_tag: tuple = (),
) -> FittedPipeline:
    """Fit one pipeline end to end on the given training texts."""
    if model_name is None:
        model_name = cfg.models[0]
    lex = lexicons if lexicons is not None else load_lexicons(cfg)
    pc = pcfg if pcfg is not None else preprocess_config(cfg)
    streams = [normalize(t, pc) for t in texts]
    tfidf = None
    if "tfidf" in cfg.features:
        tfidf = fit_tfidf(
            streams,
            int(cfg.tfidf_params.get("min_df", 2)),
            int(cfg.tfidf_params.get("max_features", 20000)),
        )
    scaler = None
    if cfg.scaling == "zscore":
        blocks = extract_dense_blocks(streams, cfg.features, lex)
        dense = (
            np.hstack([b for _, b in blocks]) if blocks else np.empty((len(streams), 0))
        )
        scaler = fit_feature_scaler(dense)
    fm = _feature_matrix(streams, cfg.features, lex, tfidf, cfg.scaling, scaler)
    classes = class_order(labels, cfg.subtask)
    single_cfg = replace(cfg, models=(model_name,))
    model = fit_models(fm, labels, single_cfg, classes, fold_tag)[model_name]
    return FittedPipeline(
        cfg.subtask, pc, cfg.features, lex, tfidf, cfg.scaling, scaler, model,
        classes,
    )


def pipeline_matrix(p: FittedPipeline, texts: Sequence[str]) -> FeatureMatrix:
    streams = [normalize(t, p.preprocess) for t in texts]
    return _feature_matrix(
        streams, p.features, p.lexicons, p.tfidf, p.scaling, p.scaler
    )


def predict_pipeline(
    p: FittedPipeline, texts: Sequence[str]
) -> tuple[list[str], np.ndarray]:
    fm = pipeline_matrix(p, texts)
    family = getattr(getattr(p.model, "spec", None), "family", None)
    X = matrix_for_family(fm, family if family else "lr")
    labels = M.predict(p.model, X)
    proba = M.predict_proba(p.model, X)
    return labels, proba


# ---------------------------------------------------------------------------
# serialization


def _category_jsonable(lex: CategoryLexicon) -> dict:
    return {"categories": [[name, list(pats)] for name, pats in lex.categories]}


def _emotion_jsonable(lex: EmotionLexicon) -> dict:
    return {"entries": {w: sorted(es) for w, es in lex.entries.items()}}


def _valence_jsonable(lex: ValenceLexicon) -> dict:
    return {
        "entries": dict(sorted(lex.entries.items())),
        "negators": sorted(lex.negators),
        "boosters": dict(sorted(lex.boosters.items())),
        "negation_factor": lex.negation_factor,
    }


def _lexicons_to_jsonable(lex: LexiconSet) -> dict:
    out = {}
    if lex.category is not None:
        out["category"] = _category_jsonable(lex.category)
    if lex.emotion is not None:
        out["emotion"] = _emotion_jsonable(lex.emotion)
    if lex.valence is not None:
        out["valence"] = _valence_jsonable(lex.valence)
    return out


def _lexicons_from_jsonable(raw: dict) -> LexiconSet:
    category = emotion = valence = None
    if "category" in raw:
        category = CategoryLexicon(
            tuple((name, tuple(pats)) for name, pats in raw["category"]["categories"])
        )
    if "emotion" in raw:
        emotion = EmotionLexicon(
            {w: frozenset(es) for w, es in raw["emotion"]["entries"].items()}
        )
    if "valence" in raw:
        v = raw["valence"]
        valence = ValenceLexicon(
            dict(v["entries"]),
            frozenset(v["negators"]),
            dict(v["boosters"]),
            v["negation_factor"],
        )
    return LexiconSet(category, emotion, valence)


def _preprocess_to_jsonable(pc: PreprocessConfig) -> dict:
    return {
        "lowercase": pc.lowercase,
        "strip_punct": pc.strip_punct,
        "remove_stopwords": pc.remove_stopwords,
        "stem": pc.stem,
        "emoji_map": dict(sorted(pc.emoji_map.items())),
        "abbrev_map": dict(sorted(pc.abbrev_map.items())),
        "stopwords": sorted(pc.stopwords),
    }


def _preprocess_from_jsonable(raw: dict) -> PreprocessConfig:
    return PreprocessConfig(
        lowercase=raw["lowercase"],
        strip_punct=raw["strip_punct"],
        remove_stopwords=raw["remove_stopwords"],
        stem=raw["stem"],
        emoji_map=dict(raw["emoji_map"]),
        abbrev_map=dict(raw["abbrev_map"]),
        stopwords=frozenset(raw["stopwords"]),
    )


def pipeline_to_envelope(p: FittedPipeline) -> dict:
    tfidf = None
    if p.tfidf is not None:
        tfidf = {
            "vocabulary": p.tfidf.vocabulary,
            "idf": list(p.tfidf.idf),
            "min_df": p.tfidf.min_df,
            "max_features": p.tfidf.max_features,
        }
    scaler = None
    if p.scaler is not None:
        scaler = {"mean": list(p.scaler.mean), "std": list(p.scaler.std)}
    return {
        "format": PIPELINE_FORMAT,
        "subtask": p.subtask,
        "preprocess": _preprocess_to_jsonable(p.preprocess),
        "features": list(p.features),
        "lexicons": _lexicons_to_jsonable(p.lexicons),
        "lexicon_fingerprints": p.lexicon_fingerprints(),
        "tfidf": tfidf,
        "scaling": p.scaling,
        "scaler": scaler,
        "model": M.model_to_envelope(p.model),
        "classes": list(p.classes),
    }


def pipeline_from_envelope(env: dict) -> FittedPipeline:
    if not isinstance(env, dict) or env.get("format") != PIPELINE_FORMAT:
        raise FormatError(
            f"expected a {PIPELINE_FORMAT} pipeline file, got format "
            f"{env.get('format') if isinstance(env, dict) else type(env).__name__!r}"
        )
    lex = _lexicons_from_jsonable(env["lexicons"])
    recorded = env.get("lexicon_fingerprints", {})
    if recorded and recorded != lex.fingerprints():
        raise UsageError("lexicon fingerprints do not match the embedded lexicons")
    tfidf = None
    if env["tfidf"] is not None:
        t = env["tfidf"]
        tfidf = TfidfVectorizer(
            {k: int(v) for k, v in t["vocabulary"].items()},
            np.array(t["idf"], dtype=float),
            int(t["min_df"]),
            int(t["max_features"]),
        )
    scaler = None
    if env["scaler"] is not None:
        scaler = Scaler(
            np.array(env["scaler"]["mean"], dtype=float),
            np.array(env["scaler"]["std"], dtype=float),
        )
    return FittedPipeline(
        int(env["subtask"]),
        _preprocess_from_jsonable(env["preprocess"]),
        tuple(env["features"]),
        lex,
        tfidf,
        env["scaling"],
        scaler,
        M.model_from_envelope(env["model"]),
        tuple(env["classes"]),
    )


def save_pipeline(p: FittedPipeline, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(pipeline_to_envelope(p)) + "\n")


def load_pipeline(path: str) -> FittedPipeline:
    try:
        fh = open(path, encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"pipeline file not found: {path}") from None
    with fh:
        try:
            env = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON: {exc}") from None
    return pipeline_from_envelope(env)
