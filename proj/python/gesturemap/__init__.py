"""Map conversation-agent phrases to gestures through a curated concept space."""

from pathlib import Path

from ._gesturemap import (
    ConceptSpace,
    GestureMapper,
    GesturemapError,
    Pipeline,
    PipelineConfig,
    bh_adjust,
    cluster_vectors,
    list_fixtures,
    load_config,
    load_corpus,
    normalize,
    run_contrasts,
    run_fixture,
    score,
    shuffle_pairs,
    text_only,
    wilcoxon_signed_rank,
)

__all__ = [
    "ConceptSpace",
    "GestureMapper",
    "GesturemapError",
    "Pipeline",
    "PipelineConfig",
    "bh_adjust",
    "cluster_vectors",
    "list_fixtures",
    "load_config",
    "load_corpus",
    "normalize",
    "open_config",
    "run_contrasts",
    "run_fixture",
    "score",
    "shuffle_pairs",
    "text_only",
    "wilcoxon_signed_rank",
]


def open_config(path):
    """Pipeline, concept space and gesture mapper described by one config file."""
    config = load_config(Path(path))
    pipeline = Pipeline(config)
    concepts = ConceptSpace.load(pipeline, config.concept_store)
    mapper = GestureMapper(concepts, config.catalog, tau=config.tau, seed=config.seed, fallback=config.fallback_gesture)
    return pipeline, concepts, mapper
