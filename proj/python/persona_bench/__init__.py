"""Persona-controlled agent benchmarking: measurement core bindings."""

from persona_bench._core import (
    Error,
    Lexicon,
    analyze,
    derive_seed,
    fit_effects,
    load_lexicon,
    parse_lexicon,
    personas,
    render_prompt,
    run_pipeline,
    star,
    t_sf,
    tokenize,
    two_sided_p,
)

__all__ = [
    "Error",
    "Lexicon",
    "analyze",
    "derive_seed",
    "fit_effects",
    "load_lexicon",
    "parse_lexicon",
    "personas",
    "render_prompt",
    "run_pipeline",
    "star",
    "t_sf",
    "tokenize",
    "two_sided_p",
]
