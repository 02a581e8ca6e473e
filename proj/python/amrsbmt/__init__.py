"""AMR parsing as string-to-tree translation.

Graphs travel as PENMAN strings, trees as bracketed strings and sentences as
token lists.
"""

from ._core import (
    AmrError,
    AmrLanguageModel,
    NgramModel,
    Parser,
    Taxonomy,
    TaxonomyError,
    bleu,
    canonical_form,
    disconnect,
    extract_rules,
    normalize,
    run_pipeline,
    smatch,
    tokenize,
    tree_to_amr,
    treeify,
)

__all__ = [
    "AmrError",
    "AmrLanguageModel",
    "NgramModel",
    "Parser",
    "Taxonomy",
    "TaxonomyError",
    "bleu",
    "canonical_form",
    "disconnect",
    "extract_rules",
    "normalize",
    "run_pipeline",
    "smatch",
    "tokenize",
    "tree_to_amr",
    "treeify",
]
__version__ = "0.1.0"
