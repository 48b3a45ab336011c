"""Synthetic engineering drawings with exact ground truth."""

from .generator import (TEMPLATES, Drawing, DrawingSpec, GeometryOverflow, Primitive, generate,
                        generate_corpus, load_manifest, spec_from_seed)

__all__ = ["TEMPLATES", "Drawing", "DrawingSpec", "GeometryOverflow", "Primitive", "generate",
           "generate_corpus", "load_manifest", "spec_from_seed"]
