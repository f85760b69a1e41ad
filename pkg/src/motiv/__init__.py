"""County-level moral-framing analytics for annotated microblog corpora."""

__version__ = "0.1.0"
