"""arithmso: deciding MSO theories of arithmetic predicates over (N, <).

The pipeline: MSO sentence -> deterministic Muller automaton -> order-word
acceptance -> toric pattern occurrence -> sign oracle for linear forms in
logarithms.
"""

__version__ = "0.1.0"
