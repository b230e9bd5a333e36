"""Invertibility thresholds for trace algebras of interpolating-type zero sets.

Subpackages of interest: ``geometry`` (charts and metric), ``blaschke``
(row products and certified moduli), ``construction`` (uniform and adaptive
stacks), ``covering`` (grid checks and corona bounds), ``modelop`` (finite
sections of the model operator), ``ric`` (partition search) and ``cli``.
"""

__version__ = "0.1.0"
