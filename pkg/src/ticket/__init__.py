"""Decision engine for the implicational relevance logic T-arrow.

Subpackages:
- formula: implicational formulas, parsing, subformulas
- terms: HRM lambda terms, typing, normalization
- combinators: BB'IW derivation certificates and the lambda bridge
- blueprint: stable parts, blueprints, extraction, shuffles, compressions
- compact: compactness of inhabitants and term transformations
- shadow: phi-shadows, compact-shadow enumeration, the decision procedure
- oracle: independent brute-force inhabitant enumeration
- cli: command-line front end
"""

__version__ = "0.1.0"
