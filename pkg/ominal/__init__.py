# ominal/__init__.py - Ominal Package
"""
Exact definable sets over the rationals: quantifier elimination, cell
decompositions, definable types, intersecting families, finite tame
transversals and compactness probes for definable topologies.

Contains:
- logic: formulas, quantifier elimination, satisfiability
- cells: cell decompositions, dimension, suprema
- types: definable types as constructor trees
- families: definable families, downward directed cells, extension to types
- transversal: intersection properties and finite tame transversals
- topology: definable topologies, limits and the compactness probe suite
- document / sexpr / cli: S-expression documents and the command-line front end
"""

__version__ = "0.1.0"

__all__ = ["cells", "cli", "config", "document", "exceptions", "families", "fixtures", "logic", "sexpr", "topology", "transversal", "types"]
