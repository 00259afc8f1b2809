# data/__init__.py - Data Module
"""
Shipped data for ominal.

Contains:
- fixtures/*.sexp: declaration documents (crosses, a-topology, lex-cells, appendix-b, boxes)
"""
