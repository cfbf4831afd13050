"""
Blossom: blossoming bijections for bipartite plane maps

Exact combinatorics of bipartite plane maps through fractional
alpha_d-orientations: closure and opening of well-charged blossoming trees,
trumpets, cornets and doubly rooted maps, labeled mobiles, and the
generating series that count them, including the quartic Ising model.
"""

__version__ = "1.0.0"
__author__ = "Anonymous"
