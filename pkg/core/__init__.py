"""Library: bipartite graphs, C4-free gadgets, lower-bound constructions, exact search and extremal tiling."""
