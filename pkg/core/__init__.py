"""Core layer: tree, boundary group, automorphisms, processes, information."""
