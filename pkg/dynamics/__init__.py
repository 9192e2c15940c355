"""
Dynamics package for TopoHopf: the system zoo, rasterization, topological
augmentation and trajectory integration.
"""
