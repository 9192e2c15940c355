"""
Reports package for TopoHopf: SVG heatmaps and CSV tables.
"""
