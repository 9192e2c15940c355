"""
Utilities package for TopoHopf: logging, configuration, errors and file formats.
"""
