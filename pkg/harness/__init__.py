"""
Harness package for TopoHopf: experiment configuration, orchestration and
resumable result storage.
"""
