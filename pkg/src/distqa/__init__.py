"""Partition-parallel quality assessment for RDF datasets."""
__version__ = "0.1.0"
