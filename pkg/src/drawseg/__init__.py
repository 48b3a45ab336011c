"""Raster engineering drawing vectorization and component segmentation."""

__version__ = "0.1.0"
