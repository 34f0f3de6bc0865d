"""Mine cropland training labels from a noisy weak layer using k-means regions."""

__version__ = "0.1.0"
