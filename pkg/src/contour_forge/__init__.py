"""Contour closures of real segments, real-form lowering and identity checks."""
