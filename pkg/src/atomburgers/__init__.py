"""Inviscid Burgers on the circle driven by atomic space-time forcing."""
