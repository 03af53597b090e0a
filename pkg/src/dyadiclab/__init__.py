"""Exact computations around square functions of dyadic indicator martingales."""

__version__ = "0.1.0"
