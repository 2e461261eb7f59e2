"""Recollements, right-lax limits of lax diagrams over finite posets, and sheaf reconstruction on stratified finite spaces."""

__version__ = "0.1.0"
