"""Exact SNLS solving and omega-regular separability of Buchi VASS from Dyck languages."""

__version__ = "0.1.0"
