"""Exact parabolic-sheaf calculus over combinatorial log bases."""
