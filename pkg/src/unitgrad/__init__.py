"""Distance fields with unit gradient, and numerical checks that convex
fields with gradient of constant norm are affine."""

__version__ = "0.1.0"
