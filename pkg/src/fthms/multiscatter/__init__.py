"""Generation-by-generation multiple-scattering recursion."""
