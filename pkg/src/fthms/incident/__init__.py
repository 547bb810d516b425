"""Incident field catalog in frequency and time domains."""
