"""Core components: run events and the event bus."""
