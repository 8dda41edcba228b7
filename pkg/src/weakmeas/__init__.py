"""Post-selected von Neumann measurements and complex weak values."""
