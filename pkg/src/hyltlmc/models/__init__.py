"""Bundled example models in the text format of hyltlmc.hybrid.modelio."""
