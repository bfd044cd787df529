"""
Storage module

Contains the data models (schemas), image IO and file storage for
models, coefficient maps, reports and manifests. Import the submodules
directly; they depend on the numeric services.
"""
