# DeepResT: multi-layer residual sparsifying transforms for image denoising

__version__ = "0.1.0"
